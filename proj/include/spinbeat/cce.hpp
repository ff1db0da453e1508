#pragma once

#include "spinbeat/hamiltonian.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace spinbeat {

using Cluster = std::vector<std::size_t>;

/// Connected spin clusters of the proximity graph (edges where
/// |r_ij| <= cutoff), up to max_order spins, ordered by size and then
/// lexicographically.
struct ClusterSet {
    int max_order = 1;
    double cutoff = 0.0;  ///< m
    std::vector<Cluster> clusters;
    /// For each cluster, indices of its proper subclusters present in the set.
    std::vector<std::vector<std::size_t>> subclusters;

    std::size_t count_of_size(std::size_t size) const;
    std::optional<std::size_t> find(const Cluster& cluster) const;
};

ClusterSet enumerate_clusters(const BathRealization& realization, double cutoff, int max_order);

/// Rebuilds subcluster links and checks that every connected proper subset
/// of every cluster is present. Throws Error on a missing subcluster.
void validate_cluster_set(ClusterSet& set, const BathRealization& realization);

/// Uniform grid of normalized times tbar = t * A_bar starting at zero.
struct TimeGrid {
    double t_max = 200.0;
    std::size_t samples = 4096;

    double step() const { return samples > 1 ? t_max / static_cast<double>(samples - 1) : 0.0; }
    double at(std::size_t i) const { return static_cast<double>(i) * step(); }
    void validate() const;
};

/// C(t) split as C(0) plus C(t) - C(0). The dynamic part is kept separately
/// because it is typically many orders of magnitude below C(0). Units: A_bar^2.
struct CorrelationTrace {
    double static_part = 0.0;
    std::vector<Complex> dynamic;

    Complex at(std::size_t i) const { return static_part + dynamic[i]; }
};

/// Weighted transition lines of one cluster: C(t) = static_part +
/// sum_k [sym_k (cos w_k t - 1) + i asym_k sin w_k t].
struct TransitionLines {
    double static_part = 0.0;
    std::vector<double> omega;  ///< E_m - E_n in units of A_bar, m < n
    std::vector<double> sym;    ///< w_mn + w_nm
    std::vector<double> asym;   ///< w_mn - w_nm
};

TransitionLines transition_lines(std::span<const std::size_t> cluster,
                                 const BathRealization& realization,
                                 const EffectiveParams& params, const TermMask& mask);

/// Infinite-temperature two-point correlation of the cluster,
/// (1/d) sum_mn |<m|B|n>|^2 exp(i (E_m - E_n) t).
CorrelationTrace cluster_correlation(std::span<const std::size_t> cluster,
                                     const BathRealization& realization,
                                     const EffectiveParams& params, const TermMask& mask,
                                     const TimeGrid& grid);

struct CorrelationSeries {
    TimeGrid grid;
    double c0 = 0.0;               ///< C(0), A_bar^2
    std::vector<double> dynamic;   ///< Re C(t) - C(0), A_bar^2
    double max_imag = 0.0;         ///< max |Im C(t)| before it was dropped
    double A_bar = 0.0;            ///< rad/s
    int order = 0;                 ///< CCE order, 0 for the exact evaluation
    TermMask mask;
    std::size_t spins = 0;

    std::vector<double> values() const;
};

/// Irreducible contributions by increasing cluster size,
/// C~_z = C_z - sum_{z' in z} C~_z', summed over the whole set.
/// `traces` is parallel to `set.clusters`.
CorrelationSeries cce_combine(std::span<const CorrelationTrace> traces, ClusterSet set,
                              const BathRealization& realization, const TimeGrid& grid);

/// Weight of each cluster's own correlation in the CCE total, so that
/// sum_z C~_z = sum_z coefficient_z C_z. Satisfies
/// sum_{z' containing z} coefficient_z' = 1 for every z.
std::vector<double> cce_coefficients(const ClusterSet& set);

/// Streaming evaluation of the CCE total over `set`: clusters are evaluated
/// in parallel into fixed-size chunks and the chunks are reduced in order,
/// so the result does not depend on the thread count.
CorrelationSeries cce_correlation(const BathRealization& realization, const ClusterSet& set,
                                  const EffectiveParams& params, const TermMask& mask,
                                  const TimeGrid& grid);

/// Whole-bath evaluation in the full Hilbert space. Limited to 4096 states.
CorrelationSeries exact_bath_correlation(const BathRealization& realization,
                                         const EffectiveParams& params, const TermMask& mask,
                                         const TimeGrid& grid);

inline constexpr std::size_t kExactDimensionCap = 4096;

}  // namespace spinbeat
