#pragma once

#include "spinbeat/common.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace spinbeat {

/// Nuclear species of the bath. A single species populates the whole bath.
struct SpeciesParams {
    double spin_I = 0.5;
    double gamma = -5.3190e7;      ///< gyromagnetic ratio, rad s^-1 T^-1
    double A0_over_Edd = 1.0e4;    ///< hyperfine peak strength in units of E_dd
    double L0 = 3.4e-9;            ///< electron confinement radius, m

    void validate() const;
    int local_dim() const { return static_cast<int>(2.0 * spin_I + 0.5) + 1; }

    static SpeciesParams silicon29();
    static SpeciesParams carbon13();
};

struct LatticeSpec {
    double a0 = 5.43e-10;                  ///< lattice constant, m
    std::array<int, 3> box{10, 10, 7};     ///< conventional cells per axis
    SpeciesParams species;
    double abundance = 0.02;
    std::uint64_t seed = 1;
    /// Lattice indices of spinful sites. When set, the PRNG is bypassed.
    std::optional<std::vector<std::size_t>> explicit_sites;

    void validate() const;
    std::size_t site_count() const;
};

struct HyperfineAssignment {
    std::vector<double> couplings;  ///< rad/s
    double mean = 0.0;
    double stddev = 0.0;            ///< population standard deviation
};

struct PairGeometry {
    double r_norm = 0.0;     ///< m
    double theta = 0.0;      ///< polar angle from the hf axis, [0, pi]
    double phi = 0.0;        ///< azimuth in the hf frame, [0, 2 pi)
    double prefactor = 0.0;  ///< (mu0/4pi) hbar gamma^2 / r^3, rad/s
};

/// A populated bath: spinful site positions relative to the central spin,
/// their hyperfine couplings and the orientation of the hyperfine axis.
struct BathRealization {
    double a0 = 0.0;
    SpeciesParams species;
    std::vector<std::size_t> site_index;  ///< lattice index of each spin
    std::vector<Vec3> positions;          ///< m, central spin at the origin
    std::vector<double> hf_couplings;     ///< rad/s
    Vec3 hf_axis = Vec3::UnitZ();
    double E_dd = 0.0;                    ///< rad/s
    double A_bar = 0.0;                   ///< rad/s
    double sigma_hf = 0.0;                ///< rad/s

    std::size_t size() const { return positions.size(); }
    double A0() const { return species.A0_over_Edd * E_dd; }
    void validate() const;
};

/// All 8 * prod(box) diamond sites, ordered by (ix, iy, iz) cell index and
/// then basis index, centered on the midpoint of the site cloud. The basis
/// is the FCC sublattice {0, (0,½,½), (½,0,½), (½,½,0)} followed by the same
/// four shifted by a0/4 (1,1,1). The center is never a lattice site.
std::vector<Vec3> build_diamond_lattice(const LatticeSpec& spec);

/// Bernoulli selection of lattice sites. One variate per site, in order,
/// from std::mt19937_64 seeded with `seed`; the variate is the top 53 bits
/// of each draw scaled by 2^-53.
std::vector<std::size_t> sample_spinful_sites(std::size_t site_count, double rho,
                                              std::uint64_t seed);

/// A_i = A0 exp(-|r_i|^2 / L0^2)
HyperfineAssignment assign_hf_couplings(std::span<const Vec3> positions,
                                        const SpeciesParams& species, double a0);

/// Dipolar energy of two spins one bond length (a0 sqrt(3)/4) apart, rad/s.
double compute_E_dd(const SpeciesParams& species, double a0);

/// Rotation whose columns are the hf frame axes expressed in crystal
/// coordinates. It is the minimal rotation taking [001] onto `hf_axis`;
/// for an axis antiparallel to [001] it is a rotation by pi about [100].
Eigen::Matrix3d hf_frame(const Vec3& hf_axis);

PairGeometry pair_geometry(const Vec3& r_i, const Vec3& r_j, const Vec3& hf_axis,
                           const SpeciesParams& species);

/// Unit vector for a polar/azimuthal direction given in degrees.
Vec3 axis_from_angles(double theta_deg, double phi_deg);

BathRealization make_realization(const LatticeSpec& spec, const Vec3& hf_axis);

/// Builds a realization from explicit positions and couplings.
BathRealization make_realization(double a0, const SpeciesParams& species,
                                 std::vector<std::size_t> site_index,
                                 std::vector<Vec3> positions,
                                 std::vector<double> hf_couplings, const Vec3& hf_axis);

/// Same sites and couplings, different hf axis.
BathRealization with_hf_axis(BathRealization realization, const Vec3& hf_axis);

/// Comma-separated text. One `key=value` header line carrying a0, L0,
/// A0/E_dd, spin_I, gamma and the hf axis, then `index,x,y,z,A` per spin
/// with 17 significant digits.
void write_realization(std::ostream& out, const BathRealization& realization);
BathRealization read_realization(std::istream& in);

}  // namespace spinbeat
