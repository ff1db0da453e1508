#pragma once

#include "spinbeat/lattice.hpp"
#include "spinbeat/spinops.hpp"

#include <span>
#include <string>

namespace spinbeat {

/// Switches for the dipolar alphabet. C/D and E/F are toggled as adjoint
/// pairs so every masked Hamiltonian stays Hermitian.
struct TermMask {
    bool A = true;
    bool B = true;
    bool CD = true;
    bool EF = true;

    static TermMask full() { return {}; }
    static TermMask secular() { return {true, true, false, false}; }
    static TermMask none() { return {false, false, false, false}; }

    bool is_secular() const { return !CD && !EF; }
    bool disjoint(const TermMask& o) const {
        return !(A && o.A) && !(B && o.B) && !(CD && o.CD) && !(EF && o.EF);
    }
    TermMask operator|(const TermMask& o) const {
        return {A || o.A, B || o.B, CD || o.CD, EF || o.EF};
    }
    bool operator==(const TermMask&) const = default;

    /// "A,B,CD,EF" style listing of the enabled terms; "none" if empty.
    std::string to_string() const;
    static TermMask parse(const std::string& text);
};

/// Central-spin projections entering the averaged hyperfine field.
struct EffectiveParams {
    double P_plus = 0.5;
    double P_minus = -0.5;

    double c_hf() const;
};

HermitianOperator dipolar_pair_hamiltonian(const PairGeometry& geom, const SpinMatrices& spins,
                                           const TermMask& mask);

/// c_hf sum_i A_i Iz_i + sum_{i<j} H_dd(i, j) on the cluster's tensor space,
/// in rad/s. Slots follow the order of `cluster`.
HermitianOperator cluster_hamiltonian(std::span<const std::size_t> cluster,
                                      const BathRealization& realization,
                                      const EffectiveParams& params, const TermMask& mask);

/// Overhauser operator sum_i A_i Iz_i restricted to the cluster, rad/s.
HermitianOperator total_bath_operator(std::span<const std::size_t> cluster,
                                      const BathRealization& realization);

}  // namespace spinbeat
