#pragma once

#include "spinbeat/cce.hpp"
#include "spinbeat/lattice.hpp"

#include <random>
#include <vector>

namespace testing {

using namespace spinbeat;

inline constexpr double kSiA0 = 5.43e-10;

/// Bath with explicit positions and couplings; site indices are 0..n-1.
inline BathRealization custom_bath(std::vector<Vec3> positions, std::vector<double> couplings,
                                   const Vec3& axis = Vec3::UnitZ(), double spin = 0.5,
                                   double a0 = kSiA0) {
    SpeciesParams sp = SpeciesParams::silicon29();
    sp.spin_I = spin;
    std::vector<std::size_t> idx(positions.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    return make_realization(a0, sp, std::move(idx), std::move(positions), std::move(couplings), axis);
}

/// Nearest-neighbour pair along [111] with couplings A(1 + d) and A(1 - d).
inline BathRealization nn_pair(double A, double d, const Vec3& axis = Vec3::UnitZ(),
                               double spin = 0.5) {
    const Vec3 origin(1.1e-9, 0.4e-9, -0.3e-9);
    return custom_bath({origin, origin + Vec3(1, 1, 1) * (kSiA0 / 4)}, {A * (1 + d), A * (1 - d)},
                       axis, spin);
}

/// `n` spins on distinct diamond sites of a small box, couplings comparable
/// to the dipolar energy so that the dynamics is not perturbative.
inline BathRealization random_bath(std::size_t n, std::uint64_t seed, double spin = 0.5,
                                   const Vec3& axis = Vec3(1, 2, 2) / 3.0) {
    LatticeSpec spec;
    spec.box = {2, 2, 2};
    const std::vector<Vec3> sites = build_diamond_lattice(spec);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(sites.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_real_distribution<double> u(1500.0, 4000.0);
    std::vector<Vec3> pos;
    std::vector<double> hf;
    for (std::size_t k = 0; k < n; ++k) {
        pos.push_back(sites[order[k]]);
        hf.push_back(u(rng));
    }
    return custom_bath(pos, hf, axis, spin);
}

inline double sum_rule(const BathRealization& r) {
    const double I = r.species.spin_I;
    double s = 0.0;
    for (double a : r.hf_couplings) s += a * a;
    return s * I * (I + 1.0) / 3.0 / (r.A_bar * r.A_bar);
}

inline std::vector<double> tone(std::size_t n, double dt, double omega, double phase = 0.0) {
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = std::cos(omega * j * dt + phase);
    return x;
}

}  // namespace testing
