#include "helpers.hpp"

#include <doctest.h>

#include <numeric>

using namespace spinbeat;
using testing::custom_bath;
using testing::random_bath;
using testing::sum_rule;

namespace {

BathRealization oracle_bath(double spin) {
    const double a0 = testing::kSiA0;
    const Vec3 o = Vec3(0.3, 0.1, 0.2) * a0;
    const double q = a0 / 4;
    return custom_bath({o, o + q * Vec3(1, 1, 1), o + q * Vec3(2, 0, 0)}, {3000.0, 2500.0, 1800.0},
                       Vec3(1, 2, 2) / 3.0, spin);
}

struct Frozen {
    std::size_t index;
    double dC;
};

// Direct time evolution, tests/oracles/direct_evolution.py; grid step 0.1.
const double kC0Half = 0.78068117845749663;
const Frozen kHalf[] = {{7, -0.2010561247775734}, {31, -0.34876729294993974},
                        {125, -0.34770739524962996}, {400, -0.37131881466003691}};
const double kC0ThreeHalf = 3.9034058922874832;
const Frozen kThreeHalf[] = {{7, -2.5940194686472964}, {31, -3.0944736097314642},
                             {125, -3.0465413418164085}, {400, -3.0241184812191335}};

const TimeGrid kOracleGrid{40.0, 401};

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("exact and CCE correlations match direct time evolution") {
    for (const auto& [spin, c0, frozen] :
         {std::tuple{0.5, kC0Half, std::span<const Frozen>(kHalf)},
          std::tuple{1.5, kC0ThreeHalf, std::span<const Frozen>(kThreeHalf)}}) {
        CAPTURE(spin);
        const BathRealization r = oracle_bath(spin);
        const CorrelationSeries exact = exact_bath_correlation(r, {}, TermMask::full(), kOracleGrid);
        const ClusterSet set = enumerate_clusters(r, 10 * r.a0, 3);
        const CorrelationSeries cce = cce_correlation(r, set, {}, TermMask::full(), kOracleGrid);
        CHECK(exact.c0 == doctest::Approx(c0).epsilon(1e-12));
        CHECK(cce.c0 == doctest::Approx(c0).epsilon(1e-12));
        for (const Frozen& f : frozen) {
            CHECK(std::abs(exact.dynamic[f.index] - f.dC) < 1e-10);
            CHECK(std::abs(cce.dynamic[f.index] - f.dC) < 1e-10);
        }
    }
}

TEST_CASE("sum rule and realness for any order, mask and geometry") {
    const TermMask masks[] = {TermMask::full(), TermMask::secular(), TermMask::none(),
                              TermMask{true, false, true, false}, TermMask{false, false, false, true}};
    const TimeGrid grid{100.0, 512};
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        for (double spin : {0.5, 1.5}) {
            const BathRealization r = random_bath(spin > 1 ? 4 : 6, seed, spin);
            for (int order = 1; order <= 3; ++order) {
                for (const TermMask& m : masks) {
                    const ClusterSet set = enumerate_clusters(r, 1.2 * r.a0, order);
                    const CorrelationSeries s = cce_correlation(r, set, {}, m, grid);
                    CHECK(std::abs(s.c0 / sum_rule(r) - 1.0) < 1e-10);
                    CHECK(s.max_imag < 1e-10 * s.c0);
                    CHECK(s.dynamic[0] == 0.0);
                }
            }
        }
    }
}

TEST_CASE("CCE at full order reproduces the exact bath") {
    const TimeGrid grid{150.0, 600};
    for (std::size_t n : {2u, 3u, 4u, 5u}) {
        for (double spin : {0.5, 1.5}) {
            if (spin > 1 && n > 5) continue;
            const BathRealization r = random_bath(n, 100 + n, spin);
            const auto exact = exact_bath_correlation(r, {}, TermMask::full(), grid);
            const ClusterSet set = enumerate_clusters(r, 100 * r.a0, static_cast<int>(n));
            const auto cce = cce_correlation(r, set, {}, TermMask::full(), grid);
            CHECK(max_diff(exact.values(), cce.values()) < 1e-10);
        }
    }
}

TEST_CASE("streaming coefficients agree with the literal recursion") {
    const BathRealization r = random_bath(7, 9);
    const TimeGrid grid{80.0, 300};
    const ClusterSet set = enumerate_clusters(r, 1.1 * r.a0, 3);
    std::vector<CorrelationTrace> traces;
    for (const Cluster& c : set.clusters) traces.push_back(cluster_correlation(c, r, {}, TermMask::full(), grid));
    const CorrelationSeries lit = cce_combine(traces, set, r, grid);
    const CorrelationSeries str = cce_correlation(r, set, {}, TermMask::full(), grid);
    CHECK(std::abs(lit.c0 - str.c0) < 1e-12 * lit.c0);
    CHECK(max_diff(lit.dynamic, str.dynamic) < 1e-12);

    const std::vector<double> coef = cce_coefficients(set);
    for (std::size_t z = 0; z < set.clusters.size(); ++z) {
        double total = coef[z];
        for (std::size_t k = 0; k < set.clusters.size(); ++k) {
            const auto& sub = set.subclusters[k];
            if (std::find(sub.begin(), sub.end(), z) != sub.end()) total += coef[k];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("disconnected clusters contribute additively") {
    const double a0 = testing::kSiA0;
    const Vec3 far(40e-9, 0, 0);
    const Vec3 o = Vec3(0.1, 0.2, 0.3) * a0, q = Vec3(1, 1, 1) * a0 / 4;
    const std::vector<double> hf{2000, 2600, 3100, 2200, 1900};
    const BathRealization both = custom_bath({o, o + q, far, far + q, far + 2 * q}, hf);
    const TimeGrid grid{60.0, 256};
    const auto exact = exact_bath_correlation(both, {}, TermMask::full(), grid);
    const ClusterSet set = enumerate_clusters(both, 1.5 * a0, 3);
    CHECK(set.count_of_size(2) == 4);
    CHECK(set.count_of_size(3) == 1);
    const auto cce = cce_correlation(both, set, {}, TermMask::full(), grid);
    CHECK(max_diff(exact.values(), cce.values()) < 1e-10);
}

TEST_CASE("cluster enumeration") {
    const double a0 = testing::kSiA0;
    const Vec3 q = Vec3(1, 1, 1) * a0 / 4;
    // a chain of four spins
    const BathRealization chain = custom_bath({Vec3::Zero(), q, 2 * q, 3 * q}, {1e3, 1e3, 1e3, 1e3});
    const ClusterSet set = enumerate_clusters(chain, 0.5 * a0, 4);
    CHECK(set.count_of_size(1) == 4);
    CHECK(set.count_of_size(2) == 3);
    CHECK(set.count_of_size(3) == 2);
    CHECK(set.count_of_size(4) == 1);
    CHECK(set.find({2, 1}).has_value());
    CHECK_FALSE(set.find({0, 2}).has_value());
    CHECK(enumerate_clusters(chain, 0.5 * a0, 9).max_order == 4);
    CHECK_THROWS_AS(enumerate_clusters(chain, 0.5 * a0, 0), Error);

    ClusterSet broken = set;
    broken.clusters.erase(broken.clusters.begin() + 4);  // drop {0,1}
    CHECK_THROWS_WITH_AS(validate_cluster_set(broken, chain), "cluster set is missing a subcluster", Error);
    ClusterSet nosingle = set;
    nosingle.clusters.erase(nosingle.clusters.begin());
    CHECK_THROWS_AS(validate_cluster_set(nosingle, chain), Error);
}

TEST_CASE("special baths") {
    const TimeGrid grid{50.0, 200};
    const BathRealization one = custom_bath({Vec3(1e-9, 0, 0)}, {2500.0}, Vec3::UnitZ(), 1.5);
    const auto s = exact_bath_correlation(one, {}, TermMask::full(), grid);
    CHECK(s.c0 == doctest::Approx(1.5 * 2.5 / 3.0));
    CHECK(*std::max_element(s.dynamic.begin(), s.dynamic.end()) == 0.0);

    const BathRealization pair = testing::nn_pair(2500.0, 0.2);
    const auto ex = exact_bath_correlation(pair, {}, TermMask::full(), grid);
    const std::vector<std::size_t> both{0, 1};
    const CorrelationTrace tr = cluster_correlation(both, pair, {}, TermMask::full(), grid);
    for (std::size_t j = 0; j < grid.samples; ++j) CHECK(std::abs(tr.at(j).real() - ex.values()[j]) < 1e-12);

    std::vector<Vec3> pos;
    std::vector<double> hf;
    for (int k = 0; k < 13; ++k) {
        pos.push_back(Vec3(k, 0, 0) * 1e-9);
        hf.push_back(1000.0);
    }
    CHECK_THROWS_AS(exact_bath_correlation(custom_bath(pos, hf), {}, TermMask::full(), grid), Error);
}

TEST_CASE("stationarity: C(-t) is the conjugate of C(t)") {
    const BathRealization r = random_bath(3, 4, 1.5);
    const std::vector<std::size_t> cl{0, 1, 2};
    const TransitionLines lines = transition_lines(cl, r, {}, TermMask::full());
    for (double t : {0.3, 2.0, 17.5}) {
        Complex plus = lines.static_part, minus = lines.static_part;
        for (std::size_t k = 0; k < lines.omega.size(); ++k) {
            plus += lines.sym[k] * (std::cos(lines.omega[k] * t) - 1) + Complex(0, lines.asym[k] * std::sin(lines.omega[k] * t));
            minus += lines.sym[k] * (std::cos(-lines.omega[k] * t) - 1) + Complex(0, lines.asym[k] * std::sin(-lines.omega[k] * t));
        }
        CHECK(std::abs(plus - std::conj(minus)) < 1e-12);
    }
    for (double a : lines.asym) CHECK(std::abs(a) < 1e-14);
}

TEST_CASE("evaluation is deterministic") {
    LatticeSpec spec;
    spec.box = {4, 4, 4};
    spec.abundance = 0.05;
    const BathRealization r = make_realization(spec, Vec3(1, 1, 1));
    const ClusterSet set = enumerate_clusters(r, 2.7 * r.a0, 3);
    const TimeGrid grid{200.0, 1024};
    const auto a = cce_correlation(r, set, {}, TermMask::full(), grid);
    const auto b = cce_correlation(r, set, {}, TermMask::full(), grid);
    CHECK(a.c0 == b.c0);
    CHECK(a.dynamic == b.dynamic);
    CHECK(std::abs(a.c0 / sum_rule(r) - 1.0) < 1e-10);
}

TEST_CASE("time grid validation") {
    CHECK_THROWS_AS((TimeGrid{1.0, 1}.validate()), Error);
    CHECK_THROWS_AS((TimeGrid{0.0, 10}.validate()), Error);
    CHECK(TimeGrid{}.samples == 4096);
    CHECK(TimeGrid{}.t_max == 200.0);
}
