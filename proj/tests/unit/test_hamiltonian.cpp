#include "helpers.hpp"
#include "spinbeat/hamiltonian.hpp"

#include <doctest.h>

#include <random>

using namespace spinbeat;

namespace {

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// k [3 (I1.n)(I2.n) - I1.I2] from Cartesian components.
ComplexMatrix cartesian_dipolar(const PairGeometry& g, const SpinMatrices& s) {
    const ComplexMatrix ops[3] = {(s.Iplus + s.Iminus) / 2.0, (s.Iplus - s.Iminus) / Complex(0, 2), s.Iz};
    const Vec3 n(std::sin(g.theta) * std::cos(g.phi), std::sin(g.theta) * std::sin(g.phi), std::cos(g.theta));
    const Eigen::Index d = s.dim;
    ComplexMatrix in = ComplexMatrix::Zero(d, d), dot = ComplexMatrix::Zero(d * d, d * d);
    for (int c = 0; c < 3; ++c) {
        in += n(c) * ops[c];
        dot += kron(ops[c], ops[c]);
    }
    return g.prefactor * (3.0 * kron(in, in) - dot);
}

}  // namespace

TEST_CASE("dipolar alphabet equals the Cartesian dipole form") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> th(0.0, constants::kPi), ph(0.0, 2 * constants::kPi);
    for (double I : {0.5, 1.0, 1.5}) {
        const SpinMatrices s = spin_matrices(I);
        for (int trial = 0; trial < 20; ++trial) {
            PairGeometry g;
            g.theta = th(rng);
            g.phi = ph(rng);
            g.prefactor = 1.7;
            const ComplexMatrix h = dipolar_pair_hamiltonian(g, s, TermMask::full()).matrix();
            CHECK((h - cartesian_dipolar(g, s)).norm() < 1e-12);
        }
    }
}

TEST_CASE("term masks partition the dipolar Hamiltonian") {
    const SpinMatrices s = spin_matrices(1.5);
    PairGeometry g{1.0, 0.8, 2.1, 1.3};
    ComplexMatrix sum = ComplexMatrix::Zero(16, 16);
    for (const TermMask m : {TermMask{true, false, false, false}, TermMask{false, true, false, false},
                             TermMask{false, false, true, false}, TermMask{false, false, false, true}}) {
        sum += dipolar_pair_hamiltonian(g, s, m).matrix();
    }
    CHECK((sum - dipolar_pair_hamiltonian(g, s, TermMask::full()).matrix()).norm() < 1e-13);
}

TEST_CASE("A and B vanish at the magic angle") {
    const SpinMatrices s = spin_matrices(0.5);
    const PairGeometry g{1.0, constants::kMagicAngle, 0.3, 1.0};
    CHECK(dipolar_pair_hamiltonian(g, s, TermMask::secular()).matrix().norm() < 1e-15);
    CHECK(dipolar_pair_hamiltonian(g, s, TermMask::full()).matrix().norm() > 0.1);
}

TEST_CASE("secular Hamiltonian conserves total Iz") {
    const auto r = testing::random_bath(4, 5, 1.5);
    const std::vector<std::size_t> cl{0, 1, 2, 3};
    const ComplexMatrix h = cluster_hamiltonian(cl, r, {}, TermMask::secular()).matrix();
    const SpinMatrices s = spin_matrices(1.5);
    ComplexMatrix total = ComplexMatrix::Zero(h.rows(), h.cols());
    for (int k = 0; k < 4; ++k) total += embed(s.Iz, k, 4, 4);
    CHECK((h * total - total * h).norm() < 1e-9 * h.norm());
    const ComplexMatrix hf = cluster_hamiltonian(cl, r, {}, TermMask::full()).matrix();
    CHECK((hf * total - total * hf).norm() > 1e-6 * hf.norm());
}

TEST_CASE("cluster Hamiltonian structure") {
    const auto r = testing::nn_pair(3000.0, 0.1);
    const std::vector<std::size_t> cl{0, 1};
    const ComplexMatrix h0 = cluster_hamiltonian(cl, r, {}, TermMask::none()).matrix();
    const ComplexMatrix b = total_bath_operator(cl, r).matrix();
    CHECK((h0 - 0.5 * b).norm() < 1e-12);
    CHECK(b(0, 0).real() == doctest::Approx(0.5 * (3300.0 + 2700.0)));
    CHECK(b(1, 1).real() == doctest::Approx(0.5 * (3300.0 - 2700.0)));
    const std::vector<std::size_t> dup{0, 0};
    CHECK_THROWS_AS(cluster_hamiltonian(dup, r, {}, TermMask::full()), Error);
    const std::vector<std::size_t> out{0, 2};
    CHECK_THROWS_AS(total_bath_operator(out, r), Error);
    // slot order follows the cluster
    const std::vector<std::size_t> rev{1, 0};
    const ComplexMatrix hr = cluster_hamiltonian(rev, r, {}, TermMask::full()).matrix();
    const ComplexMatrix hn = cluster_hamiltonian(cl, r, {}, TermMask::full()).matrix();
    const Eigensystem er = eigh(HermitianOperator(hr)), en = eigh(HermitianOperator(hn));
    CHECK((er.values - en.values).norm() < 1e-9);
    CHECK((hr - hn).norm() > 1.0);
}

TEST_CASE("effective hyperfine prefactor") {
    CHECK(EffectiveParams{}.c_hf() == 0.5);
    CHECK(EffectiveParams{1.0, 0.0}.c_hf() == 0.5);
    CHECK(EffectiveParams{0.5, -1.5}.c_hf() == 1.0);
}

TEST_CASE("term mask text and algebra") {
    CHECK(TermMask::full().to_string() == "A,B,CD,EF");
    CHECK(TermMask::none().to_string() == "none");
    CHECK(TermMask::parse("A, B") == TermMask::secular());
    CHECK(TermMask::parse("all") == TermMask::full());
    CHECK(TermMask::parse("none") == TermMask::none());
    CHECK_THROWS_AS(TermMask::parse("A,G"), Error);
    CHECK(TermMask::secular().is_secular());
    CHECK(TermMask{false, false, true, false}.disjoint(TermMask{false, false, false, true}));
    CHECK((TermMask::secular() | TermMask{false, false, true, true}) == TermMask::full());
}
