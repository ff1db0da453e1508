#include "spinbeat/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spinbeat {

namespace {

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

void check_cluster(std::span<const std::size_t> cluster, const BathRealization& realization) {
    if (cluster.empty()) throw Error("cluster is empty");
    for (std::size_t k = 0; k < cluster.size(); ++k) {
        if (cluster[k] >= realization.size()) throw Error("cluster index out of range");
        for (std::size_t l = 0; l < k; ++l) {
            if (cluster[k] == cluster[l]) throw Error("cluster has duplicate indices");
        }
    }
}

}  // namespace

std::string TermMask::to_string() const {
    std::string out;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!out.empty()) out += ',';
        out += name;
    };
    add(A, "A");
    add(B, "B");
    add(CD, "CD");
    add(EF, "EF");
    return out.empty() ? "none" : out;
}

TermMask TermMask::parse(const std::string& text) {
    TermMask m = none();
    if (text == "none") return m;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
        if (tok == "A") m.A = true;
        else if (tok == "B") m.B = true;
        else if (tok == "CD") m.CD = true;
        else if (tok == "EF") m.EF = true;
        else if (tok == "all") m = full();
        else throw Error("unknown dipolar term '" + tok + "'");
    }
    return m;
}

double EffectiveParams::c_hf() const { return 0.5 * (std::abs(P_plus) + std::abs(P_minus)); }

HermitianOperator dipolar_pair_hamiltonian(const PairGeometry& geom, const SpinMatrices& s,
                                           const TermMask& mask) {
    if (!(geom.prefactor > 0.0)) throw Error("dipolar term: prefactor must be positive");
    const double c = std::cos(geom.theta);
    const double sn = std::sin(geom.theta);
    const Complex phase = std::polar(1.0, -geom.phi);  // e^{-i phi}
    const Eigen::Index d = s.dim;
    ComplexMatrix h = ComplexMatrix::Zero(d * d, d * d);

    if (mask.A) h += (3.0 * c * c - 1.0) * kron(s.Iz, s.Iz);
    if (mask.B) {
        h += 0.25 * (1.0 - 3.0 * c * c) * (kron(s.Iplus, s.Iminus) + kron(s.Iminus, s.Iplus));
    }
    if (mask.CD) {
        const double k = 0.75 * std::sin(2.0 * geom.theta);
        h += (k * phase) * (kron(s.Iplus, s.Iz) + kron(s.Iz, s.Iplus));
        h += (k * std::conj(phase)) * (kron(s.Iminus, s.Iz) + kron(s.Iz, s.Iminus));
    }
    if (mask.EF) {
        const double k = 0.75 * sn * sn;
        h += (k * phase * phase) * kron(s.Iplus, s.Iplus);
        h += (k * std::conj(phase * phase)) * kron(s.Iminus, s.Iminus);
    }
    return HermitianOperator(geom.prefactor * h);
}

HermitianOperator cluster_hamiltonian(std::span<const std::size_t> cluster,
                                      const BathRealization& realization,
                                      const EffectiveParams& params, const TermMask& mask) {
    check_cluster(cluster, realization);
    const SpinMatrices s = spin_matrices(realization.species.spin_I);
    const int n = static_cast<int>(cluster.size());
    ComplexMatrix h = params.c_hf() * total_bath_operator(cluster, realization).matrix();
    if (mask == TermMask::none()) return HermitianOperator(std::move(h));
    for (int k = 0; k < n; ++k) {
        for (int l = k + 1; l < n; ++l) {
            const PairGeometry g =
                pair_geometry(realization.positions[cluster[k]], realization.positions[cluster[l]],
                              realization.hf_axis, realization.species);
            h += embed_pair(dipolar_pair_hamiltonian(g, s, mask).matrix(), k, l, n, s.dim);
        }
    }
    return HermitianOperator(std::move(h));
}

HermitianOperator total_bath_operator(std::span<const std::size_t> cluster,
                                      const BathRealization& realization) {
    check_cluster(cluster, realization);
    const SpinMatrices s = spin_matrices(realization.species.spin_I);
    const int n = static_cast<int>(cluster.size());
    Eigen::Index dim = 1;
    for (int k = 0; k < n; ++k) dim *= s.dim;
    // Diagonal: sum_k A_k m_k over the product basis.
    ComplexMatrix b = ComplexMatrix::Zero(dim, dim);
    for (Eigen::Index idx = 0; idx < dim; ++idx) {
        Eigen::Index rest = idx;
        double value = 0.0;
        for (int k = n - 1; k >= 0; --k) {
            const Eigen::Index local = rest % s.dim;
            rest /= s.dim;
            value += realization.hf_couplings[cluster[k]] * s.Iz(local, local).real();
        }
        b(idx, idx) = value;
    }
    return HermitianOperator(std::move(b));
}

}  // namespace spinbeat
