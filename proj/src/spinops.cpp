#include "spinbeat/spinops.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace spinbeat {

SpinMatrices spin_matrices(double spin_I) {
    const double twice = 2.0 * spin_I;
    if (!(twice >= 1.0 - 1e-12) || std::abs(twice - std::round(twice)) > 1e-12) {
        throw Error("spin_matrices: spin must be a positive half-integer");
    }
    const int dim = static_cast<int>(std::round(twice)) + 1;
    const double I = 0.5 * std::round(twice);
    SpinMatrices s;
    s.dim = dim;
    s.Iz = ComplexMatrix::Zero(dim, dim);
    s.Iplus = ComplexMatrix::Zero(dim, dim);
    // index k holds m = I - k
    for (int k = 0; k < dim; ++k) s.Iz(k, k) = I - k;
    for (int k = 1; k < dim; ++k) {
        const double m = I - k;
        s.Iplus(k - 1, k) = std::sqrt(I * (I + 1.0) - m * (m + 1.0));
    }
    s.Iminus = s.Iplus.adjoint();
    return s;
}

double hermiticity_defect(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    const double scale = m.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

HermitianOperator::HermitianOperator(ComplexMatrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) throw Error("HermitianOperator: matrix is not square");
    if (entries_.size() > 0 && hermiticity_defect(entries_) > 1e-12) {
        throw Error("HermitianOperator: matrix is not Hermitian");
    }
}

ComplexMatrix embed(const ComplexMatrix& op, int slot, int cluster_size, int local_dim) {
    if (op.rows() != local_dim || op.cols() != local_dim) {
        throw Error("embed: operator does not match the local dimension");
    }
    if (slot < 0 || slot >= cluster_size) throw Error("embed: slot out of range");
    Eigen::Index outer = 1, inner = 1;
    for (int k = 0; k < slot; ++k) outer *= local_dim;
    for (int k = slot + 1; k < cluster_size; ++k) inner *= local_dim;
    const Eigen::Index dim = outer * local_dim * inner;
    ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
    for (Eigen::Index o = 0; o < outer; ++o) {
        for (Eigen::Index r = 0; r < local_dim; ++r) {
            for (Eigen::Index c = 0; c < local_dim; ++c) {
                const Complex v = op(r, c);
                if (v == Complex(0.0)) continue;
                const Eigen::Index row0 = (o * local_dim + r) * inner;
                const Eigen::Index col0 = (o * local_dim + c) * inner;
                for (Eigen::Index i = 0; i < inner; ++i) out(row0 + i, col0 + i) = v;
            }
        }
    }
    return out;
}

ComplexMatrix embed_pair(const ComplexMatrix& op, int slot_a, int slot_b, int cluster_size,
                         int local_dim) {
    const Eigen::Index d = local_dim;
    if (op.rows() != d * d || op.cols() != d * d) {
        throw Error("embed_pair: operator does not match the local dimension");
    }
    if (slot_a < 0 || slot_b < 0 || slot_a >= cluster_size || slot_b >= cluster_size ||
        slot_a == slot_b) {
        throw Error("embed_pair: invalid slots");
    }
    Eigen::Index dim = 1;
    for (int k = 0; k < cluster_size; ++k) dim *= d;
    Eigen::Index stride_a = 1, stride_b = 1;
    for (int k = slot_a + 1; k < cluster_size; ++k) stride_a *= d;
    for (int k = slot_b + 1; k < cluster_size; ++k) stride_b *= d;

    ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        const Eigen::Index ca = (col / stride_a) % d;
        const Eigen::Index cb = (col / stride_b) % d;
        const Eigen::Index rest = col - ca * stride_a - cb * stride_b;
        for (Eigen::Index ra = 0; ra < d; ++ra) {
            for (Eigen::Index rb = 0; rb < d; ++rb) {
                const Complex v = op(ra * d + rb, ca * d + cb);
                if (v == Complex(0.0)) continue;
                out(rest + ra * stride_a + rb * stride_b, col) = v;
            }
        }
    }
    return out;
}

Eigensystem eigh(const HermitianOperator& h) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix());
    if (solver.info() != Eigen::Success) throw Error("eigh: eigensolver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace spinbeat
