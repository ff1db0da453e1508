#pragma once

#include "spinbeat/common.hpp"

namespace spinbeat {

/// Spin-I operators in the basis m = I, I-1, ..., -I (hbar = 1).
struct SpinMatrices {
    int dim = 0;
    ComplexMatrix Iz;
    ComplexMatrix Iplus;
    ComplexMatrix Iminus;
};

SpinMatrices spin_matrices(double spin_I);

/// Dense Hermitian matrix. Construction checks Hermiticity to 1e-12
/// relative to the largest entry.
class HermitianOperator {
public:
    explicit HermitianOperator(ComplexMatrix entries);

    const ComplexMatrix& matrix() const { return entries_; }
    Eigen::Index dim() const { return entries_.rows(); }

private:
    ComplexMatrix entries_;
};

/// max |H - H^dagger| / max |H|; zero for the zero matrix.
double hermiticity_defect(const ComplexMatrix& m);

/// 1 (x) ... (x) op (x) ... (x) 1 with `op` in `slot`. Slot 0 varies slowest.
ComplexMatrix embed(const ComplexMatrix& op, int slot, int cluster_size, int local_dim);

/// Embeds a two-site operator acting on (slot_a, slot_b), where `op` is laid
/// out with slot_a as the slower index.
ComplexMatrix embed_pair(const ComplexMatrix& op, int slot_a, int slot_b, int cluster_size,
                         int local_dim);

struct Eigensystem {
    Eigen::VectorXd values;  ///< ascending
    ComplexMatrix vectors;   ///< columns are eigenvectors
};

Eigensystem eigh(const HermitianOperator& h);

}  // namespace spinbeat
