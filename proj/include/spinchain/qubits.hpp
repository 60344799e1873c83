#pragma once

// Small dense-qubit helpers. Qubit 0 is the most significant bit of a
// computational-basis index.

#include <cmath>
#include <vector>

#include "spinchain/common.hpp"

namespace spinchain::qubits {

inline int bit_of(Eigen::Index index, int qubit, int n_qubits) {
    return static_cast<int>((index >> (n_qubits - 1 - qubit)) & 1);
}

// Compose a sub-index from the bits of `index` at `qubits`, in that order.
inline Eigen::Index gather(Eigen::Index index, const std::vector<int>& qubits, int n_qubits) {
    Eigen::Index out = 0;
    for (int q : qubits) out = (out << 1) | bit_of(index, q, n_qubits);
    return out;
}

inline std::vector<int> complement(const std::vector<int>& keep, int n_qubits) {
    std::vector<int> rest;
    for (int q = 0; q < n_qubits; ++q) {
        bool kept = false;
        for (int k : keep) kept = kept || (k == q);
        if (!kept) rest.push_back(q);
    }
    return rest;
}

/// Reduced density matrix on `keep` (output qubit order follows `keep`).
inline MatrixC reduced_density(const MatrixC& rho, int n_qubits, const std::vector<int>& keep) {
    const Eigen::Index dim = Eigen::Index{1} << n_qubits;
    if (rho.rows() != dim || rho.cols() != dim) throw ValidationError("reduced_density: dimension mismatch");
    const std::vector<int> rest = complement(keep, n_qubits);
    const Eigen::Index dk = Eigen::Index{1} << keep.size();
    MatrixC out = MatrixC::Zero(dk, dk);
    for (Eigen::Index r = 0; r < dim; ++r) {
        const Eigen::Index rr = gather(r, rest, n_qubits);
        const Eigen::Index rk = gather(r, keep, n_qubits);
        for (Eigen::Index c = 0; c < dim; ++c) {
            if (gather(c, rest, n_qubits) != rr) continue;
            out(rk, gather(c, keep, n_qubits)) += rho(r, c);
        }
    }
    return out;
}

inline MatrixC reduced_density_pure(const VectorC& psi, int n_qubits, const std::vector<int>& keep) {
    const Eigen::Index dim = Eigen::Index{1} << n_qubits;
    if (psi.size() != dim) throw ValidationError("reduced_density_pure: dimension mismatch");
    const std::vector<int> rest = complement(keep, n_qubits);
    const Eigen::Index dk = Eigen::Index{1} << keep.size();
    const Eigen::Index dr = Eigen::Index{1} << rest.size();
    // psi as a (keep x rest) matrix, rho_keep = A A^dagger
    MatrixC a = MatrixC::Zero(dk, dr);
    for (Eigen::Index i = 0; i < dim; ++i) a(gather(i, keep, n_qubits), gather(i, rest, n_qubits)) = psi(i);
    return a * a.adjoint();
}

/// -Tr[rho log2 rho]. Eigenvalues in (-1e-10, 0) are clipped, anything more
/// negative is an error; eigenvalues below 1e-14 contribute nothing.
inline Real von_neumann_entropy(const MatrixC& rho) {
    Eigen::SelfAdjointEigenSolver<MatrixC> solver(rho, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("von_neumann_entropy: eigensolver failed");
    Real s = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        Real w = solver.eigenvalues()(i);
        if (w < -1e-10) throw NumericalError("von_neumann_entropy: density matrix has a negative eigenvalue");
        if (w < 1e-14) continue;
        s -= w * std::log2(w);
    }
    return s;
}

inline Mat2 pauli_x() { Mat2 m; m << 0, 1, 1, 0; return m; }
inline Mat2 pauli_y() { Mat2 m; m << 0, -I, I, 0; return m; }
inline Mat2 pauli_z() { Mat2 m; m << 1, 0, 0, -1; return m; }

inline Mat4 kron(const Mat2& a, const Mat2& b) {
    Mat4 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
    return out;
}

/// Apply a single-qubit gate to `qubit` of an n-qubit operator from the left.
inline MatrixC apply_left(const Mat2& gate, int qubit, int n_qubits, const MatrixC& op) {
    const Eigen::Index dim = Eigen::Index{1} << n_qubits;
    const Eigen::Index stride = Eigen::Index{1} << (n_qubits - 1 - qubit);
    MatrixC out(dim, op.cols());
    for (Eigen::Index r = 0; r < dim; ++r) {
        const int b = bit_of(r, qubit, n_qubits);
        const Eigen::Index r0 = b ? r - stride : r;
        out.row(r) = gate(b, 0) * op.row(r0) + gate(b, 1) * op.row(r0 + stride);
    }
    return out;
}

}  // namespace spinchain::qubits
