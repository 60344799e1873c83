#pragma once

// State of the two edge blocks, qubits ordered (A1, A2, B1, B2).
// Basis index = 8 j_A1 + 4 j_A2 + 2 j_B1 + j_B2.

#include <optional>
#include <string_view>

#include "spinchain/common.hpp"
#include "spinchain/qubits.hpp"

namespace spinchain {

enum EdgeQubit : int { A1 = 0, A2 = 1, B1 = 2, B2 = 3 };

// "1100" -> 12
inline int basis_index(std::string_view label) {
    if (label.size() != 4) throw DomainError("basis_index: label must have four bits");
    int idx = 0;
    for (char c : label) {
        if (c != '0' && c != '1') throw DomainError("basis_index: label must be binary");
        idx = 2 * idx + (c - '0');
    }
    return idx;
}

inline Vec16 basis_state(std::string_view label) {
    Vec16 v = Vec16::Zero();
    v(basis_index(label)) = 1.0;
    return v;
}

class FourQubitState {
public:
    static FourQubitState pure(const Vec16& psi) {
        if (std::abs(psi.norm() - 1.0) > 1e-10) throw ValidationError("FourQubitState: pure state is not normalised");
        FourQubitState s;
        s.psi_ = psi;
        return s;
    }

    static FourQubitState mixed(const Mat16& rho) {
        if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
            throw ValidationError("FourQubitState: density matrix is not Hermitian");
        if (std::abs(rho.trace() - Complex{1.0}) > 1e-10)
            throw ValidationError("FourQubitState: density matrix trace differs from 1");
        Eigen::SelfAdjointEigenSolver<Mat16> solver(rho, Eigen::EigenvaluesOnly);
        if (solver.eigenvalues().minCoeff() < -1e-10)
            throw ValidationError("FourQubitState: density matrix is not positive semidefinite");
        FourQubitState s;
        s.rho_ = rho;
        return s;
    }

    bool is_pure() const { return psi_.has_value(); }

    const Vec16& vector() const {
        if (!psi_) throw DomainError("FourQubitState: state is stored as a density matrix");
        return *psi_;
    }

    Mat16 density() const {
        if (psi_) return (*psi_) * psi_->adjoint();
        return *rho_;
    }

    Real purity() const {
        if (psi_) return 1.0;
        return (rho_->adjoint() * (*rho_)).trace().real();
    }

    /// Reduced state on the given edge qubits.
    MatrixC reduced(const std::vector<int>& keep) const {
        if (psi_) return qubits::reduced_density_pure(*psi_, 4, keep);
        return qubits::reduced_density(*rho_, 4, keep);
    }

private:
    FourQubitState() = default;
    std::optional<Vec16> psi_;
    std::optional<Mat16> rho_;
};

}  // namespace spinchain
