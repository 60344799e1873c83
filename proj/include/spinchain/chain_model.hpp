#pragma once

// Single-particle description of the XX chain with weakly coupled end blocks.
//
// Sites use global 1-based labels: A1 = 1, A2 = 2, channel sites 3..M+2,
// B1 = N-1, B2 = N, with N = M + 4. Energies are in the same units as J.

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spinchain/common.hpp"

namespace spinchain {

struct ChainSpec {
    int M = 1;       // channel length
    Real J = 1.0;    // bulk coupling
    Real g = 0.1;    // block-channel coupling

    int N() const { return M + 4; }

    int site_A1() const { return 1; }
    int site_A2() const { return 2; }
    int site_B1() const { return N() - 1; }
    int site_B2() const { return N(); }

    void validate() const {
        if (M < 1) throw ValidationError("ChainSpec.M: channel length must be >= 1, got " + std::to_string(M));
        if (!std::isfinite(J) || J <= 0.0)
            throw ValidationError("ChainSpec.J: bulk coupling must be finite and > 0");
        if (!std::isfinite(g) || g <= 0.0 || g > J)
            throw ValidationError("ChainSpec.g: end coupling must satisfy 0 < g <= J");
    }

    static ChainSpec from_sites(int N, Real J, Real g) {
        ChainSpec spec{N - 4, J, g};
        spec.validate();
        return spec;
    }
};

// Nearest-neighbour couplings J_i for bonds (i, i+1), i = 1..N-1, stored 0-based.
using CouplingProfile = std::vector<Real>;

inline CouplingProfile build_full_profile(const ChainSpec& spec) {
    spec.validate();
    const int n = spec.N();
    CouplingProfile profile(static_cast<std::size_t>(n - 1), spec.J);
    profile[1] = spec.g;                               // A2 - ch1
    profile[static_cast<std::size_t>(n - 3)] = spec.g; // chM - B1
    return profile;
}

inline CouplingProfile uniform_profile(int sites, Real J) {
    if (sites < 2) throw ValidationError("uniform_profile: need at least two sites");
    return CouplingProfile(static_cast<std::size_t>(sites - 1), J);
}

// Eigenpairs of a hopping Hamiltonian, ascending, columns of `vectors` are
// the single-particle eigenstates in the site basis.
struct SpectralDecomposition {
    VectorR values;
    MatrixR vectors;

    int sites() const { return static_cast<int>(values.size()); }
};

inline MatrixR hopping_matrix(const CouplingProfile& profile) {
    const auto n = static_cast<Eigen::Index>(profile.size() + 1);
    MatrixR h = MatrixR::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        h(i, i + 1) = profile[static_cast<std::size_t>(i)];
        h(i + 1, i) = profile[static_cast<std::size_t>(i)];
    }
    return h;
}

inline SpectralDecomposition diagonalize(const CouplingProfile& profile) {
    if (profile.empty()) throw ValidationError("diagonalize: empty coupling profile");
    for (Real c : profile) {
        if (!std::isfinite(c)) throw ValidationError("diagonalize: non-finite coupling in profile");
    }
    const auto n = static_cast<Eigen::Index>(profile.size() + 1);
    VectorR diag = VectorR::Zero(n);
    VectorR sub(n - 1);
    for (Eigen::Index i = 0; i + 1 < n; ++i) sub(i) = profile[static_cast<std::size_t>(i)];

    Eigen::SelfAdjointEigenSolver<MatrixR> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "diagonalize: tridiagonal eigensolver did not converge for profile [";
        for (std::size_t i = 0; i < profile.size(); ++i) msg << (i ? ", " : "") << profile[i];
        msg << "]";
        throw NumericalError(msg.str());
    }

    SpectralDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
    // first nonzero component positive
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const Real v = out.vectors(i, k);
            if (std::abs(v) > 1e-12) {
                if (v < 0.0) out.vectors.col(k) *= -1.0;
                break;
            }
        }
    }
    return out;
}

/// Closed-form eigenmode of the bare uniform channel of length M.
///
/// The modes are real. The mirror relation alpha_1 = conj(alpha_M) = a e^{i theta}
/// is realised in the gauge where e^{2 i theta} = alpha_M / alpha_1 = (-1)^{m+1},
/// i.e. theta = 0 for odd m and theta = pi/2 for even m.
struct ChannelMode {
    int index = 1;
    Real energy = 0.0;
    VectorR amplitudes;     // alpha_x, x = 1..M stored 0-based
    Real edge_magnitude = 0.0;
    Real edge_phase = 0.0;

    Real edge_phase_factor() const { return std::cos(2.0 * edge_phase); }
};

inline ChannelMode channel_mode(int m, int M, Real J) {
    if (M < 1) throw DomainError("channel_mode: M must be >= 1");
    if (m < 1 || m > M) {
        throw DomainError("channel_mode: mode index " + std::to_string(m) + " outside 1.." + std::to_string(M));
    }
    ChannelMode mode;
    mode.index = m;
    const Real k = pi * m / (M + 1);
    mode.energy = 2.0 * J * std::cos(k);
    mode.amplitudes.resize(M);
    const Real norm = std::sqrt(2.0 / (M + 1));
    for (int x = 1; x <= M; ++x) mode.amplitudes(x - 1) = norm * std::sin(k * x);
    mode.edge_magnitude = std::abs(mode.amplitudes(0));
    const bool same_sign = mode.amplitudes(0) * mode.amplitudes(M - 1) > 0.0;
    mode.edge_phase = same_sign ? 0.0 : pi / 2.0;
    return mode;
}

enum class ChannelClass { TypeA, TypeB, Resonant, Other };

inline std::string_view to_string(ChannelClass c) {
    switch (c) {
        case ChannelClass::TypeA: return "TypeA";
        case ChannelClass::TypeB: return "TypeB";
        case ChannelClass::Resonant: return "Resonant";
        case ChannelClass::Other: return "Other";
    }
    return "?";
}

// Resonant whenever some channel mode sits at +-J, i.e. (M + 1) divisible by 3.
// That covers M = 6n+2 and also the odd lengths M = 6n+5.
inline ChannelClass classify_channel(int M) {
    if (M < 1) throw ValidationError("classify_channel: M must be >= 1");
    switch (M % 6) {
        case 0: return ChannelClass::TypeA;
        case 4: return ChannelClass::TypeB;
        case 2:
        case 5: return ChannelClass::Resonant;
        default: return ChannelClass::Other;
    }
}

struct LambdaConstants {
    Real lambda1_plus = 0.0;
    Real lambda1_minus = 0.0;
    Real lambda2_plus = 0.0;
    Real lambda2_minus = 0.0;
};

inline LambdaConstants lambda_sums(int M, Real J, Real g) {
    if (classify_channel(M) == ChannelClass::Resonant) {
        throw PerturbationInvalid("lambda_sums: perturbation theory invalid for M = " + std::to_string(M) +
                                  " (a channel mode is resonant with +-J)");
    }
    Complex s1p{}, s1m{}, s2p{}, s2m{};
    for (int m = 1; m <= M; ++m) {
        const ChannelMode mode = channel_mode(m, M, J);
        const Real a2 = mode.edge_magnitude * mode.edge_magnitude;
        const Complex phase = std::exp(2.0 * I * mode.edge_phase);
        s1p += a2 / (mode.energy + J);
        s1m += a2 / (mode.energy - J);
        s2p += a2 * phase / (mode.energy + J);
        s2m += a2 * phase / (mode.energy - J);
    }
    const Real pref = 0.5 * g * g;
    const Real scale = g * g / J;
    for (Complex s : {s1p, s1m, s2p, s2m}) {
        if (std::abs(pref * s.imag()) > 1e-12 * scale) {
            throw NumericalError("lambda_sums: non-vanishing imaginary part");
        }
    }
    return {pref * s1p.real(), pref * s1m.real(), pref * s2p.real(), pref * s2m.real()};
}

}  // namespace spinchain
