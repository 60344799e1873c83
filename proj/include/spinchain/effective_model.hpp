#pragma once

// Second-order effective description of the two-excitation dynamics on the
// six edge configurations with both flips inside the blocks.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spinchain/chain_model.hpp"
#include "spinchain/common.hpp"
#include "spinchain/fermion_dynamics.hpp"
#include "spinchain/four_qubit_state.hpp"

namespace spinchain {

/// Unperturbed edge states, in order
///   |A+B+>, |A+B->, |A-B+>, |A-B->, |A1A2>, |B1B2>
/// with |A_mu B_nu> = (|A1> + mu|A2>)(|B1> + nu|B2>)/2.
struct EffectiveBasis {
    static constexpr int size = 6;

    static std::array<Real, 6> energies(Real J) { return {2.0 * J, 0.0, 0.0, -2.0 * J, 0.0, 0.0}; }

    /// 16 x 6 change of basis; column i is psi_{0,i} on (A1, A2, B1, B2).
    static Eigen::Matrix<Complex, 16, 6> to_computational() {
        Eigen::Matrix<Complex, 16, 6> basis = Eigen::Matrix<Complex, 16, 6>::Zero();
        const std::array<std::pair<int, int>, 4> signs{{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};
        for (int c = 0; c < 4; ++c) {
            const auto [mu, nu] = signs[static_cast<std::size_t>(c)];
            basis(basis_index("1010"), c) = 0.5;
            basis(basis_index("1001"), c) = 0.5 * nu;
            basis(basis_index("0110"), c) = 0.5 * mu;
            basis(basis_index("0101"), c) = 0.5 * mu * nu;
        }
        basis(basis_index("1100"), 4) = 1.0;
        basis(basis_index("0011"), 5) = 1.0;
        return basis;
    }
};

using EffectiveHamiltonian = Mat6;

namespace detail {

// psi_{0,i} as a vector over the pair basis of the full chain.
inline VectorR unperturbed_pair_state(int i, int n) {
    VectorR v = VectorR::Zero(pair_count(n));
    const int a1 = 1, a2 = 2, b1 = n - 1, b2 = n;
    if (i < 4) {
        const Real mu = (i == 0 || i == 1) ? 1.0 : -1.0;
        const Real nu = (i == 0 || i == 2) ? 1.0 : -1.0;
        v(pair_index(a1, b1, n)) = 0.5;
        v(pair_index(a1, b2, n)) = 0.5 * nu;
        v(pair_index(a2, b1, n)) = 0.5 * mu;
        v(pair_index(a2, b2, n)) = 0.5 * mu * nu;
    } else if (i == 4) {
        v(pair_index(a1, a2, n)) = 1.0;
    } else {
        v(pair_index(b1, b2, n)) = 1.0;
    }
    return v;
}

}  // namespace detail

/// Evaluates the second-order expression
///   <i|H_eff|j> = E_j d_ij - 1/2 sum_k V_ik V_kj [1/(l_k - E_i) + 1/(l_k - E_j)]
/// by summing over the 4M intermediate states |eta_l>|eps_m>.
inline EffectiveHamiltonian build_effective_hamiltonian(int M, Real J, Real g) {
    if (M < 1) throw ValidationError("build_effective_hamiltonian: M must be >= 1");
    if (!(J > 0.0)) throw ValidationError("build_effective_hamiltonian: J must be > 0");
    if (!(g >= 0.0)) throw ValidationError("build_effective_hamiltonian: g must be >= 0");
    if (classify_channel(M) == ChannelClass::Resonant) {
        throw PerturbationInvalid("build_effective_hamiltonian: perturbation theory invalid for M = " +
                                  std::to_string(M));
    }
    const auto E = EffectiveBasis::energies(J);
    EffectiveHamiltonian h = EffectiveHamiltonian::Zero();
    for (int i = 0; i < 6; ++i) h(i, i) = E[static_cast<std::size_t>(i)];
    if (g == 0.0) return h;

    const int n = M + 4;
    std::vector<VectorR> psi;
    for (int i = 0; i < 6; ++i) psi.push_back(detail::unperturbed_pair_state(i, n));

    // weak bonds A2-ch1 and chM-B1
    std::vector<std::pair<Eigen::Index, Eigen::Index>> hops;
    for (int bond : {2, n - 2}) for_each_hop(n, bond, [&](Eigen::Index from, Eigen::Index to) { hops.emplace_back(from, to); });

    const Real root_half = std::sqrt(0.5);
    struct Block {
        int first, second;
        Real sign;
        Real shift;
    };
    const std::array<Block, 4> blocks{{{1, 2, 1.0, J}, {1, 2, -1.0, -J}, {n - 1, n, 1.0, J}, {n - 1, n, -1.0, -J}}};

    for (int m = 1; m <= M; ++m) {
        const ChannelMode mode = channel_mode(m, M, J);
        for (const Block& blk : blocks) {
            VectorR lambda = VectorR::Zero(pair_count(n));
            for (int x = 1; x <= M; ++x) {
                const int site = x + 2;
                const Real alpha = mode.amplitudes(x - 1);
                const auto put = [&](int edge, Real c) {
                    const Eigen::Index k = edge < site ? pair_index(edge, site, n) : pair_index(site, edge, n);
                    lambda(k) += c * alpha;
                };
                put(blk.first, root_half);
                put(blk.second, blk.sign * root_half);
            }
            VectorR h_lambda = VectorR::Zero(pair_count(n));
            for (const auto& [from, to] : hops) h_lambda(to) += g * lambda(from);

            const Real energy = mode.energy + blk.shift;
            std::array<Real, 6> v{};
            for (int i = 0; i < 6; ++i) v[static_cast<std::size_t>(i)] = psi[static_cast<std::size_t>(i)].dot(h_lambda);
            for (int i = 0; i < 6; ++i) {
                for (int j = 0; j < 6; ++j) {
                    const Real vv = v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)];
                    if (vv == 0.0) continue;
                    h(i, j) -= 0.5 * vv *
                               (1.0 / (energy - E[static_cast<std::size_t>(i)]) + 1.0 / (energy - E[static_cast<std::size_t>(j)]));
                }
            }
        }
    }
    return h;
}

/// Keeps only couplings inside degenerate unperturbed manifolds.
inline EffectiveHamiltonian secular_part(const EffectiveHamiltonian& h, Real J) {
    const auto E = EffectiveBasis::energies(J);
    EffectiveHamiltonian out = h;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            if (E[static_cast<std::size_t>(i)] != E[static_cast<std::size_t>(j)]) out(i, j) = 0.0;
    return out;
}

struct EffectiveEigenpair {
    Real value = 0.0;
    Vec16 vector;   // on (A1, A2, B1, B2)
};

/// Ascending eigenpairs, vectors expressed in the computational edge basis.
inline std::vector<EffectiveEigenpair> effective_eigensystem(const EffectiveHamiltonian& h) {
    if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw ValidationError("effective_eigensystem: H is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat6> solver(h);
    if (solver.info() != Eigen::Success) throw NumericalError("effective_eigensystem: eigensolver failed");
    const auto basis = EffectiveBasis::to_computational();
    std::vector<EffectiveEigenpair> out;
    for (int k = 0; k < 6; ++k) {
        out.push_back({solver.eigenvalues()(k), basis * solver.eigenvectors().col(k).cast<Complex>()});
    }
    return out;
}

/// exp(-i H t) applied to an edge state lying in the span of the basis.
inline Vec16 evolve_with_hamiltonian(const EffectiveHamiltonian& h, const Vec16& initial, Real t) {
    const auto basis = EffectiveBasis::to_computational();
    const Eigen::Matrix<Complex, 6, 1> coeffs = basis.adjoint() * initial;
    if (std::abs((basis * coeffs - initial).norm()) > 1e-12)
        throw DomainError("evolve_with_hamiltonian: initial state outside the effective subspace");
    Eigen::SelfAdjointEigenSolver<Mat6> solver(h);
    const Eigen::Matrix<Complex, 6, 6> vecs = solver.eigenvectors().cast<Complex>();
    Eigen::Matrix<Complex, 6, 1> rotated = vecs.adjoint() * coeffs;
    for (int k = 0; k < 6; ++k) rotated(k) *= std::polar(1.0, -solver.eigenvalues()(k) * t);
    return basis * (vecs * rotated);
}

/// Reduce x modulo 2 pi into [0, 2 pi).
inline Real wrap_phase(Real x) {
    Real r = std::fmod(x, 2.0 * pi);
    if (r < 0.0) r += 2.0 * pi;
    return r;
}

/// Phases entering the closed-form evolutions; slow = g^2 t / J, fast = 2 J t.
struct EffectivePhases {
    Real slow = 0.0;
    Real fast = 0.0;

    static EffectivePhases at_time(Real t, Real J, Real g) { return {g * g * t / J, 2.0 * J * t}; }
};

inline Vec16 evolve_effective(std::string_view initial, EffectivePhases ph) {
    const Real cs = std::cos(ph.slow), ss = std::sin(ph.slow);
    const Real cf = std::cos(ph.fast), sf = std::sin(ph.fast);
    Vec16 v = Vec16::Zero();
    const auto at = [&](const char* label) -> Complex& { return v(basis_index(label)); };
    if (initial == "1100") {
        at("0011") = 0.5 * (1.0 - cs);
        at("0101") = 0.5 * I * ss;
        at("1010") = -0.5 * I * ss;
        at("1100") = 0.5 * (1.0 + cs);
    } else if (initial == "1010") {
        at("1010") = 0.5 * (cf + cs);
        at("0101") = 0.5 * (cf - cs);
        at("1001") = -0.5 * I * sf;
        at("0110") = -0.5 * I * sf;
        at("1100") = -0.5 * I * ss;
        at("0011") = 0.5 * I * ss;
    } else if (initial == "1001" || initial == "0110") {
        // each block hops on its own; g drops out at this order
        const bool a1b2 = initial == "1001";
        at(a1b2 ? "1001" : "0110") = 0.5 * (1.0 + cf);
        at(a1b2 ? "0110" : "1001") = 0.5 * (cf - 1.0);
        at("1010") = -0.5 * I * sf;
        at("0101") = -0.5 * I * sf;
    } else {
        throw DomainError("evolve_effective: unsupported initial state '" + std::string(initial) +
                          "' (expected 1100, 1010, 1001 or 0110)");
    }
    return v;
}

inline FourQubitState evolve_effective(std::string_view initial, Real t, Real J, Real g) {
    if (!std::isfinite(t)) throw ValidationError("evolve_effective: time must be finite");
    return FourQubitState::pure(evolve_effective(initial, EffectivePhases::at_time(t, J, g)));
}

inline Real bell_time(int n, Real J, Real g) {
    if (n < 0) throw DomainError("bell_time: n must be >= 0");
    if (!(g > 0.0)) throw DomainError("bell_time: g must be > 0");
    return (2 * n + 1) * pi * J / (2.0 * g * g);
}

/// Phases at t*(n), computed with exact argument reduction:
/// slow = (2n+1) pi/2, fast = (2n+1) pi J^2/g^2 mod 2 pi.
inline EffectivePhases bell_time_phases(int n, Real J, Real g) {
    if (n < 0) throw DomainError("bell_time_phases: n must be >= 0");
    if (!(g > 0.0)) throw DomainError("bell_time_phases: g must be > 0");
    const Real ratio = (J / g) * (J / g);
    const Real half_turns = std::fmod((2 * n + 1) * std::fmod(ratio, 2.0), 2.0);   // in units of pi
    return {wrap_phase((2 * n + 1) * pi / 2.0), half_turns * pi};
}

enum class Commensurability { CosPlus, CosMinus, SinPlus, SinMinus, Incommensurate };

inline std::string_view to_string(Commensurability c) {
    switch (c) {
        case Commensurability::CosPlus: return "CosPlus";
        case Commensurability::CosMinus: return "CosMinus";
        case Commensurability::SinPlus: return "SinPlus";
        case Commensurability::SinMinus: return "SinMinus";
        case Commensurability::Incommensurate: return "Incommensurate";
    }
    return "?";
}

inline constexpr Real commensurability_tolerance = 1e-9;

/// Classifies 2 J t*(n) modulo 2 pi against {0, pi/2, pi, 3pi/2}.
inline Commensurability commensurability(Real J, Real g, int n) {
    if (!(g > 0.0)) throw DomainError("commensurability: g must be > 0");
    const Real phase = bell_time_phases(n, J, g).fast;
    const auto near = [&](Real target) {
        const Real d = std::abs(phase - target);
        return std::min(d, 2.0 * pi - d) <= commensurability_tolerance;
    };
    if (near(0.0)) return Commensurability::CosPlus;
    if (near(pi / 2.0)) return Commensurability::SinPlus;
    if (near(pi)) return Commensurability::CosMinus;
    if (near(3.0 * pi / 2.0)) return Commensurability::SinMinus;
    return Commensurability::Incommensurate;
}

/// mu_n = Sign[cos 2 J t*]; zero when the cosine vanishes or the ratio is incommensurate.
inline int mu_sign(Commensurability c) {
    if (c == Commensurability::CosPlus) return 1;
    if (c == Commensurability::CosMinus) return -1;
    return 0;
}

/// Closest g' for which 2 J t*(n) is a multiple of pi/2.
inline Real nearest_commensurate_g(Real J, Real g, int n) {
    if (!(g > 0.0)) throw DomainError("nearest_commensurate_g: g must be > 0");
    const Real quarter_turns = 2.0 * (2 * n + 1) * (J / g) * (J / g);
    const Real k = std::max(1.0, std::round(quarter_turns));
    return J * std::sqrt(2.0 * (2 * n + 1) / k);
}

struct BellSchedule {
    Real J = 1.0;
    Real g = 0.1;

    Real t_star(int n) const { return bell_time(n, J, g); }
    Commensurability fast_phase_class(int n) const { return commensurability(J, g, n); }
    bool commensurate(int n) const { return fast_phase_class(n) != Commensurability::Incommensurate; }
};

// ---------------------------------------------------------------------------
// Bell-product factorisation

enum class Pairing { A1B2_A2B1, A1B1_A2B2, A1A2_B1B2 };

inline std::string_view to_string(Pairing p) {
    switch (p) {
        case Pairing::A1B2_A2B1: return "(A1,B2)(A2,B1)";
        case Pairing::A1B1_A2B2: return "(A1,B1)(A2,B2)";
        case Pairing::A1A2_B1B2: return "(A1,A2)(B1,B2)";
    }
    return "?";
}

inline std::pair<std::vector<int>, std::vector<int>> pairing_qubits(Pairing p) {
    switch (p) {
        case Pairing::A1B2_A2B1: return {{A1, B2}, {A2, B1}};
        case Pairing::A1B1_A2B2: return {{A1, B1}, {A2, B2}};
        case Pairing::A1A2_B1B2: return {{A1, A2}, {B1, B2}};
    }
    throw DomainError("pairing_qubits: unknown pairing");
}

/// Concurrence of a two-qubit pure state, 2|ad - bc|.
inline Real two_qubit_concurrence(const Vec4& psi) {
    return 2.0 * std::abs(psi(0) * psi(3) - psi(1) * psi(2));
}

struct ProductFactors {
    Pairing pairing = Pairing::A1B2_A2B1;
    Real fidelity = 0.0;   // |<psi| first (x) second>|^2
    Vec4 first;            // on the first pair, qubit order as in pairing_qubits
    Vec4 second;
};

/// Best product approximation across a pairing (leading Schmidt term).
inline ProductFactors factorize(const Vec16& psi, Pairing pairing) {
    const auto [left, right] = pairing_qubits(pairing);
    Mat4 m = Mat4::Zero();
    for (Eigen::Index i = 0; i < 16; ++i) m(qubits::gather(i, left, 4), qubits::gather(i, right, 4)) = psi(i);
    Eigen::JacobiSVD<Mat4> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Real s0 = svd.singularValues()(0);
    return {pairing, s0 * s0, svd.matrixU().col(0) * s0, svd.matrixV().col(0).conjugate()};
}

struct BellProduct {
    Pairing pairing;
    Vec4 first;
    Vec4 second;
};

/// First pairing under which the state is a product of two maximally entangled
/// pairs, or nullopt.
inline std::optional<BellProduct> bell_product_decomposition(const FourQubitState& state) {
    if (!state.is_pure()) throw DomainError("bell_product_decomposition: expects a pure state");
    const Vec16& psi = state.vector();
    if (std::abs(psi.norm() - 1.0) > 1e-10) throw DomainError("bell_product_decomposition: state not normalised");
    for (Pairing p : {Pairing::A1B2_A2B1, Pairing::A1B1_A2B2, Pairing::A1A2_B1B2}) {
        ProductFactors f = factorize(psi, p);
        if (f.fidelity < 1.0 - 1e-10) continue;
        const Vec4 a = f.first.normalized();
        const Vec4 b = f.second.normalized();
        if (two_qubit_concurrence(a) >= 1.0 - 1e-8 && two_qubit_concurrence(b) >= 1.0 - 1e-8) {
            return BellProduct{p, a, b};
        }
    }
    return std::nullopt;
}

}  // namespace spinchain
