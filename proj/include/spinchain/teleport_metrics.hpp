#pragma once

// Entanglement and teleportation figures of merit for the edge-block state.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "spinchain/common.hpp"
#include "spinchain/effective_model.hpp"
#include "spinchain/fermion_dynamics.hpp"
#include "spinchain/four_qubit_state.hpp"
#include "spinchain/qubits.hpp"

namespace spinchain {

// ---------------------------------------------------------------------------
// Entanglement measures

/// Von Neumann entropy (bits) of the reduced state on `keep`, no purity check.
inline Real reduced_entropy(const FourQubitState& state, const std::vector<int>& keep = {A1, A2}) {
    return qubits::von_neumann_entropy(state.reduced(keep));
}

/// Entanglement entropy across keep | rest. Only meaningful for pure states;
/// density inputs must have purity >= 1 - 1e-8.
inline Real entanglement_entropy(const FourQubitState& state, const std::vector<int>& keep = {A1, A2}) {
    if (!state.is_pure() && state.purity() < 1.0 - 1e-8) {
        throw DomainError("entanglement_entropy: state is mixed; pass a pure state (e.g. the channel-empty projection)");
    }
    return reduced_entropy(state, keep);
}

inline const Mat16& spin_flip_operator() {
    static const Mat16 op = [] {
        const Mat4 yy = qubits::kron(qubits::pauli_y(), qubits::pauli_y());
        Mat16 out;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k)
                    for (int l = 0; l < 4; ++l) out(4 * i + k, 4 * j + l) = yy(i, j) * yy(k, l);
        return out;
    }();
    return op;
}

/// C = |<psi| sigma_y^{(x)4} |psi*>| in the computational basis.
inline Real generalized_concurrence(const Vec16& psi) {
    return std::abs(psi.dot(spin_flip_operator() * psi.conjugate()));
}

inline Real generalized_concurrence(const FourQubitState& state) { return generalized_concurrence(state.vector()); }

/// The 16 companions of psi obtained by {I(x)I, I(x)X, Z(x)I, Z(x)X} on each
/// pair of `pairing`.
inline std::array<Vec16, 16> teleportation_family(const Vec16& psi, Pairing pairing = Pairing::A1B2_A2B1) {
    const auto [left, right] = pairing_qubits(pairing);
    const Mat2 id = Mat2::Identity(), x = qubits::pauli_x(), z = qubits::pauli_z();
    const std::array<std::pair<Mat2, Mat2>, 4> ops{{{id, id}, {id, x}, {z, id}, {z, x}}};
    std::array<Vec16, 16> family;
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            MatrixC v = psi;
            v = qubits::apply_left(ops[static_cast<std::size_t>(a)].first, left[0], 4, v);
            v = qubits::apply_left(ops[static_cast<std::size_t>(a)].second, left[1], 4, v);
            v = qubits::apply_left(ops[static_cast<std::size_t>(b)].first, right[0], 4, v);
            v = qubits::apply_left(ops[static_cast<std::size_t>(b)].second, right[1], 4, v);
            family[static_cast<std::size_t>(4 * a + b)] = v.col(0);
        }
    }
    return family;
}

/// Largest |<f_i|f_j> - delta_ij| over the companion family.
inline Real family_orthonormality_defect(const std::array<Vec16, 16>& family) {
    Real worst = 0.0;
    for (std::size_t i = 0; i < 16; ++i)
        for (std::size_t j = 0; j < 16; ++j)
            worst = std::max(worst, std::abs(family[i].dot(family[j]) - Complex(i == j ? 1.0 : 0.0)));
    return worst;
}

/// (1/16) sum_i C(psi^(i)) without checking the family.
inline Real mean_family_concurrence(const Vec16& psi, Pairing pairing = Pairing::A1B2_A2B1) {
    Real sum = 0.0;
    for (const Vec16& v : teleportation_family(psi, pairing)) sum += generalized_concurrence(v);
    return sum / 16.0;
}

/// E_T = (1/16) sum_i C(psi^(i)). Throws when the companion family is not
/// orthonormal within `orthogonality_tolerance`.
inline Real entanglement_of_teleportation(const FourQubitState& state, Pairing pairing = Pairing::A1B2_A2B1,
                                          Real orthogonality_tolerance = 1e-8) {
    const Real defect = family_orthonormality_defect(teleportation_family(state.vector(), pairing));
    if (defect > orthogonality_tolerance) {
        throw ValidationError("entanglement_of_teleportation: reference family is not orthonormal for this state "
                              "(defect " + std::to_string(defect) + ")");
    }
    return mean_family_concurrence(state.vector(), pairing);
}

// ---------------------------------------------------------------------------
// Bell bases and corrections

/// |Psi^{1,2}> = (|01> -+ e^{-i theta}|10>)/sqrt2, |Psi^{3,4}> = (|00> -+ e^{-i theta}|11>)/sqrt2.
struct BellBasis {
    Real theta = 0.0;

    Vec4 state(int j) const {
        if (j < 1 || j > 4) throw DomainError("BellBasis: index must be 1..4");
        const Complex e = std::polar(1.0, -theta);
        const Real r = std::sqrt(0.5);
        Vec4 v = Vec4::Zero();
        const Real sign = (j == 1 || j == 3) ? -1.0 : 1.0;
        if (j <= 2) {
            v(1) = r;
            v(2) = sign * r * e;
        } else {
            v(0) = r;
            v(3) = sign * r * e;
        }
        return v;
    }
};

inline Mat2 phase_gate(Real theta) {
    Mat2 r = Mat2::Zero();
    r(0, 0) = std::polar(1.0, theta);
    r(1, 1) = std::polar(1.0, -theta);
    return r;
}

/// Receiver corrections O~_j^k for resource index k and outcome j (both 1..4).
/// For k = 3, 4 and j = 1, 2 the phase gate acts first (sigma R(-theta)).
struct CorrectionSet {
    Real theta = 0.0;

    Mat2 op(int k, int j) const {
        if (k < 1 || k > 4 || j < 1 || j > 4) throw DomainError("CorrectionSet: indices must be 1..4");
        const Mat2 id = Mat2::Identity(), x = qubits::pauli_x(), z = qubits::pauli_z();
        const Mat2 r = phase_gate(theta), rm = phase_gate(-theta);
        const Mat2 zx = z * x;
        switch (k) {
            case 1: {
                const std::array<Mat2, 4> ops{-r, r * z, x, zx};
                return ops[static_cast<std::size_t>(j - 1)];
            }
            case 2: {
                const std::array<Mat2, 4> ops{-r * z, r, zx, x};
                return ops[static_cast<std::size_t>(j - 1)];
            }
            case 3: {
                const std::array<Mat2, 4> ops{-x * rm, -zx * rm, id, -z};
                return ops[static_cast<std::size_t>(j - 1)];
            }
            default: {
                const std::array<Mat2, 4> ops{zx * rm, x * rm, -z, id};
                return ops[static_cast<std::size_t>(j - 1)];
            }
        }
    }
};

/// Bell^{k1} on (A1, B2) times Bell^{k2} on (A2, B1).
inline Vec16 bell_product_resource(Real theta, int k1, int k2) {
    const BellBasis basis{theta};
    const Vec4 p1 = basis.state(k1), p2 = basis.state(k2);
    Vec16 v = Vec16::Zero();
    for (Eigen::Index i = 0; i < 16; ++i) {
        v(i) = p1(qubits::gather(i, {A1, B2}, 4)) * p2(qubits::gather(i, {A2, B1}, 4));
    }
    return v;
}

/// Resource indices (k1, k2) whose ideal Bell product has the largest overlap with the state.
inline std::pair<int, int> best_resource_indices(const FourQubitState& resource, Real theta) {
    const Mat16 rho = resource.density();
    std::pair<int, int> best{1, 1};
    Real best_overlap = -1.0;
    for (int k1 = 1; k1 <= 4; ++k1) {
        for (int k2 = 1; k2 <= 4; ++k2) {
            const Vec16 ideal = bell_product_resource(theta, k1, k2);
            const Real ov = ideal.dot(rho * ideal).real();
            if (ov > best_overlap + 1e-12) {
                best_overlap = ov;
                best = {k1, k2};
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Inputs and protocol

struct InputStateParams {
    Real s = 0.0;
    Real theta1 = 0.0, theta2 = 0.0;
    Real phi1 = 0.0, phi2 = 0.0;
};

/// Two-qubit input on (X, Y): superposition of two orthogonal product branches
/// weighted sqrt((1 -+ s)/2).
inline Vec4 sample_input(const InputStateParams& p) {
    const auto in_range = [](Real v, Real lo, Real hi) { return std::isfinite(v) && v >= lo && v <= hi; };
    if (!in_range(p.s, -1.0, 1.0)) throw DomainError("sample_input: s must lie in [-1, 1]");
    if (!in_range(p.theta1, 0.0, pi) || !in_range(p.theta2, 0.0, pi))
        throw DomainError("sample_input: theta1, theta2 must lie in [0, pi]");
    if (!in_range(p.phi1, 0.0, 2.0 * pi) || !in_range(p.phi2, 0.0, 2.0 * pi))
        throw DomainError("sample_input: phi1, phi2 must lie in [0, 2 pi]");

    const auto up = [](Real th, Real ph) {
        Vec2 v;
        v << std::cos(th / 2.0), std::polar(std::sin(th / 2.0), ph);
        return v;
    };
    const auto down = [](Real th, Real ph) {
        Vec2 v;
        v << std::polar(std::sin(th / 2.0), -ph), -std::cos(th / 2.0);
        return v;
    };
    const Vec2 u1 = up(p.theta1, p.phi1), u2 = up(p.theta2, p.phi2);
    const Vec2 d1 = down(p.theta1, p.phi1), d2 = down(p.theta2, p.phi2);
    const Real w0 = std::sqrt((1.0 - p.s) / 2.0), w1 = std::sqrt((1.0 + p.s) / 2.0);
    Vec4 out;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) out(2 * a + b) = w0 * u1(a) * u2(b) + w1 * d1(a) * d2(b);
    return out;
}

struct TeleportationOutcome {
    int j1 = 1, j2 = 1;
    Real probability = 0.0;
    bool defined = false;   // false when the branch has zero probability
    Mat4 output = Mat4::Zero();   // receiver state, qubit order (from X, from Y)
    Real fidelity = 0.0;
};

inline constexpr Real zero_probability_threshold = 1e-14;

/// Runs the two-qubit protocol: (X, A1) and (Y, A2) are measured in the
/// generalised Bell basis, and the receiver corrects B2 (carrying X) with
/// O~^{k1}_{j1} and B1 (carrying Y) with O~^{k2}_{j2}.
inline std::vector<TeleportationOutcome> teleport(const FourQubitState& resource, const Vec4& input, Real theta, int k1,
                                                  int k2) {
    if (std::abs(input.norm() - 1.0) > 1e-10) throw ValidationError("teleport: input state not normalised");
    if (k1 < 1 || k1 > 4 || k2 < 1 || k2 > 4) throw DomainError("teleport: resource indices must be 1..4");
    const BellBasis basis{theta};
    const CorrectionSet corrections{theta};
    const Mat16 rho = resource.density();

    std::vector<TeleportationOutcome> out;
    out.reserve(16);
    for (int j1 = 1; j1 <= 4; ++j1) {
        const Vec4 b1 = basis.state(j1);   // on (X, A1)
        for (int j2 = 1; j2 <= 4; ++j2) {
            const Vec4 b2 = basis.state(j2);   // on (Y, A2)
            // w(a1 a2) = sum_xy phi_xy conj(b1[x a1]) conj(b2[y a2])
            Vec4 w = Vec4::Zero();
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y)
                    for (int a1 = 0; a1 < 2; ++a1)
                        for (int a2 = 0; a2 < 2; ++a2)
                            w(2 * a1 + a2) += input(2 * x + y) * std::conj(b1(2 * x + a1)) * std::conj(b2(2 * y + a2));
            // W maps (A1 A2 B1 B2) onto (B2, B1)
            Eigen::Matrix<Complex, 4, 16> W = Eigen::Matrix<Complex, 4, 16>::Zero();
            for (int a = 0; a < 4; ++a)
                for (int bb = 0; bb < 4; ++bb) {
                    const int b1bit = bb >> 1, b2bit = bb & 1;
                    W(2 * b2bit + b1bit, 4 * a + bb) = w(a);
                }
            const Mat4 c = qubits::kron(corrections.op(k1, j1), corrections.op(k2, j2));
            const Mat4 sigma = c * W * rho * W.adjoint() * c.adjoint();

            TeleportationOutcome o;
            o.j1 = j1;
            o.j2 = j2;
            o.probability = sigma.trace().real();
            if (o.probability > zero_probability_threshold) {
                o.defined = true;
                o.output = sigma / o.probability;
                o.fidelity = input.dot(o.output * input).real();
            } else {
                o.probability = std::max(o.probability, 0.0);
            }
            out.push_back(o);
        }
    }
    return out;
}

/// Probability-weighted fidelity over the defined branches.
inline Real mean_outcome_fidelity(const std::vector<TeleportationOutcome>& outcomes) {
    Real f = 0.0;
    for (const auto& o : outcomes)
        if (o.defined) f += o.probability * o.fidelity;
    return f;
}

// ---------------------------------------------------------------------------
// Average fidelities

inline Real average_fidelity_effective(Real t, Real J, Real g) {
    const Real w = g * g * t / J;
    return 0.5 - 7.0 / 54.0 * std::cos(2.0 * w) + 10.0 / 27.0 * std::sin(w);
}

/// Average fidelity from the exact amplitudes h_pq = h_{12}^{pq}(t).
inline Real average_fidelity_full(const TwoParticleState& state) {
    const int n = state.sites;
    const auto h = [&](int p, int q) { return state.amplitude(p, q); };
    const Complex h12 = h(1, 2), h1a = h(1, n - 1), h1b = h(1, n), hab = h(n - 1, n), h2b = h(2, n);
    Real interior_weight = 0.0, interior_im = 0.0;
    for (int m = 3; m <= n - 2; ++m) {
        interior_weight += std::norm(h(1, m)) + std::norm(h(2, m)) + std::norm(h(m, n - 1)) + std::norm(h(m, n));
        interior_im += (h(1, m) * std::conj(h(m, n)) - h(2, m) * std::conj(h(m, n - 1))).imag();
    }
    const Real value = 7.0 + 3.0 * std::norm(h12) + 3.0 * std::norm(h1a) + 6.0 * std::norm(h1b) + 3.0 * std::norm(hab) +
                       3.0 * std::norm(h2b) - 2.0 * interior_weight +
                       14.0 * (h12 * std::conj(hab) - h2b * std::conj(h1a)).real() +
                       10.0 * (h12 * std::conj(h1a) + h2b * std::conj(hab) - h1a * std::conj(hab) - h12 * std::conj(h2b)).imag() -
                       4.0 * interior_im;
    return value / 27.0;
}

inline Real average_fidelity_full(const ChainSpec& spec, Real t) {
    return average_fidelity_full(evolve_two_particle(spec, {1, 2}, t));
}

// ---------------------------------------------------------------------------
// Monte Carlo over inputs

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Uniform in [0, 1) from (seed, sample, slot); independent of evaluation order.
inline Real counter_uniform(std::uint64_t seed, std::uint64_t sample, std::uint64_t slot) {
    const std::uint64_t key = splitmix64(splitmix64(seed) ^ splitmix64(sample * 8 + slot + 0x632BE59BD9B4E019ULL));
    return static_cast<Real>(key >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Input i of the stream: s, cos(theta_k) uniform on [-1, 1], phi_k uniform on [0, 2 pi).
inline InputStateParams random_input(std::uint64_t seed, std::uint64_t sample) {
    const auto u = [&](std::uint64_t slot) { return detail::counter_uniform(seed, sample, slot); };
    InputStateParams p;
    p.s = 2.0 * u(0) - 1.0;
    p.theta1 = std::acos(std::clamp(2.0 * u(1) - 1.0, -1.0, 1.0));
    p.theta2 = std::acos(std::clamp(2.0 * u(2) - 1.0, -1.0, 1.0));
    p.phi1 = 2.0 * pi * u(3);
    p.phi2 = 2.0 * pi * u(4);
    return p;
}

struct MonteCarloEstimate {
    Real mean = 0.0;
    Real stderr_ = 0.0;
    std::size_t samples = 0;
};

/// Mean and standard error of per-sample values, summed in index order.
inline MonteCarloEstimate summarize_samples(const std::vector<Real>& values) {
    if (values.empty()) throw ValidationError("summarize_samples: no samples");
    const std::size_t n = values.size();
    Real mean = 0.0;
    for (Real v : values) mean += v;
    mean /= static_cast<Real>(n);
    Real var = 0.0;
    for (Real v : values) var += (v - mean) * (v - mean);
    const Real se = n > 1 ? std::sqrt(var / static_cast<Real>(n - 1) / static_cast<Real>(n)) : 0.0;
    return {mean, se, n};
}

/// Outcome-averaged fidelity for input `sample` of the seeded stream.
inline Real sampled_input_fidelity(const FourQubitState& resource, Real theta, int k1, int k2, std::uint64_t seed,
                                   std::uint64_t sample) {
    return mean_outcome_fidelity(teleport(resource, sample_input(random_input(seed, sample)), theta, k1, k2));
}

inline MonteCarloEstimate monte_carlo_average_fidelity(const FourQubitState& resource, Real theta, int k1, int k2,
                                                       std::size_t samples, std::uint64_t seed) {
    if (samples < 1) throw ValidationError("monte_carlo_average_fidelity: samples must be >= 1");
    std::vector<Real> values(samples);
    for (std::size_t i = 0; i < samples; ++i) values[i] = sampled_input_fidelity(resource, theta, k1, k2, seed, i);
    return summarize_samples(values);
}

}  // namespace spinchain
