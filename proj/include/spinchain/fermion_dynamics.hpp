#pragma once

// Exact dynamics of the XX chain in the one- and two-excitation sectors.
//
// Under Jordan-Wigner the chain is a free-fermion hopping model, so every
// two-flip amplitude is a 2x2 determinant of single-particle propagators.
// Pair states |pq> = c_p^dag c_q^dag |0> are kept with p < q; with that
// ordering nearest-neighbour hops carry no fermionic sign and the pair basis
// coincides with the spin basis.

#include <cmath>
#include <utility>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "spinchain/chain_model.hpp"
#include "spinchain/common.hpp"
#include "spinchain/four_qubit_state.hpp"

namespace spinchain {

struct SitePair {
    int first = 1;
    int second = 2;
};

inline void require_ordered(SitePair pair, int n_sites, const char* what) {
    if (pair.first >= pair.second) {
        throw DomainError(std::string(what) + ": site pair (" + std::to_string(pair.first) + ", " +
                          std::to_string(pair.second) + ") is not ordered p < q");
    }
    if (pair.first < 1 || pair.second > n_sites) {
        throw DomainError(std::string(what) + ": site outside 1.." + std::to_string(n_sites));
    }
}

// f_i^j(t) = <j| e^{-i t H_1} |i>, stored as F(j-1, i-1).
struct PropagatorMatrix {
    Real t = 0.0;
    MatrixC F;

    int sites() const { return static_cast<int>(F.rows()); }
    Complex f(int from, int to) const { return F(to - 1, from - 1); }
};

inline PropagatorMatrix propagator(const SpectralDecomposition& decomp, Real t) {
    if (!std::isfinite(t)) throw ValidationError("propagator: time must be finite");
    const Eigen::Index n = decomp.values.size();
    VectorC phase(n);
    for (Eigen::Index k = 0; k < n; ++k) phase(k) = std::polar(1.0, -decomp.values(k) * t);
    const MatrixC G = decomp.vectors.cast<Complex>();
    return {t, G * phase.asDiagonal() * G.transpose()};
}

/// U(t)|site> for each requested site, one column each.
inline MatrixC propagate_sites(const SpectralDecomposition& decomp, Real t, const std::vector<int>& sites) {
    if (!std::isfinite(t)) throw ValidationError("propagate_sites: time must be finite");
    const Eigen::Index n = decomp.values.size();
    VectorC phase(n);
    for (Eigen::Index k = 0; k < n; ++k) phase(k) = std::polar(1.0, -decomp.values(k) * t);
    MatrixC out(n, static_cast<Eigen::Index>(sites.size()));
    for (std::size_t c = 0; c < sites.size(); ++c) {
        const int s = sites[c];
        if (s < 1 || s > n) throw DomainError("propagate_sites: site outside chain");
        VectorC weights = phase.cwiseProduct(decomp.vectors.row(s - 1).transpose().cast<Complex>());
        out.col(static_cast<Eigen::Index>(c)) = decomp.vectors.cast<Complex>() * weights;
    }
    return out;
}

/// h_{nm}^{pq}(t) = f_n^p f_m^q - f_n^q f_m^p.
inline Complex two_particle_amplitude(const PropagatorMatrix& F, int n, int m, int p, int q) {
    require_ordered({n, m}, F.sites(), "two_particle_amplitude(initial)");
    require_ordered({p, q}, F.sites(), "two_particle_amplitude(final)");
    return F.f(n, p) * F.f(m, q) - F.f(n, q) * F.f(m, p);
}

/// Lexicographic index of the ordered pair (p, q), p < q, 1-based sites.
inline Eigen::Index pair_index(int p, int q, int n_sites) {
    return static_cast<Eigen::Index>((p - 1) * (2 * n_sites - p) / 2 + (q - p - 1));
}

inline Eigen::Index pair_count(int n_sites) { return static_cast<Eigen::Index>(n_sites) * (n_sites - 1) / 2; }

struct TwoParticleState {
    int sites = 0;
    VectorC amplitudes;   // indexed by pair_index

    Complex amplitude(int p, int q) const {
        require_ordered({p, q}, sites, "TwoParticleState::amplitude");
        return amplitudes(pair_index(p, q, sites));
    }

    Real norm_squared() const { return amplitudes.squaredNorm(); }

    static TwoParticleState delta(int n_sites, SitePair pair) {
        require_ordered(pair, n_sites, "TwoParticleState::delta");
        TwoParticleState s{n_sites, VectorC::Zero(pair_count(n_sites))};
        s.amplitudes(pair_index(pair.first, pair.second, n_sites)) = 1.0;
        return s;
    }
};

/// Exact evolution for a fixed coupling profile; caches the spectrum so
/// sweeps over time only pay for the phases.
class ExactDynamics {
public:
    explicit ExactDynamics(const CouplingProfile& profile) : spectrum_(diagonalize(profile)) {}
    explicit ExactDynamics(const ChainSpec& spec) : ExactDynamics(build_full_profile(spec)) {}

    const SpectralDecomposition& spectrum() const { return spectrum_; }
    int sites() const { return spectrum_.sites(); }

    PropagatorMatrix propagator(Real t) const { return spinchain::propagator(spectrum_, t); }

    TwoParticleState evolve(SitePair initial, Real t) const {
        const int n = sites();
        require_ordered(initial, n, "evolve_two_particle");
        const MatrixC cols = propagate_sites(spectrum_, t, {initial.first, initial.second});
        TwoParticleState out{n, VectorC(pair_count(n))};
        for (int p = 1; p <= n; ++p) {
            for (int q = p + 1; q <= n; ++q) {
                out.amplitudes(pair_index(p, q, n)) =
                    cols(p - 1, 0) * cols(q - 1, 1) - cols(q - 1, 0) * cols(p - 1, 1);
            }
        }
        return out;
    }

private:
    SpectralDecomposition spectrum_;
};

inline TwoParticleState evolve_two_particle(const ChainSpec& spec, SitePair initial, Real t) {
    return ExactDynamics(spec).evolve(initial, t);
}

inline TwoParticleState evolve_two_particle(const CouplingProfile& profile, SitePair initial, Real t) {
    return ExactDynamics(profile).evolve(initial, t);
}

/// Calls visit(from, to) for every pair-basis transition generated by the
/// hop across bond (bond, bond+1).
template <class Visitor>
void for_each_hop(int n_sites, int bond, Visitor&& visit) {
    for (int p = 1; p <= n_sites; ++p) {
        for (int q = p + 1; q <= n_sites; ++q) {
            const bool at_left = (p == bond || q == bond);
            const bool at_right = (p == bond + 1 || q == bond + 1);
            if (at_left == at_right) continue;
            int a = p, b = q;
            if (at_left) {
                (a == bond ? a : b) = bond + 1;
            } else {
                (a == bond + 1 ? a : b) = bond;
            }
            if (a > b) std::swap(a, b);
            visit(pair_index(p, q, n_sites), pair_index(a, b, n_sites));
        }
    }
}

/// Dense two-excitation Hamiltonian built directly from spin hopping.
inline MatrixR two_excitation_hamiltonian(const CouplingProfile& profile) {
    const int n = static_cast<int>(profile.size()) + 1;
    const Eigen::Index dim = pair_count(n);
    MatrixR h = MatrixR::Zero(dim, dim);
    for (int bond = 1; bond < n; ++bond) {
        const Real c = profile[static_cast<std::size_t>(bond - 1)];
        for_each_hop(n, bond, [&](Eigen::Index from, Eigen::Index to) { h(to, from) += c; });
    }
    return h;
}

inline constexpr int brute_force_max_sites = 12;

/// Oracle: evolves by a dense matrix exponential of the two-excitation block.
inline TwoParticleState brute_force_evolve(const CouplingProfile& profile, SitePair initial, Real t) {
    const int n = static_cast<int>(profile.size()) + 1;
    if (n > brute_force_max_sites) {
        throw ValidationError("brute_force_evolve: oracle limited to N <= " + std::to_string(brute_force_max_sites) +
                              ", got N = " + std::to_string(n));
    }
    require_ordered(initial, n, "brute_force_evolve");
    const MatrixC generator = Complex{0.0, -t} * two_excitation_hamiltonian(profile).cast<Complex>();
    const MatrixC u = generator.exp();
    return {n, u.col(pair_index(initial.first, initial.second, n))};
}

inline TwoParticleState brute_force_evolve(const ChainSpec& spec, SitePair initial, Real t) {
    return brute_force_evolve(build_full_profile(spec), initial, t);
}

namespace detail {

// Edge qubit carried by a site, or -1 for channel sites.
inline int edge_qubit(int site, int n_sites) {
    if (site == 1) return A1;
    if (site == 2) return A2;
    if (site == n_sites - 1) return B1;
    if (site == n_sites) return B2;
    return -1;
}

inline int edge_bit(int qubit) { return 1 << (3 - qubit); }

}  // namespace detail

/// Component of the state with an empty channel, as an (unnormalised) edge vector.
inline Vec16 edge_projection(const TwoParticleState& state) {
    const int n = state.sites;
    Vec16 v = Vec16::Zero();
    for (int p = 1; p <= n; ++p) {
        const int qp = detail::edge_qubit(p, n);
        if (qp < 0) continue;
        for (int q = p + 1; q <= n; ++q) {
            const int qq = detail::edge_qubit(q, n);
            if (qq < 0) continue;
            v(detail::edge_bit(qp) | detail::edge_bit(qq)) += state.amplitude(p, q);
        }
    }
    return v;
}

/// Density matrix of (A1, A2, B1, B2) after tracing out the channel.
inline FourQubitState reduce_to_edge_blocks(const TwoParticleState& state) {
    const int n = state.sites;
    if (n < 5) throw ValidationError("reduce_to_edge_blocks: chain needs a channel (N >= 5)");
    if (std::abs(state.norm_squared() - 1.0) > 1e-10) throw ValidationError("reduce_to_edge_blocks: state not normalised");

    Mat16 rho = Mat16::Zero();
    const Vec16 none = edge_projection(state);
    rho += none * none.adjoint();

    Real vacuum_weight = 0.0;
    for (int x = 3; x <= n - 2; ++x) {
        Vec16 one = Vec16::Zero();   // channel site x occupied, one edge flip
        for (int e : {1, 2, n - 1, n}) {
            const Complex a = e < x ? state.amplitude(e, x) : state.amplitude(x, e);
            one(detail::edge_bit(detail::edge_qubit(e, n))) += a;
        }
        rho += one * one.adjoint();
        for (int y = x + 1; y <= n - 2; ++y) vacuum_weight += std::norm(state.amplitude(x, y));
    }
    rho(0, 0) += vacuum_weight;
    return FourQubitState::mixed(rho);
}

inline FourQubitState reduce_to_edge_blocks(const TwoParticleState& state, const ChainSpec& spec) {
    if (state.sites != spec.N()) throw ValidationError("reduce_to_edge_blocks: state size does not match spec");
    return reduce_to_edge_blocks(state);
}

}  // namespace spinchain
