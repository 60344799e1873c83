#pragma once

#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "spinchain/chain_model.hpp"
#include "spinchain/effective_model.hpp"
#include "spinchain/experiment/config.hpp"
#include "spinchain/experiment/parallel.hpp"
#include "spinchain/experiment/table.hpp"
#include "spinchain/fermion_dynamics.hpp"
#include "spinchain/teleport_metrics.hpp"

#ifndef SPINCHAIN_VERSION
#define SPINCHAIN_VERSION "unknown"
#endif

namespace spinchain::experiment {

inline constexpr const char* version = SPINCHAIN_VERSION;

/// Chain sites carrying the two flips of an edge label such as "1100".
inline SitePair initial_sites(const std::string& label, int n_sites) {
    const int idx = basis_index(label);
    const int site_of[4] = {1, 2, n_sites - 1, n_sites};
    std::vector<int> sites;
    for (int q = 0; q < 4; ++q)
        if (idx & spinchain::detail::edge_bit(q)) sites.push_back(site_of[q]);
    if (sites.size() != 2) throw DomainError("initial_sites: label must hold exactly two flips");
    return {sites[0], sites[1]};
}

/// 1 - |<psi_eff | P_edge psi_full>|^2, where P_edge keeps the channel-empty part.
inline Real edge_infidelity(const Vec16& effective, const TwoParticleState& full) {
    return 1.0 - std::norm(effective.dot(edge_projection(full)));
}

inline Real infidelity_at(const ExactDynamics& dyn, const std::string& label, Real J, Real g, Real t) {
    const Vec16 eff = evolve_effective(label, EffectivePhases::at_time(t, J, g));
    return edge_infidelity(eff, dyn.evolve(initial_sites(label, dyn.sites()), t));
}

/// Mean infidelity over `points` equally spaced times in [0, t_end].
inline Real time_averaged_infidelity(const ExactDynamics& dyn, const std::string& label, Real J, Real g, Real t_end,
                                     int points) {
    if (points < 2) throw ValidationError("time_averaged_infidelity: need at least two points");
    Real sum = 0.0;
    for (int i = 0; i < points; ++i) sum += infidelity_at(dyn, label, J, g, t_end * i / (points - 1));
    return sum / points;
}

struct EdgeEntropySample {
    Real effective = 0.0;
    Real full = 0.0;
    bool fallback = false;   // edge weight too small, full column repeats the effective value
    Real edge_weight = 0.0;
    Real overlap = 0.0;      // |<psi_eff | P_edge psi_full>|^2
};

inline constexpr Real edge_weight_floor = 1e-8;

inline EdgeEntropySample edge_entropies(const Vec16& effective, const TwoParticleState& full) {
    EdgeEntropySample s;
    s.effective = reduced_entropy(FourQubitState::pure(effective.normalized()), {A1, A2});
    const Vec16 v = edge_projection(full);
    s.edge_weight = v.squaredNorm();
    s.overlap = std::norm(effective.dot(v));
    if (s.edge_weight > edge_weight_floor) {
        s.full = reduced_entropy(FourQubitState::pure(v / std::sqrt(s.edge_weight)), {A1, A2});
    } else {
        s.full = s.effective;
        s.fallback = true;
    }
    return s;
}

namespace detail {

inline Real evaluation_time(const RunConfig& cfg, Real g) {
    switch (cfg.time_mode) {
        case TimeMode::PiOverGsq: return pi * cfg.J / (g * g);
        case TimeMode::TStar: return bell_time(cfg.t_star_n, cfg.J, g);
        case TimeMode::Grid: break;
    }
    throw ValidationError("evaluation_time: experiment needs a single evaluation time");
}

inline std::string time_label(const RunConfig& cfg) {
    if (cfg.time_mode == TimeMode::PiOverGsq) return "pi_over_gsq";
    if (cfg.time_mode == TimeMode::TStar) return "t_star(" + std::to_string(cfg.t_star_n) + ")";
    return "grid";
}

inline std::string fmt(Real v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// One spectrum per (N, g), built in parallel.
inline std::vector<std::unique_ptr<ExactDynamics>> build_dynamics(const RunConfig& cfg, unsigned workers) {
    const std::size_t ng = cfg.g.size();
    std::vector<std::unique_ptr<ExactDynamics>> out(cfg.sites.size() * ng);
    parallel_for(out.size(), workers, [&](std::size_t i) {
        const ChainSpec spec{cfg.sites[i / ng] - 4, cfg.J, cfg.g[i % ng]};
        out[i] = std::make_unique<ExactDynamics>(spec);
    });
    return out;
}

inline void add_common_metadata(ResultTable& table, const RunConfig& cfg) {
    table.add_metadata("experiment", to_string(cfg.kind));
    table.add_metadata("version", version);
    table.add_metadata("timestamp", utc_timestamp());
    for (const auto& line : cfg.echo) table.add_metadata("config", line);
    for (const auto& w : cfg.warnings) table.add_metadata("warning", w);
    const bool uses_chain = cfg.kind != ExperimentKind::ProtocolCheck || cfg.resource == ResourceKind::FullAtTime;
    if (cfg.sites_defaulted && uses_chain) table.add_metadata("N", "defaulted to " + std::to_string(cfg.sites.front()));
}

inline void require_kind(const RunConfig& cfg, ExperimentKind k) {
    if (cfg.kind != k) throw ValidationError("runner for " + to_string(k) + " given a " + to_string(cfg.kind) + " config");
}

}  // namespace detail

inline ResultTable run_infidelity_scan(const RunConfig& cfg, unsigned workers = 1) {
    detail::require_kind(cfg, ExperimentKind::InfidelityScan);
    ResultTable table({{"N", ColumnType::Integer},
                       {"g"},
                       {"t"},
                       {"infidelity"},
                       {"infidelity_avg"},
                       {"resonant", ColumnType::Integer}});
    detail::add_common_metadata(table, cfg);
    table.add_metadata("initial", cfg.initial);
    table.add_metadata("time", detail::time_label(cfg));
    table.add_metadata("infidelity_avg", "mean over " + std::to_string(cfg.average_points) + " times in [0, t]");

    const auto dyn = detail::build_dynamics(cfg, workers);
    std::vector<std::vector<Real>> rows(dyn.size());
    const std::size_t ng = cfg.g.size();
    parallel_for(dyn.size(), workers, [&](std::size_t i) {
        const int n = cfg.sites[i / ng];
        const Real g = cfg.g[i % ng];
        const Real t = detail::evaluation_time(cfg, g);
        const bool resonant = classify_channel(n - 4) == ChannelClass::Resonant;
        rows[i] = {static_cast<Real>(n), g, t, infidelity_at(*dyn[i], cfg.initial, cfg.J, g, t),
                   time_averaged_infidelity(*dyn[i], cfg.initial, cfg.J, g, t, cfg.average_points),
                   resonant ? 1.0 : 0.0};
    });
    for (auto& r : rows) table.add_row(std::move(r));
    return table;
}

inline ResultTable run_entropy_trace(const RunConfig& cfg, unsigned workers = 1) {
    detail::require_kind(cfg, ExperimentKind::EntropyTrace);
    ResultTable table({{"N", ColumnType::Integer},
                       {"g"},
                       {"t"},
                       {"scaled_time"},
                       {"E_effective"},
                       {"E_full"},
                       {"E_full_fallback", ColumnType::Integer},
                       {"edge_weight"},
                       {"fidelity_full_effective"}});
    detail::add_common_metadata(table, cfg);
    table.add_metadata("initial", cfg.initial);
    table.add_metadata("E_full", "entropy of the normalised channel-empty projection of the exact state");
    table.add_metadata("scaled_time", "g^2 t / J");

    const auto dyn = detail::build_dynamics(cfg, workers);
    const std::size_t ng = cfg.g.size();
    const std::size_t nt = static_cast<std::size_t>(cfg.grid.points);
    std::vector<std::vector<Real>> rows(dyn.size() * nt);
    parallel_for(rows.size(), workers, [&](std::size_t i) {
        const std::size_t d = i / nt;
        const int n = cfg.sites[d / ng];
        const Real g = cfg.g[d % ng];
        const Real scaled = cfg.grid.scaled(static_cast<int>(i % nt));
        const Real t = scaled * cfg.J / (g * g);
        const Vec16 eff = evolve_effective(cfg.initial, EffectivePhases::at_time(t, cfg.J, g));
        const auto s = edge_entropies(eff, dyn[d]->evolve(initial_sites(cfg.initial, n), t));
        rows[i] = {static_cast<Real>(n), g, t, scaled, s.effective, s.full, s.fallback ? 1.0 : 0.0, s.edge_weight,
                   s.overlap};
    });
    for (auto& r : rows) table.add_row(std::move(r));
    return table;
}

inline ResultTable run_fidelity_trace(const RunConfig& cfg, unsigned workers = 1) {
    detail::require_kind(cfg, ExperimentKind::FidelityTrace);
    ResultTable table({{"N", ColumnType::Integer}, {"g"}, {"t"}, {"scaled_time"}, {"Fbar_full"}, {"Fbar_eff"}});
    detail::add_common_metadata(table, cfg);
    table.add_metadata("scaled_time", "g^2 t / J");

    const auto dyn = detail::build_dynamics(cfg, workers);
    const std::size_t ng = cfg.g.size();
    const std::size_t nt = static_cast<std::size_t>(cfg.grid.points);
    std::vector<std::vector<Real>> rows(dyn.size() * nt);
    parallel_for(rows.size(), workers, [&](std::size_t i) {
        const std::size_t d = i / nt;
        const int n = cfg.sites[d / ng];
        const Real g = cfg.g[d % ng];
        const Real scaled = cfg.grid.scaled(static_cast<int>(i % nt));
        const Real t = scaled * cfg.J / (g * g);
        rows[i] = {static_cast<Real>(n), g, t, scaled, average_fidelity_full(dyn[d]->evolve({1, 2}, t)),
                   average_fidelity_effective(t, cfg.J, g)};
    });
    for (auto& r : rows) table.add_row(std::move(r));
    return table;
}

struct ProtocolResource {
    FourQubitState state;
    std::optional<Vec16> pure_part;   // state used for EoT
    Real t = 0.0;
};

inline ProtocolResource protocol_resource(const RunConfig& cfg, int k1, int k2) {
    const Real g = cfg.g.front();
    switch (cfg.resource) {
        case ResourceKind::Ideal: {
            const Vec16 v = bell_product_resource(cfg.theta, k1 ? k1 : 1, k2 ? k2 : 1);
            return {FourQubitState::pure(v), v, 0.0};
        }
        case ResourceKind::EffectiveAtTStar: {
            const Vec16 v = evolve_effective(cfg.initial, bell_time_phases(cfg.t_star_n, cfg.J, g));
            return {FourQubitState::pure(v), v, bell_time(cfg.t_star_n, cfg.J, g)};
        }
        case ResourceKind::FullAtTime: {
            const int n = cfg.sites.front();
            const Real t = detail::evaluation_time(cfg, g);
            const auto state = ExactDynamics(ChainSpec{n - 4, cfg.J, g}).evolve(initial_sites(cfg.initial, n), t);
            const Vec16 v = edge_projection(state);
            std::optional<Vec16> pure;
            if (v.squaredNorm() > edge_weight_floor) pure = v.normalized();
            return {reduce_to_edge_blocks(state), pure, t};
        }
    }
    throw DomainError("protocol_resource: unknown resource kind");
}

inline constexpr Real eot_orthogonality_tolerance = 1e-8;

inline ResultTable run_protocol_check(const RunConfig& cfg, unsigned workers = 1) {
    detail::require_kind(cfg, ExperimentKind::ProtocolCheck);
    if (cfg.samples > 0 && !cfg.seed) throw ValidationError("run_protocol_check: samples > 0 requires a seed");
    ResultTable table({{"row", ColumnType::Integer},
                       {"j1", ColumnType::Integer},
                       {"j2", ColumnType::Integer},
                       {"probability"},
                       {"fidelity"},
                       {"defined", ColumnType::Integer},
                       {"stderr"},
                       {"eot"},
                       {"eot_valid", ColumnType::Integer}});
    detail::add_common_metadata(table, cfg);

    const Real g = cfg.g.front();
    const ProtocolResource res = protocol_resource(cfg, cfg.k1, cfg.k2);
    int k1 = cfg.k1, k2 = cfg.k2;
    if (k1 == 0 || k2 == 0) {
        const auto best = cfg.resource == ResourceKind::Ideal ? std::pair<int, int>{1, 1}
                                                              : best_resource_indices(res.state, cfg.theta);
        if (k1 == 0) k1 = best.first;
        if (k2 == 0) k2 = best.second;
    }

    table.add_metadata("resource", to_string(cfg.resource));
    table.add_metadata("resource_indices", std::to_string(k1) + "," + std::to_string(k2));
    table.add_metadata("theta", detail::fmt(cfg.theta));
    if (cfg.resource != ResourceKind::Ideal) {
        table.add_metadata("time", detail::time_label(cfg) + " = " + detail::fmt(res.t));
        if (cfg.time_mode == TimeMode::TStar) {
            const auto c = commensurability(cfg.J, g, cfg.t_star_n);
            table.add_metadata("commensurability", std::string(to_string(c)));
            if (c == Commensurability::Incommensurate)
                table.add_metadata("nearest_commensurate_g", detail::fmt(nearest_commensurate_g(cfg.J, g, cfg.t_star_n)));
        }
    }
    if (cfg.resource == ResourceKind::FullAtTime) table.add_metadata("N", std::to_string(cfg.sites.front()));

    const InputStateParams fixed{cfg.input_s, cfg.input_theta1, cfg.input_theta2, cfg.input_phi1, cfg.input_phi2};
    const auto outcomes = teleport(res.state, sample_input(fixed), cfg.theta, k1, k2);
    Real total_probability = 0.0;
    for (const auto& o : outcomes) {
        table.add_row({0.0, static_cast<Real>(o.j1), static_cast<Real>(o.j2), o.probability, o.fidelity,
                       o.defined ? 1.0 : 0.0, 0.0, 0.0, 0.0});
        total_probability += o.probability;
    }

    MonteCarloEstimate summary{mean_outcome_fidelity(outcomes), 0.0, 1};
    if (cfg.samples > 0) {
        std::vector<Real> values(cfg.samples);
        parallel_for(cfg.samples, workers, [&](std::size_t i) {
            values[i] = sampled_input_fidelity(res.state, cfg.theta, k1, k2, *cfg.seed, i);
        });
        summary = summarize_samples(values);
        table.add_metadata("samples", std::to_string(cfg.samples));
        table.add_metadata("seed", std::to_string(*cfg.seed));
    }

    Real eot = 0.0;
    bool eot_valid = false;
    if (res.pure_part) {
        const Real defect = family_orthonormality_defect(teleportation_family(*res.pure_part));
        eot = mean_family_concurrence(*res.pure_part);
        eot_valid = defect <= eot_orthogonality_tolerance;
        table.add_metadata("eot_family_defect", detail::fmt(defect));
    }
    table.add_row({1.0, 0.0, 0.0, total_probability, summary.mean, 1.0, summary.stderr_, eot, eot_valid ? 1.0 : 0.0});
    return table;
}

inline ResultTable run_lambda_table(const RunConfig& cfg, unsigned workers = 1) {
    detail::require_kind(cfg, ExperimentKind::LambdaTable);
    ResultTable table({{"M", ColumnType::Integer},
                       {"g"},
                       {"class", ColumnType::Integer},
                       {"valid", ColumnType::Integer},
                       {"lambda1_plus"},
                       {"lambda1_minus"},
                       {"lambda2_plus"},
                       {"lambda2_minus"}});
    detail::add_common_metadata(table, cfg);
    table.add_metadata("class", "0 TypeA, 1 TypeB, 2 Resonant, 3 Other");

    const auto ms = cfg.channel_lengths();
    const std::size_t ng = cfg.g.size();
    std::vector<std::vector<Real>> rows(ms.size() * ng);
    parallel_for(rows.size(), workers, [&](std::size_t i) {
        const int m = ms[i / ng];
        const Real g = cfg.g[i % ng];
        const auto cls = classify_channel(m);
        std::vector<Real> row{static_cast<Real>(m), g, static_cast<Real>(static_cast<int>(cls)), 0.0, 0.0, 0.0, 0.0, 0.0};
        if (cls != ChannelClass::Resonant) {
            const auto l = lambda_sums(m, cfg.J, g);
            row[3] = 1.0;
            row[4] = l.lambda1_plus;
            row[5] = l.lambda1_minus;
            row[6] = l.lambda2_plus;
            row[7] = l.lambda2_minus;
        }
        rows[i] = std::move(row);
    });
    for (auto& r : rows) table.add_row(std::move(r));
    return table;
}

inline ResultTable run_experiment(const RunConfig& cfg, unsigned workers = 1) {
    switch (cfg.kind) {
        case ExperimentKind::InfidelityScan: return run_infidelity_scan(cfg, workers);
        case ExperimentKind::EntropyTrace: return run_entropy_trace(cfg, workers);
        case ExperimentKind::FidelityTrace: return run_fidelity_trace(cfg, workers);
        case ExperimentKind::ProtocolCheck: return run_protocol_check(cfg, workers);
        case ExperimentKind::LambdaTable: return run_lambda_table(cfg, workers);
    }
    throw DomainError("run_experiment: unknown experiment kind");
}

}  // namespace spinchain::experiment
