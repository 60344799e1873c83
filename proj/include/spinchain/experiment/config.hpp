#pragma once

// Flat key = value run configuration with one [kind] section.
//
//   # comment
//   [infidelity_scan]
//   N = 16, 94
//   g_log = 1e-3, 1e-2, 11
//
// Times given through t_start / t_stop are in units of J / g^2.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "spinchain/chain_model.hpp"
#include "spinchain/common.hpp"

namespace spinchain::experiment {

enum class ExperimentKind { InfidelityScan, EntropyTrace, FidelityTrace, ProtocolCheck, LambdaTable };

inline std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::InfidelityScan: return "infidelity_scan";
        case ExperimentKind::EntropyTrace: return "entropy_trace";
        case ExperimentKind::FidelityTrace: return "fidelity_trace";
        case ExperimentKind::ProtocolCheck: return "protocol_check";
        case ExperimentKind::LambdaTable: return "lambda_table";
    }
    return "?";
}

class ConfigError : public ValidationError {
public:
    ConfigError(const std::string& key, int line, const std::string& message)
        : ValidationError(format(key, line, message)), key_(key), line_(line) {}

    const std::string& key() const { return key_; }
    int line() const { return line_; }

private:
    static std::string format(const std::string& key, int line, const std::string& message) {
        std::string out = "config";
        if (line > 0) out += " line " + std::to_string(line);
        if (!key.empty()) out += ", key '" + key + "'";
        return out + ": " + message;
    }

    std::string key_;
    int line_;
};

enum class TimeMode { Grid, PiOverGsq, TStar };
enum class ResourceKind { Ideal, EffectiveAtTStar, FullAtTime };

inline std::string to_string(ResourceKind r) {
    switch (r) {
        case ResourceKind::Ideal: return "ideal";
        case ResourceKind::EffectiveAtTStar: return "effective_at_tstar";
        case ResourceKind::FullAtTime: return "full_at_time";
    }
    return "?";
}

struct TimeGrid {
    Real start = 0.0;   // units of J/g^2
    Real stop = 2.0 * pi;
    int points = 400;

    Real scaled(int i) const { return points == 1 ? start : start + (stop - start) * i / (points - 1); }
};

struct RunConfig {
    ExperimentKind kind = ExperimentKind::InfidelityScan;

    std::vector<int> sites;   // N values
    bool sites_defaulted = false;
    Real J = 1.0;
    std::vector<Real> g;

    TimeMode time_mode = TimeMode::Grid;
    int t_star_n = 0;
    TimeGrid grid;
    int average_points = 401;

    std::string initial = "1100";
    Real theta = pi / 2.0;

    std::size_t samples = 0;
    std::optional<std::uint64_t> seed;

    ResourceKind resource = ResourceKind::EffectiveAtTStar;
    int k1 = 0, k2 = 0;   // 0 = auto
    Real input_s = 0.0;
    Real input_theta1 = pi / 3.0, input_theta2 = 2.0 * pi / 3.0;
    Real input_phi1 = pi / 4.0, input_phi2 = pi / 2.0;

    std::string output;

    std::vector<std::string> warnings;
    std::vector<std::string> echo;   // normalised key = value lines

    std::vector<int> channel_lengths() const {
        std::vector<int> out;
        for (int n : sites) out.push_back(n - 4);
        return out;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    return out;
}

struct Entry {
    std::string value;
    int line = 0;
};

// Numbers and products/quotients involving pi: "0.5", "pi/2", "3*pi/4".
inline Real parse_real(const std::string& key, const Entry& e, const std::string& text) {
    if (text.empty()) throw ConfigError(key, e.line, "expected a number, got an empty value");
    Real value = 1.0;
    char op = '*';
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t next = text.find_first_of("*/", pos);
        const std::string token = trim(text.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
        Real factor = 0.0;
        if (token == "pi") {
            factor = pi;
        } else {
            std::size_t used = 0;
            try {
                factor = std::stod(token, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != token.size())
                throw ConfigError(key, e.line, "expected a number, got '" + text + "'");
        }
        if (op == '*') {
            value *= factor;
        } else {
            if (factor == 0.0) throw ConfigError(key, e.line, "division by zero in '" + text + "'");
            value /= factor;
        }
        if (next == std::string::npos) break;
        op = text[next];
        pos = next + 1;
    }
    if (!std::isfinite(value)) throw ConfigError(key, e.line, "value is not finite");
    return value;
}

inline long long parse_int(const std::string& key, const Entry& e, const std::string& text) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw ConfigError(key, e.line, "expected an integer, got '" + text + "'");
    return v;
}

inline std::uint64_t parse_u64(const std::string& key, const Entry& e, const std::string& text) {
    if (text.empty() || text[0] == '-') throw ConfigError(key, e.line, "expected a non-negative integer");
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw ConfigError(key, e.line, "expected a non-negative integer, got '" + text + "'");
    return v;
}

inline const std::map<ExperimentKind, std::set<std::string>>& allowed_keys() {
    static const std::map<ExperimentKind, std::set<std::string>> keys{
        {ExperimentKind::InfidelityScan, {"N", "M", "J", "g", "g_log", "time", "average_points", "initial", "output"}},
        {ExperimentKind::EntropyTrace,
         {"N", "M", "J", "g", "g_log", "t_start", "t_stop", "t_points", "initial", "output"}},
        {ExperimentKind::FidelityTrace, {"N", "M", "J", "g", "g_log", "t_start", "t_stop", "t_points", "output"}},
        {ExperimentKind::ProtocolCheck,
         {"N", "M", "J", "g", "resource", "time", "initial", "theta", "k1", "k2", "samples", "seed", "input_s",
          "input_theta1", "input_theta2", "input_phi1", "input_phi2", "output"}},
        {ExperimentKind::LambdaTable, {"M", "J", "g", "output"}},
    };
    return keys;
}

inline ExperimentKind kind_from_section(const std::string& name, int line) {
    for (auto k : {ExperimentKind::InfidelityScan, ExperimentKind::EntropyTrace, ExperimentKind::FidelityTrace,
                   ExperimentKind::ProtocolCheck, ExperimentKind::LambdaTable}) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("", line, "unknown experiment section [" + name + "]");
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    using detail::Entry;
    std::optional<ExperimentKind> kind;
    int section_line = 0;
    std::map<std::string, Entry> entries;
    std::vector<std::string> order;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::size_t hash = raw.find('#');
        const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("", line_no, "malformed section header");
            if (kind) throw ConfigError("", line_no, "only one experiment section is allowed");
            kind = detail::kind_from_section(detail::trim(line.substr(1, line.size() - 2)), line_no);
            section_line = line_no;
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("", line_no, "expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("", line_no, "empty key");
        if (!kind) throw ConfigError(key, line_no, "key appears before the experiment section");
        if (!detail::allowed_keys().at(*kind).count(key))
            throw ConfigError(key, line_no, "unknown key for [" + to_string(*kind) + "]");
        if (entries.count(key)) throw ConfigError(key, line_no, "duplicate key");
        entries[key] = {value, line_no};
        order.push_back(key);
    }
    if (!kind) throw ConfigError("", 0, "missing experiment section, e.g. [infidelity_scan]");

    RunConfig cfg;
    cfg.kind = *kind;
    for (const auto& key : order) cfg.echo.push_back(key + " = " + entries[key].value);

    const auto has = [&](const char* key) { return entries.count(key) > 0; };
    const auto real_of = [&](const char* key) {
        const Entry& e = entries.at(key);
        return detail::parse_real(key, e, e.value);
    };
    const auto int_of = [&](const char* key, long long lo, long long hi) {
        const Entry& e = entries.at(key);
        const long long v = detail::parse_int(key, e, e.value);
        if (v < lo || v > hi)
            throw ConfigError(key, e.line, "value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                                               std::to_string(hi) + "]");
        return static_cast<int>(v);
    };
    const auto int_list = [&](const char* key, long long lo) {
        const Entry& e = entries.at(key);
        std::vector<int> out;
        for (const auto& item : detail::split_list(e.value)) {
            const long long v = detail::parse_int(key, e, item);
            if (v < lo) throw ConfigError(key, e.line, "value " + std::to_string(v) + " is below " + std::to_string(lo));
            out.push_back(static_cast<int>(v));
        }
        if (out.empty()) throw ConfigError(key, e.line, "empty list");
        return out;
    };
    const auto line_of = [&](const char* key) { return entries.count(key) ? entries.at(key).line : section_line; };

    // chain sizes
    const bool sized_kind = cfg.kind != ExperimentKind::LambdaTable;
    if (has("M") || has("N")) {
        std::vector<int> from_m, from_n;
        if (has("M")) {
            from_m = int_list("M", 1);
            for (int& m : from_m) m += 4;
        }
        if (has("N")) from_n = int_list("N", 5);
        if (has("M") && has("N") && from_m != from_n)
            throw ConfigError("N", line_of("N"), "inconsistent with M (N must equal M + 4)");
        cfg.sites = has("N") ? from_n : from_m;
    } else if (cfg.kind == ExperimentKind::FidelityTrace || cfg.kind == ExperimentKind::EntropyTrace ||
               cfg.kind == ExperimentKind::ProtocolCheck) {
        cfg.sites = {22};
        cfg.sites_defaulted = true;
    } else {
        throw ConfigError(sized_kind ? "N" : "M", section_line, "missing required key");
    }

    if (has("J")) {
        cfg.J = real_of("J");
        if (!(cfg.J > 0.0)) throw ConfigError("J", line_of("J"), "must be > 0");
    }

    // couplings
    if (has("g") && has("g_log")) throw ConfigError("g_log", line_of("g_log"), "give either g or g_log, not both");
    if (has("g")) {
        const Entry& e = entries.at("g");
        for (const auto& item : detail::split_list(e.value)) cfg.g.push_back(detail::parse_real("g", e, item));
        if (cfg.g.empty()) throw ConfigError("g", e.line, "empty list");
    } else if (has("g_log")) {
        const Entry& e = entries.at("g_log");
        const auto parts = detail::split_list(e.value);
        if (parts.size() != 3) throw ConfigError("g_log", e.line, "expected 'start, stop, points'");
        const Real lo = detail::parse_real("g_log", e, parts[0]);
        const Real hi = detail::parse_real("g_log", e, parts[1]);
        const long long pts = detail::parse_int("g_log", e, parts[2]);
        if (!(lo > 0.0 && hi > lo)) throw ConfigError("g_log", e.line, "need 0 < start < stop");
        if (pts < 2) throw ConfigError("g_log", e.line, "need at least two points");
        for (long long i = 0; i < pts; ++i)
            cfg.g.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * static_cast<Real>(i) / (pts - 1)));
    } else if (cfg.kind == ExperimentKind::FidelityTrace) {
        cfg.g = {0.1 * cfg.J, 0.05 * cfg.J, 0.025 * cfg.J};
    } else if (cfg.kind == ExperimentKind::ProtocolCheck || cfg.kind == ExperimentKind::LambdaTable) {
        cfg.g = {0.1 * cfg.J};
    } else {
        throw ConfigError("g", section_line, "missing required key");
    }
    for (Real g : cfg.g) {
        if (!(g > 0.0 && g <= cfg.J)) throw ConfigError(has("g") ? "g" : "g_log", line_of(has("g") ? "g" : "g_log"), "must satisfy 0 < g <= J");
    }

    // time
    if (has("time")) {
        const Entry& e = entries.at("time");
        const std::string v = e.value;
        if (v == "pi_over_gsq") {
            cfg.time_mode = TimeMode::PiOverGsq;
        } else if (v.rfind("t_star(", 0) == 0 && v.back() == ')') {
            cfg.time_mode = TimeMode::TStar;
            const long long n = detail::parse_int("time", e, v.substr(7, v.size() - 8));
            if (n < 0) throw ConfigError("time", e.line, "t_star index must be >= 0");
            cfg.t_star_n = static_cast<int>(n);
        } else {
            throw ConfigError("time", e.line, "expected pi_over_gsq or t_star(n), got '" + v + "'");
        }
    } else if (cfg.kind == ExperimentKind::InfidelityScan) {
        cfg.time_mode = TimeMode::PiOverGsq;
    } else if (cfg.kind == ExperimentKind::ProtocolCheck) {
        cfg.time_mode = TimeMode::TStar;
    }
    if (has("t_start")) cfg.grid.start = real_of("t_start");
    if (has("t_stop")) cfg.grid.stop = real_of("t_stop");
    if (has("t_points")) cfg.grid.points = int_of("t_points", 1, 1000000);
    if (cfg.grid.start < 0.0) throw ConfigError("t_start", line_of("t_start"), "must be >= 0");
    if (cfg.grid.points > 1 && !(cfg.grid.stop > cfg.grid.start))
        throw ConfigError("t_stop", line_of("t_stop"), "time grid must be increasing");
    if (has("average_points")) cfg.average_points = int_of("average_points", 2, 1000000);

    if (has("initial")) {
        const Entry& e = entries.at("initial");
        static const std::set<std::string> labels{"1100", "1010", "1001", "0110"};
        if (!labels.count(e.value)) throw ConfigError("initial", e.line, "expected one of 1100, 1010, 1001, 0110");
        cfg.initial = e.value;
    }
    if (has("theta")) cfg.theta = real_of("theta");

    if (has("samples")) cfg.samples = static_cast<std::size_t>(int_of("samples", 0, 100000000));
    if (has("seed")) {
        const Entry& e = entries.at("seed");
        cfg.seed = detail::parse_u64("seed", e, e.value);
    }

    if (has("resource")) {
        const Entry& e = entries.at("resource");
        if (e.value == "ideal") cfg.resource = ResourceKind::Ideal;
        else if (e.value == "effective_at_tstar") cfg.resource = ResourceKind::EffectiveAtTStar;
        else if (e.value == "full_at_time") cfg.resource = ResourceKind::FullAtTime;
        else throw ConfigError("resource", e.line, "expected ideal, effective_at_tstar or full_at_time");
    }
    const auto index_of = [&](const char* key) {
        const Entry& e = entries.at(key);
        if (e.value == "auto") return 0;
        return int_of(key, 1, 4);
    };
    if (has("k1")) cfg.k1 = index_of("k1");
    if (has("k2")) cfg.k2 = index_of("k2");
    if (has("input_s")) cfg.input_s = real_of("input_s");
    if (has("input_theta1")) cfg.input_theta1 = real_of("input_theta1");
    if (has("input_theta2")) cfg.input_theta2 = real_of("input_theta2");
    if (has("input_phi1")) cfg.input_phi1 = real_of("input_phi1");
    if (has("input_phi2")) cfg.input_phi2 = real_of("input_phi2");
    if (std::abs(cfg.input_s) > 1.0) throw ConfigError("input_s", line_of("input_s"), "must lie in [-1, 1]");
    for (auto [key, v] : {std::pair<const char*, Real>{"input_theta1", cfg.input_theta1}, {"input_theta2", cfg.input_theta2}})
        if (v < 0.0 || v > pi) throw ConfigError(key, line_of(key), "must lie in [0, pi]");
    for (auto [key, v] : {std::pair<const char*, Real>{"input_phi1", cfg.input_phi1}, {"input_phi2", cfg.input_phi2}})
        if (v < 0.0 || v > 2.0 * pi) throw ConfigError(key, line_of(key), "must lie in [0, 2 pi]");

    if (has("output")) cfg.output = entries.at("output").value;

    if (cfg.kind == ExperimentKind::ProtocolCheck && cfg.samples > 0 && !cfg.seed)
        throw ConfigError("seed", line_of("samples"), "samples > 0 requires a seed");
    if (cfg.kind == ExperimentKind::ProtocolCheck && cfg.resource != ResourceKind::Ideal && cfg.time_mode == TimeMode::Grid)
        throw ConfigError("time", section_line, "protocol_check needs a single time");
    if (cfg.kind == ExperimentKind::ProtocolCheck && cfg.resource == ResourceKind::EffectiveAtTStar &&
        cfg.time_mode != TimeMode::TStar)
        throw ConfigError("time", line_of("time"), "effective_at_tstar needs time = t_star(n)");

    for (int m : cfg.channel_lengths()) {
        if (classify_channel(m) == ChannelClass::Resonant) {
            cfg.warnings.push_back("M = " + std::to_string(m) +
                                   " is resonant; second-order results are invalid, exact dynamics still run");
        }
    }
    return cfg;
}

}  // namespace spinchain::experiment
