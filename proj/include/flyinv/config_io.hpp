#pragma once

// Flat key/value configuration files.
//
// Grammar (one entry per line):
//
//   line    := blank | comment | entry
//   comment := '#' any*
//   entry   := key ws* '=' ws* value ws* ('#' any*)?
//   key     := ident ('.' ident)*           e.g. circuit.source.u_dc
//   value   := number | word                 SI base units, '.' decimal point
//
// Duplicate keys are an error; unknown keys are an error. Optional keys and
// their defaults:
//   circuit.switches.r_on_secondary   = circuit.switches.r_on_primary
//   circuit.filter.l_grid             = 0
//   circuit.load.frequency            = modulation.f_fundamental (grid load)
//   modulation.dead_time              = 0
//   modulation.duty_law               = abs_sine
//   sim.n_cycles_settle               = 5
//   sim.divergence_bound              = 1e6

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "flyinv/circuit.hpp"
#include "flyinv/errors.hpp"

namespace flyinv {

/// Ordered key -> raw value text.
using KeyValues = std::map<std::string, std::string>;

inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::optional<double> parse_number(std::string_view s) {
    double v = 0.0;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline bool valid_key(std::string_view k) {
    if (k.empty() || k.front() == '.' || k.back() == '.') return false;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const char c = k[i];
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '_' || (c == '.' && k[i - 1] != '.');
        if (!ok) return false;
    }
    return true;
}

}  // namespace detail

inline KeyValues parse_key_values(std::string_view text) {
    KeyValues kv;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigParseError("line " + std::to_string(line_no) + ": expected key = value");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));
        if (!detail::valid_key(key))
            throw ConfigParseError("line " + std::to_string(line_no) + ": bad key '" +
                                   std::string(key) + "'");
        if (value.empty())
            throw ConfigParseError("line " + std::to_string(line_no) + ": empty value");
        if (!kv.emplace(std::string(key), std::string(value)).second)
            throw ConfigParseError("line " + std::to_string(line_no) + ": duplicate key '" +
                                   std::string(key) + "'");
    }
    return kv;
}

/// Applies one "dotted.path=value" override.
inline void apply_override(KeyValues& kv, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigParseError("override '" + std::string(assignment) + "' is not path=value");
    const auto key = detail::trim(assignment.substr(0, eq));
    const auto value = detail::trim(assignment.substr(eq + 1));
    if (!detail::valid_key(key) || value.empty())
        throw ConfigParseError("override '" + std::string(assignment) + "' is not path=value");
    kv[std::string(key)] = std::string(value);
}

namespace detail {

class KeyReader {
public:
    explicit KeyReader(const KeyValues& kv) : kv_(kv) {}

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string word(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        used_.push_back(key);
        const auto it = kv_.find(key);
        if (it != kv_.end()) return it->second;
        if (fallback) return *fallback;
        missing_.push_back(key);
        return {};
    }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        used_.push_back(key);
        const auto it = kv_.find(key);
        if (it == kv_.end()) {
            if (fallback) return *fallback;
            missing_.push_back(key);
            return 0.0;
        }
        const auto v = parse_number(it->second);
        if (!v) {
            bad_.push_back(key + " = '" + it->second + "' is not a number");
            return 0.0;
        }
        return *v;
    }

    int integer(const std::string& key, std::optional<int> fallback = std::nullopt) {
        const double v = number(key, fallback ? std::optional<double>(*fallback) : std::nullopt);
        if (v != std::floor(v) || std::abs(v) > 1e9) {
            bad_.push_back(key + " must be an integer");
            return 0;
        }
        return static_cast<int>(v);
    }

    void finish() const {
        std::string msg;
        for (const auto& k : missing_) msg += "\n  missing key " + k;
        for (const auto& b : bad_) msg += "\n  " + b;
        for (const auto& [k, v] : kv_)
            if (std::find(used_.begin(), used_.end(), k) == used_.end()) msg += "\n  unknown key " + k;
        if (!msg.empty()) throw ConfigParseError("configuration error:" + msg);
    }

    void fail(const std::string& what) { bad_.push_back(what); }

private:
    const KeyValues& kv_;
    std::vector<std::string> used_;
    std::vector<std::string> missing_;
    std::vector<std::string> bad_;
};

}  // namespace detail

/// Builds a SimConfig from parsed keys. Does not validate physical invariants.
inline SimConfig config_from_key_values(const KeyValues& kv) {
    detail::KeyReader r(kv);
    SimConfig c;
    auto& cp = c.circuit;
    cp.source.u_dc = r.number("circuit.source.u_dc");
    cp.transformer.turns_ratio = r.number("circuit.transformer.turns_ratio");
    cp.transformer.l_mag = r.number("circuit.transformer.l_mag");
    cp.switches.r_on_primary = r.number("circuit.switches.r_on_primary");
    cp.switches.r_on_secondary = r.number("circuit.switches.r_on_secondary", cp.switches.r_on_primary);
    cp.filter.l_filt = r.number("circuit.filter.l_filt");
    cp.filter.c_filt = r.number("circuit.filter.c_filt");
    cp.filter.l_grid = r.number("circuit.filter.l_grid", 0.0);

    auto& m = c.modulation;
    m.f_fundamental = r.number("modulation.f_fundamental");
    m.f_switching = r.number("modulation.f_switching");
    m.duty_max = r.number("modulation.duty_max");
    m.dead_time = r.number("modulation.dead_time", 0.0);
    const auto law = r.word("modulation.duty_law", std::string("abs_sine"));
    if (law == "abs_sine") m.law = DutyLaw::abs_sine;
    else if (law == "sqrt_abs_sine") m.law = DutyLaw::sqrt_abs_sine;
    else r.fail("modulation.duty_law must be abs_sine or sqrt_abs_sine, got '" + law + "'");

    const auto kind = r.word("circuit.load.kind");
    if (kind == "resistive") {
        cp.load = LoadSpec::resistive(r.number("circuit.load.r_load"));
    } else if (kind == "grid") {
        cp.load = LoadSpec::grid(r.number("circuit.load.amplitude_rms"),
                                 r.number("circuit.load.frequency", m.f_fundamental));
    } else if (!kind.empty()) {
        r.fail("circuit.load.kind must be resistive or grid, got '" + kind + "'");
    }

    c.dt = r.number("sim.dt");
    c.n_cycles_total = r.integer("sim.n_cycles_total");
    c.n_cycles_settle = r.integer("sim.n_cycles_settle", 5);
    c.divergence_bound = r.number("sim.divergence_bound", 1e6);
    r.finish();
    return c;
}

/// Canonical key set for a config; every key is written explicitly.
inline KeyValues key_values_from_config(const SimConfig& c) {
    KeyValues kv;
    const auto& cp = c.circuit;
    kv["circuit.source.u_dc"] = format_number(cp.source.u_dc);
    kv["circuit.transformer.turns_ratio"] = format_number(cp.transformer.turns_ratio);
    kv["circuit.transformer.l_mag"] = format_number(cp.transformer.l_mag);
    kv["circuit.switches.r_on_primary"] = format_number(cp.switches.r_on_primary);
    kv["circuit.switches.r_on_secondary"] = format_number(cp.switches.r_on_secondary);
    kv["circuit.filter.l_filt"] = format_number(cp.filter.l_filt);
    kv["circuit.filter.c_filt"] = format_number(cp.filter.c_filt);
    kv["circuit.filter.l_grid"] = format_number(cp.filter.l_grid);
    if (cp.load.kind == LoadKind::resistive) {
        kv["circuit.load.kind"] = "resistive";
        kv["circuit.load.r_load"] = format_number(cp.load.r_load);
    } else {
        kv["circuit.load.kind"] = "grid";
        kv["circuit.load.amplitude_rms"] = format_number(cp.load.amplitude_rms);
        kv["circuit.load.frequency"] = format_number(cp.load.frequency);
    }
    const auto& m = c.modulation;
    kv["modulation.f_fundamental"] = format_number(m.f_fundamental);
    kv["modulation.f_switching"] = format_number(m.f_switching);
    kv["modulation.duty_max"] = format_number(m.duty_max);
    kv["modulation.dead_time"] = format_number(m.dead_time);
    kv["modulation.duty_law"] = m.law == DutyLaw::abs_sine ? "abs_sine" : "sqrt_abs_sine";
    kv["sim.dt"] = format_number(c.dt);
    kv["sim.n_cycles_total"] = std::to_string(c.n_cycles_total);
    kv["sim.n_cycles_settle"] = std::to_string(c.n_cycles_settle);
    kv["sim.divergence_bound"] = format_number(c.divergence_bound);
    return kv;
}

inline std::string to_config_text(const SimConfig& c) {
    std::string out;
    for (const auto& [k, v] : key_values_from_config(c)) out += k + " = " + v + "\n";
    return out;
}

inline SimConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {}) {
    auto kv = parse_key_values(text);
    for (const auto& o : overrides) apply_override(kv, o);
    return config_from_key_values(kv);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline SimConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
    return parse_config(read_text_file(path), overrides);
}

/// Returns a copy of `c` with one dotted parameter replaced.
inline SimConfig with_parameter(const SimConfig& c, const std::string& path, const std::string& value) {
    auto kv = key_values_from_config(c);
    // Switching the load kind drops the keys of the other kind.
    if (path == "circuit.load.kind") {
        kv.erase("circuit.load.r_load");
        kv.erase("circuit.load.amplitude_rms");
        kv.erase("circuit.load.frequency");
    }
    apply_override(kv, path + "=" + value);
    return config_from_key_values(kv);
}

inline SimConfig with_parameter(const SimConfig& c, const std::string& path, double value) {
    return with_parameter(c, path, format_number(value));
}

}  // namespace flyinv
