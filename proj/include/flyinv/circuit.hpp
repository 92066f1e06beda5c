#pragma once

// Physical parameters of the two-switch flyback microinverter and the
// simulation configuration. Plain value types; validate() is the only gate.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "flyinv/errors.hpp"

namespace flyinv {

struct SourceSpec {
    double u_dc = 48.0;  // V
};

/// Ideal transformer plus magnetizing inductance referred to the primary.
/// turns_ratio is N_secondary / N_primary.
struct TransformerSpec {
    double turns_ratio = 6.0;
    double l_mag = 20e-6;  // H
};

struct SwitchSpec {
    double r_on_primary = 0.008;    // M1..M4, ohm
    double r_on_secondary = 0.008;  // M5, M6, ohm
};

/// CL filter. l_grid is lumped in series with l_filt everywhere.
struct FilterSpec {
    double l_filt = 1e-3;    // H
    double c_filt = 4.7e-6;  // F
    double l_grid = 0.0;     // H

    double total_inductance() const noexcept { return l_filt + l_grid; }
};

enum class LoadKind { resistive, grid };

struct LoadSpec {
    LoadKind kind = LoadKind::resistive;
    double r_load = 529.0;        // resistive only
    double amplitude_rms = 230.0; // grid only
    double frequency = 50.0;      // grid only

    static LoadSpec resistive(double r) {
        LoadSpec l;
        l.kind = LoadKind::resistive;
        l.r_load = r;
        return l;
    }
    static LoadSpec grid(double v_rms, double f) {
        LoadSpec l;
        l.kind = LoadKind::grid;
        l.amplitude_rms = v_rms;
        l.frequency = f;
        return l;
    }
};

struct CircuitParams {
    SourceSpec source;
    TransformerSpec transformer;
    SwitchSpec switches;
    FilterSpec filter;
    LoadSpec load;
};

/// Envelope of the PWM duty over the fundamental period.
///   abs_sine:      d = duty_max * |sin|       (DCM energy per period ~ sin^2)
///   sqrt_abs_sine: d = duty_max * sqrt(|sin|) (energy per period ~ |sin|)
enum class DutyLaw { abs_sine, sqrt_abs_sine };

struct ModulationSpec {
    double f_fundamental = 50.0;  // Hz
    double f_switching = 25e3;    // Hz
    double duty_max = 0.3;
    double dead_time = 0.0;  // s, removed from the trailing edge
    DutyLaw law = DutyLaw::abs_sine;

    double switching_period() const noexcept { return 1.0 / f_switching; }
    double fundamental_period() const noexcept { return 1.0 / f_fundamental; }
};

struct SimConfig {
    CircuitParams circuit;
    ModulationSpec modulation;
    double dt = 0.4e-6;  // s
    int n_cycles_total = 10;
    int n_cycles_settle = 5;
    double divergence_bound = 1e6;  // |state| limit, SI units

    /// Integration steps per switching period. Exact for validated configs.
    std::int64_t steps_per_switching_period() const {
        return std::llround(1.0 / (dt * modulation.f_switching));
    }
    /// Switching periods per fundamental cycle.
    std::int64_t periods_per_cycle() const {
        return std::llround(modulation.f_switching / modulation.f_fundamental);
    }
    std::int64_t steps_per_cycle() const {
        return steps_per_switching_period() * periods_per_cycle();
    }
    std::int64_t total_steps() const { return steps_per_cycle() * n_cycles_total; }
};

namespace detail {

inline bool near_integer(double x, double rel = 1e-9) {
    return std::isfinite(x) && std::abs(x - std::round(x)) <= rel * std::max(1.0, std::abs(x));
}

inline bool positive(double x) { return std::isfinite(x) && x > 0.0; }
inline bool non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace detail

/// Returns the config unchanged if every invariant holds. Otherwise throws a
/// ValidationError listing every violated rule, not just the first one.
inline SimConfig validate(const SimConfig& config) {
    using detail::non_negative;
    using detail::positive;
    std::vector<Violation> out;
    auto check = [&](bool ok, const char* field, const char* rule) {
        if (!ok) out.push_back({field, rule});
    };

    const auto& c = config.circuit;
    const auto& m = config.modulation;

    check(positive(c.source.u_dc), "circuit.source.u_dc", "must be > 0");
    check(positive(c.transformer.turns_ratio), "circuit.transformer.turns_ratio", "must be > 0");
    check(positive(c.transformer.l_mag), "circuit.transformer.l_mag", "must be > 0");
    check(non_negative(c.switches.r_on_primary), "circuit.switches.r_on_primary", "must be >= 0");
    check(non_negative(c.switches.r_on_secondary), "circuit.switches.r_on_secondary",
          "must be >= 0");
    check(positive(c.filter.l_filt), "circuit.filter.l_filt", "must be > 0");
    check(positive(c.filter.c_filt), "circuit.filter.c_filt", "must be > 0");
    check(non_negative(c.filter.l_grid), "circuit.filter.l_grid", "must be >= 0");

    if (c.load.kind == LoadKind::resistive) {
        check(positive(c.load.r_load), "circuit.load.r_load", "must be > 0");
    } else {
        check(positive(c.load.amplitude_rms), "circuit.load.amplitude_rms", "must be > 0");
        check(positive(c.load.frequency), "circuit.load.frequency", "must be > 0");
        check(!positive(c.load.frequency) || !positive(m.f_fundamental) ||
                  std::abs(c.load.frequency - m.f_fundamental) <= 1e-12 * m.f_fundamental,
              "circuit.load.frequency", "must equal modulation.f_fundamental");
    }

    const bool f0_ok = positive(m.f_fundamental);
    const bool fsw_ok = positive(m.f_switching);
    check(f0_ok, "modulation.f_fundamental", "must be > 0");
    check(fsw_ok, "modulation.f_switching", "must be > 0");
    if (f0_ok && fsw_ok) {
        check(m.f_switching >= 20.0 * m.f_fundamental, "modulation.f_switching",
              "must be >= 20 * f_fundamental");
        check(detail::near_integer(m.f_switching / m.f_fundamental), "modulation.f_switching",
              "f_switching / f_fundamental must be an integer");
    }
    check(std::isfinite(m.duty_max) && m.duty_max > 0.0 && m.duty_max <= 1.0,
          "modulation.duty_max", "must lie in (0, 1]");
    check(non_negative(m.dead_time), "modulation.dead_time", "must be >= 0");
    if (fsw_ok && non_negative(m.dead_time) && std::isfinite(m.duty_max))
        check(m.dead_time < m.duty_max / m.f_switching, "modulation.dead_time",
              "must be < duty_max / f_switching");

    const bool dt_ok = positive(config.dt);
    check(dt_ok, "sim.dt", "must be > 0");
    if (dt_ok && fsw_ok) {
        // Slack of a few ulps so that dt = 1/(100 f_sw) written in decimal is accepted.
        check(config.dt * 100.0 * m.f_switching <= 1.0 + 1e-12, "sim.dt",
              "must be <= 1 / (100 * f_switching)");
        check(detail::near_integer(1.0 / (config.dt * m.f_switching)), "sim.dt",
              "1/dt must be an integer multiple of f_switching");
    }
    check(config.n_cycles_total >= 1, "sim.n_cycles_total", "must be >= 1");
    check(config.n_cycles_settle >= 0, "sim.n_cycles_settle", "must be >= 0");
    check(config.n_cycles_settle < config.n_cycles_total, "sim.n_cycles_settle",
          "must be < n_cycles_total");
    check(positive(config.divergence_bound), "sim.divergence_bound", "must be > 0");

    if (!out.empty()) throw ValidationError(std::move(out));
    return config;
}

}  // namespace flyinv
