#pragma once

// Fixed-step RK4 integration of the switched piecewise-linear microinverter.
//
// Continuous states: magnetizing current (primary referred, signed), filter
// capacitor voltage (converter side) and filter inductor current (load side).
// Conduction states, selected from the gates and the sign of i_mag:
//
//   charge    active primary pair on; source drives Lm through 2 * r_on_primary
//   transfer  primary off, i_mag != 0, the unfolding switch matching sign(i_mag)
//             is on; Lm demagnetizes into the capacitor via i_sec = |i_mag| / n
//   clamp     primary off, i_mag != 0, matching unfolding switch off; the
//             two-switch clamp diodes return the residual energy to the source
//   idle      i_mag == 0 and primary off
//
// The trailing PWM edge and the i_mag zero crossing are resolved inside the
// step, so the effective duty does not depend on dt.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "flyinv/circuit.hpp"
#include "flyinv/errors.hpp"
#include "flyinv/modulator.hpp"

namespace flyinv {

struct SimState {
    double i_mag = 0.0;  // A
    double v_cap = 0.0;  // V
    double i_ind = 0.0;  // A
    double e_in = 0.0;   // J
    double e_out = 0.0;  // J
    double e_loss = 0.0; // J

    friend bool operator==(const SimState&, const SimState&) = default;
};

struct StateRates {
    double d_i_mag = 0.0;
    double d_v_cap = 0.0;
    double d_i_ind = 0.0;
};

enum class ConductionMode { charge, transfer, clamp, idle };

inline const char* to_string(ConductionMode m) {
    switch (m) {
        case ConductionMode::charge: return "charge";
        case ConductionMode::transfer: return "transfer";
        case ConductionMode::clamp: return "clamp";
        case ConductionMode::idle: return "idle";
    }
    return "?";
}

inline ConductionMode conduction_mode(double i_mag, const GateState& g) {
    if (g.positive_pair() || g.negative_pair()) return ConductionMode::charge;
    if (i_mag == 0.0) return ConductionMode::idle;
    const bool path = i_mag > 0.0 ? g.m5 : g.m6;
    return path ? ConductionMode::transfer : ConductionMode::clamp;
}

/// Voltage at the load-side filter terminal.
inline double load_voltage(double i_ind, const LoadSpec& load, double t) {
    if (load.kind == LoadKind::resistive) return i_ind * load.r_load;
    return std::numbers::sqrt2 * load.amplitude_rms *
           std::sin(2.0 * std::numbers::pi * load.frequency * t);
}

/// Capacitor and inductor rates given the current injected into the
/// capacitor node. Shared by the converter model and the driven-filter check.
inline StateRates filter_rates(double v_cap, double i_ind, double i_inject, double v_load,
                               const FilterSpec& f) {
    return {0.0, (i_inject - i_ind) / f.c_filt, (v_cap - v_load) / f.total_inductance()};
}

namespace detail {

inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

struct Terminal {
    double p_in;    // W drawn from the DC source
    double p_loss;  // W dissipated in switch resistances
    double v_load;
    double i_sec;   // A into the capacitor node (signed)
};

// `sigma` is the sign of i_mag when the mode was entered. Holding it fixed
// keeps each mode linear, so RK4 stages that overshoot zero stay consistent
// and the crossing is resolved by advance().
inline Terminal terminal(ConductionMode mode, double i_mag, double sigma, double i_ind,
                         const GateState& g, const CircuitParams& p, double t) {
    Terminal out{0.0, 0.0, load_voltage(i_ind, p.load, t), 0.0};
    switch (mode) {
        case ConductionMode::charge: {
            const double s = g.positive_pair() ? 1.0 : -1.0;
            out.p_in = p.source.u_dc * s * i_mag;
            out.p_loss = 2.0 * p.switches.r_on_primary * i_mag * i_mag;
            break;
        }
        case ConductionMode::transfer: {
            const double i_sec = sigma * i_mag / p.transformer.turns_ratio;
            out.i_sec = sigma * i_sec;
            out.p_loss = p.switches.r_on_secondary * i_sec * i_sec;
            break;
        }
        case ConductionMode::clamp:
            out.p_in = -p.source.u_dc * sigma * i_mag;
            break;
        case ConductionMode::idle: break;
    }
    return out;
}

inline StateRates rates_in_mode(ConductionMode mode, double i_mag, double sigma, double v_cap,
                                double i_ind, const GateState& g, const CircuitParams& p, double t) {
    const auto term = terminal(mode, i_mag, sigma, i_ind, g, p, t);
    StateRates r = filter_rates(v_cap, i_ind, term.i_sec, term.v_load, p.filter);
    const double lm = p.transformer.l_mag;
    switch (mode) {
        case ConductionMode::charge: {
            const double s = g.positive_pair() ? 1.0 : -1.0;
            r.d_i_mag = (s * p.source.u_dc - 2.0 * p.switches.r_on_primary * i_mag) / lm;
            break;
        }
        case ConductionMode::transfer: {
            const double n = p.transformer.turns_ratio;
            r.d_i_mag = -(v_cap + term.i_sec * p.switches.r_on_secondary) / (n * lm);
            break;
        }
        case ConductionMode::clamp:
            r.d_i_mag = -sigma * p.source.u_dc / lm;
            break;
        case ConductionMode::idle: r.d_i_mag = 0.0; break;
    }
    return r;
}

// (i_mag, v_cap, i_ind, e_in, e_loss, e_out); the energies ride along as
// quadrature states so they share the integrator's order.
using Vec6 = std::array<double, 6>;

inline Vec6 pack(const SimState& s) { return {s.i_mag, s.v_cap, s.i_ind, s.e_in, s.e_loss, s.e_out}; }

inline void unpack(const Vec6& y, SimState& s) {
    s.i_mag = y[0];
    s.v_cap = y[1];
    s.i_ind = y[2];
    s.e_in = y[3];
    s.e_loss = y[4];
    s.e_out = y[5];
}

inline Vec6 rk4(ConductionMode mode, const Vec6& y, double t, double h, const GateState& g,
                const CircuitParams& p) {
    const double sigma = sign_of(y[0]);
    auto f = [&](const Vec6& s, double tt) {
        const auto r = rates_in_mode(mode, s[0], sigma, s[1], s[2], g, p, tt);
        const auto term = terminal(mode, s[0], sigma, s[2], g, p, tt);
        return Vec6{r.d_i_mag, r.d_v_cap, r.d_i_ind, term.p_in, term.p_loss, term.v_load * s[2]};
    };
    auto axpy = [](const Vec6& a, double k, const Vec6& b) {
        Vec6 out;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + k * b[i];
        return out;
    };
    const Vec6 k1 = f(y, t);
    const Vec6 k2 = f(axpy(y, 0.5 * h, k1), t + 0.5 * h);
    const Vec6 k3 = f(axpy(y, 0.5 * h, k2), t + 0.5 * h);
    const Vec6 k4 = f(axpy(y, h, k3), t + h);
    Vec6 out;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

/// Advances over [t, t+h] with fixed gates, splitting at an i_mag zero crossing.
inline void advance(SimState& s, double t, double h, const GateState& g, const CircuitParams& p) {
    const ConductionMode mode = conduction_mode(s.i_mag, g);
    const Vec6 y0 = pack(s);
    const Vec6 y1 = rk4(mode, y0, t, h, g, p);

    const bool decaying = mode == ConductionMode::transfer || mode == ConductionMode::clamp;
    if (decaying && (y1[0] == 0.0 || sign_of(y1[0]) != sign_of(y0[0]))) {
        // Crossing time by linear interpolation, then clamp i_mag to exactly zero.
        const double h1 = h * y0[0] / (y0[0] - y1[0]);
        Vec6 ym = rk4(mode, y0, t, h1, g, p);
        ym[0] = 0.0;
        // Remainder of the step is idle: primary off, no magnetizing current.
        unpack(rk4(ConductionMode::idle, ym, t + h1, h - h1, g, p), s);
        return;
    }
    unpack(y1, s);
}

inline void check_bounded(const SimState& s, double t, double bound) {
    for (double v : {s.i_mag, s.v_cap, s.i_ind, s.e_in, s.e_out, s.e_loss}) {
        if (!std::isfinite(v) || std::abs(v) > bound)
            throw NumericalDivergence(t, "state magnitude exceeded " + std::to_string(bound));
    }
}

}  // namespace detail

/// Time derivatives of (i_mag, v_cap, i_ind) for the conduction state implied
/// by the gates and the sign of i_mag.
inline StateRates derivatives(const SimState& state, const GateState& gates,
                              const CircuitParams& params, double t) {
    return detail::rates_in_mode(conduction_mode(state.i_mag, gates), state.i_mag,
                                 detail::sign_of(state.i_mag), state.v_cap, state.i_ind, gates,
                                 params, t);
}

/// Energy held in Lm, C and L + Lg.
inline double stored_energy(const SimState& s, const CircuitParams& p) {
    return 0.5 * p.transformer.l_mag * s.i_mag * s.i_mag +
           0.5 * p.filter.c_filt * s.v_cap * s.v_cap +
           0.5 * p.filter.total_inductance() * s.i_ind * s.i_ind;
}

/// Advances one dt from grid time t. Gates come from the modulator; the
/// trailing edge of the on-pulse is honoured at its exact time.
inline SimState step(const SimState& state, double t, const SimConfig& config) {
    const auto& mod = config.modulation;
    const auto& p = config.circuit;
    const double dt = config.dt;

    const auto period = switching_period_index(t, mod);
    const auto cmd = duty_command_for_period(period, mod);
    const double t_off = static_cast<double>(period) * mod.switching_period() + on_time(cmd, mod);
    const GateState g = gates(t, cmd, mod);

    SimState s = state;
    if ((g.positive_pair() || g.negative_pair()) && t_off < t + dt * (1.0 - 1e-9)) {
        const double h_on = t_off - t;
        detail::advance(s, t, h_on, g, p);
        GateState off = g;
        off.m1 = off.m2 = off.m3 = off.m4 = false;
        detail::advance(s, t_off, dt - h_on, off, p);
    } else {
        detail::advance(s, t, dt, g, p);
    }
    detail::check_bounded(s, t + dt, config.divergence_bound);
    return s;
}

struct TraceSample {
    double t = 0.0;
    SimState state;
    GateState gates;
    double v_load = 0.0;
    double i_load = 0.0;
    double p_in = 0.0;
    double p_out = 0.0;
};

struct Trace {
    double dt = 0.0;
    std::vector<TraceSample> samples;
    SimConfig meta;

    std::size_t size() const noexcept { return samples.size(); }

    /// Sample index range [first, last) covering the settled cycles.
    std::pair<std::size_t, std::size_t> settled_window() const {
        const auto per_cycle = static_cast<std::size_t>(meta.steps_per_cycle());
        const auto first = per_cycle * static_cast<std::size_t>(meta.n_cycles_settle);
        const auto last = per_cycle * static_cast<std::size_t>(meta.n_cycles_total);
        return {first, std::min(last, samples.size())};
    }

    std::vector<double> column(double TraceSample::*field) const {
        std::vector<double> out;
        out.reserve(samples.size());
        for (const auto& s : samples) out.push_back(s.*field);
        return out;
    }

    std::vector<double> state_column(double SimState::*field) const {
        std::vector<double> out;
        out.reserve(samples.size());
        for (const auto& s : samples) out.push_back(s.state.*field);
        return out;
    }
};

inline TraceSample make_sample(const SimState& s, double t, const SimConfig& config) {
    TraceSample out;
    out.t = t;
    out.state = s;
    out.gates = gates(t, config.modulation);
    const auto mode = conduction_mode(s.i_mag, out.gates);
    const auto term = detail::terminal(mode, s.i_mag, detail::sign_of(s.i_mag), s.i_ind, out.gates,
                                       config.circuit, t);
    out.v_load = term.v_load;
    out.i_load = s.i_ind;
    out.p_in = term.p_in;
    out.p_out = term.v_load * s.i_ind;
    return out;
}

/// Runs n_cycles_total fundamental cycles from the all-zero state. Deterministic:
/// the same config yields a bit-identical Trace.
inline Trace simulate(const SimConfig& config_in) {
    const SimConfig config = validate(config_in);
    Trace trace;
    trace.dt = config.dt;
    trace.meta = config;

    const auto n_steps = config.total_steps();
    trace.samples.reserve(static_cast<std::size_t>(n_steps) + 1);

    SimState s;
    trace.samples.push_back(make_sample(s, 0.0, config));
    for (std::int64_t k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * config.dt;
        s = step(s, t, config);
        trace.samples.push_back(make_sample(s, static_cast<double>(k + 1) * config.dt, config));
    }
    return trace;
}

}  // namespace flyinv
