#pragma once

// Shipped parameter sets and the rule used to rescale them to another
// output setpoint.

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "flyinv/circuit.hpp"
#include "flyinv/config_io.hpp"
#include "flyinv/errors.hpp"

namespace flyinv {

// 48 V panel bus, 230 V RMS / 100 W into a resistive load.
// Filter: f_c ~ 1.5 kHz (between 10 f0 and f_sw / 10), characteristic
// impedance sqrt(L / C) ~ 529 ohm = r_load. The secondary resistance lumps
// the high-voltage unfolding switch and the winding; only M1..M4 vary in the
// R_on studies.
inline constexpr std::string_view baseline_preset_text = R"(# flyinv baseline preset
circuit.source.u_dc = 48
circuit.transformer.turns_ratio = 7
circuit.transformer.l_mag = 20e-6
circuit.switches.r_on_primary = 0.008
circuit.switches.r_on_secondary = 4
circuit.filter.l_filt = 0.056
circuit.filter.c_filt = 200e-9
circuit.filter.l_grid = 0
circuit.load.kind = resistive
circuit.load.r_load = 529
modulation.f_fundamental = 50
modulation.f_switching = 25000
modulation.duty_max = 0.3
modulation.dead_time = 0
modulation.duty_law = abs_sine
sim.dt = 4e-7
sim.n_cycles_total = 10
sim.n_cycles_settle = 5
sim.divergence_bound = 1e6
)";

inline SimConfig baseline_preset() { return parse_config(baseline_preset_text); }

inline SimConfig preset(const std::string& name) {
    if (name == "baseline") return baseline_preset();
    throw ConfigParseError("unknown preset '" + name + "'");
}

/// Average output power of an ideal, lossless DCM flyback under the duty law.
/// Energy per switching period is (U d T_sw)^2 / (2 Lm).
inline double dcm_average_power(const SimConfig& c) {
    const double u = c.circuit.source.u_dc;
    const double lm = c.circuit.transformer.l_mag;
    const double fsw = c.modulation.f_switching;
    const double d = c.modulation.duty_max;
    const double peak = u * u * d * d / (2.0 * lm * fsw);
    // Mean of sin^2 is 1/2; mean of |sin| is 2/pi.
    return c.modulation.law == DutyLaw::abs_sine ? 0.5 * peak : 2.0 / std::numbers::pi * peak;
}

/// duty_max that makes dcm_average_power equal p_target.
inline double dcm_duty_for_power(const SimConfig& c, double p_target) {
    SimConfig unit = c;
    unit.modulation.duty_max = 1.0;
    return std::sqrt(p_target / dcm_average_power(unit));
}

/// Output RMS voltage the open-loop command produces into the resistive load,
/// ignoring losses.
inline double commanded_output_rms(const SimConfig& c) {
    if (c.circuit.load.kind != LoadKind::resistive)
        return c.circuit.load.amplitude_rms;
    return std::sqrt(dcm_average_power(c) * c.circuit.load.r_load);
}

/// Rescales a resistive-load config to a new (V_rms, P) setpoint:
/// r_load = V^2 / P, filter impedance matched to r_load at the same resonant
/// frequency, duty_max from the lossless DCM power.
inline SimConfig apply_setpoint(const SimConfig& base, double v_rms, double p_out) {
    if (!(v_rms > 0.0) || !(p_out > 0.0))
        throw TargetUnreachable("setpoint needs V_rms > 0 and P > 0");
    SimConfig c = base;
    const double r = v_rms * v_rms / p_out;
    c.circuit.load = LoadSpec::resistive(r);

    const double fc =
        1.0 / (2.0 * std::numbers::pi * std::sqrt(base.circuit.filter.total_inductance() *
                                                  base.circuit.filter.c_filt));
    const double w = 2.0 * std::numbers::pi * fc;
    c.circuit.filter.c_filt = 1.0 / (w * r);
    c.circuit.filter.l_filt = r / w - c.circuit.filter.l_grid;
    if (!(c.circuit.filter.l_filt > 0.0))
        throw TargetUnreachable("grid inductance exceeds the matched filter inductance");

    c.modulation.duty_max = dcm_duty_for_power(c, p_out);
    if (!(c.modulation.duty_max <= 1.0))
        throw TargetUnreachable("setpoint needs duty_max > 1");
    return c;
}

}  // namespace flyinv
