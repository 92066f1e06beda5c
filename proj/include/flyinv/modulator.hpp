#pragma once

// Gate generation for M1..M6: regular-sampled sinusoidal PWM on the active
// two-switch flyback pair, M5/M6 unfolding at the fundamental zero crossings.

#include <cmath>
#include <cstdint>
#include <numbers>

#include "flyinv/circuit.hpp"

namespace flyinv {

struct GateState {
    bool m1 = false, m2 = false, m3 = false, m4 = false, m5 = false, m6 = false;

    /// Bit k set when M(k+1) conducts.
    std::uint8_t bitmask() const noexcept {
        return static_cast<std::uint8_t>(m1 | m2 << 1 | m3 << 2 | m4 << 3 | m5 << 4 | m6 << 5);
    }
    static GateState from_bitmask(std::uint8_t b) noexcept {
        return {bool(b & 1), bool(b & 2), bool(b & 4), bool(b & 8), bool(b & 16), bool(b & 32)};
    }

    bool positive_pair() const noexcept { return m1 && m4; }
    bool negative_pair() const noexcept { return m2 && m3; }

    bool valid() const noexcept {
        return !((m1 || m4) && (m2 || m3)) && !(m5 && m6) && m1 == m4 && m2 == m3;
    }

    friend bool operator==(const GateState&, const GateState&) = default;
};

enum class Polarity { negative = -1, zero = 0, positive = 1 };

struct DutyCommand {
    double duty = 0.0;
    Polarity polarity = Polarity::zero;
};

/// Index of the switching period containing t. Grid points that land a few
/// ulps short of a period boundary are attributed to the next period.
inline std::int64_t switching_period_index(double t, const ModulationSpec& mod) {
    return static_cast<std::int64_t>(std::floor(t * mod.f_switching + 1e-7));
}

/// Duty command latched for switching period `period` (regular sampling at
/// the period start). The angle is reduced with integer arithmetic so the
/// zero crossings are exact and the two half cycles mirror bit for bit.
inline DutyCommand duty_command_for_period(std::int64_t period, const ModulationSpec& mod) {
    const auto per_cycle = std::llround(mod.f_switching / mod.f_fundamental);
    const auto k = ((period % per_cycle) + per_cycle) % per_cycle;
    if (k == 0 || 2 * k == per_cycle) return {};

    const bool first_half = 2 * k < per_cycle;
    // Folding the second half onto the first keeps |sin| identical in both.
    const auto k_angle = (per_cycle % 2 == 0 && !first_half) ? k - per_cycle / 2 : k;
    const double s = std::abs(std::sin(2.0 * std::numbers::pi * static_cast<double>(k_angle) /
                                       static_cast<double>(per_cycle)));

    DutyCommand cmd;
    cmd.polarity = first_half ? Polarity::positive : Polarity::negative;
    switch (mod.law) {
        case DutyLaw::abs_sine: cmd.duty = mod.duty_max * s; break;
        case DutyLaw::sqrt_abs_sine: cmd.duty = mod.duty_max * std::sqrt(s); break;
    }
    return cmd;
}

inline DutyCommand duty_command(double t, const ModulationSpec& mod) {
    return duty_command_for_period(switching_period_index(t, mod), mod);
}

/// Conducting time of the active pair within its switching period.
inline double on_time(const DutyCommand& cmd, const ModulationSpec& mod) {
    if (cmd.polarity == Polarity::zero) return 0.0;
    return std::max(0.0, cmd.duty * mod.switching_period() - mod.dead_time);
}

/// Gate states at time t for a command latched in the same switching period.
inline GateState gates(double t, const DutyCommand& cmd, const ModulationSpec& mod) {
    GateState g;
    if (cmd.polarity == Polarity::zero) return g;

    const auto period = switching_period_index(t, mod);
    const double phase = std::max(0.0, t - static_cast<double>(period) * mod.switching_period());
    const bool on = phase < on_time(cmd, mod);
    if (cmd.polarity == Polarity::positive) {
        g.m5 = true;
        g.m1 = g.m4 = on;
    } else {
        g.m6 = true;
        g.m2 = g.m3 = on;
    }
    return g;
}

inline GateState gates(double t, const ModulationSpec& mod) {
    return gates(t, duty_command(t, mod), mod);
}

}  // namespace flyinv
