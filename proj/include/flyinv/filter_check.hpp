#pragma once

// Time-domain gain of the CL filter alone: the converter is replaced by an
// ideal sinusoidal current source into the capacitor node and the load is a
// small resistor. The gain reported is V_load / (I_source * R_load), which for
// R_load << sqrt(L / C) approaches the undamped |1 / (1 - w^2 L C)|.

#include <cmath>
#include <numbers>
#include <vector>

#include "flyinv/analysis.hpp"
#include "flyinv/simulator.hpp"

namespace flyinv {

struct DrivenFilterOptions {
    double r_load = 0.0;          // ohm; 0 selects sqrt(L / C) / 100
    int steps_per_period = 400;
    int measure_periods = 4;
    double settle_time_constants = 15.0;  // multiples of 2 L / R
};

inline double driven_filter_gain(const FilterSpec& filt, double f, DrivenFilterOptions opt = {}) {
    const double l = filt.total_inductance();
    const double r = opt.r_load > 0.0 ? opt.r_load : std::sqrt(l / filt.c_filt) / 100.0;
    const double dt = 1.0 / (f * opt.steps_per_period);
    const double amp = 1.0;
    const double w = 2.0 * std::numbers::pi * f;

    const double tau = 2.0 * l / r;
    const auto settle_periods = static_cast<long>(std::ceil(opt.settle_time_constants * tau * f));
    const long settle_steps = settle_periods * opt.steps_per_period;
    const long measure_steps = static_cast<long>(opt.measure_periods) * opt.steps_per_period;

    auto rates = [&](double v, double i, double t) {
        return filter_rates(v, i, amp * std::sin(w * t), i * r, filt);
    };

    double v = 0.0, i = 0.0;
    std::vector<double> v_load;
    v_load.reserve(static_cast<std::size_t>(measure_steps));
    for (long k = 0; k < settle_steps + measure_steps; ++k) {
        if (k >= settle_steps) v_load.push_back(i * r);
        const double t = static_cast<double>(k) * dt;
        const auto k1 = rates(v, i, t);
        const auto k2 = rates(v + 0.5 * dt * k1.d_v_cap, i + 0.5 * dt * k1.d_i_ind, t + 0.5 * dt);
        const auto k3 = rates(v + 0.5 * dt * k2.d_v_cap, i + 0.5 * dt * k2.d_i_ind, t + 0.5 * dt);
        const auto k4 = rates(v + dt * k3.d_v_cap, i + dt * k3.d_i_ind, t + dt);
        v += dt / 6.0 * (k1.d_v_cap + 2.0 * k2.d_v_cap + 2.0 * k3.d_v_cap + k4.d_v_cap);
        i += dt / 6.0 * (k1.d_i_ind + 2.0 * k2.d_i_ind + 2.0 * k3.d_i_ind + k4.d_i_ind);
    }
    const auto spec = spectrum(v_load, dt, f, 1);
    return spec.magnitudes[1] * std::numbers::sqrt2 / (amp * r);
}

}  // namespace flyinv
