#pragma once

// Undamped CL output filter: |Ug/Uc| = |1 / (1 - w^2 (L + Lg) C)|.
// The grid inductance Lg is lumped in series with L.

#include <cmath>
#include <numbers>
#include <vector>

#include "flyinv/circuit.hpp"
#include "flyinv/errors.hpp"

namespace flyinv {

struct FilterResponse {
    std::vector<double> frequencies;  // Hz
    std::vector<double> magnitude;    // |Ug/Uc|
};

inline double resonant_frequency(const FilterSpec& filt) {
    return 1.0 / (2.0 * std::numbers::pi * std::sqrt(filt.total_inductance() * filt.c_filt));
}

inline double transfer_magnitude(const FilterSpec& filt, double f) {
    const double fc = resonant_frequency(filt);
    if (std::abs(f - fc) <= 1e-12 * fc)
        throw ResonanceSingularity("f = " + std::to_string(f) +
                                   " Hz sits on the undamped resonance; perturb the frequency");
    const double w = 2.0 * std::numbers::pi * f;
    return std::abs(1.0 / (1.0 - w * w * filt.total_inductance() * filt.c_filt));
}

/// Series inductance that places the resonance at fc_target for the given
/// capacitor and grid inductance.
inline FilterSpec design_filter(double fc_target, double c_filt, double l_grid) {
    if (!(fc_target > 0.0) || !(c_filt > 0.0) || !(l_grid >= 0.0))
        throw InfeasibleDesign("design needs fc > 0, C > 0 and Lg >= 0");
    const double w = 2.0 * std::numbers::pi * fc_target;
    const double l_total = 1.0 / (w * w * c_filt);
    const double l_filt = l_total - l_grid;
    if (!(l_filt > 0.0))
        throw InfeasibleDesign("grid inductance " + std::to_string(l_grid) +
                               " H already exceeds the required total " + std::to_string(l_total) +
                               " H");
    return FilterSpec{l_filt, c_filt, l_grid};
}

/// Gain at every harmonic of f_fundamental up to 2 * f_switching, plus DC.
inline FilterResponse attenuation_report(const FilterSpec& filt, const ModulationSpec& mod) {
    const double fc = resonant_frequency(filt);
    if (!(fc > mod.f_fundamental && fc < mod.f_switching))
        throw PlacementError("resonance " + std::to_string(fc) +
                             " Hz must lie strictly between f_fundamental and f_switching");
    // Above f_sw / sqrt(2) the switching frequency is amplified, not rejected.
    if (!(fc < mod.f_switching / std::numbers::sqrt2))
        throw PlacementError("resonance " + std::to_string(fc) +
                             " Hz leaves the switching frequency unattenuated");

    FilterResponse r;
    const auto n = static_cast<long>(std::floor(2.0 * mod.f_switching / mod.f_fundamental + 1e-9));
    r.frequencies.reserve(static_cast<std::size_t>(n) + 1);
    r.magnitude.reserve(static_cast<std::size_t>(n) + 1);
    for (long h = 0; h <= n; ++h) {
        const double f = static_cast<double>(h) * mod.f_fundamental;
        // A harmonic exactly on the resonance has no finite gain; skip it.
        if (std::abs(f - fc) <= 1e-12 * fc) continue;
        r.frequencies.push_back(f);
        r.magnitude.push_back(transfer_magnitude(filt, f));
    }
    return r;
}

}  // namespace flyinv
