#pragma once

// Harmonic spectrum, THD, RMS and efficiency over whole fundamental cycles.
//
// Harmonics are obtained by projecting the waveform onto sin/cos at exact
// multiples of f0. The window is always an integer number of periods, so the
// projection is leakage free without any window function.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "flyinv/errors.hpp"
#include "flyinv/simulator.hpp"

namespace flyinv {

struct Spectrum {
    double f0 = 0.0;
    std::vector<double> magnitudes;  // RMS amplitude per harmonic order, [0] = mean

    int max_harmonic() const noexcept { return static_cast<int>(magnitudes.size()) - 1; }
    double frequency(int h) const noexcept { return h * f0; }
};

struct MetricsReport {
    double thd = 0.0;
    double v_rms = 0.0;
    double p_out_avg = 0.0;
    double p_in_avg = 0.0;
    double efficiency = 0.0;
};

/// Default THD harmonic cap (harmonics 2..50).
inline constexpr int default_thd_cap = 50;

/// Spectrum of a periodic waveform sampled every dt. The samples must span an
/// integer number of periods 1/f0 (last sample excluded, i.e. size * dt * f0
/// is an integer).
inline Spectrum spectrum(std::span<const double> samples, double dt, double f0, int harmonics) {
    if (samples.empty() || !(dt > 0.0) || !(f0 > 0.0))
        throw NonIntegerSpan("spectrum needs samples, dt > 0 and f0 > 0");
    const double span_periods = static_cast<double>(samples.size()) * dt * f0;
    const auto n_periods = std::llround(span_periods);
    if (n_periods < 1 || std::abs(span_periods - static_cast<double>(n_periods)) > 1e-6)
        throw NonIntegerSpan("sample span covers " + std::to_string(span_periods) +
                             " periods, expected an integer >= 1");
    if (harmonics < 0 || harmonics * f0 >= 0.5 / dt)
        throw NonIntegerSpan("harmonic count exceeds the Nyquist limit");

    const auto m = static_cast<std::int64_t>(samples.size());
    Spectrum out;
    out.f0 = f0;
    out.magnitudes.assign(static_cast<std::size_t>(harmonics) + 1, 0.0);

    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(m);
    out.magnitudes[0] = std::abs(mean);

    // Angle of sample k for harmonic h is 2*pi*h*n_periods*k/m; reduce the
    // integer product modulo m so long records keep full phase precision.
    const double w = 2.0 * std::numbers::pi / static_cast<double>(m);
    for (int h = 1; h <= harmonics; ++h) {
        const auto step = (static_cast<std::int64_t>(h) * n_periods) % m;
        double a = 0.0, b = 0.0;
        std::int64_t idx = 0;
        for (std::int64_t k = 0; k < m; ++k) {
            const double ang = w * static_cast<double>(idx);
            a += samples[static_cast<std::size_t>(k)] * std::cos(ang);
            b += samples[static_cast<std::size_t>(k)] * std::sin(ang);
            idx += step;
            if (idx >= m) idx -= m;
        }
        a *= 2.0 / static_cast<double>(m);
        b *= 2.0 / static_cast<double>(m);
        out.magnitudes[static_cast<std::size_t>(h)] = std::sqrt(0.5 * (a * a + b * b));
    }
    return out;
}

/// sqrt(sum_{h=2..cap} V_h^2) / V_1
inline double thd(const Spectrum& spec, int cap = default_thd_cap) {
    if (spec.max_harmonic() < 1 || spec.magnitudes[1] <= 0.0)
        throw ZeroFundamental("fundamental magnitude is zero");
    if (cap > spec.max_harmonic())
        throw ZeroFundamental("THD cap " + std::to_string(cap) + " exceeds computed harmonics " +
                              std::to_string(spec.max_harmonic()));
    double sum = 0.0;
    for (int h = 2; h <= cap; ++h) sum += spec.magnitudes[static_cast<std::size_t>(h)] *
                                          spec.magnitudes[static_cast<std::size_t>(h)];
    return std::sqrt(sum) / spec.magnitudes[1];
}

/// Even-order harmonic content relative to the fundamental.
inline double even_harmonic_ratio(const Spectrum& spec, int cap = default_thd_cap) {
    if (spec.max_harmonic() < 1 || spec.magnitudes[1] <= 0.0)
        throw ZeroFundamental("fundamental magnitude is zero");
    double sum = 0.0;
    for (int h = 2; h <= std::min(cap, spec.max_harmonic()); h += 2)
        sum += spec.magnitudes[static_cast<std::size_t>(h)] * spec.magnitudes[static_cast<std::size_t>(h)];
    return std::sqrt(sum) / spec.magnitudes[1];
}

inline double rms(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s / static_cast<double>(x.size()));
}

inline double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

enum class ThdSignal { load_voltage, load_current };

/// Settled-window samples of one trace column.
inline std::vector<double> settled_column(const Trace& trace, double TraceSample::*field) {
    const auto [first, last] = trace.settled_window();
    std::vector<double> out;
    out.reserve(last - first);
    for (auto k = first; k < last; ++k) out.push_back(trace.samples[k].*field);
    return out;
}

inline Spectrum trace_spectrum(const Trace& trace, ThdSignal signal = ThdSignal::load_voltage,
                               int harmonics = default_thd_cap) {
    const auto x = settled_column(
        trace, signal == ThdSignal::load_voltage ? &TraceSample::v_load : &TraceSample::i_load);
    return spectrum(x, trace.dt, trace.meta.modulation.f_fundamental, harmonics);
}

/// Power averages and THD over the settled whole cycles of a trace.
///
/// Average powers come from the energy accumulators at the window edges, which
/// integrate through the sub-step PWM and zero-crossing events exactly as the
/// integrator saw them.
inline MetricsReport efficiency(const Trace& trace, int thd_cap = default_thd_cap,
                                ThdSignal signal = ThdSignal::load_voltage) {
    const auto& cfg = trace.meta;
    if (cfg.n_cycles_total < cfg.n_cycles_settle + 1 ||
        trace.samples.size() < static_cast<std::size_t>(cfg.total_steps()) + 1)
        throw ZeroInputPower("trace does not cover the settled cycles");

    const auto [first, last] = trace.settled_window();
    const double span = static_cast<double>(last - first) * trace.dt;
    const auto& a = trace.samples[first].state;
    const auto& b = trace.samples[last].state;

    MetricsReport r;
    r.p_in_avg = (b.e_in - a.e_in) / span;
    r.p_out_avg = (b.e_out - a.e_out) / span;
    if (r.p_in_avg == 0.0) throw ZeroInputPower("average input power is zero");
    r.efficiency = r.p_out_avg / r.p_in_avg;

    const auto v = settled_column(trace, &TraceSample::v_load);
    r.v_rms = rms(v);
    const auto spec = trace_spectrum(trace, signal, std::max(thd_cap, 1));
    r.thd = spec.magnitudes[1] > 0.0 ? thd(spec, thd_cap) : 0.0;
    return r;
}

}  // namespace flyinv
