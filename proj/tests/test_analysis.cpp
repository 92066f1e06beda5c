#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "flyinv/analysis.hpp"
#include "flyinv/presets.hpp"

using namespace flyinv;

namespace {

constexpr double f0 = 50.0;
constexpr double dt = 1e-5;  // 2000 samples per period

std::vector<double> sampled(int periods, auto&& f) {
    const int n = static_cast<int>(std::lround(periods / (f0 * dt)));
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = f(k * dt);
    return out;
}

double w(int h) { return 2.0 * std::numbers::pi * h * f0; }

// THD of an ideal square wave from its Fourier series, 4/(pi h) for odd h.
double square_wave_thd_oracle(int cap) {
    double s = 0.0;
    for (int h = 3; h <= cap; h += 2) s += 1.0 / (h * h);
    return std::sqrt(s);
}

}  // namespace

TEST(Spectrum, PureSine) {
    const auto x = sampled(3, [](double t) { return 10.0 * std::sin(w(1) * t + 0.3); });
    const auto s = spectrum(x, dt, f0, 50);
    EXPECT_NEAR(s.magnitudes[1], 10.0 / std::sqrt(2.0), 1e-9);
    EXPECT_LE(thd(s), 1e-9);
    EXPECT_NEAR(s.magnitudes[0], 0.0, 1e-9);
}

TEST(Spectrum, ThirdHarmonicTenPercent) {
    const auto x = sampled(2, [](double t) { return std::sin(w(1) * t) + 0.1 * std::sin(w(3) * t + 1.0); });
    EXPECT_NEAR(thd(spectrum(x, dt, f0, 50)), 0.1, 1e-6);
}

TEST(Spectrum, DcOffsetAndHarmonicPhase) {
    const auto x = sampled(1, [](double t) { return 2.0 + std::cos(w(5) * t); });
    const auto s = spectrum(x, dt, f0, 10);
    EXPECT_NEAR(s.magnitudes[0], 2.0, 1e-12);
    EXPECT_NEAR(s.magnitudes[5], 1.0 / std::sqrt(2.0), 1e-9);
    EXPECT_NEAR(s.magnitudes[4], 0.0, 1e-9);
}

TEST(Spectrum, SquareWaveAgainstSeries) {
    const auto x = sampled(1, [](double t) { return std::sin(w(1) * t + 1e-9) >= 0.0 ? 1.0 : -1.0; });
    const double got = thd(spectrum(x, dt, f0, 49), 49);
    EXPECT_NEAR(got, square_wave_thd_oracle(49), 1e-3);
}

TEST(Spectrum, RejectsNonIntegerSpanAndNyquist) {
    auto x = sampled(1, [](double t) { return std::sin(w(1) * t); });
    x.resize(x.size() - 7);
    EXPECT_THROW(spectrum(x, dt, f0, 10), NonIntegerSpan);
    EXPECT_THROW(spectrum({}, dt, f0, 10), NonIntegerSpan);
    const auto y = sampled(1, [](double) { return 0.0; });
    EXPECT_THROW(spectrum(y, dt, f0, 1000), NonIntegerSpan);
}

TEST(Thd, ZeroFundamentalAndCapBeyondSpectrum) {
    const auto x = sampled(1, [](double t) { return std::sin(w(2) * t); });
    EXPECT_THROW(thd(spectrum(x, dt, f0, 10)), ZeroFundamental);
    const auto y = sampled(1, [](double t) { return std::sin(w(1) * t); });
    EXPECT_THROW(thd(spectrum(y, dt, f0, 10), 50), ZeroFundamental);
}

TEST(Thd, CapLimitsHarmonics) {
    const auto x = sampled(1, [](double t) { return std::sin(w(1) * t) + 0.2 * std::sin(w(7) * t); });
    const auto s = spectrum(x, dt, f0, 10);
    EXPECT_NEAR(thd(s, 6), 0.0, 1e-9);
    EXPECT_NEAR(thd(s, 7), 0.2, 1e-9);
    EXPECT_NEAR(even_harmonic_ratio(s), 0.0, 1e-9);
}

TEST(Basics, RmsAndMean) {
    const std::vector<double> v{3.0, -3.0, 3.0, -3.0};
    EXPECT_DOUBLE_EQ(rms(v), 3.0);
    EXPECT_DOUBLE_EQ(mean(v), 0.0);
    EXPECT_EQ(rms(std::vector<double>{}), 0.0);
}

TEST(Efficiency, BaselineShortRun) {
    auto c = baseline_preset();
    c.n_cycles_total = 4;
    c.n_cycles_settle = 3;
    const auto m = efficiency(simulate(c));
    EXPECT_GT(m.p_in_avg, 0.0);
    EXPECT_GT(m.efficiency, 0.9);
    EXPECT_LT(m.efficiency, 1.0);
    EXPECT_NEAR(m.p_out_avg, m.v_rms * m.v_rms / 529.0, 0.01 * m.p_out_avg);
    EXPECT_LT(m.thd, 0.05);
}

TEST(Efficiency, LosslessCircuitIsUnity) {
    auto c = baseline_preset();
    c.n_cycles_total = 6;
    c.n_cycles_settle = 5;
    c.circuit.switches = {0.0, 0.0};
    const auto m = efficiency(simulate(c));
    EXPECT_NEAR(m.efficiency, 1.0, 1e-3);
}

TEST(Efficiency, RequiresSettledCycles) {
    auto c = baseline_preset();
    c.n_cycles_total = 2;
    c.n_cycles_settle = 1;
    auto tr = simulate(c);
    tr.samples.resize(tr.samples.size() / 2);
    EXPECT_THROW(efficiency(tr), ZeroInputPower);
}
