#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "flyinv/filter_check.hpp"
#include "flyinv/filter_design.hpp"
#include "flyinv/presets.hpp"

using namespace flyinv;

namespace {

double oracle_gain(double l, double c, double f) {
    const double w = 2.0 * std::numbers::pi * f;
    return std::abs(1.0 / (1.0 - w * w * l * c));
}

}  // namespace

TEST(FilterDesign, ResonantFrequencyOfReferenceFilter) {
    const FilterSpec f{1e-3, 4.7e-6, 0.0};
    EXPECT_NEAR(resonant_frequency(f), 2321.5, 0.1);
}

TEST(FilterDesign, UnityAtDcAndGridInductanceIsLumped) {
    const FilterSpec f{1e-3, 4.7e-6, 0.5e-3};
    EXPECT_DOUBLE_EQ(transfer_magnitude(f, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(transfer_magnitude(f, 1000.0), oracle_gain(1.5e-3, 4.7e-6, 1000.0));
}

TEST(FilterDesign, ResonanceIsSingular) {
    const FilterSpec f{1e-3, 4.7e-6, 0.0};
    EXPECT_THROW(transfer_magnitude(f, resonant_frequency(f)), ResonanceSingularity);
    EXPECT_NO_THROW(transfer_magnitude(f, resonant_frequency(f) * (1 + 1e-6)));
}

TEST(FilterDesign, DesignPlacesResonance) {
    const auto f = design_filter(2000.0, 4.7e-6, 0.0);
    EXPECT_NEAR(f.l_filt, 1.0 / (std::pow(2 * std::numbers::pi * 2000.0, 2) * 4.7e-6), 1e-15);
    EXPECT_NEAR(resonant_frequency(f), 2000.0, 1e-9);
    const auto g = design_filter(2000.0, 4.7e-6, 0.3e-3);
    EXPECT_NEAR(g.l_filt + 0.3e-3, f.l_filt, 1e-15);
}

TEST(FilterDesign, InfeasibleWhenGridInductanceTooLarge) {
    EXPECT_THROW(design_filter(2000.0, 4.7e-6, 1.0), InfeasibleDesign);
    EXPECT_THROW(design_filter(0.0, 4.7e-6, 0.0), InfeasibleDesign);
    EXPECT_THROW(design_filter(2000.0, -1.0, 0.0), InfeasibleDesign);
}

TEST(AttenuationReport, CoversDcToTwiceSwitching) {
    const auto c = baseline_preset();
    const auto r = attenuation_report(c.circuit.filter, c.modulation);
    ASSERT_EQ(r.frequencies.size(), 1001u);
    EXPECT_EQ(r.frequencies.front(), 0.0);
    EXPECT_EQ(r.frequencies.back(), 50000.0);
    EXPECT_LT(r.magnitude[500], 0.01);  // switching frequency rejected
    EXPECT_NEAR(r.magnitude[1], 1.0, 0.01);
}

TEST(AttenuationReport, RejectsPlacementOutsideBand) {
    const auto c = baseline_preset();
    EXPECT_THROW(attenuation_report(design_filter(40.0, 1e-6, 0.0), c.modulation), PlacementError);
    EXPECT_THROW(attenuation_report(design_filter(30e3, 1e-6, 0.0), c.modulation), PlacementError);
    EXPECT_THROW(attenuation_report(design_filter(20e3, 1e-6, 0.0), c.modulation), PlacementError);
}

TEST(AttenuationReport, SkipsHarmonicOnResonance) {
    ModulationSpec m;
    const auto f = design_filter(2000.0, 1e-6, 0.0);
    const auto r = attenuation_report(f, m);
    EXPECT_EQ(r.frequencies.size(), 1000u);
}

TEST(FilterDesignProperty, RandomDesignsRoundTrip) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double fc = 100.0 * std::pow(100.0, u(rng));
        const double c = 1e-7 * std::pow(1000.0, u(rng));
        const auto f = design_filter(fc, c, 0.0);
        EXPECT_NEAR(resonant_frequency(f), fc, 1e-9 * fc);
        const double probe = fc * (0.1 + 0.8 * u(rng));
        EXPECT_NEAR(transfer_magnitude(f, probe), oracle_gain(f.l_filt, c, probe),
                    1e-9 * oracle_gain(f.l_filt, c, probe));
    }
}

TEST(DrivenFilter, MatchesAnalyticBelowAndAboveResonance) {
    const FilterSpec f{1e-3, 4.7e-6, 0.0};
    const double fc = resonant_frequency(f);
    for (double ratio : {0.25, 0.5, 4.0}) {
        const double g = driven_filter_gain(f, fc * ratio);
        const double a = transfer_magnitude(f, fc * ratio);
        EXPECT_NEAR(g, a, 0.05 * a) << "f/fc=" << ratio;
    }
}
