#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "flyinv/sweep.hpp"

using namespace flyinv;

namespace {

SimConfig quick_base() {
    auto c = baseline_preset();
    c.n_cycles_total = 3;
    c.n_cycles_settle = 2;
    return c;
}

}  // namespace

TEST(Sweep, RowsInPlanOrderWithTwoAxes) {
    SweepPlan plan{quick_base(), {"circuit.switches.r_on_primary", {0.008, 0.5}},
                   SweepAxis{"modulation.duty_max", {0.2, 0.3}}};
    const auto r = run_sweep(plan, 2);
    ASSERT_EQ(r.rows.size(), 4u);
    EXPECT_EQ(r.parameter_names, (std::vector<std::string>{"circuit.switches.r_on_primary",
                                                           "modulation.duty_max"}));
    EXPECT_EQ(r.rows[1].values, (std::vector<double>{0.008, 0.3}));
    EXPECT_EQ(r.rows[2].values, (std::vector<double>{0.5, 0.2}));
    for (const auto& row : r.rows) EXPECT_TRUE(row.ok()) << row.error;
    // More duty, more power; more resistance, less efficiency.
    EXPECT_GT(r.rows[1].metrics->p_out_avg, r.rows[0].metrics->p_out_avg);
    EXPECT_GT(r.rows[1].metrics->efficiency, r.rows[3].metrics->efficiency);
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
    SweepPlan plan{quick_base(), {"modulation.duty_max", {0.1, 0.2, 0.3}}, std::nullopt};
    const auto a = run_sweep(plan, 1), b = run_sweep(plan, 3);
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        EXPECT_EQ(a.rows[i].metrics->efficiency, b.rows[i].metrics->efficiency);
}

TEST(Sweep, FailingPointIsRecordedNotThrown) {
    SweepPlan plan{quick_base(), {"modulation.duty_max", {0.2, 1.5}}, std::nullopt};
    const auto r = run_sweep(plan, 1);
    EXPECT_TRUE(r.rows[0].ok());
    EXPECT_FALSE(r.rows[1].ok());
    EXPECT_NE(r.rows[1].error.find("duty_max"), std::string::npos);
    EXPECT_EQ(r.rows[1].error.find(','), std::string::npos);
}

TEST(Sweep, SetpointAxisRescalesLoadAndFilter) {
    const auto base = quick_base();
    const auto c = detail::point_config(base, {"setpoint.v_rms"}, {400.0});
    EXPECT_NEAR(c.circuit.load.r_load, 400.0 * 400.0 / dcm_average_power(base), 1e-9);
    EXPECT_NEAR(std::sqrt(c.circuit.filter.total_inductance() / c.circuit.filter.c_filt),
                c.circuit.load.r_load, 1e-6 * c.circuit.load.r_load);
    EXPECT_THROW(detail::point_config(base, {"setpoint.bogus"}, {1.0}), ConfigParseError);
}

TEST(Sweep, ThreadsFromEnvironment) {
    EXPECT_EQ(sweep_threads(3), 3u);
    ::setenv("FLYINV_THREADS", "2", 1);
    EXPECT_EQ(sweep_threads(0), 2u);
    ::unsetenv("FLYINV_THREADS");
    EXPECT_GE(sweep_threads(0), 1u);
}

TEST(PowerSweep, HitsTargetsAndReportsColumns) {
    const auto r = power_sweep(quick_base(), {50.0, 150.0}, std::nullopt, 1);
    EXPECT_EQ(r.parameter_names,
              (std::vector<std::string>{"p_target", "circuit.load.r_load", "modulation.duty_max"}));
    for (const auto& row : r.rows) {
        ASSERT_TRUE(row.ok()) << row.error;
        EXPECT_NEAR(row.metrics->p_out_avg, row.values[0], power_target_tolerance * row.values[0]);
    }
    EXPECT_GT(r.rows[0].values[1], r.rows[1].values[1]);
}

TEST(PowerSweep, OuterAxisRepeatsTargets) {
    const auto r = power_sweep(quick_base(), {100.0},
                               SweepAxis{"circuit.switches.r_on_primary", {0.008, 0.5}}, 1);
    ASSERT_EQ(r.rows.size(), 2u);
    EXPECT_EQ(r.rows[1].values[0], 0.5);
    EXPECT_GT(r.rows[0].metrics->efficiency, r.rows[1].metrics->efficiency);
}

TEST(PowerSweep, UnreachableTargetIsFlagged) {
    const auto r = power_sweep(quick_base(), {1e6}, std::nullopt, 1);
    EXPECT_FALSE(r.rows[0].ok());
    auto grid = quick_base();
    grid.circuit.load = LoadSpec::grid(230, 50);
    EXPECT_THROW(solve_power_point(grid, 100.0, 230.0), TargetUnreachable);
}

TEST(Sweep, SinglePointEqualsDirectRun) {
    const auto base = quick_base();
    SweepPlan plan{base, {"modulation.duty_max", {0.25}}, std::nullopt};
    const auto r = run_sweep(plan, 1);
    const auto direct = evaluate(with_parameter(base, "modulation.duty_max", 0.25));
    ASSERT_TRUE(r.rows[0].ok());
    EXPECT_EQ(r.rows[0].metrics->efficiency, direct.efficiency);
    EXPECT_EQ(r.rows[0].metrics->thd, direct.thd);
}

TEST(Sweep, AmplitudeSetpointsKeepThdLow) {
    auto base = baseline_preset();
    base.n_cycles_total = 6;
    base.n_cycles_settle = 5;
    SweepPlan plan{base, {"setpoint.v_rms", {400.0, 600.0, 800.0}}, std::nullopt};
    const auto r = run_sweep(plan);
    for (const auto& row : r.rows) {
        ASSERT_TRUE(row.ok()) << row.error;
        EXPECT_LE(row.metrics->thd, 0.05) << "V_rms setpoint " << row.values[0];
        EXPECT_NEAR(row.metrics->v_rms, row.values[0], 0.1 * row.values[0]);
    }
}

TEST(PowerSweep, EmptyTargetsGiveEmptyResult) {
    EXPECT_TRUE(power_sweep(quick_base(), {}, std::nullopt, 1).rows.empty());
}
