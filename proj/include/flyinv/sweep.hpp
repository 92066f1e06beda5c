#pragma once

// Parameter studies: Cartesian sweeps over dotted config paths, and the
// efficiency-vs-output-power sweep. Points are independent and may run on
// several threads; rows always come back in plan order.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "flyinv/analysis.hpp"
#include "flyinv/config_io.hpp"
#include "flyinv/presets.hpp"
#include "flyinv/simulator.hpp"

namespace flyinv {

struct SweepAxis {
    std::string path;  // config key, or setpoint.v_rms / setpoint.p_out
    std::vector<double> values;
};

struct SweepPlan {
    SimConfig base;
    SweepAxis axis1;
    std::optional<SweepAxis> axis2;
};

struct SweepRow {
    std::vector<double> values;  // one per SweepResult::parameter_names
    std::optional<MetricsReport> metrics;
    std::string error;  // empty when the point succeeded

    bool ok() const noexcept { return metrics.has_value() && error.empty(); }
};

struct SweepResult {
    std::vector<std::string> parameter_names;
    std::vector<SweepRow> rows;
    SweepPlan plan;
    std::chrono::system_clock::time_point started;
    std::chrono::system_clock::time_point finished;
};

/// Worker count: `requested` if > 0, else FLYINV_THREADS if set and > 0,
/// else the hardware concurrency.
inline unsigned sweep_threads(unsigned requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FLYINV_THREADS")) {
        const auto v = parse_number(env);
        if (v && *v >= 1.0) return static_cast<unsigned>(*v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

/// Runs job(i) for i in [0, n) on up to `threads` workers.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& job) {
    const auto workers = std::min<std::size_t>(threads, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) job(i);
        });
    for (auto& t : pool) t.join();
}

inline bool is_setpoint_path(const std::string& p) { return p.rfind("setpoint.", 0) == 0; }

/// Applies one Cartesian point to the base config.
inline SimConfig point_config(const SimConfig& base, const std::vector<std::string>& paths,
                              const std::vector<double>& values) {
    SimConfig c = base;
    std::optional<double> v_rms, p_out;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        if (paths[i] == "setpoint.v_rms") v_rms = values[i];
        else if (paths[i] == "setpoint.p_out") p_out = values[i];
        else if (is_setpoint_path(paths[i]))
            throw ConfigParseError("unknown setpoint parameter '" + paths[i] + "'");
        else c = with_parameter(c, paths[i], values[i]);
    }
    if (v_rms || p_out)
        c = apply_setpoint(c, v_rms.value_or(commanded_output_rms(base)),
                           p_out.value_or(dcm_average_power(base)));
    return validate(c);
}

inline std::string describe(const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::replace(msg.begin(), msg.end(), ',', ';');
    return msg;
}

}  // namespace detail

inline MetricsReport evaluate(const SimConfig& config, int thd_cap = default_thd_cap) {
    return efficiency(simulate(config), thd_cap);
}

/// One row per Cartesian point (axis1 outer, axis2 inner). Failing points are
/// recorded in their row; the sweep itself never aborts.
inline SweepResult run_sweep(const SweepPlan& plan, unsigned threads = 0, int thd_cap = default_thd_cap) {
    SweepResult result;
    result.plan = plan;
    result.started = std::chrono::system_clock::now();

    std::vector<std::string> paths{plan.axis1.path};
    if (plan.axis2) paths.push_back(plan.axis2->path);
    result.parameter_names = paths;

    for (double a : plan.axis1.values) {
        if (plan.axis2) {
            for (double b : plan.axis2->values) result.rows.push_back({{a, b}, std::nullopt, {}});
        } else {
            result.rows.push_back({{a}, std::nullopt, {}});
        }
    }

    detail::parallel_for(result.rows.size(), sweep_threads(threads), [&](std::size_t i) {
        auto& row = result.rows[i];
        try {
            row.metrics = evaluate(detail::point_config(plan.base, paths, row.values), thd_cap);
        } catch (const std::exception& e) {
            row.error = detail::describe(e);
        }
    });
    result.finished = std::chrono::system_clock::now();
    return result;
}

struct PowerPoint {
    SimConfig config;
    MetricsReport metrics;
    int iterations = 0;
    bool on_target = false;  // achieved power within power_target_tolerance
};

/// Relative tolerance on achieved output power against the target.
inline constexpr double power_target_tolerance = 0.15;

/// Simulates one power target: r_load = V_cmd^2 / P with V_cmd the base
/// command's output RMS, duty_max from the lossless DCM relation, then
/// rescaled by sqrt(P / P_achieved) to absorb conduction losses. Each
/// simulation is open loop; the rescaling only picks the command.
inline PowerPoint solve_power_point(const SimConfig& base, double p_target, double v_cmd,
                                    int thd_cap = default_thd_cap, int max_iterations = 4) {
    if (base.circuit.load.kind != LoadKind::resistive)
        throw TargetUnreachable("power sweep needs a resistive load");
    if (!(p_target > 0.0)) throw TargetUnreachable("target power must be > 0");

    SimConfig c = base;
    c.circuit.load = LoadSpec::resistive(v_cmd * v_cmd / p_target);
    c.modulation.duty_max = dcm_duty_for_power(c, p_target);
    try {
        c = validate(c);
    } catch (const ValidationError& e) {
        throw TargetUnreachable(std::string("target ") + format_number(p_target) +
                                " W needs an invalid operating point: " + e.what());
    }

    PowerPoint pt;
    for (pt.iterations = 1;; ++pt.iterations) {
        pt.config = c;
        pt.metrics = evaluate(c, thd_cap);
        const double err = pt.metrics.p_out_avg / p_target - 1.0;
        if (std::abs(err) <= 0.01 || pt.iterations >= max_iterations || !(pt.metrics.p_out_avg > 0.0))
            break;
        const double d = c.modulation.duty_max * std::sqrt(p_target / pt.metrics.p_out_avg);
        if (d > 1.0) break;
        c.modulation.duty_max = d;
    }
    pt.on_target = std::abs(pt.metrics.p_out_avg / p_target - 1.0) <= power_target_tolerance;
    return pt;
}

/// Efficiency against output power. With an outer axis (e.g. r_on_primary) the
/// power targets repeat for every outer value.
inline SweepResult power_sweep(const SimConfig& base, const std::vector<double>& p_targets,
                               const std::optional<SweepAxis>& outer = std::nullopt,
                               unsigned threads = 0, int thd_cap = default_thd_cap) {
    SweepResult result;
    result.started = std::chrono::system_clock::now();
    result.plan.base = base;
    result.plan.axis1 = SweepAxis{"p_target", p_targets};
    if (outer) {
        result.plan.axis1 = *outer;
        result.plan.axis2 = SweepAxis{"p_target", p_targets};
        result.parameter_names.push_back(outer->path);
    }
    result.parameter_names.insert(result.parameter_names.end(),
                                  {"p_target", "circuit.load.r_load", "modulation.duty_max"});

    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::vector<double> outer_values = outer ? outer->values : std::vector<double>{nan};
    for (double o : outer_values)
        for (double p : p_targets) {
            SweepRow row;
            if (outer) row.values.push_back(o);
            row.values.insert(row.values.end(), {p, nan, nan});
            result.rows.push_back(std::move(row));
        }

    const std::size_t per_outer = p_targets.size();
    detail::parallel_for(result.rows.size(), sweep_threads(threads), [&](std::size_t i) {
        auto& row = result.rows[i];
        const std::size_t off = outer ? 1 : 0;
        try {
            SimConfig c = base;
            if (outer) c = with_parameter(c, outer->path, outer_values[i / per_outer]);
            const auto pt = solve_power_point(c, row.values[off], commanded_output_rms(base), thd_cap);
            row.values[off + 1] = pt.config.circuit.load.r_load;
            row.values[off + 2] = pt.config.modulation.duty_max;
            row.metrics = pt.metrics;
            if (!pt.on_target)
                row.error = "target unreachable: achieved " + format_number(pt.metrics.p_out_avg) + " W";
        } catch (const std::exception& e) {
            row.error = detail::describe(e);
        }
    });
    result.finished = std::chrono::system_clock::now();
    return result;
}

}  // namespace flyinv
