// flyinv: command-line front end for the flyback microinverter simulator.
//
// Exit codes: 0 success, 1 invalid configuration, 2 runtime failure
// (divergence, infeasible design, malformed table), 64 usage error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "flyinv/flyinv.hpp"

namespace fs = std::filesystem;
using namespace flyinv;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_invalid = 1;
constexpr int exit_runtime = 2;
constexpr int exit_usage = 64;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::vector<std::string> overrides;
    int thd_cap = default_thd_cap;
    bool current_thd = false;
};

void add_config_options(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "Configuration file (key = value)");
    cmd->add_option("--preset", o.preset, "Built-in preset (baseline)");
    cmd->add_option("--set", o.overrides, "Override dotted.path=value (repeatable)");
}

/// Config from --config or --preset (default baseline), overrides applied
/// before validation.
SimConfig resolve_config(const CommonOptions& o) {
    if (!o.config_path.empty() && !o.preset.empty())
        throw UsageError("--config and --preset are mutually exclusive");
    std::string text;
    if (!o.config_path.empty()) {
        // "--config baseline" names the preset when no such file exists.
        if (!fs::exists(o.config_path) && o.config_path == "baseline")
            text = std::string(baseline_preset_text);
        else
            text = read_text_file(o.config_path);
    } else {
        const std::string name = o.preset.empty() ? "baseline" : o.preset;
        if (name != "baseline") throw UsageError("unknown preset '" + name + "'");
        text = std::string(baseline_preset_text);
    }
    return validate(parse_config(text, o.overrides));
}

fs::path prepare_out(const std::string& dir) {
    if (dir.empty()) throw UsageError("--out <dir> is required");
    fs::create_directories(dir);
    return fs::path(dir);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto v = parse_number(item);
        if (!v) throw UsageError(what + ": '" + item + "' is not a number");
        out.push_back(*v);
    }
    return out;
}

SweepAxis parse_axis(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--axis expects path=v1,v2,...");
    return SweepAxis{spec.substr(0, eq), parse_list(spec.substr(eq + 1), "--axis")};
}

void print_metrics(std::ostream& os, const MetricsReport& m) { write_metrics(os, m); }

// -----------------------------------------------------------------------------

int cmd_simulate(const CommonOptions& o) {
    const auto config = resolve_config(o);
    const auto out = prepare_out(o.out_dir);
    const auto trace = simulate(config);
    const auto signal = o.current_thd ? ThdSignal::load_current : ThdSignal::load_voltage;
    const auto metrics = efficiency(trace, o.thd_cap, signal);
    const auto spec = trace_spectrum(trace, signal, o.thd_cap);

    {
        std::ofstream f(out / "trace.csv", std::ios::binary);
        write_trace(f, trace);
    }
    const auto spectrum_text = to_text(write_spectrum, spec);
    write_file(out / "spectrum.csv", spectrum_text);
    write_file(out / "metrics.txt", to_text(write_metrics, metrics));
    write_file(out / "config.cfg", to_config_text(config));

    const auto trace_table = read_table((out / "trace.csv").string());
    write_file(out / "waveform.svg", plot::waveform_plot(trace_table, o.current_thd ? "i_load" : "v_load"));
    write_file(out / "spectrum.svg", plot::spectrum_plot(parse_table(spectrum_text)));
    print_metrics(std::cout, metrics);
    return exit_ok;
}

int cmd_design(const CommonOptions& o, double fc, double c, double lg) {
    const auto filt = design_filter(fc, c, lg);
    const auto config = resolve_config(o);
    const auto resp = attenuation_report(filt, config.modulation);
    std::cout << "l_filt = " << format_number(filt.l_filt) << '\n'
              << "c_filt = " << format_number(filt.c_filt) << '\n'
              << "l_grid = " << format_number(filt.l_grid) << '\n'
              << "f_c = " << format_number(resonant_frequency(filt)) << '\n'
              << "gain_f_fundamental = "
              << format_number(transfer_magnitude(filt, config.modulation.f_fundamental)) << '\n'
              << "gain_f_switching = "
              << format_number(transfer_magnitude(filt, config.modulation.f_switching)) << '\n';
    const auto table = to_text(write_response, resp);
    if (!o.out_dir.empty()) {
        const auto out = prepare_out(o.out_dir);
        write_file(out / "response.csv", table);
        write_file(out / "response.svg", plot::response_plot(parse_table(table)));
    } else {
        std::cout << table;
    }
    return exit_ok;
}

/// Metrics from a trace table. Averages use the sample columns over the
/// settled whole cycles given by the config.
int cmd_analyze(const CommonOptions& o, const std::string& trace_path) {
    const auto config = resolve_config(o);
    const auto out = prepare_out(o.out_dir);
    const auto table = read_table(trace_path);
    const auto t = table.numbers("t");
    const auto v = table.numbers(o.current_thd ? "i_load" : "v_load");
    const auto p_in = table.numbers("p_in");
    const auto p_out = table.numbers("p_out");
    if (t.size() < 2) throw MalformedTable(2, 1, "trace needs at least two samples");

    const double dt = t[1] - t[0];
    const double f0 = config.modulation.f_fundamental;
    const auto per_cycle = static_cast<std::size_t>(std::llround(1.0 / (f0 * dt)));
    const auto cycles = (t.size() - 1) / per_cycle;
    const auto settle = std::min<std::size_t>(static_cast<std::size_t>(config.n_cycles_settle),
                                              cycles > 0 ? cycles - 1 : 0);
    if (cycles == 0) throw MalformedTable(2, 1, "trace shorter than one fundamental cycle");
    const auto first = settle * per_cycle, last = cycles * per_cycle;

    const std::span<const double> window(v.data() + first, last - first);
    const auto spec = spectrum(window, dt, f0, o.thd_cap);
    MetricsReport m;
    m.thd = thd(spec, o.thd_cap);
    m.v_rms = rms(std::span<const double>(table.numbers("v_load")).subspan(first, last - first));
    m.p_in_avg = mean(std::span<const double>(p_in).subspan(first, last - first));
    m.p_out_avg = mean(std::span<const double>(p_out).subspan(first, last - first));
    if (m.p_in_avg == 0.0) throw ZeroInputPower("average input power is zero");
    m.efficiency = m.p_out_avg / m.p_in_avg;

    const auto spectrum_text = to_text(write_spectrum, spec);
    write_file(out / "spectrum.csv", spectrum_text);
    write_file(out / "metrics.txt", to_text(write_metrics, m));
    write_file(out / "spectrum.svg", plot::spectrum_plot(parse_table(spectrum_text)));
    print_metrics(std::cout, m);
    return exit_ok;
}

int cmd_sweep(const CommonOptions& o, const std::vector<std::string>& axes, const std::string& powers,
              unsigned threads) {
    const auto config = resolve_config(o);
    const auto out = prepare_out(o.out_dir);
    SweepResult result;
    if (!powers.empty()) {
        if (axes.size() > 1) throw UsageError("a power sweep takes at most one --axis");
        std::optional<SweepAxis> outer;
        if (!axes.empty()) outer = parse_axis(axes[0]);
        result = power_sweep(config, parse_list(powers, "--powers"), outer, threads, o.thd_cap);
    } else {
        if (axes.empty() || axes.size() > 2) throw UsageError("sweep needs one or two --axis");
        SweepPlan plan{config, parse_axis(axes[0]), std::nullopt};
        if (axes.size() == 2) plan.axis2 = parse_axis(axes[1]);
        result = run_sweep(plan, threads, o.thd_cap);
    }
    const auto text = to_text(write_sweep, result);
    write_file(out / "sweep.csv", text);

    const auto table = parse_table(text);
    if (!powers.empty()) {
        const std::string group = axes.empty() ? std::string("") : parse_axis(axes[0]).path;
        write_file(out / "efficiency.svg", plot::efficiency_plot(table, group));
    } else {
        const auto& name = result.parameter_names.front();
        plot::Series s{"THD", table.numbers(name), table.numbers("thd")};
        write_file(out / "sweep.svg", plot::render({s}, {"THD across " + name, name, "THD"}));
    }
    std::cout << text;
    std::size_t failed = 0;
    for (const auto& r : result.rows) failed += r.ok() ? 0 : 1;
    const auto secs = std::chrono::duration<double>(result.finished - result.started).count();
    std::cerr << result.rows.size() << " points, " << failed << " failed, " << secs << " s\n";
    return exit_ok;
}

int cmd_report(const std::string& path) {
    if (fs::path(path).extension() == ".svg") {
        const auto text = read_text_file(path);
        const auto open = text.find("<svg");
        const auto close = text.rfind("</svg>");
        if (open == std::string::npos || close == std::string::npos || close < open)
            throw MalformedTable(1, 1, "not an SVG document");
        std::string title;
        if (const auto a = text.find("<title>"); a != std::string::npos)
            title = text.substr(a + 7, text.find("</title>") - a - 7);
        std::cout << "kind = svg\ntitle = " << title << "\nbytes = " << text.size() << '\n';
        return exit_ok;
    }
    const auto text = read_text_file(path);
    const auto first_line = text.substr(0, text.find('\n'));
    if (first_line.find('=') != std::string::npos || first_line.rfind('#', 0) == 0) {
        const auto kv = parse_key_values(text);
        if (kv.count("efficiency") && kv.count("thd")) {
            std::cout << "kind = metrics\n";
            write_metrics(std::cout, parse_metrics(text));
        } else {
            const auto c = validate(config_from_key_values(kv));
            std::cout << "kind = config\nvalid = true\nsteps = " << c.total_steps() << '\n';
        }
        return exit_ok;
    }
    const auto table = parse_table(text);
    std::cout << "rows = " << table.rows.size() << '\n';
    if (first_line == trace_header) {
        const auto t = table.numbers("t");
        const auto v = table.numbers("v_load");
        std::cout << "kind = trace\nt_end = " << format_number(t.back())
                  << "\nv_load_rms = " << format_number(rms(v))
                  << "\np_in_mean = " << format_number(mean(table.numbers("p_in")))
                  << "\np_out_mean = " << format_number(mean(table.numbers("p_out"))) << '\n';
    } else if (first_line == "h,f_hz,v_rms") {
        const auto h = table.numbers("h");
        const auto vh = table.numbers("v_rms");
        Spectrum s;
        s.f0 = h.size() > 1 ? table.numbers("f_hz")[1] : 0.0;
        s.magnitudes = vh;
        std::cout << "kind = spectrum\nmax_harmonic = " << s.max_harmonic()
                  << "\nthd = " << format_number(thd(s, s.max_harmonic())) << '\n';
    } else if (first_line == "f_hz,gain") {
        const auto g = table.numbers("gain");
        std::cout << "kind = filter_response\ngain_min = "
                  << format_number(*std::min_element(g.begin(), g.end()))
                  << "\ngain_max = " << format_number(*std::max_element(g.begin(), g.end())) << '\n';
    } else if (table.has_column("efficiency") && table.has_column("status")) {
        const auto st = table.column_index("status");
        std::size_t ok = 0;
        for (const auto& r : table.rows) ok += r[st] == "ok";
        (void)table.numbers("efficiency");
        std::cout << "kind = sweep\nok_rows = " << ok << '\n';
    } else {
        throw MalformedTable(1, 1, "unrecognised table header '" + first_line + "'");
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flyinv - two-switch flyback microinverter simulator"};
    app.require_subcommand(1);

    CommonOptions sim_o, design_o, analyze_o, sweep_o;
    double fc = 0.0, c = 0.0, lg = 0.0;
    std::string trace_path, report_path, powers;
    std::vector<std::string> axes;
    unsigned threads = 0;

    auto* sim = app.add_subcommand("simulate", "Run one simulation and write trace, spectrum, metrics, plots");
    add_config_options(sim, sim_o);
    sim->add_option("--out", sim_o.out_dir, "Output directory")->required();
    sim->add_option("--thd-cap", sim_o.thd_cap, "Highest harmonic in THD")->check(CLI::PositiveNumber);
    sim->add_flag("--current-thd", sim_o.current_thd, "THD of the load current instead of voltage");

    auto* design = app.add_subcommand("design-filter", "Size the CL filter inductor for a resonance");
    add_config_options(design, design_o);
    design->add_option("--fc", fc, "Target resonant frequency [Hz]")->required();
    design->add_option("--c", c, "Filter capacitance [F]")->required();
    design->add_option("--lg", lg, "Grid inductance [H]");
    design->add_option("--out", design_o.out_dir, "Output directory for response table and plot");

    auto* analyze = app.add_subcommand("analyze", "Spectrum and metrics of an exported trace");
    add_config_options(analyze, analyze_o);
    analyze->add_option("--trace", trace_path, "Trace table (trace.csv)")->required();
    analyze->add_option("--out", analyze_o.out_dir, "Output directory")->required();
    analyze->add_option("--thd-cap", analyze_o.thd_cap, "Highest harmonic in THD")->check(CLI::PositiveNumber);
    analyze->add_flag("--current-thd", analyze_o.current_thd, "THD of the load current");

    auto* sweep = app.add_subcommand("sweep", "Parameter or output-power sweep");
    add_config_options(sweep, sweep_o);
    sweep->add_option("--out", sweep_o.out_dir, "Output directory")->required();
    sweep->add_option("--axis", axes, "dotted.path=v1,v2,... (repeat for a second axis)");
    sweep->add_option("--powers", powers, "Output power targets p1,p2,... [W]");
    sweep->add_option("--threads", threads, "Worker threads (0 = FLYINV_THREADS or auto)");
    sweep->add_option("--thd-cap", sweep_o.thd_cap, "Highest harmonic in THD")->check(CLI::PositiveNumber);

    auto* report = app.add_subcommand("report", "Summarise any file written by flyinv");
    report->add_option("file", report_path, "File to read")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return exit_usage;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_o);
        if (design->parsed()) return cmd_design(design_o, fc, c, lg);
        if (analyze->parsed()) return cmd_analyze(analyze_o, trace_path);
        if (sweep->parsed()) return cmd_sweep(sweep_o, axes, powers, threads);
        if (report->parsed()) return cmd_report(report_path);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return exit_usage;
    } catch (const ValidationError& e) {
        std::cerr << e.what() << '\n';
        return exit_invalid;
    } catch (const ConfigParseError& e) {
        std::cerr << e.what() << '\n';
        return exit_invalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_usage;
}
