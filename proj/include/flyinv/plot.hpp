#pragma once

// Minimal self-contained SVG charts rendered from the CSV tables. Output is a
// pure function of the input table.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "flyinv/errors.hpp"
#include "flyinv/table_io.hpp"

namespace flyinv::plot {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Axes {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
};

namespace detail {

inline constexpr double width = 800, height = 480;
inline constexpr double left = 80, right = 150, top = 40, bottom = 60;

inline std::string num(double v, const char* fmt = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline const char* color(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    return palette[i % 6];
}

struct Range {
    double lo, hi;
};

inline Range range_of(const std::vector<Series>& series, bool use_x, bool log) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& s : series)
        for (double v : use_x ? s.x : s.y) {
            if (!std::isfinite(v) || (log && v <= 0.0)) continue;
            lo = std::min(lo, log ? std::log10(v) : v);
            hi = std::max(hi, log ? std::log10(v) : v);
        }
    if (!std::isfinite(lo)) return {0.0, 1.0};
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
        lo -= 0.5;
        hi += 0.5;
    } else if (!log) {
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    return {lo, hi};
}

inline std::vector<double> ticks(Range r) {
    const double span = r.hi - r.lo;
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> out;
    for (double v = std::ceil(r.lo / step) * step; v <= r.hi + 1e-9 * step; v += step)
        out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return out;
}

}  // namespace detail

/// Line chart (or bar chart when `bars`) of one or more series.
inline std::string render(const std::vector<Series>& series, const Axes& axes, bool bars = false) {
    using namespace detail;
    const Range xr = range_of(series, true, axes.log_x);
    Range yr = range_of(series, false, axes.log_y);
    if (bars) yr.lo = std::min(0.0, yr.lo);

    const double pw = width - left - right, ph = height - top - bottom;
    auto tx = [&](double v) {
        const double u = axes.log_x ? std::log10(v) : v;
        return left + (u - xr.lo) / (xr.hi - xr.lo) * pw;
    };
    auto ty = [&](double v) {
        const double u = axes.log_y ? std::log10(v) : v;
        return top + ph - (u - yr.lo) / (yr.hi - yr.lo) * ph;
    };

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
    s += "<title>" + escape(axes.title) + "</title>\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) +
         "\" fill=\"white\"/>\n";
    s += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<text x=\"" + num(width / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(axes.title) + "</text>\n";

    // Grid and tick labels.
    for (double v : ticks(xr)) {
        const double px = left + (v - xr.lo) / (xr.hi - xr.lo) * pw;
        const double shown = axes.log_x ? std::pow(10.0, v) : v;
        s += "<line x1=\"" + num(px, "%.2f") + "\" y1=\"" + num(top) + "\" x2=\"" + num(px, "%.2f") +
             "\" y2=\"" + num(top + ph) + "\" stroke=\"#dddddd\"/>\n";
        s += "<text x=\"" + num(px, "%.2f") + "\" y=\"" + num(top + ph + 18) +
             "\" text-anchor=\"middle\">" + num(shown, "%.4g") + "</text>\n";
    }
    for (double v : ticks(yr)) {
        const double py = top + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph;
        const double shown = axes.log_y ? std::pow(10.0, v) : v;
        s += "<line x1=\"" + num(left) + "\" y1=\"" + num(py, "%.2f") + "\" x2=\"" + num(left + pw) +
             "\" y2=\"" + num(py, "%.2f") + "\" stroke=\"#dddddd\"/>\n";
        s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(py + 4, "%.2f") +
             "\" text-anchor=\"end\">" + num(shown, "%.4g") + "</text>\n";
    }
    s += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" +
         num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(height - 15) +
         "\" text-anchor=\"middle\">" + escape(axes.x_label) + "</text>\n";
    s += "<text x=\"20\" y=\"" + num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
         num(top + ph / 2) + ")\">" + escape(axes.y_label) + "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& sr = series[k];
        if (bars) {
            const double bw = std::max(1.0, 0.6 * pw / std::max<std::size_t>(sr.x.size(), 1));
            for (std::size_t i = 0; i < sr.x.size(); ++i) {
                if (!std::isfinite(sr.y[i])) continue;
                const double y0 = ty(std::max(yr.lo, 0.0)), y1 = ty(sr.y[i]);
                s += "<rect x=\"" + num(tx(sr.x[i]) - bw / 2, "%.2f") + "\" y=\"" +
                     num(std::min(y0, y1), "%.2f") + "\" width=\"" + num(bw, "%.2f") + "\" height=\"" +
                     num(std::abs(y0 - y1), "%.2f") + "\" fill=\"" + color(k) + "\"/>\n";
            }
        } else {
            std::string pts;
            for (std::size_t i = 0; i < sr.x.size(); ++i) {
                if (!std::isfinite(sr.x[i]) || !std::isfinite(sr.y[i])) continue;
                if ((axes.log_x && sr.x[i] <= 0) || (axes.log_y && sr.y[i] <= 0)) continue;
                pts += num(tx(sr.x[i]), "%.2f") + "," + num(ty(sr.y[i]), "%.2f") + " ";
            }
            s += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" + std::string(color(k)) +
                 "\" points=\"" + pts + "\"/>\n";
        }
        if (!sr.label.empty()) {
            const double ly = top + 16 + 18 * static_cast<double>(k);
            s += "<rect x=\"" + num(left + pw + 12) + "\" y=\"" + num(ly - 9) +
                 "\" width=\"14\" height=\"10\" fill=\"" + color(k) + "\"/>\n";
            s += "<text x=\"" + num(left + pw + 32) + "\" y=\"" + num(ly) + "\">" + escape(sr.label) +
                 "</text>\n";
        }
    }
    s += "</g>\n</svg>\n";
    return s;
}

/// Reduces a long series to per-bucket min/max pairs, keeping the envelope.
inline Series decimate(const Series& in, std::size_t buckets = 2000) {
    if (in.x.size() <= 2 * buckets) return in;
    Series out{in.label, {}, {}};
    const std::size_t n = in.x.size();
    for (std::size_t b = 0; b < buckets; ++b) {
        const std::size_t i0 = b * n / buckets, i1 = (b + 1) * n / buckets;
        std::size_t lo = i0, hi = i0;
        for (std::size_t i = i0; i < i1; ++i) {
            if (in.y[i] < in.y[lo]) lo = i;
            if (in.y[i] > in.y[hi]) hi = i;
        }
        for (std::size_t i : {std::min(lo, hi), std::max(lo, hi)}) {
            out.x.push_back(in.x[i]);
            out.y.push_back(in.y[i]);
        }
    }
    return out;
}

inline void require_rows(const Table& t) {
    if (t.header.empty()) throw MalformedTable(1, 1, "table has no header");
    if (t.rows.empty()) throw MalformedTable(2, 1, "table has no data rows");
}

/// Load voltage against time from a trace table.
inline std::string waveform_plot(const Table& trace, const std::string& column = "v_load") {
    require_rows(trace);
    Series s{"", trace.numbers("t"), trace.numbers(column)};
    const bool current = column.rfind("i_", 0) == 0;
    return render({decimate(s)}, {"Output waveform (" + column + ")", "t [s]", current ? "I [A]" : "V [V]"});
}

/// Harmonic magnitudes h >= 1 as bars, in percent of the fundamental.
inline std::string spectrum_plot(const Table& spec) {
    require_rows(spec);
    const auto h = spec.numbers("h");
    const auto v = spec.numbers("v_rms");
    double v1 = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        if (h[i] == 1.0) v1 = v[i];
    if (!(v1 > 0.0)) throw MalformedTable(2, 1, "spectrum table has no positive fundamental");
    Series s{"", {}, {}};
    for (std::size_t i = 0; i < h.size(); ++i)
        if (h[i] >= 1.0) {
            s.x.push_back(h[i]);
            s.y.push_back(100.0 * v[i] / v1);
        }
    return render({s}, {"Harmonic spectrum", "harmonic order", "V_h / V_1 [%]"}, true);
}

/// Efficiency against output power; one curve per value of `group` when that
/// column exists (e.g. circuit.switches.r_on_primary).
inline std::string efficiency_plot(const Table& sweep,
                                   const std::string& group = "circuit.switches.r_on_primary") {
    require_rows(sweep);
    const auto p = sweep.numbers("p_out_avg");
    const auto e = sweep.numbers("efficiency");
    std::map<double, Series> curves;
    if (sweep.has_column(group)) {
        const auto g = sweep.numbers(group);
        for (std::size_t i = 0; i < p.size(); ++i) {
            auto& c = curves[g[i]];
            c.label = "R_on = " + detail::num(g[i], "%g") + " ohm";
            c.x.push_back(p[i]);
            c.y.push_back(e[i]);
        }
    } else {
        curves[0.0] = Series{"", p, e};
    }
    std::vector<Series> out;
    for (auto& [k, c] : curves) out.push_back(std::move(c));
    return render(out, {"Efficiency vs output power", "P_out [W]", "efficiency"});
}

/// Filter gain against frequency, log-log.
inline std::string response_plot(const Table& resp) {
    require_rows(resp);
    Axes a{"CL filter gain |Ug/Uc|", "f [Hz]", "gain", true, true};
    return render({Series{"", resp.numbers("f_hz"), resp.numbers("gain")}}, a);
}

}  // namespace flyinv::plot
