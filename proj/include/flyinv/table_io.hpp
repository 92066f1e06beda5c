#pragma once

// Comma-separated tables with a header row, and single-record key/value
// reports. Numbers are written in shortest round-trip form, '.' decimal point,
// so re-running a command reproduces byte-identical files.

#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "flyinv/analysis.hpp"
#include "flyinv/config_io.hpp"
#include "flyinv/errors.hpp"
#include "flyinv/filter_design.hpp"
#include "flyinv/simulator.hpp"
#include "flyinv/sweep.hpp"

namespace flyinv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw MalformedTable(0, header.size(), "missing column '" + std::string(name) + "'");
    }

    bool has_column(std::string_view name) const {
        for (const auto& h : header)
            if (h == name) return true;
        return false;
    }

    /// Numeric column; row numbers in errors count the header as row 1.
    std::vector<double> numbers(std::string_view name) const {
        const auto c = column_index(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto v = parse_number(rows[r][c]);
            if (!v) throw MalformedTable(r + 2, c + 1, "'" + rows[r][c] + "' is not a number");
            out.push_back(*v);
        }
        return out;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.emplace_back(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

}  // namespace detail

inline Table parse_table(std::string_view text) {
    Table t;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (t.header.empty()) {
            for (std::size_t i = 0; i < fields.size(); ++i)
                if (fields[i].empty()) throw MalformedTable(line_no, i + 1, "empty column name");
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size())
            throw MalformedTable(line_no, std::min(fields.size(), t.header.size()) + 1,
                                 "expected " + std::to_string(t.header.size()) + " fields, got " +
                                     std::to_string(fields.size()));
        t.rows.push_back(std::move(fields));
    }
    if (t.header.empty()) throw MalformedTable(1, 1, "table has no header");
    if (t.rows.empty()) throw MalformedTable(2, 1, "table has no data rows");
    return t;
}

inline Table read_table(const std::string& path) { return parse_table(read_text_file(path)); }

// -----------------------------------------------------------------------------
// Writers
// -----------------------------------------------------------------------------

inline constexpr std::string_view trace_header =
    "t,i_mag,v_cap,i_ind,v_load,i_load,p_in,p_out,gates_bitmask";

inline void write_trace(std::ostream& os, const Trace& trace) {
    os << trace_header << '\n';
    std::string line;
    for (const auto& s : trace.samples) {
        line.clear();
        for (double v : {s.t, s.state.i_mag, s.state.v_cap, s.state.i_ind, s.v_load, s.i_load, s.p_in,
                         s.p_out}) {
            line += format_number(v);
            line += ',';
        }
        line += std::to_string(s.gates.bitmask());
        line += '\n';
        os << line;
    }
}

inline void write_spectrum(std::ostream& os, const Spectrum& spec) {
    os << "h,f_hz,v_rms\n";
    for (int h = 0; h <= spec.max_harmonic(); ++h)
        os << h << ',' << format_number(spec.frequency(h)) << ','
           << format_number(spec.magnitudes[static_cast<std::size_t>(h)]) << '\n';
}

inline void write_response(std::ostream& os, const FilterResponse& r) {
    os << "f_hz,gain\n";
    for (std::size_t i = 0; i < r.frequencies.size(); ++i)
        os << format_number(r.frequencies[i]) << ',' << format_number(r.magnitude[i]) << '\n';
}

inline constexpr std::string_view metrics_keys[] = {"thd", "v_rms", "p_out_avg", "p_in_avg",
                                                    "efficiency"};

inline void write_metrics(std::ostream& os, const MetricsReport& m) {
    os << "thd = " << format_number(m.thd) << '\n'
       << "v_rms = " << format_number(m.v_rms) << '\n'
       << "p_out_avg = " << format_number(m.p_out_avg) << '\n'
       << "p_in_avg = " << format_number(m.p_in_avg) << '\n'
       << "efficiency = " << format_number(m.efficiency) << '\n';
}

inline MetricsReport parse_metrics(std::string_view text) {
    const auto kv = parse_key_values(text);
    MetricsReport m;
    auto get = [&](const char* key) {
        const auto it = kv.find(key);
        if (it == kv.end()) throw MalformedTable(0, 0, std::string("metrics report lacks '") + key + "'");
        const auto v = parse_number(it->second);
        if (!v) throw MalformedTable(0, 0, std::string("metrics value '") + key + "' is not a number");
        return *v;
    };
    m.thd = get("thd");
    m.v_rms = get("v_rms");
    m.p_out_avg = get("p_out_avg");
    m.p_in_avg = get("p_in_avg");
    m.efficiency = get("efficiency");
    return m;
}

inline void write_sweep(std::ostream& os, const SweepResult& r) {
    for (const auto& n : r.parameter_names) os << n << ',';
    os << "thd,v_rms,p_out_avg,p_in_avg,efficiency,status\n";
    const std::string nan = "nan";
    for (const auto& row : r.rows) {
        for (double v : row.values) os << (std::isnan(v) ? nan : format_number(v)) << ',';
        if (row.metrics) {
            const auto& m = *row.metrics;
            for (double v : {m.thd, m.v_rms, m.p_out_avg, m.p_in_avg, m.efficiency})
                os << format_number(v) << ',';
        } else {
            os << "nan,nan,nan,nan,nan,";
        }
        os << (row.error.empty() ? std::string("ok") : row.error) << '\n';
    }
}

template <typename Writer, typename Value>
std::string to_text(Writer&& w, const Value& v) {
    std::ostringstream ss;
    w(ss, v);
    return ss.str();
}

}  // namespace flyinv
