#pragma once

#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hawkes/common.hpp"
#include "hawkes/experiments.hpp"
#include "hawkes/gof.hpp"
#include "hawkes/simulation.hpp"
#include "hawkes/version.hpp"
#include "hawkes/whittle.hpp"

namespace hawkes {

// ---------------------------------------------------------------------------
// Count CSV ingestion. Accepted layouts, after skipping blank and '#' lines:
//   label,count        header optional; labels all integer or all ISO dates
//   count              single column, header "count" optional
// Integer labels must advance by one. Date labels must advance by the step
// between the first two rows (whole days). Gaps are zero-filled only when
// fill_gaps is set; otherwise ingestion fails naming the gap.

struct LoadOptions {
    double delta = 0.0;  // physical units per bin; 0 = date step in days, else 1
    bool fill_gaps = false;
};

namespace detail {

inline std::string strip_csv_ws(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
    return s.substr(b);
}

inline bool parse_int64(const std::string& s, std::int64_t& value) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc{} && ptr == last && !s.empty();
}

inline bool parse_double_strict(const std::string& s, double& value) {
    if (s.empty()) return false;
    char* end = nullptr;
    value = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(value);
}

// days since epoch for a strict YYYY-MM-DD label; false when not a valid date
inline bool parse_iso_date(const std::string& s, std::int64_t& serial) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    int y = 0;
    unsigned m = 0, d = 0;
    auto num = [&](std::size_t b, std::size_t e, auto& out) {
        auto [ptr, ec] = std::from_chars(s.data() + b, s.data() + e, out);
        return ec == std::errc{} && ptr == s.data() + e;
    };
    if (!num(0, 4, y) || !num(5, 7, m) || !num(8, 10, d)) return false;
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    if (!ymd.ok()) return false;
    serial = std::chrono::sys_days{ymd}.time_since_epoch().count();
    return true;
}

inline std::int64_t parse_count_field(const std::string& field, std::size_t line_no) {
    std::int64_t c = 0;
    if (!parse_int64(field, c))
        throw std::invalid_argument("load_counts: non-integer count '" + field + "' on line " +
                                    std::to_string(line_no));
    if (c < 0)
        throw std::invalid_argument("load_counts: negative count on line " +
                                    std::to_string(line_no));
    return c;
}

}  // namespace detail

inline BinCountSeries load_counts(std::istream& in, const LoadOptions& opts = {}) {
    enum class Labels { unknown, none, integer, date };
    Labels mode = Labels::unknown;
    bool saw_header = false;
    std::vector<std::int64_t> counts;
    std::vector<std::int64_t> serials;     // integer label or date serial, per kept row
    std::vector<std::string> label_texts;  // original spelling, for error messages
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::strip_csv_ws(line);
        if (line.empty() || line[0] == '#') continue;
        auto comma = line.find(',');
        if (comma != std::string::npos && line.find(',', comma + 1) != std::string::npos)
            throw std::invalid_argument("load_counts: expected at most two fields on line " +
                                        std::to_string(line_no));
        std::string a = detail::strip_csv_ws(line.substr(0, comma));
        std::string b =
            comma == std::string::npos ? std::string{} : detail::strip_csv_ws(line.substr(comma + 1));
        if (mode == Labels::unknown && !saw_header) {
            std::string low = a;
            for (auto& ch : low) ch = static_cast<char>(std::tolower(ch));
            if ((low == "label" && b == "count") || (low == "count" && comma == std::string::npos)) {
                saw_header = true;
                continue;
            }
        }
        if (mode == Labels::unknown) mode = comma == std::string::npos ? Labels::none : Labels::integer;
        if (mode == Labels::none) {
            if (comma != std::string::npos)
                throw std::invalid_argument(
                    "load_counts: labeled row in a single-column file on line " +
                    std::to_string(line_no));
            counts.push_back(detail::parse_count_field(a, line_no));
            continue;
        }
        if (comma == std::string::npos)
            throw std::invalid_argument("load_counts: missing count field on line " +
                                        std::to_string(line_no));
        std::int64_t serial = 0;
        if (counts.empty()) {
            if (!detail::parse_int64(a, serial)) {
                if (!detail::parse_iso_date(a, serial))
                    throw std::invalid_argument("load_counts: label '" + a +
                                                "' is neither an integer nor YYYY-MM-DD (line " +
                                                std::to_string(line_no) + ")");
                mode = Labels::date;
            }
        } else {
            bool ok = mode == Labels::date ? detail::parse_iso_date(a, serial)
                                           : detail::parse_int64(a, serial);
            if (!ok)
                throw std::invalid_argument("load_counts: label '" + a +
                                            "' does not match the first label's format (line " +
                                            std::to_string(line_no) + ")");
        }
        counts.push_back(detail::parse_count_field(b, line_no));
        serials.push_back(serial);
        label_texts.push_back(a);
    }
    require(!counts.empty(), "load_counts: no data rows");

    // Date stride in days: a declared whole-number delta wins (a file that opens
    // with a gap is indistinguishable from a coarser stride), else the first two
    // rows set it.
    std::int64_t step = 1;
    if (mode == Labels::date) {
        if (opts.delta >= 1.0 && opts.delta == std::floor(opts.delta)) {
            step = static_cast<std::int64_t>(opts.delta);
        } else if (serials.size() >= 2) {
            step = serials[1] - serials[0];
            require(step >= 1, "load_counts: date labels must be strictly increasing");
        }
    }
    std::vector<std::int64_t> filled;
    if (mode == Labels::integer || mode == Labels::date) {
        filled.reserve(counts.size());
        filled.push_back(counts[0]);
        for (std::size_t i = 1; i < serials.size(); ++i) {
            const std::int64_t jump = serials[i] - serials[i - 1];
            if (jump <= 0)
                throw std::invalid_argument("load_counts: labels not increasing at '" +
                                            label_texts[i] + "'");
            if (jump % step != 0)
                throw std::invalid_argument("load_counts: label '" + label_texts[i] +
                                            "' breaks the " + std::to_string(step) +
                                            "-day step of the file");
            if (jump != step && !opts.fill_gaps)
                throw std::invalid_argument("load_counts: gap between labels '" +
                                            label_texts[i - 1] + "' and '" + label_texts[i] +
                                            "'; pass --fill-gaps to zero-fill");
            for (std::int64_t k = step; k < jump; k += step) filled.push_back(0);
            filled.push_back(counts[i]);
        }
        counts.swap(filled);
    }

    double delta = opts.delta;
    if (!(delta > 0.0)) delta = mode == Labels::date ? static_cast<double>(step) : 1.0;
    require(std::isfinite(delta) && delta > 0.0, "load_counts: delta must be > 0");
    return BinCountSeries{std::move(counts), delta, 0.0, 0};
}

inline BinCountSeries load_counts(const std::string& path, const LoadOptions& opts = {}) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_counts: cannot open '" + path + "'");
    return load_counts(in, opts);
}

// Event-time CSV: one strictly increasing time per line, optional "time"
// header, '#' comments. window = 0 takes the last event time as the window end.
inline PointRealization load_events(std::istream& in, double window = 0.0) {
    std::vector<double> times;
    std::string line;
    std::size_t line_no = 0;
    bool first_row = true;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::strip_csv_ws(line);
        if (line.empty() || line[0] == '#') continue;
        if (first_row) {
            first_row = false;
            std::string low = line;
            for (auto& ch : low) ch = static_cast<char>(std::tolower(ch));
            if (low == "time") continue;
        }
        double t = 0.0;
        if (!detail::parse_double_strict(line, t))
            throw std::invalid_argument("load_events: bad time '" + line + "' on line " +
                                        std::to_string(line_no));
        if (!times.empty() && t <= times.back())
            throw std::invalid_argument("load_events: times not strictly increasing on line " +
                                        std::to_string(line_no));
        times.push_back(t);
    }
    require(!times.empty(), "load_events: no data rows");
    require(times.front() >= 0.0, "load_events: times must be nonnegative");
    double end = window > 0.0 ? window : times.back();
    require(end >= times.back(), "load_events: window shorter than the last event");
    return PointRealization{std::move(times), end, 0};
}

inline PointRealization load_events(const std::string& path, double window = 0.0) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_events: cannot open '" + path + "'");
    return load_events(in, window);
}

// ---------------------------------------------------------------------------
// CSV emission. All numbers print as %.17g so files round-trip bit-exactly.

namespace detail {

inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline void write_counts_csv(std::ostream& out, const BinCountSeries& series,
                             std::uint64_t seed = 0, double window = 0.0) {
    out << "# delta=" << detail::csv_num(series.delta);
    if (window > 0.0) out << " window=" << detail::csv_num(window);
    out << " seed=" << seed << "\n";
    out << "label,count\n";
    for (std::size_t k = 0; k < series.counts.size(); ++k)
        out << k << "," << series.counts[k] << "\n";
}

inline void write_events_csv(std::ostream& out, const PointRealization& realization) {
    out << "# window=" << detail::csv_num(realization.window_end) << " seed=" << realization.seed
        << "\n";
    out << "time\n";
    for (double t : realization.times) out << detail::csv_num(t) << "\n";
}

// generic numeric table, used for spectrum curves
inline void write_table_csv(std::ostream& out, const std::vector<std::string>& columns,
                            const std::vector<std::vector<double>>& rows) {
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << columns[c] << (c + 1 < columns.size() ? "," : "\n");
    for (const auto& row : rows) {
        require(row.size() == columns.size(), "write_table_csv: ragged row");
        for (std::size_t c = 0; c < row.size(); ++c)
            out << detail::csv_num(row[c]) << (c + 1 < row.size() ? "," : "\n");
    }
}

inline void write_q2_csv(std::ostream& out, const GofReport& report) {
    out << "omega,q2\n";
    for (const auto& [w, q] : report.q2_curve)
        out << detail::csv_num(w) << "," << detail::csv_num(q) << "\n";
}

inline void write_mse_csv(std::ostream& out, const MseTable& table) {
    out << "method,horizon,delta,parameter,mean_estimate,mse,mc_se,included,excluded\n";
    for (const auto& r : table.rows)
        out << r.method << "," << detail::csv_num(r.horizon) << "," << detail::csv_num(r.delta)
            << "," << r.parameter << "," << detail::csv_num(r.mean_estimate) << ","
            << detail::csv_num(r.mse) << "," << detail::csv_num(r.mc_se) << "," << r.included
            << "," << r.excluded << "\n";
}

// ---------------------------------------------------------------------------
// JSON report serialization. Non-finite doubles render as null per the JSON
// grammar; the schema marks those fields nullable.

inline void to_json(nlohmann::json& j, const FitReport& r) {
    j = nlohmann::json{{"method", r.method},
                       {"kernel", kernel_spec_string(r.model.kernel)},
                       {"parameter_names", r.parameter_names},
                       {"estimate", r.estimate},
                       {"standard_errors", r.standard_errors},
                       {"fisher", r.fisher},
                       {"covariance", r.covariance},
                       {"fisher_condition", r.fisher_condition},
                       {"c4_omitted", r.c4_omitted},
                       {"objective", r.objective},
                       {"converged", r.converged},
                       {"iterations", r.iterations},
                       {"grad_norm", r.grad_norm},
                       {"n", r.n},
                       {"delta", r.delta},
                       {"message", r.message}};
}

inline void to_json(nlohmann::json& j, const GofReport& r) {
    j = nlohmann::json{{"statistic", r.statistic},
                       {"mu_h", r.mu_h},
                       {"tau", r.tau},
                       {"asymptotic_pvalue", r.asymptotic_pvalue},
                       {"bandwidth", r.bandwidth},
                       {"n", r.n},
                       {"chi2_95", r.chi2_95},
                       {"bootstrap_replicates", r.bootstrap_replicates},
                       {"bootstrap_pvalue", r.bootstrap_pvalue},
                       {"bootstrap_failures", r.bootstrap_failures},
                       {"bootstrap_valid", r.bootstrap_valid}};
}

inline void to_json(nlohmann::json& j, const MseRow& r) {
    j = nlohmann::json{{"method", r.method},       {"horizon", r.horizon},
                       {"delta", r.delta},         {"parameter", r.parameter},
                       {"mean_estimate", r.mean_estimate}, {"mse", r.mse},
                       {"mc_se", r.mc_se},         {"included", r.included},
                       {"excluded", r.excluded}};
}

inline void to_json(nlohmann::json& j, const SlopeRow& r) {
    j = nlohmann::json{{"method", r.method},
                       {"delta", r.delta},
                       {"parameter", r.parameter},
                       {"slope", r.slope},
                       {"points", r.points}};
}

inline void to_json(nlohmann::json& j, const MseTable& t) {
    j = nlohmann::json{{"rows", t.rows}, {"slopes", t.slopes}};
}

// Envelope every subcommand emits. elapsed_seconds is the only field allowed
// to differ between identical invocations.
struct RunReport {
    std::string command;
    std::vector<std::string> argv;
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json result = nlohmann::json::object();
    std::uint64_t seed = 0;
    std::string version = library_version;
    double elapsed_seconds = 0.0;
};

inline void to_json(nlohmann::json& j, const RunReport& r) {
    j = nlohmann::json{{"command", r.command},   {"argv", r.argv},
                       {"config", r.config},     {"result", r.result},
                       {"seed", r.seed},         {"version", r.version},
                       {"elapsed_seconds", r.elapsed_seconds}};
}

inline std::string report_text(const RunReport& r) {
    nlohmann::json j = r;
    return j.dump(2) + "\n";
}

}  // namespace hawkes
