#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "satedge/experiment.hpp"

namespace satedge {

namespace {

std::string number(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string optional_number(const std::optional<double>& v) { return v ? number(*v) : std::string(); }

std::vector<std::string> split(std::string_view line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_double(const std::string& s, std::size_t line)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::runtime_error("csv line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

long parse_long(const std::string& s, std::size_t line)
{
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::runtime_error("csv line " + std::to_string(line) + ": bad integer '" + s + "'");
    return v;
}

std::optional<double> parse_optional(const std::string& s, std::size_t line)
{
    if (s.empty()) return std::nullopt;
    return parse_double(s, line);
}

} // namespace

std::string to_csv(const MetricsTable& t)
{
    std::string out = csv_header;
    out += '\n';
    for (const auto& r : t.rows) {
        out += std::string(to_string(r.mode)) + ',' + number(r.threshold) + ',' + optional_number(r.admission_rate_mean) +
               ',' + optional_number(r.admission_rate_std) + ',' + optional_number(r.avg_delay_mean) + ',' +
               optional_number(r.avg_delay_std) + ',' + optional_number(r.avg_energy_mean) + ',' +
               optional_number(r.avg_energy_std) + ',' + std::to_string(r.n_realizations) + ',' +
               std::to_string(r.blocked_by_coverage) + ',' + std::to_string(r.status_optimal) + ',' +
               std::to_string(r.status_limit) + '\n';
    }
    return out;
}

void emit_csv(const MetricsTable& t, const std::string& path)
{
    if (t.rows.empty()) throw std::invalid_argument("emit_csv: empty metrics table, nothing written to " + path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_csv(t);
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + path);
}

MetricsTable parse_csv(std::string_view text)
{
    MetricsTable t;
    std::size_t line_no = 0;
    std::size_t start = 0;
    bool header = true;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (header) {
            if (line != csv_header) throw std::runtime_error("csv: unexpected header");
            header = false;
            continue;
        }
        const auto f = split(line);
        if (f.size() != 12) throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected 12 fields");
        MetricsRow r;
        r.mode = mode_from_string(f[0]);
        r.threshold = parse_double(f[1], line_no);
        r.admission_rate_mean = parse_optional(f[2], line_no);
        r.admission_rate_std = parse_optional(f[3], line_no);
        r.avg_delay_mean = parse_optional(f[4], line_no);
        r.avg_delay_std = parse_optional(f[5], line_no);
        r.avg_energy_mean = parse_optional(f[6], line_no);
        r.avg_energy_std = parse_optional(f[7], line_no);
        r.n_realizations = static_cast<int>(parse_long(f[8], line_no));
        r.blocked_by_coverage = parse_long(f[9], line_no);
        r.status_optimal = static_cast<int>(parse_long(f[10], line_no));
        r.status_limit = static_cast<int>(parse_long(f[11], line_no));
        t.rows.push_back(r);
    }
    if (header) throw std::runtime_error("csv: missing header");
    return t;
}

std::string report(const MetricsTable& t)
{
    std::ostringstream out;
    out.setf(std::ios::fixed);
    auto show = [&](const std::optional<double>& v, int prec) {
        std::ostringstream s;
        s.setf(std::ios::fixed);
        s.precision(prec);
        if (v) s << *v;
        else s << "-";
        return s.str();
    };
    out << "mode       thr  admission        delay_s          energy_J        n  limit\n";
    for (const auto& r : t.rows) {
        char line[256];
        std::snprintf(line, sizeof line, "%-9s %4.0f  %6s +- %-6s  %6s +- %-6s  %7s +- %-7s %3d  %d\n",
                      std::string(to_string(r.mode)).c_str(), r.threshold, show(r.admission_rate_mean, 3).c_str(),
                      show(r.admission_rate_std, 3).c_str(), show(r.avg_delay_mean, 3).c_str(),
                      show(r.avg_delay_std, 3).c_str(), show(r.avg_energy_mean, 2).c_str(),
                      show(r.avg_energy_std, 2).c_str(), r.n_realizations, r.status_limit);
        out << line;
    }
    bool any = false;
    for (const auto& h : t.rows) {
        if (h.mode != ScenarioMode::hybrid) continue;
        const MetricsRow* l = t.find(ScenarioMode::leo_only, h.threshold);
        if (!l) continue;
        if (!any) out << "\nhybrid vs leo_only\n";
        any = true;
        out << "  " << std::setprecision(0) << h.threshold << " deg:";
        out.precision(1);
        if (h.admission_rate_mean && l->admission_rate_mean) {
            const double gap = *h.admission_rate_mean - *l->admission_rate_mean;
            out << " admission " << (gap >= 0 ? "+" : "") << 100.0 * gap << " pts";
            if (*l->admission_rate_mean > 0)
                out << " (" << (gap >= 0 ? "+" : "") << 100.0 * gap / *l->admission_rate_mean << "%)";
        }
        if (h.avg_delay_mean && l->avg_delay_mean && *l->avg_delay_mean > 0) {
            const double rel = (*l->avg_delay_mean - *h.avg_delay_mean) / *l->avg_delay_mean;
            out << ", delay " << (rel >= 0 ? "-" : "+") << 100.0 * std::abs(rel) << "%";
        }
        out << "\n";
    }
    return out.str();
}

} // namespace satedge
