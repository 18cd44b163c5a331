#include <charconv>
#include <cmath>
#include <sstream>

#include "satedge/constants.hpp"
#include "satedge/orbital_mechanics.hpp"

namespace satedge {

namespace {

constexpr std::size_t tle_line_length = 69;

std::string_view trim_right(std::string_view s)
{
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::string_view trim(std::string_view s)
{
    s = trim_right(s);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

struct FieldError {
    std::string message;
};

double parse_double(std::string_view line, std::size_t col, std::size_t len, const char* what)
{
    const std::string_view field = trim(line.substr(col, len));
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
        throw FieldError{std::string("non-numeric ") + what + " field '" + std::string(field) + "'"};
    return value;
}

int parse_int(std::string_view line, std::size_t col, std::size_t len, const char* what)
{
    const std::string_view field = trim(line.substr(col, len));
    int value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
        throw FieldError{std::string("non-numeric ") + what + " field '" + std::string(field) + "'"};
    return value;
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

double seconds_since_2000(int year, double day_of_year)
{
    double days = 0.0;
    if (year >= 2000) {
        for (int y = 2000; y < year; ++y) days += is_leap(y) ? 366 : 365;
    } else {
        for (int y = year; y < 2000; ++y) days -= is_leap(y) ? 366 : 365;
    }
    return (days + day_of_year - 1.0) * seconds_per_day;
}

// Returns an error message, or empty when the line is well formed.
std::string check_line(std::string_view line, char expected_number)
{
    if (line.size() != tle_line_length)
        return "line length " + std::to_string(line.size()) + ", expected 69";
    if (line[0] != expected_number) return std::string("expected line number ") + expected_number;
    const char digit = line[68];
    if (digit < '0' || digit > '9') return "checksum column is not a digit";
    const int expected = tle_checksum(line);
    if (digit - '0' != expected)
        return "bad checksum: found " + std::string(1, digit) + ", computed " + std::to_string(expected);
    return {};
}

bool looks_like(std::string_view line, char number)
{
    return line.size() >= 2 && line[0] == number && line[1] == ' ';
}

} // namespace

int tle_checksum(std::string_view line)
{
    int sum = 0;
    for (std::size_t i = 0; i < std::min<std::size_t>(68, line.size()); ++i) {
        const char c = line[i];
        if (c >= '0' && c <= '9') sum += c - '0';
        else if (c == '-') sum += 1;
    }
    return sum % 10;
}

double gmst_at(double seconds_since_2000_utc)
{
    // Days from J2000.0 (2000-01-01T12:00 UT).
    const double d = seconds_since_2000_utc / seconds_per_day - 0.5;
    const double t = d / 36525.0;
    double deg = 280.46061837 + 360.98564736629 * d + 0.000387933 * t * t - t * t * t / 38710000.0;
    deg = std::fmod(deg, 360.0);
    if (deg < 0.0) deg += 360.0;
    return deg * deg_to_rad;
}

TleParseResult parse_tle(std::string_view text)
{
    std::vector<std::string_view> lines;
    {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t nl = text.find('\n', pos);
            const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
            lines.push_back(trim_right(text.substr(pos, end - pos)));
            if (nl == std::string_view::npos) break;
            pos = nl + 1;
        }
    }

    TleParseResult result;
    std::string pending_name;
    std::size_t i = 0;
    while (i < lines.size()) {
        const std::string_view line = lines[i];
        if (trim(line).empty()) {
            ++i;
            continue;
        }
        if (looks_like(line, '2')) {
            result.errors.push_back({i + 1, "line 2 without preceding line 1"});
            pending_name.clear();
            ++i;
            continue;
        }
        if (!looks_like(line, '1')) {
            pending_name = std::string(trim(line));
            ++i;
            continue;
        }

        const std::size_t line1_no = i + 1;
        if (i + 1 >= lines.size() || !looks_like(lines[i + 1], '2')) {
            result.errors.push_back({line1_no, "line 1 without following line 2"});
            pending_name.clear();
            ++i;
            continue;
        }
        const std::string_view l1 = line;
        const std::string_view l2 = lines[i + 1];
        const std::size_t line2_no = i + 2;
        i += 2;

        std::string name = std::move(pending_name);
        pending_name.clear();
        if (auto err = check_line(l1, '1'); !err.empty()) {
            result.errors.push_back({line1_no, err});
            continue;
        }
        if (auto err = check_line(l2, '2'); !err.empty()) {
            result.errors.push_back({line2_no, err});
            continue;
        }

        std::size_t at_line = line1_no;
        try {
            OrbitalElements el;
            el.id = parse_int(l1, 2, 5, "catalog number");
            const int yy = parse_int(l1, 18, 2, "epoch year");
            const double day = parse_double(l1, 20, 12, "epoch day");
            const int year = yy < 57 ? 2000 + yy : 1900 + yy;
            el.epoch = seconds_since_2000(year, day);

            at_line = line2_no;
            if (parse_int(l2, 2, 5, "catalog number") != el.id)
                throw FieldError{"catalog number differs between lines 1 and 2"};
            el.inclination = parse_double(l2, 8, 8, "inclination");
            el.raan = parse_double(l2, 17, 8, "RAAN");
            const std::string ecc = "0." + std::string(trim(l2.substr(26, 7)));
            el.eccentricity = parse_double(ecc, 0, ecc.size(), "eccentricity");
            el.arg_perigee = parse_double(l2, 34, 8, "argument of perigee");
            el.mean_anomaly = parse_double(l2, 43, 8, "mean anomaly");
            const double revs_per_day = parse_double(l2, 52, 11, "mean motion");
            if (!(revs_per_day > 0.0)) throw FieldError{"mean motion must be positive"};
            if (el.eccentricity >= 1.0) throw FieldError{"eccentricity must be < 1"};

            const double n = 2.0 * pi * revs_per_day / seconds_per_day;
            el.semi_major_axis = std::cbrt(earth_mu / (n * n));
            el.name = name.empty() ? std::to_string(el.id) : name;
            el.layer = Layer::leo;
            result.elements.push_back(std::move(el));
        } catch (const FieldError& e) {
            result.errors.push_back({at_line, e.message});
        }
    }
    return result;
}

} // namespace satedge
