#include "satedge/orbital_mechanics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Geometry>

#include "satedge/constants.hpp"

namespace satedge {

std::string_view to_string(Layer layer) { return layer == Layer::leo ? "leo" : "meo"; }

Layer layer_from_string(std::string_view name)
{
    if (name == "leo") return Layer::leo;
    if (name == "meo") return Layer::meo;
    throw ConfigError("unknown layer '" + std::string(name) + "'");
}

double OrbitalElements::mean_motion() const
{
    return std::sqrt(earth_mu / (semi_major_axis * semi_major_axis * semi_major_axis));
}

double OrbitalElements::period() const { return 2.0 * pi / mean_motion(); }

namespace {

double normalize_deg(double angle)
{
    double r = std::fmod(angle, 360.0);
    if (r < 0.0) r += 360.0;
    return r;
}

} // namespace

std::vector<OrbitalElements> synthesize_constellation(std::span<const PlaneSpec> planes, Layer layer,
                                                      int first_id, std::string_view name_prefix)
{
    std::vector<OrbitalElements> out;
    int id = first_id;
    for (std::size_t p = 0; p < planes.size(); ++p) {
        const PlaneSpec& plane = planes[p];
        if (plane.count < 1) throw ConfigError("plane " + std::to_string(p) + ": count must be >= 1");
        if (!(plane.altitude > min_synthesis_altitude))
            throw ConfigError("plane " + std::to_string(p) + ": altitude must exceed 200 km");
        for (int s = 0; s < plane.count; ++s) {
            OrbitalElements el;
            el.id = id++;
            el.name = std::string(name_prefix) + "-" + std::to_string(p) + "-" + std::to_string(s);
            el.semi_major_axis = earth_radius + plane.altitude;
            el.eccentricity = 0.0;
            el.inclination = normalize_deg(plane.inclination);
            el.raan = normalize_deg(plane.raan);
            el.arg_perigee = 0.0;
            el.mean_anomaly = normalize_deg(360.0 * s / plane.count);
            el.epoch = 0.0;
            el.layer = layer;
            out.push_back(std::move(el));
        }
    }
    return out;
}

double solve_kepler(double mean_anomaly_rad, double eccentricity, int max_iterations)
{
    const double M = std::remainder(mean_anomaly_rad, 2.0 * pi);
    double E = eccentricity < 0.8 ? M : (M >= 0.0 ? pi : -pi);
    for (int it = 0; it < max_iterations; ++it) {
        const double f = E - eccentricity * std::sin(E) - M;
        if (std::abs(f) < 1e-13) return E;
        const double step = f / (1.0 - eccentricity * std::cos(E));
        E -= step;
        if (std::abs(step) < 1e-15) {
            if (std::abs(E - eccentricity * std::sin(E) - M) < 1e-12) return E;
        }
    }
    const double residual = std::abs(E - eccentricity * std::sin(E) - M);
    if (residual < 1e-12) return E;
    throw NumericalError("Kepler iteration did not converge (e = " + std::to_string(eccentricity) + ")");
}

SatelliteState propagate(const OrbitalElements& el, double t, double earth_angle_at_origin)
{
    const double a = el.semi_major_axis;
    const double e = el.eccentricity;
    const double n = el.mean_motion();
    const double M = el.mean_anomaly * deg_to_rad + n * (t - el.epoch);
    const double E = solve_kepler(M, e);

    const double cos_e = std::cos(E);
    const double sin_e = std::sin(E);
    const double root = std::sqrt(1.0 - e * e);
    const double r = a * (1.0 - e * cos_e);

    const Vec3 pos_pf(a * (cos_e - e), a * root * sin_e, 0.0);
    const double vscale = std::sqrt(earth_mu * a) / r;
    const Vec3 vel_pf(-vscale * sin_e, vscale * root * cos_e, 0.0);

    using Eigen::AngleAxisd;
    const Eigen::Matrix3d to_inertial = (AngleAxisd(el.raan * deg_to_rad, Vec3::UnitZ()) *
                                         AngleAxisd(el.inclination * deg_to_rad, Vec3::UnitX()) *
                                         AngleAxisd(el.arg_perigee * deg_to_rad, Vec3::UnitZ()))
                                            .toRotationMatrix();
    const double theta = earth_angle_at_origin + earth_rotation_rate * t;
    const Eigen::Matrix3d to_fixed = AngleAxisd(-theta, Vec3::UnitZ()).toRotationMatrix();

    SatelliteState st;
    st.id = el.id;
    st.position = to_fixed * (to_inertial * pos_pf);
    st.velocity = to_fixed * (to_inertial * vel_pf);
    st.epoch_offset = t;
    return st;
}

Vec3 user_position(const GroundUser& user)
{
    const double lat = user.latitude * deg_to_rad;
    const double lon = user.longitude * deg_to_rad;
    const double r = earth_radius + user.altitude;
    return {r * std::cos(lat) * std::cos(lon), r * std::cos(lat) * std::sin(lon), r * std::sin(lat)};
}

double elevation_angle(const GroundUser& user, const Vec3& sat_position)
{
    const Vec3 site = user_position(user);
    const Vec3 los = sat_position - site;
    const double range = los.norm();
    if (range == 0.0) return 90.0;
    const double s = std::clamp(los.dot(site.normalized()) / range, -1.0, 1.0);
    return std::asin(s) * rad_to_deg;
}

namespace {

class ElevationMargin {
public:
    ElevationMargin(const GroundUser& user, const OrbitalElements& el, const VisibilityOptions& opt)
        : user_(user), el_(el), opt_(opt)
    {
    }

    double operator()(double t) const
    {
        return elevation_angle(user_, propagate(el_, t, opt_.earth_angle_at_origin).position) - opt_.threshold;
    }

private:
    const GroundUser& user_;
    const OrbitalElements& el_;
    const VisibilityOptions& opt_;
};

// Root of g in [a, b] where g(a) and g(b) straddle zero; returns the midpoint of
// the final bracket.
template <class F>
double bisect(const F& g, double a, double b, double ga, double tol)
{
    const bool a_inside = ga >= 0.0;
    while (b - a > tol) {
        const double m = 0.5 * (a + b);
        if ((g(m) >= 0.0) == a_inside) a = m;
        else b = m;
    }
    return 0.5 * (a + b);
}

template <class F>
double golden_max(const F& g, double a, double b, double tol)
{
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a);
    double d = a + r * (b - a);
    double gc = g(c);
    double gd = g(d);
    while (b - a > tol) {
        if (gc > gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

std::vector<VisibilityWindow> visibility_windows(const GroundUser& user, const OrbitalElements& elements,
                                                 const VisibilityOptions& opt)
{
    if (!(opt.horizon > 0.0)) throw ConfigError("visibility horizon must be positive");
    if (!(opt.step > 0.0) || opt.step > max_visibility_step)
        throw ConfigError("visibility step must lie in (0, 60] s");

    const ElevationMargin g(user, elements, opt);
    std::vector<double> ts;
    for (double t = 0.0; t < opt.horizon; t += opt.step) ts.push_back(t);
    ts.push_back(opt.horizon);
    std::vector<double> gs(ts.size());
    for (std::size_t j = 0; j < ts.size(); ++j) gs[j] = g(ts[j]);

    std::vector<VisibilityWindow> out;
    auto emit = [&](double start, double end) {
        if (end <= start) return;
        VisibilityWindow w;
        w.user_id = user.id;
        w.satellite_id = elements.id;
        w.start = start;
        w.end = end;
        w.currently_visible = start == 0.0 && gs.front() >= 0.0;
        out.push_back(w);
    };

    bool is_open = gs.front() >= 0.0;
    double opened = 0.0;
    for (std::size_t j = 0; j + 1 < ts.size(); ++j) {
        const bool in_a = gs[j] >= 0.0;
        const bool in_b = gs[j + 1] >= 0.0;
        if (in_a == in_b) continue;
        const double x = bisect(g, ts[j], ts[j + 1], gs[j], opt.tolerance);
        if (in_b) {
            opened = x;
            is_open = true;
        } else {
            emit(opened, x);
            is_open = false;
        }
    }
    if (is_open) emit(opened, opt.horizon);

    // Passes that peak above the threshold strictly between two samples.
    const std::size_t n = ts.size();
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t lo = j == 0 ? 0 : j - 1;
        const std::size_t hi = std::min(j + 1, n - 1);
        if (gs[lo] >= 0.0 || gs[j] >= 0.0 || gs[hi] >= 0.0) continue;
        if (gs[j] < gs[lo] || gs[j] < gs[hi]) continue;
        if (lo == hi) continue;
        const double peak = golden_max(g, ts[lo], ts[hi], 1e-3);
        const double gp = g(peak);
        if (gp < 0.0) continue;
        const double start = bisect(g, ts[lo], peak, gs[lo], opt.tolerance);
        const double end = bisect(g, peak, ts[hi], gp, opt.tolerance);
        emit(start, end);
    }

    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    return out;
}

} // namespace satedge
