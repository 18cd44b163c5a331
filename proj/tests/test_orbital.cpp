#include <doctest.h>

#include <Eigen/Geometry>
#include <array>
#include <cmath>
#include <random>

#include "satedge/constants.hpp"
#include "satedge/orbital_mechanics.hpp"
#include "support/testkit.hpp"

using namespace satedge;

namespace {

const char* iss_tle = "ISS (ZARYA)\n"
                      "1 25544U 98067A   08264.51782528 -.00002182  00000-0 -11606-4 0  2927\n"
                      "2 25544  51.6416 247.4627 0006703 130.5360 325.0288 15.72125391563537\n";

Eigen::Matrix3d rot_z(double a)
{
    Eigen::Matrix3d r;
    r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
    return r;
}

// Fixed-step RK4 on the inertial two-body equations.
Vec3 rk4_two_body(Vec3 r, Vec3 v, double t_end, double h)
{
    auto acc = [](const Vec3& p) { return Vec3(-earth_mu * p / std::pow(p.norm(), 3)); };
    double t = 0.0;
    while (t < t_end - 1e-12) {
        const double dt = std::min(h, t_end - t);
        const Vec3 k1r = v, k1v = acc(r);
        const Vec3 k2r = v + 0.5 * dt * k1v, k2v = acc(r + 0.5 * dt * k1r);
        const Vec3 k3r = v + 0.5 * dt * k2v, k3v = acc(r + 0.5 * dt * k2r);
        const Vec3 k4r = v + dt * k3v, k4v = acc(r + dt * k3r);
        r += dt / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r);
        v += dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
        t += dt;
    }
    return r;
}

} // namespace

TEST_CASE("tle: ISS record gives the Kepler semi-major axis")
{
    const auto res = parse_tle(iss_tle);
    REQUIRE(res.errors.empty());
    REQUIRE(res.elements.size() == 1);
    const auto& el = res.elements[0];
    CHECK(el.name == "ISS (ZARYA)");
    const double n = 15.72125391 * 2.0 * pi / 86400.0;
    const double a = std::cbrt(earth_mu / (n * n));
    CHECK(el.semi_major_axis == doctest::Approx(a).epsilon(1e-12));
    CHECK(el.semi_major_axis == doctest::Approx(6.73e6).epsilon(0.01));
    CHECK(el.inclination == doctest::Approx(51.6416));
    CHECK(el.eccentricity == doctest::Approx(0.0006703));
}

TEST_CASE("tle: checksum digits")
{
    CHECK(tle_checksum("1 25544U 98067A   08264.51782528 -.00002182  00000-0 -11606-4 0  2927") == 7);
    CHECK(tle_checksum("2 25544  51.6416 247.4627 0006703 130.5360 325.0288 15.72125391563537") == 7);
}

TEST_CASE("tle: empty input and corrupted checksum")
{
    CHECK(parse_tle("").elements.empty());
    CHECK(parse_tle("").errors.empty());

    std::string bad = std::string(iss_tle) + iss_tle;
    // corrupt the checksum of the first record's line 1
    const auto pos = bad.find("2927");
    bad[pos + 3] = '8';
    const auto res = parse_tle(bad);
    REQUIRE(res.errors.size() == 1);
    CHECK(res.errors[0].line == 2);
    CHECK(res.elements.size() == 1);
}

TEST_CASE("synthesis: MEO shell")
{
    std::vector<PlaneSpec> planes{{86, 2100e3, 10, 0}, {88, 2100e3, 10, 60}, {90, 2100e3, 10, 120}};
    const auto els = synthesize_constellation(planes, Layer::meo);
    REQUIRE(els.size() == 30);
    for (const auto& e : els) CHECK(e.semi_major_axis == 8'471'000.0);

    const auto one = synthesize_constellation(std::vector<PlaneSpec>{{53, 550e3, 1, 0}}, Layer::leo);
    REQUIRE(one.size() == 1);
    CHECK(one[0].mean_anomaly == 0.0);

    const auto two = synthesize_constellation(std::vector<PlaneSpec>{{53, 550e3, 2, 0}}, Layer::leo);
    CHECK(two[0].mean_anomaly == 0.0);
    CHECK(two[1].mean_anomaly == 180.0);

    CHECK_THROWS_AS(synthesize_constellation(std::vector<PlaneSpec>{{53, 150e3, 2, 0}}, Layer::leo), ConfigError);
    CHECK_THROWS_AS(synthesize_constellation(std::vector<PlaneSpec>{{53, 550e3, 0, 0}}, Layer::leo), ConfigError);
}

TEST_CASE("kepler: residual is tiny across eccentricities")
{
    for (double e : {0.0, 0.1, 0.5, 0.9, 0.99})
        for (double M = -3.0; M <= 3.0; M += 0.37) {
            const double E = solve_kepler(M, e);
            CHECK(std::abs(E - e * std::sin(E) - std::remainder(M, 2 * pi)) < 1e-12);
        }
}

TEST_CASE("propagate: circular equatorial orbit")
{
    OrbitalElements el;
    el.semi_major_axis = 7e6;
    const auto s0 = propagate(el, 0.0);
    CHECK(s0.position.x() == doctest::Approx(7e6));
    CHECK(std::abs(s0.position.y()) < 1e-6);
    CHECK(s0.velocity.norm() == doctest::Approx(std::sqrt(earth_mu / 7e6)));

    const double quarter = el.period() / 4.0;
    const auto s1 = propagate(el, quarter);
    const double w = earth_rotation_rate * quarter;
    CHECK(s1.position.x() == doctest::Approx(7e6 * std::sin(w)).epsilon(1e-9));
    CHECK(s1.position.y() == doctest::Approx(7e6 * std::cos(w)).epsilon(1e-9));
    CHECK(std::abs(s1.position.z()) < 1e-6);
}

TEST_CASE("propagate: eccentric orbit matches an RK4 integrator")
{
    OrbitalElements el;
    el.semi_major_axis = 8e6;
    el.eccentricity = 0.1;
    el.inclination = 63.4;
    el.raan = 40;
    el.arg_perigee = 270;
    el.mean_anomaly = 15;
    const double theta0 = 0.3;
    const auto s0 = propagate(el, 0.0, theta0);
    const Vec3 r0 = rot_z(theta0) * s0.position;
    const Vec3 v0 = rot_z(theta0) * s0.velocity;
    for (double t : {600.0, 2345.6, 5000.0}) {
        const Vec3 ref = rot_z(-(theta0 + earth_rotation_rate * t)) * rk4_two_body(r0, v0, t, 1.0);
        CHECK((propagate(el, t, theta0).position - ref).norm() < 1e3);
    }
}

TEST_CASE("elevation: zenith, horizon and law of cosines")
{
    GroundUser u;
    u.latitude = 62.0;
    u.longitude = -77.5;
    const Vec3 site = user_position(u);
    CHECK(elevation_angle(u, site.normalized() * (earth_radius + 550e3)) == doctest::Approx(90.0));

    const Vec3 east = Vec3::UnitZ().cross(site).normalized();
    CHECK(std::abs(elevation_angle(u, site + 1e6 * east)) < 1e-9);

    std::vector<PlaneSpec> planes{{86, 2100e3, 10, 0}, {88, 2100e3, 10, 60}, {90, 2100e3, 10, 120}};
    const auto meo = synthesize_constellation(planes, Layer::meo);
    int checked = 0;
    for (const auto& el : meo) {
        const Vec3 p = propagate(el, 123.0, 1.1).position;
        const double rs = p.norm();
        const double re = site.norm();
        const double gamma = std::acos(site.dot(p) / (re * rs));
        const double expected = std::atan2(rs * std::cos(gamma) - re, rs * std::sin(gamma)) * rad_to_deg;
        CHECK(std::abs(elevation_angle(u, p) - expected) < 1e-6);
        ++checked;
    }
    CHECK(checked == 30);
}

TEST_CASE("visibility: impossible threshold gives nothing")
{
    GroundUser u;
    u.latitude = 62.0;
    u.longitude = -77.5;
    OrbitalElements el;
    el.semi_major_axis = earth_radius + 550e3;
    el.inclination = 53.0;
    VisibilityOptions vo;
    vo.threshold = 89.999;
    vo.horizon = 6000;
    CHECK(visibility_windows(u, el, vo).empty());

    vo.step = 0.0;
    CHECK_THROWS_AS(visibility_windows(u, el, vo), ConfigError);
    vo.step = 61.0;
    CHECK_THROWS_AS(visibility_windows(u, el, vo), ConfigError);
}

TEST_CASE("visibility: MEO passes outlast LEO passes over a polar user")
{
    GroundUser u;
    u.latitude = 80.0;
    auto longest = [&](double altitude) {
        OrbitalElements el;
        el.semi_major_axis = earth_radius + altitude;
        el.inclination = 90.0;
        el.mean_anomaly = 0.0;
        VisibilityOptions vo;
        vo.threshold = 10.0;
        vo.horizon = 2.0 * el.period();
        vo.step = 10.0;
        double best = 0.0;
        for (const auto& w : visibility_windows(u, el, vo))
            if (w.end < vo.horizon && w.start > 0.0) best = std::max(best, w.duration());
        return best;
    };
    const double leo = longest(550e3);
    const double meo = longest(2100e3);
    CHECK(leo > 0.0);
    CHECK(meo > leo);
}

TEST_CASE("visibility: windows agree with a dense scan")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<PlaneSpec> leo{{65, 550e3, 40, 0}, {65, 550e3, 40, 90}};
    std::vector<PlaneSpec> meo{{86, 2100e3, 10, 0}, {90, 2100e3, 10, 120}};
    auto els = synthesize_constellation(leo, Layer::leo);
    const auto m = synthesize_constellation(meo, Layer::meo, 1000);
    els.insert(els.end(), m.begin(), m.end());

    int compared = 0;
    for (int trial = 0; trial < 60 && compared < 8; ++trial) {
        GroundUser u;
        u.latitude = 60.0 + 4.0 * U(rng);
        u.longitude = -80.0 + 5.0 * U(rng);
        const auto& el = els[static_cast<std::size_t>(U(rng) * els.size())];
        VisibilityOptions vo;
        vo.threshold = 10.0 + 30.0 * U(rng);
        vo.horizon = 3600.0;
        vo.earth_angle_at_origin = U(rng);
        const auto got = visibility_windows(u, el, vo);
        const auto ref = testkit::dense_windows(u, el, vo.threshold, vo.horizon, vo.earth_angle_at_origin);
        if (ref.empty()) continue;
        REQUIRE(got.size() == ref.size());
        for (std::size_t w = 0; w < got.size(); ++w) {
            CHECK(std::abs(got[w].start - ref[w].first) <= 0.2);
            CHECK(std::abs(got[w].end - ref[w].second) <= 0.2);
        }
        ++compared;
    }
    CHECK(compared >= 5);
}

TEST_CASE("visibility: windows are sorted, disjoint and inside the horizon")
{
    GroundUser u;
    u.latitude = 62.0;
    u.longitude = -77.5;
    const auto els = synthesize_constellation(std::vector<PlaneSpec>{{65, 550e3, 40, 0}}, Layer::leo);
    VisibilityOptions vo;
    vo.horizon = 7200;
    for (const auto& el : els) {
        const auto ws = visibility_windows(u, el, vo);
        for (std::size_t w = 0; w < ws.size(); ++w) {
            CHECK(ws[w].start >= 0.0);
            CHECK(ws[w].end <= vo.horizon);
            CHECK(ws[w].start < ws[w].end);
            if (w > 0) CHECK(ws[w - 1].end < ws[w].start);
            CHECK(ws[w].currently_visible == (ws[w].start == 0.0));
        }
    }
}
