#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "satedge/constants.hpp"
#include "satedge/experiment.hpp"
#include "support/testkit.hpp"

using namespace satedge;

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config_error(const std::string& text)
{
    try {
        parse_experiment_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

RealizationRecord record(ScenarioMode m, double thr, int r, double adm, std::optional<double> delay)
{
    RealizationRecord rec;
    rec.mode = m;
    rec.threshold = thr;
    rec.realization = r;
    rec.admission_rate = adm;
    rec.average_delay = delay;
    rec.average_energy = delay ? std::optional<double>(0.5 * *delay) : std::nullopt;
    return rec;
}

} // namespace

TEST_CASE("active users: Poisson mean and seed determinism")
{
    ExperimentConfig c = default_experiment_config();
    c.user_count = 1000;
    c.poisson_rate = 5.0;
    std::mt19937_64 rng(99);
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_active_users(c, rng).drawn;
    CHECK(std::abs(sum / n - 5.0) < 4.0 * std::sqrt(5.0 / n));

    c.user_count = 3;
    std::mt19937_64 a(5), b(5);
    for (int i = 0; i < 200; ++i) {
        const auto sa = sample_active_users(c, a);
        const auto sb = sample_active_users(c, b);
        CHECK(sa.users == sb.users);
        CHECK(static_cast<int>(sa.users.size()) <= 3);
        CHECK(std::is_sorted(sa.users.begin(), sa.users.end()));
        CHECK(std::adjacent_find(sa.users.begin(), sa.users.end()) == sa.users.end());
        for (const auto& t : sa.tasks) {
            CHECK((t.bits == 1e6 || t.bits == 2e6));
            CHECK(t.cycles == 1000.0 * t.bits);
        }
    }
}

TEST_CASE("users: placed inside the region")
{
    const auto c = default_experiment_config();
    const auto users = place_users(c);
    CHECK(static_cast<int>(users.size()) == c.user_count);
    GroundUser center;
    center.latitude = c.center_latitude;
    center.longitude = c.center_longitude;
    const Vec3 p0 = user_position(center);
    for (const auto& u : users) {
        const double ang = std::acos(std::clamp(user_position(u).normalized().dot(p0.normalized()), -1.0, 1.0));
        CHECK(ang * earth_radius <= c.region_radius * 1.001);
    }
}

TEST_CASE("config: rejection names the field")
{
    CHECK(config_error(R"({"realizations": 0})").find("realizations") != std::string::npos);
    CHECK(config_error(R"({"thresholds": [10, 95]})").find("thresholds") != std::string::npos);
    CHECK(config_error(R"({"poisson_rate": "five"})").find("poisson_rate") != std::string::npos);
    CHECK(config_error(R"({"bogus": 1})").find("bogus") != std::string::npos);
    CHECK(config_error(R"({"solver": {"time_limit_s": -1}})").find("solver") != std::string::npos);
    CHECK(config_error(R"({"constellation": {"leo_resources": {"rb_count": 0}}})").find("rb_count") !=
          std::string::npos);
    CHECK(config_error(R"({"modes": ["leo_only", "geo"]})").find("modes") != std::string::npos);
    CHECK(config_error("{not json").find("config") != std::string::npos);
    CHECK(config_error(R"({"realizations": 3, "thresholds": [10, 50]})").empty());
}

TEST_CASE("aggregate: means, sample std, empty-mean convention, order invariance")
{
    ExperimentConfig c;
    c.modes = {ScenarioMode::leo_only, ScenarioMode::hybrid};
    c.thresholds = {10, 50};
    std::vector<RealizationRecord> recs;
    recs.push_back(record(ScenarioMode::leo_only, 10, 0, 1.0, 2.0));
    recs.push_back(record(ScenarioMode::leo_only, 10, 1, 0.5, 1.0));
    recs.push_back(record(ScenarioMode::leo_only, 10, 2, 0.0, std::nullopt));
    recs.push_back(record(ScenarioMode::hybrid, 10, 0, 1.0, 1.5));
    recs.push_back(record(ScenarioMode::leo_only, 50, 0, 0.0, std::nullopt));

    const auto t = aggregate(c, recs);
    REQUIRE(t.rows.size() == 4);
    const auto* r = t.find(ScenarioMode::leo_only, 10);
    REQUIRE(r);
    CHECK(r->n_realizations == 3);
    CHECK(*r->admission_rate_mean == doctest::Approx(0.5));
    CHECK(*r->admission_rate_std == doctest::Approx(0.5));
    CHECK(*r->avg_delay_mean == doctest::Approx(1.5));
    CHECK(*r->avg_delay_std == doctest::Approx(std::sqrt(0.5)));

    const auto* h = t.find(ScenarioMode::hybrid, 10);
    REQUIRE(h);
    CHECK(*h->admission_rate_mean == 1.0);
    CHECK(*h->admission_rate_std == 0.0);

    const auto* z = t.find(ScenarioMode::leo_only, 50);
    CHECK_FALSE(z->avg_delay_mean.has_value());
    CHECK(t.find(ScenarioMode::hybrid, 50)->n_realizations == 0);
    CHECK(t.find(ScenarioMode::meo_only, 10) == nullptr);

    std::mt19937_64 rng(3);
    for (int i = 0; i < 10; ++i) {
        auto shuffled = recs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(aggregate(c, shuffled).rows == t.rows);
    }
}

TEST_CASE("csv: round trip, header and empty table")
{
    ExperimentConfig c;
    std::vector<RealizationRecord> recs;
    for (int r = 0; r < 3; ++r)
        for (ScenarioMode m : c.modes)
            for (double thr : c.thresholds)
                recs.push_back(record(m, thr, r, 0.1 * (r + 1), r == 0 ? std::nullopt : std::optional<double>(0.3 * r + thr / 7.0)));
    const auto t = aggregate(c, recs);
    const std::string csv = to_csv(t);
    CHECK(csv.rfind(csv_header, 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 16);
    const auto back = parse_csv(csv);
    CHECK(back.rows == t.rows);
    CHECK(to_csv(back) == csv);

    CHECK_THROWS_AS(emit_csv(MetricsTable{}, "unused.csv"), std::invalid_argument);
    CHECK_THROWS_AS(emit_csv(t, "/nonexistent-dir/x.csv"), std::runtime_error);
}

TEST_CASE("experiment: small run is deterministic, worker-independent and paired-dominant")
{
    auto cfg = testkit::small_config(3);
    const auto one = run_experiment(cfg);
    cfg.workers = 2;
    const auto two = run_experiment(cfg);
    const std::string csv = to_csv(one.table);
    CHECK(to_csv(two.table) == csv);
    CHECK(one.table.rows.size() == cfg.modes.size() * cfg.thresholds.size());

    std::map<std::pair<int, double>, std::map<ScenarioMode, double>> obj;
    for (const auto& r : one.records) {
        CHECK(r.audit_feasible);
        CHECK(r.admitted <= r.active);
        CHECK(r.inactive_residual <= 1e-6);
        obj[{r.realization, r.threshold}][r.mode] = r.objective;
    }
    for (const auto& [key, m] : obj)
        CHECK(m.at(ScenarioMode::hybrid) >= std::max(m.at(ScenarioMode::leo_only), m.at(ScenarioMode::meo_only)) - 1e-6);

    const std::string golden = read_file(SATEDGE_TEST_DATA "/small_run.csv");
    if (golden.empty()) MESSAGE("golden file missing");
    CHECK(csv == golden);
}
