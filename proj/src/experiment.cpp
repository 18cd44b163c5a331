#include "satedge/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "satedge/constants.hpp"
#include "satedge/instance_io.hpp"

namespace satedge {

std::string_view to_string(ScenarioMode m)
{
    switch (m) {
    case ScenarioMode::leo_only: return "leo_only";
    case ScenarioMode::meo_only: return "meo_only";
    case ScenarioMode::hybrid: return "hybrid";
    }
    return "unknown";
}

ScenarioMode mode_from_string(std::string_view s)
{
    if (s == "leo_only") return ScenarioMode::leo_only;
    if (s == "meo_only") return ScenarioMode::meo_only;
    if (s == "hybrid") return ScenarioMode::hybrid;
    throw ConfigError("unknown scenario mode '" + std::string(s) + "'");
}

ExperimentConfig default_experiment_config()
{
    ExperimentConfig c;
    for (int p = 0; p < 4; ++p) c.constellation.leo_planes.push_back({65.0, 550e3, 40, 90.0 * p});
    const double meo_incl[3] = {86.0, 88.0, 90.0};
    for (int p = 0; p < 3; ++p) c.constellation.meo_planes.push_back({meo_incl[p], 2100e3, 10, 60.0 * p});
    c.candidates.max_sources_per_layer = 2;
    c.candidates.destinations_per_source = 2;
    c.candidates.cross_layer_destinations = 1;
    c.candidates.forward_destinations = 1;
    c.solver.rel_gap_tol = 1e-3;
    c.solver.time_limit = 30.0;
    return c;
}

void validate(const ExperimentConfig& c)
{
    auto fail = [](const std::string& field, const std::string& why) { throw ConfigError(field + ": " + why); };
    if (c.modes.empty()) fail("modes", "at least one mode required");
    if (c.thresholds.empty()) fail("thresholds", "at least one threshold required");
    for (std::size_t i = 0; i < c.thresholds.size(); ++i) {
        if (c.thresholds[i] < 0.0 || c.thresholds[i] >= 90.0) fail("thresholds", "must lie in [0, 90)");
        if (i > 0 && !(c.thresholds[i] > c.thresholds[i - 1])) fail("thresholds", "must be strictly increasing");
    }
    if (c.realizations < 1) fail("realizations", "must be at least 1");
    if (!(c.poisson_rate > 0.0)) fail("poisson_rate", "must be positive");
    if (c.user_count < 1) fail("user_count", "must be at least 1");
    if (!(c.region_radius >= 0.0)) fail("region_radius", "must be non-negative");
    if (c.task_bits.empty()) fail("task_bits", "at least one size required");
    for (double b : c.task_bits)
        if (!(b > 0.0)) fail("task_bits", "sizes must be positive");
    if (!(c.cycles_per_bit > 0.0)) fail("cycles_per_bit", "must be positive");
    if (!(c.deadline > 0.0)) fail("deadline", "must be positive");
    if (c.alpha1 < 0.0 || c.alpha1 > 1.0) fail("alpha1", "must lie in [0, 1]");
    if (c.alpha2 < 0.0 || c.alpha2 > 1.0) fail("alpha2", "must lie in [0, 1]");
    if (!(c.horizon > 0.0)) fail("horizon", "must be positive");
    if (!(c.visibility_step > 0.0) || c.visibility_step > max_visibility_step)
        fail("visibility_step", "must lie in (0, 60]");
    if (!(c.visibility_tolerance > 0.0)) fail("visibility_tolerance", "must be positive");
    if (c.constellation.tle_file.empty() && c.constellation.leo_planes.empty() && c.constellation.meo_planes.empty())
        fail("constellation", "no satellites configured");
    if (c.workers < 1) fail("workers", "must be at least 1");
    if (!(c.solver.rel_gap_tol > 0.0)) fail("solver.rel_gap_tol", "must be positive");
    if (!(c.solver.abs_feas_tol > 0.0)) fail("solver.abs_feas_tol", "must be positive");
    if (c.solver.max_bb_nodes < 1) fail("solver.max_bb_nodes", "must be at least 1");
    if (!(c.solver.time_limit >= 0.0)) fail("solver.time_limit_s", "must be non-negative (0 disables)");
    if (!(c.p2.epsilon1 > 0.0)) fail("p2.epsilon1", "must be positive");
    if (!(c.p2.epsilon2 > 0.0)) fail("p2.epsilon2", "must be positive");
    if (c.p2.big_m1 != 0.0 && c.p2.big_m1 < 1.0 / c.p2.epsilon1) fail("p2.big_m1", "must be at least 1/epsilon1");
    if (c.p2.big_m2 != 0.0 && c.p2.big_m2 < 1.0 / c.p2.epsilon2) fail("p2.big_m2", "must be at least 1/epsilon2");
    if (c.candidates.max_sources_per_layer < 1) fail("candidates.max_sources_per_layer", "must be at least 1");
}

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::initializer_list<std::uint32_t> keys)
{
    std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    words.insert(words.end(), keys.begin(), keys.end());
    std::seed_seq ss(words.begin(), words.end());
    return std::mt19937_64(ss);
}

constexpr std::uint32_t tag_users = 0x75736572;
constexpr std::uint32_t tag_realization = 0x7265616c;
constexpr std::uint32_t tag_fading = 0x66616465;

} // namespace

std::vector<GroundUser> place_users(const ExperimentConfig& c)
{
    auto rng = stream(c.seed, {tag_users});
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double lat1 = c.center_latitude * deg_to_rad;
    const double lon1 = c.center_longitude * deg_to_rad;
    std::vector<GroundUser> out;
    for (int u = 0; u < c.user_count; ++u) {
        const double bearing = 2.0 * pi * unit(rng);
        const double delta = c.region_radius / earth_radius * std::sqrt(unit(rng));
        const double lat2 =
            std::asin(std::sin(lat1) * std::cos(delta) + std::cos(lat1) * std::sin(delta) * std::cos(bearing));
        const double lon2 = lon1 + std::atan2(std::sin(bearing) * std::sin(delta) * std::cos(lat1),
                                              std::cos(delta) - std::sin(lat1) * std::sin(lat2));
        GroundUser g;
        g.id = u;
        g.latitude = lat2 * rad_to_deg;
        g.longitude = std::remainder(lon2 * rad_to_deg, 360.0);
        g.transmit_power = dbm_to_watts(c.user_power_dbm);
        g.antenna_gain = c.user_gain_dbi;
        out.push_back(g);
    }
    return out;
}

ActiveSample sample_active_users(const ExperimentConfig& c, std::mt19937_64& rng)
{
    ActiveSample s;
    std::poisson_distribution<int> poisson(c.poisson_rate);
    s.drawn = poisson(rng);
    const int n = std::min(s.drawn, c.user_count);
    std::vector<int> pool(c.user_count);
    for (int u = 0; u < c.user_count; ++u) pool[u] = u;
    for (int i = 0; i < n; ++i) {
        std::uniform_int_distribution<int> pick(i, c.user_count - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    s.users.assign(pool.begin(), pool.begin() + n);
    std::sort(s.users.begin(), s.users.end());
    std::uniform_int_distribution<std::size_t> size_pick(0, c.task_bits.size() - 1);
    for (int u : s.users) {
        Task t;
        t.user_id = u;
        t.bits = c.task_bits[size_pick(rng)];
        t.cycles = t.bits * c.cycles_per_bit;
        t.deadline = c.deadline;
        s.tasks.push_back(t);
    }
    return s;
}

const MetricsRow* MetricsTable::find(ScenarioMode mode, double threshold) const
{
    for (const auto& r : rows)
        if (r.mode == mode && r.threshold == threshold) return &r;
    return nullptr;
}

Constellation build_constellation(const ExperimentConfig& cfg)
{
    Constellation ctx;
    std::vector<OrbitalElements> leo;
    if (!cfg.constellation.tle_file.empty()) {
        std::ifstream in(cfg.constellation.tle_file);
        if (!in) throw ConfigError("constellation.tle_file: cannot read " + cfg.constellation.tle_file);
        std::stringstream ss;
        ss << in.rdbuf();
        auto parsed = parse_tle(ss.str());
        if (parsed.elements.empty()) throw ConfigError("constellation.tle_file: no valid records");
        double origin = 0.0;
        for (const auto& e : parsed.elements) origin = std::max(origin, e.epoch);
        ctx.earth_angle = gmst_at(origin);
        GroundUser center;
        center.latitude = cfg.center_latitude;
        center.longitude = cfg.center_longitude;
        const Vec3 site = user_position(center);
        std::vector<std::pair<double, OrbitalElements>> ranked;
        for (auto e : parsed.elements) {
            e.epoch -= origin;
            e.layer = Layer::leo;
            const double d = (propagate(e, 0.0, ctx.earth_angle).position - site).norm();
            ranked.push_back({d, e});
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        if (static_cast<int>(ranked.size()) > cfg.constellation.tle_nearest) ranked.resize(cfg.constellation.tle_nearest);
        for (auto& [d, e] : ranked) leo.push_back(e);
        for (std::size_t i = 0; i < leo.size(); ++i) leo[i].id = static_cast<int>(i);
    } else {
        leo = synthesize_constellation(cfg.constellation.leo_planes, Layer::leo, 0, "leo");
    }
    auto meo = synthesize_constellation(cfg.constellation.meo_planes, Layer::meo, static_cast<int>(leo.size()), "meo");
    for (auto& e : leo) {
        ctx.elements.push_back(e);
        SatelliteResources r = cfg.constellation.leo;
        r.id = e.id;
        r.layer = Layer::leo;
        ctx.resources.push_back(r);
    }
    for (auto& e : meo) {
        ctx.elements.push_back(e);
        SatelliteResources r = cfg.constellation.meo;
        r.id = e.id;
        r.layer = Layer::meo;
        ctx.resources.push_back(r);
    }
    ctx.jitter_period = !leo.empty() ? leo.front().period() : (!meo.empty() ? meo.front().period() : 0.0);
    return ctx;
}

namespace {

struct Context {
    const ExperimentConfig* config = nullptr;
    std::vector<OrbitalElements> elements;
    std::vector<SatelliteResources> resources;
    std::vector<GroundUser> population;
    double earth_angle = 0.0;
    double jitter_period = 0.0;
};

Context make_context(const ExperimentConfig& cfg)
{
    Context ctx;
    ctx.config = &cfg;
    ctx.population = place_users(cfg);
    Constellation c = build_constellation(cfg);
    ctx.elements = std::move(c.elements);
    ctx.resources = std::move(c.resources);
    ctx.earth_angle = c.earth_angle;
    ctx.jitter_period = c.jitter_period;
    return ctx;
}

bool in_mode(ScenarioMode mode, Layer layer)
{
    return mode == ScenarioMode::hybrid || (mode == ScenarioMode::leo_only) == (layer == Layer::leo);
}

std::vector<RealizationRecord> run_realization(const Context& ctx, int r)
{
    const auto& cfg = *ctx.config;
    auto rng = stream(cfg.seed, {tag_realization, static_cast<std::uint32_t>(r)});
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double t0 = cfg.jitter_epoch ? unit(rng) * ctx.jitter_period : 0.0;
    const ActiveSample sample = sample_active_users(cfg, rng);
    const double angle = ctx.earth_angle + earth_rotation_rate * t0;

    std::vector<OrbitalElements> shifted = ctx.elements;
    for (auto& e : shifted) e.epoch -= t0;
    std::vector<SatelliteState> states;
    for (const auto& e : shifted) states.push_back(propagate(e, 0.0, angle));

    const FadingSource fading = [&](int user, int sat) {
        auto g = stream(cfg.seed, {tag_fading, static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(user),
                                   static_cast<std::uint32_t>(sat)});
        return rician_power_sample(cfg.link.rician_k, g);
    };

    // windows[threshold][active user] over every satellite
    std::vector<std::vector<std::vector<VisibilityWindow>>> windows(cfg.thresholds.size());
    for (std::size_t ti = 0; ti < cfg.thresholds.size(); ++ti) {
        VisibilityOptions vo;
        vo.threshold = cfg.thresholds[ti];
        vo.horizon = cfg.horizon;
        vo.step = cfg.visibility_step;
        vo.tolerance = cfg.visibility_tolerance;
        vo.earth_angle_at_origin = angle;
        for (int u : sample.users) {
            std::vector<VisibilityWindow> w;
            for (const auto& e : shifted) {
                auto ws = visibility_windows(ctx.population[u], e, vo);
                w.insert(w.end(), ws.begin(), ws.end());
            }
            windows[ti].push_back(std::move(w));
        }
    }

    // single-layer modes first so their assignments can seed the hybrid search
    std::vector<ScenarioMode> order = cfg.modes;
    std::stable_partition(order.begin(), order.end(), [](ScenarioMode m) { return m != ScenarioMode::hybrid; });
    std::vector<std::vector<std::pair<ProblemInstance, Solution>>> seeds(cfg.thresholds.size());

    std::vector<RealizationRecord> out;
    for (ScenarioMode mode : order) {
        Snapshot snap;
        std::vector<Layer> layers;
        std::set<int> members;
        for (std::size_t s = 0; s < states.size(); ++s) {
            if (!in_mode(mode, ctx.resources[s].layer)) continue;
            snap.states.push_back(states[s]);
            snap.resources.push_back(ctx.resources[s]);
            layers.push_back(ctx.resources[s].layer);
            members.insert(ctx.resources[s].id);
        }
        if (!snap.states.empty()) {
            snap.graph = build_graph(snap.states, layers, cfg.link_rule);
            snap.paths = all_pairs_shortest_paths(snap.graph);
        }
        for (std::size_t ti = 0; ti < cfg.thresholds.size(); ++ti) {
            const auto t_start = std::chrono::steady_clock::now();
            std::vector<ActiveUser> active;
            for (std::size_t a = 0; a < sample.users.size(); ++a) {
                ActiveUser au;
                au.user = ctx.population[sample.users[a]];
                au.task = sample.tasks[a];
                for (const auto& w : windows[ti][a])
                    if (members.count(w.satellite_id)) au.windows.push_back(w);
                active.push_back(std::move(au));
            }
            AssemblyOptions ao;
            ao.candidates = cfg.candidates;
            ao.link = cfg.link;
            ao.alpha1 = cfg.alpha1;
            ao.alpha2 = cfg.alpha2;
            const ProblemInstance inst = assemble_instance(snap, active, fading, ao);
            if (!cfg.archive_dir.empty()) {
                std::filesystem::create_directories(cfg.archive_dir);
                std::ostringstream name;
                name << cfg.archive_dir << "/r" << r << "_" << to_string(mode) << "_" << cfg.thresholds[ti] << ".json";
                save_instance(inst, name.str());
            }
            const ConvexMIProgram prog = build_p2(inst, cfg.p2);
            std::vector<Fixings> starts;
            if (mode == ScenarioMode::hybrid)
                for (const auto& [from, s] : seeds[ti])
                    if (auto f = transfer_assignment(from, s, inst, prog); !f.empty()) starts.push_back(std::move(f));
            Solution sol;
            if (cfg.trace) {
                std::ostringstream log;
                log << "# realization=" << r << " mode=" << to_string(mode) << " threshold=" << cfg.thresholds[ti]
                    << "\n";
                sol = branch_and_bound(prog, cfg.solver, &log, nullptr, starts);
                cfg.trace(log.str());
            } else {
                sol = branch_and_bound(prog, cfg.solver, nullptr, nullptr, starts);
            }
            if (mode != ScenarioMode::hybrid) seeds[ti].emplace_back(inst, sol);
            const RepairResult rep = audit_and_repair(inst, prog, sol, cfg.solver);
            const Metrics met = evaluate_solution(inst, rep.final);

            RealizationRecord rec;
            rec.mode = mode;
            rec.threshold = cfg.thresholds[ti];
            rec.realization = r;
            rec.active = met.active_users;
            rec.admitted = met.admitted;
            rec.blocked_by_coverage = met.blocked_by_coverage;
            rec.admission_rate = met.admission_rate;
            rec.average_delay = met.average_delay;
            rec.average_energy = met.average_energy;
            rec.objective = sol.objective;
            rec.audited_objective = met.objective;
            rec.status = sol.status;
            rec.nodes = sol.nodes;
            rec.audit_feasible = rep.audit.feasible();
            rec.audit_violations = static_cast<int>(rep.audit.violations.size());
            rec.exact_resolve = rep.exact_resolve;
            rec.demoted = rep.demoted;
            for (const auto& us : sol.users)
                for (std::size_t k = 0; k < us.i.size(); ++k) {
                    if (us.i[k] == 1) {
                        const double tb = 1.0 / (us.b[k] + prog.epsilon1);
                        const double tf = 1.0 / (us.f[k] + prog.epsilon2);
                        rec.reciprocal_error = std::max(
                            {rec.reciprocal_error, std::abs(us.theta[k] - tb) / tb, std::abs(us.phi[k] - tf) / tf});
                    } else {
                        rec.inactive_residual = std::max({rec.inactive_residual, std::abs(us.b[k]), std::abs(us.f[k]),
                                                          std::abs(us.theta[k]), std::abs(us.phi[k])});
                    }
                }
            rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
            out.push_back(std::move(rec));
        }
    }
    auto rank = [&](ScenarioMode m) { return std::find(cfg.modes.begin(), cfg.modes.end(), m) - cfg.modes.begin(); };
    std::stable_sort(out.begin(), out.end(),
                     [&](const RealizationRecord& a, const RealizationRecord& b) { return rank(a.mode) < rank(b.mode); });
    return out;
}

struct Moments {
    std::optional<double> mean, std;
};

Moments moments(const std::vector<double>& v)
{
    Moments m;
    if (v.empty()) return m;
    double s = 0.0;
    for (double x : v) s += x;
    const double mean = s / v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    m.mean = mean;
    m.std = v.size() > 1 ? std::sqrt(ss / (v.size() - 1)) : 0.0;
    return m;
}

} // namespace

MetricsTable aggregate(const ExperimentConfig& cfg, const std::vector<RealizationRecord>& records)
{
    MetricsTable t;
    for (ScenarioMode mode : cfg.modes)
        for (double thr : cfg.thresholds) {
            // sort keys so the reduction does not depend on record order
            std::vector<const RealizationRecord*> sel;
            for (const auto& r : records)
                if (r.mode == mode && r.threshold == thr) sel.push_back(&r);
            std::sort(sel.begin(), sel.end(),
                      [](const RealizationRecord* a, const RealizationRecord* b) { return a->realization < b->realization; });
            MetricsRow row;
            row.mode = mode;
            row.threshold = thr;
            std::vector<double> adm, delay, energy;
            for (const auto* r : sel) {
                ++row.n_realizations;
                row.blocked_by_coverage += r->blocked_by_coverage;
                if (r->status == SolveStatus::optimal) ++row.status_optimal;
                else if (r->status == SolveStatus::gap_limit || r->status == SolveStatus::time_limit) ++row.status_limit;
                if (r->admission_rate) adm.push_back(*r->admission_rate);
                if (r->average_delay) delay.push_back(*r->average_delay);
                if (r->average_energy) energy.push_back(*r->average_energy);
            }
            const auto a = moments(adm), d = moments(delay), e = moments(energy);
            row.admission_rate_mean = a.mean;
            row.admission_rate_std = a.std;
            row.avg_delay_mean = d.mean;
            row.avg_delay_std = d.std;
            row.avg_energy_mean = e.mean;
            row.avg_energy_std = e.std;
            t.rows.push_back(row);
        }
    return t;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ProgressCallback& progress)
{
    validate(cfg);
    const auto t_start = std::chrono::steady_clock::now();
    const Context ctx = make_context(cfg);
    std::vector<std::vector<RealizationRecord>> per(cfg.realizations);
    std::atomic<int> next{0};
    std::atomic<int> done{0};
    std::mutex progress_mutex;
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= cfg.realizations) return;
            try {
                per[r] = run_realization(ctx, r);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(cfg.realizations);
                return;
            }
            const int d = ++done;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(d, cfg.realizations);
            }
        }
    };
    const int nw = std::min(cfg.workers, cfg.realizations);
    if (nw <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    ExperimentResult res;
    for (auto& v : per)
        for (auto& rec : v) res.records.push_back(std::move(rec));
    res.table = aggregate(cfg, res.records);
    res.table.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
}

} // namespace satedge
