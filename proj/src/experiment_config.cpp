#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "satedge/experiment.hpp"

namespace satedge {

using nlohmann::json;

namespace {

/// Reads the keys of one JSON object and rejects anything it was not asked for.
class Section {
public:
    Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path))
    {
        if (!obj_.is_object()) throw ConfigError(where("") + ": expected an object");
    }

    template <class T>
    void read(const char* key, T& dst)
    {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) return;
        try {
            dst = it->template get<T>();
        } catch (const json::exception&) {
            throw ConfigError(where(key) + ": wrong type (" + std::string(it->type_name()) + ")");
        }
    }

    const json* child(const char* key)
    {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    std::string where(const std::string& key) const
    {
        if (path_.empty()) return key;
        return key.empty() ? path_ : path_ + "." + key;
    }

    void finish() const
    {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown key");
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<PlaneSpec> read_planes(const json& arr, const std::string& path)
{
    if (!arr.is_array()) throw ConfigError(path + ": expected an array");
    std::vector<PlaneSpec> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        Section s(arr[i], path + "[" + std::to_string(i) + "]");
        PlaneSpec p;
        s.read("inclination_deg", p.inclination);
        s.read("altitude_m", p.altitude);
        s.read("count", p.count);
        s.read("raan_deg", p.raan);
        s.finish();
        if (p.count < 1) throw ConfigError(s.where("count") + ": must be at least 1");
        if (p.altitude <= min_synthesis_altitude) throw ConfigError(s.where("altitude_m") + ": must exceed 200 km");
        out.push_back(p);
    }
    return out;
}

void read_resources(const json& j, const std::string& path, SatelliteResources& r)
{
    Section s(j, path);
    s.read("rb_count", r.rb_count);
    s.read("rb_bandwidth_hz", r.rb_bandwidth);
    s.read("cpu_rate_hz", r.cpu_rate);
    s.read("occupied_fraction", r.occupied_fraction);
    s.read("antenna_gain_dbi", r.antenna_gain);
    s.finish();
    if (r.rb_count < 1) throw ConfigError(s.where("rb_count") + ": must be at least 1");
    if (!(r.cpu_rate > 0.0)) throw ConfigError(s.where("cpu_rate_hz") + ": must be positive");
    if (r.occupied_fraction < 0.0 || r.occupied_fraction >= 1.0)
        throw ConfigError(s.where("occupied_fraction") + ": must lie in [0, 1)");
}

} // namespace

ExperimentConfig parse_experiment_config(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    ExperimentConfig c = default_experiment_config();
    Section top(doc, "");

    std::vector<std::string> modes;
    top.read("modes", modes);
    if (!modes.empty()) {
        c.modes.clear();
        for (const auto& m : modes) {
            try {
                c.modes.push_back(mode_from_string(m));
            } catch (const ConfigError&) {
                throw ConfigError("modes: unknown mode '" + m + "'");
            }
        }
    }
    top.read("thresholds", c.thresholds);
    top.read("realizations", c.realizations);
    top.read("poisson_rate", c.poisson_rate);
    top.read("user_count", c.user_count);
    top.read("center_latitude", c.center_latitude);
    top.read("center_longitude", c.center_longitude);
    top.read("region_radius_m", c.region_radius);
    top.read("task_bits", c.task_bits);
    top.read("cycles_per_bit", c.cycles_per_bit);
    top.read("deadline_s", c.deadline);
    top.read("user_power_dbm", c.user_power_dbm);
    top.read("user_gain_dbi", c.user_gain_dbi);
    top.read("alpha1", c.alpha1);
    top.read("alpha2", c.alpha2);
    top.read("seed", c.seed);
    top.read("jitter_epoch", c.jitter_epoch);
    top.read("horizon_s", c.horizon);
    top.read("visibility_step_s", c.visibility_step);
    top.read("visibility_tolerance_s", c.visibility_tolerance);
    top.read("workers", c.workers);
    top.read("archive_dir", c.archive_dir);

    if (const json* j = top.child("constellation")) {
        Section s(*j, "constellation");
        if (const json* p = s.child("leo_planes")) c.constellation.leo_planes = read_planes(*p, s.where("leo_planes"));
        if (const json* p = s.child("meo_planes")) c.constellation.meo_planes = read_planes(*p, s.where("meo_planes"));
        s.read("tle_file", c.constellation.tle_file);
        s.read("tle_nearest", c.constellation.tle_nearest);
        if (const json* r = s.child("leo_resources")) read_resources(*r, s.where("leo_resources"), c.constellation.leo);
        if (const json* r = s.child("meo_resources")) read_resources(*r, s.where("meo_resources"), c.constellation.meo);
        s.finish();
    }
    if (const json* j = top.child("link_rule")) {
        Section s(*j, "link_rule");
        std::string kind = c.link_rule.kind == LinkRule::Kind::range ? "range" : "nearest_k";
        s.read("kind", kind);
        if (kind == "range") c.link_rule.kind = LinkRule::Kind::range;
        else if (kind == "nearest_k") c.link_rule.kind = LinkRule::Kind::nearest_k;
        else throw ConfigError("link_rule.kind: expected nearest_k or range");
        s.read("neighbors", c.link_rule.neighbors);
        s.read("max_isl_range_m", c.link_rule.max_isl_range);
        s.finish();
    }
    if (const json* j = top.child("candidates")) {
        Section s(*j, "candidates");
        s.read("max_sources_per_layer", c.candidates.max_sources_per_layer);
        s.read("destinations_per_source", c.candidates.destinations_per_source);
        s.read("cross_layer_destinations", c.candidates.cross_layer_destinations);
        s.read("forward_destinations", c.candidates.forward_destinations);
        s.finish();
    }
    if (const json* j = top.child("link")) {
        Section s(*j, "link");
        s.read("carrier_frequency_hz", c.link.carrier_frequency);
        s.read("rician_k", c.link.rician_k);
        s.read("noise_density_dbm_hz", c.link.noise_density_dbm_hz);
        s.read("kappa", c.link.kappa);
        std::string basis = c.link.energy_rate_basis == EnergyRateBasis::per_rb ? "per_rb" : "allocated";
        s.read("energy_rate_basis", basis);
        if (basis == "per_rb") c.link.energy_rate_basis = EnergyRateBasis::per_rb;
        else if (basis == "allocated") c.link.energy_rate_basis = EnergyRateBasis::allocated;
        else throw ConfigError("link.energy_rate_basis: expected per_rb or allocated");
        s.finish();
    }
    if (const json* j = top.child("p2")) {
        Section s(*j, "p2");
        s.read("epsilon1", c.p2.epsilon1);
        s.read("epsilon2", c.p2.epsilon2);
        s.read("big_m1", c.p2.big_m1);
        s.read("big_m2", c.p2.big_m2);
        s.read("perspective", c.p2.perspective);
        s.finish();
    }
    if (const json* j = top.child("solver")) {
        Section s(*j, "solver");
        s.read("rel_gap_tol", c.solver.rel_gap_tol);
        s.read("abs_feas_tol", c.solver.abs_feas_tol);
        s.read("max_bb_nodes", c.solver.max_bb_nodes);
        s.read("time_limit_s", c.solver.time_limit);
        std::string rule = c.solver.branching == BranchingRule::pseudo_cost ? "pseudo_cost" : "most_fractional";
        s.read("branching", rule);
        if (rule == "most_fractional") c.solver.branching = BranchingRule::most_fractional;
        else if (rule == "pseudo_cost") c.solver.branching = BranchingRule::pseudo_cost;
        else throw ConfigError("solver.branching: expected most_fractional or pseudo_cost");
        s.read("root_rounding", c.solver.root_rounding);
        if (const json* e = s.child("engine")) {
            Section es(*e, "solver.engine");
            es.read("gap_tolerance", c.solver.engine.gap_tolerance);
            es.read("relative_gap_tolerance", c.solver.engine.relative_gap_tolerance);
            es.read("max_iterations", c.solver.engine.max_iterations);
            es.finish();
        }
        s.finish();
    }
    top.finish();
    validate(c);
    return c;
}

ExperimentConfig load_experiment_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(ss.str());
}

} // namespace satedge
