#include "satedge/instance_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace satedge {

using nlohmann::json;

namespace {

json path_json(const Path& p)
{
    return {{"id", p.id}, {"source", p.source}, {"destination", p.destination}, {"hops", p.hops}, {"length", p.length}};
}

Path path_from(const json& j)
{
    Path p;
    p.id = j.at("id").get<int>();
    p.source = j.at("source").get<int>();
    p.destination = j.at("destination").get<int>();
    p.hops = j.at("hops").get<std::vector<int>>();
    p.length = j.at("length").get<double>();
    return p;
}

} // namespace

std::string dump_instance(const ProblemInstance& inst)
{
    json doc;
    doc["format"] = "satedge-instance";
    doc["version"] = instance_format_version;
    doc["alpha1"] = inst.alpha1;
    doc["alpha2"] = inst.alpha2;
    doc["link"] = {{"carrier_frequency", inst.link.carrier_frequency},
                   {"rician_k", inst.link.rician_k},
                   {"noise_density_dbm_hz", inst.link.noise_density_dbm_hz},
                   {"kappa", inst.link.kappa},
                   {"energy_rate_basis",
                    inst.link.energy_rate_basis == EnergyRateBasis::per_rb ? "per_rb" : "allocated"}};
    json sats = json::array();
    for (const auto& s : inst.satellites)
        sats.push_back({{"id", s.id},
                        {"layer", std::string(to_string(s.layer))},
                        {"rb_count", s.rb_count},
                        {"rb_bandwidth", s.rb_bandwidth},
                        {"cpu_rate", s.cpu_rate},
                        {"occupied_fraction", s.occupied_fraction},
                        {"antenna_gain", s.antenna_gain}});
    doc["satellites"] = std::move(sats);
    json users = json::array();
    for (const auto& up : inst.users) {
        json u;
        u["user"] = {{"id", up.user.id},
                     {"latitude", up.user.latitude},
                     {"longitude", up.user.longitude},
                     {"altitude", up.user.altitude},
                     {"transmit_power", up.user.transmit_power},
                     {"antenna_gain", up.user.antenna_gain}};
        u["task"] = {{"bits", up.task.bits}, {"cycles", up.task.cycles}, {"deadline", up.task.deadline}};
        u["rho_max"] = up.rho_max;
        u["rho_fallback"] = up.rho_fallback;
        json budgets = json::array();
        for (const auto& b : up.budgets)
            budgets.push_back({{"satellite_id", b.satellite_id},
                               {"distance", b.distance},
                               {"channel_gain", b.channel_gain},
                               {"snr", b.snr},
                               {"per_rb_rate", b.per_rb_rate}});
        u["budgets"] = std::move(budgets);
        json windows = json::array();
        for (const auto& w : up.windows)
            windows.push_back({{"satellite_id", w.satellite_id},
                               {"start", w.start},
                               {"end", w.end},
                               {"currently_visible", w.currently_visible}});
        u["windows"] = std::move(windows);
        json off = json::array();
        for (const auto& c : up.offload) off.push_back({{"path", path_json(c.path)}, {"user_distance", c.user_distance}});
        u["offload"] = std::move(off);
        json fwd = json::array();
        for (const auto& c : up.forward) fwd.push_back({{"path", path_json(c.path)}, {"user_distance", c.user_distance}});
        u["forward"] = std::move(fwd);
        users.push_back(std::move(u));
    }
    doc["users"] = std::move(users);
    return doc.dump(1) + "\n";
}

ProblemInstance parse_instance(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("instance: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != "satedge-instance") throw ConfigError("instance: wrong format tag");
        if (doc.at("version").get<int>() != instance_format_version)
            throw ConfigError("instance: unsupported version " + doc.at("version").dump());
        ProblemInstance inst;
        inst.alpha1 = doc.at("alpha1").get<double>();
        inst.alpha2 = doc.at("alpha2").get<double>();
        const auto& l = doc.at("link");
        inst.link.carrier_frequency = l.at("carrier_frequency").get<double>();
        inst.link.rician_k = l.at("rician_k").get<double>();
        inst.link.noise_density_dbm_hz = l.at("noise_density_dbm_hz").get<double>();
        inst.link.kappa = l.at("kappa").get<double>();
        inst.link.energy_rate_basis =
            l.at("energy_rate_basis").get<std::string>() == "allocated" ? EnergyRateBasis::allocated : EnergyRateBasis::per_rb;
        for (const auto& s : doc.at("satellites")) {
            SatelliteResources r;
            r.id = s.at("id").get<int>();
            r.layer = layer_from_string(s.at("layer").get<std::string>());
            r.rb_count = s.at("rb_count").get<int>();
            r.rb_bandwidth = s.at("rb_bandwidth").get<double>();
            r.cpu_rate = s.at("cpu_rate").get<double>();
            r.occupied_fraction = s.at("occupied_fraction").get<double>();
            r.antenna_gain = s.at("antenna_gain").get<double>();
            inst.satellites.push_back(r);
        }
        for (const auto& u : doc.at("users")) {
            UserProblem up;
            const auto& gu = u.at("user");
            up.user.id = gu.at("id").get<int>();
            up.user.latitude = gu.at("latitude").get<double>();
            up.user.longitude = gu.at("longitude").get<double>();
            up.user.altitude = gu.at("altitude").get<double>();
            up.user.transmit_power = gu.at("transmit_power").get<double>();
            up.user.antenna_gain = gu.at("antenna_gain").get<double>();
            const auto& t = u.at("task");
            up.task.user_id = up.user.id;
            up.task.bits = t.at("bits").get<double>();
            up.task.cycles = t.at("cycles").get<double>();
            up.task.deadline = t.at("deadline").get<double>();
            up.rho_max = u.at("rho_max").get<double>();
            up.rho_fallback = u.at("rho_fallback").get<bool>();
            for (const auto& b : u.at("budgets")) {
                LinkBudget lb;
                lb.user_id = up.user.id;
                lb.satellite_id = b.at("satellite_id").get<int>();
                lb.distance = b.at("distance").get<double>();
                lb.channel_gain = b.at("channel_gain").get<double>();
                lb.snr = b.at("snr").get<double>();
                lb.per_rb_rate = b.at("per_rb_rate").get<double>();
                up.budgets.push_back(lb);
            }
            for (const auto& w : u.at("windows")) {
                VisibilityWindow vw;
                vw.user_id = up.user.id;
                vw.satellite_id = w.at("satellite_id").get<int>();
                vw.start = w.at("start").get<double>();
                vw.end = w.at("end").get<double>();
                vw.currently_visible = w.at("currently_visible").get<bool>();
                up.windows.push_back(vw);
            }
            for (const auto& c : u.at("offload"))
                up.offload.push_back({path_from(c.at("path")), c.at("user_distance").get<double>()});
            for (const auto& c : u.at("forward"))
                up.forward.push_back({path_from(c.at("path")), c.at("user_distance").get<double>()});
            inst.users.push_back(std::move(up));
        }
        std::sort(inst.satellites.begin(), inst.satellites.end(),
                  [](const SatelliteResources& a, const SatelliteResources& b) { return a.id < b.id; });
        return inst;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("instance: ") + e.what());
    }
}

void save_instance(const ProblemInstance& inst, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << dump_instance(inst);
    if (!out) throw std::runtime_error("cannot write " + path);
}

ProblemInstance load_instance(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_instance(ss.str());
}

std::string dump_solution(const Solution& sol)
{
    json doc;
    doc["format"] = "satedge-solution";
    doc["version"] = instance_format_version;
    doc["status"] = std::string(to_string(sol.status));
    doc["objective"] = sol.objective;
    doc["bound"] = sol.bound;
    doc["nodes"] = sol.nodes;
    json users = json::array();
    for (const auto& u : sol.users)
        users.push_back(
            {{"i", u.i}, {"y", u.y}, {"b", u.b}, {"f", u.f}, {"theta", u.theta}, {"phi", u.phi}});
    doc["users"] = std::move(users);
    return doc.dump(1) + "\n";
}

Solution parse_solution(std::string_view text)
{
    try {
        const json doc = json::parse(text);
        Solution sol;
        const auto status = doc.at("status").get<std::string>();
        if (status == "optimal") sol.status = SolveStatus::optimal;
        else if (status == "infeasible") sol.status = SolveStatus::infeasible;
        else if (status == "gap_limit") sol.status = SolveStatus::gap_limit;
        else if (status == "time_limit") sol.status = SolveStatus::time_limit;
        else throw ConfigError("solution: unknown status " + status);
        sol.objective = doc.at("objective").get<double>();
        sol.bound = doc.at("bound").get<double>();
        sol.nodes = doc.at("nodes").get<long>();
        for (const auto& u : doc.at("users")) {
            UserSolution us;
            us.i = u.at("i").get<std::vector<int>>();
            us.y = u.at("y").get<std::vector<int>>();
            us.b = u.at("b").get<std::vector<double>>();
            us.f = u.at("f").get<std::vector<double>>();
            us.theta = u.at("theta").get<std::vector<double>>();
            us.phi = u.at("phi").get<std::vector<double>>();
            sol.users.push_back(std::move(us));
        }
        return sol;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("solution: ") + e.what());
    }
}

} // namespace satedge
