#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>

#include "satedge/experiment.hpp"
#include "satedge/instance_io.hpp"
#include "satedge/micp_solver.hpp"

using namespace satedge;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string trace;
    std::vector<std::string> modes;
    std::vector<double> thresholds;
    std::optional<int> workers;
    std::string archive_dir;
    std::optional<int> realizations;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--config", c.config, "Experiment configuration (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "Master random seed");
    cmd->add_option("--out", c.out, "Output file");
    cmd->add_option("--trace", c.trace, "Write branch-and-bound trace lines to this file ('-' for stderr)");
}

ExperimentConfig load_config(const Common& c)
{
    ExperimentConfig cfg = c.config.empty() ? default_experiment_config() : load_experiment_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    if (!c.modes.empty()) {
        cfg.modes.clear();
        for (const auto& m : c.modes) cfg.modes.push_back(mode_from_string(m));
    }
    if (!c.thresholds.empty()) cfg.thresholds = c.thresholds;
    if (c.workers) cfg.workers = *c.workers;
    if (!c.archive_dir.empty()) cfg.archive_dir = c.archive_dir;
    if (c.realizations) cfg.realizations = *c.realizations;
    validate(cfg);
    return cfg;
}

class TraceSink {
public:
    explicit TraceSink(const std::string& target)
    {
        if (target.empty()) return;
        if (target == "-") {
            stream_ = &std::cerr;
            return;
        }
        file_ = std::make_unique<std::ofstream>(target);
        if (!*file_) throw std::runtime_error("cannot write trace file " + target);
        stream_ = file_.get();
    }

    std::ostream* stream() const { return stream_; }

    void write(const std::string& block)
    {
        std::lock_guard lock(mutex_);
        *stream_ << block;
        stream_->flush();
    }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_ = nullptr;
    std::mutex mutex_;
};

std::string fmt(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

int run_visibility(const Common& c, int user_limit)
{
    ExperimentConfig cfg = load_config(c);
    const Constellation con = build_constellation(cfg);
    auto users = place_users(cfg);
    if (user_limit > 0 && static_cast<int>(users.size()) > user_limit) users.resize(user_limit);

    std::ostringstream out;
    out << "threshold_deg,user,satellite,layer,start_s,end_s,currently_visible\n";
    for (double thr : cfg.thresholds) {
        VisibilityOptions vo;
        vo.threshold = thr;
        vo.horizon = cfg.horizon;
        vo.step = cfg.visibility_step;
        vo.tolerance = cfg.visibility_tolerance;
        vo.earth_angle_at_origin = con.earth_angle;
        for (const auto& u : users)
            for (std::size_t s = 0; s < con.elements.size(); ++s)
                for (const auto& w : visibility_windows(u, con.elements[s], vo))
                    out << fmt(thr) << ',' << u.id << ',' << w.satellite_id << ',' << to_string(con.resources[s].layer)
                        << ',' << fmt(w.start) << ',' << fmt(w.end) << ',' << (w.currently_visible ? 1 : 0) << '\n';
    }
    if (c.out.empty()) {
        std::cout << out.str();
    } else {
        std::ofstream f(c.out);
        if (!f) throw std::runtime_error("cannot write " + c.out);
        f << out.str();
    }
    return 0;
}

int run_solve(const Common& c, const std::string& instance_path, bool repair)
{
    ExperimentConfig cfg;
    if (!c.config.empty()) cfg = load_experiment_config(c.config);
    const ProblemInstance inst = load_instance(instance_path);
    if (auto err = check_instance(inst); !err.empty()) throw std::runtime_error(instance_path + ": " + err);
    const ConvexMIProgram prog = build_p2(inst, cfg.p2);
    TraceSink trace(c.trace);
    const Solution sol = branch_and_bound(prog, cfg.solver, trace.stream());

    Solution final = sol;
    AuditReport audit;
    if (repair) {
        RepairResult rep = audit_and_repair(inst, prog, sol, cfg.solver);
        final = rep.final;
        audit = rep.audit;
        if (rep.exact_resolve) std::cout << "repair: exact reciprocal re-solve applied\n";
        if (rep.demoted > 0) std::cout << "repair: " << rep.demoted << " user(s) demoted\n";
    } else {
        tighten(final, prog.epsilon1, prog.epsilon2);
        audit = audit_p1(inst, final);
    }
    const Metrics m = evaluate_solution(inst, final);

    std::cout << "status: " << to_string(sol.status) << "\n";
    std::cout << "nodes: " << sol.nodes << "\n";
    std::cout << "objective: " << fmt(sol.objective) << " (bound " << fmt(sol.bound) << ")\n";
    std::cout << "audited objective: " << fmt(m.objective) << "\n";
    std::cout << "admitted: " << m.admitted << " of " << m.active_users << "\n";
    for (std::size_t u = 0; u < final.users.size(); ++u) {
        const auto& us = final.users[u];
        std::cout << "  user " << inst.users[u].user.id << ": ";
        if (!us.admitted()) {
            std::cout << "not admitted\n";
            continue;
        }
        const int k = us.offload_index();
        const int j = us.forward_index();
        std::cout << "offload " << inst.users[u].offload[k].path.source << "->" << inst.users[u].offload[k].path.destination
                  << " forward " << inst.users[u].forward[j].path.source << "->"
                  << inst.users[u].forward[j].path.destination << " b=" << fmt(us.b[k]) << " f=" << fmt(us.f[k]);
        if (auto d = breakdown(inst, static_cast<int>(u), us))
            std::cout << " delay=" << fmt(d->delay()) << " energy=" << fmt(d->energy());
        std::cout << "\n";
    }
    std::cout << "audit: " << audit.summary() << "\n";
    if (!c.out.empty()) {
        std::ofstream f(c.out);
        if (!f) throw std::runtime_error("cannot write " + c.out);
        f << dump_solution(final);
    }
    return audit.feasible() ? 0 : 1;
}

int run_experiment_cmd(const Common& c)
{
    ExperimentConfig cfg = load_config(c);
    TraceSink trace(c.trace);
    if (trace.stream()) cfg.trace = [&trace](const std::string& block) { trace.write(block); };
    const std::string out = c.out.empty() ? "metrics.csv" : c.out;
    const auto result = run_experiment(cfg, [](int done, int total) {
        std::cerr << "\r" << done << "/" << total << " realizations" << std::flush;
        if (done == total) std::cerr << "\n";
    });
    emit_csv(result.table, out);
    std::cout << report(result.table);
    std::cout << "wrote " << out << " (" << fmt(result.table.wall_time) << " s)\n";
    return 0;
}

int run_report(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::cout << report(parse_csv(ss.str()));
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hybrid LEO/MEO edge offloading: visibility, MICP solve and Monte Carlo experiments"};
    app.name("satedge");

    Common vis, sol, exp;
    int user_limit = 0;
    auto* vis_cmd = app.add_subcommand("visibility", "Visibility windows for the configured users and constellation");
    add_common(vis_cmd, vis);
    vis_cmd->add_option("--thresholds", vis.thresholds, "Elevation thresholds in degrees");
    vis_cmd->add_option("--users", user_limit, "Only the first N users");

    std::string instance_path;
    bool no_repair = false;
    auto* sol_cmd = app.add_subcommand("solve", "Solve an archived instance and audit the result");
    add_common(sol_cmd, sol);
    sol_cmd->add_option("instance", instance_path, "Instance JSON")->required()->check(CLI::ExistingFile);
    sol_cmd->add_flag("--no-repair", no_repair, "Audit the tightened solution without the repair pass");

    auto* exp_cmd = app.add_subcommand("experiment", "Monte Carlo sweep over modes and thresholds, writes CSV");
    add_common(exp_cmd, exp);
    exp_cmd->add_option("--mode", exp.modes, "Scenario modes (leo_only, meo_only, hybrid)")->delimiter(',');
    exp_cmd->add_option("--thresholds", exp.thresholds, "Elevation thresholds in degrees")->delimiter(',');
    exp_cmd->add_option("--workers", exp.workers, "Parallel workers");
    exp_cmd->add_option("--realizations", exp.realizations, "Monte Carlo realizations");
    exp_cmd->add_option("--archive-dir", exp.archive_dir, "Archive every assembled instance here");

    std::string csv_path;
    auto* rep_cmd = app.add_subcommand("report", "Summarize a metrics CSV");
    rep_cmd->add_option("csv", csv_path, "Metrics CSV")->required()->check(CLI::ExistingFile);

    vis_cmd->get_option("--thresholds")->delimiter(',');

    if (argc <= 1) {
        std::cout << app.help();
        return 2;
    }
    try {
        app.require_subcommand(1);
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*vis_cmd) return run_visibility(vis, user_limit);
        if (*sol_cmd) return run_solve(sol, instance_path, !no_repair);
        if (*exp_cmd) return run_experiment_cmd(exp);
        if (*rep_cmd) return run_report(csv_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
