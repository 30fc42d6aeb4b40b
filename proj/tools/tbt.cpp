// tbt: encode, synthesize, monitor and benchmark TBT specifications.
//
// Exit codes: 0 success, 1 usage, 2 config/spec/trace error, 3 infeasible,
// 4 solver failure, 5 certificate mismatch.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "tbt/bench.hpp"
#include "tbt/config.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInput = 2, kInfeasible = 3, kSolver = 4, kCertificate = 5 };

struct Globals {
    std::string config;
    std::string spec;
    std::string out = "tbt-out";
    std::string solver_cmd;
    std::uint64_t seed = 0;
    unsigned jobs = 2;
    std::optional<double> time_limit;
    std::string enforce;
    bool explain = false;
    std::string trace;
    std::string suite;
    bool counts_only = false;
    bool no_fallback = false;
};

std::string fnv_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json stats_json(const tbt::ModelStats& s) {
    return json{{"continuous_vars", s.continuous_vars}, {"integer_vars", s.integer_vars},
                {"binary_vars", s.binary_vars},         {"trit_vars", s.trit_vars},
                {"linear_constraints", s.linear_constraints},
                {"quadratic_terms", s.quadratic_terms}};
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", p.string()));
}

class Run {
public:
    Run(std::string command, const Globals& g) : g_(g) {
        manifest_["command"] = std::move(command);
        started_ = std::chrono::steady_clock::now();
        started_at_ = utc_now();
    }

    json& manifest() { return manifest_; }

    void record_input(const char* key, const fs::path& p) {
        manifest_[fmt::format("{}_path", key)] = p.string();
        manifest_[fmt::format("{}_hash", key)] = fnv_hex(tbt::read_text_file(p));
    }

    std::string solver_cmd(const tbt::ProblemConfig* cfg) const {
        if (!g_.solver_cmd.empty()) return g_.solver_cmd;
        if (cfg != nullptr && !cfg->solver_cmd.empty()) return cfg->solver_cmd;
        if (const char* env = std::getenv("TBT_SOLVER_CMD"); env != nullptr && *env != '\0') {
            return env;
        }
        return TBT_DEFAULT_SOLVER_CMD;
    }

    int finish(int code, const std::string& status) {
        manifest_["status"] = status;
        manifest_["exit_code"] = code;
        manifest_["seed"] = g_.seed;
        manifest_["timing"] = {
            {"started_at", started_at_},
            {"finished_at", utc_now()},
            {"wall_seconds",
             std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count()}};
        try {
            fs::create_directories(g_.out);
            write_file(fs::path(g_.out) / "manifest.json", manifest_.dump(2) + "\n");
        } catch (const std::exception& e) {
            std::cerr << "warning: " << e.what() << '\n';
        }
        return code;
    }

private:
    const Globals& g_;
    json manifest_;
    std::chrono::steady_clock::time_point started_;
    std::string started_at_;
};

tbt::ProblemConfig load(const Globals& g, Run& run) {
    if (g.config.empty()) throw tbt::ConfigError("--config is required");
    run.record_input("config", g.config);
    tbt::ProblemConfig cfg = tbt::load_config(g.config);
    if (!g.spec.empty()) cfg.spec_path = g.spec;
    run.record_input("spec", cfg.spec_path);
    if (!g.enforce.empty()) {
        if (g.enforce == "final") cfg.enforcement = tbt::Enforcement::AtFinal;
        else if (g.enforce == "any") cfg.enforcement = tbt::Enforcement::AnyHorizon;
        else throw tbt::ConfigError("--enforce must be 'final' or 'any'");
    }
    if (g.time_limit) cfg.time_limit_s = *g.time_limit;
    return cfg;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

std::string varmap_csv(const tbt::MilpModel& m) {
    std::string out = "index,name,kind,lb,ub\n";
    for (std::size_t i = 0; i < m.num_variables(); ++i) {
        const tbt::Variable& v = m.variable(tbt::VarId{i});
        const char* kind = v.kind == tbt::VarKind::Continuous ? "continuous"
                           : v.kind == tbt::VarKind::Binary   ? "binary"
                                                              : "trit";
        out += fmt::format("{},{},{},{},{}\n", i, v.name, kind, v.lb, v.ub);
    }
    return out;
}

int cmd_encode(const Globals& g, Run& run) {
    const tbt::ProblemConfig cfg = load(g, run);
    const tbt::SynthesisProblem p = tbt::make_problem(cfg);
    const tbt::BuiltProblem built = tbt::build_problem(p);
    print_warnings(built.warnings);
    const fs::path out(g.out);
    fs::create_directories(out);
    write_file(out / "problem.lp", tbt::write_lp(*built.model));
    write_file(out / "varmap.csv", varmap_csv(*built.model));
    run.manifest()["solver"] = run.solver_cmd(&cfg);
    run.manifest()["statistics"] = stats_json(built.model->stats());
    if (g.explain) {
        const std::string report = built.context->explain();
        write_file(out / "explain.txt", report);
        std::cout << report;
    }
    return run.finish(kOk, "encoded");
}

int cmd_synth(const Globals& g, Run& run) {
    const tbt::ProblemConfig cfg = load(g, run);
    const tbt::SynthesisProblem p = tbt::make_problem(cfg);
    const tbt::BuiltProblem built = tbt::build_problem(p);
    print_warnings(built.warnings);
    tbt::SolverOptions so;
    so.command = run.solver_cmd(&cfg);
    so.time_limit_s = cfg.time_limit_s;
    so.work_dir = g.out;
    so.tol_int = cfg.tol_int;
    run.manifest()["solver"] = so.command;
    run.manifest()["statistics"] = stats_json(built.model->stats());

    const tbt::SynthesisResult r = tbt::solve_built(built, p, so);
    const std::string status = tbt::status_name(r.status);
    if (r.status == tbt::SolveStatus::Infeasible) {
        std::cout << "status infeasible\n";
        return run.finish(kInfeasible, status);
    }
    if (!r.trajectory) {
        std::cerr << "error: solver returned status " << status << " without a solution\n";
        return run.finish(kSolver, status);
    }
    const fs::path out(g.out);
    {
        std::ofstream csv(out / "trajectory.csv");
        tbt::write_solution_csv(csv, *r.trajectory, r.controls);
    }
    const tbt::ModelStats s = r.stats;
    const std::string cert = fmt::format(
        "verdict {}\nroot_value {}\nt_star {}\nhorizon {}\nobjective {:.17g}\n"
        "max_dynamics_residual {:.3g}\ncontinuous_vars {}\ninteger_vars {}\n"
        "linear_constraints {}\nquadratic_terms {}\n",
        tbt::to_char(r.certificate), r.root_value, built.t_star, built.horizon, r.objective,
        r.max_dynamics_residual, s.continuous_vars, s.integer_vars, s.linear_constraints,
        s.quadratic_terms);
    write_file(out / "certificate.txt", cert);
    run.manifest()["certificate"] = std::string(1, tbt::to_char(r.certificate));
    run.manifest()["objective"] = r.objective;
    std::cout << "status " << status << "\n" << cert;
    return run.finish(kOk, status);
}

int cmd_monitor(const Globals& g, Run& run) {
    if (g.spec.empty() || g.trace.empty()) throw tbt::ConfigError("monitor needs --spec and --trace");
    run.record_input("spec", g.spec);
    run.record_input("trace", g.trace);
    std::ifstream in(g.trace);
    if (!in) throw tbt::ConfigError(fmt::format("cannot open '{}'", g.trace));
    const tbt::Trace x = tbt::read_trace_csv(in);
    const tbt::SpecDocument doc = tbt::parse_spec(tbt::read_text_file(g.spec), x.dim());
    print_warnings(doc.warnings);
    if (doc.t_star > x.last_index()) {
        throw tbt::TraceError(fmt::format("t* = {} beyond the trace end {}", doc.t_star, x.last_index()));
    }
    const tbt::VerdictMatrix vm = tbt::verdict_matrix(doc.formula, x);
    fs::create_directories(g.out);
    {
        std::ofstream csv(fs::path(g.out) / "verdicts.csv");
        tbt::write_verdicts_csv(csv, vm);
    }
    const tbt::Ternary v = vm.at(doc.t_star, x.last_index());
    std::cout << tbt::to_char(v) << '\n';
    run.manifest()["verdict"] = std::string(1, tbt::to_char(v));
    return run.finish(kOk, "monitored");
}

int cmd_bench(const Globals& g, Run& run) {
    tbt::BenchOptions bo;
    bo.solver_cmd = run.solver_cmd(nullptr);
    bo.time_limit_s = g.time_limit.value_or(600.0);
    bo.jobs = g.jobs;
    bo.out_dir = fs::path(g.out) / g.suite;
    bo.allow_fallback = !g.no_fallback;
    bo.counts_only = g.counts_only;
    run.manifest()["solver"] = bo.solver_cmd;
    run.manifest()["suite"] = g.suite;

    if (g.suite == "case1") {
        const auto branches = tbt::bench_robot(bo);
        bool ok = true;
        json runs = json::array();
        for (const auto& b : branches) {
            const bool pass = b.run.solved() && b.ordering_ok;
            ok = ok && pass;
            fmt::print("{} battery={} T={}{} status={} certificate={} A={} C={} B={} ordering={} {:.1f}s{}\n",
                       b.run.label, b.battery, b.run.horizon, b.run.fallback ? " (fallback)" : "",
                       tbt::status_name(b.run.status), tbt::to_char(b.run.certificate), b.enter_a,
                       b.enter_c, b.enter_b, b.ordering_ok ? "ok" : "FAIL", b.run.seconds,
                       b.run.error.empty() ? "" : " error: " + b.run.error);
            runs.push_back({{"branch", b.run.label}, {"statistics", stats_json(b.run.stats)},
                            {"status", tbt::status_name(b.run.status)}, {"pass", pass}});
        }
        run.manifest()["runs"] = runs;
        return run.finish(ok ? kOk : kSolver, ok ? "pass" : "fail");
    }
    if (g.suite == "case2") {
        const auto rep = tbt::bench_multi_agent(bo);
        const bool ok = rep.run.solved() && rep.min_l1 >= rep.d_min - 1e-6;
        fmt::print("{} T={} status={} certificate={} min_l1={:.6f} d_min={} {:.1f}s{}\n", rep.run.label,
                   rep.run.horizon, tbt::status_name(rep.run.status), tbt::to_char(rep.run.certificate),
                   rep.min_l1, rep.d_min, rep.run.seconds,
                   rep.run.error.empty() ? "" : " error: " + rep.run.error);
        run.manifest()["statistics"] = stats_json(rep.run.stats);
        return run.finish(ok ? kOk : kSolver, ok ? "pass" : "fail");
    }
    if (g.suite == "scaling") {
        const auto rows = tbt::bench_scaling(bo, {4, 6, 8, 10, 12}, {2, 3});
        bool ok = true;
        fmt::print("{:>2} {:>3} {:>11} {:>11} {:>11} {:>8} {:>10} {:>8}\n", "k", "T", "constraints",
                   "predicted", "leaf_groups", "binomial", "status", "seconds");
        for (const auto& r : rows) {
            if (r.k == 2) ok = ok && r.predicted_rows == r.stats.linear_constraints;
            ok = ok && r.leaf_groups == r.binomial;
            fmt::print("{:>2} {:>3} {:>11} {:>11} {:>11} {:>8} {:>10} {:>8.2f}\n", r.k, r.horizon,
                       r.stats.linear_constraints,
                       r.k == 2 ? fmt::format("{}", r.predicted_rows) : std::string("-"),
                       r.leaf_groups, r.binomial, r.status, r.seconds);
        }
        return run.finish(ok ? kOk : kCertificate, ok ? "pass" : "count mismatch");
    }
    throw CLI::ValidationError("suite", "expected case1, case2 or scaling");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ternary temporal behavior tree encoder, synthesizer and monitor"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "Problem config file");
    app.add_option("--spec", g.spec, "Spec file (.tbt)");
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_option("--solver-cmd", g.solver_cmd, "Solver command template ({lp} {sol} {time_limit})");
    app.add_option("--seed", g.seed, "Seed recorded in the manifest");
    app.add_option("--jobs", g.jobs, "Parallel problems in bench")->check(CLI::PositiveNumber);
    app.add_option("--time-limit", g.time_limit, "Solver time limit in seconds")
        ->check(CLI::PositiveNumber);
    app.add_option("--enforce", g.enforce, "final or any")->check(CLI::IsMember({"final", "any"}));
    app.add_flag("--explain", g.explain, "Print the node-to-variable report (encode)");

    auto* encode = app.add_subcommand("encode", "Write the LP model, variable map and manifest");
    auto* synth = app.add_subcommand("synth", "Solve and certify a synthesis problem");
    auto* monitor = app.add_subcommand("monitor", "Evaluate a spec on a trace CSV");
    monitor->add_option("--trace", g.trace, "Trace CSV (t,x1..xn)")->required();
    auto* bench = app.add_subcommand("bench", "Run a benchmark suite");
    bench->add_option("suite", g.suite, "case1 | case2 | scaling")
        ->required()
        ->check(CLI::IsMember({"case1", "case2", "scaling"}));
    bench->add_flag("--counts-only", g.counts_only, "scaling: build models without solving");
    bench->add_flag("--no-fallback", g.no_fallback, "case1: do not rerun at reduced scale");
    for (auto* sc : {encode, synth, monitor, bench}) sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    Run run(command, g);
    try {
        if (command == "encode") return cmd_encode(g, run);
        if (command == "synth") return cmd_synth(g, run);
        if (command == "monitor") return cmd_monitor(g, run);
        return cmd_bench(g, run);
    } catch (const tbt::ParseError& e) {
        std::cerr << "spec error: " << e.what() << '\n';
        return run.finish(kInput, "spec error");
    } catch (const tbt::CertificateError& e) {
        std::cerr << "certificate mismatch (encoder defect): " << e.what() << '\n';
        return run.finish(kCertificate, "certificate mismatch");
    } catch (const tbt::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return run.finish(kSolver, "solver failure");
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return run.finish(kInput, "input error");
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return run.finish(kInput, "input error");
    }
}
