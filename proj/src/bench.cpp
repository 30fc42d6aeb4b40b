#include "tbt/bench.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>

namespace tbt {

void run_parallel(const std::vector<std::function<void()>>& tasks, unsigned jobs) {
    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(tasks.size())));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < tasks.size(); i = next++) tasks[i]();
        });
    }
    for (auto& t : pool) t.join();
}

void write_solution_csv(std::ostream& out, const Trace& x,
                        const std::vector<std::vector<double>>& controls) {
    out << 't';
    for (std::size_t i = 0; i < x.dim(); ++i) out << ",x" << i + 1;
    const std::size_t m = controls.empty() ? 0 : controls.front().size();
    for (std::size_t j = 0; j < m; ++j) out << ",u" << j + 1;
    out << '\n';
    for (int t = 0; t <= x.last_index(); ++t) {
        out << t;
        for (double v : x.at(t)) out << ',' << fmt::format("{:.17g}", v);
        const auto ts = static_cast<std::size_t>(t);
        for (std::size_t j = 0; j < m; ++j) {
            out << ',';
            if (ts < controls.size()) out << fmt::format("{:.17g}", controls[ts][j]);
        }
        out << '\n';
    }
}

RunOutcome run_case(const std::string& label, const SynthesisProblem& p, const std::string& solver_cmd,
                    double time_limit_s, const std::filesystem::path& work_dir) {
    RunOutcome out;
    out.label = label;
    out.horizon = p.horizon;
    const auto start = std::chrono::steady_clock::now();
    try {
        const BuiltProblem built = build_problem(p);
        out.stats = built.model->stats();
        SolverOptions so;
        so.command = solver_cmd;
        so.time_limit_s = time_limit_s;
        so.work_dir = work_dir;
        SynthesisResult r = solve_built(built, p, so);
        out.status = r.status;
        out.certificate = r.certificate;
        out.objective = r.objective;
        out.trajectory = std::move(r.trajectory);
        out.controls = std::move(r.controls);
        if (out.trajectory) {
            std::ofstream csv(work_dir / "trajectory.csv");
            write_solution_csv(csv, *out.trajectory, out.controls);
        }
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::vector<RobotBranch> bench_robot(const BenchOptions& opts) {
    std::filesystem::create_directories(opts.out_dir);
    const std::vector<double> levels{0.9, 0.7};
    std::vector<RobotBranch> branches(levels.size());
    std::vector<Region> regions;
    std::mutex mu;
    std::vector<std::function<void()>> tasks;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        tasks.emplace_back([&, i] {
            const std::string label = levels[i] >= 0.8 ? "high_battery" : "low_battery";
            RobotOptions ro;
            ro.battery = levels[i];
            CaseStudy cs = robot_case(ro);
            {
                std::lock_guard<std::mutex> lock(mu);
                if (regions.empty()) regions = cs.regions;
            }
            RunOutcome run = run_case(label, cs.problem, opts.solver_cmd, opts.time_limit_s,
                                      opts.out_dir / label);
            if (!run.solved() && opts.allow_fallback) {
                RobotOptions small = ro;
                small.horizon = 15;
                small.both_obstacles = false;
                CaseStudy fb = robot_case(small);
                run = run_case(label, fb.problem, opts.solver_cmd, opts.time_limit_s,
                               opts.out_dir / (label + "_fallback"));
                run.fallback = true;
            }
            RobotBranch& b = branches[i];
            b.battery = levels[i];
            b.run = std::move(run);
            if (b.run.trajectory) {
                const Trace& x = *b.run.trajectory;
                b.enter_a = first_entry(x, cs.regions[0]);
                if (levels[i] >= 0.8) {
                    if (b.enter_a >= 0) b.enter_b = first_entry(x, cs.regions[1], b.enter_a + 1);
                    b.ordering_ok = b.enter_a >= 0 && b.enter_b > b.enter_a;
                } else {
                    if (b.enter_a >= 0) b.enter_c = first_entry(x, cs.regions[2], b.enter_a + 1);
                    if (b.enter_c >= 0) b.enter_b = first_entry(x, cs.regions[1], b.enter_c + 1);
                    b.ordering_ok = b.enter_a >= 0 && b.enter_c > b.enter_a && b.enter_b > b.enter_c;
                }
            }
        });
    }
    run_parallel(tasks, opts.jobs);

    std::ofstream reg(opts.out_dir / "regions.csv");
    write_regions_csv(reg, regions);
    std::ofstream rep(opts.out_dir / "report.csv");
    rep << "branch,battery,T,fallback,status,certificate,objective,seconds,continuous,integer,"
           "constraints,quadratic,enter_A,enter_C,enter_B,ordering_ok,error\n";
    for (const RobotBranch& b : branches) {
        const RunOutcome& r = b.run;
        rep << fmt::format("{},{},{},{},{},{},{:.6g},{:.3f},{},{},{},{},{},{},{},{},\"{}\"\n", r.label,
                           b.battery, r.horizon, r.fallback ? 1 : 0, status_name(r.status),
                           to_char(r.certificate), r.objective, r.seconds, r.stats.continuous_vars,
                           r.stats.integer_vars, r.stats.linear_constraints, r.stats.quadratic_terms,
                           b.enter_a, b.enter_c, b.enter_b, b.ordering_ok ? 1 : 0, r.error);
    }
    return branches;
}

MultiAgentReport bench_multi_agent(const BenchOptions& opts, int horizon) {
    std::filesystem::create_directories(opts.out_dir);
    MultiAgentReport rep;
    CaseStudy cs = multi_agent_case(horizon, rep.d_min);
    rep.run = run_case("two_agents", cs.problem, opts.solver_cmd, opts.time_limit_s,
                       opts.out_dir / "two_agents");
    if (rep.run.trajectory) rep.min_l1 = min_l1_distance(*rep.run.trajectory, {0, 2}, {4, 6});
    std::ofstream reg(opts.out_dir / "regions.csv");
    write_regions_csv(reg, cs.regions);
    std::ofstream out(opts.out_dir / "report.csv");
    const RunOutcome& r = rep.run;
    out << "case,T,status,certificate,objective,seconds,continuous,integer,constraints,quadratic,"
           "min_l1,d_min,error\n";
    out << fmt::format("{},{},{},{},{:.6g},{:.3f},{},{},{},{},{:.9g},{},\"{}\"\n", r.label, r.horizon,
                       status_name(r.status), to_char(r.certificate), r.objective, r.seconds,
                       r.stats.continuous_vars, r.stats.integer_vars, r.stats.linear_constraints,
                       r.stats.quadratic_terms, rep.min_l1, rep.d_min, r.error);
    return rep;
}

std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

std::vector<ScalingRow> bench_scaling(const BenchOptions& opts, const std::vector<int>& horizons,
                                      const std::vector<int>& ks) {
    std::filesystem::create_directories(opts.out_dir);
    std::vector<ScalingRow> rows;
    for (int k : ks) {
        for (int T : horizons) {
            ScalingRow row;
            row.k = k;
            row.horizon = T;
            rows.push_back(row);
        }
    }
    std::vector<std::function<void()>> tasks;
    for (ScalingRow& row : rows) {
        tasks.emplace_back([&opts, &row] {
            const SynthesisProblem p = seq_chain_problem(row.horizon, row.k);
            const BuiltProblem built = build_problem(p);
            row.stats = built.model->stats();
            if (row.k == 2) row.predicted_rows = seq_pair_constraint_count(row.horizon);
            row.leaf_groups = built.context->leaf_groups(normalize_kary(built.state_formula));
            row.binomial = binomial(static_cast<std::size_t>(row.horizon),
                                    static_cast<std::size_t>(row.k - 1));
            if (opts.counts_only) {
                row.status = "skipped";
                return;
            }
            const RunOutcome r =
                run_case(fmt::format("k{}_T{}", row.k, row.horizon), p, opts.solver_cmd,
                         opts.time_limit_s, opts.out_dir / fmt::format("k{}_T{}", row.k, row.horizon));
            row.status = r.error.empty() ? status_name(r.status) : "error";
            row.seconds = r.seconds;
        });
    }
    run_parallel(tasks, opts.jobs);

    std::ofstream csv(opts.out_dir / "scaling.csv");
    csv << "k,T,continuous,binary,trit,integer,constraints,predicted_constraints,leaf_groups,"
           "binomial,status,seconds\n";
    std::ofstream plot(opts.out_dir / "scaling_plot.dat");
    plot << "# k T constraints seconds\n";
    for (const ScalingRow& r : rows) {
        csv << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{:.3f}\n", r.k, r.horizon,
                           r.stats.continuous_vars, r.stats.binary_vars, r.stats.trit_vars,
                           r.stats.integer_vars, r.stats.linear_constraints,
                           r.k == 2 ? fmt::format("{}", r.predicted_rows) : std::string(),
                           r.leaf_groups, r.binomial, r.status, r.seconds);
        plot << fmt::format("{} {} {} {:.3f}\n", r.k, r.horizon, r.stats.linear_constraints,
                            r.seconds);
    }
    return rows;
}

}  // namespace tbt
