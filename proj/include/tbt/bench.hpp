// Benchmark harness shared by the CLI and the acceptance suite.

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tbt/case_studies.hpp"

namespace tbt {

struct BenchOptions {
    std::string solver_cmd;
    double time_limit_s = 600.0;
    unsigned jobs = 2;
    std::filesystem::path out_dir = "bench-out";
    /// Rerun a failed full-scale robot branch at T = 15 with one obstacle.
    bool allow_fallback = true;
    /// Scaling sweep: build only, no solves.
    bool counts_only = false;
};

/// Runs tasks on at most `jobs` threads.
void run_parallel(const std::vector<std::function<void()>>& tasks, unsigned jobs);

struct RunOutcome {
    std::string label;
    int horizon = 0;
    bool fallback = false;
    SolveStatus status = SolveStatus::Error;
    Ternary certificate = Ternary::Unknown;
    double objective = 0.0;
    double seconds = 0.0;
    ModelStats stats;
    std::string error;
    std::optional<Trace> trajectory;
    std::vector<std::vector<double>> controls;

    bool solved() const {
        return error.empty() &&
               (status == SolveStatus::Optimal || status == SolveStatus::Feasible) &&
               certificate == Ternary::True;
    }
};

/// Builds, solves and certifies one problem; failures are captured in
/// `error` instead of thrown. Artifacts go to work_dir.
RunOutcome run_case(const std::string& label, const SynthesisProblem& p, const std::string& solver_cmd,
                    double time_limit_s, const std::filesystem::path& work_dir);

struct RobotBranch {
    RunOutcome run;
    double battery = 0.0;
    int enter_a = -1;
    int enter_c = -1;
    int enter_b = -1;
    bool ordering_ok = false;
};

/// Both battery branches (0.9 and 0.7). Writes report.csv, regions.csv and
/// one trajectory CSV per branch.
std::vector<RobotBranch> bench_robot(const BenchOptions& opts);

struct MultiAgentReport {
    RunOutcome run;
    double min_l1 = 0.0;
    double d_min = 0.6;
};

MultiAgentReport bench_multi_agent(const BenchOptions& opts, int horizon = 15);

struct ScalingRow {
    int k = 0;
    int horizon = 0;
    ModelStats stats;
    /// Closed-form row count (k = 2 only, otherwise 0).
    std::size_t predicted_rows = 0;
    std::size_t leaf_groups = 0;
    std::size_t binomial = 0;
    std::string status;
    double seconds = 0.0;
};

/// Sweeps T for k = 2 and 3 chains. Writes scaling.csv and
/// scaling_plot.dat (constraints vs seconds).
std::vector<ScalingRow> bench_scaling(const BenchOptions& opts, const std::vector<int>& horizons,
                                      const std::vector<int>& ks);

std::size_t binomial(std::size_t n, std::size_t k);

/// `t,x1..xn,u1..um`; the final row has empty controls.
void write_solution_csv(std::ostream& out, const Trace& x,
                        const std::vector<std::vector<double>>& controls);

}  // namespace tbt
