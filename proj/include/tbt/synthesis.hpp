// Finite-horizon optimal control of linear systems under TBT constraints.
//
//   minimize   sum_t sum_j R_j u_{t,j}^2
//   subject to x_{t+1} = A_t x_t + B_t u_t,  u_t in box,  x_0 = xi,
//              x, t* |= spec
//
// The model is serialized to LP, solved by an external command and the
// returned trajectory is re-checked against the dynamics and certified by
// the monitor.

#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tbt/encoder.hpp"
#include "tbt/milp.hpp"
#include "tbt/monitor.hpp"
#include "tbt/spec.hpp"

namespace tbt {

class SynthesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The solver process failed (nonzero exit, unreadable output).
class SolverError : public SynthesisError {
public:
    using SynthesisError::SynthesisError;
};

class SolverTimeout : public SolverError {
public:
    using SolverError::SolverError;
};

/// A solution the solver called feasible does not satisfy the spec (or the
/// dynamics) when replayed. Indicates an encoding defect.
class CertificateError : public SynthesisError {
public:
    using SynthesisError::SynthesisError;
};

struct Bound {
    double lo = 0.0;
    double hi = 0.0;
};

struct LinearSystem {
    std::size_t n = 0;
    std::size_t m = 0;
    /// One entry for a time-invariant system, otherwise one per step.
    std::vector<Eigen::MatrixXd> A;
    std::vector<Eigen::MatrixXd> B;
    double dt = 1.0;
    std::vector<Bound> state_box;

    const Eigen::MatrixXd& A_at(int t) const;
    const Eigen::MatrixXd& B_at(int t) const;
    /// Throws SynthesisError on inconsistent dimensions or a non-finite box.
    void validate(int horizon) const;
};

/// Planar double integrator over (p1, v1, p2, v2) with inputs (a1, a2).
LinearSystem double_integrator(double dt);
/// Block-diagonal composition; state boxes are concatenated.
LinearSystem block_diag(const std::vector<LinearSystem>& parts);
/// Appends constant coordinates (identity row, no input) with the given box.
LinearSystem with_constant_states(const LinearSystem& sys, const std::vector<Bound>& boxes);

struct ControlBounds {
    std::vector<Bound> box;
};

struct SynthesisProblem {
    LinearSystem system;
    ControlBounds bounds;
    Eigen::VectorXd x0;
    SpecDocument spec;
    int horizon = 1;  // T
    std::vector<double> weights;  // diagonal of R
    Enforcement enforcement = Enforcement::AtFinal;
    EncoderOptions encoder;
    /// Optional output map y = C x; spec predicates are then over y.
    std::optional<Eigen::MatrixXd> output_map;
};

struct DynamicsVars {
    std::vector<std::vector<VarId>> states;    // [t][i], t = 0..T
    std::vector<std::vector<VarId>> controls;  // [t][j], t = 0..T-1
};

/// Creates x_{t,i} within the state box, u_{t,j} within the control box,
/// n*T dynamics rows and n initial-state rows.
DynamicsVars encode_dynamics(MilpModel& model, const LinearSystem& sys, const ControlBounds& bounds,
                             const Eigen::VectorXd& x0, int horizon);

/// sup |a^T x - b| over the box plus delta + 1. Throws SynthesisError when a
/// nonzero coefficient touches an unbounded coordinate.
double big_m_bound(const TernaryPredicate& mu, const std::vector<Bound>& box);

enum class Polarity { Inside, Outside };

/// Inside: and of 2d facet predicates x_i - lo_i >= delta, hi_i - x_i >= delta.
/// Outside: or of the outward facets lo_i - x_i >= delta, x_i - hi_i >= delta.
/// Predicates are named `<name>_<axis>lo` / `<name>_<axis>hi`.
Formula box_region_formula(const std::string& name, std::size_t state_dim,
                           const std::vector<std::size_t>& coords, const std::vector<Bound>& box,
                           double delta, Polarity polarity);

/// Or of (dp_k >= d_min) and (-dp_k >= d_min) over both planar axes of the
/// position difference, delta = 0.
Formula l1_separation_formula(const std::string& name, std::size_t state_dim,
                              const std::vector<std::size_t>& agent_i,
                              const std::vector<std::size_t>& agent_j, double d_min);

/// Point-in-box check with the same margins the monitor applies.
bool inside_box(std::span<const double> x, const std::vector<std::size_t>& coords,
                const std::vector<Bound>& box, double delta);

struct BuiltProblem {
    std::unique_ptr<MilpModel> model;
    std::unique_ptr<EncodingContext> context;
    DynamicsVars vars;
    /// Spec formula with predicates mapped to state coordinates.
    Formula state_formula;
    int t_star = 0;
    int horizon = 0;
    std::vector<std::string> warnings;
};

/// Dynamics + formula encoding + enforcement + objective.
BuiltProblem build_problem(const SynthesisProblem& p);

struct SolverOptions {
    /// Shell command with {lp}, {sol} and {time_limit} placeholders.
    std::string command;
    double time_limit_s = 600.0;
    /// Where the LP and solution files are written.
    std::filesystem::path work_dir;
    double tol_int = kDefaultIntegralityTol;
};

struct SynthesisResult {
    SolveStatus status = SolveStatus::Error;
    std::optional<Trace> trajectory;
    std::vector<std::vector<double>> controls;
    double objective = 0.0;
    Ternary certificate = Ternary::Unknown;
    double root_value = 0.0;
    double max_dynamics_residual = 0.0;
    ModelStats stats;
    double solve_seconds = 0.0;
    std::filesystem::path lp_path;
    std::filesystem::path solution_path;
};

/// Runs a solver command; returns its exit status. Throws SolverTimeout when
/// it runs longer than timeout_s (the process group is killed).
int run_command(const std::string& command, double timeout_s);

/// Substitutes {lp}, {sol} and {time_limit}.
std::string expand_solver_command(const std::string& tmpl, const std::filesystem::path& lp,
                                  const std::filesystem::path& sol, double time_limit_s);

/// Solves an already built problem.
SynthesisResult solve_built(const BuiltProblem& built, const SynthesisProblem& p,
                            const SolverOptions& opts);
SynthesisResult solve(const SynthesisProblem& p, const SolverOptions& opts);

}  // namespace tbt
