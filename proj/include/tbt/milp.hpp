// Solver-agnostic mixed-integer model: variables, linear rows, a quadratic
// minimization objective, CPLEX LP serialization and solution ingestion.

#pragma once

#include <compare>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tbt {

class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent solution text.
class SolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class VarKind { Continuous, Binary, Trit };

struct VarId {
    std::size_t index = 0;
    friend auto operator<=>(const VarId&, const VarId&) = default;
};

struct Variable {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lb = 0.0;
    double ub = 0.0;

    bool is_integer() const noexcept { return kind != VarKind::Continuous; }
};

enum class Sense { LessEqual, GreaterEqual, Equal };

struct Term {
    VarId var;
    double coeff = 1.0;
};

struct LinearConstraint {
    std::vector<Term> terms;
    Sense sense = Sense::Equal;
    double rhs = 0.0;
};

/// objective += coeff * a * b
struct QuadTerm {
    VarId a;
    VarId b;
    double coeff = 0.0;
};

struct ModelStats {
    std::size_t continuous_vars = 0;
    std::size_t binary_vars = 0;
    std::size_t trit_vars = 0;
    std::size_t integer_vars = 0;  // binary + trit
    std::size_t linear_constraints = 0;
    std::size_t quadratic_terms = 0;

    friend bool operator==(const ModelStats&, const ModelStats&) = default;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

class MilpModel {
public:
    /// Bounds apply to continuous variables only; binaries are [0,1] and
    /// trits [-1,1]. Throws ModelError on a duplicate name or lb > ub.
    VarId add_variable(std::string name, VarKind kind, double lb = -kInf, double ub = kInf);
    VarId add_continuous(std::string name, double lb, double ub) {
        return add_variable(std::move(name), VarKind::Continuous, lb, ub);
    }
    VarId add_binary(std::string name) { return add_variable(std::move(name), VarKind::Binary); }
    VarId add_trit(std::string name) { return add_variable(std::move(name), VarKind::Trit); }

    /// Stored verbatim. Throws ModelError on empty terms, unknown variables
    /// or non-finite numbers.
    std::size_t add_constraint(std::vector<Term> terms, Sense sense, double rhs);

    /// Objective terms. Quadratic terms must reference continuous variables.
    void add_quadratic_objective(VarId a, VarId b, double coeff);
    void add_linear_objective(VarId v, double coeff);
    void add_objective_constant(double c) { objective_constant_ += c; }

    std::size_t num_variables() const noexcept { return vars_.size(); }
    std::size_t num_constraints() const noexcept { return rows_.size(); }
    const Variable& variable(VarId v) const;
    const std::vector<Variable>& variables() const noexcept { return vars_; }
    const std::vector<LinearConstraint>& constraints() const noexcept { return rows_; }
    const std::vector<QuadTerm>& quadratic_objective() const noexcept { return quad_; }
    const std::vector<Term>& linear_objective() const noexcept { return linear_; }
    double objective_constant() const noexcept { return objective_constant_; }
    std::optional<VarId> find(std::string_view name) const;

    ModelStats stats() const;

    /// Objective value at a full assignment (indexed by VarId::index).
    double objective_value(const std::vector<double>& values) const;
    /// Signed violation of a row (0 when satisfied).
    double violation(std::size_t row, const std::vector<double>& values) const;

private:
    void check_var(VarId v) const;

    std::vector<Variable> vars_;
    std::unordered_map<std::string, std::size_t> by_name_;
    std::vector<LinearConstraint> rows_;
    std::vector<QuadTerm> quad_;
    std::vector<Term> linear_;
    double objective_constant_ = 0.0;
};

/// CPLEX LP text. Deterministic: identical models give identical bytes.
std::string write_lp(const MilpModel& model);

enum class SolveStatus { Optimal, Feasible, Infeasible, Unbounded, Error };

const char* status_name(SolveStatus s) noexcept;

struct Solution {
    SolveStatus status = SolveStatus::Error;
    /// Indexed by VarId::index; nullopt for variables the solver did not report.
    std::vector<std::optional<double>> values;
    double objective = 0.0;

    bool has_values() const noexcept {
        return status == SolveStatus::Optimal || status == SolveStatus::Feasible;
    }
    /// Throws SolutionError when the variable has no value.
    double value(VarId v) const;
    /// Dense assignment, missing entries as 0.
    std::vector<double> dense() const;
};

constexpr double kDefaultIntegralityTol = 1e-5;

/// Parses `status <word>` followed by `name value` lines. Integer variables
/// are snapped to the nearest integer when within tol_int.
Solution load_solution(const MilpModel& model, std::string_view text,
                       double tol_int = kDefaultIntegralityTol);

}  // namespace tbt
