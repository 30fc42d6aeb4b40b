#include "tbt/milp.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

namespace tbt {

namespace {

bool valid_name(std::string_view name) {
    if (name.empty() || name.size() > 255) return false;
    const auto first = static_cast<unsigned char>(name.front());
    if (!std::isalpha(first) && first != '_') return false;
    for (char c : name) {
        const auto u = static_cast<unsigned char>(c);
        if (!std::isalnum(u) && c != '_' && c != '.') return false;
    }
    // LP keywords that would confuse a reader when used as a bare name
    return name != "free" && name != "inf" && name != "infinity" && name != "st" &&
           name != "end" && name != "bin" && name != "gen";
}

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
    return fmt::format("{}", v);
}

const char* sense_text(Sense s) {
    switch (s) {
        case Sense::LessEqual: return "<=";
        case Sense::GreaterEqual: return ">=";
        case Sense::Equal: return "=";
    }
    return "=";
}

// Writes `a x + b y - c z` with a line break every few terms.
void write_terms(std::ostream& os, const MilpModel& m, const std::vector<Term>& terms) {
    for (std::size_t k = 0; k < terms.size(); ++k) {
        const Term& t = terms[k];
        if (k > 0 && k % 8 == 0) os << "\n   ";
        const double c = t.coeff;
        if (k == 0) {
            os << (c < 0 ? "- " : "") << num(std::fabs(c));
        } else {
            os << (c < 0 ? " - " : " + ") << num(std::fabs(c));
        }
        os << ' ' << m.variable(t.var).name;
    }
}

}  // namespace

VarId MilpModel::add_variable(std::string name, VarKind kind, double lb, double ub) {
    if (!valid_name(name)) throw ModelError(fmt::format("invalid variable name '{}'", name));
    if (by_name_.count(name) != 0) throw ModelError(fmt::format("duplicate variable '{}'", name));
    switch (kind) {
        case VarKind::Binary:
            lb = 0.0;
            ub = 1.0;
            break;
        case VarKind::Trit:
            lb = -1.0;
            ub = 1.0;
            break;
        case VarKind::Continuous:
            if (std::isnan(lb) || std::isnan(ub) || lb > ub) {
                throw ModelError(fmt::format("invalid bounds for '{}'", name));
            }
            break;
    }
    VarId id{vars_.size()};
    by_name_.emplace(name, id.index);
    vars_.push_back(Variable{std::move(name), kind, lb, ub});
    return id;
}

void MilpModel::check_var(VarId v) const {
    if (v.index >= vars_.size()) {
        throw ModelError(fmt::format("unknown variable id {}", v.index));
    }
}

std::size_t MilpModel::add_constraint(std::vector<Term> terms, Sense sense, double rhs) {
    if (terms.empty()) throw ModelError("constraint needs at least one term");
    for (const Term& t : terms) {
        check_var(t.var);
        if (!std::isfinite(t.coeff)) throw ModelError("non-finite constraint coefficient");
    }
    if (!std::isfinite(rhs)) throw ModelError("non-finite constraint right-hand side");
    rows_.push_back(LinearConstraint{std::move(terms), sense, rhs});
    return rows_.size() - 1;
}

void MilpModel::add_quadratic_objective(VarId a, VarId b, double coeff) {
    check_var(a);
    check_var(b);
    if (vars_[a.index].is_integer() || vars_[b.index].is_integer()) {
        throw ModelError("quadratic objective terms must reference continuous variables");
    }
    if (!std::isfinite(coeff)) throw ModelError("non-finite objective coefficient");
    quad_.push_back(QuadTerm{a, b, coeff});
}

void MilpModel::add_linear_objective(VarId v, double coeff) {
    check_var(v);
    if (!std::isfinite(coeff)) throw ModelError("non-finite objective coefficient");
    linear_.push_back(Term{v, coeff});
}

const Variable& MilpModel::variable(VarId v) const {
    check_var(v);
    return vars_[v.index];
}

std::optional<VarId> MilpModel::find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return VarId{it->second};
}

ModelStats MilpModel::stats() const {
    ModelStats s;
    for (const auto& v : vars_) {
        switch (v.kind) {
            case VarKind::Continuous: ++s.continuous_vars; break;
            case VarKind::Binary: ++s.binary_vars; break;
            case VarKind::Trit: ++s.trit_vars; break;
        }
    }
    s.integer_vars = s.binary_vars + s.trit_vars;
    s.linear_constraints = rows_.size();
    s.quadratic_terms = quad_.size();
    return s;
}

double MilpModel::objective_value(const std::vector<double>& values) const {
    double acc = objective_constant_;
    for (const Term& t : linear_) acc += t.coeff * values.at(t.var.index);
    for (const QuadTerm& q : quad_) acc += q.coeff * values.at(q.a.index) * values.at(q.b.index);
    return acc;
}

double MilpModel::violation(std::size_t row, const std::vector<double>& values) const {
    const LinearConstraint& c = rows_.at(row);
    double lhs = 0.0;
    for (const Term& t : c.terms) lhs += t.coeff * values.at(t.var.index);
    switch (c.sense) {
        case Sense::LessEqual: return std::max(0.0, lhs - c.rhs);
        case Sense::GreaterEqual: return std::max(0.0, c.rhs - lhs);
        case Sense::Equal: return std::fabs(lhs - c.rhs);
    }
    return 0.0;
}

std::string write_lp(const MilpModel& m) {
    std::ostringstream os;
    os << "\\ tbt model: " << m.num_variables() << " variables, " << m.num_constraints()
       << " constraints\n";
    os << "Minimize\n obj:";
    const auto& lin = m.linear_objective();
    const auto& quad = m.quadratic_objective();
    if (lin.empty() && quad.empty()) {
        os << " 0";
    } else {
        if (!lin.empty()) {
            os << ' ';
            write_terms(os, m, lin);
        }
        if (!quad.empty()) {
            os << (lin.empty() ? " [ " : " + [ ");
            for (std::size_t k = 0; k < quad.size(); ++k) {
                const QuadTerm& q = quad[k];
                if (k > 0 && k % 8 == 0) os << "\n   ";
                // LP convention: the bracket is halved, so coefficients double
                const double c = 2.0 * q.coeff;
                if (k == 0) {
                    os << (c < 0 ? "- " : "") << num(std::fabs(c));
                } else {
                    os << (c < 0 ? " - " : " + ") << num(std::fabs(c));
                }
                if (q.a == q.b) {
                    os << ' ' << m.variable(q.a).name << " ^2";
                } else {
                    os << ' ' << m.variable(q.a).name << " * " << m.variable(q.b).name;
                }
            }
            os << " ]/2";
        }
    }
    os << "\nSubject To\n";
    const auto& rows = m.constraints();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        os << " c" << i << ": ";
        write_terms(os, m, rows[i].terms);
        os << ' ' << sense_text(rows[i].sense) << ' ' << num(rows[i].rhs) << '\n';
    }

    std::ostringstream bounds, binaries, generals;
    for (const Variable& v : m.variables()) {
        switch (v.kind) {
            case VarKind::Binary:
                binaries << ' ' << v.name << '\n';
                break;
            case VarKind::Trit:
                bounds << " -1 <= " << v.name << " <= 1\n";
                generals << ' ' << v.name << '\n';
                break;
            case VarKind::Continuous:
                if (std::isinf(v.lb) && std::isinf(v.ub)) {
                    bounds << ' ' << v.name << " free\n";
                } else {
                    bounds << ' ' << num(v.lb) << " <= " << v.name << " <= " << num(v.ub) << '\n';
                }
                break;
        }
    }
    const std::string b = bounds.str();
    const std::string bin = binaries.str();
    const std::string gen = generals.str();
    if (!b.empty()) os << "Bounds\n" << b;
    if (!bin.empty()) os << "Binary\n" << bin;
    if (!gen.empty()) os << "Generals\n" << gen;
    os << "End\n";
    return os.str();
}

const char* status_name(SolveStatus s) noexcept {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Feasible: return "feasible";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::Error: return "error";
    }
    return "error";
}

double Solution::value(VarId v) const {
    if (v.index >= values.size() || !values[v.index]) {
        throw SolutionError(fmt::format("no value for variable {}", v.index));
    }
    return *values[v.index];
}

std::vector<double> Solution::dense() const {
    std::vector<double> out(values.size(), 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i]) out[i] = *values[i];
    }
    return out;
}

Solution load_solution(const MilpModel& model, std::string_view text, double tol_int) {
    Solution sol;
    sol.values.assign(model.num_variables(), std::nullopt);
    std::istringstream in{std::string(text)};
    std::string line;
    bool have_status = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key) || key.front() == '#') continue;
        if (!have_status) {
            std::string word;
            if (key != "status" || !(ls >> word)) {
                throw SolutionError("solution must start with a 'status <word>' line");
            }
            if (word == "optimal") sol.status = SolveStatus::Optimal;
            else if (word == "feasible") sol.status = SolveStatus::Feasible;
            else if (word == "infeasible") sol.status = SolveStatus::Infeasible;
            else if (word == "unbounded") sol.status = SolveStatus::Unbounded;
            else if (word == "error") sol.status = SolveStatus::Error;
            else throw SolutionError(fmt::format("unknown solution status '{}'", word));
            have_status = true;
            continue;
        }
        std::string value_text;
        if (!(ls >> value_text)) {
            throw SolutionError(fmt::format("line {}: expected 'name value'", lineno));
        }
        auto id = model.find(key);
        if (!id) throw SolutionError(fmt::format("line {}: unknown variable '{}'", lineno, key));
        double v = 0.0;
        try {
            std::size_t used = 0;
            v = std::stod(value_text, &used);
            if (used != value_text.size()) throw std::invalid_argument(value_text);
        } catch (const std::exception&) {
            throw SolutionError(fmt::format("line {}: malformed value '{}'", lineno, value_text));
        }
        const Variable& var = model.variable(*id);
        if (var.is_integer()) {
            const double r = std::round(v);
            if (std::fabs(v - r) > tol_int) {
                throw SolutionError(fmt::format("variable '{}' = {} is not integral within {}",
                                                key, v, tol_int));
            }
            if (r < var.lb || r > var.ub) {
                throw SolutionError(fmt::format("variable '{}' = {} outside its domain", key, r));
            }
            v = r;
        }
        sol.values[id->index] = v;
    }
    if (!have_status) throw SolutionError("missing status line");
    if (sol.has_values()) sol.objective = model.objective_value(sol.dense());
    return sol;
}

}  // namespace tbt
