#include "tbt/synthesis.hpp"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

namespace tbt {

const Eigen::MatrixXd& LinearSystem::A_at(int t) const {
    return A.size() == 1 ? A.front() : A.at(static_cast<std::size_t>(t));
}

const Eigen::MatrixXd& LinearSystem::B_at(int t) const {
    return B.size() == 1 ? B.front() : B.at(static_cast<std::size_t>(t));
}

void LinearSystem::validate(int horizon) const {
    if (n == 0 || m == 0) throw SynthesisError("system dimensions must be positive");
    if (A.empty() || B.empty()) throw SynthesisError("system matrices missing");
    auto count_ok = [&](std::size_t k) {
        return k == 1 || k >= static_cast<std::size_t>(horizon);
    };
    if (!count_ok(A.size()) || !count_ok(B.size())) {
        throw SynthesisError(fmt::format(
            "time-varying system needs one matrix per step (T = {}), got {} A and {} B", horizon,
            A.size(), B.size()));
    }
    for (const auto& a : A) {
        if (static_cast<std::size_t>(a.rows()) != n || static_cast<std::size_t>(a.cols()) != n) {
            throw SynthesisError(fmt::format("A must be {0}x{0}, got {1}x{2}", n, a.rows(), a.cols()));
        }
    }
    for (const auto& b : B) {
        if (static_cast<std::size_t>(b.rows()) != n || static_cast<std::size_t>(b.cols()) != m) {
            throw SynthesisError(fmt::format("B must be {}x{}, got {}x{}", n, m, b.rows(), b.cols()));
        }
    }
    if (state_box.size() != n) {
        throw SynthesisError(fmt::format("state box has {} entries, expected {}", state_box.size(), n));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Bound& bd = state_box[i];
        if (!std::isfinite(bd.lo) || !std::isfinite(bd.hi) || bd.lo > bd.hi) {
            throw SynthesisError(fmt::format("state box coordinate {} must be finite with lo <= hi", i));
        }
    }
}

LinearSystem double_integrator(double dt) {
    if (!(dt > 0.0)) throw SynthesisError("dt must be positive");
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(4, 4);
    A(0, 1) = dt;
    A(2, 3) = dt;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(4, 2);
    B(0, 0) = dt * dt / 2.0;
    B(1, 0) = dt;
    B(2, 1) = dt * dt / 2.0;
    B(3, 1) = dt;
    LinearSystem sys;
    sys.n = 4;
    sys.m = 2;
    sys.A = {A};
    sys.B = {B};
    sys.dt = dt;
    sys.state_box = {{-10, 10}, {-5, 5}, {-10, 10}, {-5, 5}};
    return sys;
}

LinearSystem block_diag(const std::vector<LinearSystem>& parts) {
    if (parts.empty()) throw SynthesisError("block_diag needs at least one system");
    LinearSystem out;
    out.dt = parts.front().dt;
    for (const auto& p : parts) {
        if (p.A.size() != 1 || p.B.size() != 1) {
            throw SynthesisError("block_diag supports time-invariant systems only");
        }
        out.n += p.n;
        out.m += p.m;
        out.state_box.insert(out.state_box.end(), p.state_box.begin(), p.state_box.end());
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out.n),
                                              static_cast<Eigen::Index>(out.n));
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out.n),
                                              static_cast<Eigen::Index>(out.m));
    Eigen::Index r = 0, c = 0;
    for (const auto& p : parts) {
        const auto n = static_cast<Eigen::Index>(p.n);
        const auto m = static_cast<Eigen::Index>(p.m);
        A.block(r, r, n, n) = p.A.front();
        B.block(r, c, n, m) = p.B.front();
        r += n;
        c += m;
    }
    out.A = {A};
    out.B = {B};
    return out;
}

LinearSystem with_constant_states(const LinearSystem& sys, const std::vector<Bound>& boxes) {
    if (sys.A.size() != 1 || sys.B.size() != 1) {
        throw SynthesisError("with_constant_states supports time-invariant systems only");
    }
    LinearSystem out = sys;
    const auto extra = static_cast<Eigen::Index>(boxes.size());
    const auto n = static_cast<Eigen::Index>(sys.n);
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n + extra, n + extra);
    A.topLeftCorner(n, n) = sys.A.front();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n + extra, static_cast<Eigen::Index>(sys.m));
    B.topRows(n) = sys.B.front();
    out.A = {A};
    out.B = {B};
    out.n = sys.n + boxes.size();
    out.state_box.insert(out.state_box.end(), boxes.begin(), boxes.end());
    return out;
}

DynamicsVars encode_dynamics(MilpModel& model, const LinearSystem& sys, const ControlBounds& bounds,
                             const Eigen::VectorXd& x0, int horizon) {
    if (horizon < 1) throw SynthesisError("horizon T must be at least 1");
    sys.validate(horizon);
    if (bounds.box.size() != sys.m) {
        throw SynthesisError(
            fmt::format("control box has {} entries, expected {}", bounds.box.size(), sys.m));
    }
    for (const Bound& b : bounds.box) {
        if (!(b.lo <= b.hi)) throw SynthesisError("control bounds need lo <= hi");
    }
    if (static_cast<std::size_t>(x0.size()) != sys.n) {
        throw SynthesisError(fmt::format("x0 has {} entries, expected {}", x0.size(), sys.n));
    }
    for (std::size_t i = 0; i < sys.n; ++i) {
        const double v = x0(static_cast<Eigen::Index>(i));
        if (v < sys.state_box[i].lo || v > sys.state_box[i].hi) {
            throw SynthesisError(fmt::format("x0[{}] = {} outside the state box [{}, {}]", i, v,
                                             sys.state_box[i].lo, sys.state_box[i].hi));
        }
    }

    DynamicsVars vars;
    for (int t = 0; t <= horizon; ++t) {
        auto& row = vars.states.emplace_back();
        for (std::size_t i = 0; i < sys.n; ++i) {
            row.push_back(model.add_continuous(fmt::format("x_{}_{}", t, i), sys.state_box[i].lo,
                                               sys.state_box[i].hi));
        }
    }
    for (int t = 0; t < horizon; ++t) {
        auto& row = vars.controls.emplace_back();
        for (std::size_t j = 0; j < sys.m; ++j) {
            row.push_back(model.add_continuous(fmt::format("u_{}_{}", t, j), bounds.box[j].lo,
                                               bounds.box[j].hi));
        }
    }
    for (std::size_t i = 0; i < sys.n; ++i) {
        model.add_constraint({{vars.states[0][i], 1.0}}, Sense::Equal,
                             x0(static_cast<Eigen::Index>(i)));
    }
    for (int t = 0; t < horizon; ++t) {
        const auto& A = sys.A_at(t);
        const auto& B = sys.B_at(t);
        const auto ts = static_cast<std::size_t>(t);
        for (std::size_t i = 0; i < sys.n; ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            // x_{t+1,i} - A_i x_t - B_i u_t = 0
            std::vector<Term> terms{{vars.states[ts + 1][i], 1.0}};
            for (std::size_t k = 0; k < sys.n; ++k) {
                const double a = A(r, static_cast<Eigen::Index>(k));
                if (a != 0.0) terms.push_back({vars.states[ts][k], -a});
            }
            for (std::size_t j = 0; j < sys.m; ++j) {
                const double b = B(r, static_cast<Eigen::Index>(j));
                if (b != 0.0) terms.push_back({vars.controls[ts][j], -b});
            }
            model.add_constraint(std::move(terms), Sense::Equal, 0.0);
        }
    }
    return vars;
}

double big_m_bound(const TernaryPredicate& mu, const std::vector<Bound>& box) {
    if (box.size() != mu.coeffs.size()) {
        throw SynthesisError(fmt::format("predicate '{}' has dimension {}, box has {}", mu.name,
                                         mu.coeffs.size(), box.size()));
    }
    double sup = 0.0;
    for (std::size_t i = 0; i < box.size(); ++i) {
        const double a = mu.coeffs[i];
        if (a == 0.0) continue;
        if (!std::isfinite(box[i].lo) || !std::isfinite(box[i].hi)) {
            throw SynthesisError(fmt::format(
                "predicate '{}' touches unbounded coordinate {}; big-M needs a finite box", mu.name, i));
        }
        sup += std::fabs(a) * std::max(std::fabs(box[i].lo), std::fabs(box[i].hi));
    }
    return sup + std::fabs(mu.offset) + mu.delta + 1.0;
}

namespace {

std::vector<double> unit(std::size_t n, std::size_t i, double sign) {
    std::vector<double> a(n, 0.0);
    a.at(i) = sign;
    return a;
}

}  // namespace

Formula box_region_formula(const std::string& name, std::size_t state_dim,
                           const std::vector<std::size_t>& coords, const std::vector<Bound>& box,
                           double delta, Polarity polarity) {
    if (coords.empty() || coords.size() != box.size()) {
        throw SynthesisError("box needs one [lo, hi] per selected coordinate");
    }
    if (delta < 0.0) throw SynthesisError("box delta must be nonnegative");
    std::vector<Formula> facets;
    for (std::size_t k = 0; k < coords.size(); ++k) {
        if (coords[k] >= state_dim) throw SynthesisError("box coordinate out of range");
        if (!(box[k].lo < box[k].hi)) {
            throw SynthesisError(fmt::format("degenerate box '{}' on axis {}", name, k));
        }
        const std::size_t c = coords[k];
        if (polarity == Polarity::Inside) {
            // x_c - lo >= delta, -x_c + hi >= delta
            facets.push_back(Formula::predicate(make_predicate(
                fmt::format("{}_{}lo", name, k), unit(state_dim, c, 1.0), box[k].lo, delta)));
            facets.push_back(Formula::predicate(make_predicate(
                fmt::format("{}_{}hi", name, k), unit(state_dim, c, -1.0), -box[k].hi, delta)));
        } else {
            // -x_c + lo >= delta, x_c - hi >= delta
            facets.push_back(Formula::predicate(make_predicate(
                fmt::format("{}_{}lo", name, k), unit(state_dim, c, -1.0), -box[k].lo, delta)));
            facets.push_back(Formula::predicate(make_predicate(
                fmt::format("{}_{}hi", name, k), unit(state_dim, c, 1.0), box[k].hi, delta)));
        }
    }
    return polarity == Polarity::Inside ? Formula::conjunction(std::move(facets))
                                        : Formula::disjunction(std::move(facets));
}

Formula l1_separation_formula(const std::string& name, std::size_t state_dim,
                              const std::vector<std::size_t>& agent_i,
                              const std::vector<std::size_t>& agent_j, double d_min) {
    if (!(d_min > 0.0)) throw SynthesisError("d_min must be positive");
    if (agent_i.size() != agent_j.size() || agent_i.empty()) {
        throw SynthesisError("agents need matching position coordinates");
    }
    std::vector<Formula> sides;
    for (std::size_t k = 0; k < agent_i.size(); ++k) {
        if (agent_i[k] >= state_dim || agent_j[k] >= state_dim || agent_i[k] == agent_j[k]) {
            throw SynthesisError("invalid agent coordinates");
        }
        for (double sign : {1.0, -1.0}) {
            std::vector<double> a(state_dim, 0.0);
            a[agent_i[k]] = sign;
            a[agent_j[k]] = -sign;
            sides.push_back(Formula::predicate(make_predicate(
                fmt::format("{}_{}{}", name, k, sign > 0 ? "p" : "m"), std::move(a), d_min, 0.0)));
        }
    }
    return Formula::disjunction(std::move(sides));
}

bool inside_box(std::span<const double> x, const std::vector<std::size_t>& coords,
                const std::vector<Bound>& box, double delta) {
    for (std::size_t k = 0; k < coords.size(); ++k) {
        const double v = x[coords[k]];
        if (v - box[k].lo < delta || box[k].hi - v < delta) return false;
    }
    return true;
}

namespace {

Formula map_predicates(const Formula& f, const Eigen::MatrixXd& C) {
    switch (f.kind()) {
        case NodeKind::Pred: {
            const TernaryPredicate& mu = f.pred();
            if (static_cast<Eigen::Index>(mu.coeffs.size()) != C.rows()) {
                throw SynthesisError(fmt::format("predicate '{}' has dimension {}, output has {}",
                                                 mu.name, mu.coeffs.size(), C.rows()));
            }
            Eigen::Map<const Eigen::VectorXd> a(mu.coeffs.data(),
                                                static_cast<Eigen::Index>(mu.coeffs.size()));
            Eigen::VectorXd mapped = C.transpose() * a;
            return Formula::predicate(make_predicate(
                mu.name, std::vector<double>(mapped.data(), mapped.data() + mapped.size()),
                mu.offset, mu.delta));
        }
        case NodeKind::Not:
            return Formula::negation(map_predicates(f.child(), C));
        case NodeKind::Always:
        case NodeKind::Eventually: {
            Formula c = map_predicates(f.child(), C);
            return f.kind() == NodeKind::Always
                       ? Formula::always(f.interval().lo, f.interval().hi, std::move(c))
                       : Formula::eventually(f.interval().lo, f.interval().hi, std::move(c));
        }
        default: {
            std::vector<Formula> cs;
            for (const Formula& c : f.children()) cs.push_back(map_predicates(c, C));
            switch (f.kind()) {
                case NodeKind::And: return Formula::conjunction(std::move(cs));
                case NodeKind::Or: return Formula::disjunction(std::move(cs));
                case NodeKind::Seq: return Formula::sequence(std::move(cs));
                default: return Formula::selector(std::move(cs));
            }
        }
    }
}

}  // namespace

BuiltProblem build_problem(const SynthesisProblem& p) {
    const LinearSystem& sys = p.system;
    const int T = p.horizon;
    if (T < 1) throw SynthesisError("horizon T must be at least 1");
    const int t_star = p.spec.t_star;
    if (t_star < 0 || t_star > T) {
        throw SynthesisError(fmt::format("t* = {} outside [0, {}]", t_star, T));
    }
    if (p.weights.size() != sys.m) {
        throw SynthesisError(fmt::format("R has {} entries, expected {}", p.weights.size(), sys.m));
    }
    for (double r : p.weights) {
        if (!(r >= 0.0)) throw SynthesisError("R entries must be nonnegative");
    }

    auto state_formula = [&] {
        if (!p.output_map) {
            if (p.spec.state_dim != sys.n) {
                throw SynthesisError(fmt::format("spec is over dimension {}, system state has {}",
                                                 p.spec.state_dim, sys.n));
            }
            return p.spec.formula;
        }
        if (static_cast<std::size_t>(p.output_map->cols()) != sys.n) {
            throw SynthesisError("output map C must have n columns");
        }
        return map_predicates(p.spec.formula, *p.output_map);
    };
    BuiltProblem out{nullptr, nullptr, {}, state_formula(), t_star, T, {}};
    out.warnings = p.spec.warnings;
    const Horizon h = formula_horizon(out.state_formula);
    if (h.bounded && t_star + h.offset > T) {
        out.warnings.push_back(fmt::format(
            "spec horizon {} from t* = {} exceeds T = {}; late windows can only short-circuit",
            h.offset, t_star, T));
    }

    out.model = std::make_unique<MilpModel>();
    out.vars = encode_dynamics(*out.model, sys, p.bounds, p.x0, T);

    std::map<std::string, double> big_m;
    for_each_predicate(out.state_formula, [&](const TernaryPredicate& mu) {
        big_m[mu.name] = big_m_bound(mu, sys.state_box);
    });
    out.context = std::make_unique<EncodingContext>(*out.model, out.vars.states, T, std::move(big_m),
                                                    p.encoder);
    out.context->enforce_satisfaction(out.state_formula, p.enforcement, t_star);

    for (int t = 0; t < T; ++t) {
        for (std::size_t j = 0; j < sys.m; ++j) {
            if (p.weights[j] == 0.0) continue;
            const VarId u = out.vars.controls[static_cast<std::size_t>(t)][j];
            out.model->add_quadratic_objective(u, u, p.weights[j]);
        }
    }
    return out;
}

std::string expand_solver_command(const std::string& tmpl, const std::filesystem::path& lp,
                                  const std::filesystem::path& sol, double time_limit_s) {
    auto quote = [](const std::string& s) {
        std::string q = "'";
        for (char c : s) {
            if (c == '\'') q += "'\\''";
            else q += c;
        }
        return q + "'";
    };
    std::string out;
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl.compare(i, 4, "{lp}") == 0) {
            out += quote(lp.string());
            i += 4;
        } else if (tmpl.compare(i, 5, "{sol}") == 0) {
            out += quote(sol.string());
            i += 5;
        } else if (tmpl.compare(i, 12, "{time_limit}") == 0) {
            out += fmt::format("{}", time_limit_s);
            i += 12;
        } else {
            out += tmpl[i++];
        }
    }
    return out;
}

int run_command(const std::string& command, double timeout_s) {
    const pid_t pid = fork();
    if (pid < 0) throw SolverError("fork failed");
    if (pid == 0) {
        setpgid(0, 0);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    setpgid(pid, pid);
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(timeout_s));
    int status = 0;
    for (;;) {
        const pid_t r = waitpid(pid, &status, WNOHANG);
        if (r == pid) break;
        if (r < 0) throw SolverError("waitpid failed");
        if (std::chrono::steady_clock::now() > deadline) {
            kill(-pid, SIGKILL);
            waitpid(pid, &status, 0);
            throw SolverTimeout(fmt::format("solver exceeded {} s", timeout_s));
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
    return -1;
}

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw SolverError(fmt::format("cannot read '{}'", p.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

SynthesisResult solve_built(const BuiltProblem& built, const SynthesisProblem& p,
                            const SolverOptions& opts) {
    if (opts.command.empty()) throw SolverError("no solver command configured");
    SynthesisResult res;
    res.stats = built.model->stats();
    std::filesystem::create_directories(opts.work_dir);
    res.lp_path = opts.work_dir / "problem.lp";
    res.solution_path = opts.work_dir / "problem.sol";
    {
        std::ofstream lp(res.lp_path, std::ios::binary);
        lp << write_lp(*built.model);
        if (!lp) throw SolverError(fmt::format("cannot write '{}'", res.lp_path.string()));
    }
    std::filesystem::remove(res.solution_path);

    const std::string cmd =
        expand_solver_command(opts.command, res.lp_path, res.solution_path, opts.time_limit_s);
    const auto start = std::chrono::steady_clock::now();
    // the solver gets its own time limit; the grace period covers start-up
    // and writing the incumbent
    const int code = run_command(cmd, opts.time_limit_s + 60.0);
    res.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (code != 0) {
        throw SolverError(fmt::format("solver command exited with status {}: {}", code, cmd));
    }
    if (!std::filesystem::exists(res.solution_path)) {
        throw SolverError("solver produced no solution file");
    }
    Solution sol;
    try {
        sol = load_solution(*built.model, read_file(res.solution_path), opts.tol_int);
    } catch (const SolutionError& e) {
        throw SolverError(std::string("unreadable solution: ") + e.what());
    }
    res.status = sol.status;
    if (!sol.has_values()) return res;
    res.objective = sol.objective;

    const LinearSystem& sys = p.system;
    const int T = built.horizon;
    std::vector<std::vector<double>> xs;
    try {
        for (int t = 0; t <= T; ++t) {
            auto& row = xs.emplace_back();
            for (VarId v : built.vars.states[static_cast<std::size_t>(t)]) row.push_back(sol.value(v));
        }
        for (int t = 0; t < T; ++t) {
            auto& row = res.controls.emplace_back();
            for (VarId v : built.vars.controls[static_cast<std::size_t>(t)]) row.push_back(sol.value(v));
        }
    } catch (const SolutionError& e) {
        throw SolverError(std::string("incomplete solution: ") + e.what());
    }
    double residual = 0.0;
    for (std::size_t i = 0; i < sys.n; ++i) {
        residual = std::max(residual, std::fabs(xs[0][i] - p.x0(static_cast<Eigen::Index>(i))));
    }
    for (int t = 0; t < T; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        Eigen::Map<const Eigen::VectorXd> x(xs[ts].data(), static_cast<Eigen::Index>(sys.n));
        Eigen::Map<const Eigen::VectorXd> u(res.controls[ts].data(),
                                            static_cast<Eigen::Index>(sys.m));
        Eigen::Map<const Eigen::VectorXd> next(xs[ts + 1].data(), static_cast<Eigen::Index>(sys.n));
        const Eigen::VectorXd r = next - sys.A_at(t) * x - sys.B_at(t) * u;
        residual = std::max(residual, r.cwiseAbs().maxCoeff());
    }
    res.max_dynamics_residual = residual;
    res.trajectory.emplace(xs, sys.dt);
    if (auto root = built.context->lookup(normalize_kary(built.state_formula), built.t_star, T)) {
        res.root_value = sol.values[root->index].value_or(0.0);
    }
    if (residual > 1e-6) {
        throw CertificateError(
            fmt::format("returned trajectory violates the dynamics (residual {})", residual));
    }

    if (p.enforcement == Enforcement::AtFinal) {
        res.certificate = eval(built.state_formula, *res.trajectory, built.t_star, T);
    } else {
        res.certificate = Ternary::False;
        for (int tau = built.t_star + 1; tau <= T; ++tau) {
            res.certificate =
                t_or({res.certificate, eval(built.state_formula, *res.trajectory, built.t_star, tau)});
        }
    }
    if (res.certificate != Ternary::True) {
        throw CertificateError(fmt::format(
            "solver reported {} but the monitor verdict of the spec is {}", status_name(sol.status),
            to_char(res.certificate)));
    }
    return res;
}

SynthesisResult solve(const SynthesisProblem& p, const SolverOptions& opts) {
    const BuiltProblem built = build_problem(p);
    return solve_built(built, p, opts);
}

}  // namespace tbt
