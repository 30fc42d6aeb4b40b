#include "tbt/case_studies.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace tbt {

namespace {

Formula inside(const Region& r, std::size_t dim) {
    return box_region_formula(r.name, dim, r.coords, r.box, r.delta, Polarity::Inside);
}

Formula outside(const Region& r, std::size_t dim) {
    return box_region_formula(r.name, dim, r.coords, r.box, r.delta, Polarity::Outside);
}

Region region(std::string name, std::vector<std::size_t> coords, Bound bx, Bound by, double delta,
              bool obstacle) {
    return Region{std::move(name), std::move(coords), {bx, by}, delta, obstacle};
}

}  // namespace

CaseStudy robot_case(const RobotOptions& opts) {
    const int T = opts.horizon;
    if (T < 2) throw SynthesisError("robot case needs T >= 2");
    LinearSystem sys = with_constant_states(double_integrator(opts.dt), {{0.0, 1.0}});
    const std::size_t n = sys.n;
    const std::vector<std::size_t> pos{0, 2};

    const Region A = region("A", pos, {2, 4}, {2, 4}, 0.25, false);
    const Region B = region("B", pos, {-4, -2}, {2, 4}, 0.25, false);
    const Region C = region("C", pos, {-1, 1}, {-1, 1}, 0.25, false);
    std::vector<Region> obstacles{region("O1", pos, {-0.75, 0.75}, {2.5, 4.5}, 0.1, true)};
    if (opts.both_obstacles) {
        obstacles.push_back(region("O2", pos, {2.5, 3.5}, {-1.5, -0.5}, 0.1, true));
    }

    std::vector<double> batt_coeffs(n, 0.0);
    batt_coeffs[4] = 1.0;
    const Formula batt = Formula::predicate(make_predicate("batt", batt_coeffs, 0.8, 0.0));
    const Formula fA = Formula::eventually(0, T, inside(A, n));
    const Formula fB = Formula::eventually(0, T, inside(B, n));
    const Formula fC = Formula::eventually(0, T, inside(C, n));
    const Formula task =
        Formula::sequence({fA, Formula::sequence({Formula::selector({batt, fC}), fB})});
    std::vector<Formula> safe;
    for (const Region& o : obstacles) safe.push_back(outside(o, n));
    const Formula safety = Formula::always(0, T, Formula::conjunction(std::move(safe)));
    const Formula spec = Formula::conjunction({task, safety});

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    x0(4) = opts.battery;

    CaseStudy cs{SynthesisProblem{sys,
                                  ControlBounds{{{-1, 1}, {-1, 1}}},
                                  x0,
                                  make_spec(spec, n, 0),
                                  T,
                                  {1.0, 1.0},
                                  Enforcement::AtFinal,
                                  EncoderOptions{1e-4, 1e-6},
                                  std::nullopt},
                 {A, B, C}};
    cs.regions.insert(cs.regions.end(), obstacles.begin(), obstacles.end());
    return cs;
}

CaseStudy multi_agent_case(int horizon, double d_min) {
    const int T = horizon;
    if (T < 2) throw SynthesisError("multi-agent case needs T >= 2");
    const double dt = 0.5;
    LinearSystem sys = block_diag({double_integrator(dt), double_integrator(dt)});
    const std::size_t n = sys.n;
    const std::vector<std::size_t> p1{0, 2};
    const std::vector<std::size_t> p2{4, 6};

    const Bound gA_x{2, 4}, gB_x{-4, -2}, gC_x{-1, 1}, goal_y{2, 4};
    const Region a1C = region("C1", p1, gC_x, goal_y, 0.25, false);
    const Region a1B = region("B1", p1, gB_x, goal_y, 0.25, false);
    const Region a2A = region("A2", p2, gA_x, goal_y, 0.25, false);
    const Region a2C = region("C2", p2, gC_x, goal_y, 0.25, false);
    const Region O1 = region("O1", p1, {-0.75, 0.75}, {-0.5, 0.5}, 0.1, true);
    const Region O2 = region("O2", p1, {-0.5, 0.5}, {5.0, 6.0}, 0.1, true);

    const Formula phi1 = Formula::conjunction(
        {Formula::eventually(0, T, inside(a1C, n)), Formula::eventually(0, T, inside(a2A, n))});
    const Formula phi2 = Formula::conjunction(
        {Formula::eventually(0, T, inside(a1B, n)), Formula::eventually(0, T, inside(a2C, n))});

    std::vector<Formula> avoid;
    for (const Region& o : {O1, O2}) {
        avoid.push_back(outside(o, n));
        Region other = o;
        other.name = o.name + "b";
        other.coords = p2;
        avoid.push_back(outside(other, n));
    }
    const Formula spec = Formula::conjunction(
        {Formula::sequence({phi1, phi2}), Formula::always(0, T, Formula::conjunction(avoid)),
         Formula::always(0, T, l1_separation_formula("sep", n, p1, p2, d_min))});

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    x0(0) = -3.0;
    x0(4) = 3.0;
    return CaseStudy{SynthesisProblem{sys,
                                      ControlBounds{{{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}}},
                                      x0,
                                      make_spec(spec, n, 0),
                                      T,
                                      {1.0, 1.0, 1.0, 1.0},
                                      Enforcement::AtFinal,
                                      EncoderOptions{1e-4, 1e-6},
                                      std::nullopt},
                     {a1C, a1B, a2A, a2C, O1, O2}};
}

SynthesisProblem seq_chain_problem(int horizon, int k) {
    if (horizon < 1) throw SynthesisError("T must be at least 1");
    if (k < 2) throw SynthesisError("a chain needs k >= 2");
    LinearSystem sys;
    sys.n = 1;
    sys.m = 1;
    sys.A = {Eigen::MatrixXd::Identity(1, 1)};
    sys.B = {Eigen::MatrixXd::Identity(1, 1)};
    sys.state_box = {{-10, 10}};
    std::vector<Formula> steps;
    for (int i = 0; i < k; ++i) {
        // odd steps ask for x >= 0.5, even steps for x <= -0.5
        const double sign = i % 2 == 0 ? 1.0 : -1.0;
        steps.push_back(Formula::eventually(
            0, horizon,
            Formula::predicate(make_predicate(fmt::format("p{}", i + 1), {sign}, 0.5, 0.1))));
    }
    return SynthesisProblem{sys,
                            ControlBounds{{{-1, 1}}},
                            Eigen::VectorXd::Zero(1),
                            make_spec(Formula::sequence(std::move(steps)), 1, 0),
                            horizon,
                            {1.0},
                            Enforcement::AtFinal,
                            EncoderOptions{1e-4, 1e-6},
                            std::nullopt};
}

int first_entry(const Trace& x, const Region& r, int from) {
    for (int t = std::max(from, 0); t <= x.last_index(); ++t) {
        if (inside_box(x.at(t), r.coords, r.box, r.delta)) return t;
    }
    return -1;
}

double min_l1_distance(const Trace& x, const std::vector<std::size_t>& a,
                       const std::vector<std::size_t>& b) {
    double best = std::numeric_limits<double>::infinity();
    for (int t = 0; t <= x.last_index(); ++t) {
        const auto s = x.at(t);
        double d = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) d += std::fabs(s[a[k]] - s[b[k]]);
        best = std::min(best, d);
    }
    return best;
}

void write_regions_csv(std::ostream& out, const std::vector<Region>& regions) {
    out << "name,kind,xlo,xhi,ylo,yhi\n";
    for (const Region& r : regions) {
        out << fmt::format("{},{},{},{},{},{}\n", r.name, r.obstacle ? "obstacle" : "goal",
                           r.box[0].lo, r.box[0].hi, r.box[1].lo, r.box[1].hi);
    }
}

}  // namespace tbt
