#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "support.hpp"

using namespace tbt;

namespace {

Trace scalar_trace(std::vector<double> xs) {
    std::vector<std::vector<double>> s;
    for (double v : xs) s.push_back({v});
    return Trace(std::move(s));
}

Formula scalar_pred(const std::string& name, double a, double b, double delta) {
    return Formula::predicate(make_predicate(name, {a}, b, delta));
}

int as_int(Ternary v) { return to_int(v); }

}  // namespace

TEST_CASE("trace validation") {
    CHECK_THROWS_AS(Trace(std::vector<std::vector<double>>{}), TraceError);
    CHECK_THROWS_AS(Trace({{1.0}, {1.0, 2.0}}), TraceError);
    CHECK_THROWS_AS(Trace(std::vector<std::vector<double>>{{}}), TraceError);
    CHECK_THROWS_AS(Trace({{1.0}}, 0.0), TraceError);
    const Trace x = scalar_trace({1, 2});
    CHECK_THROWS_AS(x.at(2), TraceError);
    const Formula p = scalar_pred("p", 1, 0, 0);
    CHECK_THROWS_AS(eval(p, x, 1, 0), TraceError);
    CHECK_THROWS_AS(eval(p, x, 0, 2), TraceError);
    CHECK_THROWS_AS(eval(p, x, -1, 0), TraceError);
}

TEST_CASE("predicate cases") {
    const TernaryPredicate mu = make_predicate("mu", {1.0}, 0.0, 0.25);
    const std::vector<double> a{0.5}, b{0.0}, c{0.25}, d{-0.25};
    CHECK(eval_predicate(mu, a) == Ternary::True);
    CHECK(eval_predicate(mu, b) == Ternary::Unknown);
    CHECK(eval_predicate(mu, c) == Ternary::True);
    CHECK(eval_predicate(mu, d) == Ternary::False);
    const TernaryPredicate sharp = make_predicate("s", {1.0}, 0.0, 0.0);
    const std::vector<double> e{-0.1}, z{0.0};
    CHECK(eval_predicate(sharp, e) == Ternary::False);
    CHECK(eval_predicate(sharp, z) == Ternary::True);
}

TEST_CASE("temporal operators on partial traces") {
    const Formula mu = scalar_pred("mu", 1, 0, 0.5);
    const Formula g = Formula::always(0, 3, mu);
    CHECK(eval(g, scalar_trace({1, 1}), 0, 1) == Ternary::Unknown);
    CHECK(eval(g, scalar_trace({1, -1}), 0, 1) == Ternary::False);
    CHECK(eval(g, scalar_trace({1, 1, 1, 1}), 0, 3) == Ternary::True);
    const Formula f = Formula::eventually(0, 3, mu);
    CHECK(eval(f, scalar_trace({-1, 1}), 0, 1) == Ternary::True);
    CHECK(eval(f, scalar_trace({-1, -1}), 0, 1) == Ternary::Unknown);
    CHECK(eval(f, scalar_trace({-1, -1, -1, -1}), 0, 3) == Ternary::False);
    // window starting after the known prefix
    CHECK(eval(Formula::always(3, 4, mu), scalar_trace({1, 1, 1}), 0, 2) == Ternary::Unknown);
    CHECK(eval(Formula::eventually(3, 4, mu), scalar_trace({1, 1, 1}), 0, 2) == Ternary::Unknown);
}

TEST_CASE("sequence example") {
    const Formula up = scalar_pred("up", 1, 1, 0.5);
    const Formula down = scalar_pred("down", -1, 1, 0.5);
    const Formula s = Formula::sequence({Formula::eventually(0, 2, up), Formula::eventually(0, 2, down)});
    CHECK(eval(s, scalar_trace({2, 0, -2}), 0, 2) == Ternary::True);
    CHECK(eval(s, scalar_trace({-2, 0, 2}), 0, 2) != Ternary::True);
}

TEST_CASE("empty split range is false") {
    const Formula t = scalar_pred("t", 1, 0, 0);
    const Trace x = scalar_trace({1, 1, 1});
    for (int t1 = 0; t1 <= 2; ++t1) {
        CHECK(eval(Formula::sequence({t, t}), x, t1, t1) == Ternary::False);
        CHECK(eval(Formula::selector({t, t}), x, t1, t1) == Ternary::False);
    }
    CHECK(eval(Formula::sequence({t, t}), x, 0, 1) == Ternary::True);
}

TEST_CASE("selector succeeds on the first branch") {
    const Formula yes = scalar_pred("yes", 1, 0, 0);
    const Formula no = scalar_pred("no", -1, 0, 0.5);
    const Trace x = scalar_trace({1, 1, 1});
    CHECK(eval(Formula::selector({yes, no}), x, 0, 2) == Ternary::True);
    CHECK(eval(Formula::selector({no, no}), x, 0, 2) == Ternary::False);
}

TEST_CASE("verdict matrix shape") {
    const Formula mu = scalar_pred("mu", 1, 0, 0.25);
    const VerdictMatrix one = verdict_matrix(mu, scalar_trace({0.1}));
    CHECK(one.size() == 1);
    CHECK(one.at(0, 0) == Ternary::Unknown);
    const VerdictMatrix four = verdict_matrix(mu, scalar_trace({1, -1, 0, 1}));
    CHECK(four.size() == 10);
    CHECK(four.formula_hash() == mu.hash());
    CHECK_THROWS_AS(four.at(2, 1), TraceError);
    for (int t1 = 0; t1 <= 3; ++t1) {
        for (int t2 = t1; t2 <= 3; ++t2) CHECK(four.at(t1, t2) == four.at(t1, t1));
    }
}

TEST_CASE("memoized matrix, direct evaluation and the reference evaluator agree") {
    testing::Rng rng(2024);
    for (int round = 0; round < 300; ++round) {
        const std::size_t dim = static_cast<std::size_t>(testing::uniform_int(rng, 1, 2));
        testing::FormulaGen gen{testing::random_atoms(rng, dim, 3), 3, true, true};
        const Formula f = gen(rng, testing::uniform_int(rng, 1, 4));
        const Trace x = testing::random_trace(rng, testing::uniform_int(rng, 1, 7), dim);
        const VerdictMatrix m = verdict_matrix(f, x);
        for (int t1 = 0; t1 <= x.last_index(); ++t1) {
            for (int t2 = t1; t2 <= x.last_index(); ++t2) {
                const Ternary direct = eval(f, x, t1, t2);
                CHECK(m.at(t1, t2) == direct);
                CHECK(as_int(direct) == testing::ref_eval(f, x, t1, t2));
            }
        }
    }
}

TEST_CASE("k-ary sequence agrees with explicit split enumeration") {
    testing::Rng rng(77);
    for (int round = 0; round < 150; ++round) {
        testing::FormulaGen gen{testing::random_atoms(rng, 1, 3), 2, true, false};
        const int k = testing::uniform_int(rng, 3, 4);
        std::vector<Formula> parts;
        for (int i = 0; i < k; ++i) parts.push_back(gen(rng, 1));
        const Formula f = Formula::sequence(parts);
        const Trace x = testing::random_trace(rng, testing::uniform_int(rng, 1, 7), 1);
        for (int t1 = 0; t1 <= x.last_index(); ++t1) {
            for (int t2 = t1; t2 <= x.last_index(); ++t2) {
                CHECK(as_int(eval(f, x, t1, t2)) == testing::ref_eval(f, x, t1, t2));
            }
        }
    }
}

TEST_CASE("verdicts only sharpen as the trace grows for STL fragments") {
    // A T or F verdict at t2 persists at every t2' > t2 for formulas without
    // Seq/Sel (whose split range itself grows).
    testing::Rng rng(31);
    for (int round = 0; round < 200; ++round) {
        testing::FormulaGen gen{testing::random_atoms(rng, 2, 3), 3, true, false};
        const Formula f = gen(rng, 3);
        const Trace x = testing::random_trace(rng, 8, 2);
        const VerdictMatrix m = verdict_matrix(f, x);
        for (int t1 = 0; t1 <= 7; ++t1) {
            for (int t2 = t1; t2 < 7; ++t2) {
                if (m.at(t1, t2) != Ternary::Unknown) CHECK(m.at(t1, t2 + 1) == m.at(t1, t2));
            }
        }
    }
}

TEST_CASE("csv io") {
    std::istringstream in("t,x1,x2,u1\n0,1,2,0.5\n1,3,4,\n");
    const Trace x = read_trace_csv(in, 0.5);
    CHECK(x.size() == 2);
    CHECK(x.dim() == 2);
    CHECK(x.dt() == 0.5);
    CHECK(x.at(1)[1] == 4.0);

    std::ostringstream out;
    write_trace_csv(out, x);
    std::istringstream again(out.str());
    CHECK(read_trace_csv(again).samples() == x.samples());

    std::istringstream skip("t,x1\n0,1\n2,1\n");
    CHECK_THROWS_AS(read_trace_csv(skip), TraceError);
    std::istringstream noheader("0,1\n");
    CHECK_THROWS_AS(read_trace_csv(noheader), TraceError);
    std::istringstream junk("t,x1\n0,abc\n");
    CHECK_THROWS_AS(read_trace_csv(junk), TraceError);
    std::istringstream empty("t,x1\n");
    CHECK_THROWS_AS(read_trace_csv(empty), TraceError);

    const VerdictMatrix m = verdict_matrix(Formula::predicate(make_predicate("p", {1, 0}, 2, 0)), x);
    std::ostringstream v;
    write_verdicts_csv(v, m);
    CHECK(v.str() == "t1,t2,verdict\n0,0,F\n0,1,F\n1,1,T\n");
}
