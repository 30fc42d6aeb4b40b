// Shared test helpers: seeded generators, a reference evaluator written
// directly from the semantics, and a brute-force MILP enumerator.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tbt/formula.hpp"
#include "tbt/milp.hpp"
#include "tbt/monitor.hpp"

namespace tbt::testing {

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Values on a 0.25 grid in [-2, 2] so predicate values never fall into the
/// epsilon exclusion bands.
inline Trace random_trace(Rng& rng, int length, std::size_t dim) {
    std::vector<std::vector<double>> xs;
    for (int t = 0; t < length; ++t) {
        auto& s = xs.emplace_back();
        for (std::size_t i = 0; i < dim; ++i) s.push_back(0.25 * uniform_int(rng, -8, 8));
    }
    return Trace(std::move(xs));
}

inline TernaryPredicate random_predicate(Rng& rng, std::size_t dim, const std::string& name) {
    std::vector<double> a(dim, 0.0);
    while (std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; })) {
        for (auto& v : a) v = uniform_int(rng, -1, 1);
    }
    const double b = 0.25 * uniform_int(rng, -4, 4);
    const double delta = 0.25 * uniform_int(rng, 0, 2);
    return make_predicate(name, a, b, delta);
}

struct FormulaGen {
    std::vector<Formula> atoms;
    int max_bound = 3;
    bool temporal = true;
    bool tbt = true;

    Formula operator()(Rng& rng, int depth) const {
        if (depth <= 0) return atoms[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(atoms.size()) - 1))];
        const int pick = uniform_int(rng, 0, tbt ? 7 : (temporal ? 5 : 3));
        auto sub = [&] { return (*this)(rng, depth - 1); };
        switch (pick) {
            case 0: return (*this)(rng, 0);
            case 1: return Formula::negation(sub());
            case 2: return Formula::conjunction({sub(), sub()});
            case 3: return Formula::disjunction({sub(), sub()});
            case 4:
            case 5: {
                const int a = uniform_int(rng, 0, max_bound);
                const int b = a + uniform_int(rng, 0, max_bound);
                return pick == 4 ? Formula::always(a, b, sub()) : Formula::eventually(a, b, sub());
            }
            case 6: return Formula::sequence({sub(), sub()});
            default: return Formula::selector({sub(), sub()});
        }
    }
};

inline std::vector<Formula> random_atoms(Rng& rng, std::size_t dim, int count) {
    std::vector<Formula> out;
    for (int i = 0; i < count; ++i) {
        out.push_back(Formula::predicate(random_predicate(rng, dim, "p" + std::to_string(i))));
    }
    return out;
}

/// Reference semantics. Integers -1/0/+1 with min/max, written without the
/// library's ternary helpers. k-ary Seq enumerates split vectors directly.
inline int ref_eval(const Formula& f, const Trace& x, int t1, int t2) {
    switch (f.kind()) {
        case NodeKind::Pred: {
            const TernaryPredicate& mu = f.pred();
            double v = -mu.offset;
            const auto s = x.at(t1);
            for (std::size_t i = 0; i < mu.coeffs.size(); ++i) v += mu.coeffs[i] * s[i];
            if (mu.delta == 0.0) return v >= 0.0 ? 1 : -1;
            if (v >= mu.delta) return 1;
            if (v <= -mu.delta) return -1;
            return 0;
        }
        case NodeKind::Not:
            return -ref_eval(f.child(), x, t1, t2);
        case NodeKind::And: {
            int r = 1;
            for (const auto& c : f.children()) r = std::min(r, ref_eval(c, x, t1, t2));
            return r;
        }
        case NodeKind::Or: {
            int r = -1;
            for (const auto& c : f.children()) r = std::max(r, ref_eval(c, x, t1, t2));
            return r;
        }
        case NodeKind::Always:
        case NodeKind::Eventually: {
            const bool g = f.kind() == NodeKind::Always;
            const int lo = f.interval().lo + t1;
            const int hi = f.interval().hi + t1;
            if (lo > t2) return 0;
            int r = g ? 1 : -1;
            for (int j = lo; j <= std::min(hi, t2); ++j) {
                const int v = ref_eval(f.child(), x, j, t2);
                r = g ? std::min(r, v) : std::max(r, v);
            }
            if (hi > t2) r = g ? std::min(r, 0) : std::max(r, 0);
            return r;
        }
        case NodeKind::Seq: {
            const auto& cs = f.children();
            const int k = static_cast<int>(cs.size());
            if (k == 1) return ref_eval(cs[0], x, t1, t2);
            // splits t1 <= s_1 < ... < s_{k-1} < t2, segment i = [s_{i-1}+1, s_i]
            int best = -1;
            std::vector<int> s(static_cast<std::size_t>(k - 1));
            std::function<void(int, int)> rec = [&](int i, int start) {
                if (i == k - 1) {
                    int v = 1;
                    int from = t1;
                    for (int j = 0; j < k; ++j) {
                        const int to = j == k - 1 ? t2 : s[static_cast<std::size_t>(j)];
                        v = std::min(v, ref_eval(cs[static_cast<std::size_t>(j)], x, from, to));
                        from = to + 1;
                    }
                    best = std::max(best, v);
                    return;
                }
                for (int tau = start; tau < t2; ++tau) {
                    s[static_cast<std::size_t>(i)] = tau;
                    rec(i + 1, tau + 1);
                }
            };
            rec(0, t1);
            return best;
        }
        case NodeKind::Sel: {
            const auto& cs = f.children();
            if (cs.size() == 1) return ref_eval(cs[0], x, t1, t2);
            std::vector<Formula> rest(cs.begin() + 1, cs.end());
            const Formula right = rest.size() == 1 ? rest[0] : Formula::selector(rest);
            int best = -1;
            for (int tau = t1; tau < t2; ++tau) {
                best = std::max({best, ref_eval(cs[0], x, t1, tau), ref_eval(right, x, tau + 1, t2)});
            }
            return best;
        }
    }
    return 0;
}

/// Enumerates every assignment of the integer variables of a small model,
/// with continuous variables fixed to `fixed`, and returns the set of values
/// `target` takes over all feasible assignments. Rows are checked as soon as
/// their last integer variable is assigned.
inline std::set<int> feasible_values(const MilpModel& m, const std::map<std::size_t, double>& fixed,
                                     VarId target) {
    const std::size_t n = m.num_variables();
    std::vector<double> vals(n, 0.0);
    std::vector<std::size_t> free;
    std::vector<int> order(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        const Variable& v = m.variable(VarId{i});
        if (v.kind == VarKind::Continuous) {
            vals[i] = fixed.at(i);
        } else {
            order[i] = static_cast<int>(free.size());
            free.push_back(i);
        }
    }
    // rows grouped by the position of their last free variable (-1: none)
    std::vector<std::vector<std::size_t>> due(free.size() + 1);
    for (std::size_t r = 0; r < m.num_constraints(); ++r) {
        int last = -1;
        for (const Term& t : m.constraints()[r].terms) last = std::max(last, order[t.var.index]);
        due[static_cast<std::size_t>(last + 1)].push_back(r);
    }
    auto rows_ok = [&](std::size_t slot) {
        for (std::size_t r : due[slot]) {
            if (m.violation(r, vals) > 1e-9) return false;
        }
        return true;
    };
    std::set<int> out;
    if (!rows_ok(0)) return out;
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == free.size()) {
            out.insert(static_cast<int>(std::lround(vals[target.index])));
            return;
        }
        const Variable& v = m.variable(VarId{free[k]});
        for (int val = static_cast<int>(v.lb); val <= static_cast<int>(v.ub); ++val) {
            vals[free[k]] = val;
            if (rows_ok(k + 1)) rec(k + 1);
        }
    };
    rec(0);
    return out;
}

}  // namespace tbt::testing
