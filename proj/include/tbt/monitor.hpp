// Partial-trajectory ternary monitor.
//
// eval(f, x, t1, t2) is the verdict of f evaluated at step t1 when only
// the samples x_0..x_t2 are known. Timed operators whose search window
// runs past t2 are capped at U unless a sample already short-circuits
// them. Seq/Sel quantify over split points in [t1, t2 - 1]; an empty split
// range (t1 == t2) is F, the empty disjunction.

#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "tbt/formula.hpp"
#include "tbt/ternary.hpp"

namespace tbt {

class TraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Finite sequence of equally sized real state vectors.
class Trace {
public:
    explicit Trace(std::vector<std::vector<double>> samples, double dt = 1.0);

    std::size_t size() const noexcept { return samples_.size(); }
    std::size_t dim() const noexcept { return samples_.front().size(); }
    int last_index() const noexcept { return static_cast<int>(samples_.size()) - 1; }
    double dt() const noexcept { return dt_; }
    std::span<const double> at(int t) const;
    const std::vector<std::vector<double>>& samples() const noexcept { return samples_; }

private:
    std::vector<std::vector<double>> samples_;
    double dt_;
};

Ternary eval_predicate(const TernaryPredicate& mu, std::span<const double> x);

/// Direct recursive evaluation; k-ary Seq/Sel are right-folded first.
/// Throws TraceError unless 0 <= t1 <= t2 <= x.last_index().
Ternary eval(const Formula& f, const Trace& x, int t1, int t2);

/// Upper-triangular (t1, t2) verdict table of one formula over one trace.
class VerdictMatrix {
public:
    VerdictMatrix(int last_index, std::uint64_t formula_hash);

    Ternary at(int t1, int t2) const;
    void set(int t1, int t2, Ternary v);
    int last_index() const noexcept { return last_; }
    std::size_t size() const noexcept { return entries_.size(); }
    std::uint64_t formula_hash() const noexcept { return hash_; }

private:
    std::size_t offset(int t1, int t2) const;

    int last_;
    std::uint64_t hash_;
    std::vector<Ternary> entries_;
};

/// Every 0 <= t1 <= t2 <= last index, memoized over (subformula, t1, t2).
VerdictMatrix verdict_matrix(const Formula& f, const Trace& x);

/// Reads `t,x1,...,xn[,u1,...]` CSV. Columns whose header starts with `x`
/// are state coordinates; other columns after `t` are ignored. Rows must
/// have t = 0, 1, 2, ...
Trace read_trace_csv(std::istream& in, double dt = 1.0);
void write_trace_csv(std::ostream& out, const Trace& x);

/// `t1,t2,verdict` with F/U/T symbols, row-major in t1 then t2.
void write_verdicts_csv(std::ostream& out, const VerdictMatrix& m);

}  // namespace tbt
