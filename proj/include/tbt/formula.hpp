// Formula AST for temporal behavior tree specifications.
//
// A Formula is an immutable, reference-counted tree. Nodes carry a
// structural hash computed at construction, so syntactically identical
// subtrees hash equal regardless of where they were built. The hash is
// what the monitor memo and the encoder variable sharing are keyed on.

#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tbt {

/// Thrown for malformed formulas and predicates.
class FormulaError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// mu(x) := a^T x - b compared against the band [-delta, delta].
struct TernaryPredicate {
    std::string name;
    std::vector<double> coeffs;  // a
    double offset = 0.0;         // b
    double delta = 0.0;

    /// a^T x - b. Throws FormulaError on dimension mismatch.
    double value(std::span<const double> x) const;

    friend bool operator==(const TernaryPredicate&, const TernaryPredicate&) = default;
};

/// Validates and builds a predicate: at least one nonzero coefficient,
/// finite entries, delta >= 0.
TernaryPredicate make_predicate(std::string name, std::vector<double> coeffs,
                                double offset, double delta);

enum class NodeKind : std::uint8_t { Pred, Not, And, Or, Always, Eventually, Seq, Sel };

const char* kind_name(NodeKind k) noexcept;

/// Discrete closed interval [lo, hi] of time steps.
struct TimeInterval {
    int lo = 0;
    int hi = 0;
    friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

class Formula {
public:
    static Formula predicate(TernaryPredicate mu);
    static Formula negation(Formula f);
    static Formula conjunction(std::vector<Formula> fs);
    static Formula disjunction(std::vector<Formula> fs);
    static Formula always(int a, int b, Formula f);
    static Formula eventually(int a, int b, Formula f);
    static Formula sequence(std::vector<Formula> fs);
    static Formula selector(std::vector<Formula> fs);

    NodeKind kind() const noexcept;
    /// Only valid for Pred nodes.
    const TernaryPredicate& pred() const;
    std::span<const Formula> children() const noexcept;
    const Formula& child(std::size_t i = 0) const;
    /// Only valid for Always/Eventually nodes.
    TimeInterval interval() const;

    std::uint64_t hash() const noexcept;
    /// True when the subtree contains a timed operator or a Seq/Sel node.
    bool is_timed() const noexcept;
    /// Number of nodes in the tree (shared subtrees counted per occurrence).
    std::size_t size() const noexcept;

    friend bool operator==(const Formula& lhs, const Formula& rhs);

private:
    struct Node;
    explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    static Formula make(Node node);

    std::shared_ptr<const Node> node_;
};

/// Hex rendering of a structural hash, 16 digits.
std::string hash_hex(std::uint64_t h);

/// Rewrites k-ary Seq/Sel (k > 2) into right-nested binary chains and
/// collapses single-child Seq/Sel. Applied recursively; idempotent.
Formula normalize_kary(const Formula& f);

/// Maximum future offset needed to decide a formula at one time step.
struct Horizon {
    bool bounded = true;
    int offset = 0;

    static Horizon Bounded(int off) { return {true, off}; }
    static Horizon Unbounded() { return {false, 0}; }
    friend bool operator==(const Horizon&, const Horizon&) = default;
};

Horizon formula_horizon(const Formula& f);

inline std::uint64_t structural_hash(const Formula& f) noexcept { return f.hash(); }

/// DSL rendering, e.g. `seq(F[0,5] pA, not(pB))`.
std::string to_string(const Formula& f);
std::ostream& operator<<(std::ostream& os, const Formula& f);

/// Calls fn on every predicate reachable from f (with repetitions).
template <typename Fn>
void for_each_predicate(const Formula& f, Fn&& fn) {
    if (f.kind() == NodeKind::Pred) {
        fn(f.pred());
        return;
    }
    for (const Formula& c : f.children()) for_each_predicate(c, fn);
}

}  // namespace tbt
