// Ternary mixed-integer encoding of partial-trajectory STL/TBT formulas.
//
// Every formula verdict z_{t1,t2} is a trit in {-1, 0, +1}. Predicates are
// linked to the state variables through three indicator binaries (two when
// delta = 0) and big-M rows; conjunction and disjunction are exact min/max
// schemas with one selection binary per operand. Pairs (t1, t2) are only
// materialized when reachable from the root, and each (subformula, t1, t2)
// owns exactly one trit.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "tbt/formula.hpp"
#include "tbt/milp.hpp"
#include "tbt/ternary.hpp"

namespace tbt {

class EncodingError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct EncoderOptions {
    /// Strictness gap for the U band: |f| <= delta - epsilon.
    double epsilon = 1e-4;
    /// Extra margin added to the T and F thresholds (f >= delta + margin,
    /// f <= -delta - margin). Zero reproduces the textbook rows; synthesis
    /// uses a small positive value so solver round-off cannot push an
    /// indicated T or F sample back into the monitor's U band.
    double threshold_margin = 0.0;
};

/// Operand of a min/max schema: a trit variable or the constant U.
struct Operand {
    std::optional<VarId> var;

    static Operand unknown() { return Operand{}; }
    static Operand of(VarId v) { return Operand{v}; }
};

enum class Enforcement { AtFinal, AnyHorizon };

/// One materialized (subformula, t1, t2) verdict. Untimed subformulas are
/// recorded once per t1 with t2 == t1.
struct MaterializedNode {
    Formula formula;
    int t1 = 0;
    int t2 = 0;
    VarId var;
};

class EncodingContext {
public:
    /// state_vars[t][i] is x_{t,i} for t = 0..horizon. big_m maps predicate
    /// names to their big-M constant.
    EncodingContext(MilpModel& model, std::vector<std::vector<VarId>> state_vars, int horizon,
                    std::map<std::string, double> big_m, EncoderOptions options = {});

    MilpModel& model() noexcept { return model_; }
    int horizon() const noexcept { return horizon_; }
    const EncoderOptions& options() const noexcept { return options_; }

    VarId encode_predicate(const TernaryPredicate& mu, int t);
    VarId encode_not(VarId child, const std::string& name);
    VarId encode_and(std::span<const Operand> operands, const std::string& name);
    VarId encode_or(std::span<const Operand> operands, const std::string& name);

    /// Always/Eventually node at (t1, t2).
    VarId encode_temporal(const Formula& node, int t1, int t2);
    /// Binary Seq/Sel node at (t1, t2).
    VarId encode_seq(const Formula& node, int t1, int t2);
    VarId encode_sel(const Formula& node, int t1, int t2);

    /// Root trit z_{t_star, horizon}. The formula is normalized first.
    VarId encode_formula(const Formula& f, int t_star);
    /// Memoized dispatch for an already normalized formula.
    VarId encode_at(const Formula& f, int t1, int t2);

    /// AtFinal: z_{t*,T} = 1. AnyHorizon: one indicator per tau in
    /// [t*+1, T] with sum >= 1 and z_{t*,tau} >= 1 - 2(1 - b_tau).
    void enforce_satisfaction(const Formula& f, Enforcement mode, int t_star);

    const std::vector<MaterializedNode>& materialized() const noexcept { return nodes_; }
    std::optional<VarId> lookup(const Formula& f, int t1, int t2) const;

    /// Inner conjunction/disjunction groups built for a Seq/Sel node, summed
    /// over all of its materialized pairs.
    std::size_t split_groups(const Formula& node) const;
    /// Groups of the innermost Seq/Sel along the right spine of a
    /// normalized chain; for a k-ary chain at (t1, t2) this is
    /// C(t2 - t1, k - 1).
    std::size_t leaf_groups(const Formula& root) const;

    /// Node-to-variable report, one line per materialized pair.
    std::string explain() const;

private:
    struct Key {
        std::uint64_t hash;
        int t1;
        int t2;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept;
    };

    VarId fixed_trit(const std::string& name, Ternary value);
    VarId encode_split(const Formula& node, int t1, int t2, bool seq);
    std::string node_tag(const Formula& f, int t1, int t2) const;
    double big_m(const TernaryPredicate& mu) const;

    MilpModel& model_;
    std::vector<std::vector<VarId>> state_vars_;
    int horizon_;
    std::map<std::string, double> big_m_;
    EncoderOptions options_;

    std::unordered_map<Key, VarId, KeyHash> memo_;
    std::map<std::pair<std::string, int>, std::pair<TernaryPredicate, VarId>> pred_memo_;
    std::unordered_map<std::uint64_t, std::size_t> groups_;
    std::vector<MaterializedNode> nodes_;
};

/// Closed-form row count of the scaling benchmark model: a scalar single
/// integrator over horizon T with spec seq(F[0,T] p, F[0,T] q), both
/// predicates with delta > 0, root at (0, T) and at-final enforcement.
std::size_t seq_pair_constraint_count(int T);

}  // namespace tbt
