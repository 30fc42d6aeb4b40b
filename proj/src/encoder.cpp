#include "tbt/encoder.hpp"

#include <sstream>

#include <fmt/format.h>

namespace tbt {

std::size_t EncodingContext::KeyHash::operator()(const Key& k) const noexcept {
    std::uint64_t h = k.hash;
    h ^= (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.t1)) << 32) ^
         static_cast<std::uint32_t>(k.t2);
    h *= 0x9e3779b97f4a7c15ULL;
    return static_cast<std::size_t>(h ^ (h >> 29));
}

EncodingContext::EncodingContext(MilpModel& model, std::vector<std::vector<VarId>> state_vars,
                                 int horizon, std::map<std::string, double> big_m,
                                 EncoderOptions options)
    : model_(model),
      state_vars_(std::move(state_vars)),
      horizon_(horizon),
      big_m_(std::move(big_m)),
      options_(options) {
    if (horizon_ < 0) throw EncodingError("horizon must be nonnegative");
    if (state_vars_.size() != static_cast<std::size_t>(horizon_) + 1) {
        throw EncodingError(fmt::format("expected state variables for {} time steps, got {}",
                                        horizon_ + 1, state_vars_.size()));
    }
    if (!(options_.epsilon > 0.0)) throw EncodingError("epsilon must be positive");
    if (!(options_.threshold_margin >= 0.0)) throw EncodingError("threshold margin must be >= 0");
}

double EncodingContext::big_m(const TernaryPredicate& mu) const {
    auto it = big_m_.find(mu.name);
    if (it == big_m_.end()) {
        throw EncodingError(fmt::format("no big-M constant for predicate '{}'", mu.name));
    }
    return it->second;
}

VarId EncodingContext::encode_predicate(const TernaryPredicate& mu, int t) {
    if (t < 0 || t > horizon_) {
        throw EncodingError(fmt::format("predicate '{}' requested at t = {} outside [0,{}]",
                                        mu.name, t, horizon_));
    }
    if (auto it = pred_memo_.find({mu.name, t}); it != pred_memo_.end()) {
        if (!(it->second.first == mu)) {
            throw EncodingError(fmt::format("conflicting definitions of predicate '{}'", mu.name));
        }
        return it->second.second;
    }
    const double M = big_m(mu);
    const double delta = mu.delta;
    const double eps = options_.epsilon;
    const double margin = options_.threshold_margin;
    if (delta > 0.0 && delta < 2.0 * eps) {
        throw EncodingError(fmt::format(
            "predicate '{}': delta = {} leaves an empty U band for epsilon = {}", mu.name, delta,
            eps));
    }
    const auto& xs = state_vars_.at(static_cast<std::size_t>(t));
    if (xs.size() != mu.coeffs.size()) {
        throw EncodingError(fmt::format("predicate '{}' has dimension {}, state has {}", mu.name,
                                        mu.coeffs.size(), xs.size()));
    }
    // a^T x_t plus one indicator term
    auto row = [&](VarId indicator, double coeff) {
        std::vector<Term> terms;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (mu.coeffs[i] != 0.0) terms.push_back({xs[i], mu.coeffs[i]});
        }
        terms.push_back({indicator, coeff});
        return terms;
    };

    const std::string base = fmt::format("zp_{}_{}", mu.name, t);
    const double b = mu.offset;
    VarId z;
    if (delta > 0.0) {
        VarId up = model_.add_binary(base + "_p");
        VarId u0 = model_.add_binary(base + "_z");
        VarId um = model_.add_binary(base + "_m");
        z = model_.add_trit(base);
        model_.add_constraint({{up, 1.0}, {u0, 1.0}, {um, 1.0}}, Sense::Equal, 1.0);
        model_.add_constraint({{z, 1.0}, {up, -1.0}, {um, 1.0}}, Sense::Equal, 0.0);
        // f >= delta - M(1 - u+)
        model_.add_constraint(row(up, -M), Sense::GreaterEqual, b + delta + margin - M);
        // f <= -delta + M(1 - u-)
        model_.add_constraint(row(um, M), Sense::LessEqual, b - delta - margin + M);
        // f <= delta - eps + M(1 - u0)
        model_.add_constraint(row(u0, M), Sense::LessEqual, b + delta - eps + M);
        // f >= -delta + eps - M(1 - u0)
        model_.add_constraint(row(u0, -M), Sense::GreaterEqual, b - delta + eps - M);
    } else {
        VarId up = model_.add_binary(base + "_p");
        VarId um = model_.add_binary(base + "_m");
        z = model_.add_trit(base);
        model_.add_constraint({{up, 1.0}, {um, 1.0}}, Sense::Equal, 1.0);
        model_.add_constraint({{z, 1.0}, {up, -1.0}, {um, 1.0}}, Sense::Equal, 0.0);
        // f >= -M(1 - u+)
        model_.add_constraint(row(up, -M), Sense::GreaterEqual, b + margin - M);
        // f <= -eps + M(1 - u-)
        model_.add_constraint(row(um, M), Sense::LessEqual, b - eps + M);
    }
    pred_memo_.emplace(std::pair{mu.name, t}, std::pair{mu, z});
    return z;
}

VarId EncodingContext::encode_not(VarId child, const std::string& name) {
    if (model_.variable(child).kind != VarKind::Trit) {
        throw EncodingError("negation operand must be a trit");
    }
    VarId z = model_.add_trit(name);
    model_.add_constraint({{z, 1.0}, {child, 1.0}}, Sense::Equal, 0.0);
    return z;
}

VarId EncodingContext::encode_and(std::span<const Operand> operands, const std::string& name) {
    if (operands.empty()) throw EncodingError("conjunction needs at least one operand");
    VarId z = model_.add_trit(name);
    std::vector<VarId> sel;
    sel.reserve(operands.size());
    for (std::size_t j = 0; j < operands.size(); ++j) {
        sel.push_back(model_.add_binary(fmt::format("sb_{}_{}", name, j)));
    }
    // z <= z_j
    for (const Operand& op : operands) {
        if (op.var) {
            model_.add_constraint({{z, 1.0}, {*op.var, -1.0}}, Sense::LessEqual, 0.0);
        } else {
            model_.add_constraint({{z, 1.0}}, Sense::LessEqual, 0.0);
        }
    }
    std::vector<Term> pick;
    for (VarId b : sel) pick.push_back({b, 1.0});
    model_.add_constraint(std::move(pick), Sense::Equal, 1.0);
    // z >= z_j - 2(1 - b_j)
    for (std::size_t j = 0; j < operands.size(); ++j) {
        if (operands[j].var) {
            model_.add_constraint({{z, 1.0}, {*operands[j].var, -1.0}, {sel[j], -2.0}},
                                  Sense::GreaterEqual, -2.0);
        } else {
            model_.add_constraint({{z, 1.0}, {sel[j], -2.0}}, Sense::GreaterEqual, -2.0);
        }
    }
    return z;
}

VarId EncodingContext::encode_or(std::span<const Operand> operands, const std::string& name) {
    if (operands.empty()) throw EncodingError("disjunction needs at least one operand");
    VarId z = model_.add_trit(name);
    std::vector<VarId> sel;
    sel.reserve(operands.size());
    for (std::size_t j = 0; j < operands.size(); ++j) {
        sel.push_back(model_.add_binary(fmt::format("sb_{}_{}", name, j)));
    }
    // z >= z_j
    for (const Operand& op : operands) {
        if (op.var) {
            model_.add_constraint({{z, 1.0}, {*op.var, -1.0}}, Sense::GreaterEqual, 0.0);
        } else {
            model_.add_constraint({{z, 1.0}}, Sense::GreaterEqual, 0.0);
        }
    }
    std::vector<Term> pick;
    for (VarId b : sel) pick.push_back({b, 1.0});
    model_.add_constraint(std::move(pick), Sense::Equal, 1.0);
    // z <= z_j + 2(1 - b_j)
    for (std::size_t j = 0; j < operands.size(); ++j) {
        if (operands[j].var) {
            model_.add_constraint({{z, 1.0}, {*operands[j].var, -1.0}, {sel[j], 2.0}},
                                  Sense::LessEqual, 2.0);
        } else {
            model_.add_constraint({{z, 1.0}, {sel[j], 2.0}}, Sense::LessEqual, 2.0);
        }
    }
    return z;
}

VarId EncodingContext::fixed_trit(const std::string& name, Ternary value) {
    VarId z = model_.add_trit(name);
    model_.add_constraint({{z, 1.0}}, Sense::Equal, static_cast<double>(to_int(value)));
    return z;
}

std::string EncodingContext::node_tag(const Formula& f, int t1, int t2) const {
    return fmt::format("{}_{}_{}", hash_hex(f.hash()), t1, t2);
}

VarId EncodingContext::encode_temporal(const Formula& node, int t1, int t2) {
    if (node.kind() != NodeKind::Always && node.kind() != NodeKind::Eventually) {
        throw EncodingError("encode_temporal expects an always/eventually node");
    }
    return encode_at(node, t1, t2);
}

VarId EncodingContext::encode_seq(const Formula& node, int t1, int t2) {
    if (node.kind() != NodeKind::Seq) throw EncodingError("encode_seq expects a seq node");
    return encode_at(node, t1, t2);
}

VarId EncodingContext::encode_sel(const Formula& node, int t1, int t2) {
    if (node.kind() != NodeKind::Sel) throw EncodingError("encode_sel expects a sel node");
    return encode_at(node, t1, t2);
}

VarId EncodingContext::encode_split(const Formula& node, int t1, int t2, bool seq) {
    const std::string tag = node_tag(node, t1, t2);
    if (t1 == t2) return fixed_trit("z_" + tag, Ternary::False);
    const Formula& left = node.child(0);
    const Formula& right = node.child(1);
    std::vector<Operand> groups;
    groups.reserve(static_cast<std::size_t>(t2 - t1));
    for (int tau = t1; tau < t2; ++tau) {
        const Operand pair[2] = {Operand::of(encode_at(left, t1, tau)),
                                 Operand::of(encode_at(right, tau + 1, t2))};
        const std::string inner = fmt::format("q_{}_s{}", tag, tau);
        groups.push_back(Operand::of(seq ? encode_and(pair, inner) : encode_or(pair, inner)));
    }
    groups_[node.hash()] += groups.size();
    return encode_or(groups, "z_" + tag);
}

VarId EncodingContext::encode_at(const Formula& f, int t1, int t2) {
    if (t1 < 0 || t1 > t2 || t2 > horizon_) {
        throw EncodingError(
            fmt::format("pair ({},{}) outside the horizon [0,{}]", t1, t2, horizon_));
    }
    if ((f.kind() == NodeKind::Seq || f.kind() == NodeKind::Sel) && f.children().size() != 2) {
        return encode_at(normalize_kary(f), t1, t2);
    }
    const int key_t2 = f.is_timed() ? t2 : t1;
    const Key key{f.hash(), t1, key_t2};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    const std::string tag = node_tag(f, t1, key_t2);
    VarId z;
    switch (f.kind()) {
        case NodeKind::Pred:
            z = encode_predicate(f.pred(), t1);
            break;
        case NodeKind::Not:
            z = encode_not(encode_at(f.child(), t1, t2), "z_" + tag);
            break;
        case NodeKind::And:
        case NodeKind::Or: {
            std::vector<Operand> ops;
            for (const Formula& c : f.children()) ops.push_back(Operand::of(encode_at(c, t1, t2)));
            z = f.kind() == NodeKind::And ? encode_and(ops, "z_" + tag) : encode_or(ops, "z_" + tag);
            break;
        }
        case NodeKind::Always:
        case NodeKind::Eventually: {
            const bool always = f.kind() == NodeKind::Always;
            const auto [a, b] = f.interval();
            const int lo = a + t1;
            if (lo > t2) {
                z = fixed_trit("z_" + tag, Ternary::Unknown);
                break;
            }
            const bool complete = b + t1 <= t2;
            const int hi = complete ? b + t1 : t2;
            std::vector<Operand> ops;
            if (!complete) ops.push_back(Operand::unknown());
            for (int j = lo; j <= hi; ++j) ops.push_back(Operand::of(encode_at(f.child(), j, t2)));
            z = always ? encode_and(ops, "z_" + tag) : encode_or(ops, "z_" + tag);
            break;
        }
        case NodeKind::Seq:
        case NodeKind::Sel:
            z = encode_split(f, t1, t2, f.kind() == NodeKind::Seq);
            break;
    }
    memo_.emplace(key, z);
    nodes_.push_back(MaterializedNode{f, t1, key_t2, z});
    return z;
}

VarId EncodingContext::encode_formula(const Formula& f, int t_star) {
    if (t_star < 0 || t_star > horizon_) {
        throw EncodingError(fmt::format("t* = {} outside [0,{}]", t_star, horizon_));
    }
    return encode_at(normalize_kary(f), t_star, horizon_);
}

void EncodingContext::enforce_satisfaction(const Formula& f, Enforcement mode, int t_star) {
    const Formula g = normalize_kary(f);
    if (mode == Enforcement::AtFinal) {
        VarId root = encode_formula(g, t_star);
        model_.add_constraint({{root, 1.0}}, Sense::Equal, 1.0);
        return;
    }
    if (t_star >= horizon_) {
        throw EncodingError("any-horizon enforcement needs t* < T");
    }
    std::vector<std::pair<VarId, VarId>> picks;
    for (int tau = t_star + 1; tau <= horizon_; ++tau) {
        VarId z = encode_at(g, t_star, tau);
        VarId b = model_.add_binary(fmt::format("en_{}_{}_{}", hash_hex(g.hash()), t_star, tau));
        picks.emplace_back(z, b);
    }
    std::vector<Term> any;
    for (const auto& [z, b] : picks) any.push_back({b, 1.0});
    model_.add_constraint(std::move(any), Sense::GreaterEqual, 1.0);
    // z >= 1 - 2(1 - b)
    for (const auto& [z, b] : picks) {
        model_.add_constraint({{z, 1.0}, {b, -2.0}}, Sense::GreaterEqual, -1.0);
    }
}

std::optional<VarId> EncodingContext::lookup(const Formula& f, int t1, int t2) const {
    auto it = memo_.find(Key{f.hash(), t1, f.is_timed() ? t2 : t1});
    if (it == memo_.end()) return std::nullopt;
    return it->second;
}

std::size_t EncodingContext::split_groups(const Formula& node) const {
    auto it = groups_.find(node.hash());
    return it == groups_.end() ? 0 : it->second;
}

std::size_t EncodingContext::leaf_groups(const Formula& root) const {
    Formula cur = normalize_kary(root);
    std::optional<Formula> innermost;
    while ((cur.kind() == NodeKind::Seq || cur.kind() == NodeKind::Sel) &&
           cur.children().size() == 2) {
        innermost = cur;
        cur = cur.child(1);
    }
    return innermost ? split_groups(*innermost) : 0;
}

std::string EncodingContext::explain() const {
    std::ostringstream os;
    os << "# node kind t1 t2 variable formula\n";
    for (const auto& n : nodes_) {
        std::string text = to_string(n.formula);
        if (text.size() > 72) text = text.substr(0, 69) + "...";
        os << hash_hex(n.formula.hash()) << ' ' << kind_name(n.formula.kind()) << ' ' << n.t1
           << ' ' << n.t2 << ' ' << model_.variable(n.var).name << ' ' << text << '\n';
    }
    return os.str();
}

}  // namespace tbt

namespace tbt {

std::size_t seq_pair_constraint_count(int T) {
    if (T < 1) throw EncodingError("scaling count needs T >= 1");
    const auto n = static_cast<std::size_t>(T);
    // dynamics (T rows + initial state), two families of truncated
    // eventually windows (U plus tau + 1 operands, 2m + 1 rows each), 6 rows
    // per predicate sample, T binary conjunctions (5 rows), the outer
    // disjunction over T groups and the root equality.
    const std::size_t dynamics = n + 1;
    const std::size_t windows = 2 * (n * n + 4 * n);
    const std::size_t predicates = 2 * 6 * n;
    const std::size_t groups = 5 * n + (2 * n + 1);
    return dynamics + windows + predicates + groups + 1;
}

}  // namespace tbt
