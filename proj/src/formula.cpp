#include "tbt/formula.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include <fmt/format.h>

namespace tbt {

namespace {

// FNV-1a over a byte stream; fixed constants keep digests stable across runs.
class Hasher {
public:
    void bytes(const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
    }
    void u64(std::uint64_t v) {
        unsigned char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(buf, 8);
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void real(double v) {
        if (v == 0.0) v = 0.0;  // fold -0.0
        u64(std::bit_cast<std::uint64_t>(v));
    }
    void str(std::string_view s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
    std::uint64_t digest() const {
        // splitmix64 finalizer spreads the low-entropy FNV state
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace

double TernaryPredicate::value(std::span<const double> x) const {
    if (x.size() != coeffs.size()) {
        throw FormulaError(fmt::format("predicate '{}' expects dimension {}, got {}", name,
                                       coeffs.size(), x.size()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += coeffs[i] * x[i];
    return acc - offset;
}

TernaryPredicate make_predicate(std::string name, std::vector<double> coeffs, double offset,
                                double delta) {
    if (name.empty()) throw FormulaError("predicate name must be nonempty");
    if (coeffs.empty() ||
        std::none_of(coeffs.begin(), coeffs.end(), [](double c) { return c != 0.0; })) {
        throw FormulaError(fmt::format("predicate '{}' needs a nonzero coefficient", name));
    }
    if (!std::all_of(coeffs.begin(), coeffs.end(), [](double c) { return std::isfinite(c); }) ||
        !std::isfinite(offset)) {
        throw FormulaError(fmt::format("predicate '{}' has non-finite entries", name));
    }
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw FormulaError(fmt::format("predicate '{}' has delta < 0", name));
    }
    return TernaryPredicate{std::move(name), std::move(coeffs), offset, delta};
}

const char* kind_name(NodeKind k) noexcept {
    switch (k) {
        case NodeKind::Pred: return "pred";
        case NodeKind::Not: return "not";
        case NodeKind::And: return "and";
        case NodeKind::Or: return "or";
        case NodeKind::Always: return "G";
        case NodeKind::Eventually: return "F";
        case NodeKind::Seq: return "seq";
        case NodeKind::Sel: return "sel";
    }
    return "?";
}

struct Formula::Node {
    NodeKind kind = NodeKind::Pred;
    std::shared_ptr<const TernaryPredicate> pred;
    TimeInterval window;
    std::vector<Formula> children;
    std::uint64_t hash = 0;
    bool timed = false;
    std::size_t size = 1;
};

Formula Formula::make(Node node) {
    Hasher h;
    h.u64(static_cast<std::uint64_t>(node.kind));
    switch (node.kind) {
        case NodeKind::Pred:
            h.str(node.pred->name);
            h.u64(node.pred->coeffs.size());
            for (double c : node.pred->coeffs) h.real(c);
            h.real(node.pred->offset);
            h.real(node.pred->delta);
            break;
        case NodeKind::Always:
        case NodeKind::Eventually:
            h.i64(node.window.lo);
            h.i64(node.window.hi);
            break;
        default:
            break;
    }
    h.u64(node.children.size());
    node.timed = node.kind == NodeKind::Always || node.kind == NodeKind::Eventually ||
                 node.kind == NodeKind::Seq || node.kind == NodeKind::Sel;
    for (const Formula& c : node.children) {
        h.u64(c.hash());
        node.timed = node.timed || c.is_timed();
        node.size += c.size();
    }
    node.hash = h.digest();
    return Formula(std::make_shared<const Node>(std::move(node)));
}

Formula Formula::predicate(TernaryPredicate mu) {
    mu = make_predicate(std::move(mu.name), std::move(mu.coeffs), mu.offset, mu.delta);
    Node n;
    n.kind = NodeKind::Pred;
    n.pred = std::make_shared<const TernaryPredicate>(std::move(mu));
    return make(std::move(n));
}

Formula Formula::negation(Formula f) {
    Node n;
    n.kind = NodeKind::Not;
    n.children.push_back(std::move(f));
    return make(std::move(n));
}

namespace {
void require_operands(const std::vector<Formula>& fs, const char* what) {
    if (fs.empty()) throw FormulaError(fmt::format("{} needs at least one operand", what));
}
void require_window(int a, int b) {
    if (a < 0 || b < a) throw FormulaError(fmt::format("invalid interval [{},{}]", a, b));
}
}  // namespace

Formula Formula::conjunction(std::vector<Formula> fs) {
    require_operands(fs, "and");
    Node n;
    n.kind = NodeKind::And;
    n.children = std::move(fs);
    return make(std::move(n));
}

Formula Formula::disjunction(std::vector<Formula> fs) {
    require_operands(fs, "or");
    Node n;
    n.kind = NodeKind::Or;
    n.children = std::move(fs);
    return make(std::move(n));
}

Formula Formula::always(int a, int b, Formula f) {
    require_window(a, b);
    Node n;
    n.kind = NodeKind::Always;
    n.window = {a, b};
    n.children.push_back(std::move(f));
    return make(std::move(n));
}

Formula Formula::eventually(int a, int b, Formula f) {
    require_window(a, b);
    Node n;
    n.kind = NodeKind::Eventually;
    n.window = {a, b};
    n.children.push_back(std::move(f));
    return make(std::move(n));
}

Formula Formula::sequence(std::vector<Formula> fs) {
    require_operands(fs, "seq");
    Node n;
    n.kind = NodeKind::Seq;
    n.children = std::move(fs);
    return make(std::move(n));
}

Formula Formula::selector(std::vector<Formula> fs) {
    require_operands(fs, "sel");
    Node n;
    n.kind = NodeKind::Sel;
    n.children = std::move(fs);
    return make(std::move(n));
}

NodeKind Formula::kind() const noexcept { return node_->kind; }

const TernaryPredicate& Formula::pred() const {
    if (node_->kind != NodeKind::Pred) throw FormulaError("not a predicate node");
    return *node_->pred;
}

std::span<const Formula> Formula::children() const noexcept { return node_->children; }

const Formula& Formula::child(std::size_t i) const {
    if (i >= node_->children.size()) throw FormulaError("child index out of range");
    return node_->children[i];
}

TimeInterval Formula::interval() const {
    if (node_->kind != NodeKind::Always && node_->kind != NodeKind::Eventually) {
        throw FormulaError("node has no interval");
    }
    return node_->window;
}

std::uint64_t Formula::hash() const noexcept { return node_->hash; }
bool Formula::is_timed() const noexcept { return node_->timed; }
std::size_t Formula::size() const noexcept { return node_->size; }

bool operator==(const Formula& lhs, const Formula& rhs) {
    if (lhs.node_ == rhs.node_) return true;
    const auto& a = *lhs.node_;
    const auto& b = *rhs.node_;
    if (a.hash != b.hash || a.kind != b.kind || a.children.size() != b.children.size()) {
        return false;
    }
    if (a.kind == NodeKind::Pred && !(*a.pred == *b.pred)) return false;
    if ((a.kind == NodeKind::Always || a.kind == NodeKind::Eventually) && !(a.window == b.window)) {
        return false;
    }
    return std::equal(a.children.begin(), a.children.end(), b.children.begin());
}

std::string hash_hex(std::uint64_t h) { return fmt::format("{:016x}", h); }

Formula normalize_kary(const Formula& f) {
    switch (f.kind()) {
        case NodeKind::Pred:
            return f;
        case NodeKind::Not:
            return Formula::negation(normalize_kary(f.child()));
        case NodeKind::And:
        case NodeKind::Or: {
            std::vector<Formula> cs;
            cs.reserve(f.children().size());
            for (const Formula& c : f.children()) cs.push_back(normalize_kary(c));
            return f.kind() == NodeKind::And ? Formula::conjunction(std::move(cs))
                                             : Formula::disjunction(std::move(cs));
        }
        case NodeKind::Always:
            return Formula::always(f.interval().lo, f.interval().hi, normalize_kary(f.child()));
        case NodeKind::Eventually:
            return Formula::eventually(f.interval().lo, f.interval().hi,
                                       normalize_kary(f.child()));
        case NodeKind::Seq:
        case NodeKind::Sel: {
            const bool seq = f.kind() == NodeKind::Seq;
            auto cs = f.children();
            // Right fold: op(c0, op(c1, ... op(c_{k-2}, c_{k-1})))
            Formula acc = normalize_kary(cs.back());
            for (std::size_t i = cs.size() - 1; i-- > 0;) {
                std::vector<Formula> pair{normalize_kary(cs[i]), acc};
                acc = seq ? Formula::sequence(std::move(pair)) : Formula::selector(std::move(pair));
            }
            return acc;
        }
    }
    return f;
}

Horizon formula_horizon(const Formula& f) {
    switch (f.kind()) {
        case NodeKind::Pred:
            return Horizon::Bounded(0);
        case NodeKind::Not:
            return formula_horizon(f.child());
        case NodeKind::And:
        case NodeKind::Or: {
            int h = 0;
            for (const Formula& c : f.children()) {
                Horizon ch = formula_horizon(c);
                if (!ch.bounded) return Horizon::Unbounded();
                h = std::max(h, ch.offset);
            }
            return Horizon::Bounded(h);
        }
        case NodeKind::Always:
        case NodeKind::Eventually: {
            Horizon ch = formula_horizon(f.child());
            if (!ch.bounded) return ch;
            return Horizon::Bounded(f.interval().hi + ch.offset);
        }
        case NodeKind::Seq:
        case NodeKind::Sel:
            return Horizon::Unbounded();
    }
    return Horizon::Unbounded();
}

namespace {
void render(std::ostream& os, const Formula& f) {
    switch (f.kind()) {
        case NodeKind::Pred:
            os << f.pred().name;
            return;
        case NodeKind::Always:
        case NodeKind::Eventually:
            os << kind_name(f.kind()) << '[' << f.interval().lo << ',' << f.interval().hi << "] ";
            render(os, f.child());
            return;
        default: {
            os << kind_name(f.kind()) << '(';
            bool first = true;
            for (const Formula& c : f.children()) {
                if (!first) os << ", ";
                first = false;
                render(os, c);
            }
            os << ')';
        }
    }
}
}  // namespace

std::string to_string(const Formula& f) {
    std::ostringstream os;
    render(os, f);
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const Formula& f) {
    render(os, f);
    return os;
}

}  // namespace tbt
