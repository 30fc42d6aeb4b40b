#include "tbt/monitor.hpp"

#include <algorithm>
#include <sstream>
#include <string>
#include <unordered_map>

#include <fmt/format.h>

namespace tbt {

Trace::Trace(std::vector<std::vector<double>> samples, double dt)
    : samples_(std::move(samples)), dt_(dt) {
    if (samples_.empty()) throw TraceError("trace must contain at least one sample");
    if (!(dt_ > 0.0)) throw TraceError("trace dt must be positive");
    const std::size_t n = samples_.front().size();
    if (n == 0) throw TraceError("trace samples must be nonempty vectors");
    for (std::size_t t = 0; t < samples_.size(); ++t) {
        if (samples_[t].size() != n) {
            throw TraceError(fmt::format("sample {} has dimension {}, expected {}", t,
                                         samples_[t].size(), n));
        }
    }
}

std::span<const double> Trace::at(int t) const {
    if (t < 0 || t > last_index()) {
        throw TraceError(fmt::format("time step {} outside trace [0,{}]", t, last_index()));
    }
    return samples_[static_cast<std::size_t>(t)];
}

Ternary eval_predicate(const TernaryPredicate& mu, std::span<const double> x) {
    const double f = mu.value(x);
    if (f >= mu.delta) return Ternary::True;
    if (f <= -mu.delta) return Ternary::False;
    return Ternary::Unknown;
}

namespace {

struct Key {
    std::uint64_t hash;
    int t1;
    int t2;
    bool operator==(const Key&) const = default;
};

struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
        std::uint64_t h = k.hash;
        h ^= (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.t1)) << 32) ^
             static_cast<std::uint32_t>(k.t2);
        h *= 0x9e3779b97f4a7c15ULL;
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

class Evaluator {
public:
    Evaluator(const Trace& x, bool memoize) : x_(x), memoize_(memoize) {}

    Ternary eval(const Formula& f, int t1, int t2) {
        if (!memoize_) return compute(f, t1, t2);
        // untimed verdicts do not depend on the partial horizon
        const Key key{f.hash(), t1, f.is_timed() ? t2 : t1};
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        Ternary v = compute(f, t1, t2);
        memo_.emplace(key, v);
        return v;
    }

private:
    Ternary compute(const Formula& f, int t1, int t2) {
        switch (f.kind()) {
            case NodeKind::Pred:
                return eval_predicate(f.pred(), x_.at(t1));
            case NodeKind::Not:
                return t_not(eval(f.child(), t1, t2));
            case NodeKind::And: {
                Ternary acc = Ternary::True;
                for (const Formula& c : f.children()) {
                    acc = t_and({acc, eval(c, t1, t2)});
                    if (acc == Ternary::False) break;
                }
                return acc;
            }
            case NodeKind::Or: {
                Ternary acc = Ternary::False;
                for (const Formula& c : f.children()) {
                    acc = t_or({acc, eval(c, t1, t2)});
                    if (acc == Ternary::True) break;
                }
                return acc;
            }
            case NodeKind::Always:
            case NodeKind::Eventually:
                return timed(f, t1, t2);
            case NodeKind::Seq:
            case NodeKind::Sel:
                return split(f, t1, t2);
        }
        return Ternary::Unknown;
    }

    Ternary timed(const Formula& f, int t1, int t2) {
        const bool always = f.kind() == NodeKind::Always;
        const auto [a, b] = f.interval();
        const int lo = a + t1;
        if (lo > t2) return Ternary::Unknown;
        const bool complete = b + t1 <= t2;
        const int hi = complete ? b + t1 : t2;
        // Start from the identity, or from the U bound for truncated windows.
        Ternary acc = complete ? (always ? Ternary::True : Ternary::False) : Ternary::Unknown;
        for (int tau = lo; tau <= hi; ++tau) {
            Ternary v = eval(f.child(), tau, t2);
            acc = always ? t_and({acc, v}) : t_or({acc, v});
        }
        return acc;
    }

    Ternary split(const Formula& f, int t1, int t2) {
        if (f.children().size() == 1) return eval(f.child(), t1, t2);
        if (f.children().size() > 2) return eval(normalize_kary(f), t1, t2);
        const bool seq = f.kind() == NodeKind::Seq;
        // an empty split range (t1 == t2) is the empty disjunction
        Ternary acc = Ternary::False;
        for (int tau = t1; tau < t2; ++tau) {
            Ternary l = eval(f.child(0), t1, tau);
            Ternary r = eval(f.child(1), tau + 1, t2);
            acc = t_or({acc, seq ? t_and({l, r}) : t_or({l, r})});
            if (acc == Ternary::True) break;
        }
        return acc;
    }

    const Trace& x_;
    bool memoize_;
    std::unordered_map<Key, Ternary, KeyHash> memo_;
};

void check_range(const Trace& x, int t1, int t2) {
    if (t1 < 0 || t1 > t2 || t2 > x.last_index()) {
        throw TraceError(fmt::format("invalid evaluation pair ({},{}) for trace of {} samples", t1,
                                     t2, x.size()));
    }
}

}  // namespace

Ternary eval(const Formula& f, const Trace& x, int t1, int t2) {
    check_range(x, t1, t2);
    Evaluator ev(x, false);
    return ev.eval(normalize_kary(f), t1, t2);
}

VerdictMatrix::VerdictMatrix(int last_index, std::uint64_t formula_hash)
    : last_(last_index), hash_(formula_hash) {
    if (last_index < 0) throw TraceError("verdict matrix needs a nonnegative last index");
    const auto n = static_cast<std::size_t>(last_index) + 1;
    entries_.assign(n * (n + 1) / 2, Ternary::Unknown);
}

std::size_t VerdictMatrix::offset(int t1, int t2) const {
    if (t1 < 0 || t1 > t2 || t2 > last_) {
        throw TraceError(fmt::format("verdict pair ({},{}) outside matrix", t1, t2));
    }
    // rows t1 = 0..t1-1 hold (last+1), last, ... entries
    const auto n = static_cast<std::size_t>(last_) + 1;
    const auto r = static_cast<std::size_t>(t1);
    return r * n - r * (r - 1) / 2 + static_cast<std::size_t>(t2 - t1);
}

Ternary VerdictMatrix::at(int t1, int t2) const { return entries_[offset(t1, t2)]; }

void VerdictMatrix::set(int t1, int t2, Ternary v) { entries_[offset(t1, t2)] = v; }

VerdictMatrix verdict_matrix(const Formula& f, const Trace& x) {
    const Formula g = normalize_kary(f);
    VerdictMatrix m(x.last_index(), f.hash());
    Evaluator ev(x, true);
    for (int t1 = 0; t1 <= x.last_index(); ++t1) {
        for (int t2 = t1; t2 <= x.last_index(); ++t2) m.set(t1, t2, ev.eval(g, t1, t2));
    }
    return m;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw TraceError(fmt::format("row {}, column {}: malformed number '{}'", row, col, cell));
    }
}

}  // namespace

Trace read_trace_csv(std::istream& in, double dt) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") != std::string::npos) break;
    }
    if (in.fail() && line.empty()) throw TraceError("empty trace file");
    const auto header = split_csv(line);
    if (header.empty() || header.front() != "t") {
        throw TraceError("trace header must start with column 't'");
    }
    std::vector<std::size_t> state_cols;
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (!header[c].empty() && header[c].front() == 'x') state_cols.push_back(c);
    }
    if (state_cols.empty()) throw TraceError("trace header has no state columns x1..xn");

    std::vector<std::vector<double>> samples;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size()) {
            throw TraceError(fmt::format("line {}: expected {} columns, got {}", lineno,
                                         header.size(), cells.size()));
        }
        const double t = parse_cell(cells[0], lineno, 1);
        if (t != static_cast<double>(samples.size())) {
            throw TraceError(fmt::format("line {}: expected t = {}, got {}", lineno,
                                         samples.size(), cells[0]));
        }
        std::vector<double> x;
        x.reserve(state_cols.size());
        for (std::size_t c : state_cols) x.push_back(parse_cell(cells[c], lineno, c + 1));
        samples.push_back(std::move(x));
    }
    if (samples.empty()) throw TraceError("trace has no samples");
    return Trace(std::move(samples), dt);
}

void write_trace_csv(std::ostream& out, const Trace& x) {
    out << 't';
    for (std::size_t i = 1; i <= x.dim(); ++i) out << ",x" << i;
    out << '\n';
    for (int t = 0; t <= x.last_index(); ++t) {
        out << t;
        for (double v : x.at(t)) out << ',' << fmt::format("{}", v);
        out << '\n';
    }
}

void write_verdicts_csv(std::ostream& out, const VerdictMatrix& m) {
    out << "t1,t2,verdict\n";
    for (int t1 = 0; t1 <= m.last_index(); ++t1) {
        for (int t2 = t1; t2 <= m.last_index(); ++t2) {
            out << t1 << ',' << t2 << ',' << to_char(m.at(t1, t2)) << '\n';
        }
    }
}

}  // namespace tbt
