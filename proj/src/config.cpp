#include "tbt/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace tbt {

namespace {

class ValueParser {
public:
    ValueParser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

    ConfigValue parse() {
        ConfigValue v = value();
        skip_ws();
        if (pos_ != s_.size()) fail("trailing characters after value");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError(fmt::format("line {}: {}", line_, msg));
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    ConfigValue value() {
        skip_ws();
        if (pos_ >= s_.size()) fail("missing value");
        const char c = s_[pos_];
        ConfigValue v;
        v.line = line_;
        if (c == '[') {
            ++pos_;
            std::vector<ConfigValue> items;
            skip_ws();
            if (pos_ < s_.size() && s_[pos_] == ']') {
                ++pos_;
                v.data = std::move(items);
                return v;
            }
            for (;;) {
                items.push_back(value());
                skip_ws();
                if (pos_ >= s_.size()) fail("unterminated list");
                if (s_[pos_] == ',') {
                    ++pos_;
                    skip_ws();
                    // trailing comma
                    if (pos_ < s_.size() && s_[pos_] == ']') {
                        ++pos_;
                        break;
                    }
                    continue;
                }
                if (s_[pos_] == ']') {
                    ++pos_;
                    break;
                }
                fail(fmt::format("expected ',' or ']' in list, found '{}'", s_[pos_]));
            }
            v.data = std::move(items);
            return v;
        }
        if (c == '"') {
            ++pos_;
            std::string out;
            while (pos_ < s_.size() && s_[pos_] != '"') {
                if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
                out += s_[pos_++];
            }
            if (pos_ >= s_.size()) fail("unterminated string");
            ++pos_;
            v.data = std::move(out);
            return v;
        }
        std::size_t end = pos_;
        while (end < s_.size() && s_[end] != ',' && s_[end] != ']' &&
               !std::isspace(static_cast<unsigned char>(s_[end]))) {
            ++end;
        }
        const std::string word(s_.substr(pos_, end - pos_));
        pos_ = end;
        if (word == "true" || word == "false") {
            v.data = word == "true";
            return v;
        }
        try {
            std::size_t used = 0;
            const double d = std::stod(word, &used);
            if (used != word.size()) throw std::invalid_argument(word);
            v.data = d;
        } catch (const std::exception&) {
            fail(fmt::format("cannot parse value '{}'", word));
        }
        return v;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_;
};

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

int bracket_depth(const std::string& s) {
    int depth = 0;
    bool in_string = false;
    for (char c : s) {
        if (c == '"') in_string = !in_string;
        if (in_string) continue;
        if (c == '[') ++depth;
        if (c == ']') --depth;
    }
    return depth;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

class Table {
public:
    explicit Table(std::map<std::string, ConfigValue> t) : t_(std::move(t)) {}

    bool has(const std::string& key) const { return t_.count(key) != 0; }

    const ConfigValue& get(const std::string& key) {
        auto it = t_.find(key);
        if (it == t_.end()) throw ConfigError(fmt::format("missing required key '{}'", key));
        used_.insert(key);
        return it->second;
    }

    double number(const std::string& key) { return as_number(get(key), key); }

    double number_or(const std::string& key, double fallback) {
        return has(key) ? number(key) : fallback;
    }

    int integer(const std::string& key) {
        const double d = number(key);
        if (d != std::floor(d) || std::fabs(d) > 1e9) {
            throw ConfigError(fmt::format("line {}: '{}' must be an integer", t_.at(key).line, key));
        }
        return static_cast<int>(d);
    }

    std::string string(const std::string& key) {
        const ConfigValue& v = get(key);
        if (!v.is_string()) throw ConfigError(fmt::format("line {}: '{}' must be a string", v.line, key));
        return std::get<std::string>(v.data);
    }

    std::vector<double> vector(const std::string& key) {
        const ConfigValue& v = get(key);
        return as_vector(v, key);
    }

    Eigen::MatrixXd matrix(const std::string& key) { return as_matrix(get(key), key); }

    /// A single matrix or a list of matrices.
    std::vector<Eigen::MatrixXd> matrices(const std::string& key) {
        const ConfigValue& v = get(key);
        if (depth(v) == 3) {
            std::vector<Eigen::MatrixXd> out;
            for (const auto& m : std::get<std::vector<ConfigValue>>(v.data)) {
                out.push_back(as_matrix(m, key));
            }
            return out;
        }
        return {as_matrix(v, key)};
    }

    void reject_unknown() const {
        for (const auto& [k, v] : t_) {
            if (used_.count(k) == 0) throw ConfigError(fmt::format("line {}: unknown key '{}'", v.line, k));
        }
    }

private:
    static int depth(const ConfigValue& v) {
        if (!v.is_list()) return 0;
        const auto& items = std::get<std::vector<ConfigValue>>(v.data);
        return 1 + (items.empty() ? 0 : depth(items.front()));
    }

    static double as_number(const ConfigValue& v, const std::string& key) {
        if (!v.is_number()) throw ConfigError(fmt::format("line {}: '{}' must be a number", v.line, key));
        return std::get<double>(v.data);
    }

    static std::vector<double> as_vector(const ConfigValue& v, const std::string& key) {
        if (!v.is_list()) throw ConfigError(fmt::format("line {}: '{}' must be a list", v.line, key));
        std::vector<double> out;
        for (const auto& item : std::get<std::vector<ConfigValue>>(v.data)) {
            out.push_back(as_number(item, key));
        }
        return out;
    }

    static Eigen::MatrixXd as_matrix(const ConfigValue& v, const std::string& key) {
        if (!v.is_list()) throw ConfigError(fmt::format("line {}: '{}' must be a matrix", v.line, key));
        const auto& rows = std::get<std::vector<ConfigValue>>(v.data);
        if (rows.empty()) throw ConfigError(fmt::format("line {}: '{}' is empty", v.line, key));
        std::vector<std::vector<double>> data;
        for (const auto& r : rows) data.push_back(as_vector(r, key));
        const std::size_t cols = data.front().size();
        Eigen::MatrixXd M(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(cols));
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (data[i].size() != cols) {
                throw ConfigError(fmt::format("line {}: '{}' has ragged rows", v.line, key));
            }
            for (std::size_t j = 0; j < cols; ++j) {
                M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i][j];
            }
        }
        return M;
    }

    std::map<std::string, ConfigValue> t_;
    std::set<std::string> used_;
};

void check_size(const std::vector<double>& v, std::size_t n, const char* key) {
    if (v.size() != n) {
        throw ConfigError(fmt::format("'{}' has {} entries, expected {}", key, v.size(), n));
    }
}

}  // namespace

std::map<std::string, ConfigValue> parse_config_table(std::string_view text) {
    std::map<std::string, ConfigValue> out;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        const std::size_t start_line = lineno;
        while (bracket_depth(line) > 0 && std::getline(in, raw)) {
            ++lineno;
            line += ' ' + trim(strip_comment(raw));
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(fmt::format("line {}: expected 'key = value'", start_line));
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(fmt::format("line {}: empty key", start_line));
        for (char c : key) {
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
                throw ConfigError(fmt::format("line {}: invalid key '{}'", start_line, key));
            }
        }
        if (out.count(key) != 0) {
            throw ConfigError(fmt::format("line {}: duplicate key '{}'", start_line, key));
        }
        out.emplace(key, ValueParser(line.substr(eq + 1), start_line).parse());
    }
    return out;
}

ProblemConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    Table tab(parse_config_table(text));
    ProblemConfig cfg;
    const int n = tab.integer("n");
    const int m = tab.integer("m");
    if (n < 1 || m < 1) throw ConfigError("n and m must be positive");
    const auto nn = static_cast<std::size_t>(n);
    const auto mm = static_cast<std::size_t>(m);

    LinearSystem& sys = cfg.system;
    sys.n = nn;
    sys.m = mm;
    sys.dt = tab.number_or("dt", 1.0);
    if (!(sys.dt > 0.0)) throw ConfigError("dt must be positive");
    sys.A = tab.matrices("A");
    sys.B = tab.matrices("B");

    const auto slo = tab.vector("state_lo");
    const auto shi = tab.vector("state_hi");
    check_size(slo, nn, "state_lo");
    check_size(shi, nn, "state_hi");
    for (std::size_t i = 0; i < nn; ++i) sys.state_box.push_back({slo[i], shi[i]});

    const auto ulo = tab.vector("u_lo");
    const auto uhi = tab.vector("u_hi");
    check_size(ulo, mm, "u_lo");
    check_size(uhi, mm, "u_hi");
    for (std::size_t j = 0; j < mm; ++j) cfg.bounds.box.push_back({ulo[j], uhi[j]});

    const auto x0 = tab.vector("x0");
    check_size(x0, nn, "x0");
    cfg.x0 = Eigen::Map<const Eigen::VectorXd>(x0.data(), n);

    cfg.weights = tab.has("R") ? tab.vector("R") : std::vector<double>(mm, 1.0);
    check_size(cfg.weights, mm, "R");

    cfg.horizon = tab.integer("T");
    if (cfg.horizon < 1) throw ConfigError("T must be at least 1");
    if (tab.has("t_star")) cfg.t_star = tab.integer("t_star");

    cfg.spec_path = tab.string("spec");
    if (cfg.spec_path.is_relative()) cfg.spec_path = base_dir / cfg.spec_path;

    if (tab.has("C")) {
        cfg.output_map = tab.matrix("C");
        if (static_cast<std::size_t>(cfg.output_map->cols()) != nn) {
            throw ConfigError("C must have n columns");
        }
    }
    if (tab.has("D")) {
        const Eigen::MatrixXd D = tab.matrix("D");
        if (D.cwiseAbs().maxCoeff() != 0.0) {
            throw ConfigError("a nonzero feedthrough D is not supported; predicates act on C x");
        }
    }

    if (tab.has("enforce")) {
        const std::string e = tab.string("enforce");
        if (e == "final") cfg.enforcement = Enforcement::AtFinal;
        else if (e == "any") cfg.enforcement = Enforcement::AnyHorizon;
        else throw ConfigError(fmt::format("enforce must be 'final' or 'any', got '{}'", e));
    }
    if (tab.has("solver_cmd")) cfg.solver_cmd = tab.string("solver_cmd");
    cfg.encoder.epsilon = tab.number_or("epsilon", cfg.encoder.epsilon);
    cfg.encoder.threshold_margin = tab.number_or("threshold_margin", 1e-6);
    cfg.tol_int = tab.number_or("tol_int", cfg.tol_int);
    cfg.time_limit_s = tab.number_or("time_limit", cfg.time_limit_s);
    if (!(cfg.encoder.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (!(cfg.encoder.threshold_margin >= 0.0)) throw ConfigError("threshold_margin must be >= 0");
    if (!(cfg.tol_int > 0.0 && cfg.tol_int < 0.5)) throw ConfigError("tol_int must be in (0, 0.5)");
    if (!(cfg.time_limit_s > 0.0)) throw ConfigError("time_limit must be positive");
    tab.reject_unknown();

    try {
        sys.validate(cfg.horizon);
    } catch (const SynthesisError& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ProblemConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_text_file(path), path.parent_path());
}

SynthesisProblem make_problem(const ProblemConfig& cfg,
                              const std::optional<std::filesystem::path>& spec_override) {
    const std::filesystem::path spec_path = spec_override.value_or(cfg.spec_path);
    const std::size_t dim = cfg.output_map ? static_cast<std::size_t>(cfg.output_map->rows())
                                           : cfg.system.n;
    SynthesisProblem p{cfg.system,
                       cfg.bounds,
                       cfg.x0,
                       parse_spec(read_text_file(spec_path), dim),
                       cfg.horizon,
                       cfg.weights,
                       cfg.enforcement,
                       cfg.encoder,
                       cfg.output_map};
    if (cfg.t_star) p.spec.t_star = *cfg.t_star;
    return p;
}

}  // namespace tbt
