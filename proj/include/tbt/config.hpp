// Problem configuration files.
//
// A config is a list of `key = value` lines. Values are numbers, quoted
// strings, `true`/`false` or bracketed lists (which may span lines). `#`
// starts a comment. Matrices are row-major nested lists; a list of
// matrices for A or B makes the system time-varying.
//
//   n, m, dt, A, B        system (required)
//   state_lo, state_hi    state box (required, finite)
//   u_lo, u_hi            control box (required)
//   x0, R                 initial state, control weights (R defaults to ones)
//   T                     horizon (required)
//   t_star                evaluation step; overrides the spec's `at`
//   spec                  path to a .tbt file, relative to the config
//   C, D                  optional output map y = C x + D u (D must be zero)
//   enforce               "final" | "any"
//   solver_cmd            command template with {lp} {sol} {time_limit}
//   epsilon, threshold_margin, tol_int, time_limit

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tbt/synthesis.hpp"

namespace tbt {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConfigValue {
    std::variant<double, std::string, bool, std::vector<ConfigValue>> data;
    std::size_t line = 0;

    bool is_number() const { return std::holds_alternative<double>(data); }
    bool is_string() const { return std::holds_alternative<std::string>(data); }
    bool is_list() const { return std::holds_alternative<std::vector<ConfigValue>>(data); }
};

/// Raw key/value table, keys in file order are not preserved.
std::map<std::string, ConfigValue> parse_config_table(std::string_view text);

struct ProblemConfig {
    LinearSystem system;
    ControlBounds bounds;
    Eigen::VectorXd x0;
    std::vector<double> weights;
    int horizon = 0;
    std::optional<int> t_star;
    std::filesystem::path spec_path;
    std::optional<Eigen::MatrixXd> output_map;
    Enforcement enforcement = Enforcement::AtFinal;
    std::string solver_cmd;
    EncoderOptions encoder;
    double tol_int = kDefaultIntegralityTol;
    double time_limit_s = 600.0;
};

/// Relative spec paths are resolved against base_dir.
ProblemConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);
ProblemConfig load_config(const std::filesystem::path& path);

/// Reads and parses the spec file named by the config (or spec_override)
/// and assembles the synthesis problem. Spec errors propagate as ParseError.
SynthesisProblem make_problem(const ProblemConfig& cfg,
                              const std::optional<std::filesystem::path>& spec_override = {});

std::string read_text_file(const std::filesystem::path& path);

}  // namespace tbt
