// Specification documents and the `.tbt` DSL.
//
//   spec      := {pred_decl} "formula" formula [";" "at" integer]
//   pred_decl := "pred" IDENT ":=" vector "*x" ">=" number "(" "delta" number ")" ";"
//   vector    := "[" number {"," number} "]"
//   formula   := IDENT | "not" "(" formula ")"
//              | ("and"|"or"|"seq"|"sel") "(" formula {"," formula} ")"
//              | ("G"|"F") "[" integer "," integer "]" formula
//
// `implies(p, q)` and `iff(p, q)` are accepted as sugar and desugar to
// `or(not(p), q)` and `and(or(not(p), q), or(not(q), p))`. `#` starts a line
// comment.

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tbt/formula.hpp"

namespace tbt {

/// Syntax or resolution failure with a 1-based source position.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t line, std::size_t column);
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    /// Message without the position prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string detail_;
};

struct SpecDocument {
    /// Declaration order.
    std::vector<TernaryPredicate> predicates;
    Formula formula;
    int t_star = 0;
    std::size_t state_dim = 0;
    std::vector<std::string> warnings;

    const TernaryPredicate* find_predicate(std::string_view name) const;
};

SpecDocument parse_spec(std::string_view text, std::size_t state_dim);

/// Renders a document back to DSL text that parse_spec accepts.
std::string to_spec_text(const SpecDocument& doc);

/// Builds a document from a formula, collecting its predicates.
/// Throws FormulaError when two different predicates share a name.
SpecDocument make_spec(const Formula& f, std::size_t state_dim, int t_star = 0);

}  // namespace tbt
