// Kleene strong three-valued logic (K3).
//
// Truth values are ordered F < U < T and carry the integer image
// F -> -1, U -> 0, T -> +1. Conjunction is the minimum, disjunction the
// maximum and negation flips the sign of the image.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

namespace tbt {

enum class Ternary : std::int8_t { False = -1, Unknown = 0, True = 1 };

constexpr int to_int(Ternary v) noexcept { return static_cast<int>(v); }

/// Inverse of to_int. Throws std::invalid_argument outside {-1, 0, +1}.
Ternary ternary_from_int(int v);

constexpr Ternary t_not(Ternary v) noexcept {
    return static_cast<Ternary>(-to_int(v));
}

/// Minimum over the operands; the empty conjunction is T.
Ternary t_and(std::span<const Ternary> vs) noexcept;
/// Maximum over the operands; the empty disjunction is F.
Ternary t_or(std::span<const Ternary> vs) noexcept;

inline Ternary t_and(std::initializer_list<Ternary> vs) noexcept {
    return t_and(std::span<const Ternary>(vs.begin(), vs.size()));
}
inline Ternary t_or(std::initializer_list<Ternary> vs) noexcept {
    return t_or(std::span<const Ternary>(vs.begin(), vs.size()));
}

/// "F", "U" or "T".
char to_char(Ternary v) noexcept;
std::string to_string(Ternary v);
/// "-1", "0" or "+1".
std::string to_int_string(Ternary v);

/// Accepts F/U/T (case-sensitive) and -1/0/+1/1.
std::optional<Ternary> parse_ternary(std::string_view text) noexcept;

std::ostream& operator<<(std::ostream& os, Ternary v);

}  // namespace tbt
