#include "tbt/ternary.hpp"

#include <stdexcept>

namespace tbt {

Ternary ternary_from_int(int v) {
    if (v < -1 || v > 1) {
        throw std::invalid_argument("ternary value out of range: " + std::to_string(v));
    }
    return static_cast<Ternary>(v);
}

Ternary t_and(std::span<const Ternary> vs) noexcept {
    Ternary acc = Ternary::True;
    for (Ternary v : vs) {
        if (v < acc) acc = v;
    }
    return acc;
}

Ternary t_or(std::span<const Ternary> vs) noexcept {
    Ternary acc = Ternary::False;
    for (Ternary v : vs) {
        if (v > acc) acc = v;
    }
    return acc;
}

char to_char(Ternary v) noexcept {
    switch (v) {
        case Ternary::False: return 'F';
        case Ternary::Unknown: return 'U';
        case Ternary::True: return 'T';
    }
    return '?';
}

std::string to_string(Ternary v) { return std::string(1, to_char(v)); }

std::string to_int_string(Ternary v) {
    switch (v) {
        case Ternary::False: return "-1";
        case Ternary::Unknown: return "0";
        case Ternary::True: return "+1";
    }
    return "?";
}

std::optional<Ternary> parse_ternary(std::string_view text) noexcept {
    if (text == "F" || text == "-1") return Ternary::False;
    if (text == "U" || text == "0") return Ternary::Unknown;
    if (text == "T" || text == "+1" || text == "1") return Ternary::True;
    return std::nullopt;
}

std::ostream& operator<<(std::ostream& os, Ternary v) { return os << to_char(v); }

}  // namespace tbt
