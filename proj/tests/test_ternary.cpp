#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <vector>

#include "tbt/ternary.hpp"

using tbt::Ternary;
constexpr Ternary F = Ternary::False;
constexpr Ternary U = Ternary::Unknown;
constexpr Ternary T = Ternary::True;
const Ternary kAll[3] = {F, U, T};

// Kleene strong tables, rows and columns ordered F, U, T.
const Ternary kAnd[3][3] = {{F, F, F}, {F, U, U}, {F, U, T}};
const Ternary kOr[3][3] = {{F, U, T}, {U, U, T}, {T, T, T}};
const Ternary kNot[3] = {T, U, F};

TEST_CASE("negation table") {
    for (int i = 0; i < 3; ++i) CHECK(tbt::t_not(kAll[i]) == kNot[i]);
}

TEST_CASE("conjunction and disjunction tables") {
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            CHECK(tbt::t_and({kAll[i], kAll[j]}) == kAnd[i][j]);
            CHECK(tbt::t_or({kAll[i], kAll[j]}) == kOr[i][j]);
        }
    }
}

TEST_CASE("integer image") {
    CHECK(tbt::to_int(F) == -1);
    CHECK(tbt::to_int(U) == 0);
    CHECK(tbt::to_int(T) == 1);
    for (Ternary v : kAll) CHECK(tbt::ternary_from_int(tbt::to_int(v)) == v);
    CHECK_THROWS_AS(tbt::ternary_from_int(2), std::invalid_argument);
    CHECK(tbt::to_int(F) < tbt::to_int(U));
    CHECK(tbt::to_int(U) < tbt::to_int(T));
}

TEST_CASE("empty folds are the lattice identities") {
    CHECK(tbt::t_and(std::span<const Ternary>{}) == T);
    CHECK(tbt::t_or(std::span<const Ternary>{}) == F);
}

TEST_CASE("de morgan and complement failure") {
    for (Ternary x : kAll) {
        for (Ternary y : kAll) {
            CHECK(tbt::t_not(tbt::t_and({x, y})) == tbt::t_or({tbt::t_not(x), tbt::t_not(y)}));
            CHECK(tbt::t_not(tbt::t_or({x, y})) == tbt::t_and({tbt::t_not(x), tbt::t_not(y)}));
        }
    }
    CHECK(tbt::t_and({U, tbt::t_not(U)}) == U);
    CHECK(tbt::t_or({U, tbt::t_not(U)}) == U);
}

TEST_CASE("fold associativity and commutativity on random vectors") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> pick(-1, 1);
    std::uniform_int_distribution<int> len(1, 8);
    for (int round = 0; round < 500; ++round) {
        std::vector<Ternary> v(static_cast<std::size_t>(len(rng)));
        for (auto& x : v) x = tbt::ternary_from_int(pick(rng));
        const Ternary a = tbt::t_and(v);
        const Ternary o = tbt::t_or(v);
        // left fold through the binary tables
        Ternary la = T, lo = F;
        for (Ternary x : v) {
            la = kAnd[tbt::to_int(la) + 1][tbt::to_int(x) + 1];
            lo = kOr[tbt::to_int(lo) + 1][tbt::to_int(x) + 1];
        }
        CHECK(a == la);
        CHECK(o == lo);
        std::shuffle(v.begin(), v.end(), rng);
        CHECK(tbt::t_and(v) == a);
        CHECK(tbt::t_or(v) == o);
    }
}

TEST_CASE("text rendering and parsing") {
    CHECK(tbt::to_char(T) == 'T');
    CHECK(tbt::to_string(U) == "U");
    CHECK(tbt::to_int_string(F) == "-1");
    CHECK(tbt::to_int_string(U) == "0");
    CHECK(tbt::to_int_string(T) == "+1");
    CHECK(tbt::parse_ternary("F") == F);
    CHECK(tbt::parse_ternary("U") == U);
    CHECK(tbt::parse_ternary("+1") == T);
    CHECK(tbt::parse_ternary("1") == T);
    CHECK(tbt::parse_ternary("-1") == F);
    CHECK(tbt::parse_ternary("0") == U);
    CHECK_FALSE(tbt::parse_ternary("maybe").has_value());
    std::ostringstream os;
    os << T << F;
    CHECK(os.str() == "TF");
}
