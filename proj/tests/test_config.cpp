#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include <unistd.h>

#include "tbt/config.hpp"

using namespace tbt;

namespace {

const char* kBase =
    "n = 2\n"
    "m = 1\n"
    "dt = 0.5\n"
    "A = [[1, 0.5],\n"
    "     [0, 1]]\n"
    "B = [[0.125], [0.5]]\n"
    "state_lo = [-10, -5]\n"
    "state_hi = [10, 5]\n"
    "u_lo = [-1]\n"
    "u_hi = [1]\n"
    "x0 = [0, 0]\n"
    "T = 6\n"
    "spec = \"reach.tbt\"\n";

ProblemConfig parse(const std::string& extra) { return parse_config(std::string(kBase) + extra, "/base"); }

}  // namespace

TEST_CASE("table values") {
    const auto tab = parse_config_table(
        "a = 1.5 # comment\nb = \"text\"\nc = true\nd = [1, [2, 3]]\ne = -2e-3\n");
    CHECK(std::get<double>(tab.at("a").data) == 1.5);
    CHECK(std::get<std::string>(tab.at("b").data) == "text");
    CHECK(std::get<bool>(tab.at("c").data));
    CHECK(tab.at("d").is_list());
    CHECK(std::get<double>(tab.at("e").data) == -2e-3);
    CHECK(tab.at("e").line == 5);
    CHECK_THROWS_AS(parse_config_table("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_table("a = [1, 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_table("a 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_table("a = \"open\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_table("a = 1 2\n"), ConfigError);
}

TEST_CASE("defaults and system assembly") {
    const ProblemConfig cfg = parse("");
    CHECK(cfg.system.n == 2);
    CHECK(cfg.system.dt == 0.5);
    REQUIRE(cfg.system.A.size() == 1);
    CHECK(cfg.system.A[0](0, 1) == 0.5);
    CHECK(cfg.system.B[0](0, 0) == 0.125);
    CHECK(cfg.system.state_box[1].hi == 5);
    CHECK(cfg.weights == std::vector<double>{1.0});
    CHECK(cfg.horizon == 6);
    CHECK_FALSE(cfg.t_star.has_value());
    CHECK(cfg.spec_path == std::filesystem::path("/base/reach.tbt"));
    CHECK(cfg.enforcement == Enforcement::AtFinal);
    CHECK(cfg.encoder.threshold_margin == 1e-6);
    CHECK(cfg.encoder.epsilon == 1e-4);
    CHECK_FALSE(cfg.output_map.has_value());
}

TEST_CASE("optional keys") {
    const ProblemConfig cfg = parse(
        "R = [0.5]\nt_star = 2\nenforce = \"any\"\nsolver_cmd = \"s {lp} {sol}\"\n"
        "epsilon = 1e-5\nthreshold_margin = 0\ntol_int = 1e-6\ntime_limit = 30\n"
        "C = [[1, 0]]\nD = [[0]]\n");
    CHECK(cfg.weights == std::vector<double>{0.5});
    CHECK(cfg.t_star == 2);
    CHECK(cfg.enforcement == Enforcement::AnyHorizon);
    CHECK(cfg.solver_cmd == "s {lp} {sol}");
    CHECK(cfg.encoder.epsilon == 1e-5);
    CHECK(cfg.encoder.threshold_margin == 0.0);
    CHECK(cfg.tol_int == 1e-6);
    CHECK(cfg.time_limit_s == 30);
    REQUIRE(cfg.output_map.has_value());
    CHECK(cfg.output_map->rows() == 1);
}

TEST_CASE("time-varying matrices") {
    const std::string text =
        "n = 1\nm = 1\nA = [[[1]], [[2]]]\nB = [[[1]], [[1]]]\nstate_lo = [-1]\nstate_hi = [1]\n"
        "u_lo = [-1]\nu_hi = [1]\nx0 = [0]\nT = 2\nspec = \"s.tbt\"\n";
    const ProblemConfig cfg = parse_config(text, ".");
    CHECK(cfg.system.A.size() == 2);
    CHECK(cfg.system.A_at(1)(0, 0) == 2.0);
    std::string wrong = text;
    wrong.replace(wrong.find("T = 2"), 5, "T = 3");
    CHECK_THROWS_AS(parse_config(wrong, "."), ConfigError);
}

TEST_CASE("rejections") {
    CHECK_THROWS_AS(parse("bogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("enforce = \"sometimes\"\n"), ConfigError);
    CHECK_THROWS_AS(parse("D = [[1]]\n"), ConfigError);
    CHECK_THROWS_AS(parse("C = [[1, 0, 0]]\n"), ConfigError);
    CHECK_THROWS_AS(parse("R = [1, 1]\n"), ConfigError);
    CHECK_THROWS_AS(parse("epsilon = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse("tol_int = 0.7\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("n = 1\n", "."), ConfigError);
    std::string text(kBase);
    text.replace(text.find("T = 6"), 5, "T = 0");
    CHECK_THROWS_AS(parse_config(text, "."), ConfigError);
    text = kBase;
    text.replace(text.find("x0 = [0, 0]"), 11, "x0 = [0]");
    CHECK_THROWS_AS(parse_config(text, "."), ConfigError);
    text = kBase;
    text.replace(text.find("n = 2"), 5, "n = 2.5");
    CHECK_THROWS_AS(parse_config(text, "."), ConfigError);
}

TEST_CASE("problem assembly from files") {
    const auto dir = std::filesystem::temp_directory_path() / ("tbt-config-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "reach.tbt") << "pred r := [1, 0]*x >= 1 (delta 0.1);\nformula F[0,6] r; at 1\n";
        std::ofstream(dir / "p.cfg") << kBase;
        std::ofstream(dir / "bad.tbt") << "formula F[0,6] nope\n";
        std::ofstream(dir / "y.tbt") << "pred y := [1]*x >= 1 (delta 0.1);\nformula F[0,6] y\n";
    }
    ProblemConfig cfg = load_config(dir / "p.cfg");
    SynthesisProblem p = make_problem(cfg);
    CHECK(p.horizon == 6);
    CHECK(p.spec.t_star == 1);
    CHECK(p.spec.predicates.size() == 1);
    CHECK(p.x0.size() == 2);

    cfg.t_star = 3;
    CHECK(make_problem(cfg).spec.t_star == 3);

    CHECK_THROWS_AS(make_problem(cfg, dir / "bad.tbt"), ParseError);
    CHECK_THROWS_AS(make_problem(cfg, dir / "missing.tbt"), ConfigError);
    // spec over the output y = C x has the output's dimension
    cfg.output_map = Eigen::MatrixXd::Zero(1, 2);
    (*cfg.output_map)(0, 0) = 1;
    CHECK(make_problem(cfg, dir / "y.tbt").spec.state_dim == 1);
    CHECK_THROWS_AS(load_config(dir / "nope.cfg"), ConfigError);
    std::filesystem::remove_all(dir);
}
