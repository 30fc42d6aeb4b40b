#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kData = TBT_TEST_DATA_DIR;

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("tbt-cli-" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Result {
    int code = -1;
    std::string out;
};

/// Runs the CLI with the test solver; stdout is captured, stderr discarded.
Result tbt(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt";
    const std::string cmd = std::string("TBT_SOLVER_CMD=\"") + TBT_TEST_SOLVER_CMD + "\" '" + TBT_CLI_PATH +
                            "' " + args + " > '" + out.string() + "' 2> '" + (dir / "stderr.txt").string() + "'";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    return r;
}

std::string cfg_arg() { return "--config '" + (kData / "reach1d.cfg").string() + "'"; }

fs::path write(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST_CASE("usage errors") {
    const fs::path dir = scratch("usage");
    CHECK(tbt("", dir).code == 1);
    CHECK(tbt("frobnicate", dir).code == 1);
    CHECK(tbt("encode --no-such-flag", dir).code == 1);
    CHECK(tbt("monitor --spec x.tbt", dir).code == 1);
    CHECK(tbt("--help", dir).code == 0);
}

TEST_CASE("input errors exit 2") {
    const fs::path dir = scratch("input");
    CHECK(tbt("encode --out '" + dir.string() + "'", dir).code == 2);
    CHECK(tbt("encode --config '" + (dir / "missing.cfg").string() + "' --out '" + dir.string() + "'", dir).code == 2);
    const fs::path bad = write(dir / "bad.tbt", "pred r := [1]*x >= 1 (delta 0.1);\nformula F[3,1] r\n");
    const Result r = tbt("encode " + cfg_arg() + " --spec '" + bad.string() + "' --out '" + dir.string() + "'", dir);
    CHECK(r.code == 2);
    CHECK(slurp(dir / "stderr.txt").find("inverted interval") != std::string::npos);
    const json m = json::parse(slurp(dir / "manifest.json"));
    CHECK(m["exit_code"] == 2);
    const fs::path trace = write(dir / "t.csv", "t,x1\n0,1\n2,1\n");
    CHECK(tbt("monitor --spec '" + (kData / "reach1d.tbt").string() + "' --trace '" + trace.string() + "' --out '" +
                  dir.string() + "'",
              dir)
              .code == 2);
}

TEST_CASE("encode writes the model, variable map and manifest") {
    const fs::path a = scratch("encode_a");
    const fs::path b = scratch("encode_b");
    REQUIRE(tbt("encode " + cfg_arg() + " --seed 7 --out '" + a.string() + "'", a).code == 0);
    REQUIRE(tbt("encode " + cfg_arg() + " --seed 7 --explain --out '" + b.string() + "'", b).code == 0);
    CHECK(fs::exists(a / "problem.lp"));
    CHECK(fs::exists(a / "varmap.csv"));
    CHECK_FALSE(fs::exists(a / "explain.txt"));
    CHECK(fs::exists(b / "explain.txt"));
    CHECK(slurp(b / "stdout.txt") == slurp(b / "explain.txt"));
    CHECK(slurp(a / "problem.lp") == slurp(b / "problem.lp"));
    CHECK(slurp(a / "varmap.csv").rfind("index,name,kind,lb,ub\n", 0) == 0);

    json ma = json::parse(slurp(a / "manifest.json"));
    json mb = json::parse(slurp(b / "manifest.json"));
    CHECK(ma["command"] == "encode");
    CHECK(ma["seed"] == 7);
    CHECK(ma["exit_code"] == 0);
    CHECK(ma["config_hash"].get<std::string>().size() == 16);
    CHECK(ma["statistics"]["quadratic_terms"] == 3);
    CHECK(ma["statistics"]["continuous_vars"] == 7);
    CHECK(ma.contains("timing"));
    // identical apart from timing
    ma.erase("timing");
    mb.erase("timing");
    CHECK(ma == mb);
}

TEST_CASE("synth then monitor replay") {
    const fs::path dir = scratch("synth");
    const Result r = tbt("synth " + cfg_arg() + " --out '" + dir.string() + "'", dir);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("verdict T") != std::string::npos);
    REQUIRE(fs::exists(dir / "trajectory.csv"));
    CHECK(fs::exists(dir / "certificate.txt"));
    const json m = json::parse(slurp(dir / "manifest.json"));
    CHECK(m["certificate"] == "T");
    CHECK(m["status"] == "optimal");

    const fs::path mon = scratch("replay");
    const Result v = tbt("monitor --spec '" + (kData / "reach1d.tbt").string() + "' --trace '" +
                             (dir / "trajectory.csv").string() + "' --out '" + mon.string() + "'",
                         mon);
    CHECK(v.code == 0);
    CHECK(v.out == "T\n");
    CHECK(fs::exists(mon / "verdicts.csv"));
}

TEST_CASE("infeasible spec exits 3") {
    const fs::path dir = scratch("infeasible");
    const fs::path spec = write(dir / "now.tbt", "pred r := [1]*x >= 1 (delta 0.1);\nformula r\n");
    const Result r = tbt("synth " + cfg_arg() + " --spec '" + spec.string() + "' --out '" + dir.string() + "'", dir);
    CHECK(r.code == 3);
    CHECK(r.out == "status infeasible\n");
    CHECK_FALSE(fs::exists(dir / "trajectory.csv"));
}

TEST_CASE("solver failure exits 4") {
    const fs::path dir = scratch("solver");
    CHECK(tbt("synth " + cfg_arg() + " --solver-cmd false --out '" + dir.string() + "'", dir).code == 4);
    CHECK(tbt("synth " + cfg_arg() + " --solver-cmd 'echo status error > {sol}' --out '" + dir.string() + "'", dir)
              .code == 4);
}

TEST_CASE("a certificate mismatch exits 5") {
    const fs::path enc = scratch("liar_encode");
    REQUIRE(tbt("encode " + cfg_arg() + " --out '" + enc.string() + "'", enc).code == 0);
    // every trit claimed true on an all-zero trajectory
    std::istringstream varmap(slurp(enc / "varmap.csv"));
    std::string line, sol = "status optimal\n";
    std::getline(varmap, line);
    while (std::getline(varmap, line)) {
        std::istringstream cells(line);
        std::string idx, name, kind;
        std::getline(cells, idx, ',');
        std::getline(cells, name, ',');
        std::getline(cells, kind, ',');
        sol += name + (kind == "trit" ? " 1\n" : " 0\n");
    }
    const fs::path canned = write(enc / "canned.sol", sol);
    const fs::path dir = scratch("liar");
    const Result r = tbt("synth " + cfg_arg() + " --solver-cmd \"cp '" + canned.string() + "' {sol}\" --out '" +
                             dir.string() + "'",
                         dir);
    CHECK(r.code == 5);
}

TEST_CASE("bench scaling counts") {
    const fs::path dir = scratch("scaling");
    const Result r = tbt("bench scaling --counts-only --out '" + dir.string() + "'", dir);
    CHECK(r.code == 0);
    const std::string csv = slurp(dir / "scaling" / "scaling.csv");
    CHECK(csv.rfind("k,T,continuous,binary,trit,integer,constraints,predicted_constraints", 0) == 0);
    CHECK(csv.find("2,4,") != std::string::npos);
    CHECK(fs::exists(dir / "scaling" / "scaling_plot.dat"));
}
