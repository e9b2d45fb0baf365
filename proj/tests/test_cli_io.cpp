#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "elab/config.hpp"
#include "elab/error.hpp"
#include "elab/pipeline.hpp"

using namespace elab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("elab-test-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "electorate-lab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

const char* kSmallConfig = R"({
  "seed": 11,
  "electorate": {"n_voters": 3000, "ideal_distribution": {"kind": "Uniform", "lo": -0.2, "hi": 1.2},
                 "n_measures": 6, "measure_spread": 0.1},
  "races": [
    {"id": "DD", "cand1_party": "D", "cand2_party": "D", "cand1_pos": -0.05, "cand2_pos": 0.0},
    {"id": "R1", "cand1_pos": 0.45, "cand2_pos": 0.55},
    {"id": "R2", "cand1_pos": 0.4, "cand2_pos": 0.6},
    {"id": "R3", "cand1_pos": 0.35, "cand2_pos": 0.65},
    {"id": "R4", "cand1_pos": 0.3, "cand2_pos": 0.7},
    {"id": "R5", "cand1_pos": 0.25, "cand2_pos": 0.75},
    {"id": "R6", "cand1_pos": 0.2, "cand2_pos": 0.8},
    {"id": "R7", "cand1_pos": 0.15, "cand2_pos": 0.85},
    {"id": "R8", "cand1_pos": 0.1, "cand2_pos": 0.9},
    {"id": "R9", "cand1_pos": 0.05, "cand2_pos": 0.95}
  ],
  "loss": {"family": "ReverseS", "omega": 0.05},
  "choice": {"mode": "Probabilistic", "cost": 0.04, "noise": "Normal", "scale": 0.08},
  "responses": {"loss": {"family": "Concave"}, "choice": {"mode": "Deterministic"}}
})";

}  // namespace

TEST_CASE("config parsing") {
    auto cfg = parse_config(kSmallConfig);
    CHECK(cfg.seed == 11u);
    CHECK(cfg.has_electorate);
    CHECK(cfg.electorate.n_voters == 3000);
    CHECK(cfg.races.size() == 10);
    CHECK(cfg.races[0].same_party());
    CHECK(cfg.loss.family == LossFamily::ReverseS);
    CHECK(cfg.loss.omega == 0.05);
    CHECK(cfg.choice.mode == DecisionMode::Probabilistic);
    REQUIRE(cfg.responses.has_value());
    CHECK(cfg.responses->loss.beta == 2.0);

    auto empty = parse_config("{}");
    CHECK_FALSE(empty.seed.has_value());
    CHECK_FALSE(empty.has_electorate);
    CHECK(empty.output_dir == "out");
    CHECK(empty.cvr_file() == fs::path("out") / "cvr.csv");
}

TEST_CASE("config overrides") {
    auto cfg = parse_config(kSmallConfig, {"loss.family=Concave", "loss.beta=3", "races.1.cand1_pos=0.45",
                                           "seed=12", "output_dir=elsewhere"});
    CHECK(cfg.loss.family == LossFamily::Concave);
    CHECK(cfg.loss.beta == 3.0);
    CHECK(cfg.races[1].cand1_pos[0] == 0.45);
    CHECK(cfg.seed == 12u);
    CHECK(cfg.output_dir == "elsewhere");
    CHECK_THROWS_AS(parse_config(kSmallConfig, {"loss.beta"}), ConfigError);
}

TEST_CASE("config errors name the key") {
    auto key_of = [](const std::string& json, std::vector<std::string> overrides = {}) {
        try {
            parse_config(json, overrides);
        } catch (const ConfigError& e) {
            return e.key();
        }
        return std::string("<none>");
    };
    CHECK(key_of(R"({"loss": {"family": "Concave", "beta": 0.5}})") == "loss.beta");
    CHECK(key_of(R"({"choice": {"cost": -1}})") == "choice.cost");
    CHECK(key_of(R"({"loss": {"famly": "Linear"}})") == "loss.famly");
    CHECK(key_of(R"({"sed": 3})") == "sed");
    CHECK(key_of(R"({"electorate": {"n_measures": 0}})") == "electorate.n_measures");
    CHECK(key_of("{not json") != "<none>");
    CHECK(key_of(kSmallConfig, {"choice.scale=0"}) == "choice.scale");
}

TEST_CASE("predict without an electorate writes the full trend table") {
    TempDir tmp;
    auto r = cli({"predict", "--out", tmp.path.string()});
    REQUIRE(r.code == 0);
    std::string table = read_file(tmp.path / "trend_table.csv");
    std::istringstream lines(table);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "family,beta,setting,dimensionality,label");
    int rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 24);
    CHECK(table.find("Linear,1,Case1,Uni,Constant\n") != std::string::npos);
    CHECK(table.find("Concave,2,Case1,Uni,Decreasing\n") != std::string::npos);
    CHECK(table.find("Convex,0.5,Case2,Uni,Increasing\n") != std::string::npos);
    CHECK(table.find("ReverseS,,Case2,Uni,UShaped\n") != std::string::npos);
    CHECK(table.find("Linear,1,Case1,Multi,Increasing\n") != std::string::npos);
    CHECK(table.find("Concave,2,Case2,Multi,Constant\n") != std::string::npos);
    CHECK(table.find("Concave,3,Case2,Multi,Decreasing\n") != std::string::npos);
}

TEST_CASE("simulate then analyze is byte-identical across runs") {
    TempDir tmp;
    write_file(tmp.path / "exp.json", kSmallConfig);
    std::map<std::string, std::string> first;
    for (int pass = 0; pass < 2; ++pass) {
        fs::path out = tmp.path / ("run" + std::to_string(pass));
        std::string threads = pass == 0 ? "1" : "3";
        for (const char* cmd : {"simulate", "analyze", "fit"}) {
            auto r = cli({cmd, "--config", (tmp.path / "exp.json").string(), "--out", out.string(), "--threads",
                          threads});
            INFO(r.err);
            REQUIRE(r.code == 0);
        }
        for (const auto& entry : fs::directory_iterator(out)) {
            if (entry.path().extension() != ".csv") continue;
            std::string name = entry.path().filename().string();
            std::string text = read_file(entry.path());
            CHECK(text.find('\n') != std::string::npos);
            if (pass == 0) first[name] = text;
            else CHECK_MESSAGE(first[name] == text, name);
        }
    }
    for (const char* f : {"cvr.csv", "measures.csv", "case1_by_group.csv", "case2_by_race.csv", "correlations.csv",
                          "summary.csv", "regressions.csv"})
        CHECK_MESSAGE(first.count(f) == 1, f);
    CHECK(first["measures.csv"].rfind("group,race_id,n_total,n_dem,n_rep,n_abstain,abstention_rate,predictability,pol\n",
                                      0) == 0);
    CHECK(first["regressions.csv"].rfind("model,term,coefficient,se,n_obs,r2\n", 0) == 0);

    auto other = cli({"simulate", "--config", (tmp.path / "exp.json").string(), "--out",
                      (tmp.path / "seeded").string(), "--seed", "12"});
    REQUIRE(other.code == 0);
    CHECK(read_file(tmp.path / "seeded" / "cvr.csv") != first["cvr.csv"]);
}

TEST_CASE("exit codes") {
    TempDir tmp;
    SUBCASE("configuration errors exit 1") {
        write_file(tmp.path / "bad.json", R"({"loss": {"family": "Quartic"}})");
        auto r = cli({"predict", "--config", (tmp.path / "bad.json").string(), "--out", tmp.path.string()});
        CHECK(r.code == 1);
        CHECK(r.err.find("loss.family") != std::string::npos);
        CHECK(cli({"simulate", "--out", tmp.path.string()}).code == 1);
        CHECK(cli({"analyze", "--out", tmp.path.string()}).code == 1);
        CHECK(cli({"frobnicate"}).code == 1);
        CHECK(cli({"predict", "--set", "nope=1", "--out", tmp.path.string()}).code == 1);
    }
    SUBCASE("malformed data exits 2 and names the line") {
        write_file(tmp.path / "cvr.csv", "voter_id,m1,P\n0,1,D\n1,1,Q\n");
        auto r = cli({"analyze", "--set", "cvr_path=" + (tmp.path / "cvr.csv").string(), "--out", tmp.path.string()});
        CHECK(r.code == 2);
        CHECK(r.err.find("line 3") != std::string::npos);
    }
    SUBCASE("empty Democratic extreme group exits 3") {
        std::string text = "voter_id,m1,m2,P,H\n";
        int id = 0;
        // Both races see D and R votes, but nobody is in group 0.
        for (const char* m : {"0,1", "1,0", "1,1"})
            for (int v = 0; v < 5; ++v) text += std::to_string(id++) + "," + m + (m[0] == '0' ? ",D,D\n" : ",R,R\n");
        write_file(tmp.path / "cvr.csv", text);
        auto r = cli({"analyze", "--set", "cvr_path=" + (tmp.path / "cvr.csv").string(), "--set",
                      "analysis.case1=false", "--out", tmp.path.string()});
        CHECK(r.code == 3);
        CHECK(r.err.find("polarization") != std::string::npos);
    }
    SUBCASE("a held lock refuses a second run") {
        write_file(tmp.path / ".electorate-lab.lock", "");
        CHECK(cli({"predict", "--out", tmp.path.string()}).code != 0);
    }
}

TEST_CASE("equilibrium and classify subcommands") {
    TempDir tmp;
    auto eq = cli({"equilibrium", "--set", "loss.family=Concave", "--set", "equilibrium.platforms=41", "--out",
                   tmp.path.string()});
    INFO(eq.err);
    REQUIRE(eq.code == 0);
    std::string report = read_file(tmp.path / "equilibrium_report.csv");
    CHECK(report.find("condorcet_winner,0.5\n") != std::string::npos);
    CHECK(report.find("dynamics,Converged\n") != std::string::npos);
    CHECK(read_file(tmp.path / "contest_matrix.csv").rfind("p1,p2,share1,share2,winner\n", 0) == 0);

    std::string pts = "proxy,indifference\n";
    for (int i = 0; i < 21; ++i) {
        double m = 0.075 * i;
        pts += std::to_string(m) + "," + std::to_string(-std::fabs(std::exp(-m * m) - std::exp(-(m + 0.1) * (m + 0.1)))) + "\n";
    }
    write_file(tmp.path / "pts.csv", pts);
    auto cl = cli({"classify", "--set", "classify.points_path=" + (tmp.path / "pts.csv").string(), "--out",
                   tmp.path.string()});
    INFO(cl.err);
    REQUIRE(cl.code == 0);
    CHECK(cl.out.rfind("UShaped", 0) == 0);
    CHECK(read_file(tmp.path / "classification.csv").find("\nUShaped,ReverseS,") != std::string::npos);
}
