#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

std::string cli_binary() {
  const char* env = std::getenv("ABC_RATES_BIN");
  REQUIRE(env != nullptr);
  return env;
}

int run_cli(const std::string& args) {
  const int status = std::system((cli_binary() + " " + args + " > /dev/null 2>&1").c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("abcrates_cli_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }

  fs::path write_config(const std::string& name, const nlohmann::json& j) const {
    const fs::path p = path / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }
};

}  // namespace

TEST_CASE("shape command is deterministic and writes its artifacts") {
  TempDir dir;
  nlohmann::json cfg = {
      {"experiment", "shape"},
      {"seed", 42},
      {"workers", 2},
      {"model", {{"n", {400}}, {"k0", 1}, {"theta0", 0.5}}},
      {"run", {{"C", 1.0}, {"draws", 200000}, {"bins", 50}}},
  };
  const auto cfg_path = dir.write_config("shape.json", cfg);
  const auto out1 = dir.path / "a";
  const auto out2 = dir.path / "b";
  REQUIRE(run_cli("shape --config " + cfg_path.string() + " --out " + out1.string()) == 0);
  REQUIRE(run_cli("shape --config " + cfg_path.string() + " --out " + out2.string()) == 0);

  for (const std::string f : {"table_n400.csv", "hist_n400.csv", "theory_n400.csv"}) {
    CHECK(fs::exists(out1 / f));
    CHECK(slurp(out1 / f) == slurp(out2 / f));
  }

  nlohmann::json s1, s2;
  std::ifstream(out1 / "summary.json") >> s1;
  std::ifstream(out2 / "summary.json") >> s2;
  CHECK(s1["results"] == s2["results"]);
  CHECK(s1["version"].get<std::string>().rfind("abc-rates", 0) == 0);
  CHECK(s1["results"]["per_n"][0]["l1_discrepancy"].is_number());
  CHECK(s1["results"]["per_n"][0]["acceptance_rate"].is_number());
  CHECK(s1.contains("runtime_seconds"));
  CHECK(s1.contains("config"));
}

TEST_CASE("config errors exit with code 2") {
  TempDir dir;
  // Missing required model.k0.
  const auto bad = dir.write_config("bad.json", {{"experiment", "shape"},
                                                 {"seed", 1},
                                                 {"model", {{"n", {100}}}},
                                                 {"run", {{"draws", 1000}}}});
  CHECK(run_cli("shape --config " + bad.string() + " --out " + (dir.path / "o").string()) == 2);

  // Experiment/subcommand mismatch.
  CHECK(run_cli("risk --config " + bad.string()) == 2);

  // Nonexistent config file.
  CHECK(run_cli("shape --config " + (dir.path / "nope.json").string()) == 2);

  // Missing required --config flag.
  CHECK(run_cli("shape") == 2);
}

TEST_CASE("risk command rejects a too-short tolerance list") {
  TempDir dir;
  nlohmann::json cfg = {
      {"experiment", "risk"},
      {"seed", 5},
      {"model", {{"n", 2500}, {"theta0", 0.5}}},
      {"run", {{"epsilons", {0.3}}, {"draws", 10000}}},
  };
  const auto p = dir.write_config("risk1.json", cfg);
  CHECK(run_cli("risk --config " + p.string() + " --out " + (dir.path / "o").string()) == 2);
}

TEST_CASE("risk command produces curves and fits on a small problem") {
  TempDir dir;
  nlohmann::json cfg = {
      {"experiment", "risk"},
      {"seed", 9},
      {"workers", 2},
      {"model", {{"n", 2500}, {"theta0", 0.5}}},
      {"run",
       {{"epsilon_log10_min", -1.5},
        {"epsilon_log10_max", -0.5},
        {"epsilon_count", 8},
        {"draws", 120000},
        {"observed_replicates", 2}}},
  };
  const auto p = dir.write_config("risk.json", cfg);
  const auto out = dir.path / "risk_out";
  REQUIRE(run_cli("risk --config " + p.string() + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "risk_vanilla.csv"));
  CHECK(fs::exists(out / "risk_adjusted.csv"));
  nlohmann::json s;
  std::ifstream(out / "summary.json") >> s;
  CHECK(s["results"]["vanilla"]["slope"].is_number());
  CHECK(s["results"]["adjusted"]["breakpoint_log10_epsilon"].is_number());
}

TEST_CASE("oracle-check command reports the L1 discrepancy per replicate") {
  TempDir dir;
  nlohmann::json cfg = {
      {"experiment", "oracle-check"},
      {"seed", 3},
      {"workers", 2},
      {"model", {{"n", 225}, {"k0", 0}, {"theta0", 0.5}}},
      {"run",
       {{"epsilon", 0.1},
        {"draws", 40000},
        {"grid_points", 100},
        {"reps", 2000},
        {"replicates", 2}}},
  };
  const auto p = dir.write_config("oracle.json", cfg);
  const auto out = dir.path / "oracle_out";
  REQUIRE(run_cli("oracle-check --config " + p.string() + " --out " + out.string()) == 0);
  nlohmann::json s;
  std::ifstream(out / "summary.json") >> s;
  REQUIRE(s["results"]["per_replicate"].size() == 2);
  CHECK(s["results"]["max_l1_discrepancy"].get<double>() < 0.5);
  CHECK(fs::exists(out / "abc_density_r0.csv"));
  CHECK(fs::exists(out / "oracle_density_r1.csv"));

  // n above the grid-oracle cost limit is a configuration error.
  nlohmann::json big = cfg;
  big["model"]["n"] = 4096;
  const auto pb = dir.write_config("oracle_big.json", big);
  CHECK(run_cli("oracle-check --config " + pb.string()) == 2);
}

TEST_CASE("acceptance-scaling self-check passes on a small grid") {
  TempDir dir;
  nlohmann::json cfg = {
      {"experiment", "acceptance-scaling"},
      {"seed", 12},
      {"workers", 2},
      {"model", {{"n", {100, 400, 1600}}, {"k0", 1}, {"theta0", 0.5}}},
      {"run", {{"C", 1.0}, {"draws", {60000, 240000, 1000000}}, {"slope_tolerance", 0.25}}},
  };
  const auto p = dir.write_config("scaling.json", cfg);
  const auto out = dir.path / "scaling_out";
  REQUIRE(run_cli("acceptance-scaling --config " + p.string() + " --out " + out.string()) == 0);
  nlohmann::json s;
  std::ifstream(out / "summary.json") >> s;
  CHECK(s["results"]["predicted_exponent"].get<double>() == -1.0);
  CHECK(s["results"]["matches_prediction"].get<bool>());
  CHECK(fs::exists(out / "acceptance.csv"));
}
