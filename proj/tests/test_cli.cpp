#include "convroof/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using convroof::cli::run;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("roof on the potato chip") {
  const auto r = call({"roof", "--example", "potato_chip", "-N", "512", "--query", "0.5,0.5",
                       "--format", "json"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["schema_version"] == 1);
  const auto& res = j["results"][0];
  CHECK(std::abs(res["value"].get<double>() - 0.0318) <= 1e-2);
  CHECK(res["decomposition"].size() <= 3);
  double wsum = 0.0;
  for (const auto& e : res["decomposition"]) wsum += e["weight"].get<double>();
  CHECK(wsum == doctest::Approx(1.0));

  const auto text = call({"roof", "--example", "potato_chip", "-N", "512", "--query", "0.5,0.5"});
  CHECK(text.code == 0);
  CHECK(text.out.find("0.0317896") != std::string::npos);
  CHECK(text.out.find("decomposition of 0.5,0.5") != std::string::npos);
}

TEST_CASE("entangle reports value, oracle and gap for the Bell state") {
  const auto r = call({"entangle", "--state", "bell", "--measure", "linear_entropy", "--restarts",
                       "20", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["upper_bound"].get<double>() == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK(j["oracle"].get<double>() == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK(std::abs(j["gap"].get<double>()) <= 5e-3);
  const auto text = call({"entangle", "--state", "werner:0.8", "--measure", "von_neumann",
                          "--restarts", "4"});
  CHECK(text.code == 0);
  CHECK(text.out.find("value (upper bound)") != std::string::npos);
}

TEST_CASE("quick verification passes") {
  const auto r = call({"verify", "--quick"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  const auto j = json::parse(call({"verify", "--quick", "--format", "json"}).out);
  CHECK(j["passed"] == true);
}

TEST_CASE("every subcommand emits versioned JSON") {
  const std::vector<std::vector<std::string>> commands{
      {"hull", "--example", "no_c2", "-N", "16"},
      {"roof", "--example", "no_c2", "--query", "0.2,0.1"},
      {"grid", "--example", "no_c2", "-N", "16", "--grid", "4"},
      {"flat", "--example", "no_c2", "--query", "-0.3,0.1"},
      {"hyperplane", "--example", "no_c2", "--query", "1,0"},
      {"extend", "--example", "no_c2", "-N", "16", "--query", "1.5,0"},
      {"probe", "--example", "no_c2", "-N", "32", "--samples", "10"},
      {"probe", "--kind", "gradient", "--example", "no_c2", "--query", "0.5,0"},
      {"probe", "--kind", "convergence", "--example", "no_c2", "--resolutions", "16,32",
       "--query", "0.5,0"},
      {"example", "--example", "tomato_can", "-N", "16"},
      {"entangle", "--state", "werner:0.5", "--restarts", "2"},
      {"verify", "--quick"},
  };
  for (auto args : commands) {
    args.push_back("--format");
    args.push_back("json");
    const auto r = call(args);
    CHECK_MESSAGE(r.code == 0, args.front() << ": " << r.err);
    const auto j = json::parse(r.out);
    CHECK_MESSAGE(j["schema_version"] == 1, args.front());
  }
}

TEST_CASE("csv and table formats") {
  const auto grid = call({"grid", "--example", "no_c2", "-N", "16", "--grid", "3"});
  REQUIRE(grid.code == 0);
  CHECK(grid.out.rfind("x1,x2,value\n", 0) == 0);
  const auto cloud = call({"example", "--example", "no_c2", "-N", "16", "--format", "csv"});
  REQUIRE(cloud.code == 0);
  CHECK(cloud.out.rfind("x1,x2,f\n", 0) == 0);
  CHECK(std::count(cloud.out.begin(), cloud.out.end(), '\n') == 17);
  const auto table = call({"example", "--example", "no_c2", "-N", "16"});
  CHECK(table.out.find("oracle") != std::string::npos);
}

TEST_CASE("identical arguments give identical output") {
  const std::vector<std::string> args{"probe", "--example", "tomato_can", "-N", "64", "--seed", "5",
                                      "--samples", "20", "--format", "json"};
  CHECK(call(args).out == call(args).out);
  const auto g1 = call({"grid", "--example", "potato_chip", "-N", "64", "--grid", "12", "--jobs", "1"});
  const auto g3 = call({"grid", "--example", "potato_chip", "-N", "64", "--grid", "12", "--jobs", "3"});
  CHECK(g1.out == g3.out);
  const auto e1 = call({"entangle", "--state", "random:3:3", "--restarts", "4", "--jobs", "1"});
  const auto e2 = call({"entangle", "--state", "random:3:3", "--restarts", "4", "--jobs", "2"});
  CHECK(e1.out == e2.out);
}

TEST_CASE("input files and output files") {
  const auto dir = std::filesystem::temp_directory_path() / "convroof_cli_test";
  std::filesystem::create_directories(dir);
  const auto cloud = (dir / "cloud.csv").string();
  const auto result = (dir / "roof.json").string();
  REQUIRE(call({"example", "--example", "no_c2", "-N", "32", "--format", "csv", "--output", cloud}).code == 0);
  const auto r = call({"roof", "--input", cloud, "--query", "0.5,0", "--format", "json", "--output", result});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(result);
  const auto j = json::parse(in);
  const auto direct = json::parse(
      call({"roof", "--example", "no_c2", "-N", "32", "--query", "0.5,0", "--format", "json"}).out);
  CHECK(j["results"][0]["value"] == direct["results"][0]["value"]);

  const auto state = (dir / "state.json").string();
  {
    std::ofstream s(state);
    s << R"({"re": [[0.5,0,0,0.5],[0,0,0,0],[0,0,0,0],[0.5,0,0,0.5]]})";
  }
  const auto e = call({"entangle", "--state-file", state, "--restarts", "2", "--format", "json"});
  REQUIRE(e.code == 0);
  CHECK(json::parse(e.out)["concurrence"].get<double>() == doctest::Approx(1.0));
  std::filesystem::remove_all(dir);
}

TEST_CASE("exit codes") {
  CHECK(call({}).code == 2);
  CHECK(call({"bogus"}).code == 2);
  CHECK(call({"roof", "--example", "nope", "--query", "0,0"}).code == 2);
  CHECK(call({"roof", "--example", "no_c2"}).code == 2);
  CHECK(call({"roof", "--example", "no_c2", "-N", "4", "--query", "0,0"}).code == 2);
  CHECK(call({"roof", "--input", "/nonexistent.csv", "--query", "0,0"}).code == 2);
  CHECK(call({"entangle", "--state", "ghz"}).code == 2);
  const auto outside = call({"roof", "--example", "no_c2", "--query", "3,3"});
  CHECK(outside.code == 4);
  CHECK(outside.err.find("outside") != std::string::npos);
  const auto vertical = call({"extend", "--example", "potato_chip", "-N", "64", "--query", "1.5,0",
                              "--bound", "100"});
  CHECK(vertical.code == 4);
  CHECK(vertical.err.find("supporting hyperplane") != std::string::npos);
  CHECK(call({"--help"}).code == 0);
  CHECK(call({"roof", "--help"}).code == 0);
}
