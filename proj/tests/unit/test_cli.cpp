#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "bracket_reach/cli.hpp"
#include "bracket_reach/dpath.hpp"
#include "bracket_reach/scenario.hpp"

using namespace bracket_reach;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "bracket-reach");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  unsetenv("BRACKET_REACH_SEED");
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"analyze"}).code == cli::kExitUsage);
  CHECK(run({"analyze", "no-such"}).code == cli::kExitUsage);
  CHECK(run({"analyze", "heisenberg", "--param", "lambda=1"}).code == cli::kExitUsage);
  CHECK(run({"analyze", "heisenberg", "--param", "oops"}).code == cli::kExitUsage);
  CHECK(run({"verify", "heisenberg", "--word", "1,2", "--at", "0,0"}).code == cli::kExitUsage);
  CHECK(run({"verify", "heisenberg", "--word", "1,3", "--at", "0,0,0"}).code == cli::kExitUsage);
  CHECK(run({"verify", "heisenberg", "--word", "1,2", "--at", "0,x,0"}).code == cli::kExitUsage);
  CHECK(run({"steer", "heisenberg", "--from", "0,0,0"}).code == cli::kExitUsage);
  const auto help = run({"--help"});
  CHECK(help.code == cli::kExitOk);
  CHECK(help.out.find("connect") != std::string::npos);
  setenv("BRACKET_REACH_SEED", "abc", 1);
  CHECK(run({"analyze", "heisenberg"}).code == cli::kExitUsage);
  unsetenv("BRACKET_REACH_SEED");
}

TEST_CASE("analyze reports the filtration") {
  const auto r = run({"analyze", "heisenberg", "--json"});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = json::parse(r.out);
  CHECK(j["mu"] == 2);
  CHECK(j["M"] == 3);
  CHECK(j["uniform"] == true);
  CHECK(j["samples"].size() == 125);
  CHECK(j["samples"][0]["ranks"] == json::array({2, 3, 3, 3}));
  CHECK(j["frame"]["words"] == json::array({"(1)", "(2)", "(1,2)"}));
  CHECK(run({"analyze", "martinet"}).out.find("mu = 3") != std::string::npos);
}

TEST_CASE("verify exit codes follow the verdict") {
  CHECK(run({"verify", "engel", "--word", "2,1,2", "--at", "0.1,0.2,0.3,0.1"}).code == cli::kExitOk);
  // A step this large leaves the asymptotic regime and the check fails.
  CHECK(run({"verify", "martinet", "--word", "1,1,2", "--at", "0.2,0.1,0", "--h", "0.6"}).code ==
        cli::kExitFailure);
  const auto out = run({"verify", "heisenberg", "--word", "1,2", "--at", "0,0,0", "--json"});
  CHECK(json::parse(out.out)["passed"] == true);
}

TEST_CASE("radius JSON is deterministic under the seed") {
  const std::vector<std::string> args{"radius", "engel", "--json", "--probes", "5", "--seed", "4"};
  const auto a = run(args), b = run(args);
  REQUIRE(a.code == cli::kExitOk);
  CHECK(a.out == b.out);
  const auto j = json::parse(a.out);
  CHECK(j["certificate"]["r_o"].get<double>() > 0.0);
  CHECK(j["certificate"]["holds"] == true);
  CHECK(j["probes"]["succeeded"] == 5);
  CHECK(j["paper_formula"]["method"] == "paper-formula");

  setenv("BRACKET_REACH_SEED", "4", 1);
  const auto env = run({"radius", "engel", "--json", "--probes", "5", "--seed", "99"});
  unsetenv("BRACKET_REACH_SEED");
  CHECK(env.out == a.out);
}

TEST_CASE("steer and connect write revalidatable paths") {
  for (const std::string cmd : {"steer", "connect"}) {
    CAPTURE(cmd);
    const std::string prefix = "test_cli_" + cmd;
    const std::string to = cmd == "steer" ? "0.01,-0.01,0.01" : "0.3,0.2,-0.2";
    const auto r = run({cmd, "heisenberg", "--from", "0,0,0", "--to", to, "--out", prefix, "--json"});
    REQUIRE(r.code == cli::kExitOk);
    const auto printed = json::parse(r.out);
    std::ifstream mf(prefix + ".json");
    const auto manifest = json::parse(mf);
    CHECK(manifest == printed);
    CHECK(manifest["validation"]["ok"] == true);
    std::ifstream csv(prefix + ".csv");
    const auto path = reach::load_dpath(manifest, csv);
    const auto sc = cli::load_scenario("heisenberg");
    const auto check = reach::validate_dpath(path, *sc.spec);
    CHECK(check.ok());
    CHECK(path.endpoint_error() <= 1e-8);
    if (cmd == "connect") CHECK(manifest["legs"].size() >= 1);
    std::remove((prefix + ".csv").c_str());
    std::remove((prefix + ".json").c_str());
  }
}
