#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = prefplan::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("fable sweep CSV") {
  const auto r = run({"fable", "sweep", "--preset", "meet-symmetric", "--depth", "2", "--iters", "1000"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 2 + 12);
  CHECK(l[0].rfind("# prefplan 0.1.0 fable sweep preset=meet-symmetric", 0) == 0);
  CHECK(l[0].find("seed=1") != std::string::npos);
  CHECK(l[1] == "agent,depth,p_first,method,stderr,seed");
  CHECK(l[2] == "Alice,0,0.55,analytical,0,1");
  CHECK(l[8].rfind("Alice,0,", 0) == 0);
  CHECK(l[8].find("monte-carlo") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run({"fable", "sweep", "--preset", "nonsense"}).code == 2);
  CHECK(run({"fable", "sweep", "--p1a", "1.5", "--pma", "0.5", "--p1b", "0.5", "--pmb", "0.5"}).code == 2);
  CHECK(run({"fable", "sweep", "--p1a", "0.5"}).code == 2);
  CHECK(run({"fable", "sweep", "--preset", "avoid-mild", "--p1a", "0.5", "--pma", "0.5", "--p1b", "0.5",
             "--pmb", "0.5"})
            .code == 2);
  CHECK(run({"fable", "learn", "--visits", "0"}).code == 2);
  CHECK(run({"mistakes", "--p1", "0"}).code == 2);
  CHECK(run({"sailing", "eval", "--size", "5"}).code == 2);
  CHECK(run({"sailing", "eval", "--policy", "greedy", "--size", "1"}).code == 2);
  CHECK(run({"sailing", "infer", "--size", "5", "--blocks", "30"}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({}).code == 2);
  const auto r = run({"fable", "sweep", "--preset", "nonsense"});
  CHECK(r.err.find("unknown preset") != std::string::npos);
}

TEST_CASE("version") {
  const auto r = run({"--version"});
  CHECK(r.code == 0);
  CHECK(r.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("mistakes JSON") {
  const auto r = run({"mistakes", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["meta"]["subcommand"] == "mistakes");
  CHECK(doc["meta"]["params"]["seed"] == "none");
  REQUIRE(doc["rows"].size() == 2);
  CHECK(std::abs(doc["rows"][0]["policy"].get<double>() - 0.59901) < 1e-5);
  CHECK(doc["rows"][1]["model"] == "single-sample-nesting");
  CHECK(doc["rows"][1]["policy"].get<double>() == doctest::Approx(0.55));
  CHECK(doc["rows"][1]["true_value"].get<double>() == doctest::Approx(0.505));
  CHECK(doc["rows"][1]["rational_value"].get<double>() == doctest::Approx(0.55));
}

TEST_CASE("mistakes text") {
  const auto r = run({"mistakes", "--format", "text"});
  REQUIRE(r.code == 0);
  CHECK(lines(r.out).size() == 4);
  CHECK(lines(r.out)[1].rfind("model ", 0) == 0);
}

TEST_CASE("fable learn") {
  const auto r = run({"fable", "learn", "--iters", "1000", "--samples", "50", "--seed", "3"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 52);
  CHECK(l[1] == "index,log_odds_first,log_odds_second");
  CHECK(l[0].find("other_p1=0.55") != std::string::npos);
}

TEST_CASE("sailing infer smoke run") {
  const auto r = run({"sailing", "infer", "--size", "6", "--samples", "100", "--smoke"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 102);
  CHECK(l[1] == "index,theta");
  CHECK(r.err.find("acceptance rate") != std::string::npos);
  for (std::size_t i = 2; i < l.size(); ++i) CHECK(std::stod(l[i].substr(l[i].find(',') + 1)) > 1.0);
}

TEST_CASE("sailing eval orders optimal below greedy") {
  auto mean = [](const Result& r) {
    const auto l = lines(r.out);
    std::istringstream row(l.at(2));
    std::string policy, size, cost;
    std::getline(row, policy, ',');
    std::getline(row, size, ',');
    std::getline(row, cost, ',');
    return std::stod(cost);
  };
  const auto g = run({"sailing", "eval", "--policy", "greedy", "--size", "10", "--rollouts", "2000"});
  const auto o = run({"sailing", "eval", "--policy", "optimal", "--size", "10", "--rollouts", "2000"});
  REQUIRE(g.code == 0);
  REQUIRE(o.code == 0);
  CHECK(mean(o) < mean(g));
  CHECK(mean(o) > 30.0);
  CHECK(mean(g) < 60.0);
}

TEST_CASE("sailing table") {
  const auto r = run({"sailing", "table", "--sizes", "4,5", "--rollouts", "200", "--samples", "100", "--smoke"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 5);
  CHECK(l[1] == "policy,4,5");
  CHECK(l[2].rfind("inferred,", 0) == 0);
  CHECK(l[0].find("sizes=4;5") != std::string::npos);
}

TEST_CASE("every subcommand is byte-reproducible") {
  const std::vector<std::vector<std::string>> commands = {
      {"fable", "sweep", "--preset", "chase-strong", "--iters", "500", "--seed", "9"},
      {"fable", "learn", "--iters", "500", "--samples", "20", "--seed", "9"},
      {"mistakes"},
      {"sailing", "infer", "--size", "5", "--samples", "100", "--smoke", "--seed", "9"},
      {"sailing", "eval", "--policy", "inferred", "--size", "5", "--samples", "100", "--smoke", "--rollouts",
       "200", "--seed", "9"},
      {"sailing", "table", "--sizes", "4", "--samples", "100", "--smoke", "--rollouts", "200", "--seed", "9"},
  };
  for (const auto& c : commands) {
    const auto a = run(c);
    const auto b = run(c);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
  }
  CHECK(run({"fable", "sweep", "--seed", "1", "--iters", "500"}).out !=
        run({"fable", "sweep", "--seed", "2", "--iters", "500"}).out);
}

TEST_CASE("--out writes to a file") {
  const auto path = std::filesystem::temp_directory_path() / "prefplan_cli_test_out.csv";
  const auto r = run({"mistakes", "--out", path.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(path, std::ios::binary);
  std::stringstream contents;
  contents << in.rdbuf();
  CHECK(contents.str() == run({"mistakes"}).out);
  std::filesystem::remove(path);
}

TEST_CASE("fable sweep values") {
  const auto r = run({"fable", "sweep", "--preset", "meet-symmetric", "--depth", "1", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  bool seen = false;
  for (const auto& row : doc["rows"]) {
    if (row["method"] != "analytical") continue;
    if (row["depth"] == 0) CHECK(row["p_first"].get<double>() == 0.55);
    if (row["depth"] == 1) {
      CHECK(std::abs(row["p_first"].get<double>() - 0.604) < 1e-3);
      seen = true;
    }
  }
  CHECK(seen);
}

TEST_CASE("sailing eval on the 25-square lake") {
  auto mean = [](const Result& r) {
    std::istringstream row(lines(r.out).at(2));
    std::string field;
    for (int i = 0; i < 3; ++i) std::getline(row, field, ',');
    return std::stod(field);
  };
  const auto g = run({"sailing", "eval", "--policy", "greedy", "--size", "25"});
  const auto o = run({"sailing", "eval", "--policy", "optimal", "--size", "25"});
  REQUIRE(g.code == 0);
  REQUIRE(o.code == 0);
  CHECK(mean(g) >= 102.0);
  CHECK(mean(g) <= 112.0);
  CHECK(std::abs(mean(o) - 103.0) <= 2.0);
}

TEST_CASE("sailing infer smoke run on the 25-square lake") {
  const auto start = std::chrono::steady_clock::now();
  const auto r = run({"sailing", "infer", "--size", "25", "--samples", "100", "--smoke"});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  REQUIRE(r.code == 0);
  CHECK(lines(r.out).size() == 102);
  CHECK(secs < 60.0);
}

}
