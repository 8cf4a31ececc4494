#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "cvlab/cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cvlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cvlab::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("validate exit codes") {
  const auto ok = cli({"validate", "--expr", "t/(1+t)", "--kind", "xi"});
  CHECK(ok.code == 0);
  CHECK(nlohmann::json::parse(ok.out)["ok"] == true);

  const auto bad = cli({"validate", "--expr", "2*t", "--kind", "xi"});
  CHECK(bad.code == 1);
  const auto j = nlohmann::json::parse(bad.out);
  CHECK(j["ok"] == false);
  CHECK(j["violations"][0]["condition"] == "xi<=1");

  const auto syntax = cli({"validate", "--expr", "t/(", "--kind", "xi"});
  CHECK(syntax.code == 2);
  CHECK(syntax.err.find("offset 3") != std::string::npos);

  CHECK(cli({"validate", "--expr", "-1", "--kind", "fpp"}).code == 1);
  CHECK(cli({"validate", "--profile", "/nonexistent/profile.txt"}).code == 2);
  CHECK(cli({"validate"}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"validate", "--expr", "t", "--kind", "nope"}).code == 2);
}

TEST_CASE("classify") {
  const auto poly = cli({"classify", "--family", "poly", "--a", "0.5", "--format", "json"});
  REQUIRE(poly.code == 0);
  CHECK(nlohmann::json::parse(poly.out)["class"] == "S1");
  const auto s3 = cli({"classify", "--family", "s3", "--r0", "1"});
  CHECK(s3.code == 0);
  CHECK(s3.out.find("class,S3") != std::string::npos);
  const auto flat = cli({"classify", "--expr", "0"});
  CHECK(flat.out.find("class,Flat") != std::string::npos);
  CHECK(cli({"classify", "--expr", "2*t", "--kind", "xi"}).code == 1);
}

TEST_CASE("series output is deterministic and atomic") {
  const auto dir = std::filesystem::temp_directory_path() / "cvlab_cli_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "series.csv").string();
  const auto a = cli({"series", "--family", "poly", "--a", "0.5", "--n", "2", "--k", "2", "--mode", "chern", "--out", path});
  REQUIRE(a.code == 0);
  std::ifstream in(path);
  std::stringstream first;
  first << in.rdbuf();
  const auto b = cli({"series", "--family", "poly", "--a", "0.5", "--n", "2", "--k", "2", "--mode", "chern"});
  CHECK(b.out == first.str());
  CHECK(b.out.rfind("s,vol,integral,normalized\n", 0) == 0);
  CHECK(b.err.find("verdict=") != std::string::npos);
  CHECK(a.out.find("verdict=") != std::string::npos);

  const auto j = cli({"series", "--family", "poly", "--a", "0.5", "--n", "2", "--k", "2", "--mode", "chern", "--format", "json"});
  const auto parsed = nlohmann::json::parse(j.out);
  CHECK(parsed["mode"] == "chern");
  CHECK(parsed["k"] == 2);
  CHECK(parsed["fit"].contains("verdict"));

  // A failed run leaves no file behind.
  const auto missing = (dir / "never.csv").string();
  CHECK(cli({"series", "--expr", "2*t", "--out", missing}).code == 1);
  CHECK_FALSE(std::filesystem::exists(missing));
  std::filesystem::remove_all(dir);
}

TEST_CASE("quadrature failure exits with 3") {
  const auto r = cli({"series", "--family", "poly", "--a", "0.5", "--n", "2", "--tol", "1e-300"});
  CHECK(r.code == 3);
  CHECK(r.err.find("quadrature") != std::string::npos);
}

TEST_CASE("environment defaults") {
  setenv("CVLAB_GRID", "64", 1);
  const auto r = cli({"curvature-table", "--expr", "t/(2*(1+t))"});
  unsetenv("CVLAB_GRID");
  CHECK(r.code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 66);
  const auto g = cli({"curvature-table", "--expr", "t/(2*(1+t))", "--grid", "32"});
  CHECK(std::count(g.out.begin(), g.out.end(), '\n') == 34);
  setenv("CVLAB_GRID", "lots", 1);
  CHECK(cli({"classify", "--expr", "0"}).code == 2);
  unsetenv("CVLAB_GRID");
}

TEST_CASE("chern and report") {
  const auto c = cli({"chern", "--family", "poly", "--a", "0.5", "--n", "2", "--format", "json"});
  REQUIRE(c.code == 0);
  CHECK(nlohmann::json::parse(c.out)["value"].get<double>() == doctest::Approx(0.5).epsilon(1e-6));
  const auto r = cli({"report", "--family", "poly", "--a", "0.5", "--n", "2", "--k", "2", "--mode", "sigma"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["k"] == 2);
  CHECK(j["mode"] == "sigma");
  CHECK(j["fit"].contains("slope"));
  CHECK(j["fit"].contains("residual"));
  CHECK(j["volume_limit"]["matches"] == "c_n (1-xi_inf)^n");
}

TEST_CASE("profile file with a family") {
  const auto dir = std::filesystem::temp_directory_path() / "cvlab_cli_family";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "s3.txt") << "kind=family\nfamily=s3\nr0=1\nn=2\n";
  const auto r = cli({"classify", "--profile", (dir / "s3.txt").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("class,S3") != std::string::npos);
  std::filesystem::remove_all(dir);
}
