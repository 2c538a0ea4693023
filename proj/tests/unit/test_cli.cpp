#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <string>

#include "corpus.hpp"
#include "equiterm/scenario_io.hpp"

using equiterm::read_file;
using equiterm::testing::data_path;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "equiterm_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

int run(const std::string& args, const fs::path& out, const fs::path& err) {
  const std::string cmd = std::string("\"") + EQUITERM_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("solve writes a converged report") {
  const fs::path out = scratch("solve.json"), err = scratch("solve.err");
  REQUIRE(run("solve --scenario \"" + data_path("desk.json") + "\"", out, err) == 0);
  const nlohmann::json j = nlohmann::json::parse(read_file(out.string()));
  CHECK(j["result"]["converged"] == true);
  CHECK(j["result"]["clearing_residual"].get<double>() <= 1e-8);
  CHECK(j["input"]["sha256"] == equiterm::sha256_hex(read_file(data_path("desk.json"))));
  CHECK(j.contains("config"));
  CHECK(j.contains("saturation"));
}

TEST_CASE("reports are byte-identical across runs") {
  const fs::path a = scratch("a.json"), b = scratch("b.json"), err = scratch("ab.err");
  REQUIRE(run("solve --scenario \"" + data_path("desk.json") + "\" --output \"" + a.string() + "\"", scratch("a.out"), err) == 0);
  REQUIRE(run("solve --scenario \"" + data_path("desk.json") + "\" --output \"" + b.string() + "\"", scratch("b.out"), err) == 0);
  CHECK(read_file(a.string()) == read_file(b.string()));
}

TEST_CASE("exit codes") {
  const fs::path out = scratch("x.out"), err = scratch("x.err");
  CHECK(run("validate --scenario \"" + data_path("infeasible.json") + "\"", out, err) == 2);
  CHECK(run("solve --scenario \"" + data_path("infeasible.json") + "\"", out, err) == 2);
  CHECK(run("solve --scenario \"" + data_path("nope.json") + "\"", out, err) == 1);
  CHECK(run("solve", out, err) == 1);
  CHECK(run("frobnicate", out, err) == 1);
  CHECK(run("solve --scenario \"" + data_path("desk.json") + "\" --tol -1", out, err) == 1);
  CHECK(run("solve --scenario \"" + data_path("desk.json") + "\" --method tatonnement --max-iter 1", out, err) == 3);
}

TEST_CASE("other subcommands succeed on their data") {
  const fs::path out = scratch("y.out"), err = scratch("y.err");
  CHECK(run("validate --scenario \"" + data_path("desk.json") + "\"", out, err) == 0);
  CHECK(run("two-stage --scenario \"" + data_path("two_stage.json") + "\"", out, err) == 0);
  CHECK(run("mean-max --scenario \"" + data_path("meanmax_vertical.json") + "\"", out, err) == 0);
  CHECK(run("oracle --scenario \"" + data_path("tiny.json") + "\"", out, err) == 0);
  CHECK(run("doob --scenario \"" + data_path("ensemble.json") + "\"", out, err) == 0);
  CHECK(run("diagnose --scenario \"" + data_path("desk.json") + "\" --samples 50", out, err) == 0);
  CHECK(run("solve --scenario \"" + data_path("desk.json") + "\" --format text", out, err) == 0);
  CHECK(read_file(out.string()).find("result.clearing_residual: ") != std::string::npos);
}
