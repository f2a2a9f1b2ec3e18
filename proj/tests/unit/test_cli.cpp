#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "singlab/error.hpp"

using namespace singlab;
using singlab::cli::Experiment;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = SINGLAB_CONFIG_DIR;

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("singlab_cli_test_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  fs::path write(const std::string& file, const std::string& body) const {
    std::ofstream(dir / file) << body;
    return dir / file;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

int run(Experiment kind, const fs::path& config, const fs::path& out, std::string* err = nullptr) {
  std::ostringstream es;
  const int code = cli::run(kind, config, out, std::nullopt, false, es);
  if (err) *err = es.str();
  return code;
}

}  // namespace

TEST_CASE("subcommand names round trip") {
  for (Experiment k : {Experiment::Integrate, Experiment::Minimize, Experiment::Sundman, Experiment::Averaging,
                       Experiment::Assumptions, Experiment::Reduce}) {
    CHECK(cli::experiment_from_subcommand(cli::subcommand_name(k)) == k);
  }
  CHECK_FALSE(cli::experiment_from_subcommand("fly").has_value());
}

TEST_CASE("exit codes") {
  CHECK(cli::exit_code_for(ErrorCode::ConfigError) == 1);
  CHECK(cli::exit_code_for(ErrorCode::IoError) == 1);
  CHECK(cli::exit_code_for(ErrorCode::AssumptionViolation) == 2);
  CHECK(cli::exit_code_for(ErrorCode::QuadratureFailure) == 3);
  CHECK(cli::exit_code_for(ErrorCode::StepUnderflow) == 3);
}

TEST_CASE("schema validation rejects unknown and misplaced keys") {
  using nlohmann::json;
  const json potential = {{"kind", "one_center"}, {"dim", 2}, {"alpha", 1.0}};
  const json good = {{"version", 1}, {"potential", potential}, {"integrate", {{"x0", {1.0, 0.0}}, {"v0", {0.0, 1.0}}, {"t1", 1.0}}}};
  CHECK_NOTHROW(cli::parse_config(good, Experiment::Integrate, "."));
  auto code_of = [](const json& doc, Experiment kind) {
    try {
      cli::parse_config(doc, kind, ".");
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  json bad = good;
  bad["integrate"]["tolerance"] = 1e-9;
  CHECK(code_of(bad, Experiment::Integrate) == ErrorCode::ConfigError);
  bad = good;
  bad["version"] = 2;
  CHECK(code_of(bad, Experiment::Integrate) == ErrorCode::ConfigError);
  bad = good;
  bad["minimize"] = json::object();
  CHECK(code_of(bad, Experiment::Integrate) == ErrorCode::ConfigError);
  bad = good;
  bad["integrate"]["t1"] = "soon";
  CHECK(code_of(bad, Experiment::Integrate) == ErrorCode::ConfigError);
  bad = good;
  bad["potential"]["alpah"] = 1.0;
  CHECK(code_of(bad, Experiment::Integrate) == ErrorCode::ConfigError);
  bad = good;
  bad["experiment"] = "sundman";
  CHECK(code_of(bad, Experiment::Integrate) == ErrorCode::ConfigError);
  CHECK(code_of(good, Experiment::Sundman) == ErrorCode::ConfigError);
}

TEST_CASE("malformed config exits 1 and writes nothing") {
  Scratch s("malformed");
  const fs::path out = s.dir / "out";
  std::string err;
  CHECK(run(Experiment::Sundman, s.write("broken.json", "{\"version\": 1, \"potential\": "), out, &err) == 1);
  CHECK_FALSE(fs::exists(out));
  CHECK_FALSE(fs::exists(s.dir / "out.staging"));
  CHECK(err.find("ConfigError") != std::string::npos);
  CHECK(run(Experiment::Sundman, s.dir / "missing.json", out) == 1);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("non-empty output directory is refused") {
  Scratch s("occupied");
  fs::create_directories(s.dir / "out");
  s.write("out/keep.txt", "x");
  CHECK(run(Experiment::Sundman, kConfigs / "kepler_ejection.json", s.dir / "out") == 1);
  CHECK(slurp(s.dir / "out" / "keep.txt") == "x");
}

TEST_CASE("sundman-fit on the Kepler ejection config") {
  Scratch s("sundman");
  REQUIRE(run(Experiment::Sundman, kConfigs / "kepler_ejection.json", s.dir / "a") == 0);
  const auto summary = nlohmann::json::parse(slurp(s.dir / "a" / "summary.json"));
  CHECK(summary["fit"]["exponent"].get<double>() == doctest::Approx(2.0 / 3.0).epsilon(1e-4));
  CHECK(summary["experiment"] == "sundman");
  CHECK(fs::exists(s.dir / "a" / "events.json"));
  CHECK(fs::exists(s.dir / "a" / "series" / "trajectory.csv"));
  CHECK(fs::exists(s.dir / "a" / "series" / "radius.csv"));

  // reruns are byte-identical
  REQUIRE(run(Experiment::Sundman, kConfigs / "kepler_ejection.json", s.dir / "b") == 0);
  CHECK(slurp(s.dir / "a" / "summary.json") == slurp(s.dir / "b" / "summary.json"));
  CHECK(slurp(s.dir / "a" / "series" / "trajectory.csv") == slurp(s.dir / "b" / "series" / "trajectory.csv"));
}

TEST_CASE("averaging records a negative mean of Phi") {
  Scratch s("averaging");
  const fs::path cfg = s.write("avg.json", R"({"version": 1, "averaging": {"alphas": [1.0], "theta_samples": 9}})");
  REQUIRE(run(Experiment::Averaging, cfg, s.dir / "out") == 0);
  const auto summary = nlohmann::json::parse(slurp(s.dir / "out" / "summary.json"));
  CHECK(summary["alphas"][0]["average_nested"].get<double>() < 0.0);
  CHECK(summary["alphas"][0]["negative"] == true);
  CHECK(fs::exists(s.dir / "out" / "series" / "phi_alpha_1.csv"));
}

TEST_CASE("seeded minimization is reproducible and the seed flag wins") {
  Scratch s("minimize");
  const fs::path cfg = s.write("min.json", R"({
    "version": 1, "seed": 4,
    "potential": {"kind": "one_center", "dim": 2, "alpha": 1.0},
    "minimize": {"t1": 1.0, "cells": 30, "start": [1.0, 0.0], "end": [0.0, 1.0], "perturbation": 0.1}})");
  REQUIRE(run(Experiment::Minimize, cfg, s.dir / "a") == 0);
  REQUIRE(run(Experiment::Minimize, cfg, s.dir / "b") == 0);
  CHECK(slurp(s.dir / "a" / "summary.json") == slurp(s.dir / "b" / "summary.json"));
  std::ostringstream es;
  REQUIRE(cli::run(Experiment::Minimize, cfg, s.dir / "c", 99u, false, es) == 0);
  CHECK(nlohmann::json::parse(slurp(s.dir / "c" / "summary.json"))["seed"] == 99);
}

TEST_CASE("assumption failures exit 2 with a report") {
  Scratch s("assumptions");
  const fs::path cfg = s.write("u1.json", R"({
    "version": 1,
    "potential": {"kind": "homogeneous_n_body", "dim": 2, "alpha": 1.0, "mass_poly": [[1.0, 0.2], [1.0]]},
    "assumptions": {"sampler": {"count": 40}}})");
  CHECK(run(Experiment::Assumptions, cfg, s.dir / "out") == 2);
  const auto summary = nlohmann::json::parse(slurp(s.dir / "out" / "summary.json"));
  CHECK(summary["all_passed"] == false);
}

TEST_CASE("numerical failures exit 3 without output") {
  Scratch s("numerical");
  // a circular orbit never collides, so there is nothing to fit
  const fs::path cfg = s.write("circle.json", R"({
    "version": 1,
    "potential": {"kind": "one_center", "dim": 2, "alpha": 1.0},
    "sundman": {"x0": [1.0, 0.0], "v0": [0.0, 1.0], "t1": 1.0}})");
  CHECK(run(Experiment::Sundman, cfg, s.dir / "out") == 3);
  CHECK_FALSE(fs::exists(s.dir / "out"));
}
