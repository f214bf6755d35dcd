#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cistab/experiment.hpp"

using namespace cistab;
using namespace cistab::experiment;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cistab_unit_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> csv_row(const std::string& text, int row) {
  std::istringstream in(text);
  std::string line;
  for (int i = 0; i <= row; ++i) std::getline(in, line);
  std::vector<std::string> cells;
  std::stringstream ls(line);
  std::string cell;
  while (std::getline(ls, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

TEST_CASE("config parsing is strict and round-trips") {
  const json j = json::parse(R"({
    "model": {"beta": 0.5, "lambda": 1, "alpha_sq": 2, "placement": "interior"},
    "sim": {"n_nodes": 21, "dt": 0.01, "t_final": 5, "scheme": "semi_implicit"},
    "seed": 77, "format": "json", "n_paths": 3
  })");
  const auto c = config_from_json(j);
  CHECK(c.model.alpha == doctest::Approx(std::sqrt(2.0)));
  CHECK(c.model.placement == NoisePlacement::Interior);
  REQUIRE(c.sim);
  CHECK(c.sim->n_nodes == 21);
  CHECK(c.seed == 77);
  CHECK(c.format == OutputFormat::Json);
  const auto again = config_from_json(config_to_json(c));
  CHECK(config_to_json(again) == config_to_json(c));

  CHECK_THROWS_AS(config_from_json(json::parse(R"({"modle": {}})")), Error);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"sim": {"dt": "fast"}})")), Error);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"format": "xml"})")), Error);
}

TEST_CASE("tables render as CSV and JSON") {
  Table t{"x", {"a", "b", "c"}, {{1, 0.25, "s"}, {nullptr, true, -3.5}}};
  std::ostringstream csv, js;
  write_table(csv, t, OutputFormat::Csv);
  CHECK(csv.str() == "a,b,c\n1,0.25,s\n,true,-3.5\n");
  write_table(js, t, OutputFormat::Json);
  const auto parsed = json::parse(js.str());
  CHECK(parsed["columns"][1] == "b");
  CHECK(parsed["rows"][0][1] == 0.25);
}

TEST_CASE("constants command") {
  ExperimentConfig c;
  c.output_dir = scratch("constants");
  c.theta_grid = {0.0, 0.25, 0.5, 1.0};
  c.fd_nodes = 400;
  std::ostringstream log;
  CHECK(run_command("constants", c, log) == 0);
  const auto text = slurp(c.output_dir / "constants.csv");
  CHECK(csv_row(text, 0)[0] == "theta");
  CHECK(csv_row(text, 1) == std::vector<std::string>{"0", "0", "0", "0", "9.869604401089358", "true"});
  CHECK(std::stod(csv_row(text, 2)[1]) == doctest::Approx(0.4375));
  CHECK(std::stod(csv_row(text, 3)[1]) == doctest::Approx(0.75));
  CHECK(std::stod(csv_row(text, 4)[1]) == doctest::Approx(1.0));
  const auto manifest = json::parse(slurp(c.output_dir / "manifest.json"));
  CHECK(manifest["command"] == "constants");
  CHECK(manifest["exit_code"] == 0);
}

TEST_CASE("ranges command: persistence range and hypothesis failure") {
  ExperimentConfig c;
  c.model = {0.5, 1.0, 0.0, NoisePlacement::Boundary};
  c.output_dir = scratch("ranges_ok");
  std::ostringstream log;
  CHECK(run_command("ranges", c, log) == 0);
  const auto text = slurp(c.output_dir / "ranges_summary.csv");
  const auto header = csv_row(text, 0);
  const auto row = csv_row(text, 1);
  const auto col = [&](const std::string& name) {
    return row[static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin())];
  };
  CHECK(std::stod(col("persistence_upper")) == doctest::Approx(2.914213562373095));
  CHECK(col("deterministic_verdict") == "stable");

  ExperimentConfig bad = c;
  bad.model = {0.02, 0.001, 0.0, NoisePlacement::Interior};
  bad.output_dir = scratch("ranges_bad");
  CHECK(run_command("ranges", bad, log) == 2);
  const auto manifest = json::parse(slurp(bad.output_dir / "manifest.json"));
  CHECK(manifest["status"] == "hypothesis_failure");
  CHECK(manifest["summary"]["failed_hypothesis"].get<std::string>().find("beta < lambda") != std::string::npos);
}

TEST_CASE("spectrum command verdicts") {
  ExperimentConfig c;
  c.output_dir = scratch("spectrum_a");
  std::ostringstream log;
  CHECK(run_command("spectrum", c, log) == 0);
  CHECK(json::parse(slurp(c.output_dir / "manifest.json"))["summary"]["verdict"] == "unstable");
  c.model = {0.001, 0.02, 0.0, NoisePlacement::Boundary};
  c.output_dir = scratch("spectrum_b");
  CHECK(run_command("spectrum", c, log) == 0);
  CHECK(json::parse(slurp(c.output_dir / "manifest.json"))["summary"]["verdict"] == "stable_linear");
}

TEST_CASE("simulate and mc commands write the documented files") {
  ExperimentConfig c;
  SimConfig s = default_sim_config();
  s.n_nodes = 21;
  s.t_final = 20.0;
  c.sim = s;
  c.model.alpha = 1.0;
  c.n_paths = 3;
  c.seed = 4;
  c.output_dir = scratch("sim");
  std::ostringstream log;
  CHECK(run_command("simulate", c, log) == 0);
  CHECK(slurp(c.output_dir / "trajectory.csv").rfind("t,log_h_norm_sq\n", 0) == 0);
  CHECK(run_command("mc", c, log) == 0);
  const auto ens = slurp(c.output_dir / "ensemble.csv");
  CHECK(ens.rfind("path_index,seed,lyapunov_estimate\n0,4,", 0) == 0);
  const auto first = slurp(c.output_dir / "ensemble.csv");
  CHECK(run_command("mc", c, log) == 0);
  CHECK(slurp(c.output_dir / "ensemble.csv") == first);
}

TEST_CASE("sweep rejects an empty grid; zero initial state is a hypothesis failure") {
  ExperimentConfig c;
  c.sweep = SweepSpec{100, {}};
  c.output_dir = scratch("sweep_empty");
  std::ostringstream log;
  CHECK(run_command("sweep", c, log) == 1);
  CHECK(run_command("no-such-command", c, log) == 1);

  ExperimentConfig z;
  z.initial.amplitude = 0.0;
  z.output_dir = scratch("zero");
  CHECK(run_command("simulate", z, log) == 2);
}

TEST_CASE("initial conditions") {
  const ModelParams p{0.02, 0.001, 0.0};
  const auto m = initial_state({InitialKind::Mode1, 2.0}, p, 11, 0);
  CHECK(m[0] == doctest::Approx(2.0));
  const auto r1 = initial_state({InitialKind::RandomSmooth, 1.0}, p, 51, 8);
  const auto r2 = initial_state({InitialKind::RandomSmooth, 1.0}, p, 51, 8);
  CHECK(r1 == r2);
  double peak = 0.0;
  for (double v : r1.nodes()) peak = std::max(peak, std::abs(v));
  CHECK(peak == doctest::Approx(1.0));
  CHECK_FALSE(r1 == initial_state({InitialKind::RandomSmooth, 1.0}, p, 51, 9));
}
