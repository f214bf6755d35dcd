#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cistab/model.hpp"
#include "cistab/simulator.hpp"
#include "cistab/stability_ranges.hpp"

namespace cistab::experiment {

enum class OutputFormat { Csv, Json };

enum class InitialKind { Mode1, Constant, RandomSmooth };

struct InitialCondition {
  InitialKind kind = InitialKind::Mode1;
  double amplitude = 1e-3;
};

struct SweepSpec {
  int theta_count = 2000;
  std::vector<double> alpha_sq_grid;
};

struct ExperimentConfig {
  ModelParams model{0.02, 0.001, 0.0, NoisePlacement::Boundary};
  DomainGeometry geometry{};
  ConstantSource constant_source = ConstantSource::ExplicitC;
  std::vector<double> theta_grid;
  int fd_nodes = 2000;
  int n_modes = 8;
  std::vector<double> b_grid;
  std::optional<SimConfig> sim;
  InitialCondition initial{};
  int n_paths = 16;
  unsigned threads = 0;
  std::optional<SweepSpec> sweep;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  OutputFormat format = OutputFormat::Csv;
};

/// Strict parse: unknown keys raise Error(UsageError).
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

/// Simulation settings used when the config has no "sim" block.
SimConfig default_sim_config();

/// Grid of n_nodes samples of the configured initial condition.
HState initial_state(const InitialCondition& ic, const ModelParams& p, int n_nodes,
                     std::uint64_t seed);

/// A table written either as CSV (header row + rows) or as JSON
/// {"columns": [...], "rows": [[...], ...]}.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
};

void write_table(std::ostream& os, const Table& t, OutputFormat fmt);

/// Names accepted by run_command.
const std::vector<std::string>& command_names();

/// Runs one subcommand: writes its tables and manifest.json into
/// cfg.output_dir and returns the process exit code
/// (0 ok, 1 usage, 2 hypothesis failure, 3 numerical failure).
int run_command(const std::string& command, const ExperimentConfig& cfg, std::ostream& log);

int exit_code_for(ErrorKind kind) noexcept;

}  // namespace cistab::experiment
