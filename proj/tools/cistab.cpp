// Command-line front end: cistab <command> [--config file.json] [overrides].
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "cistab/experiment.hpp"

namespace ex = cistab::experiment;

int main(int argc, char** argv) {
  CLI::App app{"Chafee-Infante stability toolkit: trace constants, noise ranges, spectra, SPDE runs"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, format, placement, scheme;
  std::optional<double> beta, lambda, alpha_sq, t_final, dt;
  std::optional<int> paths, nodes;
  std::optional<unsigned> threads;

  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "RNG seed (u64)");
  app.add_option("--out", out, "output directory");
  app.add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--beta", beta, "model.beta");
  app.add_option("--lambda", lambda, "model.lambda");
  app.add_option("--alpha-sq", alpha_sq, "model.alpha_sq");
  app.add_option("--placement", placement, "model.placement")
      ->check(CLI::IsMember({"boundary", "interior", "none"}));
  app.add_option("--paths", paths, "n_paths");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");
  app.add_option("--nodes", nodes, "sim.n_nodes");
  app.add_option("--dt", dt, "sim.dt");
  app.add_option("--t-final", t_final, "sim.t_final");
  app.add_option("--scheme", scheme, "sim.scheme")
      ->check(CLI::IsMember({"explicit", "semi_implicit"}));

  const auto descriptions = std::map<std::string, std::string>{
      {"constants", "trace constants over a theta grid"},
      {"ranges", "stabilising noise intensity ranges"},
      {"spectrum", "linearised spectrum and instability verdict"},
      {"simulate", "one simulated path"},
      {"mc", "Monte Carlo Lyapunov ensemble"},
      {"sweep", "median Lyapunov estimate over an alpha^2 grid"},
      {"repro-sec5", "canned reproduction for beta=0.02, lambda=0.001"}};
  for (const auto& name : ex::command_names()) app.add_subcommand(name, descriptions.at(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      j = nlohmann::json::parse(in);
    }
    auto& model = j["model"];
    if (beta) model["beta"] = *beta;
    if (lambda) model["lambda"] = *lambda;
    if (alpha_sq) {
      model.erase("alpha");
      model["alpha_sq"] = *alpha_sq;
    }
    if (placement) model["placement"] = *placement;
    if (model.empty()) j.erase("model");
    if (nodes || dt || t_final || scheme) {
      auto& sim = j["sim"];
      if (nodes) sim["n_nodes"] = *nodes;
      if (dt) sim["dt"] = *dt;
      if (t_final) sim["t_final"] = *t_final;
      if (scheme) sim["scheme"] = *scheme;
    }
    if (seed) j["seed"] = *seed;
    if (out) j["output_dir"] = *out;
    if (format) j["format"] = *format;
    if (paths) j["n_paths"] = *paths;
    if (threads) j["threads"] = *threads;

    const auto cfg = ex::config_from_json(j);
    const std::string command = app.get_subcommands().front()->get_name();
    return ex::run_command(command, cfg, std::cerr);
  } catch (const cistab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::exit_code_for(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: bad configuration: " << e.what() << "\n";
    return 1;
  }
}
