#include "cistab/experiment.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <numbers>
#include <set>
#include <sstream>

#include "cistab/rng.hpp"
#include "cistab/spectral.hpp"
#include "cistab/trace_constants.hpp"

#ifndef CISTAB_VERSION
#define CISTAB_VERSION "0.0.0"
#endif

namespace cistab::experiment {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::UsageError, where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw Error(ErrorKind::UsageError, "unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::UsageError, std::string("bad value for '") + key + "': " + e.what());
  }
}

const char* format_name(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

OutputFormat format_from_string(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw Error(ErrorKind::UsageError, "format must be csv or json");
}

const char* initial_name(InitialKind k) {
  switch (k) {
    case InitialKind::Mode1: return "mode1";
    case InitialKind::Constant: return "constant";
    case InitialKind::RandomSmooth: return "random_smooth";
  }
  return "?";
}

InitialKind initial_from_string(const std::string& s) {
  if (s == "mode1") return InitialKind::Mode1;
  if (s == "constant") return InitialKind::Constant;
  if (s == "random_smooth") return InitialKind::RandomSmooth;
  throw Error(ErrorKind::UsageError, "unknown initial condition '" + s + "'");
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  return v;
}

SimConfig sim_from_json(const json& j) {
  check_keys(j,
             {"n_nodes", "dt", "t_final", "t_burn_in", "linearized", "renormalize_every", "scheme",
              "stencil", "stability_fraction", "record_every"},
             "sim");
  SimConfig s = default_sim_config();
  read(j, "n_nodes", s.n_nodes);
  read(j, "dt", s.dt);
  read(j, "t_final", s.t_final);
  if (j.contains("t_burn_in") && !j.at("t_burn_in").is_null()) {
    double tb = 0.0;
    read(j, "t_burn_in", tb);
    s.t_burn_in = tb;
  }
  read(j, "linearized", s.linearized);
  read(j, "renormalize_every", s.renormalize_every);
  read(j, "stability_fraction", s.stability_fraction);
  read(j, "record_every", s.record_every);
  std::string name;
  if (j.contains("scheme")) {
    read(j, "scheme", name);
    s.scheme = scheme_from_string(name);
  }
  if (j.contains("stencil")) {
    read(j, "stencil", name);
    s.stencil = stencil_from_string(name);
  }
  return s;
}

json sim_to_json(const SimConfig& s) {
  json j;
  j["n_nodes"] = s.n_nodes;
  j["dt"] = s.dt;
  j["t_final"] = s.t_final;
  j["t_burn_in"] = s.burn_in();
  j["linearized"] = s.linearized;
  j["renormalize_every"] = s.renormalize_every;
  j["scheme"] = to_string(s.scheme);
  j["stencil"] = to_string(s.stencil);
  j["stability_fraction"] = s.stability_fraction;
  j["record_every"] = s.record_every;
  return j;
}

std::string cell_text(const json& v) {
  switch (v.type()) {
    case json::value_t::null: return "";
    case json::value_t::boolean: return v.get<bool>() ? "true" : "false";
    case json::value_t::number_integer: return std::to_string(v.get<long long>());
    case json::value_t::number_unsigned: return std::to_string(v.get<unsigned long long>());
    case json::value_t::number_float: return format_double(v.get<double>());
    case json::value_t::string: return v.get<std::string>();
    default: return v.dump();
  }
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Everything a command produces, collected before anything is written.
struct Run {
  const ExperimentConfig& cfg;
  std::ostream& log;
  std::vector<Table> tables;
  json summary = json::object();

  Table& add(std::string name, std::vector<std::string> columns) {
    tables.push_back(Table{std::move(name), std::move(columns), {}});
    return tables.back();
  }
};

SimConfig effective_sim(const ExperimentConfig& cfg) {
  SimConfig s = cfg.sim.value_or(default_sim_config());
  s.seed = cfg.seed;
  return s;
}

NoisePlacement range_placement(const ModelParams& p) {
  return p.placement == NoisePlacement::None ? NoisePlacement::Boundary : p.placement;
}

std::optional<ThetaSweepResult> try_sweep(const ModelParams& p, const DomainGeometry& g,
                                          NoisePlacement placement, ConstantSource source,
                                          int n_theta, std::string* why = nullptr) {
  try {
    return optimize_range_over_theta(p, g, placement, source, n_theta);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EmptyFeasibleSet) throw;
    if (why) *why = e.what();
    return std::nullopt;
  }
}

bool predicted_stable(const std::optional<ThetaSweepResult>& sweep, double alpha_sq) {
  if (!sweep) return false;
  for (const auto& piece : sweep->merged) {
    if (piece.contains(0.5 * alpha_sq)) return true;
  }
  return false;
}

int theta_count(const ExperimentConfig& cfg) { return cfg.sweep ? cfg.sweep->theta_count : 2000; }

// ---------------------------------------------------------------- commands

int cmd_constants(Run& run) {
  const auto& cfg = run.cfg;
  const auto& g = cfg.geometry;
  std::vector<double> grid = cfg.theta_grid;
  if (grid.empty()) grid = linspace(0.0, 5.0, 21);
  const bool one_d = g.dimension == 1;

  Table& t = run.add("constants", {"theta", "c_theta", "c_theta_star", "lambda1_fd",
                                   "dirichlet_bound", "sandwich_holds"});
  bool all_ok = true;
  for (double theta : grid) {
    if (theta < 0.0) throw Error(ErrorKind::UsageError, "theta grid must be nonnegative");
    const auto rep = trace_constant_report(
        theta, g, one_d ? TraceMethod::Transcendental : TraceMethod::ExplicitOnly);
    json fd = nullptr;
    if (one_d) {
      fd = theta == 0.0 ? 0.0 : robin_spectrum_fd(theta, g.interval_length(), cfg.fd_nodes)[0];
    }
    const bool ok = rep.sandwich_holds();
    all_ok = all_ok && ok;
    t.rows.push_back({theta, rep.explicit_value, opt(rep.optimal_value), fd,
                      one_d ? json(rep.dirichlet_bound) : json(nullptr), ok});
  }
  run.summary["sandwich_holds"] = all_ok;
  if (!all_ok) {
    run.log << "constants: sandwich inequality violated\n";
    return 3;
  }
  return 0;
}

int cmd_ranges(Run& run) {
  const auto& cfg = run.cfg;
  const ModelParams& p = cfg.model;
  validate_params(p, cfg.geometry);
  const NoisePlacement placement = range_placement(p);

  Table& summary = run.add(
      "ranges_summary",
      {"placement", "constant_source", "status", "failed_hypothesis", "theta_lower", "theta_upper",
       "half_alpha_sq_lower", "half_alpha_sq_upper", "alpha_sq_lower", "alpha_sq_upper",
       "connected", "n_pieces", "persistence_lower", "persistence_upper", "persistence_case",
       "deterministic_verdict"});

  json persistence_lower = nullptr, persistence_upper = nullptr, persistence_case = nullptr;
  const auto pers = placement == NoisePlacement::Boundary
                        ? boundary_persistence_range(p, cfg.geometry, cfg.constant_source)
                        : interior_persistence_range(p, cfg.geometry);
  if (pers.value) {
    persistence_lower = pers.value->lower;
    persistence_upper = pers.value->upper;
    persistence_case = to_string(pers.value->theorem_case);
  }
  const auto verdict = deterministic_verdict(p, cfg.geometry, cfg.constant_source);

  if (placement == NoisePlacement::Interior) {
    // Closed-form feasible set of the d > R regime. The opposite reading
    // R > d makes both theta bounds negative, so d > R is what is applied.
    const auto fi = theta_feasible_interval_interior(p, cfg.geometry);
    run.summary["interior_explicit_theta_set"] =
        fi ? json{fi.value->lower, fi.value->upper} : json(nullptr);
    run.summary["interior_explicit_theta_set_note"] =
        fi ? "assumes d > R" : "assumes d > R; " + fi.failed_hypothesis;
  }

  std::string why;
  const auto sweep =
      try_sweep(p, cfg.geometry, placement, cfg.constant_source, theta_count(cfg), &why);
  if (!sweep) {
    summary.rows.push_back({to_string(placement), to_string(cfg.constant_source),
                            "hypotheses_failed", why, nullptr, nullptr, nullptr, nullptr, nullptr,
                            nullptr, nullptr, 0, persistence_lower, persistence_upper,
                            persistence_case, to_string(verdict.verdict)});
    run.summary["failed_hypothesis"] = why;
    run.log << "ranges: " << why << "\n";
    return 2;
  }

  summary.rows.push_back(
      {to_string(placement), to_string(cfg.constant_source), "ok", "", sweep->feasible.lower,
       sweep->feasible.upper, sweep->envelope_lower, sweep->envelope_upper,
       2.0 * sweep->envelope_lower, 2.0 * sweep->envelope_upper, sweep->connected,
       sweep->merged.size(), persistence_lower, persistence_upper, persistence_case,
       to_string(verdict.verdict)});

  Table& per = run.add("ranges_per_theta", {"theta", "half_alpha_sq_lower", "half_alpha_sq_upper",
                                            "lower_closed", "case"});
  for (const auto& iv : sweep->per_theta) {
    per.rows.push_back(
        {iv.theta_used, iv.lower, iv.upper, iv.lower_closed, to_string(iv.theorem_case)});
  }
  run.summary["alpha_sq_envelope"] = {2.0 * sweep->envelope_lower, 2.0 * sweep->envelope_upper};
  run.summary["connected"] = sweep->connected;
  return 0;
}

int cmd_spectrum(Run& run) {
  const auto& cfg = run.cfg;
  const ModelParams& p = cfg.model;
  validate_params(p, cfg.geometry);
  const double b = p.beta + p.lambda;
  const auto modes = spectral_modes(p, std::max(1, cfg.n_modes));

  Table& t = run.add("spectrum_modes", {"index", "mu", "mu_sq", "growth_rate", "branch"});
  for (const auto& m : modes) {
    t.rows.push_back({m.index, m.mu, m.mu * m.mu, m.growth_rate,
                      m.branch == ModeBranch::TanBranch ? "tan" : "cos_zero"});
  }

  const auto ip = instability_predicate(p);
  const double asym = mu1_squared_asymptotic(b);
  Table& s = run.add("spectrum_summary",
                     {"beta", "lambda", "b", "mu1", "mu1_squared", "asymptotic_mu1_squared",
                      "asymptotic_abs_error", "margin", "verdict"});
  s.rows.push_back({p.beta, p.lambda, b, modes.front().mu, ip.mu1_squared, asym,
                    std::abs(ip.mu1_squared - asym), ip.margin,
                    ip.unstable ? "unstable" : "stable_linear"});

  std::vector<double> bs = cfg.b_grid;
  if (bs.empty()) bs = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
  Table& a = run.add("spectrum_asymptotics",
                     {"b", "mu1_squared", "asymptotic_mu1_squared", "asymptotic_abs_error"});
  for (double bb : bs) {
    if (!(bb > 0.0)) throw Error(ErrorKind::UsageError, "b grid must be positive");
    const double mu1 = mu_roots(bb, 1).front().mu;
    const double asy = mu1_squared_asymptotic(bb);
    a.rows.push_back({bb, mu1 * mu1, asy, std::abs(mu1 * mu1 - asy)});
  }
  run.summary["verdict"] = ip.unstable ? "unstable" : "stable_linear";
  return 0;
}

Table trajectory_table(const std::string& name, const PathRecord& rec) {
  Table t{name, {"t", "log_h_norm_sq"}, {}};
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    t.rows.push_back({rec.times[i], rec.log_h_norm_sq[i]});
  }
  return t;
}

Table ensemble_table(const std::string& name, const EnsembleSummary& s) {
  Table t{name, {"path_index", "seed", "lyapunov_estimate"}, {}};
  for (const auto& r : s.paths) t.rows.push_back({r.path_index, r.seed, r.lyapunov_estimate});
  return t;
}

int cmd_simulate(Run& run) {
  const auto& cfg = run.cfg;
  const ModelParams& p = cfg.model;
  validate_params(p, cfg.geometry);
  const SimConfig sim = effective_sim(cfg);
  sim.validate();
  const HState u0 = initial_state(cfg.initial, p, sim.n_nodes, cfg.seed);
  const PathRecord rec = run_path(u0, p, sim, 0);
  run.tables.push_back(trajectory_table("trajectory", rec));

  json decay_bound = nullptr;
  if (p.effective_alpha() == 0.0) {
    const auto v = deterministic_verdict(p, DomainGeometry::interval(1.0), cfg.constant_source);
    if (v.decay_rate) decay_bound = -*v.decay_rate;
  }
  Table& s = run.add("simulate_summary", {"seed", "path_index", "lyapunov_estimate", "t_burn_in",
                                          "t_final", "decay_rate_bound"});
  s.rows.push_back({rec.seed, rec.path_index, rec.lyapunov_estimate, sim.burn_in(), sim.t_final,
                    decay_bound});
  run.summary["lyapunov_estimate"] = rec.lyapunov_estimate;
  return 0;
}

int cmd_mc(Run& run) {
  const auto& cfg = run.cfg;
  const ModelParams& p = cfg.model;
  validate_params(p, cfg.geometry);
  const SimConfig sim = effective_sim(cfg);
  sim.validate();
  const HState u0 = initial_state(cfg.initial, p, sim.n_nodes, cfg.seed);
  const auto ens = monte_carlo_lyapunov(u0, p, sim, cfg.n_paths, cfg.threads);
  run.tables.push_back(ensemble_table("ensemble", ens));

  const double alpha = p.effective_alpha();
  const auto sweep = try_sweep(p, cfg.geometry, range_placement(p), cfg.constant_source,
                               theta_count(cfg));
  Table& s = run.add("mc_summary", {"n_paths", "alpha_sq", "mean", "median", "standard_error",
                                    "fraction_negative", "predicted_stable"});
  s.rows.push_back({cfg.n_paths, alpha * alpha, ens.mean, ens.median, opt(ens.standard_error),
                    ens.fraction_negative, predicted_stable(sweep, alpha * alpha)});
  run.summary["median"] = ens.median;
  run.summary["fraction_negative"] = ens.fraction_negative;
  return 0;
}

int cmd_sweep(Run& run) {
  const auto& cfg = run.cfg;
  validate_params(cfg.model, cfg.geometry);
  const std::vector<double> grid = cfg.sweep ? cfg.sweep->alpha_sq_grid : linspace(0.0, 10.0, 16);
  if (grid.empty()) throw Error(ErrorKind::UsageError, "alpha_sq grid is empty");
  for (double a2 : grid) {
    if (!(a2 >= 0.0)) throw Error(ErrorKind::UsageError, "alpha_sq grid must be nonnegative");
  }
  const SimConfig sim = effective_sim(cfg);
  sim.validate();

  const NoisePlacement placements[] = {NoisePlacement::Boundary, NoisePlacement::Interior};
  std::optional<ThetaSweepResult> theory[2];
  for (int k = 0; k < 2; ++k) {
    theory[k] = try_sweep(cfg.model, cfg.geometry, placements[k], cfg.constant_source,
                          theta_count(cfg));
  }

  Table& t = run.add("sweep", {"alpha_sq", "boundary_median", "boundary_fraction_negative",
                               "boundary_predicted_stable", "interior_median",
                               "interior_fraction_negative", "interior_predicted_stable"});
  for (double a2 : grid) {
    std::vector<json> row{a2};
    for (int k = 0; k < 2; ++k) {
      ModelParams p = cfg.model;
      p.alpha = std::sqrt(a2);
      p.placement = placements[k];
      const HState u0 = initial_state(cfg.initial, p, sim.n_nodes, cfg.seed);
      const auto ens = monte_carlo_lyapunov(u0, p, sim, cfg.n_paths, cfg.threads);
      row.insert(row.end(), {ens.median, ens.fraction_negative, predicted_stable(theory[k], a2)});
    }
    t.rows.push_back(std::move(row));
    run.log << "sweep: alpha_sq=" << format_double(a2) << " done\n";
  }
  return 0;
}

int cmd_repro_sec5(Run& run) {
  ExperimentConfig cfg = run.cfg;
  cfg.model.beta = 0.02;
  cfg.model.lambda = 0.001;
  cfg.model.placement = NoisePlacement::Boundary;
  cfg.geometry = DomainGeometry{1, 0.5};
  if (!cfg.sim) {
    SimConfig s = default_sim_config();
    s.t_final = 1000.0;
    cfg.sim = s;
  }
  const SimConfig sim = effective_sim(cfg);
  sim.validate();

  const auto sweep = optimize_range_over_theta(cfg.model, cfg.geometry, NoisePlacement::Boundary,
                                               ConstantSource::ExplicitC, theta_count(cfg));
  Table& r = run.add("sec5_ranges", {"theta_lower", "theta_upper", "min_z1", "max_z2",
                                     "alpha_sq_lower", "alpha_sq_upper", "connected",
                                     "reference_alpha_sq_lower", "reference_alpha_sq_upper"});
  r.rows.push_back({sweep.feasible.lower, sweep.feasible.upper, sweep.envelope_lower,
                    sweep.envelope_upper, 2.0 * sweep.envelope_lower, 2.0 * sweep.envelope_upper,
                    sweep.connected, 0.0556, 6.274});

  const auto ip = instability_predicate(cfg.model);
  Table& sp = run.add("sec5_spectrum", {"mu1", "mu1_squared", "margin", "linear_growth_rate",
                                        "asymptotic_mu1_squared", "verdict"});
  sp.rows.push_back({std::sqrt(ip.mu1_squared), ip.mu1_squared, ip.margin, 2.0 * ip.margin,
                     mu1_squared_asymptotic(cfg.model.beta + cfg.model.lambda),
                     ip.unstable ? "unstable" : "stable_linear"});

  Table mc{"sec5_mc",
           {"alpha_sq", "in_predicted_range", "theory_sign", "median", "mean",
            "fraction_negative", "observed_sign"},
           {}};
  const double grid[] = {0.0, 0.02, 2.0, 8.0};
  for (std::size_t i = 0; i < std::size(grid); ++i) {
    const double a2 = grid[i];
    ModelParams p = cfg.model;
    p.alpha = std::sqrt(a2);
    const HState u0 = initial_state(cfg.initial, p, sim.n_nodes, cfg.seed);
    const auto ens = monte_carlo_lyapunov(u0, p, sim, cfg.n_paths, cfg.threads);
    const bool inside = predicted_stable(sweep, a2);
    const char* theory = a2 == 0.0 ? "+" : inside ? "-" : "none";
    mc.rows.push_back({a2, inside, theory, ens.median, ens.mean, ens.fraction_negative,
                       ens.median < 0.0 ? "-" : "+"});
    run.tables.push_back(ensemble_table("sec5_ensemble_" + std::to_string(i), ens));
    run.log << "repro-sec5: alpha_sq=" << format_double(a2)
            << " median=" << format_double(ens.median) << "\n";
  }
  run.tables.push_back(std::move(mc));
  return 0;
}

using Handler = std::function<int(Run&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h{
      {"constants", cmd_constants}, {"ranges", cmd_ranges}, {"spectrum", cmd_spectrum},
      {"simulate", cmd_simulate},   {"mc", cmd_mc},         {"sweep", cmd_sweep},
      {"repro-sec5", cmd_repro_sec5}};
  return h;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::UsageError, "cannot write " + path.string());
  out << text;
}

}  // namespace

SimConfig default_sim_config() {
  SimConfig s;
  s.n_nodes = 51;
  s.dt = 1e-2;
  s.t_final = 200.0;
  s.scheme = TimeScheme::SemiImplicit;
  return s;
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j,
             {"model", "geometry", "constant_source", "theta_grid", "fd_nodes", "n_modes", "b_grid",
              "sim", "initial", "n_paths", "threads", "sweep", "seed", "output_dir", "format"},
             "config");
  ExperimentConfig c;
  if (j.contains("model")) {
    const json& m = j.at("model");
    check_keys(m, {"beta", "lambda", "alpha", "alpha_sq", "placement"}, "model");
    read(m, "beta", c.model.beta);
    read(m, "lambda", c.model.lambda);
    read(m, "alpha", c.model.alpha);
    if (m.contains("alpha_sq")) {
      if (m.contains("alpha")) throw Error(ErrorKind::UsageError, "give alpha or alpha_sq, not both");
      double a2 = 0.0;
      read(m, "alpha_sq", a2);
      if (a2 < 0.0) throw Error(ErrorKind::UsageError, "alpha_sq must be nonnegative");
      c.model.alpha = std::sqrt(a2);
    }
    if (m.contains("placement")) {
      std::string s;
      read(m, "placement", s);
      c.model.placement = placement_from_string(s);
    }
  }
  if (j.contains("geometry")) {
    const json& g = j.at("geometry");
    check_keys(g, {"dimension", "half_diameter"}, "geometry");
    read(g, "dimension", c.geometry.dimension);
    read(g, "half_diameter", c.geometry.half_diameter);
  }
  if (j.contains("constant_source")) {
    std::string s;
    read(j, "constant_source", s);
    c.constant_source = constant_source_from_string(s);
  }
  read(j, "theta_grid", c.theta_grid);
  read(j, "fd_nodes", c.fd_nodes);
  read(j, "n_modes", c.n_modes);
  read(j, "b_grid", c.b_grid);
  if (j.contains("sim")) c.sim = sim_from_json(j.at("sim"));
  if (j.contains("initial")) {
    const json& ic = j.at("initial");
    check_keys(ic, {"kind", "amplitude"}, "initial");
    std::string s = initial_name(c.initial.kind);
    read(ic, "kind", s);
    c.initial.kind = initial_from_string(s);
    read(ic, "amplitude", c.initial.amplitude);
  }
  read(j, "n_paths", c.n_paths);
  read(j, "threads", c.threads);
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    check_keys(s, {"theta_count", "alpha_sq_grid"}, "sweep");
    SweepSpec sw;
    sw.alpha_sq_grid = linspace(0.0, 10.0, 16);
    read(s, "theta_count", sw.theta_count);
    read(s, "alpha_sq_grid", sw.alpha_sq_grid);
    c.sweep = sw;
  }
  read(j, "seed", c.seed);
  if (j.contains("output_dir")) {
    std::string s;
    read(j, "output_dir", s);
    c.output_dir = s;
  }
  if (j.contains("format")) {
    std::string s;
    read(j, "format", s);
    c.format = format_from_string(s);
  }
  if (c.n_paths < 1) throw Error(ErrorKind::UsageError, "n_paths must be at least 1");
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["model"] = {{"beta", c.model.beta},
                {"lambda", c.model.lambda},
                {"alpha", c.model.alpha},
                {"placement", to_string(c.model.placement)}};
  j["geometry"] = {{"dimension", c.geometry.dimension},
                   {"half_diameter", c.geometry.half_diameter}};
  j["constant_source"] = to_string(c.constant_source);
  j["theta_grid"] = c.theta_grid;
  j["fd_nodes"] = c.fd_nodes;
  j["n_modes"] = c.n_modes;
  j["b_grid"] = c.b_grid;
  if (c.sim) j["sim"] = sim_to_json(*c.sim);
  j["initial"] = {{"kind", initial_name(c.initial.kind)}, {"amplitude", c.initial.amplitude}};
  j["n_paths"] = c.n_paths;
  j["threads"] = c.threads;
  if (c.sweep) {
    j["sweep"] = {{"theta_count", c.sweep->theta_count},
                  {"alpha_sq_grid", c.sweep->alpha_sq_grid}};
  }
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.string();
  j["format"] = format_name(c.format);
  return j;
}

HState initial_state(const InitialCondition& ic, const ModelParams& p, int n_nodes,
                     std::uint64_t seed) {
  if (n_nodes < 3) throw Error(ErrorKind::UsageError, "n_nodes must be at least 3");
  switch (ic.kind) {
    case InitialKind::Mode1:
      return sample_mode(spectral_modes(p, 1).front(), n_nodes).scaled(ic.amplitude);
    case InitialKind::Constant:
      return HState(std::vector<double>(static_cast<std::size_t>(n_nodes), ic.amplitude));
    case InitialKind::RandomSmooth: {
      // A few cosine modes with decaying random weights, scaled to unit max.
      constexpr int kModes = 6;
      const NormalStream normals(seed, 0xFFFF'FFFF'FFFF'FFFFULL);
      std::vector<double> u(static_cast<std::size_t>(n_nodes), 0.0);
      for (int k = 0; k < kModes; ++k) {
        const double c = normals(static_cast<std::uint64_t>(k)) / ((k + 1.0) * (k + 1.0));
        for (int i = 0; i < n_nodes; ++i) {
          const double x = static_cast<double>(i) / (n_nodes - 1);
          u[static_cast<std::size_t>(i)] += c * std::cos(k * std::numbers::pi * x);
        }
      }
      double peak = 0.0;
      for (double v : u) peak = std::max(peak, std::abs(v));
      for (double& v : u) v *= ic.amplitude / peak;
      return HState(std::move(u));
    }
  }
  throw Error(ErrorKind::UsageError, "bad initial condition");
}

void write_table(std::ostream& os, const Table& t, OutputFormat fmt) {
  if (fmt == OutputFormat::Json) {
    json rows = json::array();
    for (const auto& r : t.rows) rows.push_back(r);
    os << json{{"columns", t.columns}, {"rows", rows}}.dump(1) << '\n';
    return;
  }
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << cell_text(r[i]);
    os << '\n';
  }
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, h] : handlers()) v.push_back(name);
    return v;
  }();
  return names;
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::UsageError:
      return 1;
    case ErrorKind::NonPositiveBeta:
    case ErrorKind::NonPositiveLambda:
    case ErrorKind::BadGeometry:
    case ErrorKind::NegativeDiscriminant:
    case ErrorKind::HypothesisFailed:
    case ErrorKind::EmptyFeasibleSet:
    case ErrorKind::ZeroInitialState:
      return 2;
    case ErrorKind::NoRootInBracket:
    case ErrorKind::ConvergenceFailure:
    case ErrorKind::RootCountShortfall:
    case ErrorKind::NonFiniteState:
      return 3;
  }
  return 3;
}

int run_command(const std::string& command, const ExperimentConfig& cfg, std::ostream& log) {
  const auto it = handlers().find(command);
  if (it == handlers().end()) {
    log << "unknown command '" << command << "'\n";
    return 1;
  }

  Run run{cfg, log, {}, json::object()};
  int code = 0;
  json error = nullptr;
  try {
    code = it->second(run);
  } catch (const Error& e) {
    code = exit_code_for(e.kind());
    error = {{"kind", to_string(e.kind())}, {"message", e.what()}};
    log << command << ": " << to_string(e.kind()) << ": " << e.what() << "\n";
  }
  if (code == 1) return code;

  std::filesystem::create_directories(cfg.output_dir);
  const char* ext = cfg.format == OutputFormat::Csv ? ".csv" : ".json";
  json files = json::array();
  for (const auto& t : run.tables) {
    std::ostringstream os;
    write_table(os, t, cfg.format);
    const std::string name = t.name + ext;
    write_file(cfg.output_dir / name, os.str());
    files.push_back(name);
  }

  json manifest;
  manifest["artifact"] = "cistab";
  manifest["version"] = CISTAB_VERSION;
  manifest["command"] = command;
  manifest["seed"] = cfg.seed;
  manifest["config"] = config_to_json(cfg);
  // Where the files went does not influence what they contain.
  manifest["config"].erase("output_dir");
  manifest["files"] = files;
  manifest["exit_code"] = code;
  manifest["status"] = code == 0 ? "ok" : code == 2 ? "hypothesis_failure" : "numerical_failure";
  manifest["summary"] = run.summary;
  manifest["error"] = error;
  write_file(cfg.output_dir / "manifest.json", manifest.dump(2) + "\n");
  return code;
}

}  // namespace cistab::experiment
