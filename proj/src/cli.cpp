#include "belljump/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "belljump/checks.hpp"
#include "belljump/ensemble.hpp"
#include "belljump/io.hpp"
#include "belljump/oracle.hpp"

namespace belljump {

namespace fs = std::filesystem;

void RunConfig::validate() const {
  if (!(std::isfinite(t0) && std::isfinite(t_end))) throw ValidationError("--t0", "times must be finite");
  if (!(t_end > t0)) throw ValidationError("--t-end", "must exceed --t0");
  if (n == 0) throw ValidationError("--n", "trajectory count must be positive");
  if (threads < 0) throw ValidationError("--threads", "must be nonnegative");
  if (max_jumps == 0) throw ValidationError("--max-jumps", "must be positive");
  if (!(node_epsilon >= 0.0 && node_epsilon <= 1e-6)) throw ValidationError("--node-epsilon", "must lie in [0, 1e-6]");
  if (!(grid_step > 0.0)) throw ValidationError("--grid-step", "must be positive");
  if (!(ode_rel_tol > 0.0)) throw ValidationError("--ode-rel-tol", "must be positive");
  if (picard_terms < 0) throw ValidationError("--picard-terms", "must be nonnegative");
  parse_checkpoints(checkpoints, t0, t_end);
}

std::vector<double> parse_checkpoints(const std::string& spec, double t0, double t_end) {
  std::vector<double> out;
  if (spec.find(',') == std::string::npos && spec.find('.') == std::string::npos) {
    std::size_t used = 0;
    long k = 0;
    try {
      k = std::stol(spec, &used);
    } catch (const std::exception&) {
      throw ValidationError("--checkpoints", "expected a count or a comma-separated list of times");
    }
    if (used != spec.size() || k < 1) throw ValidationError("--checkpoints", "count must be a positive integer");
    for (long i = 1; i <= k; ++i) out.push_back(t0 + (t_end - t0) * static_cast<double>(i) / static_cast<double>(k));
    return out;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ValidationError("--checkpoints", "cannot parse '" + item + "' as a time");
    }
    if (used != item.size()) throw ValidationError("--checkpoints", "cannot parse '" + item + "' as a time");
    if (!(v >= t0 && v <= t_end)) throw ValidationError("--checkpoints", "time " + item + " lies outside [t0, t_end]");
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError("--checkpoints", "no times given");
  return out;
}

namespace {

SimulationParams simulation_params(const RunConfig& c) {
  SimulationParams p;
  p.t0 = c.t0;
  p.t_end = c.t_end;
  p.max_jumps = c.max_jumps;
  p.quad_rel_tol = c.quad_rel_tol;
  p.quad_abs_tol = c.quad_abs_tol;
  p.root_tol = c.root_tol;
  p.seed = c.seed;
  p.validate();
  return p;
}

Json config_json(const RunConfig& c, const ModelSpec& m) {
  return Json{{"model", m.name},        {"t0", c.t0},
              {"t_end", c.t_end},       {"n", c.n},
              {"seed", c.seed},         {"max_jumps", c.max_jumps},
              {"node_epsilon", c.node_epsilon}};
}

fs::path output_dir(const RunConfig& c, const char* fallback) {
  fs::path dir = c.output.empty() ? fs::path(fallback) : fs::path(c.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("--output", "cannot create directory '" + dir.string() + "': " + ec.message());
  return dir;
}

std::ofstream open_file(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ValidationError("--output", "cannot write '" + p.string() + "'");
  return f;
}

void write_json_file(const fs::path& p, const Json& doc) {
  std::ofstream f = open_file(p);
  f << doc.dump(2) << '\n';
}

EnsembleReport run_and_stream(const ModelSpec& model, const RateContext& ctx, const RunConfig& c,
                              std::ostream* trajectories) {
  EnsembleOptions opt;
  opt.checkpoints = parse_checkpoints(c.checkpoints, c.t0, c.t_end);
  opt.threads = c.threads;
  opt.oracle_grid_step = c.grid_step;
  TrajectorySink sink;
  if (trajectories != nullptr) {
    sink = [&](std::uint64_t index, const Trajectory& traj) {
      *trajectories << trajectory_to_jsonl(index, traj, model.pov) << '\n';
    };
  }
  return run_ensemble(ctx, simulation_params(c), c.n, opt, sink);
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  c.validate();
  const ModelSpec model = load_model(c.model);
  const RateContext ctx = model.context(c.node_epsilon);
  const fs::path dir = output_dir(c, "belljump_out");

  std::ofstream traj_file = open_file(dir / "trajectories.jsonl");
  const EnsembleReport report = run_and_stream(model, ctx, c, &traj_file);
  traj_file.close();

  Json doc = report_to_json(report);
  doc["config"] = config_json(c, model);
  write_json_file(dir / "report.json", doc);
  std::ofstream csv = open_file(dir / "checkpoints.csv");
  write_checkpoint_csv(csv, report);

  out << "model " << model.name << ", " << report.n_trajectories << " trajectories on [" << format_real(c.t0) << ", "
      << format_real(c.t_end) << "]\n";
  out << "mean jumps " << format_real(report.mean_jumps) << " +- " << format_real(report.jumps_standard_error);
  if (report.expected_jumps) out << " (oracle " << format_real(*report.expected_jumps) << ")";
  out << "\nexplosions " << report.explosion_count << ", cemetery " << report.cemetery_count << '\n';
  out << "wrote " << (dir / "trajectories.jsonl").string() << ", " << (dir / "report.json").string() << ", "
      << (dir / "checkpoints.csv").string() << '\n';
  return report.explosion_count == 0 && report.cemetery_count == 0 ? kExitPass : kExitFail;
}

struct CheckLine {
  std::string name;
  double value;
  double threshold;
  std::string relation;  // how value compares to threshold when passing
  bool pass;
};

void add_check(std::vector<CheckLine>& v, std::string name, double value, const std::string& rel, double thr) {
  bool pass = false;
  if (rel == "<") pass = value < thr;
  else if (rel == "<=") pass = value <= thr;
  else if (rel == ">") pass = value > thr;
  else if (rel == "==") pass = value == thr;
  v.push_back({std::move(name), value, thr, rel, pass});
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
  c.validate();
  const ModelSpec model = load_model(c.model);
  const RateContext ctx = model.context(c.node_epsilon);
  const std::size_t L = ctx.label_count();

  std::optional<std::ofstream> traj_file;
  fs::path dir;
  if (!c.output.empty() || c.keep_paths) {
    dir = output_dir(c, "belljump_out");
    if (c.keep_paths) traj_file = open_file(dir / "trajectories.jsonl");
  }
  const EnsembleReport report = run_and_stream(model, ctx, c, traj_file ? &*traj_file : nullptr);
  if (traj_file) traj_file->close();

  std::vector<CheckLine> checks;
  const double tv_limit = std::max(0.02, 4.0 / std::sqrt(static_cast<double>(c.n)));
  for (std::size_t k = 0; k < report.checkpoints.size(); ++k) {
    add_check(checks, "tv_distance(t=" + format_real(report.checkpoints[k]) + ")", report.tv_distance[k], "<", tv_limit);
  }
  std::uint64_t violations = 0;
  for (std::uint64_t v : report.envelope_violations) violations += v;
  add_check(checks, "envelope_violations", static_cast<double>(violations), "==", 0.0);
  add_check(checks, "explosion_count", static_cast<double>(report.explosion_count), "==", 0.0);
  add_check(checks, "cemetery_count", static_cast<double>(report.cemetery_count), "==", 0.0);
  add_check(checks, "min_weight_visited", report.min_weight_visited, ">", ctx.node_threshold());
  if (report.expected_jumps) {
    add_check(checks, "mean_jumps_deviation", std::abs(report.mean_jumps - *report.expected_jumps), "<=",
              3.0 * report.jumps_standard_error + 1e-6);
  }

  const OracleSolution master = solve_master_equation(ctx, c.t0, c.t_end, c.grid_step, c.ode_rel_tol);
  double ode_err = 0.0;
  for (std::size_t k = 0; k < master.times.size(); ++k) {
    const DistributionSnapshot mu = distribution(ctx, master.times[k]);
    for (std::size_t x = 0; x < L; ++x) ode_err = std::max(ode_err, std::abs(mu.weights[x] - master.distributions[k].weights[x]));
  }
  add_check(checks, "master_ode_vs_mu", ode_err, "<=", 1e-6);

  SimulationParams hp = simulation_params(c);
  const PicardIterate picard = solve_integral_equation_picard(ctx, c.t0, c.t_end, c.grid_step, c.picard_terms, hp);
  double monotone_defect = 0.0;
  double domination_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t N = 0; N < picard.partial_sums.size(); ++N) {
    for (std::size_t k = 0; k < picard.times.size(); ++k) {
      const DistributionSnapshot mu = distribution(ctx, picard.times[k]);
      for (std::size_t x = 0; x < L; ++x) {
        const double v = picard.partial_sums[N][k].weights[x];
        if (N > 0) monotone_defect = std::max(monotone_defect, picard.partial_sums[N - 1][k].weights[x] - v);
        domination_excess = std::max(domination_excess, v - mu.weights[x]);
      }
    }
  }
  double picard_err = 0.0;
  for (std::size_t k = 0; k < picard.times.size(); ++k) {
    for (std::size_t x = 0; x < L; ++x) {
      picard_err = std::max(picard_err, std::abs(picard.final_sums()[k].weights[x] - master.distributions[k].weights[x]));
    }
  }
  add_check(checks, "picard_monotone_defect", monotone_defect, "<=", 0.0);
  add_check(checks, "picard_domination_excess", domination_excess, "<=", 1e-6);
  add_check(checks, "picard_vs_master", picard_err, "<=", 2e-5);

  bool all = true;
  Json jchecks = Json::array();
  for (const CheckLine& ch : checks) {
    all = all && ch.pass;
    out << (ch.pass ? "PASS " : "FAIL ") << ch.name << " = " << format_real(ch.value) << " (" << ch.relation << ' '
        << format_real(ch.threshold) << ")\n";
    jchecks.push_back(Json{{"name", ch.name}, {"value", ch.value}, {"relation", ch.relation},
                           {"threshold", ch.threshold}, {"pass", ch.pass}});
  }
  out << (all ? "verify: PASS" : "verify: FAIL") << '\n';

  if (!dir.empty()) {
    Json doc;
    doc["config"] = config_json(c, model);
    doc["pass"] = all;
    doc["checks"] = std::move(jchecks);
    doc["picard_terms_used"] = picard.n;
    doc["picard_converged"] = picard.converged;
    doc["report"] = report_to_json(report);
    write_json_file(dir / "verify.json", doc);
  }
  return all ? kExitPass : kExitFail;
}

int cmd_oracle(const RunConfig& c, const std::string& method, std::ostream& out) {
  if (!(c.t_end > c.t0)) throw ValidationError("--t-end", "must exceed --t0");
  if (method != "master" && method != "picard") throw ValidationError("--method", "expected master or picard");
  const ModelSpec model = load_model(c.model);
  const RateContext ctx = model.context(c.node_epsilon);
  const OracleSolution sol = method == "master"
                                 ? solve_master_equation(ctx, c.t0, c.t_end, c.grid_step, c.ode_rel_tol)
                                 : solve_integral_equation_picard(ctx, c.t0, c.t_end, c.grid_step, c.picard_terms,
                                                                  simulation_params(c))
                                       .as_solution();
  if (c.output.empty()) {
    write_oracle_csv(out, sol, model.pov);
  } else {
    const fs::path dir = output_dir(c, "belljump_out");
    std::ofstream f = open_file(dir / "oracle.csv");
    write_oracle_csv(f, sol, model.pov);
  }
  return kExitPass;
}

int cmd_check(const RunConfig& c, std::ostream& out) {
  if (!(c.t_end > c.t0)) throw ValidationError("--t-end", "must exceed --t0");
  const ModelSpec model = load_model(c.model);
  const RateContext ctx = model.context(c.node_epsilon);
  AssumptionReport rep = check_a2(ctx, c.t0, c.t_end, c.grid_step);
  RandomStream rng(c.seed, 0);
  const HsResult hs = check_hs_inequality(model.H, model.pov, c.hs_trials, rng);
  rep.hs_bound_ok = hs.holds;
  rep.worst_ratio = hs.worst_ratio;
  rep.hs_trials = c.hs_trials;
  rep.povm_valid = true;  // construction of the model validated it
  Json doc = assumption_report_to_json(rep);
  doc["model"] = model.name;
  if (c.output.empty()) {
    out << doc.dump(2) << '\n';
  } else {
    write_json_file(output_dir(c, "belljump_out") / "check.json", doc);
  }
  return rep.hs_bound_ok && rep.povm_valid ? kExitPass : kExitFail;
}

int cmd_rates_dump(const RunConfig& c, std::ostream& out) {
  const ModelSpec model = load_model(c.model);
  const RateContext ctx = model.context(c.node_epsilon);
  RateEvaluator ev(ctx);
  ev.at(c.rates_time);
  std::ostringstream csv;
  csv << "from,to,rate\n";
  for (LabelId x = 0; x < ctx.label_count(); ++x) {
    for (LabelId y = 0; y < ctx.label_count(); ++y) {
      const Extended r = ev.jump_rate(x, y);
      csv << model.pov.label(x) << ',' << model.pov.label(y) << ','
          << (r.is_infinite() ? std::string("inf") : format_real(r.value())) << '\n';
    }
  }
  if (c.output.empty()) {
    out << csv.str();
  } else {
    std::ofstream f = open_file(output_dir(c, "belljump_out") / "rates.csv");
    f << csv.str();
  }
  return kExitPass;
}

int default_threads() {
  const char* env = std::getenv("BELLJUMP_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 0) throw ValidationError("BELLJUMP_THREADS", "must be a nonnegative integer");
  return static_cast<int>(v);
}

void add_run_options(CLI::App* app, RunConfig& c, bool ensemble) {
  app->add_option("--model", c.model, "bundled model name or path to a model JSON file")->capture_default_str();
  app->add_option("--t0", c.t0, "start time")->capture_default_str();
  app->add_option("--t-end", c.t_end, "horizon")->capture_default_str();
  app->add_option("--seed", c.seed, "random seed")->capture_default_str();
  app->add_option("--output", c.output, "output directory");
  app->add_option("--node-epsilon", c.node_epsilon, "relative node threshold")->capture_default_str();
  app->add_option("--threads", c.threads, "worker threads (0: machine parallelism)")->capture_default_str();
  app->add_option("--max-jumps", c.max_jumps, "jump budget per trajectory")->capture_default_str();
  app->add_option("--quad-rel-tol", c.quad_rel_tol, "hazard quadrature relative tolerance")->capture_default_str();
  app->add_option("--quad-abs-tol", c.quad_abs_tol, "hazard quadrature absolute tolerance")->capture_default_str();
  app->add_option("--root-tol", c.root_tol, "holding-time root tolerance")->capture_default_str();
  app->add_option("--grid-step", c.grid_step, "oracle grid step")->capture_default_str();
  app->add_option("--ode-rel-tol", c.ode_rel_tol, "master equation relative tolerance")->capture_default_str();
  app->add_option("--picard-terms", c.picard_terms, "Picard series terms")->capture_default_str();
  if (ensemble) {
    app->add_option("--n", c.n, "number of trajectories")->capture_default_str();
    app->add_option("--checkpoints", c.checkpoints, "count or comma-separated times")->capture_default_str();
    app->add_flag("--keep-paths", c.keep_paths, "retain and write full trajectories");
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  std::string method = "master";
  std::string export_name;

  CLI::App app{"Simulation and verification of minimal quantum jump processes", "belljump"};
  app.require_subcommand(1);
  auto* simulate = app.add_subcommand("simulate", "sample trajectories and write an ensemble report");
  auto* verify = app.add_subcommand("verify", "cross-check the ensemble against both oracles");
  auto* oracle = app.add_subcommand("oracle", "print the deterministic law as CSV");
  auto* check = app.add_subcommand("check", "evaluate the model assumptions");
  auto* rates = app.add_subcommand("rates", "inspect jump rates");
  auto* dump = rates->add_subcommand("dump", "jump-rate table at one time");
  rates->require_subcommand(1);
  auto* model = app.add_subcommand("model", "bundled models");
  model->require_subcommand(1);
  auto* list = model->add_subcommand("list", "print bundled model names");
  auto* exp = model->add_subcommand("export", "write a bundled model as JSON");
  exp->add_option("name", export_name, "model name")->required();
  exp->add_option("--output", c.output, "output file");

  add_run_options(simulate, c, true);
  add_run_options(verify, c, true);
  add_run_options(oracle, c, false);
  oracle->add_option("--method", method, "master or picard")->capture_default_str();
  add_run_options(check, c, false);
  check->add_option("--trials", c.hs_trials, "random states for the Hilbert-Schmidt bound")->capture_default_str();
  add_run_options(dump, c, false);
  dump->add_option("--t", c.rates_time, "evaluation time")->capture_default_str();

  try {
    c.threads = default_threads();
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

#ifdef _OPENMP
  if (c.threads > 0) omp_set_num_threads(c.threads);
#endif

  try {
    if (*simulate) return cmd_simulate(c, out);
    if (*verify) return cmd_verify(c, out);
    if (*oracle) return cmd_oracle(c, method, out);
    if (*check) return cmd_check(c, out);
    if (*dump) return cmd_rates_dump(c, out);
    if (*list) {
      for (const std::string& name : bundled_model_names()) out << name << '\n';
      return kExitPass;
    }
    if (*exp) {
      const auto m = bundled_model(export_name);
      if (!m) throw ValidationError("name", "unknown bundled model '" + export_name + "'");
      const std::string text = model_to_json(*m).dump(2) + "\n";
      if (c.output.empty()) {
        out << text;
      } else {
        std::ofstream f = open_file(c.output);
        f << text;
      }
      return kExitPass;
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const QuadratureError& e) {
    err << "error: quadrature failed on [" << format_real(e.worst_lo()) << ", " << format_real(e.worst_hi())
        << "]: " << e.what() << '\n';
    return kExitFail;
  } catch (const IntegrationError& e) {
    err << "error: integration failed at t = " << format_real(e.time()) << ", label " << e.label() << ": " << e.what()
        << '\n';
    return kExitFail;
  }
  return kExitInvalid;
}

}  // namespace belljump
