#include "dios/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dios/certify.hpp"
#include "dios/dde.hpp"
#include "dios/errors.hpp"
#include "dios/expr.hpp"
#include "dios/margin.hpp"
#include "dios/parallel.hpp"
#include "dios/redef.hpp"
#include "dios/report.hpp"

namespace dios {

namespace {

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid JSON in '" + path + "': " + e.what());
  }
  return j;
}

nlohmann::json parse_json_text(const std::string& text, const char* what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON for ") + what + ": " + e.what());
  }
}

/// Flags override config-file values; config values fill unset flags.
struct Merger {
  CLI::App* cmd;
  nlohmann::json cfg;
  std::vector<std::string> known;

  Merger(CLI::App* c, const std::string& config_path) : cmd(c) {
    if (!config_path.empty()) {
      cfg = load_json_file(config_path);
      if (!cfg.is_object()) throw ConfigError("config file must be a JSON object");
    }
  }

  template <class T>
  void merge(const std::string& flag, const std::string& key, T& var) {
    known.push_back(key);
    auto* opt = cmd->get_option_no_throw("--" + flag);
    if (!opt && cmd->get_parent())  // top-level flags like --threads
      opt = cmd->get_parent()->get_option_no_throw("--" + flag);
    if (opt && opt->count() > 0) return;
    if (cfg.contains(key)) {
      try {
        var = cfg[key].get<T>();
      } catch (const nlohmann::json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
      }
    }
  }

  void finish() const {
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
      if (std::find(known.begin(), known.end(), it.key()) == known.end())
        throw ConfigError("unknown config key '" + it.key() + "'");
  }
};

std::string shorthand_to_json(const std::string& text) {
  // "const:1,0.5" expands to {"const": [1, 0.5]}
  if (text.rfind("const:", 0) == 0) {
    nlohmann::json arr = nlohmann::json::array();
    std::stringstream ss(text.substr(6));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        arr.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ConfigError("bad component '" + tok + "' in '" + text + "'");
      }
    }
    return nlohmann::json{{"const", arr}}.dump();
  }
  return text;
}

SystemModel resolve_model(const std::string& spec, double theta) {
  if (spec.empty()) throw ConfigError("a model is required (--model)");
  if (spec.front() == '@')
    return model_from_json(load_json_file(spec.substr(1)));
  if (spec.front() == '{')
    return model_from_json(parse_json_text(spec, "model"));
  return make_model(spec, theta);
}

struct EnsembleOpts {
  int size = 200;
  double radius = 2.0, radius_u = -1;
  long long seed = -1;
  double horizon = 10.0;
  int steps_per_delay = 64;
  std::vector<std::string> fixes;  // "index=value"

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--ensemble-size", size, "ensemble member count");
    cmd->add_option("--radius", radius, "initial-history sup-norm radius");
    cmd->add_option("--radius-u", radius_u,
                    "input amplitude (defaults to --radius)");
    cmd->add_option("--seed", seed, "master seed (required)");
    cmd->add_option("--horizon", horizon, "simulation horizon");
    cmd->add_option("--steps-per-delay", steps_per_delay,
                    "grid steps per delay interval");
    cmd->add_option("--fix", fixes,
                    "freeze a state component, e.g. --fix 0=5 (repeatable)");
  }

  void merge_config(Merger& m) {
    m.merge("ensemble-size", "ensemble_size", size);
    m.merge("radius", "radius", radius);
    m.merge("radius-u", "radius_u", radius_u);
    m.merge("seed", "seed", seed);
    m.merge("horizon", "horizon", horizon);
    m.merge("steps-per-delay", "steps_per_delay", steps_per_delay);
    m.merge("fix", "fix", fixes);
  }

  EnsembleSpec to_spec() const {
    if (seed < 0)
      throw ConfigError("ensemble subcommands require --seed (key: seed)");
    EnsembleSpec spec;
    spec.count = size;
    spec.radius_xi = radius;
    spec.radius_u = radius_u < 0 ? radius : radius_u;
    spec.seed = uint64_t(seed);
    spec.horizon = horizon;
    spec.steps_per_delay = steps_per_delay;
    for (const auto& fx : fixes) {
      auto eq = fx.find('=');
      if (eq == std::string::npos)
        throw ConfigError("--fix expects index=value, got '" + fx + "'");
      try {
        spec.fixed_components[std::stoi(fx.substr(0, eq))] =
            std::stod(fx.substr(eq + 1));
      } catch (const std::exception&) {
        throw ConfigError("--fix expects index=value, got '" + fx + "'");
      }
    }
    return spec;
  }

  nlohmann::json echo() const {
    return {{"ensemble_size", size}, {"radius", radius},
            {"radius_u", radius_u < 0 ? radius : radius_u},
            {"seed", seed},          {"horizon", horizon},
            {"steps_per_delay", steps_per_delay}};
  }
};

void write_plot_files(const Trajectory& traj, const std::string& prefix) {
  std::ofstream dat(prefix + ".dat");
  for (long row = 0; row < traj.row_count(); ++row) {
    dat << traj.time_of_row(row);
    for (double v : traj.state_row(row)) dat << " " << v;
    if (traj.output_valid(row))
      for (double v : traj.output_row(row)) dat << " " << v;
    dat << "\n";
  }
  std::ofstream gp(prefix + ".gp");
  gp << "set xlabel 't'\nset ylabel 'state'\nplot";
  for (int i = 0; i < traj.state_dim(); ++i)
    gp << (i ? "," : "") << " '" << prefix << ".dat' using 1:" << (i + 2)
       << " with lines title 'x_" << (i + 1) << "'";
  gp << "\n";
}

// ------------------------------------------------------------- subcommands

int cmd_simulate(const std::string& config_path, CLI::App* cmd,
                 std::string model_spec, double theta, std::string xi_text,
                 std::string u_text, double horizon, int steps, double bmax,
                 std::string out, bool plot, bool timing) {
  auto t0 = std::chrono::steady_clock::now();
  Merger m(cmd, config_path);
  m.merge("model", "model", model_spec);
  m.merge("theta", "theta", theta);
  m.merge("xi", "xi", xi_text);
  m.merge("u", "u", u_text);
  m.merge("T", "T", horizon);
  m.merge("steps-per-delay", "steps_per_delay", steps);
  m.merge("bmax", "bmax", bmax);
  m.merge("out", "out", out);
  m.merge("plot", "plot", plot);
  m.finish();

  SystemModel model = resolve_model(model_spec, theta);
  double dt = model.theta / steps;
  // horizon snaps up to the next grid multiple
  double T = std::ceil(horizon / dt - 1e-9) * dt;

  if (xi_text.empty()) throw ConfigError("simulate requires --xi");
  HistorySegment xi = parse_history_literal(
      parse_json_text(shorthand_to_json(xi_text), "xi"), model.theta, steps,
      model.n);
  InputSignal u =
      u_text.empty()
          ? InputSignal::zero(model.m, T)
          : parse_input_literal(parse_json_text(shorthand_to_json(u_text), "u"),
                                model.m, T, dt);

  SimConfig cfg{T, steps, bmax};
  Trajectory traj = simulate(model, xi, u, cfg);

  if (out.empty()) out = "simulate";
  write_trajectory_csv(traj, out + ".csv");
  if (plot) write_plot_files(traj, out);

  double peak_y = 0;
  for (long row = steps; row < traj.row_count(); ++row)
    peak_y = std::max(peak_y, traj.output_norm(row));
  nlohmann::json body{{"model", model.id},
                      {"final_time", traj.final_time()},
                      {"final_state", std::vector<double>(
                                          traj.state_row(traj.row_count() - 1).begin(),
                                          traj.state_row(traj.row_count() - 1).end())},
                      {"peak_output_norm", peak_y},
                      {"csv", out + ".csv"}};
  nlohmann::json echo{{"subcommand", "simulate"}, {"model", model_spec},
                      {"theta", model.theta},     {"xi", xi_text},
                      {"u", u_text},              {"T", T},
                      {"steps_per_delay", steps}, {"bmax", bmax}};
  double secs = timing ? std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - t0)
                             .count()
                       : -1;
  emit_report(body, echo, out + ".json", secs);
  return 0;
}

struct CandidateOpts {
  std::string beta, gamma, sigma, rho, kappa, mu, chi;
  double c = 0;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--beta", beta, "KL candidate, e.g. exp-kl:2,1");
    cmd->add_option("--gamma", gamma, "input gain, e.g. linear:2");
    cmd->add_option("--sigma", sigma, "overshoot gain");
    cmd->add_option("--rho", rho, "decay slow-down gain");
    cmd->add_option("--kappa", kappa, "running-max contraction");
    cmd->add_option("--mu", mu, "state-bound input gain");
    cmd->add_option("--chi", chi, "reachability envelope");
    cmd->add_option("--c-const", c, "additive constant");
  }

  void merge_config(Merger& m) {
    m.merge("beta", "beta", beta);
    m.merge("gamma", "gamma", gamma);
    m.merge("sigma", "sigma", sigma);
    m.merge("rho", "rho", rho);
    m.merge("kappa", "kappa", kappa);
    m.merge("mu", "mu", mu);
    m.merge("chi", "chi", chi);
    m.merge("c-const", "c", c);
  }

  EstimateCandidate to_candidate(EstimateForm form) const {
    EstimateCandidate cand;
    cand.form = form;
    if (!beta.empty()) cand.beta = parse_kl(beta);
    if (!gamma.empty()) cand.gamma = parse_comparison(gamma);
    if (!sigma.empty()) cand.sigma = parse_comparison(sigma);
    if (!rho.empty()) cand.rho = parse_comparison(rho);
    if (!kappa.empty()) cand.kappa = parse_comparison(kappa);
    if (!mu.empty()) cand.mu = parse_comparison(mu);
    if (!chi.empty()) cand.chi = parse_comparison(chi);
    cand.c = c;
    return cand;
  }

  nlohmann::json echo() const {
    return {{"beta", beta}, {"gamma", gamma}, {"sigma", sigma}, {"rho", rho},
            {"kappa", kappa}, {"mu", mu},     {"chi", chi},     {"c", c}};
  }
};

int cmd_certify(const std::string& config_path, CLI::App* cmd, bool razumikhin,
                std::string model_spec, double theta, std::string form_name,
                CandidateOpts cand_opts, EnsembleOpts ens_opts, std::string out,
                int threads, bool timing) {
  auto t0 = std::chrono::steady_clock::now();
  Merger m(cmd, config_path);
  m.merge("model", "model", model_spec);
  m.merge("theta", "theta", theta);
  m.merge("form", "form", form_name);
  m.merge("out", "out", out);
  m.merge("threads", "threads", threads);
  cand_opts.merge_config(m);
  ens_opts.merge_config(m);
  m.finish();

  SystemModel model = resolve_model(model_spec, theta);
  if (form_name.empty())
    form_name = razumikhin ? "RAZ-IOS" : "IOS";
  EstimateForm form = parse_form(form_name);
  if (razumikhin && !is_razumikhin(form))
    throw ConfigError("razumikhin subcommand expects a RAZ-* form");
  EstimateCandidate cand = cand_opts.to_candidate(form);
  EnsembleSpec spec = ens_opts.to_spec();

  CertificationReport rep = razumikhin
                                ? check_razumikhin(model, cand, spec, threads)
                                : check_estimate(model, cand, spec, threads);

  nlohmann::json echo{{"subcommand", razumikhin ? "razumikhin" : "certify"},
                      {"model", model_spec},
                      {"theta", model.theta},
                      {"form", form_name},
                      {"candidate", cand_opts.echo()},
                      {"ensemble", ens_opts.echo()}};
  if (out.empty()) out = razumikhin ? "razumikhin.json" : "certify.json";
  double secs = timing ? std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - t0)
                             .count()
                       : -1;
  emit_report(rep.to_json(), echo, out, secs);
  return rep.satisfied ? 0 : 1;
}

int cmd_redefine(const std::string& config_path, CLI::App* cmd,
                 std::string model_spec, double theta, std::string xi_text,
                 std::string beta, std::string gamma, int segments, int levels,
                 int directions, int restarts, int steps, double horizon_cap,
                 double modulus_eps, bool validate, EnsembleOpts ens_opts,
                 std::string out, int threads, bool timing) {
  auto t0 = std::chrono::steady_clock::now();
  Merger m(cmd, config_path);
  m.merge("model", "model", model_spec);
  m.merge("theta", "theta", theta);
  m.merge("xi", "xi", xi_text);
  m.merge("beta", "beta", beta);
  m.merge("gamma", "gamma", gamma);
  m.merge("segments", "segments", segments);
  m.merge("levels", "levels", levels);
  m.merge("directions", "directions", directions);
  m.merge("restarts", "restarts", restarts);
  m.merge("search-steps-per-delay", "search_steps_per_delay", steps);
  m.merge("horizon-cap", "horizon_cap", horizon_cap);
  m.merge("modulus-eps", "modulus_eps", modulus_eps);
  m.merge("validate", "validate", validate);
  m.merge("out", "out", out);
  m.merge("threads", "threads", threads);
  ens_opts.merge_config(m);
  m.finish();

  SystemModel model = resolve_model(model_spec, theta);
  if (beta.empty() || gamma.empty())
    throw ConfigError("redefine requires --beta and --gamma (a max-form "
                      "certificate)");
  long long seed = ens_opts.seed;
  if (seed < 0) throw ConfigError("redefine requires --seed (key: seed)");

  RedefinitionSpec spec;
  spec.beta = parse_kl(beta);
  spec.gamma = parse_comparison(gamma);
  spec.segments = segments;
  spec.magnitudes = levels;
  spec.directions = directions;
  spec.restarts = restarts;
  spec.seed = uint64_t(seed);
  spec.steps_per_delay = steps;
  spec.horizon_cap = horizon_cap;

  nlohmann::json echo{{"subcommand", "redefine"}, {"model", model_spec},
                      {"theta", model.theta},     {"beta", beta},
                      {"gamma", gamma},           {"segments", segments},
                      {"levels", levels},         {"directions", directions},
                      {"restarts", restarts},     {"seed", seed},
                      {"validate", validate}};

  int code = 0;
  nlohmann::json body;
  if (validate) {
    EnsembleSpec ens = ens_opts.to_spec();
    std::vector<double> check_times{0.0, ens.horizon / 4, ens.horizon / 2};
    RedefValidationReport rep =
        validate_redefinition(model, spec, ens, check_times, threads);
    body = rep.to_json();
    code = rep.satisfied ? 0 : 1;
    echo["ensemble"] = ens_opts.echo();
  } else {
    if (xi_text.empty()) throw ConfigError("redefine requires --xi");
    HistorySegment xi = parse_history_literal(
        parse_json_text(shorthand_to_json(xi_text), "xi"), model.theta,
        spec.steps_per_delay, model.n);
    HbarEstimate est = estimate_hbar(model, xi, spec, threads);
    body = est.to_json();
    if (modulus_eps > 0) {
      body["modulus"] =
          hbar_difference_quotient(model, xi, spec, modulus_eps).to_json();
      echo["modulus_eps"] = modulus_eps;
    }
    echo["xi"] = xi_text;
  }
  if (out.empty()) out = "redefine.json";
  double secs = timing ? std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - t0)
                             .count()
                       : -1;
  emit_report(body, echo, out, secs);
  return code;
}

int cmd_margin(const std::string& config_path, CLI::App* cmd,
               std::string model_spec, double theta, std::string sigma,
               std::string gamma, std::string variant_name,
               std::vector<std::string> adversary_classes, EnsembleOpts ens_opts,
               std::string out, int threads, bool timing) {
  auto t0 = std::chrono::steady_clock::now();
  Merger m(cmd, config_path);
  m.merge("model", "model", model_spec);
  m.merge("theta", "theta", theta);
  m.merge("sigma", "sigma", sigma);
  m.merge("gamma", "gamma", gamma);
  m.merge("variant", "variant", variant_name);
  m.merge("adversaries", "adversaries", adversary_classes);
  m.merge("out", "out", out);
  m.merge("threads", "threads", threads);
  ens_opts.merge_config(m);
  m.finish();

  SystemModel model = resolve_model(model_spec, theta);
  if (sigma.empty()) throw ConfigError("margin requires --sigma");
  ComparisonFunction sig = normalize_margin_gain(
      parse_comparison(sigma),
      gamma.empty() ? ComparisonFunction{} : parse_comparison(gamma));
  ClosedLoopModel closed = build_closed_loop(model, sig);
  RobustVariant variant = parse_variant(variant_name);
  AdversarySpec adv;
  if (!adversary_classes.empty()) adv.classes = adversary_classes;
  EnsembleSpec spec = ens_opts.to_spec();

  RobustReport rep = verify_robust(closed, variant, adv, spec, threads);
  nlohmann::json echo{{"subcommand", "margin"},
                      {"model", model_spec},
                      {"theta", model.theta},
                      {"sigma", sigma},
                      {"gamma", gamma},
                      {"variant", variant_name},
                      {"adversaries", adv.classes},
                      {"ensemble", ens_opts.echo()}};
  if (out.empty()) out = "margin.json";
  double secs = timing ? std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - t0)
                             .count()
                       : -1;
  emit_report(rep.to_json(), echo, out, secs);
  return rep.satisfied ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"delay-system output-stability toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override)")
      ->check(CLI::ExistingFile);
  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads (default: DIOS_THREADS or hardware)");
  bool timing = false;
  app.add_flag("--timing", timing,
               "embed wall-clock timing in reports (breaks byte determinism)");

  int exit_code = 0;

  // simulate
  auto* sim = app.add_subcommand("simulate", "integrate one trajectory");
  std::string sim_model, sim_xi, sim_u, sim_out;
  double sim_theta = 0, sim_T = 10, sim_bmax = 1e12;
  int sim_steps = 64;
  bool sim_plot = false;
  sim->add_option("--model", sim_model, "registry id, @file.json, or inline JSON");
  sim->add_option("--theta", sim_theta, "delay override for built-ins");
  sim->add_option("--xi", sim_xi, "history literal (const:... or JSON)");
  sim->add_option("--u", sim_u, "input literal (const:... or JSON)");
  sim->add_option("--T", sim_T, "horizon");
  sim->add_option("--steps-per-delay", sim_steps, "grid steps per delay");
  sim->add_option("--bmax", sim_bmax, "blow-up guard");
  sim->add_option("--out", sim_out, "output prefix");
  sim->add_flag("--plot", sim_plot, "emit gnuplot-ready .dat/.gp files");
  sim->callback([&] {
    exit_code = cmd_simulate(config_path, sim, sim_model, sim_theta, sim_xi,
                             sim_u, sim_T, sim_steps, sim_bmax, sim_out,
                             sim_plot, timing);
  });

  // certify / razumikhin
  auto add_check = [&](const char* name, const char* help, bool raz) {
    auto* cmd = app.add_subcommand(name, help);
    auto model = std::make_shared<std::string>();
    auto form = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto theta = std::make_shared<double>(0);
    auto cand = std::make_shared<CandidateOpts>();
    auto ens = std::make_shared<EnsembleOpts>();
    cmd->add_option("--model", *model, "registry id, @file.json, or inline JSON");
    cmd->add_option("--theta", *theta, "delay override for built-ins");
    cmd->add_option("--form", *form, "estimate form");
    cmd->add_option("--out", *out, "report path");
    cand->add_flags(cmd);
    ens->add_flags(cmd);
    cmd->callback([&, cmd, model, form, out, theta, cand, ens, raz] {
      exit_code = cmd_certify(config_path, cmd, raz, *model, *theta, *form,
                              *cand, *ens, *out, threads, timing);
    });
  };
  add_check("certify", "check a stability estimate over an ensemble", false);
  add_check("razumikhin", "check a Razumikhin premise over an ensemble", true);

  // redefine
  auto* red = app.add_subcommand("redefine",
                                 "estimate the redefined output functional");
  std::string red_model, red_xi, red_beta, red_gamma, red_out;
  double red_theta = 0, red_cap = 60, red_modulus = 0;
  int red_segments = 5, red_levels = 11, red_dirs = 8, red_restarts = 4,
      red_steps = 16;
  bool red_validate = false;
  EnsembleOpts red_ens;
  red->add_option("--model", red_model, "registry id, @file.json, or inline JSON");
  red->add_option("--theta", red_theta, "delay override for built-ins");
  red->add_option("--xi", red_xi, "history literal");
  red->add_option("--beta", red_beta, "certificate KL function (max form)");
  red->add_option("--gamma", red_gamma, "certificate input gain (max form)");
  red->add_option("--segments", red_segments, "input segments");
  red->add_option("--levels", red_levels, "level magnitudes");
  red->add_option("--directions", red_dirs, "level directions (m = 2)");
  red->add_option("--restarts", red_restarts, "coordinate-ascent restarts");
  red->add_option("--search-steps-per-delay", red_steps,
                  "grid resolution inside the search");
  red->add_option("--horizon-cap", red_cap, "search horizon cap");
  red->add_option("--modulus-eps", red_modulus,
                  "also report the empirical difference quotient at this "
                  "perturbation size");
  red->add_flag("--validate", red_validate,
                "run the bracket-aware ensemble validation instead");
  red->add_option("--out", red_out, "report path");
  red_ens.add_flags(red);  // --seed lives here
  red->callback([&] {
    exit_code = cmd_redefine(config_path, red, red_model, red_theta, red_xi,
                             red_beta, red_gamma, red_segments, red_levels,
                             red_dirs, red_restarts, red_steps, red_cap,
                             red_modulus, red_validate, red_ens, red_out,
                             threads, timing);
  });

  // margin
  auto* mar = app.add_subcommand("margin",
                                 "synthesize and verify an output-feedback margin");
  std::string mar_model, mar_sigma, mar_gamma, mar_variant = "RGAOS", mar_out;
  double mar_theta = 0;
  std::vector<std::string> mar_adv;
  EnsembleOpts mar_ens;
  mar->add_option("--model", mar_model, "registry id, @file.json, or inline JSON");
  mar->add_option("--theta", mar_theta, "delay override for built-ins");
  mar->add_option("--sigma", mar_sigma, "certificate gain (normalized internally)");
  mar->add_option("--gamma", mar_gamma, "input gain folded into the normalization");
  mar->add_option("--variant", mar_variant, "RGAOS | OL-RGAOS | SI-RGAOS");
  mar->add_option("--adversaries", mar_adv,
                  "adversary classes (bang-bang, greedy, const)");
  mar->add_option("--out", mar_out, "report path");
  mar_ens.add_flags(mar);
  mar->callback([&] {
    exit_code = cmd_margin(config_path, mar, mar_model, mar_theta, mar_sigma,
                           mar_gamma, mar_variant, mar_adv, mar_ens, mar_out,
                           threads, timing);
  });

  std::vector<const char*> argv;
  argv.push_back("dios");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help() << std::endl;
      return 0;
    }
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
  return exit_code;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace dios
