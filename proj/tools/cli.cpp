#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "cavcool/analytic.hpp"
#include "cavcool/io.hpp"
#include "cavcool/protocol.hpp"
#include "cavcool/states.hpp"
#include "cavcool/sweep.hpp"

namespace cavcool::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

// Argument problems that CLI11 cannot see (bad combinations, off-grid slices).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string default_out_dir() {
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') {
    return env;
  }
  return "cavcool_out";
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    values.push_back(io::parse_complex(item).real());
  }
  if (values.empty()) {
    throw UsageError("empty value list '" + text + "'");
  }
  return values;
}

std::string join(const std::vector<double>& values) {
  std::string s;
  for (double v : values) {
    s += (s.empty() ? "" : ",") + io::fmt17(v);
  }
  return s;
}

// Config-file entries become "--key=value" arguments placed ahead of the
// user's flags, so with TakeLast the command line wins.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  std::size_t sub = 0;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (sub == 0 && !args[i].empty() && args[i][0] != '-') {
      sub = i;
    }
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty() || sub == 0) {
    return args;
  }
  std::ifstream file(path);
  if (!file) {
    throw UsageError("cannot open config file '" + path + "'");
  }
  const auto entries = io::parse_key_value(file);
  std::vector<std::string> out(args.begin(), args.begin() + static_cast<long>(sub) + 1);
  for (const auto& [key, value] : entries) {
    if (key == "config") {
      throw UsageError("config file may not reference another config file");
    }
    out.push_back("--" + key + "=" + value);
  }
  out.insert(out.end(), args.begin() + static_cast<long>(sub) + 1, args.end());
  return out;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream f(path);
  if (!f) {
    throw std::runtime_error("cannot write " + path.string());
  }
  f << contents;
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}

void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    const std::vector<fs::path>& artifacts, double seconds) {
  json files = json::array();
  for (const auto& a : artifacts) {
    files.push_back(a.string());
  }
  const json manifest = {{"tool", "cavcool"},
                         {"version", kVersion},
                         {"command", command},
                         {"config", config},
                         {"artifacts", files},
                         {"wall_seconds", seconds}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

// Options shared by `cool` and `sweep`.
struct RunOptions {
  double dt = 0.05;
  double kappa = 1.0;
  double kappa_nbar = 1.0;
  double nbar0 = 1.0;
  int max_ocb = 200;
  Index dim = 128;
  double stability_tol = 0.01;
  int confirm_ocb = 2;
  double step = 1e-3;
  bool no_stop = false;
  bool drift_first = false;
  std::string out;
  std::string config;

  void add_to(CLI::App& app, bool with_dt) {
    if (with_dt) {
      app.add_option("--dt", dt, "electron spacing kappa*dt");
    }
    app.add_option("--kappa", kappa, "bath dissipation rate (0 disables the bath)");
    app.add_option("--kappa-nbar", kappa_nbar, "bath occupation");
    app.add_option("--nbar0", nbar0, "initial thermal occupation");
    app.add_option("--max-ocb", max_ocb, "maximum number of cooling blocks");
    app.add_option("--dim", dim, "Fock truncation");
    app.add_option("--stability-tol", stability_tol, "relative tolerance on adjacent block maxima");
    app.add_option("--confirm-ocb", confirm_ocb, "blocks simulated after stability");
    app.add_option("--step", step, "integrator step in units of 1/kappa");
    app.add_flag("--no-stop", no_stop, "run all max-ocb blocks");
    app.add_flag("--drift-first", drift_first, "start with a bath segment instead of a kick");
    app.add_option("--out", out, "output directory")->default_str("$" + std::string(kOutDirEnv));
    app.add_option("--config", config, "key = value config file (flags override)");
  }

  ProtocolConfig protocol(Complex g) const {
    ProtocolConfig c;
    c.g = g;
    c.delta_t_kappa = dt;
    c.bath = {kappa, kappa_nbar};
    c.nbar_initial = nbar0;
    c.max_ocb = max_ocb;
    c.dim = dim;
    c.stability_rel_tol = stability_tol;
    c.confirm_ocb = confirm_ocb;
    c.integrator.max_step = step;
    c.stop_at_stability = !no_stop;
    c.drift_first = drift_first;
    return c;
  }

  std::map<std::string, std::string> effective(bool with_dt) const {
    std::map<std::string, std::string> m = {
        {"kappa", io::fmt17(kappa)},
        {"kappa-nbar", io::fmt17(kappa_nbar)},
        {"nbar0", io::fmt17(nbar0)},
        {"max-ocb", std::to_string(max_ocb)},
        {"dim", std::to_string(dim)},
        {"stability-tol", io::fmt17(stability_tol)},
        {"confirm-ocb", std::to_string(confirm_ocb)},
        {"step", io::fmt17(step)},
        {"no-stop", no_stop ? "true" : "false"},
        {"drift-first", drift_first ? "true" : "false"},
    };
    if (with_dt) {
      m["dt"] = io::fmt17(dt);
    }
    return m;
  }

  fs::path out_dir() const {
    fs::path dir = out.empty() ? fs::path(default_out_dir()) : fs::path(out);
    fs::create_directories(dir);
    return dir;
  }
};

struct CoolOptions {
  RunOptions run;
  std::string g = "0.1";
  std::string save_state;
};

int cmd_cool(const CoolOptions& opt, const std::string& command, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  ProtocolConfig config = opt.run.protocol(io::parse_complex(opt.g));
  config.keep_final_state = !opt.save_state.empty();
  config.validate();

  const CoolingTrace trace = run_cooling(config);
  const StableMetrics m = stable_metrics(trace, config.stability_rel_tol);

  const fs::path dir = opt.run.out_dir();
  std::vector<fs::path> artifacts = {dir / "trace.csv", dir / "trace.json", dir / "effective.conf"};
  write_file(artifacts[0], render([&](std::ostream& s) { io::write_trace_csv(s, trace); }));
  json doc = io::trace_to_json(trace, config);
  doc["stable"] = {{"nbar_final", m.nbar_final},
                   {"prob_final", m.prob_final},
                   {"ocb_at_stability", m.ocb_at_stability},
                   {"reached", m.reached}};
  write_file(artifacts[1], doc.dump(2) + "\n");
  auto eff = opt.run.effective(true);
  eff["g"] = io::format_complex(config.g);
  if (!opt.save_state.empty()) {
    const fs::path state_path = dir / opt.save_state;
    write_file(state_path, render([&](std::ostream& s) { io::write_state(s, *trace.final_state); }));
    artifacts.push_back(state_path);
    eff["save-state"] = opt.save_state;
  }
  write_file(artifacts[2], render([&](std::ostream& s) { io::write_key_value(s, eff); }));
  artifacts.push_back(dir / "manifest.json");
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(dir, command, io::to_json(config), artifacts, seconds);

  out << "nbar_final=" << io::fmt17(m.nbar_final) << '\n'
      << "prob_final=" << io::fmt17(m.prob_final) << '\n'
      << "ocb_at_stability=" << m.ocb_at_stability << '\n'
      << "reached=" << (m.reached ? "true" : "false") << '\n'
      << "completed_ocb=" << trace.completed_ocb << '\n';
  for (const auto& w : trace.warnings) {
    out << "warning: " << w.kind << ": " << w.message << '\n';
  }
  return kExitOk;
}

struct SweepOptions {
  RunOptions run;
  std::string g_values;
  std::string dt_values;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<double> slice_dt;
  std::vector<double> slice_g;
};

std::string slug(double v) {
  std::string s = io::fmt17(v);
  for (char& c : s) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'm';
  }
  return s;
}

int cmd_sweep(const SweepOptions& opt, const std::string& command, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  SweepConfig config = SweepConfig::acceptance_default();
  config.base = opt.run.protocol(Complex(0.1, 0.0));
  if (!opt.g_values.empty()) {
    config.g_values = parse_list(opt.g_values);
  }
  if (!opt.dt_values.empty()) {
    config.dt_values = parse_list(opt.dt_values);
  }
  config.worker_count = opt.workers;
  config.validate();

  // Reject off-grid slices before spending time on the sweep.
  SweepResult probe{config.g_values, config.dt_values,
                    std::vector<SweepCell>(config.g_values.size() * config.dt_values.size())};
  try {
    for (double v : opt.slice_dt) slice(probe, SliceAxis::fixed_dt, v);
    for (double v : opt.slice_g) slice(probe, SliceAxis::fixed_g, v);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }

  const SweepResult result = run_sweep(config);

  const fs::path dir = opt.run.out_dir();
  std::vector<fs::path> artifacts = {dir / "sweep.csv", dir / "sweep.json", dir / "effective.conf"};
  write_file(artifacts[0], render([&](std::ostream& s) { io::write_sweep_csv(s, result.cells); }));
  write_file(artifacts[1], io::sweep_to_json(result, config).dump(2) + "\n");
  auto eff = opt.run.effective(false);
  eff["g-values"] = join(config.g_values);
  eff["dt-values"] = join(config.dt_values);
  eff["workers"] = std::to_string(config.worker_count);
  write_file(artifacts[2], render([&](std::ostream& s) { io::write_key_value(s, eff); }));
  for (double v : opt.slice_dt) {
    const fs::path p = dir / ("slice_dt_" + slug(v) + ".csv");
    write_file(p, render([&](std::ostream& s) {
                 io::write_sweep_csv(s, slice(result, SliceAxis::fixed_dt, v));
               }));
    artifacts.push_back(p);
  }
  for (double v : opt.slice_g) {
    const fs::path p = dir / ("slice_g_" + slug(v) + ".csv");
    write_file(p, render([&](std::ostream& s) {
                 io::write_sweep_csv(s, slice(result, SliceAxis::fixed_g, v));
               }));
    artifacts.push_back(p);
  }
  artifacts.push_back(dir / "manifest.json");
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(dir, command, io::to_json(config), artifacts, seconds);

  const std::size_t total = result.cells.size();
  const std::size_t failed = result.failed_count();
  out << "cells=" << total << '\n' << "failed=" << failed << '\n';
  for (const auto& c : result.cells) {
    if (c.failed) {
      out << "cell g=" << io::fmt17(c.g) << " dt_kappa=" << io::fmt17(c.dt_kappa)
          << " failed: " << c.error << '\n';
    }
  }
  return 10 * failed <= total ? kExitOk : kExitSimulation;
}

struct WignerOptions {
  std::optional<double> nbar;
  std::string state;
  std::optional<Index> dim;
  double extent = 6.0;
  Index points = 121;
  std::string out;
};

int cmd_wigner(const WignerOptions& opt, std::ostream& out) {
  if (opt.nbar.has_value() == !opt.state.empty()) {
    throw UsageError("wigner: give exactly one of --nbar or --state");
  }
  if (!(opt.extent > 0.0) || opt.points < 2) {
    throw UsageError("wigner: need --extent > 0 and --points >= 2");
  }
  std::optional<DensityMatrix> rho;
  if (opt.nbar) {
    rho = thermal_state(FockSpace(opt.dim.value_or(256)), *opt.nbar);
  } else {
    std::ifstream f(opt.state);
    if (!f) {
      throw UsageError("wigner: cannot open state file '" + opt.state + "'");
    }
    try {
      rho = io::read_state(f);
    } catch (const InvalidConfig& e) {
      throw UsageError(e.what());
    }
    if (opt.dim && *opt.dim != rho->dim()) {
      throw UsageError("wigner: state file has dim=" + std::to_string(rho->dim()) +
                       " but --dim=" + std::to_string(*opt.dim));
    }
  }
  const auto axis = uniform_axis(-opt.extent, opt.extent, opt.points);
  Warnings warnings;
  const WignerGrid grid = wigner(*rho, axis, axis, &warnings);

  fs::path path = opt.out.empty() ? fs::path(default_out_dir()) / "wigner.csv" : fs::path(opt.out);
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  write_file(path, render([&](std::ostream& s) { io::write_wigner_csv(s, grid); }));
  out << "file=" << path.string() << '\n'
      << "mean_photons=" << io::fmt17(mean_photons(*rho)) << '\n'
      << "max=" << io::fmt17(grid.values.maxCoeff()) << '\n'
      << "integral=" << io::fmt17(grid.integral()) << '\n';
  for (const auto& w : warnings) {
    out << "warning: " << w.kind << ": " << w.message << '\n';
  }
  return kExitOk;
}

struct AnalyticOptions {
  std::string formula;
  double nbar = 0.0;
  std::string g = "0";
  int k = 1;
};

int cmd_analytic(const AnalyticOptions& opt, std::ostream& out) {
  const Complex g = io::parse_complex(opt.g);
  if (!(opt.nbar >= 0.0)) {
    throw UsageError("analytic: --nbar must be non-negative");
  }
  json inputs = {{"nbar", opt.nbar}, {"g", json::array({g.real(), g.imag()})}};
  double value = 0.0;
  if (opt.formula == "p-plus") {
    value = analytic::p_plus_exact(opt.nbar, g);
  } else if (opt.formula == "nbar1") {
    value = analytic::nbar_one_round(opt.nbar, g);
  } else if (opt.formula == "prob1") {
    value = analytic::prob_one_round(opt.nbar, g);
  } else if (opt.formula == "nbark" || opt.formula == "probk") {
    if (opt.k < 0) {
      throw UsageError("analytic: --k must be non-negative");
    }
    inputs["k"] = opt.k;
    value = opt.formula == "nbark" ? analytic::nbar_k_rounds(opt.nbar, g, opt.k)
                                   : analytic::prob_k_rounds(opt.nbar, g, opt.k);
  } else {
    throw UsageError("analytic: unknown formula '" + opt.formula + "'");
  }
  json doc = {{"formula", opt.formula}, {"inputs", inputs}, {"value", value}};
  if (auto w = analytic::validity_warning(opt.nbar, g)) {
    doc["warning"] = w->message;
  }
  out << doc.dump() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Free-electron cavity cooling simulator", "cavcool"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CoolOptions cool;
  auto* cool_cmd = app.add_subcommand("cool", "simulate one cooling run and write its trace");
  cool_cmd->add_option("--g", cool.g, "coupling g as re[,im]");
  cool.run.add_to(*cool_cmd, true);
  cool_cmd->add_option("--save-state", cool.save_state, "write the final density matrix to this file in --out");

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "scan (g, kappa*dt) and write heatmap data");
  sweep.run.add_to(*sweep_cmd, false);
  sweep_cmd->add_option("--g-values", sweep.g_values, "comma-separated couplings");
  sweep_cmd->add_option("--dt-values", sweep.dt_values, "comma-separated kappa*dt values");
  sweep_cmd->add_option("--workers", sweep.workers, "worker threads");
  sweep_cmd->add_option("--slice-dt", sweep.slice_dt, "write the row at this kappa*dt")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  sweep_cmd->add_option("--slice-g", sweep.slice_g, "write the column at this g")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  WignerOptions wig;
  auto* wigner_cmd = app.add_subcommand("wigner", "evaluate a Wigner function on a square grid");
  wigner_cmd->add_option("--nbar", wig.nbar, "thermal occupation");
  wigner_cmd->add_option("--state", wig.state, "density-matrix file");
  wigner_cmd->add_option("--dim", wig.dim, "Fock truncation (default 256 for thermal states)");
  wigner_cmd->add_option("--extent", wig.extent, "grid covers [-extent, extent] on both axes");
  wigner_cmd->add_option("--points", wig.points, "points per axis");
  wigner_cmd->add_option("--out", wig.out, "output CSV path");
  std::string wigner_config;
  wigner_cmd->add_option("--config", wigner_config, "key = value config file");

  AnalyticOptions ana;
  auto* analytic_cmd = app.add_subcommand("analytic", "evaluate a closed-form oracle");
  analytic_cmd->add_option("--formula", ana.formula, "p-plus | nbar1 | prob1 | nbark | probk")
      ->required();
  analytic_cmd->add_option("--nbar", ana.nbar, "thermal occupation");
  analytic_cmd->add_option("--g", ana.g, "coupling g as re[,im]");
  analytic_cmd->add_option("--k", ana.k, "number of blocks");
  std::string analytic_config;
  analytic_cmd->add_option("--config", analytic_config, "key = value config file");

  std::vector<std::string> args;
  try {
    args = expand_config(raw_args);
    std::vector<const char*> argv;
    for (const auto& a : args) {
      argv.push_back(a.c_str());
    }
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::string command;
  for (std::size_t i = 1; i < raw_args.size(); ++i) {
    command += (i > 1 ? " " : "") + raw_args[i];
  }

  try {
    if (cool_cmd->parsed()) return cmd_cool(cool, command, out);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep, command, out);
    if (wigner_cmd->parsed()) return cmd_wigner(wig, out);
    if (analytic_cmd->parsed()) return cmd_analytic(ana, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidConfig& e) {
    err << "error: invalid argument: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: simulation failed: " << e.what() << '\n';
    return kExitSimulation;
  }
  return kExitUsage;
}

}  // namespace cavcool::cli
