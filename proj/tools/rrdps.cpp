// Command-line front end: bounds, tolerant-error tables, key-rate sweeps,
// decoy-state estimation, attack-oracle verification.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rrdps/attack.hpp"
#include "rrdps/bound.hpp"
#include "rrdps/decoy.hpp"
#include "rrdps/entropy.hpp"
#include "rrdps/io.hpp"
#include "rrdps/rates.hpp"

namespace {

using rrdps::io::Cell;
using rrdps::io::Table;

struct CommonOpts {
  std::string format = "csv";
  std::string output;
  int precision = 6;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--format", c.format, "Output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--output", c.output, "Write output to this file");
  cmd->add_option("--precision", c.precision,
                  "Significant digits for display (csv)")
      ->check(CLI::Range(1, 17));
  cmd->add_option("--seed", c.seed, "Seed for randomized components");
  cmd->add_option("--config", "Flat key = value config file; explicit flags win")
      ->expected(1);
}

std::string trimmed(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Expand `--config FILE` into `--key value` tokens for every config entry
// whose flag is absent from the command line.
bool expand_config(std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty()) return true;
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open config file: " << path << "\n";
    return false;
  }
  std::string line;
  while (std::getline(in, line)) {
    const std::string entry = trimmed(line);
    if (entry.empty() || entry[0] == '#') continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      std::cerr << "malformed config line: " << line << "\n";
      return false;
    }
    const std::string key = trimmed(entry.substr(0, eq));
    std::string value = trimmed(entry.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty() || key == "config") continue;
    const std::string flag = "--" + key;
    bool present = false;
    for (const auto& arg : args) {
      if (arg == flag || arg.rfind(flag + "=", 0) == 0) present = true;
    }
    if (!present) {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return true;
}

int emit(const Table& table, const CommonOpts& c) {
  const std::string text = c.format == "json"
                               ? rrdps::io::to_json(table)
                               : rrdps::io::to_csv(table, c.precision);
  if (c.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(c.output, std::ios::binary);
    if (!out) {
      std::cerr << "cannot open output file: " << c.output << "\n";
      return 2;
    }
    out << text;
  }
  return 0;
}

Cell cell(double v) { return Cell{v}; }
Cell cell(std::int64_t v) { return Cell{v}; }
Cell cell(const std::string& v) { return Cell{v}; }
Cell absent() { return Cell{std::monostate{}}; }
Cell cell_opt(const std::optional<double>& v) {
  return v ? Cell{*v} : absent();
}

rrdps::OptimizerOptions solver_options(const CommonOpts& c) {
  rrdps::OptimizerOptions opt;
  opt.seed = c.seed;
  return opt;
}

// ---- bound ---------------------------------------------------------------

struct BoundArgs {
  int L = 0;
  int N = 0;
  std::string mode = "unconstrained";
  std::optional<double> error;
  CommonOpts common;
};

int run_bound(const BoundArgs& a) {
  const auto mode = rrdps::bound_mode_from_name(a.mode);
  if (!mode) {
    std::cerr << "unknown mode: " << a.mode << "\n";
    return 2;
  }
  rrdps::BoundQuery query;
  query.pulses_per_packet = a.L;
  query.photon_number = a.N;
  query.mode = *mode;
  query.error_rate = a.error;
  rrdps::BoundResult result;
  try {
    result = rrdps::iae_bound(query, solver_options(a.common));
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid query: " << e.what() << "\n";
    return 2;
  }
  std::string argmax;
  for (std::size_t i = 0; i < result.argmax.x.size(); ++i) {
    if (i) argmax += ';';
    argmax += rrdps::io::format_double(result.argmax.x[i], a.common.precision);
  }
  Table t;
  t.header = {"L", "N", "mode", "E", "iae", "argmax", "converged"};
  t.rows.push_back({cell(std::int64_t{a.L}), cell(std::int64_t{a.N}),
                    cell(a.mode), cell_opt(a.error), cell(result.iae),
                    argmax.empty() ? absent() : cell(argmax),
                    cell(std::int64_t{result.converged ? 1 : 0})});
  const int rc = emit(t, a.common);
  if (rc != 0) return rc;
  return result.converged ? 0 : 1;
}

// ---- tolerance -----------------------------------------------------------

struct ToleranceArgs {
  std::vector<int> L;
  int N = 1;
  std::string mode = "all";
  CommonOpts common;
};

int run_tolerance(const ToleranceArgs& a) {
  if (a.L.empty()) {
    std::cerr << "no packet lengths given\n";
    return 2;
  }
  std::vector<rrdps::BoundMode> modes;
  if (a.mode == "all") {
    modes = {rrdps::BoundMode::Original, rrdps::BoundMode::Unconstrained,
             rrdps::BoundMode::Constrained};
  } else if (auto m = rrdps::bound_mode_from_name(a.mode)) {
    modes = {*m};
  } else {
    std::cerr << "unknown mode: " << a.mode << "\n";
    return 2;
  }
  for (int L : a.L) {
    if (a.N > L - 2) {
      std::cerr << "L=" << L << " admits no valid photon number N=" << a.N
                << " (needs N <= L-2)\n";
      return 2;
    }
  }
  const auto opt = solver_options(a.common);
  Table t;
  t.header = {"L"};
  for (auto m : modes) t.header.push_back(rrdps::bound_mode_name(m));
  for (int L : a.L) {
    std::vector<Cell> row{cell(std::int64_t{L})};
    for (auto m : modes) {
      row.push_back(cell_opt(rrdps::tolerant_error_rate(L, a.N, m, opt)));
    }
    t.rows.push_back(std::move(row));
  }
  return emit(t, a.common);
}

// ---- rate-sweep ----------------------------------------------------------

struct SweepArgs {
  std::vector<int> L;
  double loss_start = 0.0;
  double loss_stop = 0.0;
  double loss_step = 1.0;
  double e_mis = 0.015;
  double dark = 1e-6;
  double ec_f = 1.0;
  std::vector<std::string> variants;
  std::optional<double> fixed_mu;
  std::optional<int> fixed_nu_th;
  CommonOpts common;
};

int run_rate_sweep(const SweepArgs& a) {
  if (a.L.empty()) {
    std::cerr << "no packet lengths given\n";
    return 2;
  }
  if (a.loss_step <= 0.0 || a.loss_stop < a.loss_start) {
    std::cerr << "malformed loss grid\n";
    return 2;
  }
  rrdps::SweepRequest req;
  const int count =
      static_cast<int>(std::floor((a.loss_stop - a.loss_start) / a.loss_step +
                                  1e-9)) +
      1;
  for (int i = 0; i < count; ++i) {
    req.loss_grid_db.push_back(a.loss_start + i * a.loss_step);
  }
  if (req.loss_grid_db.empty()) {
    std::cerr << "empty loss grid\n";
    return 2;
  }
  for (const auto& name : a.variants) {
    const auto v = rrdps::variant_from_name(name);
    if (!v) {
      std::cerr << "unknown variant: " << name << "\n";
      return 2;
    }
    req.variants.push_back(*v);
  }
  req.packet_lengths = a.L;
  req.channel.dark_rate = a.dark;
  req.channel.misalignment = a.e_mis;
  req.config.ec_efficiency = a.ec_f;
  req.optimize = !(a.fixed_mu.has_value() || a.fixed_nu_th.has_value());
  if (a.fixed_mu) req.config.mu = *a.fixed_mu;
  if (a.fixed_nu_th) req.config.nu_th = *a.fixed_nu_th;
  req.bound_options = solver_options(a.common);

  std::vector<rrdps::SweepRow> rows;
  try {
    rows = rrdps::sweep(req);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid sweep: " << e.what() << "\n";
    return 2;
  }
  Table t;
  t.header = {"loss_db", "variant", "L", "R", "mu_opt", "nu_th_opt", "Q", "E"};
  for (const auto& row : rows) {
    t.rows.push_back(
        {cell(row.loss_db), cell(std::string(rrdps::variant_name(row.variant))),
         cell(std::int64_t{row.pulses_per_packet}), cell(row.point.key_rate),
         cell(row.point.mu),
         row.point.nu_th ? cell(std::int64_t{*row.point.nu_th}) : absent(),
         cell(row.point.gain), cell_opt(row.point.error_rate)});
  }
  return emit(t, a.common);
}

// ---- decoy ---------------------------------------------------------------

struct DecoyArgs {
  std::string file;
  double s = 0.0;
  double d = 0.0;
  double v = 0.0;
  int L = 0;
  double ec_f = 1.0;
  CommonOpts common;
};

int run_decoy(const DecoyArgs& a) {
  std::ifstream in(a.file);
  if (!in) {
    std::cerr << "cannot open observations file: " << a.file << "\n";
    return 2;
  }
  const auto csv = rrdps::io::read_csv(in);
  const std::vector<std::string> expected = {"Qs", "Es", "Qd", "Ed", "Qv"};
  if (!csv.header.empty() && csv.header != expected) {
    std::cerr << "observations file must have header Qs,Es,Qd,Ed,Qv\n";
    return 2;
  }
  rrdps::DecoyIntensities intens;
  intens.mu_signal = a.s;
  intens.mu_decoy = a.d;
  intens.mu_vacuum = a.v;
  intens.pulses_per_packet = a.L;
  try {
    intens.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid intensities: " << e.what() << "\n";
    return 2;
  }
  const auto opt = solver_options(a.common);
  Table t;
  t.header = {"Y0", "Y1", "E1", "R1", "R2"};
  bool failed = false;
  for (const auto& row : csv.rows) {
    if (row.size() != expected.size()) {
      std::cerr << "bad observation row (need 5 fields)\n";
      return 2;
    }
    rrdps::DecoyObservations obs;
    try {
      obs.gain_signal = std::stod(row[0]);
      obs.error_signal = std::stod(row[1]);
      obs.gain_decoy = std::stod(row[2]);
      obs.error_decoy = std::stod(row[3]);
      obs.gain_vacuum = std::stod(row[4]);
      obs.validate();
    } catch (const std::exception& e) {
      std::cerr << "bad observation row: " << e.what() << "\n";
      return 2;
    }
    const auto est = rrdps::estimate_single_photon(intens, obs);
    if (!est.estimates) {
      std::cerr << "estimation failure: " << est.failure << "\n";
      t.rows.push_back({absent(), absent(), absent(), absent(), absent()});
      failed = true;
      continue;
    }
    const auto r1 = rrdps::experimental_key_rate(
        intens, obs, *est.estimates,
        rrdps::ExperimentalRateMode::WithoutErrorRate, a.ec_f, opt);
    const auto r2 = rrdps::experimental_key_rate(
        intens, obs, *est.estimates, rrdps::ExperimentalRateMode::WithErrorRate,
        a.ec_f, opt);
    t.rows.push_back({cell(est.estimates->yield_vacuum),
                      cell(est.estimates->yield_single),
                      cell(est.estimates->error_single), cell_opt(r1),
                      cell_opt(r2)});
  }
  const int rc = emit(t, a.common);
  if (rc != 0) return rc;
  return failed ? 1 : 0;
}

// ---- oracle-verify ---------------------------------------------------------

struct OracleArgs {
  int L = 3;
  std::uint64_t trials = 1000;
  CommonOpts common;
};

int run_oracle_verify(const OracleArgs& a) {
  if (a.L < 2) {
    std::cerr << "oracle-verify requires L >= 2\n";
    return 2;
  }
  const auto result = rrdps::run_attack_trials(
      a.L, a.trials, a.common.seed, rrdps::Exec::Parallel,
      solver_options(a.common));
  Table t;
  t.header = {"trial", "E", "I", "bound"};
  for (const auto& p : result.scatter) {
    t.rows.push_back({cell(static_cast<std::int64_t>(p.trial)), cell(p.error),
                      cell(p.info), cell(p.bound)});
  }
  const int rc = emit(t, a.common);
  if (rc != 0) return rc;
  std::cerr << "violations=" << result.violations
            << " worst_slack=" << (a.trials ? result.worst_slack : 0.0)
            << " trials=" << a.trials << "\n";
  return result.violations > 0 ? 1 : 0;
}

// ---- recompute-l65 ---------------------------------------------------------

int run_recompute_l65(const CommonOpts& common) {
  const auto res = rrdps::recompute_l65(solver_options(common));
  Table t;
  t.header = {"R1", "R2", "iae10"};
  t.rows.push_back({cell(res.r1), cell(res.r2), cell(res.iae_10photon)});
  return emit(t, common);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RRDPS security-analysis toolkit"};
  app.require_subcommand(1);

  BoundArgs bound_args;
  auto* bound = app.add_subcommand(
      "bound", "Eavesdropper-information bound for one (L, N) query");
  bound->add_option("--L", bound_args.L, "Pulses per packet")->required();
  bound->add_option("--N", bound_args.N, "Photon number")->required();
  bound->add_option("--mode", bound_args.mode,
                    "original | unconstrained | constrained");
  bound->add_option("--error", bound_args.error,
                    "Observed QBER (constrained mode)");
  add_common(bound, bound_args.common);

  ToleranceArgs tol_args;
  auto* tolerance = app.add_subcommand(
      "tolerance", "Maximum tolerable error rate per packet length");
  tolerance->add_option("--L", tol_args.L, "Packet lengths")
      ->required()
      ->delimiter(',');
  tolerance->add_option("--N", tol_args.N, "Photon number (default 1)");
  tolerance->add_option("--mode", tol_args.mode,
                        "all | original | unconstrained | constrained");
  add_common(tolerance, tol_args.common);

  SweepArgs sweep_args;
  auto* rate_sweep = app.add_subcommand(
      "rate-sweep", "Secret-key rate versus channel loss");
  rate_sweep->add_option("--L", sweep_args.L, "Packet lengths")
      ->required()
      ->delimiter(',');
  rate_sweep->add_option("--loss-start", sweep_args.loss_start, "dB");
  rate_sweep->add_option("--loss-stop", sweep_args.loss_stop, "dB")
      ->required();
  rate_sweep->add_option("--loss-step", sweep_args.loss_step, "dB");
  rate_sweep->add_option("--e-mis", sweep_args.e_mis, "Misalignment");
  rate_sweep->add_option("--dark", sweep_args.dark, "Dark-count rate");
  rate_sweep->add_option("--ec-f", sweep_args.ec_f,
                         "Error-correction inefficiency");
  rate_sweep
      ->add_option("--variants", sweep_args.variants,
                   "original, proposed, bb84, decoy")
      ->required()
      ->delimiter(',');
  rate_sweep->add_option("--mu", sweep_args.fixed_mu,
                         "Fix mu instead of optimizing");
  rate_sweep->add_option("--nu-th", sweep_args.fixed_nu_th,
                         "Fix nu_th instead of optimizing");
  add_common(rate_sweep, sweep_args.common);

  DecoyArgs decoy_args;
  auto* decoy = app.add_subcommand(
      "decoy", "Single-photon estimates and key rates from observations");
  decoy->add_option("--file", decoy_args.file,
                    "CSV with header Qs,Es,Qd,Ed,Qv")
      ->required();
  decoy->add_option("--s", decoy_args.s, "Signal intensity per pulse")
      ->required();
  decoy->add_option("--d", decoy_args.d, "Decoy intensity per pulse")
      ->required();
  decoy->add_option("--v", decoy_args.v, "Vacuum intensity per pulse")
      ->required();
  decoy->add_option("--L", decoy_args.L, "Pulses per packet")->required();
  decoy->add_option("--ec-f", decoy_args.ec_f,
                    "Error-correction inefficiency");
  add_common(decoy, decoy_args.common);

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand(
      "oracle-verify",
      "Random single-photon attacks against the constrained bound");
  oracle->add_option("--L", oracle_args.L, "Pulses per packet")->required();
  oracle->add_option("--trials", oracle_args.trials, "Number of attacks");
  add_common(oracle, oracle_args.common);

  CommonOpts l65_common;
  auto* l65 = app.add_subcommand("recompute-l65",
                                 "Key rates for the published L=65 data set");
  add_common(l65, l65_common);

  std::vector<std::string> args(argv + 1, argv + argc);
  if (!expand_config(args)) return 2;
  // CLI11 consumes arguments back to front
  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (bound->parsed()) return run_bound(bound_args);
    if (tolerance->parsed()) return run_tolerance(tol_args);
    if (rate_sweep->parsed()) return run_rate_sweep(sweep_args);
    if (decoy->parsed()) return run_decoy(decoy_args);
    if (oracle->parsed()) return run_oracle_verify(oracle_args);
    if (l65->parsed()) return run_recompute_l65(l65_common);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
