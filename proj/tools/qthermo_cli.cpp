// qthermo: command-line front end for the generalized thermodynamic ledger.
//
// Exit codes: 0 ok, 1 invalid / failed check, 2 not irreducible,
// 3 cycle imbalance, 4 not reversible, 5 violations found, 64 usage,
// 65 malformed model file.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qthermo/qthermo.hpp"

namespace {

using namespace qthermo;

enum Exit : int {
  kOk = 0,
  kInvalid = 1,
  kNotIrreducible = 2,
  kImbalanced = 3,
  kNotReversible = 4,
  kViolations = 5,
  kUsage = 64,
  kMalformed = 65,
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kParseError: return kMalformed;
    case ErrorCode::kNotIrreducible: return kNotIrreducible;
    case ErrorCode::kNotReversible: return kNotReversible;
    default: return kInvalid;
  }
}

/// Loads and validates a model; any failure is a malformed model file.
Generator load_generator(const std::string& path) {
  try {
    return load_model(path).generator();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParseError) throw;
    throw Error(ErrorCode::kParseError, e.what());
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("not a number: '" + item + "'");
    }
  }
  if (values.empty()) throw UsageError("empty list");
  return values;
}

Distribution parse_p0(const std::string& text, const Generator& g) {
  if (text == "uniform") return Distribution::uniform(g.size());
  if (text == "stationary") return stationary(g);
  const auto values = parse_list(text);
  if (values.size() != g.size()) {
    throw UsageError("--p0 needs " + std::to_string(g.size()) + " entries");
  }
  try {
    return Distribution::from(values);
  } catch (const Error& e) {
    throw UsageError(std::string("--p0: ") + e.what());
  }
}

std::string number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

EvolveMethod parse_method(const std::string& name) {
  if (name == "rk45") return EvolveMethod::kRungeKutta45;
  if (name == "uniformization") return EvolveMethod::kUniformization;
  throw UsageError("unknown --method '" + name + "'");
}

struct LedgerArgs {
  std::string model;
  double q = 1.0;
  std::string p0 = "uniform";
  double t_end = 0.0;
  double dt_out = 0.0;
  double fd_tol = 1e-5;
  std::string method = "uniformization";
};

/// Fills unset grid parameters: spacing resolving the initial transient,
/// 200 output steps.
void default_grid(LedgerArgs& a, const Generator& g, const Distribution& p0) {
  if (a.dt_out <= 0.0) a.dt_out = finite_difference_step(g, p0);
  if (a.t_end <= 0.0) a.t_end = 200.0 * a.dt_out;
}

int cmd_validate(const std::string& path) {
  Model model;
  try {
    model = load_model(path);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return kMalformed;
  }
  nlohmann::json out{{"n", model.states.size()}};
  try {
    const Generator g = model.generator();
    out["valid"] = true;
    out["microscopically_reversible"] = g.microscopically_reversible();
    out["strongly_connected"] = g.strongly_connected();
    std::cout << out.dump(2) << '\n';
    return kOk;
  } catch (const Error& e) {
    out["valid"] = false;
    out["error"] = e.what();
    std::cout << out.dump(2) << '\n';
    return kInvalid;
  }
}

int cmd_stationary(const std::string& path, double tolerance) {
  const Generator g = load_generator(path);
  const Distribution pi = stationary(g, tolerance);
  std::cout << nlohmann::json(pi.to_vector()).dump() << '\n';
  return kOk;
}

void write_ledger_csv(std::ostream& out, const LedgerSeries& series) {
  const auto diff = differential_residuals(series);
  out << "t,S,U,F,f_d,e_p,Q_ex,Q_hk,h_d,dS_dt,res_dF,res_dS\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series.samples[k];
    out << number(series.times()[k]) << ',' << number(s.S) << ',' << number(s.U) << ',' << number(s.F) << ','
        << number(s.f_d) << ',' << number(s.e_p) << ',' << number(s.Q_ex) << ',' << number(s.Q_hk) << ','
        << number(s.h_d) << ',' << number(s.dS_dt) << ',' << number(diff.dF[k]) << ',' << number(diff.dS[k])
        << '\n';
  }
}

int cmd_simulate(LedgerArgs a, const std::string& out_path) {
  const Generator g = load_generator(a.model);
  const QParam q(a.q);
  const Distribution p0 = parse_p0(a.p0, g);
  if (output_grid(a.t_end, a.dt_out).size() < 5) throw UsageError("need at least 5 output times");
  EvolveOptions options;
  options.method = parse_method(a.method);
  const auto series = run_ledger(g, p0, q, a.t_end, a.dt_out, options);
  if (out_path.empty()) {
    write_ledger_csv(std::cout, series);
  } else {
    std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
    if (!file) throw UsageError("cannot write " + out_path);
    write_ledger_csv(file, series);
  }
  return kOk;
}

AuditReport audit_once(const Generator& g, LedgerArgs a, const QParam& q, const Distribution& p0) {
  default_grid(a, g, p0);
  EvolveOptions options;
  options.method = parse_method(a.method);
  const auto series = run_ledger(g, p0, q, a.t_end, a.dt_out, options);
  return check_identities(series, g, a.fd_tol);
}

int cmd_audit(LedgerArgs a) {
  const Generator g = load_generator(a.model);
  const QParam q(a.q);
  const Distribution p0 = parse_p0(a.p0, g);
  default_grid(a, g, p0);
  const AuditReport report = audit_once(g, a, q, p0);
  nlohmann::json out = to_json(report);
  out["q"] = a.q;
  out["t_end"] = a.t_end;
  out["dt_out"] = a.dt_out;
  out["p0"] = p0.to_vector();
  std::cout << out.dump(2) << '\n';
  return report.pass ? kOk : kInvalid;
}

int cmd_cycles(const std::string& path, double tolerance) {
  const Generator g = load_generator(path);
  const CycleReport report = kolmogorov_cycles(g, tolerance);
  std::cout << to_json(report).dump(2) << '\n';
  return report.balanced ? kOk : kImbalanced;
}

int cmd_search(const std::string& claim_text, SearchOptions options, const std::string& q_list) {
  const auto claim = parse_claim(claim_text);
  if (!claim) throw UsageError("unknown claim '" + claim_text + "'");
  options.claim = *claim;
  if (!q_list.empty()) options.q_set = parse_list(q_list);
  const auto findings = claim_search(options);
  for (const auto& f : findings) std::cout << to_json(f).dump() << '\n';
  return findings.empty() ? kOk : kViolations;
}

int cmd_sweep(LedgerArgs a, double q_min, double q_max, std::size_t steps) {
  if (steps < 1) throw UsageError("--steps must be >= 1");
  if (!(q_min > 0.0) || q_max < q_min) throw UsageError("need 0 < q-min <= q-max");
  const Generator g = load_generator(a.model);
  const Distribution p0 = parse_p0(a.p0, g);
  default_grid(a, g, p0);
  std::cout << "q,pass,res_dF,res_dS,res_F_US,res_ep,res_Qex,res_dS_balance,res_Qex_flipped,"
               "min_f_d,min_e_p,min_Q_hk,F,f_d,e_p,Q_ex,Q_hk,h_d,dS_dt\n";
  bool all_pass = true;
  for (std::size_t k = 0; k < steps; ++k) {
    const double qv = steps == 1 ? q_min : q_min + (q_max - q_min) * static_cast<double>(k) / static_cast<double>(steps - 1);
    const AuditReport r = audit_once(g, a, QParam(qv), p0);
    all_pass = all_pass && r.pass;
    std::cout << number(qv) << ',' << (r.pass ? 1 : 0);
    for (const char* name : {"dF/dt=-f_d", "dS/dt=f_d-Q_ex", "F=U-S", "e_p=f_d+Q_hk", "Q_ex=h_d-Q_hk",
                             "dS_dt=f_d-Q_ex", "Q_ex=Q_hk-h_d"}) {
      for (const auto& c : r.identities)
        if (c.name == name) std::cout << ',' << number(c.max_residual);
    }
    for (const char* name : {"f_d>=0", "e_p>=0", "Q_hk>=0"}) {
      for (const auto& o : r.inequalities)
        if (o.name == name) std::cout << ',' << number(o.worst);
    }
    const auto& s = r.initial;
    std::cout << ',' << number(s.F) << ',' << number(s.f_d) << ',' << number(s.e_p) << ',' << number(s.Q_ex) << ','
              << number(s.Q_hk) << ',' << number(s.h_d) << ',' << number(s.dS_dt) << '\n';
  }
  return all_pass ? kOk : kInvalid;
}

int cmd_gen(std::size_t states, std::uint64_t seed, bool reversible, double rate_min, double rate_max) {
  if (states < 2) throw UsageError("--states must be >= 2");
  if (!(rate_min > 0.0) || rate_max < rate_min) throw UsageError("need 0 < rate-min <= rate-max");
  Ensemble rng(seed);
  const Matrix rates = rng.rates({states, reversible, rate_min, rate_max});
  std::cout << model_to_json(rates).dump(2) << '\n';
  return kOk;
}

void add_ledger_options(CLI::App* cmd, LedgerArgs& a, bool grid_required) {
  cmd->add_option("MODEL", a.model, "model JSON file")->required();
  cmd->add_option("--q", a.q, "entropic index q > 0")->required();
  cmd->add_option("--p0", a.p0, "initial distribution: comma list, 'uniform' or 'stationary'");
  auto* t_end = cmd->add_option("--t-end", a.t_end, "final time");
  auto* dt = cmd->add_option("--dt-out", a.dt_out, "output spacing");
  if (grid_required) {
    t_end->required();
    dt->required();
  }
  cmd->add_option("--method", a.method, "rk45 or uniformization");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized (Tsallis) thermodynamics of master-equation systems"};
  app.require_subcommand(1);

  std::string model;
  double tolerance = 0.0;

  auto* validate = app.add_subcommand("validate", "check a model file");
  validate->add_option("MODEL", model)->required();

  double stationary_tol = tol::kStructural;
  auto* stat = app.add_subcommand("stationary", "print the stationary distribution as JSON");
  stat->add_option("MODEL", model)->required();
  stat->add_option("--tol", stationary_tol, "stationarity residual tolerance");

  LedgerArgs sim_args;
  sim_args.method = "rk45";
  std::string out_path;
  auto* simulate = app.add_subcommand("simulate", "write the ledger time series as CSV");
  add_ledger_options(simulate, sim_args, true);
  simulate->add_option("--out", out_path, "CSV output path (default: standard output)");

  LedgerArgs audit_args;
  auto* audit = app.add_subcommand("audit", "check every balance identity; JSON report");
  add_ledger_options(audit, audit_args, false);
  audit->add_option("--fd-tol", audit_args.fd_tol, "finite-difference tolerance");

  double cycle_tol = 1e-9;
  auto* cycles = app.add_subcommand("cycles", "Kolmogorov cycle criterion; JSON report");
  cycles->add_option("MODEL", model)->required();
  cycles->add_option("--tol", cycle_tol, "tolerance on |log ratio|");

  SearchOptions search_opts;
  std::string claim;
  std::string q_list;
  auto* search = app.add_subcommand("search", "randomized counterexample search; JSON lines");
  search->add_option("--claim", claim, "fd-nonneg, ep-nonneg, qhk-nonneg, qhk-zero-under-db, hq-nonneg")->required();
  search->add_option("--trials", search_opts.trials)->required();
  search->add_option("--seed", search_opts.seed)->required();
  search->add_option("--n-min", search_opts.n_min);
  search->add_option("--n-max", search_opts.n_max);
  search->add_option("--q", q_list, "comma-separated q values");
  search->add_option("--rate-min", search_opts.rate_min);
  search->add_option("--rate-max", search_opts.rate_max);

  LedgerArgs sweep_args;
  double q_min = 0.5;
  double q_max = 3.0;
  std::size_t steps = 6;
  auto* sweep = app.add_subcommand("sweep-q", "one audit summary row per q; CSV");
  sweep->add_option("MODEL", sweep_args.model)->required();
  sweep->add_option("--q-min", q_min)->required();
  sweep->add_option("--q-max", q_max)->required();
  sweep->add_option("--steps", steps)->required();
  sweep->add_option("--p0", sweep_args.p0);
  sweep->add_option("--t-end", sweep_args.t_end);
  sweep->add_option("--dt-out", sweep_args.dt_out);
  sweep->add_option("--fd-tol", sweep_args.fd_tol);
  sweep->add_option("--method", sweep_args.method);

  std::size_t gen_states = 3;
  std::uint64_t gen_seed = 0;
  bool gen_reversible = false;
  double rate_min = 0.05;
  double rate_max = 20.0;
  auto* gen = app.add_subcommand("gen", "random model file on standard output");
  gen->add_option("--states", gen_states)->required();
  gen->add_option("--seed", gen_seed)->required();
  gen->add_flag("--reversible", gen_reversible, "impose detailed balance");
  gen->add_option("--rate-min", rate_min);
  gen->add_option("--rate-max", rate_max);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  (void)tolerance;

  try {
    if (*validate) return cmd_validate(model);
    if (*stat) return cmd_stationary(model, stationary_tol);
    if (*simulate) return cmd_simulate(sim_args, out_path);
    if (*audit) return cmd_audit(audit_args);
    if (*cycles) return cmd_cycles(model, cycle_tol);
    if (*search) return cmd_search(claim, search_opts, q_list);
    if (*sweep) return cmd_sweep(sweep_args, q_min, q_max, steps);
    if (*gen) return cmd_gen(gen_states, gen_seed, gen_reversible, rate_min, rate_max);
  } catch (const UsageError& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return exit_for(e);
  }
  return kUsage;
}
