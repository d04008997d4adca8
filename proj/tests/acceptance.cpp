// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Exit status is the number of failed criteria.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qthermo/qthermo.hpp"

using namespace qthermo;

namespace {

const Matrix kModelA{{0, 1}, {2, 0}};
const Matrix kModelB{{0, 1, 0.1}, {0.1, 0, 1}, {1, 0.1, 0}};
const Matrix kRing{{0, 2, 0.1}, {0.1, 0, 1}, {1, 0.1, 0}};
const std::vector<double> kQs{0.5, 1.0, 1.5, 2.0, 3.0};

int failures = 0;

struct Criterion {
  std::string title;
  std::vector<std::string> notes;
  bool ok = true;

  explicit Criterion(std::string t) : title(std::move(t)) {}

  void check(bool cond, const std::string& what) {
    if (!cond) ok = false;
    notes.push_back(std::string(cond ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string& what) { notes.push_back("     " + what); }

  ~Criterion() {
    std::cout << (ok ? "PASS " : "FAIL ") << title << '\n';
    for (const auto& n : notes) std::cout << "    " << n << '\n';
    std::cout.flush();
    failures += !ok;
  }
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Generator gen(const Matrix& w) { return validate_generator(w); }

EvolveOptions exact() {
  EvolveOptions o;
  o.method = EvolveMethod::kUniformization;
  return o;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// 1 -------------------------------------------------------------------------
void golden_values() {
  Criterion c{"1 golden values (tol 1e-9, confirmed by reference ledger)"};
  const double tol = 1e-9;
  {
    const auto pi = stationary(gen(kModelA));
    const Distribution p{0.5, 0.5};
    const auto s = thermo_sample(p, pi, gen(kModelA), QParam(2));
    const auto ref = oracle::tsallis(kModelA, p.values(), oracle::null_space_pi(kModelA), 2.0);
    struct Row {
      const char* name;
      double lib, oracle, golden;
    };
    const Row rows[] = {{"S", s.S, ref.S, 0.5},         {"U", s.U, ref.U, 0.625},
                        {"F", s.F, ref.F, 0.125},       {"f_d", s.f_d, ref.f_d, 0.75},
                        {"e_p", s.e_p, ref.e_p, 0.5},   {"Q_ex", s.Q_ex, ref.Q_ex, 0.75},
                        {"Q_hk", s.Q_hk, ref.Q_hk, -0.25}, {"dS_dt", s.dS_dt, ref.dS, 0.0}};
    for (const auto& r : rows) {
      c.check(near(r.lib, r.golden, tol) && near(r.oracle, r.golden, tol),
              std::string("model A q=2 ") + r.name + " = " + sci(r.lib) + " (expected " + sci(r.golden) + ")");
    }
    c.check(near(pi[0], 2.0 / 3, tol) && near(pi[1], 1.0 / 3, tol), "model A pi = (2/3, 1/3)");
  }
  {
    const auto pi = stationary(gen(kModelB));
    const auto s = thermo_sample(pi, pi, gen(kModelB), QParam(2));
    const auto ref = oracle::tsallis(kModelB, pi.values(), oracle::null_space_pi(kModelB), 2.0);
    c.check(near(s.e_p, 0.54, tol) && near(s.Q_hk, 0.54, tol) && near(s.h_d, 0.54, tol) &&
                near(ref.e_p, 0.54, tol) && near(ref.Q_hk, 0.54, tol) && near(ref.h_d, 0.54, tol),
            "model B at pi q=2: e_p = Q_hk = h_d = 0.54");
    c.check(near(s.f_d, 0, tol) && near(s.Q_ex, 0, tol) && near(s.dS_dt, 0, tol) && near(ref.f_d, 0, tol) &&
                near(ref.Q_ex, 0, tol) && near(ref.dS, 0, tol),
            "model B at pi q=2: f_d = Q_ex = dS_dt = 0");
    const auto cyc = kolmogorov_cycles(gen(kModelB), 1e-9);
    c.check(cyc.cycles.size() == 1 && near(std::abs(cyc.log_ratios[0]), std::log(1000.0), tol),
            "model B cycle log ratio = ln 1000");
  }
}

// 2 and 3 share the random ensemble ----------------------------------------
struct EnsembleResult {
  double worst_printed_split = 0, worst_split = 0, worst_f = 0, worst_ep = 0, worst_balance = 0;
  double worst_dF = 0, worst_dS = 0;
  double min_fd = INFINITY, min_ep = INFINITY, min_H = INFINITY;
  std::size_t runs = 0, errors = 0;
  double seconds = 0;
  std::string first_error;
};

EnsembleResult run_ensemble() {
  EnsembleResult r;
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t m = 0; m < 100; ++m) {
    Ensemble rng(42, m);
    const Generator g = rng.generator({rng.integer(2, 6), m % 2 == 0});
    const auto p0 = rng.dirichlet(g.size());
    const double dt = finite_difference_step(g, p0);
    for (double q : kQs) {
      ++r.runs;
      try {
        const auto series = run_ledger(g, p0, QParam(q), 200 * dt, dt, exact());
        const auto diff = differential_residuals(series);
        for (std::size_t k = 0; k < series.size(); ++k) {
          const auto& s = series.samples[k];
          const auto res = residuals(s);
          r.worst_f = std::max(r.worst_f, res.free_energy);
          r.worst_ep = std::max(r.worst_ep, res.entropy_production);
          r.worst_split = std::max(r.worst_split, res.heat_split);
          r.worst_printed_split = std::max(r.worst_printed_split, res.heat_split_printed);
          r.worst_balance = std::max(r.worst_balance, res.entropy_balance);
          r.worst_dF = std::max(r.worst_dF, diff.dF[k]);
          r.worst_dS = std::max(r.worst_dS, diff.dS[k]);
          r.min_fd = std::min(r.min_fd, s.f_d);
          r.min_ep = std::min(r.min_ep, s.e_p);
          r.min_H = std::min(r.min_H, s.F);
        }
      } catch (const Error& e) {
        if (r.errors++ == 0) r.first_error = e.what();
      }
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void identity_suite(const EnsembleResult& r) {
  Criterion c{"2 identity suite (100 models x 5 q; algebraic 1e-10, differential 1e-5, < 60 s)"};
  c.check(r.errors == 0, std::to_string(r.runs) + " ledger runs, " + std::to_string(r.errors) + " errors " +
                             r.first_error);
  c.check(r.worst_f <= 1e-10, "F=U-S worst " + sci(r.worst_f));
  c.check(r.worst_ep <= 1e-10, "e_p=f_d+Q_hk worst " + sci(r.worst_ep));
  c.check(r.worst_printed_split <= 1e-10, "Q_ex=Q_hk-h_d worst " + sci(r.worst_printed_split));
  c.note("Q_ex=h_d-Q_hk worst " + sci(r.worst_split) + " (sign-corrected split, reported alongside)");
  c.check(r.worst_balance <= 1e-10, "dS_dt=f_d-Q_ex worst " + sci(r.worst_balance));
  c.check(r.worst_dF <= 1e-5, "dF/dt=-f_d worst " + sci(r.worst_dF));
  c.check(r.worst_dS <= 1e-5, "dS/dt=f_d-Q_ex (finite differences) worst " + sci(r.worst_dS));
  c.check(r.seconds < 60.0, "runtime " + sci(r.seconds) + " s");
}

void inequality_suite(const EnsembleResult& r) {
  Criterion c{"3 inequality suite"};
  c.check(r.min_fd >= -1e-12, "min f_d over ensemble " + sci(r.min_fd));
  c.check(r.min_ep >= -1e-12, "min e_p over ensemble " + sci(r.min_ep));
  c.check(r.min_H >= -1e-12, "min H_q(p||pi) over ensemble " + sci(r.min_H));

  double worst_uptick = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    Ensemble rng(1313, s);
    const Generator g = rng.generator({rng.integer(2, 6), s % 2 == 0});
    const double t = 5.0 / g.min_positive_rate();
    const auto h = h_theorem_pair(g, rng.dirichlet(g.size()), rng.dirichlet(g.size()), QParam(kQs[s % 5]), t,
                                  t / 100, exact());
    worst_uptick = std::max(worst_uptick, h.max_uptick);
  }
  c.check(worst_uptick <= 1e-9, "H-theorem, 50 trajectory pairs, max uptick " + sci(worst_uptick));

  double worst_gap = INFINITY;
  for (double q : {1.5, 2.0, 3.0}) {
    Ensemble rng(909, static_cast<std::uint64_t>(q * 10));
    for (int k = 0; k < 500; ++k) {
      const std::size_t m = rng.integer(2, 5), n = rng.integer(2, 5);
      Matrix cond(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < cond.rows(); ++i) cond.row(i) = rng.dirichlet(n).values().transpose();
      worst_gap = std::min(worst_gap, conditional_entropy_gap(JointDistribution(rng.dirichlet(m), cond), QParam(q)).gap);
    }
  }
  c.check(worst_gap >= -1e-12, "conditional-entropy gap, 500 joints per q, min " + sci(worst_gap));

  double max_excess = -INFINITY, expand = 0;
  for (std::size_t n = 2; n <= 6; ++n) {
    for (double q : kQs) {
      const double top = tsallis_entropy(Distribution::uniform(n), QParam(q));
      Ensemble rng(n, static_cast<std::uint64_t>(q * 10));
      for (int k = 0; k < 1000; ++k) {
        const auto p = rng.dirichlet(n);
        max_excess = std::max(max_excess, tsallis_entropy(p, QParam(q)) - top);
        std::vector<double> padded(p.values().data(), p.values().data() + n);
        padded.push_back(0.0);
        expand = std::max(expand, std::abs(tsallis_entropy(Distribution::from(padded), QParam(q)) -
                                           tsallis_entropy(p, QParam(q))));
      }
    }
  }
  c.check(max_excess <= 1e-12, "maximum at uniform: max S(p) - S(uniform) " + sci(max_excess));
  c.check(expand <= 1e-12, "expansibility: max |S(p,0) - S(p)| " + sci(expand));
}

// 4 -------------------------------------------------------------------------
std::string capture(const std::string& args, int& code) {
  const std::string cmd = std::string(QTHERMO_BIN) + " " + args;
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    code = -1;
    return out;
  }
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  const int status = pclose(pipe);
  code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

void claim_search_criterion() {
  Criterion c{"4 claim search"};
  int code = 0;
  const std::string out = capture("search --claim qhk-nonneg --trials 1000 --seed 0", code);
  std::istringstream lines(out);
  std::size_t count = 0, reproduced = 0, bit_exact = 0;
  double most_negative = 0;
  bool db_two_state_q2 = false;
  for (std::string line; std::getline(lines, line);) {
    const auto f = finding_from_json(nlohmann::json::parse(line));
    ++count;
    const double again = replay(f);
    bit_exact += again == f.observed;
    reproduced += again < -1e-3;
    most_negative = std::min(most_negative, again);
    db_two_state_q2 |= f.detailed_balance && f.rates.rows() == 2 && f.q == 2.0;
  }
  c.check(code == 5 && count > 0, "search --claim qhk-nonneg: " + std::to_string(count) + " violations, exit " +
                                      std::to_string(code));
  c.check(reproduced > 0 && bit_exact == count,
          "replayed from recorded inputs: " + std::to_string(reproduced) + " with Q_hk < -1e-3, most negative " +
              sci(most_negative) + ", " + std::to_string(bit_exact) + "/" + std::to_string(count) + " bit-identical");
  c.note(std::string("detailed-balance 2-state q=2 instance present: ") + (db_two_state_q2 ? "yes" : "no"));

  for (Claim claim : {Claim::kFdNonneg, Claim::kEpNonneg}) {
    SearchOptions o;
    o.claim = claim;
    o.trials = 10000;
    o.seed = 0;
    const auto found = claim_search(o);
    c.check(found.empty(), std::string(claim_name(claim)) + ", 10000 trials: " + std::to_string(found.size()) +
                               " violations");
  }
}

// 5 -------------------------------------------------------------------------
std::array<double, 9> terms(const ThermoSample& s) {
  return {s.S, s.U, s.F, s.f_d, s.e_p, s.Q_ex, s.Q_hk, s.h_d, s.dS_dt};
}

std::array<double, 9> terms(const oracle::Ledger& s) { return {s.S, s.U, s.F, s.f_d, s.e_p, s.Q_ex, s.Q_hk, s.h_d, s.dS}; }

constexpr std::array<const char*, 9> kTermNames{"S", "U", "F", "f_d", "e_p", "Q_ex", "Q_hk", "h_d", "dS_dt"};

struct Drift {
  double worst = 0;
  std::size_t term = 0;
  std::size_t point = 0;

  void see(const ThermoSample& at, const ThermoSample& off, std::size_t k) {
    const auto a = terms(at), b = terms(off);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::abs(a[i] - b[i]) > worst) {
        worst = std::abs(a[i] - b[i]);
        term = i;
        point = k;
      }
  }
};

void q_one_consistency() {
  Criterion c{"5 q -> 1 consistency (reference Gibbs/KL ledger 1e-9; q = 1 +- 1e-5 within 1e-4)"};
  const double h = 1e-5;
  const std::pair<const char*, Matrix> models[] = {{"model A", kModelA}, {"model B", kModelB}, {"ring", kRing}};
  for (const auto& [name, w] : models) {
    const Generator g = gen(w);
    const auto pi = stationary(g);
    // pi, uniform, then 20 interior points
    std::vector<Distribution> points{pi, Distribution::uniform(g.size())};
    Ensemble rng(55);
    for (int k = 0; k < 20; ++k) points.push_back(rng.dirichlet(g.size()));
    double worst = 0;
    Drift drift;
    for (std::size_t k = 0; k < points.size(); ++k) {
      const auto& p = points[k];
      const auto s = thermo_sample(p, pi, g, QParam(1.0));
      const auto a = terms(s), b = terms(oracle::gibbs(w, p.values(), oracle::null_space_pi(w)));
      for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
      for (double q : {1.0 - h, 1.0 + h}) drift.see(s, thermo_sample(p, pi, g, QParam(q)), k);
    }
    c.check(worst <= 1e-9, std::string(name) + ": worst termwise gap to reference " + sci(worst));
    c.check(drift.worst <= 1e-4, std::string(name) + ": worst change at q = 1 +- 1e-5 " + sci(drift.worst) + " (" +
                                     kTermNames[drift.term] + ", point " + std::to_string(drift.point) + ")");
    if (drift.worst > 1e-4) {
      const auto& p = points[drift.point];
      c.note("  |d" + std::string(kTermNames[drift.term]) + "/dq| ~ " + sci(drift.worst / h) + " at p = (" + sci(p[0]) +
             ", " + sci(p[1]) + ", " + sci(p[2]) + "); the bound asks for <= " + sci(1e-4 / h));
    }
    Drift along;
    const auto series = run_ledger(g, Distribution::uniform(g.size()), QParam(1.0), 10.0, 0.1, exact());
    for (double q : {1.0 - h, 1.0 + h}) {
      const auto other = run_ledger(g, Distribution::uniform(g.size()), QParam(q), 10.0, 0.1, exact());
      for (std::size_t k = 0; k < series.size(); ++k) along.see(series.samples[k], other.samples[k], k);
    }
    c.note("  ledger from uniform start, t in [0, 10]: worst change " + sci(along.worst) + " (" +
           kTermNames[along.term] + ")");
  }
}

// 6 -------------------------------------------------------------------------
void force_identity() {
  Criterion c{"6 detailed-balance force identity (100 models x q in {1.5, 2, 3}, 1e-9 per edge)"};
  double worst = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Ensemble rng(606, s);
    const Generator g = rng.generator({rng.integer(2, 6), true});
    const auto pi = stationary(g);
    const auto p = rng.dirichlet(g.size());
    for (double q : {1.5, 2.0, 3.0}) {
      const auto db = force_db_form(p, pi, g, QParam(q));
      const auto ff = flux_force(p, pi, g, QParam(q));
      worst = std::max(worst, (db.force - ff.force).cwiseAbs().maxCoeff());
    }
  }
  c.check(worst <= 1e-9, "worst edge difference " + sci(worst));
}

// 7 -------------------------------------------------------------------------
void steady_state_limits() {
  Criterion c{"7 steady-state limits"};
  double worst_fd = 0, worst_qex = 0;
  std::vector<Matrix> models{kModelA, kModelB, kRing};
  for (std::uint64_t s = 0; s < 30; ++s) {
    Ensemble rng(808, s);
    models.push_back(rng.rates({rng.integer(2, 6), s % 2 == 0}));
  }
  Ensemble starts(17);
  for (const auto& w : models) {
    const Generator g = gen(w);
    const auto pi = stationary(g);
    const double t = 50.0 / g.min_positive_rate();
    const auto traj = evolve(g, starts.dirichlet(g.size()), t, t, exact());
    for (double q : kQs) {
      const auto sample = thermo_sample(traj.states.back(), pi, g, QParam(q));
      worst_fd = std::max(worst_fd, std::abs(sample.f_d));
      worst_qex = std::max(worst_qex, std::abs(sample.Q_ex));
    }
  }
  c.check(worst_fd <= 1e-6 && worst_qex <= 1e-6, "t = 50/min rate, " + std::to_string(models.size()) +
                                                    " models x 5 q: max |f_d| " + sci(worst_fd) + ", max |Q_ex| " +
                                                    sci(worst_qex));
  for (double q : kQs) {
    const auto t = tellegen_check(gen(kRing), QParam(q));
    c.check(std::abs(t.total) <= 1e-10 && t.max_abs_summand > 1e-3,
            "ring q=" + sci(q) + ": total " + sci(t.total) + ", largest summand " + sci(t.max_abs_summand));
  }
}

}  // namespace

int main() {
  golden_values();
  const auto ensemble = run_ensemble();
  identity_suite(ensemble);
  inequality_suite(ensemble);
  claim_search_criterion();
  q_one_consistency();
  force_identity();
  steady_state_limits();
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << '\n';
  return failures;
}
