#pragma once

// Accuracy of protocols under uniform inputs (exhaustive or sampled), averaging
// over randomized families, and the bound reports that tie accuracy, the DS
// fixed size and communication together.

#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pclab/core.hpp"
#include "pclab/density.hpp"
#include "pclab/ds.hpp"
#include "pclab/parallel.hpp"
#include "pclab/protocol.hpp"
#include "pclab/rng.hpp"
#include "pclab/upper_bounds.hpp"

namespace pclab {

enum class AccuracyMode { exact, monte_carlo };

inline const char* to_string(AccuracyMode m) { return m == AccuracyMode::exact ? "exact" : "monte-carlo"; }

struct AccuracyResult {
  double value = 0.0;
  AccuracyMode mode = AccuracyMode::exact;
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;     // monte-carlo trials
  double stderr_ = 0.0;          // monte-carlo only
  std::uint64_t pair_count = 0;  // exact only

  Rational exact() const { return Rational(hits, mode == AccuracyMode::exact ? pair_count : samples); }
  // Lower end used when accuracy sits on the left of an upper bound.
  double conservative_low() const { return mode == AccuracyMode::exact ? value : value - 3.0 * stderr_; }
};

inline FunctionTable random_table(int n, Rng& rng) {
  std::vector<Label> v(n);
  for (auto& x : v) x = static_cast<Label>(rng.below(static_cast<std::uint64_t>(n))) + 1;
  return FunctionTable(std::move(v));
}

inline AccuracyResult exact_accuracy(const ProtocolSpec& spec, const Budget& budget = Budget::from_env(),
                                     unsigned threads = 1) {
  const ProblemParams& p = spec.params();
  require_pair_budget(p.n, budget);
  const auto& tables = enumerate_tables(p.n, Budget::unlimited());
  auto hits = parallel_map(tables.size(), threads, [&](std::size_t a) {
    std::uint64_t h = 0;
    for (const auto& fb : tables) h += run(spec, tables[a], fb).output == eval_pc(p, tables[a], fb);
    return h;
  });
  AccuracyResult r;
  r.mode = AccuracyMode::exact;
  for (auto h : hits) r.hits += h;
  r.pair_count = static_cast<std::uint64_t>(tables.size()) * tables.size();
  r.value = static_cast<double>(r.hits) / static_cast<double>(r.pair_count);
  return r;
}

inline AccuracyResult mc_from_hits(std::uint64_t hits, std::uint64_t samples) {
  AccuracyResult r;
  r.mode = AccuracyMode::monte_carlo;
  r.hits = hits;
  r.samples = samples;
  r.value = static_cast<double>(hits) / static_cast<double>(samples);
  r.stderr_ = std::sqrt(r.value * (1.0 - r.value) / static_cast<double>(samples));
  return r;
}

inline AccuracyResult mc_accuracy(const ProtocolSpec& spec, std::uint64_t samples, std::uint64_t seed,
                                  unsigned threads = 1) {
  if (samples < 1) throw std::invalid_argument("samples must be at least 1");
  const ProblemParams& p = spec.params();
  auto hits = parallel_map(samples, threads, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    FunctionTable fa = random_table(p.n, rng), fb = random_table(p.n, rng);
    return static_cast<std::uint64_t>(run(spec, fa, fb).output == eval_pc(p, fa, fb));
  });
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  return mc_from_hits(total, samples);
}

using ProtocolFamily = std::function<ProtocolSpec(std::uint64_t public_seed)>;

// Trial (i, j) uses public seed derive(seed, 2i) and inputs derive(derive(seed, 2i+1), j).
inline AccuracyResult randomized_accuracy(const ProtocolFamily& family, const ProblemParams& params,
                                          std::uint64_t public_seeds, std::uint64_t input_samples,
                                          std::uint64_t seed, unsigned threads = 1) {
  if (public_seeds < 1 || input_samples < 1) throw std::invalid_argument("need at least one seed and one input");
  auto hits = parallel_map(public_seeds, threads, [&](std::size_t i) {
    const ProtocolSpec spec = family(derive_seed(seed, 2 * i));
    if (spec.params() != params) throw std::invalid_argument("family produced a spec with different (n, k)");
    const std::uint64_t input_base = derive_seed(seed, 2 * i + 1);
    std::uint64_t h = 0;
    for (std::uint64_t j = 0; j < input_samples; ++j) {
      Rng rng(derive_seed(input_base, j));
      FunctionTable fa = random_table(params.n, rng), fb = random_table(params.n, rng);
      h += run(spec, fa, fb).output == eval_pc(params, fa, fb);
    }
    return h;
  });
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  return mc_from_hits(total, public_seeds * input_samples);
}

struct NwProfile {
  std::uint64_t trials = 0;
  std::uint64_t errors = 0;
  std::uint64_t skips = 0;
  std::uint64_t errors_after_skip = 0;
  std::uint64_t cost_mismatches = 0;  // transcript length != declared cost
  double error_rate() const { return trials ? static_cast<double>(errors) / static_cast<double>(trials) : 0.0; }
};

// One fresh public seed and one uniform input per trial.
inline NwProfile nw_profile(const ProblemParams& params, int m, std::uint64_t trials, std::uint64_t seed,
                            unsigned threads = 1) {
  struct Trial {
    bool error = false, skip = false, cost_ok = true;
  };
  auto rows = parallel_map(trials, threads, [&](std::size_t i) {
    NwPlan plan(params, m, derive_seed(seed, 2 * i));
    const ProtocolSpec spec = nw_protocol(params, m, plan.public_seed());
    Rng rng(derive_seed(seed, 2 * i + 1));
    FunctionTable fa = random_table(params.n, rng), fb = random_table(params.n, rng);
    RunResult res = run(spec, fa, fb);
    Trial t;
    t.error = res.output != eval_pc(params, fa, fb);
    t.skip = plan.skip_round(res.transcript.view()).has_value();
    t.cost_ok = res.cc == plan.cost();
    return t;
  });
  NwProfile p;
  p.trials = trials;
  for (const auto& t : rows) {
    p.errors += t.error;
    p.skips += t.skip;
    p.errors_after_skip += t.error && t.skip;
    p.cost_mismatches += !t.cost_ok;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Bound reports

struct Constant {
  std::string name;
  std::string formula;
  double value = 0.0;
};

struct Inequality {
  std::string name;
  std::string lhs_formula;
  std::string rhs_formula;
  double lhs = 0.0;
  double rhs = 0.0;
  bool applicable = true;
  bool pass = true;
  std::string note;
  double margin() const { return rhs - lhs; }
};

struct BoundReport {
  std::string title;
  int n = 2, k = 1;
  double gamma = 0.0;
  std::size_t cc = 0;
  int rounds = 0;
  std::vector<Constant> constants;
  std::vector<Inequality> checks;
  std::vector<std::string> notes;

  bool ok() const {
    for (const auto& c : checks)
      if (c.applicable && !c.pass) return false;
    return true;
  }
};

struct ReportConfig {
  std::size_t runs = 1000;           // DS runs
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::uint64_t mc_samples = 20000;  // accuracy samples when exhaustive is out of budget
  Budget budget = Budget::from_env();
};

// Largest parity class times n^-gamma: the per-leaf accuracy cap. Equals
// n^{1-gamma}/2 for even n.
inline double parity_class_cap(int n, double gamma) {
  const int odd = (n + 1) / 2;
  return static_cast<double>(odd) * std::pow(static_cast<double>(n), -gamma);
}

inline double parity_class_cap_for(int n, double gamma, int bit) {
  const int count = bit ? (n + 1) / 2 : n / 2;
  return static_cast<double>(count) * std::pow(static_cast<double>(n), -gamma);
}

inline std::vector<Constant> gamma_constants(int n, double gamma) {
  const double nd = static_cast<double>(n);
  return {{"gamma", "1 - 0.1/log2(n)", gamma},
          {"n^(1-gamma)/2", "n^(1-gamma)/2", std::pow(nd, 1.0 - gamma) / 2.0},
          {"n^-gamma", "n^(-gamma)", std::pow(nd, -gamma)},
          {"parity_cap", "ceil(n/2)*n^(-gamma)", parity_class_cap(n, gamma)},
          {"fixed_size_factor", "3/((1-gamma)*log2(n))", 3.0 / ((1.0 - gamma) * std::log2(nd))}};
}

inline bool lower_bound_setting(const ProtocolSpec& spec) {
  return spec.alice_first() && spec.rounds() <= spec.params().k - 1;
}

inline AccuracyResult measured_accuracy(const ProtocolSpec& spec, const ReportConfig& cfg) {
  try {
    return exact_accuracy(spec, cfg.budget, cfg.threads);
  } catch (const budget_error&) {
    return mc_accuracy(spec, cfg.mc_samples, derive_seed(cfg.seed, 0xacc), cfg.threads);
  }
}

inline std::string accuracy_formula(const AccuracyResult& a) {
  return a.mode == AccuracyMode::exact ? "Pr[output = PC_k] over all pairs (exact)"
                                       : "Pr[output = PC_k] sampled, mean - 3*stderr";
}

// Everything DS-derived that the reports share.
struct DsSummary {
  bool available = false;
  std::string reason;              // why DS was not run
  std::size_t padded_depth = 0;
  std::vector<DsOutcome> outcomes;
  Estimate fixed;
  Estimate bad;
};

inline DsSummary summarize_ds(const ProtocolSpec& spec, const DensityParams& params, const ReportConfig& cfg) {
  DsSummary s;
  if (!spec.alice_first()) {
    s.reason = "protocol does not start with Alice";
    return s;
  }
  if (table_count(spec.params().n) > cfg.budget.max_tables) {
    s.reason = "DS needs n^n = " + std::to_string(table_count(spec.params().n)) + " tables, over the table budget";
    return s;
  }
  const ProtocolSpec padded = pad_rounds(spec, spec.params().k);
  s.available = true;
  s.padded_depth = padded.depth();
  s.outcomes = ds_batch(padded, params, cfg.runs, cfg.seed, cfg.threads);
  s.fixed = estimate_avg_fixed_size(s.outcomes, spec.params().n);
  s.bad = estimate_bad_prob(s.outcomes);
  return s;
}

inline BoundReport report_header(const std::string& title, const ProtocolSpec& spec, const DensityParams& params) {
  BoundReport r;
  r.title = title;
  r.n = spec.params().n;
  r.k = spec.params().k;
  r.gamma = params.gamma;
  r.cc = spec.depth();
  r.rounds = spec.rounds();
  r.constants = gamma_constants(r.n, r.gamma);
  return r;
}

inline Inequality not_applicable(std::string name, std::string why) {
  Inequality q;
  q.name = std::move(name);
  q.applicable = false;
  q.note = std::move(why);
  return q;
}

// accuracy <= cap + n^-gamma (k-1) E[fixed size].
inline BoundReport accuracy_vs_fixed_size_report(const ProtocolSpec& spec, const DensityParams& params,
                                                 const DsSummary& ds, const AccuracyResult& acc) {
  BoundReport r = report_header("accuracy vs average fixed size", spec, params);
  if (!lower_bound_setting(spec)) {
    r.checks.push_back(not_applicable("accuracy_bound", "round precondition unmet (needs Alice first, <= k-1 rounds)"));
    return r;
  }
  if (!ds.available) {
    r.checks.push_back(not_applicable("accuracy_bound", ds.reason));
    return r;
  }
  const double n_gamma = std::pow(static_cast<double>(r.n), -r.gamma);
  Inequality q;
  q.name = "accuracy_bound";
  q.lhs_formula = accuracy_formula(acc);
  q.rhs_formula = "ceil(n/2)*n^(-gamma) + n^(-gamma)*(k-1)*(E[fixed] + 3*stderr)";
  q.lhs = acc.conservative_low();
  q.rhs = parity_class_cap(r.n, r.gamma) + n_gamma * (r.k - 1) * (ds.fixed.mean + 3.0 * ds.fixed.stderr_);
  q.pass = q.lhs <= q.rhs + params.eps;
  r.checks.push_back(q);
  r.notes.push_back("DS ran on the protocol padded to k rounds (depth " + std::to_string(ds.padded_depth) + ", " +
                    std::to_string(ds.outcomes.size()) + " runs)");
  if (r.n % 2 == 1) r.notes.push_back("odd n: first term is ceil(n/2)*n^(-gamma), which exceeds n^(1-gamma)/2");
  return r;
}

// Per leaf outcome with bad = false: accuracy over R <= (#labels of the leaf's parity) * n^-gamma.
inline BoundReport leaf_accuracy_report(const ProtocolSpec& spec, const DensityParams& params, const DsSummary& ds) {
  BoundReport r = report_header("leaf accuracy when bad is false", spec, params);
  if (!lower_bound_setting(spec)) {
    r.checks.push_back(not_applicable("leaf_accuracy", "round precondition unmet (needs Alice first, <= k-1 rounds)"));
    return r;
  }
  if (!ds.available) {
    r.checks.push_back(not_applicable("leaf_accuracy", ds.reason));
    return r;
  }
  const int n = r.n;
  const ProblemParams& p = spec.params();
  const auto& tables = enumerate_tables(n, Budget::unlimited());
  std::size_t checked = 0, excluded = 0, failures = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  Inequality worst;
  for (const auto& o : ds.outcomes) {
    if (o.bad) {
      ++excluded;
      continue;
    }
    ++checked;
    std::uint64_t hits = 0;
    for (TableIndex a : o.R.x.members)
      for (TableIndex b : o.R.y.members) hits += eval_pc(p, tables[a], tables[b]) == o.output;
    Inequality q;
    q.name = "leaf_accuracy";
    q.lhs_formula = "Pr_{(fA,fB) in R}[leaf output = PC_k]";
    q.rhs_formula = "#{labels with the leaf's parity}*n^(-gamma)";
    q.lhs = static_cast<double>(hits) / static_cast<double>(o.R.size());
    q.rhs = parity_class_cap_for(n, r.gamma, o.output);
    q.pass = q.lhs <= q.rhs + params.eps;
    if (o.r != p.k) {
      q.pass = false;
      q.note = "DS ended in round " + std::to_string(o.r) + ", expected k";
    }
    failures += !q.pass;
    if (q.margin() < worst_margin || !q.pass) {
      worst_margin = q.margin();
      worst = q;
    }
  }
  if (checked == 0) {
    r.checks.push_back(not_applicable("leaf_accuracy", "every sampled outcome had bad = true"));
  } else {
    worst.note = (worst.note.empty() ? "" : worst.note + "; ") + "worst of " + std::to_string(checked) +
                 " outcomes, " + std::to_string(failures) + " failed";
    worst.pass = failures == 0;
    r.checks.push_back(worst);
  }
  r.notes.push_back(std::to_string(excluded) + " outcomes with bad = true excluded");
  Inequality cap;
  cap.name = "cap_constant";
  cap.lhs_formula = "n^(1-gamma)/2";
  cap.rhs_formula = "0.54";
  cap.lhs = std::pow(static_cast<double>(n), 1.0 - r.gamma) / 2.0;
  cap.rhs = 0.54;
  cap.pass = cap.lhs <= cap.rhs;
  r.checks.push_back(cap);
  return r;
}

// Pr[bad] <= n^-gamma (k-1) E[fixed size].
inline BoundReport bad_probability_report(const ProtocolSpec& spec, const DensityParams& params, const DsSummary& ds) {
  BoundReport r = report_header("probability of bad", spec, params);
  if (!lower_bound_setting(spec)) {
    r.checks.push_back(not_applicable("bad_probability", "round precondition unmet (needs Alice first, <= k-1 rounds)"));
    return r;
  }
  if (!ds.available) {
    r.checks.push_back(not_applicable("bad_probability", ds.reason));
    return r;
  }
  Inequality q;
  q.name = "bad_probability";
  q.lhs_formula = "Pr[bad] mean - 3*stderr";
  q.rhs_formula = "n^(-gamma)*(k-1)*(E[fixed] + 3*stderr)";
  q.lhs = ds.bad.mean - 3.0 * ds.bad.stderr_;
  q.rhs = std::pow(static_cast<double>(r.n), -r.gamma) * (r.k - 1) * (ds.fixed.mean + 3.0 * ds.fixed.stderr_);
  q.pass = q.lhs <= q.rhs + params.eps;
  r.checks.push_back(q);
  return r;
}

// E[fixed size] <= 3 cc / ((1-gamma) log2 n), cc of the protocol DS ran on.
inline BoundReport fixed_size_report(const ProtocolSpec& spec, const DensityParams& params, const DsSummary& ds) {
  BoundReport r = report_header("average fixed size vs communication", spec, params);
  if (!ds.available) {
    r.checks.push_back(not_applicable("fixed_size", ds.reason));
    return r;
  }
  Inequality q;
  q.name = "fixed_size";
  q.lhs_formula = "E[|comp J_A| + |comp J_B|] mean + 3*stderr";
  q.rhs_formula = "3*cc/((1-gamma)*log2(n))";
  q.lhs = ds.fixed.mean + 3.0 * ds.fixed.stderr_;
  q.rhs = 3.0 * static_cast<double>(ds.padded_depth) / ((1.0 - r.gamma) * std::log2(static_cast<double>(r.n)));
  q.pass = q.lhs <= q.rhs + params.eps;
  q.note = "cc = " + std::to_string(ds.padded_depth) + " (after padding to k rounds)";
  r.checks.push_back(q);
  return r;
}

inline constexpr double kCapConstant = 0.54;
inline constexpr double kRateConstant = 1.08;
inline constexpr double kFixedSizeConstant = 30.0;
inline constexpr double kLowerBoundConstant = 0.0039;

inline BoundReport theorem_report(const ProtocolSpec& spec, const DensityParams& params, const AccuracyResult& acc) {
  BoundReport r = report_header("main inequality chain", spec, params);
  const double nd = static_cast<double>(r.n);
  const double lg = std::log2(nd);
  r.constants.push_back({"cap", "0.54 >= n^(1-gamma)/2", kCapConstant});
  r.constants.push_back({"rate", "1.08 >= n^(1-gamma)", kRateConstant});
  r.constants.push_back({"fixed_size", "30 = 3/((1-gamma)*log2 n)", kFixedSizeConstant});
  r.constants.push_back({"lower_bound", "0.0039 < (2/3-0.54)/(1.08*30)", kLowerBoundConstant});

  auto push = [&](std::string name, std::string lf, std::string rf, double l, double rr, bool pass) {
    Inequality q;
    q.name = std::move(name);
    q.lhs_formula = std::move(lf);
    q.rhs_formula = std::move(rf);
    q.lhs = l;
    q.rhs = rr;
    q.pass = pass;
    r.checks.push_back(q);
  };
  const double cap = std::pow(nd, 1.0 - r.gamma) / 2.0;
  const double rate = std::pow(nd, 1.0 - r.gamma);
  const double factor = 3.0 / ((1.0 - r.gamma) * lg);
  const double implied = (2.0 / 3.0 - kCapConstant) / (kRateConstant * kFixedSizeConstant);
  push("cap_constant", "n^(1-gamma)/2", "0.54", cap, kCapConstant, cap <= kCapConstant);
  push("rate_constant", "n^(1-gamma)", "1.08", rate, kRateConstant, rate <= kRateConstant);
  push("fixed_size_constant", "3/((1-gamma)*log2 n)", "30", factor, kFixedSizeConstant,
       std::abs(factor - kFixedSizeConstant) <= 1e-9);
  push("lower_bound_constant", "0.0039", "(2/3-0.54)/(1.08*30)", kLowerBoundConstant, implied,
       kLowerBoundConstant < implied);

  if (!lower_bound_setting(spec)) {
    r.checks.push_back(not_applicable("cc_lower_bound", "round precondition unmet (needs Alice first, <= k-1 rounds)"));
    return r;
  }
  if (r.k < 2) {
    r.checks.push_back(not_applicable("cc_lower_bound", "k - 1 = 0"));
    return r;
  }
  const double first = r.n % 2 == 0 ? kCapConstant : std::max(kCapConstant, parity_class_cap(r.n, r.gamma));
  Inequality chain;
  chain.name = "accuracy_chain";
  chain.lhs_formula = accuracy_formula(acc);
  chain.rhs_formula = "0.54 + (1.08*(k-1)/n)*30*cc";
  chain.lhs = acc.conservative_low();
  chain.rhs = first + kRateConstant * (r.k - 1) / nd * kFixedSizeConstant * static_cast<double>(r.cc);
  chain.pass = chain.lhs <= chain.rhs + params.eps;
  if (r.n % 2 == 1) chain.note = "odd n: first term raised to ceil(n/2)*n^(-gamma)";
  r.checks.push_back(chain);

  if (acc.conservative_low() >= 2.0 / 3.0) {
    Inequality q;
    q.name = "cc_lower_bound";
    q.lhs_formula = "0.0039*n/(k-1)";
    q.rhs_formula = "cc";
    q.lhs = kLowerBoundConstant * nd / (r.k - 1);
    q.rhs = static_cast<double>(r.cc);
    q.pass = q.lhs <= q.rhs;
    q.note = "accuracy >= 2/3, so cc >= 0.0039*n/(k-1) is implied";
    r.checks.push_back(q);
  } else {
    r.checks.push_back(not_applicable("cc_lower_bound", "accuracy below 2/3, no bound implied"));
  }
  return r;
}

inline std::vector<BoundReport> full_report(const ProtocolSpec& spec, const DensityParams& params,
                                            const ReportConfig& cfg, AccuracyResult* acc_out = nullptr,
                                            DsSummary* ds_out = nullptr) {
  const AccuracyResult acc = measured_accuracy(spec, cfg);
  DsSummary ds = summarize_ds(spec, params, cfg);
  std::vector<BoundReport> out;
  out.push_back(accuracy_vs_fixed_size_report(spec, params, ds, acc));
  out.push_back(leaf_accuracy_report(spec, params, ds));
  out.push_back(bad_probability_report(spec, params, ds));
  out.push_back(fixed_size_report(spec, params, ds));
  out.push_back(theorem_report(spec, params, acc));
  if (acc_out) *acc_out = acc;
  if (ds_out) *ds_out = std::move(ds);
  return out;
}

// ---------------------------------------------------------------------------
// Output

inline nlohmann::json to_json(const AccuracyResult& a) {
  nlohmann::json j = {{"mode", to_string(a.mode)}, {"value", a.value}, {"hits", a.hits}};
  if (a.mode == AccuracyMode::exact) {
    j["pair_count"] = a.pair_count;
    j["exact"] = a.exact().str();
  } else {
    j["samples"] = a.samples;
    j["stderr"] = a.stderr_;
  }
  return j;
}

inline nlohmann::json to_json(const BoundReport& r) {
  nlohmann::json j = {{"title", r.title}, {"n", r.n},           {"k", r.k},   {"gamma", r.gamma},
                      {"cc", r.cc},       {"rounds", r.rounds}, {"ok", r.ok()}, {"notes", r.notes}};
  j["constants"] = nlohmann::json::array();
  for (const auto& c : r.constants) j["constants"].push_back({{"name", c.name}, {"formula", c.formula}, {"value", c.value}});
  j["checks"] = nlohmann::json::array();
  for (const auto& q : r.checks) {
    nlohmann::json c = {{"name", q.name}, {"applicable", q.applicable}, {"note", q.note}};
    if (q.applicable) {
      c["lhs"] = q.lhs;
      c["rhs"] = q.rhs;
      c["lhs_formula"] = q.lhs_formula;
      c["rhs_formula"] = q.rhs_formula;
      c["margin"] = q.margin();
      c["pass"] = q.pass;
    }
    j["checks"].push_back(c);
  }
  return j;
}

inline std::string fmt(double x, int precision = 6) {
  if (std::abs(x) < 0.5 * std::pow(10.0, -precision)) x = 0.0;
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << x;
  return s.str();
}

inline void print_report(std::ostream& out, const BoundReport& r) {
  out << "== " << r.title << "  (n=" << r.n << " k=" << r.k << " gamma=" << fmt(r.gamma) << " cc=" << r.cc
      << " rounds=" << r.rounds << ")\n";
  for (const auto& q : r.checks) {
    out << "  " << std::left << std::setw(22) << q.name;
    if (!q.applicable) {
      out << "n/a   " << q.note << '\n';
      continue;
    }
    out << (q.pass ? "PASS  " : "FAIL  ") << std::right << std::setw(12) << fmt(q.lhs) << " <= " << std::left
        << std::setw(12) << fmt(q.rhs) << " margin " << fmt(q.margin()) << '\n';
    out << "  " << std::setw(22) << "" << q.lhs_formula << "  <=  " << q.rhs_formula << '\n';
    if (!q.note.empty()) out << "  " << std::setw(22) << "" << q.note << '\n';
  }
  for (const auto& note : r.notes) out << "  note: " << note << '\n';
}

inline void print_constants(std::ostream& out, const std::vector<Constant>& cs) {
  for (const auto& c : cs)
    out << "  " << std::left << std::setw(20) << c.name << std::setw(14) << fmt(c.value, 7) << c.formula << '\n';
}

inline void write_ds_csv(std::ostream& out, const std::vector<DsOutcome>& outcomes, int n, std::uint64_t seed) {
  out << "run,seed,transcript,output,size_x,size_y,fixed_a,fixed_b,fixed_size,bad,r,z\n";
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    out << i << ',' << derive_seed(seed, i) << ',' << o.transcript.str() << ',' << o.output << ',' << o.R.x.size()
        << ',' << o.R.y.size() << ',' << n - static_cast<int>(o.JA.size()) << ','
        << n - static_cast<int>(o.JB.size()) << ',' << o.fixed_size(n) << ',' << (o.bad ? 1 : 0) << ',' << o.r
        << ',' << o.z << '\n';
  }
}

}  // namespace pclab
