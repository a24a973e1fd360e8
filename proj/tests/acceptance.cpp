// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pclab/pclab.hpp"

using namespace pclab;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_s;  // 0 = no runtime limit
  std::function<Outcome()> body;
};

std::string num(double x, int p = 4) {
  std::ostringstream s;
  s.precision(p);
  s << x;
  return s.str();
}

SubcubeSet random_subcube(Rng& rng) {
  const int n = 2 + static_cast<int>(rng.below(3));
  const int M = n;
  Coords J;
  for (int c = 0; c < M; ++c)
    if (rng.below(4) != 0) J.push_back(c);
  std::vector<Label> beta(M);
  for (auto& b : beta) b = static_cast<Label>(rng.below(n)) + 1;
  const std::uint64_t cells = checked_pow(n, static_cast<int>(J.size()));
  const std::uint64_t keep = 50 + rng.below(900);
  std::vector<Point> pts;
  for (std::uint64_t c = 0; c < cells; ++c) {
    if (rng.below(1000) >= keep && !(pts.empty() && c + 1 == cells)) continue;
    Point p = beta;
    std::uint64_t x = c;
    for (std::size_t i = J.size(); i-- > 0;) {
      p[J[i]] = static_cast<Label>(x % n) + 1;
      x /= n;
    }
    pts.push_back(p);
  }
  return SubcubeSet::from_members(M, n, J, pts);
}

// Shared by criteria 4 and 5.
std::vector<double> g_partition_deltas;

Outcome upper_bound_accuracy() {
  Outcome o;
  auto check = [&](const ProtocolSpec& spec) {
    auto a = exact_accuracy(spec, Budget{});
    if (a.exact() != 1) {
      o.pass = false;
      o.detail += spec.name() + " n=" + std::to_string(spec.params().n) + " k=" + std::to_string(spec.params().k) +
                  " accuracy " + a.exact().str() + "; ";
    }
  };
  int runs = 0;
  for (int k : {3, 4, 5}) {
    check(trivial_protocol(ProblemParams(3, k)));
    check(parity_protocol(ProblemParams(3, k)));
    runs += 2;
  }
  check(trivial_protocol(ProblemParams(4, 3)));
  check(parity_protocol(ProblemParams(4, 3)));
  runs += 2;
  if (o.pass) o.detail = std::to_string(runs) + " protocol/parameter pairs exactly correct";
  return o;
}

Outcome cost_accounting() {
  Outcome o;
  std::uint64_t inputs = 0;
  auto check = [&](const ProtocolSpec& spec, std::size_t expect) {
    Rng rng(derive_seed(spec.depth(), spec.params().n));
    for (int i = 0; i < 200; ++i) {
      ++inputs;
      auto r = run(spec, random_table(spec.params().n, rng), random_table(spec.params().n, rng));
      if (r.cc != expect) {
        o.pass = false;
        o.detail = spec.name() + " measured " + std::to_string(r.cc) + " expected " + std::to_string(expect);
        return;
      }
    }
  };
  for (int n : {2, 3, 4, 5, 8, 16, 64})
    for (int k : {3, 4, 7}) {
      const ProblemParams p(n, k);
      const std::size_t w = label_bits(n);
      check(trivial_protocol(p), k * w);
      check(parity_protocol(p), 2 * n + (k - 1) * w);
      for (int m : {1, std::max(1, n / 2), default_nw_size(p)}) {
        auto spec = nw_protocol(p, m, derive_seed(n, k * 100 + m));
        check(spec, 2 * m * w + (k - 1) * w + spec.metadata().padding_bits);
      }
    }
  if (o.pass) o.detail = std::to_string(inputs) + " runs, all lengths equal the formulas";
  return o;
}

Outcome nw_error() {
  auto prof = nw_profile(ProblemParams(64, 16), 40, 10000, 2024);
  Outcome o;
  o.pass = prof.error_rate() <= 0.01 && prof.errors_after_skip == 0 && prof.cost_mismatches == 0;
  o.detail = "error " + num(prof.error_rate()) + " (" + std::to_string(prof.errors) + "/10000), skips " +
             std::to_string(prof.skips) + ", errors after skip " + std::to_string(prof.errors_after_skip);
  return o;
}

Outcome partition_guarantees() {
  Outcome o;
  Rng rng(4);
  std::size_t failures = 0, parts = 0;
  for (int i = 0; i < 1000; ++i) {
    auto s = random_subcube(rng);
    const auto params = DensityParams::for_n(s.n);
    auto ps = density_restoring_partition(s, params);
    auto rep = verify_partition(s, params, ps);
    failures += !rep.ok();
    parts += ps.size();
    g_partition_deltas.push_back(rep.expected_delta);
  }
  auto worked = density_restoring_partition(
      SubcubeSet::from_members(2, 2, {0, 1}, {{1, 1}, {1, 2}, {2, 1}}), DensityParams{0.9, 1e-9});
  const bool worked_ok = worked.size() == 2 && worked[0].delta == 0.0 && worked[1].delta == std::log2(3.0);
  o.pass = failures == 0 && worked_ok;
  o.detail = "1000 instances, " + std::to_string(parts) + " parts, " + std::to_string(failures) +
             " failures; worked example delta = (" + (worked_ok ? "0, log2 3" : "mismatch") + ")";
  return o;
}

Outcome delta_integral() {
  Outcome o;
  double worst = 0.0;
  for (double d : g_partition_deltas) worst = std::max(worst, d);
  o.pass = !g_partition_deltas.empty() && worst <= 1.443 + 1e-9;
  o.detail = "max E[delta] " + num(worst, 6) + " over " + std::to_string(g_partition_deltas.size()) + " partitions";
  return o;
}

Outcome ds_invariants() {
  Outcome o;
  std::size_t violations = 0, iterations = 0, switches = 0;
  for (std::uint64_t p = 0; p < 50; ++p) {
    Rng pick(derive_seed(6, p));
    const int depth = 1 + static_cast<int>(pick.below(6));
    const int rounds = 1 + static_cast<int>(pick.below(std::min(3, depth)));
    auto spec = random_protocol(ProblemParams(3, 3), depth, rounds, derive_seed(60, p));
    for (std::uint64_t r = 0; r < 20; ++r) {
      try {
        auto [out, trace] = ds_run(spec, DensityParams::for_n(3), derive_seed(p, r), true);
        iterations += trace.records.size();
        for (const auto& rec : trace.records) switches += rec.eta;
      } catch (const invariant_violation& e) {
        if (violations++ == 0) o.detail = e.what();
      }
    }
  }
  o.pass = violations == 0;
  if (o.pass)
    o.detail = "1000 runs, " + std::to_string(iterations) + " checked iterations, " + std::to_string(switches) +
               " round switches";
  return o;
}

Outcome ds_uniformity() {
  Outcome o;
  std::size_t protocols = 0, outcomes = 0;
  for (int depth = 1; depth <= 3; ++depth)
    for (int rounds = 1; rounds <= depth; ++rounds)
      for (std::uint64_t seed = 0; seed < 8; ++seed) {
        auto spec = random_protocol(ProblemParams(2, 3), depth, rounds, derive_seed(depth * 10 + rounds, seed));
        auto outs = ds_enumerate(spec, DensityParams::for_n(2));
        auto rep = uniformity_check(2, outs);
        ++protocols;
        outcomes += outs.size();
        if (!rep.ok()) {
          o.pass = false;
          o.detail = "depth " + std::to_string(depth) + " seed " + std::to_string(seed) + ": total " + rep.total.str() +
                     ", mismatched pairs " + std::to_string(rep.mismatched);
          return o;
        }
      }
  for (auto spec : {trivial_protocol(ProblemParams(2, 3)), parity_protocol(ProblemParams(2, 3))}) {
    ++protocols;
    auto outs = ds_enumerate(spec, DensityParams::for_n(2));
    outcomes += outs.size();
    if (!uniformity_check(2, outs).ok()) {
      o.pass = false;
      o.detail = spec.name() + " mixture not uniform";
      return o;
    }
  }
  o.detail = std::to_string(protocols) + " protocols, " + std::to_string(outcomes) + " exact outcomes, mixture uniform";
  return o;
}

std::vector<ProtocolSpec> fixed_size_protocols() {
  std::vector<ProtocolSpec> out;
  for (int n : {3, 4}) {
    const ProblemParams p(n, 3);
    out.push_back(trivial_protocol(p));
    out.push_back(parity_protocol(p));
    out.push_back(nw_protocol(p, 2, 1));
    out.push_back(random_protocol(p, 6, 3, 8));
    out.push_back(constant_protocol(p, 0));
  }
  return out;
}

Outcome fixed_size_bound() {
  Outcome o;
  double worst_ratio = 0.0;
  for (const auto& spec : fixed_size_protocols()) {
    const int n = spec.params().n;
    const auto params = DensityParams::for_n(n);
    auto e = estimate_avg_fixed_size(spec, params, 1000, derive_seed(8, n), 1);
    const double lhs = e.mean + 3 * e.stderr_;
    const double rhs = 3.0 * static_cast<double>(spec.depth()) / ((1 - params.gamma) * std::log2(static_cast<double>(n)));
    if (lhs > rhs + params.eps) {
      o.pass = false;
      o.detail = spec.name() + ": " + num(lhs) + " > " + num(rhs);
      return o;
    }
    if (rhs > 0) worst_ratio = std::max(worst_ratio, lhs / rhs);
  }
  o.detail = std::to_string(fixed_size_protocols().size()) + " protocols x 1000 runs, max lhs/rhs " + num(worst_ratio);
  return o;
}

Outcome increment() {
  Outcome o;
  const auto params = DensityParams::for_n(3);
  std::size_t states = 0;
  double worst = -1e9;
  for (std::uint64_t i = 0; states < 100; ++i) {
    Rng pick(derive_seed(9, i));
    const int depth = 2 + static_cast<int>(pick.below(5));
    const int rounds = 1 + static_cast<int>(pick.below(3));
    auto spec = random_protocol(ProblemParams(3, 3), depth, std::min(rounds, depth), derive_seed(90, i));
    const std::size_t t = pick.below(spec.depth());
    auto state = ds_state_after(spec, params, derive_seed(91, i), t);
    auto rep = conditional_increment_check(spec, params, state);
    ++states;
    worst = std::max(worst, rep.e_dphi - rep.rhs);
    if (!rep.ok()) {
      o.pass = false;
      o.detail = "state " + std::to_string(i) + ": E[dphi] " + num(rep.e_dphi) + " > " + num(rep.rhs);
      return o;
    }
  }
  o.detail = std::to_string(states) + " states, max E[dphi] - rhs = " + num(worst);
  return o;
}

Outcome reports_n4() {
  Outcome o;
  ReportConfig cfg;
  cfg.runs = 300;
  cfg.seed = 10;
  cfg.budget = Budget{};
  const ProblemParams p(4, 3);
  std::vector<ProtocolSpec> specs = {parity_protocol(p), nw_protocol(p, 2, 5), random_protocol(p, 6, 2, 3),
                                     constant_protocol(p, 1), random_protocol(p, 4, 1, 9)};
  for (const auto& spec : specs) {
    auto reps = full_report(spec, DensityParams::for_n(4), cfg);
    for (const auto& r : reps) {
      if (!r.ok()) {
        o.pass = false;
        o.detail += spec.name() + ": " + r.title + " failed; ";
      }
    }
  }
  if (o.pass) o.detail = std::to_string(specs.size()) + " protocols, 5 reports each, all pass";
  return o;
}

Outcome theorem_chain() {
  Outcome o;
  for (int n : {8, 16, 32})
    for (int k : {3, 4, 5}) {
      auto spec = parity_protocol(ProblemParams(n, k));
      auto acc = mc_accuracy(spec, 5000, derive_seed(n, k));
      auto r = theorem_report(spec, DensityParams::for_n(n), acc);
      bool lb = false;
      for (const auto& q : r.checks) lb |= q.name == "cc_lower_bound" && q.applicable && q.pass;
      bool constants = true;
      const double expect[] = {0.54, 1.08, 30.0, 0.0039};
      std::size_t idx = 0;
      for (const auto& c : r.constants)
        if (c.name == "cap" || c.name == "rate" || c.name == "fixed_size" || c.name == "lower_bound")
          constants &= idx < 4 && c.value == expect[idx++];
      if (!r.ok() || !lb || !constants || idx != 4) {
        o.pass = false;
        o.detail = "n=" + std::to_string(n) + " k=" + std::to_string(k) + " failed";
        return o;
      }
    }
  o.detail = "9 (n, k) settings; constants 0.54, 1.08, 30, 0.0039; cc >= 0.0039 n/(k-1) holds";
  return o;
}

std::string dump_report(const ProtocolSpec& spec, unsigned threads) {
  ReportConfig cfg;
  cfg.runs = 200;
  cfg.seed = 12;
  cfg.threads = threads;
  cfg.budget = Budget{};
  auto j = nlohmann::json::array();
  for (const auto& r : full_report(spec, DensityParams::for_n(spec.params().n), cfg)) j.push_back(to_json(r));
  return j.dump();
}

std::string dump_traces(const ProtocolSpec& spec, unsigned threads) {
  const auto params = DensityParams::for_n(spec.params().n);
  auto runs = parallel_map(40, threads, [&](std::size_t i) {
    auto [o, t] = ds_run(spec, params, derive_seed(12, i));
    std::ostringstream s;
    write_trace(s, t, o, spec.params().n, i);
    return s.str();
  });
  std::string all;
  for (auto& r : runs) all += r;
  return all;
}

Outcome determinism() {
  Outcome o;
  const ProblemParams p(3, 3);
  for (const auto& spec : {random_protocol(p, 6, 3, 1), parity_protocol(p)}) {
    const auto t1 = dump_traces(spec, 1), t1b = dump_traces(spec, 1), t4 = dump_traces(spec, 4);
    const auto r1 = dump_report(spec, 1), r1b = dump_report(spec, 1), r4 = dump_report(spec, 4);
    if (t1 != t1b || t1 != t4 || r1 != r1b || r1 != r4) {
      o.pass = false;
      o.detail = spec.name() + " output differs between runs";
      return o;
    }
  }
  o.detail = "traces and reports byte-identical over repeats and 1 vs 4 threads";
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "upper-bound exact accuracy", 30, upper_bound_accuracy},
      {2, "cost accounting", 0, cost_accounting},
      {3, "nw error and skip correctness", 60, nw_error},
      {4, "density-restoring partition", 60, partition_guarantees},
      {5, "delta integral bound", 0, delta_integral},
      {6, "DS loop invariants", 180, ds_invariants},
      {7, "DS exact uniformity", 0, ds_uniformity},
      {8, "average fixed size bound", 0, fixed_size_bound},
      {9, "per-iteration increment", 0, increment},
      {10, "bound reports at n=4", 0, reports_n4},
      {11, "main constant chain", 0, theorem_chain},
      {12, "determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_s > 0 && secs > c.limit_s) {
      o.pass = false;
      o.detail += " (over the " + num(c.limit_s) + " s limit)";
    }
    failed += !o.pass;
    std::printf("%s [%2d] %-32s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
