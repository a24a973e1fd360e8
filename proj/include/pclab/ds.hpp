#pragma once

// The decomposition-and-sampling walk down a protocol tree. One iteration
// consumes one protocol bit: split the speaker's side by that bit, split again
// by the parity of the current pointer when the owner switches, then restore
// density on the speaker's side. Every split picks a part with probability
// proportional to its size.
//
// The same iteration code drives seeded sampling (ds_run) and exact branch
// enumeration (ds_enumerate); only the Chooser differs.

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include "json.hpp"

#include "pclab/core.hpp"
#include "pclab/density.hpp"
#include "pclab/parallel.hpp"
#include "pclab/protocol.hpp"
#include "pclab/rng.hpp"

namespace pclab {

using Rational = boost::multiprecision::cpp_rational;

struct invariant_violation : std::logic_error {
  using std::logic_error::logic_error;
};

struct DsState {
  Bits prefix;
  int r = 1;
  InputSet X, Y;
  Coords JA, JB;
  Label z = 1;  // pt_{r-1}, constant on X x Y
  bool bad = false;
  int t = 0;    // iterations done

  static DsState initial(int n) {
    DsState s;
    s.X = InputSet::full(n);
    s.Y = InputSet::full(n);
    for (int c = 0; c < n; ++c) s.JA.push_back(c);
    s.JB = s.JA;
    return s;
  }

  InputSet& side(Owner o) { return o == Owner::alice ? X : Y; }
  const InputSet& side(Owner o) const { return o == Owner::alice ? X : Y; }
  Coords& alive(Owner o) { return o == Owner::alice ? JA : JB; }
  const Coords& alive(Owner o) const { return o == Owner::alice ? JA : JB; }
  int fixed_size(int n) const { return 2 * n - static_cast<int>(JA.size() + JB.size()); }
};

struct IterationRecord {
  int t = 0;
  Owner owner = Owner::alice;
  int bit = 0;
  int parity_bit = -1;     // -1 when the owner did not switch
  std::size_t part = 0;
  std::size_t parts = 1;
  bool eta = false;
  int beta = 0;
  double delta = 0.0;
  double phi = 0.0;
  std::size_t size_x = 0, size_y = 0, alive_a = 0, alive_b = 0;
  int r = 1;
  Label z_prev = 1;
  Label z = 1;
  bool bad = false;
  bool checked = false;    // invariants asserted after this iteration
};

struct DsTrace {
  std::uint64_t seed = 0;
  std::vector<IterationRecord> records;
};

struct DsOutcome {
  Rectangle R;
  Coords JA, JB;
  bool bad = false;
  int output = 0;
  Label z = 1;
  int r = 1;
  Transcript transcript;
  std::optional<Rational> probability;  // exact mode

  int fixed_size(int n) const { return 2 * n - static_cast<int>(JA.size() + JB.size()); }
};

// Picks an index with probability proportional to integer weights.
class Chooser {
 public:
  virtual ~Chooser() = default;
  virtual std::size_t pick(std::span<const std::uint64_t> weights) = 0;
};

class RngChooser final : public Chooser {
 public:
  explicit RngChooser(Rng& rng) : rng_(rng) {}
  std::size_t pick(std::span<const std::uint64_t> weights) override { return rng_.pick(weights); }

 private:
  Rng& rng_;
};

// Follows a fixed choice path, extending it with the first positive-weight
// index, and accumulates the exact path probability.
class PathChooser final : public Chooser {
 public:
  explicit PathChooser(std::vector<std::size_t> path) : path_(std::move(path)) {}

  std::size_t pick(std::span<const std::uint64_t> weights) override {
    std::uint64_t total = 0;
    for (auto w : weights) total += w;
    if (total == 0) throw invariant_violation("all parts empty");
    if (pos_ == path_.size()) {
      std::size_t first = 0;
      while (weights[first] == 0) ++first;
      path_.push_back(first);
    }
    const std::size_t c = path_[pos_++];
    weights_.emplace_back(weights.begin(), weights.end());
    prob_ *= Rational(weights[c], total);
    return c;
  }

  const std::vector<std::size_t>& path() const { return path_; }
  const std::vector<std::vector<std::uint64_t>>& weights() const { return weights_; }
  const Rational& probability() const { return prob_; }

  // Next path in depth-first order over positive-weight choices; false when done.
  static bool advance(std::vector<std::size_t>& path, std::vector<std::vector<std::uint64_t>> weights) {
    while (!path.empty()) {
      const std::size_t i = path.size() - 1;
      for (std::size_t j = path[i] + 1; j < weights[i].size(); ++j)
        if (weights[i][j] > 0) {
          path[i] = j;
          return true;
        }
      path.pop_back();
      weights.pop_back();
    }
    return false;
  }

 private:
  std::vector<std::size_t> path_;
  std::size_t pos_ = 0;
  std::vector<std::vector<std::uint64_t>> weights_;
  Rational prob_{1};
};

namespace detail {

inline SubcubeSet side_subcube(const InputSet& s, const Coords& J) {
  const auto& tables = enumerate_tables(s.n, Budget::unlimited());
  SubcubeSet out{s.n, s.n, J, std::vector<Label>(s.n, 0), {}};
  out.members.reserve(s.size());
  for (TableIndex i : s.members) out.members.push_back(tables[i].values());
  if (!out.members.empty())
    for (int c : complement(J, s.n)) out.beta[c] = out.members.front()[c];
  return out;
}

inline InputSet to_input_set(int n, const std::vector<Point>& pts) {
  InputSet s{n, {}};
  for (const auto& p : pts) s.members.push_back(table_index(FunctionTable(p)));
  std::sort(s.members.begin(), s.members.end());
  return s;
}

inline const FunctionTable& table_at(int n, TableIndex i) { return enumerate_tables(n, Budget::unlimited())[i]; }

}  // namespace detail

inline double side_deficiency(const InputSet& s, const Coords& J) {
  if (s.empty()) throw invariant_violation("deficiency of an empty side");
  return deficiency(detail::side_subcube(s, J));
}

// D(X(J_A)) + D(Y(J_B)).
inline double density_function(const DsState& s) { return side_deficiency(s.X, s.JA) + side_deficiency(s.Y, s.JB); }

// Asserts the four loop invariants; throws invariant_violation.
inline void check_invariants(const ProtocolSpec& spec, const DensityParams& params, const DsState& s) {
  const int n = spec.params().n;
  if (s.X.empty() || s.Y.empty()) throw invariant_violation("empty side at t=" + std::to_string(s.t));
  const Rectangle rect = rectangle_of(spec, s.prefix, Budget::unlimited());
  if (!s.X.subset_of(rect.x) || !s.Y.subset_of(rect.y))
    throw invariant_violation("diamond: X x Y not inside the node rectangle at t=" + std::to_string(s.t));
  for (Owner o : {Owner::alice, Owner::bob}) {
    const auto sub = detail::side_subcube(s.side(o), s.alive(o));
    if (auto w = detail::find_violation(sub.members, sub.J, n, params, Budget::unlimited()))
      throw invariant_violation(std::string("club: ") + to_string(o) + " side not dense at t=" + std::to_string(s.t));
    for (const auto& p : sub.members)
      for (int c : complement(sub.J, n))
        if (p[c] != sub.beta[c])
          throw invariant_violation(std::string("heart: ") + to_string(o) + " side not fixed outside J at t=" +
                                    std::to_string(s.t));
  }
  for (TableIndex a : s.X.members)
    for (TableIndex b : s.Y.members)
      if (eval_pointer(s.r - 1, detail::table_at(n, a), detail::table_at(n, b)) != s.z)
        throw invariant_violation("spade: pt_" + std::to_string(s.r - 1) + " not constant at t=" + std::to_string(s.t));
}

// One iteration from a non-leaf state.
inline IterationRecord ds_iterate(const ProtocolSpec& spec, const DensityParams& params, DsState& s, Chooser& choose,
                                  bool check) {
  const int n = spec.params().n;
  const std::size_t depth = spec.depth();
  if (s.prefix.size() >= depth) throw std::logic_error("ds_iterate at a leaf");
  IterationRecord rec;
  rec.t = ++s.t;
  const Owner owner = spec.owner_at(s.prefix.size());
  rec.owner = owner;
  rec.z_prev = s.z;
  InputSet& side = s.side(owner);

  auto [zero, one] = split_by_next_bit(spec, side, s.prefix);
  {
    const std::uint64_t w[2] = {zero.size(), one.size()};
    rec.bit = static_cast<int>(choose.pick(w));
  }
  side = rec.bit ? std::move(one) : std::move(zero);
  s.prefix.push_back(static_cast<std::uint8_t>(rec.bit));

  rec.eta = s.prefix.size() < depth && spec.owner_at(s.prefix.size()) != owner;
  const Label z_old = s.z;
  if (rec.eta) {
    InputSet even{n, {}}, odd{n, {}};
    for (TableIndex i : side.members) (detail::table_at(n, i)(z_old) % 2 ? odd : even).members.push_back(i);
    const std::uint64_t w[2] = {even.size(), odd.size()};
    rec.parity_bit = static_cast<int>(choose.pick(w));
    side = rec.parity_bit ? std::move(odd) : std::move(even);
    ++s.r;
  }

  Coords& J = s.alive(owner);
  const auto parts = density_restoring_partition(detail::side_subcube(side, J), params, Budget::unlimited());
  std::vector<std::uint64_t> w;
  for (const auto& p : parts) w.push_back(p.part.size());
  rec.part = choose.pick(w);
  rec.parts = parts.size();
  const auto& chosen = parts[rec.part];
  side = detail::to_input_set(n, chosen.part.members);
  J = chosen.part.J;
  rec.beta = static_cast<int>(chosen.I.size());
  rec.delta = chosen.delta;

  if (rec.eta) {
    if (check && std::binary_search(J.begin(), J.end(), z_old - 1))
      throw invariant_violation("forced coordinate " + std::to_string(z_old) + " still alive after switch at t=" +
                                std::to_string(s.t));
    s.z = eval_pointer(s.r - 1, detail::table_at(n, s.X.members.front()), detail::table_at(n, s.Y.members.front()));
    const Coords& other_alive = s.alive(other(owner));
    if (!std::binary_search(other_alive.begin(), other_alive.end(), s.z - 1)) s.bad = true;
  }

  if (check) {
    check_invariants(spec, params, s);
    rec.checked = true;
  }
  rec.phi = density_function(s);
  if (rec.phi < -params.eps) throw invariant_violation("negative density function");
  rec.size_x = s.X.size();
  rec.size_y = s.Y.size();
  rec.alive_a = s.JA.size();
  rec.alive_b = s.JB.size();
  rec.r = s.r;
  rec.z = s.z;
  rec.bad = s.bad;
  return rec;
}

inline void require_ds_preconditions(const ProtocolSpec& spec) {
  if (!spec.alice_first()) throw std::invalid_argument("DS needs a protocol where Alice speaks first");
  require_table_budget(spec.params().n, Budget::from_env());
}

inline DsOutcome outcome_of(const ProtocolSpec& spec, const DsState& s) {
  DsOutcome o;
  o.R = Rectangle{s.X, s.Y, !s.X.empty() && !s.Y.empty()};
  o.JA = s.JA;
  o.JB = s.JB;
  o.bad = s.bad;
  o.output = spec.output(s.prefix);
  o.z = s.z;
  o.r = s.r;
  o.transcript.bits = s.prefix;
  return o;
}

inline std::pair<DsOutcome, DsTrace> ds_run(const ProtocolSpec& spec, const DensityParams& params, std::uint64_t seed,
                                            bool check = false) {
  params.validate();
  require_ds_preconditions(spec);
  DsState s = DsState::initial(spec.params().n);
  if (check) check_invariants(spec, params, s);
  Rng rng(seed);
  RngChooser chooser(rng);
  DsTrace trace{seed, {}};
  while (s.prefix.size() < spec.depth()) trace.records.push_back(ds_iterate(spec, params, s, chooser, check));
  return {outcome_of(spec, s), std::move(trace)};
}

// State after `iterations` seeded iterations (clamped to the depth).
inline DsState ds_state_after(const ProtocolSpec& spec, const DensityParams& params, std::uint64_t seed,
                              std::size_t iterations) {
  require_ds_preconditions(spec);
  DsState s = DsState::initial(spec.params().n);
  Rng rng(seed);
  RngChooser chooser(rng);
  for (std::size_t i = 0; i < iterations && s.prefix.size() < spec.depth(); ++i)
    ds_iterate(spec, params, s, chooser, false);
  return s;
}

struct Branch {
  DsState state;
  IterationRecord record;
  Rational probability;
};

// All outcomes of a single iteration from `s`, with exact probabilities.
inline std::vector<Branch> expand_iteration(const ProtocolSpec& spec, const DensityParams& params, const DsState& s) {
  std::vector<Branch> out;
  std::vector<std::size_t> path;
  while (true) {
    PathChooser chooser(path);
    DsState next = s;
    IterationRecord rec = ds_iterate(spec, params, next, chooser, false);
    out.push_back({std::move(next), rec, chooser.probability()});
    path = chooser.path();
    if (!PathChooser::advance(path, chooser.weights())) break;
  }
  return out;
}

inline std::vector<DsOutcome> ds_enumerate(const ProtocolSpec& spec, const DensityParams& params,
                                           const Budget& budget = Budget::from_env()) {
  params.validate();
  require_ds_preconditions(spec);
  std::vector<DsOutcome> out;
  std::uint64_t branches = 0;
  struct Frame {
    DsState state;
    Rational p;
  };
  std::vector<Frame> stack;
  stack.push_back({DsState::initial(spec.params().n), Rational(1)});
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (f.state.prefix.size() >= spec.depth()) {
      DsOutcome o = outcome_of(spec, f.state);
      o.probability = f.p;
      out.push_back(std::move(o));
      continue;
    }
    auto kids = expand_iteration(spec, params, f.state);
    branches += kids.size();
    if (branches > budget.max_branches)
      throw budget_error("exact DS enumeration exceeds branch budget " + std::to_string(budget.max_branches));
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back({std::move(it->state), f.p * it->probability});
  }
  return out;
}

struct UniformityReport {
  Rational total;                // sum of outcome probabilities
  std::uint64_t pairs = 0;
  std::uint64_t mismatched = 0;  // pairs whose mixture mass differs from 1/n^(2n)
  bool ok() const { return total == 1 && mismatched == 0; }
};

// Sum_o Pr[o] * Uniform(R_o) against Uniform([n]^n x [n]^n), exactly.
inline UniformityReport uniformity_check(int n, const std::vector<DsOutcome>& outcomes,
                                         const Budget& budget = Budget::from_env()) {
  require_pair_budget(n, budget);
  const std::uint64_t T = table_count(n);
  std::vector<Rational> mass(T * T);
  UniformityReport rep;
  for (const auto& o : outcomes) {
    if (!o.probability) throw std::invalid_argument("uniformity check needs exact outcomes");
    rep.total += *o.probability;
    const Rational each = *o.probability / Rational(o.R.size());
    for (TableIndex a : o.R.x.members)
      for (TableIndex b : o.R.y.members) mass[a * T + b] += each;
  }
  const Rational target(1, T * T);
  rep.pairs = T * T;
  for (const auto& m : mass)
    if (m != target) ++rep.mismatched;
  return rep;
}

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t runs = 0;
};

inline Estimate estimate_of(const std::vector<double>& xs) {
  Estimate e;
  e.runs = xs.size();
  if (xs.empty()) return e;
  double sum = 0.0;
  for (double x : xs) sum += x;
  e.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.mean) * (x - e.mean);
    e.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return e;
}

// Independent runs with counter-derived seeds.
inline std::vector<DsOutcome> ds_batch(const ProtocolSpec& spec, const DensityParams& params, std::size_t runs,
                                       std::uint64_t seed, unsigned threads = 1, bool check = false) {
  if (runs < 1) throw std::invalid_argument("runs must be at least 1");
  require_ds_preconditions(spec);
  return parallel_map(runs, threads, [&](std::size_t i) { return ds_run(spec, params, derive_seed(seed, i), check).first; });
}

inline Estimate estimate_avg_fixed_size(const std::vector<DsOutcome>& outcomes, int n) {
  std::vector<double> xs;
  for (const auto& o : outcomes) xs.push_back(o.fixed_size(n));
  return estimate_of(xs);
}

inline Estimate estimate_bad_prob(const std::vector<DsOutcome>& outcomes) {
  std::vector<double> xs;
  for (const auto& o : outcomes) xs.push_back(o.bad ? 1.0 : 0.0);
  return estimate_of(xs);
}

inline Estimate estimate_avg_fixed_size(const ProtocolSpec& spec, const DensityParams& params, std::size_t runs,
                                        std::uint64_t seed, unsigned threads = 1) {
  return estimate_avg_fixed_size(ds_batch(spec, params, runs, seed, threads), spec.params().n);
}

inline Estimate estimate_bad_prob(const ProtocolSpec& spec, const DensityParams& params, std::size_t runs,
                                  std::uint64_t seed, unsigned threads = 1) {
  return estimate_bad_prob(ds_batch(spec, params, runs, seed, threads));
}

struct IncrementReport {
  bool eta = false;
  double e_dphi = 0.0;
  double e_beta = 0.0;
  double e_delta = 0.0;
  double rhs = 0.0;  // 1 + eta + E[delta] - (1-gamma) log n E[beta]
  std::size_t branches = 0;
  bool increment_ok = true;
  bool delta_ok = true;
  bool ok() const { return increment_ok && delta_ok; }
};

// Exact expectations of one iteration from a fixed mid-run state.
inline IncrementReport conditional_increment_check(const ProtocolSpec& spec, const DensityParams& params,
                                                   const DsState& state) {
  params.validate();
  if (state.prefix.size() >= spec.depth()) throw std::invalid_argument("increment check needs a non-leaf state");
  const double phi0 = density_function(state);
  const auto kids = expand_iteration(spec, params, state);
  IncrementReport rep;
  rep.branches = kids.size();
  for (const auto& k : kids) {
    const double p = static_cast<double>(k.probability);
    rep.eta = k.record.eta;
    rep.e_dphi += p * (k.record.phi - phi0);
    rep.e_beta += p * k.record.beta;
    rep.e_delta += p * k.record.delta;
  }
  const double log_n = std::log2(static_cast<double>(spec.params().n));
  rep.rhs = 1.0 + (rep.eta ? 1.0 : 0.0) + rep.e_delta - (1.0 - params.gamma) * log_n * rep.e_beta;
  rep.increment_ok = rep.e_dphi <= rep.rhs + params.eps;
  rep.delta_ok = rep.e_delta <= kDeltaIntegralBound + params.eps;
  return rep;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json labels_json(const Coords& c) {
  auto j = nlohmann::json::array();
  for (int x : c) j.push_back(x + 1);
  return j;
}

inline nlohmann::json to_json(const IterationRecord& r) {
  return {{"type", "iteration"}, {"t", r.t},          {"owner", to_string(r.owner)},
          {"bit", r.bit},        {"parity_bit", r.parity_bit}, {"part", r.part},
          {"parts", r.parts},    {"eta", r.eta},      {"beta", r.beta},
          {"delta", r.delta},    {"phi", r.phi},      {"size_x", r.size_x},
          {"size_y", r.size_y},  {"alive_a", r.alive_a}, {"alive_b", r.alive_b},
          {"r", r.r},            {"z_prev", r.z_prev}, {"z", r.z},
          {"bad", r.bad},        {"checked", r.checked}};
}

inline nlohmann::json to_json(const DsOutcome& o, int n) {
  nlohmann::json j = {{"type", "outcome"},
                      {"transcript", o.transcript.str()},
                      {"output", o.output},
                      {"size_x", o.R.x.size()},
                      {"size_y", o.R.y.size()},
                      {"alive_a", labels_json(o.JA)},
                      {"alive_b", labels_json(o.JB)},
                      {"fixed_size", o.fixed_size(n)},
                      {"bad", o.bad},
                      {"r", o.r},
                      {"z", o.z}};
  if (o.probability) j["probability"] = o.probability->str();
  return j;
}

// One JSON object per line: the iterations, then the outcome.
inline void write_trace(std::ostream& out, const DsTrace& trace, const DsOutcome& outcome, int n,
                        std::size_t run_index) {
  for (const auto& r : trace.records) {
    auto j = to_json(r);
    j["run"] = run_index;
    j["seed"] = trace.seed;
    out << j.dump() << '\n';
  }
  auto j = to_json(outcome, n);
  j["run"] = run_index;
  j["seed"] = trace.seed;
  out << j.dump() << '\n';
}

}  // namespace pclab
