#include <gtest/gtest.h>

#include <sstream>

#include "pclab/eval.hpp"
#include "pclab/protocol_io.hpp"

using namespace pclab;

namespace {

const Inequality* find_check(const BoundReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

ReportConfig small_config(std::size_t runs = 200) {
  ReportConfig cfg;
  cfg.runs = runs;
  cfg.seed = 11;
  cfg.budget = Budget{};
  return cfg;
}

}  // namespace

TEST(Accuracy, ExactExamples) {
  EXPECT_EQ(exact_accuracy(constant_protocol(ProblemParams(3, 3), 1)).exact(), Rational(2, 3));
  EXPECT_EQ(exact_accuracy(constant_protocol(ProblemParams(3, 3), 0)).exact(), Rational(1, 3));
  for (int k : {1, 2}) EXPECT_EQ(exact_accuracy(constant_protocol(ProblemParams(4, k), 0)).exact(), Rational(1, 2));
  auto one = trivial_protocol(ProblemParams(2, 1));
  EXPECT_EQ(exact_accuracy(one).exact(), 1);
  EXPECT_THROW(exact_accuracy(trivial_protocol(ProblemParams(5, 2))), budget_error);
}

TEST(Accuracy, ExactIsThreadIndependent) {
  auto spec = random_protocol(ProblemParams(3, 3), 5, 3, 17);
  auto a = exact_accuracy(spec, Budget{}, 1), b = exact_accuracy(spec, Budget{}, 4);
  EXPECT_EQ(a.hits, b.hits);
}

TEST(Accuracy, MonteCarlo) {
  auto trivial = trivial_protocol(ProblemParams(16, 4));
  auto t = mc_accuracy(trivial, 2000, 3);
  EXPECT_EQ(t.value, 1.0);
  EXPECT_EQ(t.stderr_, 0.0);

  auto spec = random_protocol(ProblemParams(4, 3), 6, 3, 2);
  auto a = mc_accuracy(spec, 5000, 8), b = mc_accuracy(spec, 5000, 8, 3);
  EXPECT_EQ(a.hits, b.hits);
  const double exact = exact_accuracy(spec).value;
  EXPECT_NEAR(a.value, exact, 4 * std::sqrt(exact * (1 - exact) / 5000) + 1e-12);
  EXPECT_THROW(mc_accuracy(spec, 0, 1), std::invalid_argument);
}

TEST(Accuracy, MonteCarloUnbiased) {
  auto spec = constant_protocol(ProblemParams(3, 2), 1);
  double sum = 0.0;
  for (std::uint64_t s = 0; s < 30; ++s) sum += mc_accuracy(spec, 1000, s).value;
  // mean of 30 x 1000 samples: sd about 0.0027
  EXPECT_NEAR(sum / 30, 2.0 / 3.0, 0.011);
}

TEST(Accuracy, RandomizedFamilies) {
  const ProblemParams p(4, 3);
  auto full = randomized_accuracy([&](std::uint64_t s) { return nw_protocol(p, 4, s); }, p, 10, 100, 5);
  EXPECT_EQ(full.value, 1.0);
  EXPECT_EQ(full.samples, 1000u);

  auto flat = constant_protocol(p, 1);
  auto fam = randomized_accuracy([&](std::uint64_t) { return flat; }, p, 1, 700, 42);
  auto direct = mc_accuracy(flat, 700, derive_seed(42, 1));
  EXPECT_EQ(fam.hits, direct.hits);

  EXPECT_THROW(randomized_accuracy([](std::uint64_t) { return constant_protocol(ProblemParams(3, 3), 0); }, p, 1, 1, 0),
               std::invalid_argument);
}

TEST(NwProfile, SmallRun) {
  auto prof = nw_profile(ProblemParams(16, 6), default_nw_size(ProblemParams(16, 6)), 400, 1);
  EXPECT_EQ(prof.trials, 400u);
  EXPECT_EQ(prof.cost_mismatches, 0u);
  EXPECT_EQ(prof.errors_after_skip, 0u);
  EXPECT_GT(prof.skips, 300u);
}

TEST(Reports, PassAtNFour) {
  const auto params = DensityParams::for_n(4);
  for (auto spec : {parity_protocol(ProblemParams(4, 3)), random_protocol(ProblemParams(4, 3), 6, 2, 1),
                    nw_protocol(ProblemParams(4, 4), 2, 3)}) {
    auto reps = full_report(spec, params, small_config());
    ASSERT_EQ(reps.size(), 5u);
    for (const auto& r : reps) {
      EXPECT_TRUE(r.ok()) << spec.name() << ": " << r.title;
      EXPECT_EQ(r.gamma, params.gamma);
    }
  }
}

TEST(Reports, ConstantProtocolAccuracyBound) {
  auto spec = constant_protocol(ProblemParams(4, 2), 0);
  AccuracyResult acc;
  auto reps = full_report(spec, DensityParams::for_n(4), small_config(20), &acc);
  const auto* q = find_check(reps[0], "accuracy_bound");
  ASSERT_NE(q, nullptr);
  EXPECT_EQ(q->lhs, 0.5);
  EXPECT_GE(q->rhs, 0.536);
  EXPECT_TRUE(q->pass);
  EXPECT_TRUE(acc.mode == AccuracyMode::exact);
}

TEST(Reports, LeafAccuracyAtNThree) {
  const auto params = DensityParams::for_n(3);
  for (auto spec : {parity_protocol(ProblemParams(3, 3)), constant_protocol(ProblemParams(3, 3), 1),
                    random_protocol(ProblemParams(3, 4), 5, 3, 6)}) {
    auto ds = summarize_ds(spec, params, small_config(100));
    ASSERT_TRUE(ds.available);
    auto r = leaf_accuracy_report(spec, params, ds);
    const auto* q = find_check(r, "leaf_accuracy");
    ASSERT_NE(q, nullptr);
    EXPECT_TRUE(!q->applicable || q->pass) << spec.name() << " " << q->note;
  }
  // Constant 1 at n=3: every leaf hits 2/3 of its rectangle, above n^(1-gamma)/2 but below the odd-class cap.
  auto spec = constant_protocol(ProblemParams(3, 2), 1);
  auto r = leaf_accuracy_report(spec, params, summarize_ds(spec, params, small_config(1)));
  const auto* q = find_check(r, "leaf_accuracy");
  EXPECT_NEAR(q->lhs, 2.0 / 3.0, 1e-12);
  EXPECT_GT(q->lhs, std::pow(3.0, 1.0 - params.gamma) / 2.0);
  EXPECT_TRUE(q->pass);
}

TEST(Reports, RoundPreconditionFlagged) {
  auto spec = trivial_protocol(ProblemParams(4, 3));
  auto reps = full_report(spec, DensityParams::for_n(4), small_config(20));
  for (const char* name : {"accuracy_bound", "leaf_accuracy", "bad_probability", "cc_lower_bound"}) {
    const Inequality* q = nullptr;
    for (const auto& r : reps)
      if (!q) q = find_check(r, name);
    ASSERT_NE(q, nullptr) << name;
    EXPECT_FALSE(q->applicable) << name;
    EXPECT_NE(q->note.find("round precondition unmet"), std::string::npos);
  }
}

TEST(Reports, TheoremChainForParity) {
  for (int n : {8, 16, 32})
    for (int k : {3, 4, 5}) {
      auto spec = parity_protocol(ProblemParams(n, k));
      auto acc = mc_accuracy(spec, 2000, 1);
      auto r = theorem_report(spec, DensityParams::for_n(n), acc);
      EXPECT_TRUE(r.ok()) << "n=" << n << " k=" << k;
      const auto* lb = find_check(r, "cc_lower_bound");
      ASSERT_NE(lb, nullptr);
      EXPECT_TRUE(lb->applicable);
      EXPECT_TRUE(lb->pass);
      bool has_constant = false;
      for (const auto& c : r.constants) has_constant |= c.name == "lower_bound" && c.value == 0.0039;
      EXPECT_TRUE(has_constant);
    }
}

TEST(Reports, TheoremConstants) {
  for (int n : {2, 3, 8, 100}) {
    auto r = theorem_report(parity_protocol(ProblemParams(n, 3)), DensityParams::for_n(n),
                            mc_from_hits(100, 100));
    for (const char* name : {"cap_constant", "rate_constant", "fixed_size_constant", "lower_bound_constant"})
      EXPECT_TRUE(find_check(r, name)->pass) << name << " n=" << n;
  }
}

TEST(Reports, JsonAndText) {
  auto spec = parity_protocol(ProblemParams(3, 3));
  auto reps = full_report(spec, DensityParams::for_n(3), small_config(30));
  auto j = to_json(reps[0]);
  EXPECT_EQ(j["n"], 3);
  EXPECT_TRUE(j.contains("checks"));
  std::ostringstream out;
  print_report(out, reps[4]);
  EXPECT_NE(out.str().find("cc_lower_bound"), std::string::npos);
  EXPECT_EQ(fmt(-1e-12), "0.000000");
}

TEST(Reports, DsCsv) {
  auto spec = trivial_protocol(ProblemParams(2, 2));
  auto outs = ds_batch(spec, DensityParams::for_n(2), 5, 3);
  std::ostringstream out;
  write_ds_csv(out, outs, 2, 3);
  std::istringstream in(out.str());
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  EXPECT_EQ(lines, 6u);
}
