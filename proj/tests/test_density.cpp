#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pclab/density.hpp"
#include "pclab/rng.hpp"

using namespace pclab;

namespace {

SubcubeSet three_points() { return SubcubeSet::from_members(2, 2, {0, 1}, {{1, 1}, {1, 2}, {2, 1}}); }

SubcubeSet full_cube(int M, int n) {
  std::vector<Point> pts;
  Point p(M, 1);
  while (true) {
    pts.push_back(p);
    int i = M - 1;
    while (i >= 0 && p[i] == n) p[i--] = 1;
    if (i < 0) break;
    ++p[i];
  }
  Coords J(M);
  for (int i = 0; i < M; ++i) J[i] = i;
  return SubcubeSet::from_members(M, n, J, pts);
}

// Random subset of [n]^M with coordinates outside a random J pinned.
SubcubeSet random_instance(Rng& rng) {
  const int n = 2 + static_cast<int>(rng.below(3));
  const int M = n;
  Coords J;
  for (int c = 0; c < M; ++c)
    if (rng.below(4) != 0) J.push_back(c);
  std::vector<Label> beta(M);
  for (auto& b : beta) b = static_cast<Label>(rng.below(n)) + 1;
  const std::uint64_t cells = checked_pow(n, static_cast<int>(J.size()));
  const std::uint64_t keep_per_mille = 50 + rng.below(900);
  std::vector<Point> pts;
  for (std::uint64_t c = 0; c < cells; ++c) {
    if (rng.below(1000) >= keep_per_mille && !(pts.empty() && c + 1 == cells)) continue;
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

}  // namespace

TEST(MinEntropy, Examples) {
  auto full = full_cube(3, 3);
  EXPECT_NEAR(min_entropy(full, {0, 2}), 2 * std::log2(3.0), 1e-12);
  auto single = SubcubeSet::from_members(2, 3, {0, 1}, {{2, 3}});
  EXPECT_EQ(min_entropy(single, {0}), 0.0);
  EXPECT_NEAR(min_entropy(three_points(), {0}), std::log2(1.5), 1e-12);
  EXPECT_THROW(min_entropy(three_points(), {}), std::invalid_argument);
}

TEST(Deficiency, Examples) {
  EXPECT_NEAR(deficiency(full_cube(2, 4)), 0.0, 1e-12);
  EXPECT_NEAR(deficiency(three_points()), 2.0 - std::log2(3.0), 1e-12);
  EXPECT_EQ(deficiency(three_points(), {}), 0.0);
}

TEST(Dense, Examples) {
  const DensityParams g{0.9, 1e-9};
  EXPECT_TRUE(is_dense(full_cube(3, 2), {0, 1, 2}, {0.999, 1e-9}).dense);
  auto chk = is_dense(three_points(), {0, 1}, g);
  ASSERT_FALSE(chk.dense);
  EXPECT_EQ(chk.witness->I, (Coords{0}));
  EXPECT_EQ(chk.witness->alpha, (std::vector<Label>{1}));
  EXPECT_TRUE(is_dense(three_points(), {}, g).dense);
}

TEST(Dense, ThresholdCountsAsDense) {
  // joint projection has entropy exactly 1 = 0.5 * 2
  auto s = SubcubeSet::from_members(2, 2, {0, 1}, {{1, 1}, {2, 2}});
  EXPECT_TRUE(is_dense(s, {0, 1}, {0.5, 1e-9}).dense);
  EXPECT_FALSE(is_dense(s, {0, 1}, {0.5 + 1e-6, 1e-9}).dense);
}

TEST(Dense, SubsetBudget) {
  Budget b;
  b.max_subset_coords = 2;
  EXPECT_THROW(is_dense(full_cube(3, 2), {0, 1, 2}, {0.9, 1e-9}, b), budget_error);
}

TEST(Partition, WorkedExample) {
  const DensityParams g{0.9, 1e-9};
  auto parts = density_restoring_partition(three_points(), g);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].I, (Coords{0}));
  EXPECT_EQ(parts[0].alpha, (std::vector<Label>{1}));
  EXPECT_EQ(parts[0].part.members, (std::vector<Point>{{1, 1}, {1, 2}}));
  EXPECT_EQ(parts[0].delta, 0.0);
  EXPECT_EQ(parts[1].I, (Coords{0, 1}));
  EXPECT_EQ(parts[1].alpha, (std::vector<Label>{2, 1}));
  EXPECT_EQ(parts[1].part.members, (std::vector<Point>{{2, 1}}));
  EXPECT_DOUBLE_EQ(parts[1].delta, std::log2(3.0));
  EXPECT_EQ(parts[1].part.J, Coords{});
  EXPECT_EQ(parts[1].part.beta, (std::vector<Label>{2, 1}));
  auto rep = verify_partition(three_points(), g, parts);
  EXPECT_TRUE(rep.ok());
  EXPECT_NEAR(rep.parts[0].rhs, 2.0 - std::log2(3.0) - 0.1, 1e-12);
  EXPECT_NEAR(rep.parts[1].rhs, 2.0 - std::log2(3.0) - 0.2 + std::log2(3.0), 1e-12);
}

TEST(Partition, DenseInputIsOnePart) {
  auto s = full_cube(3, 3);
  auto parts = density_restoring_partition(s, DensityParams::for_n(3));
  ASSERT_EQ(parts.size(), 1u);
  EXPECT_TRUE(parts[0].I.empty());
  EXPECT_EQ(parts[0].delta, 0.0);
  EXPECT_EQ(parts[0].part.size(), 27u);
}

TEST(Partition, RandomInstancesVerify) {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    auto s = random_instance(rng);
    const DensityParams g = rng.below(2) ? DensityParams::for_n(s.n) : DensityParams{0.3 + 0.6 * (rng.below(100) / 100.0), 1e-9};
    auto parts = density_restoring_partition(s, g);
    auto rep = verify_partition(s, g, parts);
    ASSERT_TRUE(rep.ok()) << "trial " << trial;
    ASSERT_EQ(parts.front().delta, 0.0);
    for (std::size_t i = 1; i < parts.size(); ++i) ASSERT_GE(parts[i].delta, parts[i - 1].delta);
    ASSERT_LE(rep.expected_delta, kDeltaIntegralBound + 1e-9);
    ASSERT_NEAR(rep.expected_delta, expected_delta(parts), 1e-12);
  }
}

TEST(Partition, VerifierCatchesMutations) {
  const DensityParams g{0.9, 1e-9};
  auto parts = density_restoring_partition(three_points(), g);

  auto moved = parts;
  moved[1].part.members.push_back(moved[0].part.members.back());
  moved[0].part.members.pop_back();
  auto rep = verify_partition(three_points(), g, moved);
  EXPECT_FALSE(rep.ok());
  EXPECT_FALSE(rep.parts[1].item1);

  auto dup = parts;
  dup[1].part.members.push_back(dup[0].part.members.front());
  EXPECT_FALSE(verify_partition(three_points(), g, dup).disjoint);

  auto dropped = parts;
  dropped.pop_back();
  EXPECT_FALSE(verify_partition(three_points(), g, dropped).covers);

  auto inflated = parts;
  for (auto& p : inflated) p.delta += 5.0;
  EXPECT_TRUE(verify_partition(three_points(), g, inflated).ok());

  auto deflated = parts;
  deflated[1].delta = -1.0;
  auto drep = verify_partition(three_points(), g, deflated);
  EXPECT_FALSE(drep.parts[1].item3);
}

TEST(Partition, DeltaIntegralConstant) {
  // Midpoint rule for the integral of log2(1/(1-x)) over [0, 1).
  const int steps = 2'000'000;
  double sum = 0.0;
  for (int i = 0; i < steps; ++i) sum += -std::log2(1.0 - (i + 0.5) / steps);
  EXPECT_NEAR(sum / steps, kDeltaIntegralBound, 1e-5);
  EXPECT_LE(kDeltaIntegralBound, 1.443);
}

TEST(SubcubeFile, Parse) {
  std::istringstream in(
      "pclab-subcube 1\n"
      "M 3\nn 2\n"
      "J 1 2\n"
      "beta 3=2\n"
      "members 3\n"
      "1 1 2\n1 2 2\n2 1 2\n");
  auto s = parse_subcube(in);
  EXPECT_EQ(s.M, 3);
  EXPECT_EQ(s.J, (Coords{0, 1}));
  EXPECT_EQ(s.beta, (std::vector<Label>{0, 0, 2}));
  EXPECT_EQ(s.size(), 3u);
}

TEST(SubcubeFile, Errors) {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      parse_subcube(in);
    } catch (const parse_error& e) {
      return e.line;
    }
    return 0;
  };
  const std::string head = "pclab-subcube 1\nM 2\nn 2\nJ 1\n";
  EXPECT_EQ(line_of(head + "members 1\n1 3\n"), 6u);          // label out of range
  EXPECT_EQ(line_of(head + "members 2\n1 1\n2 2\n"), 7u);     // disagrees outside J
  EXPECT_EQ(line_of(head + "members 1\n1\n"), 6u);            // short row
  EXPECT_EQ(line_of("pclab-subcube 1\nM 2\nn 2\nJ 3\n"), 4u);  // coordinate out of range
  EXPECT_EQ(line_of("nonsense\n"), 1u);
  EXPECT_GT(line_of(head + "members 2\n1 1\n1 1\n"), 0u);     // duplicate rows
}
