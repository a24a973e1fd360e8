#pragma once

// Min-entropy, deficiency and gamma-density of flat distributions over
// explicit point sets in [n]^M, and the greedy density-restoring partition
// together with an independent checker for its three guarantees.
//
// All probabilities are ratios of integer counts; logs are taken base 2 at the
// last step.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pclab/core.hpp"

namespace pclab {

using Point = std::vector<Label>;
using Coords = std::vector<int>;  // sorted, 0-based coordinates

struct DensityParams {
  double gamma = 0.9;
  double eps = 1e-9;  // log-space comparison tolerance

  // 1 - 0.1 / log2 n.
  static DensityParams for_n(int n) { return {1.0 - 0.1 / std::log2(static_cast<double>(n)), 1e-9}; }

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
    if (eps < 0.0) throw std::invalid_argument("eps must be nonnegative");
  }
};

inline Coords complement(const Coords& of, int M) {
  Coords out;
  for (int c = 0, j = 0; c < M; ++c) {
    if (j < static_cast<int>(of.size()) && of[j] == c) { ++j; continue; }
    out.push_back(c);
  }
  return out;
}

inline Coords set_minus(const Coords& a, const Coords& b) {
  Coords out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Points in [n]^M whose coordinates outside J are pinned to beta.
struct SubcubeSet {
  int M = 0;
  int n = 2;
  Coords J;
  std::vector<Label> beta;  // size M; 0 on coordinates in J
  std::vector<Point> members;

  // beta is read off the first member.
  static SubcubeSet from_members(int M, int n, Coords J, std::vector<Point> members) {
    SubcubeSet s{M, n, std::move(J), std::vector<Label>(M, 0), std::move(members)};
    std::sort(s.J.begin(), s.J.end());
    if (!s.members.empty())
      for (int c : complement(s.J, M)) s.beta[c] = s.members.front()[c];
    s.validate();
    return s;
  }

  std::size_t size() const { return members.size(); }

  void validate() const {
    if (n < 2) throw std::invalid_argument("subcube alphabet n must be at least 2");
    if (static_cast<int>(beta.size()) != M) throw std::invalid_argument("beta must have M entries");
    for (std::size_t i = 0; i < J.size(); ++i) {
      if (J[i] < 0 || J[i] >= M) throw std::invalid_argument("J coordinate out of range");
      if (i > 0 && J[i] <= J[i - 1]) throw std::invalid_argument("J must be sorted and distinct");
    }
    const Coords fixed = complement(J, M);
    for (const auto& p : members) {
      if (static_cast<int>(p.size()) != M) throw std::invalid_argument("member has wrong length");
      for (Label v : p)
        if (v < 1 || v > n) throw std::invalid_argument("member label out of range");
      for (int c : fixed)
        if (p[c] != beta[c]) throw std::invalid_argument("member disagrees with beta outside J");
    }
  }
};

struct Witness {
  Coords I;
  std::vector<Label> alpha;
  std::uint64_t count = 0;  // members with x(I) = alpha
};

namespace detail {

inline std::uint64_t projection_key(const Point& p, const Coords& I, int n) {
  std::uint64_t key = 0;
  for (int c : I) key = key * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(p[c] - 1);
  return key;
}

inline std::vector<Label> key_to_alpha(std::uint64_t key, std::size_t len, int n) {
  std::vector<Label> alpha(len);
  for (std::size_t i = len; i-- > 0;) {
    alpha[i] = static_cast<Label>(key % static_cast<std::uint64_t>(n)) + 1;
    key /= static_cast<std::uint64_t>(n);
  }
  return alpha;
}

// Largest projection count onto I; ties go to the lexicographically smallest alpha.
inline std::pair<std::uint64_t, std::uint64_t> max_projection(const std::vector<Point>& members, const Coords& I,
                                                              int n, std::vector<std::uint64_t>& scratch) {
  scratch.clear();
  for (const auto& p : members) scratch.push_back(projection_key(p, I, n));
  std::sort(scratch.begin(), scratch.end());
  std::uint64_t best = 0, best_key = 0;
  for (std::size_t i = 0; i < scratch.size();) {
    std::size_t j = i;
    while (j < scratch.size() && scratch[j] == scratch[i]) ++j;
    if (j - i > best) {
      best = j - i;
      best_key = scratch[i];
    }
    i = j;
  }
  return {best, best_key};
}

inline bool violates(std::uint64_t total, std::uint64_t count, std::size_t width, int n, const DensityParams& p) {
  const double h = std::log2(static_cast<double>(total)) - std::log2(static_cast<double>(count));
  return h < p.gamma * static_cast<double>(width) * std::log2(static_cast<double>(n)) - p.eps;
}

inline void require_subset_budget(std::size_t coords, int n, const Budget& budget) {
  if (static_cast<int>(coords) > budget.max_subset_coords)
    throw budget_error("density check over |J|=" + std::to_string(coords) + " coordinates exceeds subset budget " +
                       std::to_string(budget.max_subset_coords));
  if (checked_pow(static_cast<std::uint64_t>(n), static_cast<int>(coords)) ==
      std::numeric_limits<std::uint64_t>::max())
    throw budget_error("projection keys for n^|J| do not fit 64 bits");
}

// Smallest |I|, then lexicographic I, then most likely alpha.
inline std::optional<Witness> find_violation(const std::vector<Point>& members, const Coords& J, int n,
                                             const DensityParams& params, const Budget& budget) {
  if (members.empty() || J.empty()) return std::nullopt;
  require_subset_budget(J.size(), n, budget);
  const std::uint64_t total = members.size();
  std::vector<std::uint64_t> scratch;
  scratch.reserve(members.size());
  const std::size_t m = J.size();
  for (std::size_t width = 1; width <= m; ++width) {
    std::vector<std::size_t> pick(width);
    for (std::size_t i = 0; i < width; ++i) pick[i] = i;
    while (true) {
      Coords I(width);
      for (std::size_t i = 0; i < width; ++i) I[i] = J[pick[i]];
      auto [count, key] = max_projection(members, I, n, scratch);
      if (violates(total, count, width, n, params)) return Witness{I, key_to_alpha(key, width, n), count};
      std::size_t i = width;
      while (i > 0 && pick[i - 1] == m - width + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < width; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return std::nullopt;
}

inline std::vector<Point> restrict_to(const std::vector<Point>& members, const Coords& I,
                                      const std::vector<Label>& alpha) {
  std::vector<Point> out;
  for (const auto& p : members) {
    bool ok = true;
    for (std::size_t i = 0; i < I.size() && ok; ++i) ok = p[I[i]] == alpha[i];
    if (ok) out.push_back(p);
  }
  return out;
}

}  // namespace detail

inline double min_entropy(const SubcubeSet& s, const Coords& I) {
  if (I.empty()) throw std::invalid_argument("min_entropy needs a nonempty coordinate set");
  if (s.members.empty()) throw std::invalid_argument("min_entropy of an empty set");
  std::vector<std::uint64_t> scratch;
  auto [count, key] = detail::max_projection(s.members, I, s.n, scratch);
  (void)key;
  return std::log2(static_cast<double>(s.size())) - std::log2(static_cast<double>(count));
}

// |J| log n - H_inf(S(J)); 0 for empty J.
inline double deficiency(const SubcubeSet& s, const Coords& J) {
  if (s.members.empty()) throw std::invalid_argument("deficiency of an empty set");
  if (J.empty()) return 0.0;
  return static_cast<double>(J.size()) * std::log2(static_cast<double>(s.n)) - min_entropy(s, J);
}

inline double deficiency(const SubcubeSet& s) { return deficiency(s, s.J); }

struct DensityCheck {
  bool dense = true;
  std::optional<Witness> witness;
};

inline DensityCheck is_dense(const SubcubeSet& s, const Coords& J, const DensityParams& params,
                             const Budget& budget = Budget{}) {
  params.validate();
  auto w = detail::find_violation(s.members, J, s.n, params, budget);
  return {!w.has_value(), std::move(w)};
}

struct PartitionPart {
  SubcubeSet part;           // J = parent J minus I, beta extended by alpha
  Coords I;
  std::vector<Label> alpha;
  double delta = 0.0;        // log2(|S| / |tail|)
  std::uint64_t tail_size = 0;
};

inline std::vector<PartitionPart> density_restoring_partition(const SubcubeSet& s, const DensityParams& params,
                                                              const Budget& budget = Budget{}) {
  params.validate();
  if (s.members.empty()) throw std::invalid_argument("cannot partition an empty set");
  detail::require_subset_budget(s.J.size(), s.n, budget);
  const double total = static_cast<double>(s.size());
  std::vector<PartitionPart> parts;
  std::vector<Point> remaining = s.members;
  while (!remaining.empty()) {
    const std::uint64_t tail = remaining.size();
    Coords I;
    std::vector<Label> alpha;
    std::vector<Point> piece;
    if (auto w = detail::find_violation(remaining, s.J, s.n, params, budget)) {
      I = w->I;
      alpha = w->alpha;
      piece = detail::restrict_to(remaining, I, alpha);
      // Grow I until the piece is dense on what is left of J.
      while (auto more = detail::find_violation(piece, set_minus(s.J, I), s.n, params, budget)) {
        piece = detail::restrict_to(piece, more->I, more->alpha);
        std::map<int, Label> merged;
        for (std::size_t i = 0; i < I.size(); ++i) merged[I[i]] = alpha[i];
        for (std::size_t i = 0; i < more->I.size(); ++i) merged[more->I[i]] = more->alpha[i];
        I.clear();
        alpha.clear();
        for (auto [c, v] : merged) {
          I.push_back(c);
          alpha.push_back(v);
        }
      }
    } else {
      piece = remaining;
    }
    std::vector<Label> beta = s.beta;
    for (std::size_t i = 0; i < I.size(); ++i) beta[I[i]] = alpha[i];
    std::set<Point> taken(piece.begin(), piece.end());
    std::vector<Point> rest;
    for (auto& p : remaining)
      if (!taken.count(p)) rest.push_back(std::move(p));
    remaining = std::move(rest);
    SubcubeSet part{s.M, s.n, set_minus(s.J, I), std::move(beta), std::move(piece)};
    parts.push_back({std::move(part), std::move(I), std::move(alpha),
                     std::log2(total) - std::log2(static_cast<double>(tail)), tail});
  }
  return parts;
}

// Sum_i p_i * delta_i with p_i = |part_i| / |S|.
inline double expected_delta(const std::vector<PartitionPart>& parts) {
  double total = 0.0, acc = 0.0;
  for (const auto& p : parts) total += static_cast<double>(p.part.size());
  for (const auto& p : parts) acc += static_cast<double>(p.part.size()) / total * p.delta;
  return acc;
}

// log2(e): integral of log2(1/(1-x)) over [0, 1].
inline constexpr double kDeltaIntegralBound = 1.4426950408889634;

// ---------------------------------------------------------------------------
// Independent checker. Recomputes every projection with its own counting.

struct PartCheck {
  bool structure = true;  // I subset of J, part J = J \ I, sizes consistent
  bool item1 = true;      // every member has x(I) = alpha
  bool item2 = true;      // residual dense on J \ I
  bool item3 = true;      // deficiency drop with delta slack
  double lhs = 0.0;       // D(part(J\I))
  double rhs = 0.0;       // D(S(J)) - (1-gamma) log n |I| + delta
};

struct PartitionReport {
  bool disjoint = true;
  bool covers = true;
  std::vector<PartCheck> parts;
  double expected_delta = 0.0;

  bool ok() const {
    if (!disjoint || !covers) return false;
    for (const auto& p : parts)
      if (!p.structure || !p.item1 || !p.item2 || !p.item3) return false;
    return true;
  }
};

namespace detail {

inline double brute_min_entropy(const std::vector<Point>& pts, const Coords& I) {
  std::map<std::vector<Label>, std::uint64_t> counts;
  std::uint64_t best = 0;
  for (const auto& p : pts) {
    std::vector<Label> proj;
    for (int c : I) proj.push_back(p[c]);
    best = std::max(best, ++counts[proj]);
  }
  return std::log2(static_cast<double>(pts.size())) - std::log2(static_cast<double>(best));
}

inline double brute_deficiency(const std::vector<Point>& pts, const Coords& J, int n) {
  if (J.empty()) return 0.0;
  return static_cast<double>(J.size()) * std::log2(static_cast<double>(n)) - brute_min_entropy(pts, J);
}

inline bool brute_dense(const std::vector<Point>& pts, const Coords& J, int n, const DensityParams& params) {
  const std::size_t m = J.size();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); ++mask) {
    Coords I;
    for (std::size_t i = 0; i < m; ++i)
      if (mask >> i & 1) I.push_back(J[i]);
    const double need = params.gamma * static_cast<double>(I.size()) * std::log2(static_cast<double>(n));
    if (brute_min_entropy(pts, I) < need - params.eps) return false;
  }
  return true;
}

}  // namespace detail

inline PartitionReport verify_partition(const SubcubeSet& s, const DensityParams& params,
                                        const std::vector<PartitionPart>& parts) {
  PartitionReport report;
  std::multiset<Point> seen;
  for (const auto& p : parts)
    for (const auto& x : p.part.members) seen.insert(x);
  for (auto it = seen.begin(); it != seen.end(); it = seen.upper_bound(*it))
    if (seen.count(*it) > 1) report.disjoint = false;
  std::set<Point> original(s.members.begin(), s.members.end());
  std::set<Point> unique(seen.begin(), seen.end());
  report.covers = unique == original && seen.size() == s.members.size();

  const double parent = detail::brute_deficiency(s.members, s.J, s.n);
  const double log_n = std::log2(static_cast<double>(s.n));
  double total = 0.0;
  for (const auto& p : parts) total += static_cast<double>(p.part.size());
  for (const auto& p : parts) {
    PartCheck c;
    c.structure = std::includes(s.J.begin(), s.J.end(), p.I.begin(), p.I.end()) && p.I.size() == p.alpha.size() &&
                  p.part.J == set_minus(s.J, p.I) && !p.part.members.empty();
    for (const auto& x : p.part.members)
      for (std::size_t i = 0; i < p.I.size() && i < p.alpha.size(); ++i)
        if (x[p.I[i]] != p.alpha[i]) c.item1 = false;
    const Coords rest = set_minus(s.J, p.I);
    if (!p.part.members.empty()) {
      c.item2 = detail::brute_dense(p.part.members, rest, s.n, params);
      c.lhs = detail::brute_deficiency(p.part.members, rest, s.n);
      c.rhs = parent - (1.0 - params.gamma) * log_n * static_cast<double>(p.I.size()) + p.delta;
      c.item3 = c.lhs <= c.rhs + params.eps;
    } else {
      c.item2 = c.item3 = false;
    }
    report.parts.push_back(c);
    if (total > 0) report.expected_delta += static_cast<double>(p.part.size()) / total * p.delta;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Subcube file:
//   pclab-subcube 1
//   M 2
//   n 2
//   J 1 2             # 1-based coordinates, may be empty
//   beta 3=1 4=2      # optional; pins coordinates outside J
//   members 3
//   1 1
//   1 2
//   2 1

inline SubcubeSet parse_subcube(std::istream& in, const std::string& where = "<subcube>") {
  std::string raw;
  std::size_t line = 0;
  std::optional<int> M, n;
  std::optional<Coords> J;
  std::map<int, Label> beta;
  std::optional<std::size_t> count;
  std::vector<Point> members;
  bool magic = false;
  auto to_int = [&](const std::string& tok, const char* what) {
    try {
      std::size_t used = 0;
      long v = std::stol(tok, &used);
      if (used == tok.size()) return static_cast<int>(v);
    } catch (const std::exception&) {
    }
    throw parse_error(where, line, std::string("expected integer ") + what + ", got '" + tok + "'");
  };
  while (std::getline(in, raw)) {
    ++line;
    std::istringstream ls(raw.substr(0, raw.find('#')));
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (count) {
      if (!M || !n) throw parse_error(where, line, "M and n must precede members");
      if (static_cast<int>(tok.size()) != *M)
        throw parse_error(where, line, "member row must have M=" + std::to_string(*M) + " labels");
      Point p;
      for (const auto& t : tok) {
        int v = to_int(t, "label");
        if (v < 1 || v > *n) throw parse_error(where, line, "label " + t + " out of range [1, n]");
        p.push_back(v);
      }
      members.push_back(std::move(p));
      continue;
    }
    const std::string& key = tok[0];
    if (!magic) {
      if (key != "pclab-subcube" || tok.size() != 2 || tok[1] != "1")
        throw parse_error(where, line, "missing 'pclab-subcube 1' header");
      magic = true;
    } else if (key == "M" && tok.size() == 2) {
      M = to_int(tok[1], "M");
      if (*M < 1) throw parse_error(where, line, "M must be positive");
    } else if (key == "n" && tok.size() == 2) {
      n = to_int(tok[1], "n");
      if (*n < 2 || *n > 255) throw parse_error(where, line, "n out of range [2, 255]");
    } else if (key == "J") {
      if (!M) throw parse_error(where, line, "M must precede J");
      Coords c;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        int v = to_int(tok[i], "coordinate");
        if (v < 1 || v > *M) throw parse_error(where, line, "coordinate out of range [1, M]");
        c.push_back(v - 1);
      }
      std::sort(c.begin(), c.end());
      if (std::adjacent_find(c.begin(), c.end()) != c.end()) throw parse_error(where, line, "duplicate coordinate in J");
      J = std::move(c);
    } else if (key == "beta") {
      for (std::size_t i = 1; i < tok.size(); ++i) {
        auto eq = tok[i].find('=');
        if (eq == std::string::npos) throw parse_error(where, line, "beta entries are coord=label");
        beta[to_int(tok[i].substr(0, eq), "coordinate") - 1] = to_int(tok[i].substr(eq + 1), "label");
      }
    } else if (key == "members" && tok.size() == 2) {
      int c = to_int(tok[1], "count");
      if (c < 1) throw parse_error(where, line, "members count must be positive");
      count = static_cast<std::size_t>(c);
    } else {
      throw parse_error(where, line, "unknown directive '" + key + "'");
    }
  }
  if (!magic || !M || !n || !J || !count) throw parse_error(where, line, "incomplete subcube file (need M, n, J, members)");
  if (members.size() != *count)
    throw parse_error(where, line, "expected " + std::to_string(*count) + " members, found " + std::to_string(members.size()));
  std::set<Point> distinct(members.begin(), members.end());
  if (distinct.size() != members.size()) throw parse_error(where, line, "duplicate member rows");
  SubcubeSet s{*M, *n, *J, std::vector<Label>(*M, 0), std::move(members)};
  for (int c : complement(s.J, s.M)) {
    auto it = beta.find(c);
    s.beta[c] = it != beta.end() ? it->second : s.members.front()[c];
  }
  for (auto [c, v] : beta)
    if (std::binary_search(s.J.begin(), s.J.end(), c))
      throw parse_error(where, line, "beta pins coordinate " + std::to_string(c + 1) + " which lies in J");
  try {
    s.validate();
  } catch (const std::exception& e) {
    throw parse_error(where, line, e.what());
  }
  return s;
}

inline SubcubeSet load_subcube(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open subcube file '" + path + "'");
  return parse_subcube(in, path);
}

}  // namespace pclab
