#pragma once

// Pointer-chasing semantics: function tables, the pointer recursion and the
// parity predicate, plus the mixed-radix bijection that lets sets of tables be
// stored as index sets.

#include <array>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pclab {

using Label = int;           // 1-based label in [1, n]
using TableIndex = std::uint64_t;

struct budget_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct parse_error : std::runtime_error {
  parse_error(const std::string& where, std::size_t line, const std::string& what)
      : std::runtime_error(where + ":" + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

// Enumeration limits. Defaults keep everything at desk scale; PC_LAB_BUDGET
// (e.g. "tables=100000,pairs=10000000") overrides individual fields.
struct Budget {
  std::uint64_t max_tables = 50'000;       // n^n for single-side enumeration
  std::uint64_t max_pairs = 1'000'000;     // n^(2n) for exhaustive pair loops
  int max_subset_coords = 16;              // |J| for 2^|J| subset scans
  std::uint64_t max_branches = 2'000'000;  // exact DS branch enumeration

  static Budget unlimited() {
    Budget b;
    b.max_tables = b.max_pairs = b.max_branches = std::numeric_limits<std::uint64_t>::max();
    b.max_subset_coords = 62;
    return b;
  }

  static Budget from_env() {
    Budget b;
    const char* env = std::getenv("PC_LAB_BUDGET");
    if (env == nullptr) return b;
    std::stringstream ss(env);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos) throw budget_error("PC_LAB_BUDGET: expected key=value, got '" + item + "'");
      std::string key = item.substr(0, eq);
      std::uint64_t value = std::stoull(item.substr(eq + 1));
      if (value == 0) throw budget_error("PC_LAB_BUDGET: budgets must be positive");
      if (key == "tables") b.max_tables = value;
      else if (key == "pairs") b.max_pairs = value;
      else if (key == "subsets") b.max_subset_coords = static_cast<int>(value);
      else if (key == "branches") b.max_branches = value;
      else throw budget_error("PC_LAB_BUDGET: unknown key '" + key + "'");
    }
    return b;
  }
};

struct ProblemParams {
  int n = 2;
  int k = 1;

  ProblemParams() = default;
  ProblemParams(int n_, int k_) : n(n_), k(k_) { validate(); }

  void validate() const {
    if (n < 2) throw std::invalid_argument("n must be at least 2");
    if (n > 255) throw std::invalid_argument("n must be at most 255");
    if (k < 1) throw std::invalid_argument("k must be at least 1");
  }
  friend bool operator==(const ProblemParams&, const ProblemParams&) = default;
};

// ceil(log2 n): bits needed for one label on the wire.
constexpr int label_bits(int n) {
  int bits = 0;
  while ((1 << bits) < n) ++bits;
  return bits;
}

// n^e, saturating at UINT64_MAX.
constexpr std::uint64_t checked_pow(std::uint64_t base, int e) {
  std::uint64_t result = 1;
  for (int i = 0; i < e; ++i) {
    if (base != 0 && result > std::numeric_limits<std::uint64_t>::max() / base)
      return std::numeric_limits<std::uint64_t>::max();
    result *= base;
  }
  return result;
}

inline std::uint64_t table_count(int n) { return checked_pow(static_cast<std::uint64_t>(n), n); }

// One party's input f: [n] -> [n]. Position x and values are 1-based.
class FunctionTable {
 public:
  FunctionTable() = default;
  explicit FunctionTable(std::vector<Label> values) : values_(std::move(values)) { validate(); }

  static FunctionTable identity(int n) {
    std::vector<Label> v(n);
    for (int x = 0; x < n; ++x) v[x] = x + 1;
    return FunctionTable(std::move(v));
  }
  static FunctionTable constant(int n, Label c) { return FunctionTable(std::vector<Label>(n, c)); }

  int n() const { return static_cast<int>(values_.size()); }
  Label operator()(Label x) const { return values_[x - 1]; }
  const std::vector<Label>& values() const { return values_; }

  friend bool operator==(const FunctionTable&, const FunctionTable&) = default;

 private:
  void validate() const {
    const int n = this->n();
    if (n < 1) throw std::invalid_argument("function table must be nonempty");
    for (Label v : values_)
      if (v < 1 || v > n) throw std::invalid_argument("table entry out of range [1, n]");
  }
  std::vector<Label> values_;
};

inline void require_same_dimension(const FunctionTable& fa, const FunctionTable& fb) {
  if (fa.n() != fb.n())
    throw std::invalid_argument("dimension mismatch: fA has n=" + std::to_string(fa.n()) +
                                ", fB has n=" + std::to_string(fb.n()));
}

// pt_0 = 1; odd steps apply fA, even steps apply fB.
inline Label eval_pointer(int r, const FunctionTable& fa, const FunctionTable& fb) {
  require_same_dimension(fa, fb);
  if (r < 0) throw std::invalid_argument("pointer index must be nonnegative");
  Label pt = 1;
  for (int step = 1; step <= r; ++step) pt = (step % 2 == 1) ? fa(pt) : fb(pt);
  return pt;
}

inline int eval_pc(const ProblemParams& params, const FunctionTable& fa, const FunctionTable& fb) {
  if (fa.n() != params.n || fb.n() != params.n)
    throw std::invalid_argument("table size does not match n=" + std::to_string(params.n));
  return eval_pointer(params.k, fa, fb) % 2;
}

// Mixed radix, position 1 most significant, digit = value - 1.
inline TableIndex table_index(const FunctionTable& f) {
  if (table_count(f.n()) == std::numeric_limits<std::uint64_t>::max())
    throw std::out_of_range("n^n does not fit a 64-bit index");
  TableIndex idx = 0;
  for (Label v : f.values()) idx = idx * static_cast<TableIndex>(f.n()) + static_cast<TableIndex>(v - 1);
  return idx;
}

inline FunctionTable table_from_index(int n, TableIndex idx) {
  const std::uint64_t total = table_count(n);
  if (total == std::numeric_limits<std::uint64_t>::max())
    throw std::out_of_range("n^n does not fit a 64-bit index");
  if (idx >= total) throw std::out_of_range("table index " + std::to_string(idx) + " out of range");
  std::vector<Label> v(n);
  for (int x = n - 1; x >= 0; --x) {
    v[x] = static_cast<Label>(idx % static_cast<TableIndex>(n)) + 1;
    idx /= static_cast<TableIndex>(n);
  }
  return FunctionTable(std::move(v));
}

inline void require_table_budget(int n, const Budget& budget) {
  const std::uint64_t total = table_count(n);
  if (total > budget.max_tables)
    throw budget_error("enumeration of " + std::to_string(n) + "^" + std::to_string(n) +
                       " tables exceeds table budget " + std::to_string(budget.max_tables));
}

inline void require_pair_budget(int n, const Budget& budget) {
  const std::uint64_t tables = table_count(n);
  const std::uint64_t pairs = (tables > std::numeric_limits<std::uint32_t>::max())
                                  ? std::numeric_limits<std::uint64_t>::max()
                                  : tables * tables;
  if (pairs > budget.max_pairs)
    throw budget_error("exhaustive enumeration of n^(2n)=" +
                       (pairs == std::numeric_limits<std::uint64_t>::max() ? std::string("overflow")
                                                                          : std::to_string(pairs)) +
                       " pairs exceeds pair budget " + std::to_string(budget.max_pairs));
}

// All n^n tables in index order. Built once per n, then read without locking.
inline const std::vector<FunctionTable>& enumerate_tables(int n, const Budget& budget = Budget{}) {
  if (n < 2 || n > 255) throw std::invalid_argument("n must lie in [2, 255]");
  require_table_budget(n, budget);
  static std::array<std::atomic<const std::vector<FunctionTable>*>, 256> cache{};
  static std::mutex mutex;
  if (auto* hit = cache[n].load(std::memory_order_acquire)) return *hit;
  std::lock_guard<std::mutex> lock(mutex);
  if (auto* hit = cache[n].load(std::memory_order_relaxed)) return *hit;
  auto* tables = new std::vector<FunctionTable>();  // lives for the process
  const std::uint64_t total = table_count(n);
  tables->reserve(total);
  std::vector<Label> v(n, 1);
  for (std::uint64_t i = 0; i < total; ++i) {
    tables->emplace_back(v);
    for (int x = n - 1; x >= 0; --x) {
      if (v[x] < n) { ++v[x]; break; }
      v[x] = 1;
    }
  }
  cache[n].store(tables, std::memory_order_release);
  return *tables;
}

// Text format: first token n, then n whitespace-separated 1-based labels.
inline FunctionTable parse_table(std::istream& in, const std::string& where = "<table>") {
  std::string token;
  std::size_t line = 1;
  auto next = [&](const char* what) -> long {
    int c;
    token.clear();
    while ((c = in.get()) != EOF && std::isspace(c))
      if (c == '\n') ++line;
    while (c != EOF && !std::isspace(c)) {
      token.push_back(static_cast<char>(c));
      c = in.get();
    }
    if (c == '\n') in.unget();
    if (token.empty()) throw parse_error(where, line, std::string("expected ") + what);
    try {
      std::size_t used = 0;
      long v = std::stol(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      return v;
    } catch (const std::exception&) {
      throw parse_error(where, line, std::string("expected integer ") + what + ", got '" + token + "'");
    }
  };
  long n = next("n");
  if (n < 2 || n > 255) throw parse_error(where, line, "n out of range [2, 255]");
  std::vector<Label> values(n);
  for (long x = 0; x < n; ++x) {
    long v = next("label");
    if (v < 1 || v > n) throw parse_error(where, line, "label " + token + " out of range [1, n]");
    values[x] = static_cast<Label>(v);
  }
  return FunctionTable(std::move(values));
}

inline FunctionTable parse_table(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_table(in);
}

inline std::string format_table(const FunctionTable& f) {
  std::string out = std::to_string(f.n());
  for (Label v : f.values()) out += " " + std::to_string(v);
  return out;
}

}  // namespace pclab
