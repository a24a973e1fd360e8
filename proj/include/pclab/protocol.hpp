#pragma once

// Normalized deterministic two-party protocols as bit-level transcript
// machines. The owner of every bit position is fixed in advance (oblivious
// schedule) and every input produces exactly depth() bits, so the inputs that
// reach any transcript prefix factor into an Alice set times a Bob set.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pclab/core.hpp"

namespace pclab {

enum class Owner : std::uint8_t { alice = 0, bob = 1 };

constexpr Owner other(Owner o) { return o == Owner::alice ? Owner::bob : Owner::alice; }
constexpr const char* to_string(Owner o) { return o == Owner::alice ? "alice" : "bob"; }

// Owner of pointer step i >= 1 (odd steps follow fA).
constexpr Owner step_owner(int i) { return (i % 2 == 1) ? Owner::alice : Owner::bob; }

using Bits = std::vector<std::uint8_t>;
using BitView = std::span<const std::uint8_t>;

struct Transcript {
  Bits bits;

  std::size_t size() const { return bits.size(); }
  BitView view() const { return bits; }
  BitView prefix(std::size_t len) const { return BitView(bits).first(len); }

  std::string str() const {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
  }
  static Transcript from_string(std::string_view s) {
    Transcript t;
    for (char c : s) {
      if (c != '0' && c != '1') throw std::invalid_argument("transcript must be a 0/1 string");
      t.bits.push_back(c == '1' ? 1 : 0);
    }
    return t;
  }
  friend bool operator==(const Transcript&, const Transcript&) = default;
};

struct protocol_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A maximal group of consecutive bits computed together by one owner.
struct Segment {
  Owner owner;
  std::size_t offset;
  std::size_t length;
};

// Writes the bits of `segment` given the owner's table and the transcript up to
// the segment's offset.
using MessageRule =
    std::function<void(std::size_t segment, const FunctionTable& own, BitView prefix, Bits& out)>;
using OutputRule = std::function<int(BitView transcript)>;

struct ProtocolMetadata {
  std::string name;
  int declared_rounds = -1;       // -1: take the schedule's block count
  bool alice_first = true;        // claims the lower-bound setting
  std::size_t padding_bits = 0;   // constant bits added for normalization
  std::string source;             // body of the serialized form
};

class ProtocolSpec {
 public:
  ProtocolSpec(ProblemParams params, const std::vector<std::pair<Owner, std::size_t>>& layout,
               MessageRule message, OutputRule output, ProtocolMetadata meta)
      : params_(params), message_(std::move(message)), output_(std::move(output)), meta_(std::move(meta)) {
    params_.validate();
    std::size_t offset = 0;
    for (auto [owner, len] : layout) {
      if (len == 0) throw protocol_error("protocol segment of length 0");
      segments_.push_back({owner, offset, len});
      for (std::size_t i = 0; i < len; ++i) owner_at_.push_back(owner);
      offset += len;
    }
    rounds_ = 0;
    for (std::size_t t = 0; t < owner_at_.size(); ++t)
      if (t == 0 || owner_at_[t] != owner_at_[t - 1]) ++rounds_;
    if (meta_.declared_rounds < 0) meta_.declared_rounds = rounds_;
    if (meta_.declared_rounds != rounds_)
      throw protocol_error("schedule has " + std::to_string(rounds_) + " rounds but " +
                           std::to_string(meta_.declared_rounds) + " were declared");
    if (meta_.alice_first && !owner_at_.empty() && owner_at_.front() != Owner::alice)
      throw protocol_error("protocol claims Alice speaks first but the schedule starts with Bob");
  }

  const ProblemParams& params() const { return params_; }
  std::size_t depth() const { return owner_at_.size(); }
  int rounds() const { return rounds_; }
  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<Owner>& schedule() const { return owner_at_; }
  Owner owner_at(std::size_t t) const { return owner_at_.at(t); }
  const ProtocolMetadata& metadata() const { return meta_; }
  const std::string& name() const { return meta_.name; }
  bool alice_first() const { return owner_at_.empty() || owner_at_.front() == Owner::alice; }

  std::size_t segment_at(std::size_t t) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](std::size_t v, const Segment& s) { return v < s.offset; });
    return static_cast<std::size_t>(std::distance(segments_.begin(), it)) - 1;
  }

  // Full message of a segment; `prefix` must hold at least the bits before it.
  void message(std::size_t segment, const FunctionTable& own, BitView prefix, Bits& out) const {
    const Segment& seg = segments_.at(segment);
    out.clear();
    message_(segment, own, prefix.first(seg.offset), out);
    if (out.size() != seg.length)
      throw protocol_error("message rule produced " + std::to_string(out.size()) + " bits for a segment of " +
                           std::to_string(seg.length));
    for (auto b : out)
      if (b > 1) throw protocol_error("message rule produced a non-bit value");
  }

  int next_bit(const FunctionTable& own, BitView prefix) const {
    if (prefix.size() >= depth()) throw std::out_of_range("next_bit past the protocol depth");
    const std::size_t s = segment_at(prefix.size());
    Bits out;
    message(s, own, prefix, out);
    return out[prefix.size() - segments_[s].offset];
  }

  int output(BitView transcript) const {
    if (transcript.size() != depth()) throw std::invalid_argument("output needs a full-length transcript");
    int b = output_(transcript);
    if (b != 0 && b != 1) throw protocol_error("output rule produced a non-bit value");
    return b;
  }

  const MessageRule& message_rule() const { return message_; }
  const OutputRule& output_rule() const { return output_; }

 private:
  ProblemParams params_;
  std::vector<Segment> segments_;
  std::vector<Owner> owner_at_;
  int rounds_ = 0;
  MessageRule message_;
  OutputRule output_;
  ProtocolMetadata meta_;
};

struct RunResult {
  Transcript transcript;
  int output = 0;
  std::size_t cc = 0;
  int rounds = 0;
};

inline RunResult run(const ProtocolSpec& spec, const FunctionTable& fa, const FunctionTable& fb) {
  if (fa.n() != spec.params().n || fb.n() != spec.params().n)
    throw std::invalid_argument("table size does not match protocol n=" + std::to_string(spec.params().n));
  RunResult result;
  result.transcript.bits.reserve(spec.depth());
  Bits msg;
  for (std::size_t s = 0; s < spec.segments().size(); ++s) {
    const Segment& seg = spec.segments()[s];
    spec.message(s, seg.owner == Owner::alice ? fa : fb, result.transcript.view(), msg);
    result.transcript.bits.insert(result.transcript.bits.end(), msg.begin(), msg.end());
  }
  result.output = spec.output(result.transcript.view());
  result.cc = result.transcript.size();
  result.rounds = spec.rounds();
  return result;
}

// Appends constant-0 single-bit rounds (alternating owners) until the
// protocol has `target` rounds. Output is unchanged.
inline ProtocolSpec pad_rounds(const ProtocolSpec& spec, int target) {
  if (spec.rounds() >= target) return spec;
  std::vector<std::pair<Owner, std::size_t>> layout;
  for (const auto& seg : spec.segments()) layout.emplace_back(seg.owner, seg.length);
  const std::size_t base_segments = layout.size();
  const std::size_t base_depth = spec.depth();
  Owner next = spec.depth() == 0 ? Owner::alice : other(spec.schedule().back());
  std::size_t added = 0;
  for (int r = spec.rounds(); r < target; ++r, next = other(next), ++added) layout.emplace_back(next, 1);

  ProtocolMetadata meta = spec.metadata();
  meta.declared_rounds = target;
  meta.padding_bits += added;
  meta.alice_first = meta.alice_first || spec.depth() == 0;
  meta.source += "pad-rounds " + std::to_string(target) + "\n";
  MessageRule base_message = spec.message_rule();
  OutputRule base_output = spec.output_rule();
  return ProtocolSpec(
      spec.params(), layout,
      [base_message, base_segments](std::size_t s, const FunctionTable& own, BitView prefix, Bits& out) {
        if (s < base_segments) base_message(s, own, prefix, out);
        else out.assign(1, 0);
      },
      [base_output, base_depth](BitView t) { return base_output(t.first(base_depth)); }, meta);
}

// ---------------------------------------------------------------------------
// Input sets and rectangles

struct InputSet {
  int n = 2;
  std::vector<TableIndex> members;  // sorted, unique

  static InputSet full(int n, const Budget& budget = Budget{}) {
    require_table_budget(n, budget);
    InputSet s{n, {}};
    s.members.resize(table_count(n));
    for (TableIndex i = 0; i < s.members.size(); ++i) s.members[i] = i;
    return s;
  }

  std::size_t size() const { return members.size(); }
  bool empty() const { return members.empty(); }
  bool contains(TableIndex idx) const { return std::binary_search(members.begin(), members.end(), idx); }
  bool subset_of(const InputSet& o) const {
    return std::includes(o.members.begin(), o.members.end(), members.begin(), members.end());
  }
  friend bool operator==(const InputSet&, const InputSet&) = default;
};

struct Rectangle {
  InputSet x;  // Alice side
  InputSet y;  // Bob side
  bool consistent = true;  // false when some side is empty

  std::uint64_t size() const { return static_cast<std::uint64_t>(x.size()) * y.size(); }
};

// True when `own` produces, at every position owned by `side`, the bit
// recorded in `prefix`.
inline bool side_matches(const ProtocolSpec& spec, Owner side, const FunctionTable& own, BitView prefix) {
  Bits msg;
  for (std::size_t s = 0; s < spec.segments().size(); ++s) {
    const Segment& seg = spec.segments()[s];
    if (seg.offset >= prefix.size()) break;
    if (seg.owner != side) continue;
    spec.message(s, own, prefix, msg);
    const std::size_t end = std::min(prefix.size(), seg.offset + seg.length);
    for (std::size_t t = seg.offset; t < end; ++t)
      if (msg[t - seg.offset] != prefix[t]) return false;
  }
  return true;
}

inline void check_prefix(const ProtocolSpec& spec, BitView prefix) {
  if (prefix.size() > spec.depth())
    throw std::invalid_argument("prefix of length " + std::to_string(prefix.size()) + " exceeds depth " +
                                std::to_string(spec.depth()));
  for (auto b : prefix)
    if (b > 1) throw std::invalid_argument("prefix contains a non-bit value");
}

inline InputSet side_of(const ProtocolSpec& spec, Owner side, BitView prefix, const Budget& budget = Budget{}) {
  check_prefix(spec, prefix);
  const int n = spec.params().n;
  const auto& tables = enumerate_tables(n, budget);
  InputSet s{n, {}};
  for (TableIndex i = 0; i < tables.size(); ++i)
    if (side_matches(spec, side, tables[i], prefix)) s.members.push_back(i);
  return s;
}

inline Rectangle rectangle_of(const ProtocolSpec& spec, BitView prefix, const Budget& budget = Budget{}) {
  Rectangle r{side_of(spec, Owner::alice, prefix, budget), side_of(spec, Owner::bob, prefix, budget), true};
  r.consistent = !r.x.empty() && !r.y.empty();
  return r;
}

// Splits `set` (tables of the owner of position prefix.size()) by the next bit.
inline std::pair<InputSet, InputSet> split_by_next_bit(const ProtocolSpec& spec, const InputSet& set,
                                                       BitView prefix) {
  if (prefix.size() >= spec.depth()) throw std::out_of_range("no next bit at a leaf");
  InputSet zero{set.n, {}}, one{set.n, {}};
  if (set.empty()) return {std::move(zero), std::move(one)};
  const auto& tables = enumerate_tables(set.n, Budget::unlimited());
  const std::size_t s = spec.segment_at(prefix.size());
  const std::size_t pos = prefix.size() - spec.segments()[s].offset;
  Bits msg;
  for (TableIndex idx : set.members) {
    spec.message(s, tables[idx], prefix, msg);
    (msg[pos] ? one : zero).members.push_back(idx);
  }
  return {std::move(zero), std::move(one)};
}

inline std::pair<InputSet, InputSet> bit_partition(const ProtocolSpec& spec, BitView prefix,
                                                   const Budget& budget = Budget{}) {
  check_prefix(spec, prefix);
  if (prefix.size() >= spec.depth()) throw std::out_of_range("bit_partition at a leaf");
  const Owner owner = spec.owner_at(prefix.size());
  return split_by_next_bit(spec, side_of(spec, owner, prefix, budget), prefix);
}

}  // namespace pclab
