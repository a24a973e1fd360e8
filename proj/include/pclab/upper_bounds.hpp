#pragma once

// The three constructive protocols: the k-round pointer relay, the
// (k-1)-round protocol that ships both parity tables up front, and one member
// of the randomized (k-1)-round index-set protocol.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "pclab/protocol.hpp"
#include "pclab/rng.hpp"
#include "pclab/script.hpp"

namespace pclab {

// k rounds, Alice first; round r sends pt_r.
inline ProtocolSpec trivial_protocol(ProblemParams params) {
  params.validate();
  Script s;
  s.params = params;
  for (int r = 1; r <= params.k; ++r) s.steps.push_back({step_owner(r), Action::send_pointer, {}, 0, 0});
  s.output = {OutputKind::last_pointer_parity, 0, 0};
  return compile(std::move(s), "trivial", params.k);
}

inline std::size_t trivial_cost(const ProblemParams& p) {
  return static_cast<std::size_t>(p.k) * static_cast<std::size_t>(label_bits(p.n));
}

// k-1 rounds: both parity tables travel in rounds 1 and 2, so the last
// pointer's parity is a table lookup once pt_{k-1} is public.
inline ProtocolSpec parity_protocol(ProblemParams params) {
  params.validate();
  if (params.k < 3) throw std::invalid_argument("parity protocol needs k >= 3");
  Script s;
  s.params = params;
  s.steps.push_back({Owner::alice, Action::parity_table, {}, 0, 0});
  s.steps.push_back({Owner::alice, Action::send_pointer, {}, 0, 0});
  s.steps.push_back({Owner::bob, Action::parity_table, {}, 0, 0});
  s.steps.push_back({Owner::bob, Action::send_pointer, {}, 0, 0});
  for (int r = 3; r <= params.k - 1; ++r) s.steps.push_back({step_owner(r), Action::send_pointer, {}, 0, 0});
  s.output = {OutputKind::table_lookup, 0, 0};
  return compile(std::move(s), "parity", params.k - 1);
}

inline std::size_t parity_cost(const ProblemParams& p) {
  return 2 * static_cast<std::size_t>(p.n) + static_cast<std::size_t>(p.k - 1) * label_bits(p.n);
}

// ---------------------------------------------------------------------------
// Index-set protocol. Both parties reveal their values on a public m-subset I.
// From round 2 on, the first sender whose freshly computed pointer pt_r lies
// in I also knows pt_{r+1} (opponent's value on I) and therefore pt_{r+2}; it
// sends pt_r and pt_{min(r+2, k)} together and the relay runs two steps ahead
// afterwards. With no skip by round k-1 the protocol outputs 0.
//
// Layout: round 1 = [A values m*w][A pointer w]; round 2 = [B values m*w][B slot 2w];
// rounds 3..k-1 = [slot 2w]. The second half of a slot is 0 unless it carries
// the skipped-ahead pointer.

inline int default_nw_size(const ProblemParams& p) {
  return std::min(p.n, static_cast<int>(std::ceil(10.0 * p.n / p.k)));
}

inline std::vector<Label> sample_index_set(int n, int m, std::uint64_t public_seed) {
  if (m < 1 || m > n) throw std::invalid_argument("index-set size exceeds n");
  std::vector<Label> pool(n);
  std::iota(pool.begin(), pool.end(), 1);
  Rng rng(public_seed);
  for (int i = 0; i < m; ++i) {
    auto j = static_cast<std::size_t>(i) + rng.below(static_cast<std::uint64_t>(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

class NwPlan {
 public:
  NwPlan(ProblemParams params, int m, std::uint64_t public_seed)
      : params_(params), m_(m), seed_(public_seed) {
    params_.validate();
    if (params_.k < 3) throw std::invalid_argument("index-set protocol needs k >= 3");
    if (m < 1 || m > params_.n) throw std::invalid_argument("index-set size exceeds n");
    index_set_ = sample_index_set(params_.n, m, public_seed);
    in_set_.assign(params_.n + 1, false);
    for (Label x : index_set_) in_set_[x] = true;
    w_ = label_bits(params_.n);
  }

  struct View {
    std::vector<Label> chain{1};
    std::array<std::vector<Label>, 2> values;
    int skip_round = 0;  // 0: no skip yet
  };

  const ProblemParams& params() const { return params_; }
  int m() const { return m_; }
  std::uint64_t public_seed() const { return seed_; }
  const std::vector<Label>& index_set() const { return index_set_; }
  bool in_set(Label x) const { return in_set_[x]; }

  // Segment layout and the round each segment belongs to.
  std::vector<std::pair<Owner, std::size_t>> layout() const {
    const std::size_t mw = static_cast<std::size_t>(m_) * w_;
    std::vector<std::pair<Owner, std::size_t>> l;
    l.emplace_back(Owner::alice, mw);
    l.emplace_back(Owner::alice, w_);
    l.emplace_back(Owner::bob, mw);
    l.emplace_back(Owner::bob, 2 * w_);
    for (int r = 3; r <= params_.k - 1; ++r) l.emplace_back(step_owner(r), 2 * w_);
    return l;
  }
  std::size_t padding_bits() const { return static_cast<std::size_t>(params_.k - 2) * w_; }
  std::size_t cost() const {
    return 2 * static_cast<std::size_t>(m_) * w_ + static_cast<std::size_t>(params_.k - 1) * w_ + padding_bits();
  }

  static int round_of_segment(std::size_t seg) { return seg <= 1 ? 1 : (seg <= 3 ? 2 : static_cast<int>(seg) - 1); }

  View replay(BitView transcript, std::size_t upto_segment) const {
    View v;
    for (auto& vals : v.values) vals.assign(params_.n + 1, 0);
    std::size_t offset = 0;
    const auto l = layout();
    for (std::size_t s = 0; s < upto_segment; ++s) {
      const Owner owner = l[s].first;
      if (s == 0 || s == 2) {
        for (std::size_t j = 0; j < index_set_.size(); ++j) {
          Label x = get_label(transcript, offset + j * w_, w_);
          v.values[static_cast<int>(owner)][index_set_[j]] = x <= params_.n ? x : 1;
        }
      } else if (s == 1) {
        v.chain.push_back(clamp(get_label(transcript, offset, w_)));
      } else {
        absorb_slot(v, round_of_segment(s), transcript, offset);
      }
      offset += l[s].second;
    }
    return v;
  }

  void message(std::size_t seg, const FunctionTable& own, BitView prefix, Bits& out) const {
    if (seg == 0 || seg == 2) {
      for (Label x : index_set_) put_label(out, own(x), w_);
      return;
    }
    if (seg == 1) {
      put_label(out, own(1), w_);
      return;
    }
    const int r = round_of_segment(seg);
    const Owner sender = step_owner(r);
    View v = replay(prefix, seg);
    const int k = params_.k;
    const int j = static_cast<int>(v.chain.size()) - 1;
    if (j >= k) {
      out.assign(2 * w_, 0);
      return;
    }
    if (v.skip_round == 0) {
      const Label first = own(v.chain.back());  // pt_r
      put_label(out, first, w_);
      if (in_set(first)) {
        const Label next = v.values[static_cast<int>(other(sender))][first];  // pt_{r+1}
        put_label(out, r + 1 == k ? next : own(next), w_);
      } else {
        for (int b = 0; b < w_; ++b) out.push_back(0);
      }
      return;
    }
    put_label(out, own(v.chain.back()), w_);
    for (int b = 0; b < w_; ++b) out.push_back(0);
  }

  int output(BitView transcript) const {
    View v = replay(transcript, layout().size());
    const int k = params_.k;
    if (static_cast<int>(v.chain.size()) - 1 >= k) return v.chain[k] % 2;
    return 0;
  }

  // Round in which the skip happened for a full transcript, if any.
  std::optional<int> skip_round(BitView transcript) const {
    View v = replay(transcript, layout().size());
    if (v.skip_round == 0) return std::nullopt;
    return v.skip_round;
  }

 private:
  Label clamp(Label x) const { return x <= params_.n ? x : 1; }

  void absorb_slot(View& v, int r, BitView t, std::size_t offset) const {
    const int k = params_.k;
    if (static_cast<int>(v.chain.size()) - 1 >= k) return;
    const Label first = clamp(get_label(t, offset, w_));
    if (v.skip_round == 0) {
      v.chain.push_back(first);  // pt_r
      if (in_set(first)) {
        const Owner sender = step_owner(r);
        const Label next = v.values[static_cast<int>(other(sender))][first];
        v.chain.push_back(next);  // pt_{r+1}
        if (r + 1 < k) v.chain.push_back(clamp(get_label(t, offset + w_, w_)));  // pt_{r+2}
        v.skip_round = r;
      }
      return;
    }
    v.chain.push_back(first);
  }

  ProblemParams params_;
  int m_;
  std::uint64_t seed_;
  std::vector<Label> index_set_;
  std::vector<bool> in_set_;
  int w_ = 1;
};

inline ProtocolSpec nw_protocol(ProblemParams params, int m, std::uint64_t public_seed) {
  auto plan = std::make_shared<const NwPlan>(params, m, public_seed);
  ProtocolMetadata meta;
  meta.name = "nw:m=" + std::to_string(m) + ",seed=" + std::to_string(public_seed);
  meta.declared_rounds = params.k - 1;
  meta.alice_first = true;
  meta.padding_bits = plan->padding_bits();
  meta.source = "builtin nw " + std::to_string(m) + " " + std::to_string(public_seed) + "\n";
  return ProtocolSpec(
      params, plan->layout(),
      [plan](std::size_t seg, const FunctionTable& own, BitView prefix, Bits& out) {
        plan->message(seg, own, prefix, out);
      },
      [plan](BitView t) { return plan->output(t); }, std::move(meta));
}

}  // namespace pclab
