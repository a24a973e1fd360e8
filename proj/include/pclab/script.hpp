#pragma once

// Scripted protocols: an ordered list of steps, each an (owner, action) pair,
// compiled into a ProtocolSpec with one segment per step. Every party can
// replay the public part of a transcript (pointers sent so far, table values
// and parities revealed) and the sender adds its own table on top.

#include <algorithm>
#include <array>
#include <memory>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pclab/core.hpp"
#include "pclab/protocol.hpp"
#include "pclab/rng.hpp"

namespace pclab {

enum class Action { send_pointer, parity_table, values_on, parity_at, custom, pad };
enum class OutputKind { last_pointer_parity, table_lookup, constant, custom };

struct Step {
  Owner owner = Owner::alice;
  Action action = Action::send_pointer;
  std::vector<Label> indices;   // values_on
  Label at = 0;                 // parity_at; 0 means "latest public pointer"
  std::uint64_t seed = 0;       // custom
};

struct OutputSpec {
  OutputKind kind = OutputKind::last_pointer_parity;
  int constant = 0;
  std::uint64_t seed = 0;
};

struct Script {
  ProblemParams params;
  bool alice_first = true;
  std::vector<Step> steps;
  OutputSpec output;
};

inline const char* action_name(Action a) {
  switch (a) {
    case Action::send_pointer: return "SEND_POINTER";
    case Action::parity_table: return "PARITY_TABLE";
    case Action::values_on: return "VALUES_ON";
    case Action::parity_at: return "PARITY_AT";
    case Action::custom: return "CUSTOM";
    case Action::pad: return "PAD";
  }
  return "?";
}

inline std::size_t step_length(const Step& s, int n) {
  switch (s.action) {
    case Action::send_pointer: return static_cast<std::size_t>(label_bits(n));
    case Action::parity_table: return static_cast<std::size_t>(n);
    case Action::values_on: return s.indices.size() * static_cast<std::size_t>(label_bits(n));
    case Action::parity_at:
    case Action::custom:
    case Action::pad: return 1;
  }
  return 0;
}

// Big-endian encoding of label v as (v - 1) over `width` bits.
inline void put_label(Bits& out, Label v, int width) {
  for (int b = width - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>(((v - 1) >> b) & 1));
}

inline Label get_label(BitView bits, std::size_t offset, int width) {
  Label v = 0;
  for (int b = 0; b < width; ++b) v = (v << 1) | bits[offset + b];
  return v + 1;
}

// Pseudo-random bit keyed by seed, a transcript prefix and (optionally) a table.
inline int hash_bit(std::uint64_t seed, BitView prefix, const FunctionTable* own) {
  std::uint64_t h = splitmix64(seed ^ 0xa0761d6478bd642fULL);
  for (auto b : prefix) h = splitmix64(h + b + 1);
  h = splitmix64(h ^ (prefix.size() * 0x9e3779b97f4a7c15ULL));
  if (own != nullptr)
    for (Label v : own->values()) h = splitmix64(h + static_cast<std::uint64_t>(v));
  return static_cast<int>(h >> 63);
}

// What any observer of the transcript knows.
struct PublicView {
  std::vector<Label> chain{1};                 // pt_0, pt_1, ... as far as sent
  std::array<std::vector<Label>, 2> values;    // 0 = unknown
  std::array<std::vector<int>, 2> parity;      // -1 = unknown

  explicit PublicView(int n) {
    for (auto& v : values) v.assign(n + 1, 0);
    for (auto& p : parity) p.assign(n + 1, -1);
  }

  int last_index() const { return static_cast<int>(chain.size()) - 1; }

  // Value of the next pointer as computable by `sender`, or nullopt.
  std::optional<Label> next_pointer(Owner sender, const FunctionTable* own) const {
    const int j = last_index();
    const Owner owner = step_owner(j + 1);
    const Label cur = chain.back();
    if (owner == sender) {
      if (own == nullptr) return Label{0};  // computable, value private
      return (*own)(cur);
    }
    const Label known = values[static_cast<int>(owner)][cur];
    if (known != 0) return known;
    return std::nullopt;
  }

  void learn_value(Owner who, Label x, Label v) {
    values[static_cast<int>(who)][x] = v;
    parity[static_cast<int>(who)][x] = v % 2;
  }
};

class ScriptMachine {
 public:
  explicit ScriptMachine(Script script) : script_(std::move(script)) {
    script_.params.validate();
    const int n = script_.params.n;
    for (const auto& s : script_.steps) {
      if (s.action == Action::values_on) {
        if (s.indices.empty()) throw protocol_error("VALUES_ON needs a nonempty index set");
        if (static_cast<int>(s.indices.size()) > n) throw protocol_error("index-set size exceeds n");
        for (Label x : s.indices)
          if (x < 1 || x > n) throw protocol_error("VALUES_ON index out of range [1, n]");
      }
      if (s.action == Action::parity_at && (s.at < 0 || s.at > n))
        throw protocol_error("PARITY_AT index out of range [1, n]");
    }
    if (script_.output.kind == OutputKind::constant && script_.output.constant != 0 &&
        script_.output.constant != 1)
      throw protocol_error("CONST output must be 0 or 1");
  }

  const Script& script() const { return script_; }

  // Replays steps [0, upto) from the transcript.
  PublicView replay(BitView transcript, std::size_t upto) const {
    const int n = script_.params.n;
    const int w = label_bits(n);
    PublicView view(n);
    std::size_t offset = 0;
    for (std::size_t i = 0; i < upto; ++i) {
      const Step& s = script_.steps[i];
      const std::size_t len = step_length(s, n);
      switch (s.action) {
        case Action::send_pointer: {
          if (view.next_pointer(s.owner, nullptr).has_value()) {
            Label v = get_label(transcript, offset, w);
            if (v <= n) view.chain.push_back(v);
          }
          break;
        }
        case Action::parity_table:
          for (int x = 1; x <= n; ++x) view.parity[static_cast<int>(s.owner)][x] = transcript[offset + x - 1];
          break;
        case Action::values_on:
          for (std::size_t j = 0; j < s.indices.size(); ++j) {
            Label v = get_label(transcript, offset + j * w, w);
            if (v <= n) view.learn_value(s.owner, s.indices[j], v);
          }
          break;
        case Action::parity_at: {
          Label x = s.at == 0 ? view.chain.back() : s.at;
          view.parity[static_cast<int>(s.owner)][x] = transcript[offset];
          break;
        }
        case Action::custom:
        case Action::pad: break;
      }
      offset += len;
    }
    return view;
  }

  void message(std::size_t step, const FunctionTable& own, BitView prefix, Bits& out) const {
    const Step& s = script_.steps.at(step);
    const int n = script_.params.n;
    const int w = label_bits(n);
    switch (s.action) {
      case Action::send_pointer: {
        PublicView view = replay(prefix, step);
        auto v = view.next_pointer(s.owner, &own);
        if (v) put_label(out, *v, w);
        else out.assign(static_cast<std::size_t>(w), 0);
        break;
      }
      case Action::parity_table:
        for (int x = 1; x <= n; ++x) out.push_back(static_cast<std::uint8_t>(own(x) % 2));
        break;
      case Action::values_on:
        for (Label x : s.indices) put_label(out, own(x), w);
        break;
      case Action::parity_at: {
        Label x = s.at;
        if (x == 0) x = replay(prefix, step).chain.back();
        out.push_back(static_cast<std::uint8_t>(own(x) % 2));
        break;
      }
      case Action::custom: out.push_back(static_cast<std::uint8_t>(hash_bit(s.seed, prefix, &own))); break;
      case Action::pad: out.push_back(0); break;
    }
  }

  int output(BitView transcript) const {
    const auto& o = script_.output;
    switch (o.kind) {
      case OutputKind::constant: return o.constant;
      case OutputKind::custom: return hash_bit(o.seed, transcript, nullptr);
      case OutputKind::last_pointer_parity: return replay(transcript, script_.steps.size()).chain.back() % 2;
      case OutputKind::table_lookup: {
        PublicView view = replay(transcript, script_.steps.size());
        const int k = script_.params.k;
        while (view.last_index() < k) {
          const Owner owner = step_owner(view.last_index() + 1);
          const Label v = view.values[static_cast<int>(owner)][view.chain.back()];
          if (v == 0) break;
          view.chain.push_back(v);
        }
        if (view.last_index() >= k) return view.chain[k] % 2;
        if (view.last_index() == k - 1) {
          const int p = view.parity[static_cast<int>(step_owner(k))][view.chain.back()];
          return p < 0 ? 0 : p;
        }
        return 0;
      }
    }
    return 0;
  }

 private:
  Script script_;
};

inline std::string script_body(const Script& s) {
  std::ostringstream out;
  for (const auto& st : s.steps) {
    out << "step " << to_string(st.owner) << ' ' << action_name(st.action);
    if (st.action == Action::values_on) {
      out << ' ';
      for (std::size_t i = 0; i < st.indices.size(); ++i) out << (i ? "," : "") << st.indices[i];
    } else if (st.action == Action::parity_at) {
      out << ' ';
      if (st.at == 0) out << "ptr";
      else out << st.at;
    } else if (st.action == Action::custom) {
      out << ' ' << st.seed;
    }
    out << '\n';
  }
  out << "output ";
  switch (s.output.kind) {
    case OutputKind::last_pointer_parity: out << "LAST_POINTER_PARITY"; break;
    case OutputKind::table_lookup: out << "TABLE_LOOKUP"; break;
    case OutputKind::constant: out << "CONST " << s.output.constant; break;
    case OutputKind::custom: out << "CUSTOM " << s.output.seed; break;
  }
  out << '\n';
  return out.str();
}

inline ProtocolSpec compile(Script script, std::string name = "script", int declared_rounds = -1) {
  auto machine = std::make_shared<const ScriptMachine>(std::move(script));
  const Script& s = machine->script();
  std::vector<std::pair<Owner, std::size_t>> layout;
  for (const auto& st : s.steps) layout.emplace_back(st.owner, step_length(st, s.params.n));
  std::size_t padding = 0;
  for (const auto& st : s.steps)
    if (st.action == Action::pad) ++padding;
  ProtocolMetadata meta{std::move(name), declared_rounds, s.alice_first, padding, script_body(s)};
  return ProtocolSpec(
      s.params, layout,
      [machine](std::size_t seg, const FunctionTable& own, BitView prefix, Bits& out) {
        machine->message(seg, own, prefix, out);
      },
      [machine](BitView t) { return machine->output(t); }, std::move(meta));
}

// Depth-0 protocol with a constant answer.
inline ProtocolSpec constant_protocol(ProblemParams params, int bit) {
  Script s{params, true, {}, {OutputKind::constant, bit, 0}};
  return compile(std::move(s), "const:" + std::to_string(bit));
}

// Alice-first schedule of `depth` bits split into `rounds` nonempty blocks at
// seeded cut points.
inline std::vector<Owner> random_schedule(std::size_t depth, int rounds, std::uint64_t seed) {
  if (rounds < 0 || static_cast<std::size_t>(rounds) > depth || (depth > 0 && rounds == 0))
    throw std::invalid_argument("need 1 <= rounds <= depth (or depth = rounds = 0)");
  std::vector<Owner> schedule;
  if (depth == 0) return schedule;
  Rng rng(seed);
  std::vector<std::size_t> cuts;  // rounds - 1 distinct cut points in [1, depth)
  std::vector<std::size_t> pool;
  for (std::size_t i = 1; i < depth; ++i) pool.push_back(i);
  for (int c = 0; c + 1 < rounds; ++c) {
    std::size_t j = c + rng.below(pool.size() - c);
    std::swap(pool[c], pool[j]);
    cuts.push_back(pool[c]);
  }
  std::sort(cuts.begin(), cuts.end());
  Owner cur = Owner::alice;
  std::size_t next_cut = 0;
  for (std::size_t t = 0; t < depth; ++t) {
    if (next_cut < cuts.size() && cuts[next_cut] == t) {
      cur = other(cur);
      ++next_cut;
    }
    schedule.push_back(cur);
  }
  return schedule;
}

// One CUSTOM bit per position: each (owner, prefix) node splits the owner's
// tables by a keyed hash.
inline ProtocolSpec random_protocol(ProblemParams params, const std::vector<Owner>& schedule, std::uint64_t seed) {
  Script s;
  s.params = params;
  s.alice_first = schedule.empty() || schedule.front() == Owner::alice;
  for (std::size_t t = 0; t < schedule.size(); ++t) {
    Step st;
    st.owner = schedule[t];
    st.action = Action::custom;
    st.seed = derive_seed(seed, t);
    s.steps.push_back(st);
  }
  s.output = {OutputKind::custom, 0, derive_seed(seed, schedule.size() + 1'000'003ULL)};
  return compile(std::move(s), "random:seed=" + std::to_string(seed));
}

inline ProtocolSpec random_protocol(ProblemParams params, std::size_t depth, int rounds, std::uint64_t seed) {
  return random_protocol(params, random_schedule(depth, rounds, derive_seed(seed, 0xfeed)), seed);
}

}  // namespace pclab
