#pragma once

// Protocol files and the --protocol selector.
//
//   pclab-protocol 1
//   n 3
//   k 2
//   claim alice-first        # or: free
//   rounds 2                 # optional; checked against the schedule
//   step alice SEND_POINTER
//   step bob VALUES_ON 1,3
//   step alice PARITY_AT ptr # or a position 1..n
//   step bob CUSTOM 17
//   step alice PAD
//   output TABLE_LOOKUP      # LAST_POINTER_PARITY | CONST b | CUSTOM seed
//   pad-rounds 3             # optional, applied last
//
// Instead of steps and output a file may name a builtin:
//   builtin trivial | builtin parity | builtin nw <m> <seed>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pclab/protocol.hpp"
#include "pclab/script.hpp"
#include "pclab/upper_bounds.hpp"

namespace pclab {

inline std::string serialize(const ProtocolSpec& spec) {
  std::ostringstream out;
  out << "pclab-protocol 1\n";
  out << "n " << spec.params().n << '\n';
  out << "k " << spec.params().k << '\n';
  out << "claim " << (spec.metadata().alice_first ? "alice-first" : "free") << '\n';
  out << "rounds " << spec.rounds() << '\n';
  out << spec.metadata().source;
  return out.str();
}

namespace detail {

inline std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line.substr(0, line.find('#')));
  std::string t;
  while (in >> t) tokens.push_back(t);
  return tokens;
}

inline long parse_long(const std::string& tok, const std::string& where, std::size_t line, const char* what) {
  try {
    std::size_t used = 0;
    long v = std::stol(tok, &used);
    if (used == tok.size()) return v;
  } catch (const std::exception&) {
  }
  throw parse_error(where, line, std::string("expected integer ") + what + ", got '" + tok + "'");
}

inline std::uint64_t parse_u64(const std::string& tok, const std::string& where, std::size_t line,
                               const char* what) {
  try {
    std::size_t used = 0;
    std::uint64_t v = std::stoull(tok, &used);
    if (used == tok.size() && tok.front() != '-') return v;
  } catch (const std::exception&) {
  }
  throw parse_error(where, line, std::string("expected unsigned integer ") + what + ", got '" + tok + "'");
}

inline Owner parse_owner(const std::string& tok, const std::string& where, std::size_t line) {
  if (tok == "alice" || tok == "A") return Owner::alice;
  if (tok == "bob" || tok == "B") return Owner::bob;
  throw parse_error(where, line, "unknown owner '" + tok + "'");
}

}  // namespace detail

inline ProtocolSpec parse_protocol(std::istream& in, const std::string& where = "<protocol>") {
  using namespace detail;
  std::optional<long> n, k, rounds;
  std::size_t rounds_line = 0;
  bool alice_first = true;
  bool magic = false;
  std::optional<std::string> builtin;
  std::vector<std::string> builtin_args;
  std::size_t builtin_line = 0;
  Script script;
  bool have_output = false;
  std::optional<long> pad_to;
  std::size_t first_step_line = 0;

  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto tok = tokenize(raw);
    if (tok.empty()) continue;
    const std::string& key = tok[0];
    auto need = [&](std::size_t count) {
      if (tok.size() != count)
        throw parse_error(where, line, "'" + key + "' expects " + std::to_string(count - 1) + " argument(s)");
    };
    if (!magic) {
      if (key != "pclab-protocol") throw parse_error(where, line, "missing 'pclab-protocol 1' header");
      need(2);
      if (tok[1] != "1") throw parse_error(where, line, "unsupported format version " + tok[1]);
      magic = true;
      continue;
    }
    if (key == "n") {
      need(2);
      n = parse_long(tok[1], where, line, "n");
      if (*n < 2 || *n > 255) throw parse_error(where, line, "n out of range [2, 255]");
    } else if (key == "k") {
      need(2);
      k = parse_long(tok[1], where, line, "k");
      if (*k < 1) throw parse_error(where, line, "k must be at least 1");
    } else if (key == "claim") {
      need(2);
      if (tok[1] == "alice-first") alice_first = true;
      else if (tok[1] == "free") alice_first = false;
      else throw parse_error(where, line, "claim must be alice-first or free");
    } else if (key == "rounds") {
      need(2);
      rounds = parse_long(tok[1], where, line, "rounds");
      rounds_line = line;
    } else if (key == "builtin") {
      if (tok.size() < 2) throw parse_error(where, line, "builtin needs a name");
      builtin = tok[1];
      builtin_args.assign(tok.begin() + 2, tok.end());
      builtin_line = line;
    } else if (key == "step") {
      if (!n) throw parse_error(where, line, "'n' must precede steps");
      if (tok.size() < 3) throw parse_error(where, line, "step needs an owner and an action");
      Step st;
      st.owner = parse_owner(tok[1], where, line);
      const std::string& act = tok[2];
      if (act == "SEND_POINTER" || act == "PARITY_TABLE" || act == "PAD") {
        need(3);
        st.action = act == "SEND_POINTER" ? Action::send_pointer
                    : act == "PAD"        ? Action::pad
                                          : Action::parity_table;
      } else if (act == "VALUES_ON") {
        need(4);
        st.action = Action::values_on;
        std::stringstream list(tok[3]);
        std::string item;
        while (std::getline(list, item, ',')) {
          long x = parse_long(item, where, line, "index");
          if (x < 1 || x > *n) throw parse_error(where, line, "index " + item + " out of range [1, n]");
          st.indices.push_back(static_cast<Label>(x));
        }
        if (static_cast<long>(st.indices.size()) > *n) throw parse_error(where, line, "index-set size exceeds n");
      } else if (act == "PARITY_AT") {
        need(4);
        st.action = Action::parity_at;
        if (tok[3] == "ptr") st.at = 0;
        else {
          long x = parse_long(tok[3], where, line, "position");
          if (x < 1 || x > *n) throw parse_error(where, line, "position out of range [1, n]");
          st.at = static_cast<Label>(x);
        }
      } else if (act == "CUSTOM") {
        need(4);
        st.action = Action::custom;
        st.seed = parse_u64(tok[3], where, line, "seed");
      } else {
        throw parse_error(where, line, "unknown action '" + act + "'");
      }
      if (script.steps.empty()) first_step_line = line;
      script.steps.push_back(std::move(st));
    } else if (key == "output") {
      if (tok.size() < 2) throw parse_error(where, line, "output needs a rule");
      const std::string& rule = tok[1];
      if (rule == "LAST_POINTER_PARITY" || rule == "TABLE_LOOKUP") {
        need(2);
        script.output.kind = rule == "TABLE_LOOKUP" ? OutputKind::table_lookup : OutputKind::last_pointer_parity;
      } else if (rule == "CONST") {
        need(3);
        long b = parse_long(tok[2], where, line, "bit");
        if (b != 0 && b != 1) throw parse_error(where, line, "CONST output must be 0 or 1");
        script.output = {OutputKind::constant, static_cast<int>(b), 0};
      } else if (rule == "CUSTOM") {
        need(3);
        script.output = {OutputKind::custom, 0, parse_u64(tok[2], where, line, "seed")};
      } else {
        throw parse_error(where, line, "unknown output rule '" + rule + "'");
      }
      have_output = true;
    } else if (key == "pad-rounds") {
      need(2);
      pad_to = parse_long(tok[1], where, line, "rounds");
    } else {
      throw parse_error(where, line, "unknown directive '" + key + "'");
    }
  }
  if (!magic) throw parse_error(where, line, "empty protocol file");
  if (!n || !k) throw parse_error(where, line, "header must give n and k");
  if (builtin && (!script.steps.empty() || have_output))
    throw parse_error(where, builtin_line, "builtin protocols cannot also list steps or an output");

  const ProblemParams params(static_cast<int>(*n), static_cast<int>(*k));
  std::optional<ProtocolSpec> spec;
  try {
    if (builtin) {
      auto arg = [&](std::size_t i, const char* what) -> const std::string& {
        if (i >= builtin_args.size()) throw parse_error(where, builtin_line, std::string("builtin needs ") + what);
        return builtin_args[i];
      };
      if (*builtin == "trivial") spec = trivial_protocol(params);
      else if (*builtin == "parity") spec = parity_protocol(params);
      else if (*builtin == "nw") {
        long m = parse_long(arg(0, "m"), where, builtin_line, "m");
        std::uint64_t seed = parse_u64(arg(1, "seed"), where, builtin_line, "seed");
        if (m > *n) throw parse_error(where, builtin_line, "index-set size exceeds n");
        if (m < 1) throw parse_error(where, builtin_line, "index-set size must be positive");
        spec = nw_protocol(params, static_cast<int>(m), seed);
      } else {
        throw parse_error(where, builtin_line, "unknown builtin '" + *builtin + "'");
      }
    } else {
      if (!have_output) throw parse_error(where, line, "missing output rule");
      script.params = params;
      script.alice_first = alice_first;
      if (alice_first && !script.steps.empty() && script.steps.front().owner != Owner::alice)
        throw parse_error(where, first_step_line, "claim alice-first but the first step belongs to bob");
      spec = compile(std::move(script), where);
    }
    if (pad_to) spec = pad_rounds(*spec, static_cast<int>(*pad_to));
  } catch (const parse_error&) {
    throw;
  } catch (const std::exception& e) {
    throw parse_error(where, builtin ? builtin_line : line, e.what());
  }
  if (rounds && *rounds != spec->rounds())
    throw parse_error(where, rounds_line,
                      "schedule/round mismatch: schedule has " + std::to_string(spec->rounds()) + " rounds, header says " +
                          std::to_string(*rounds));
  return *spec;
}

inline ProtocolSpec parse_protocol_text(const std::string& text, const std::string& where = "<protocol>") {
  std::istringstream in(text);
  return parse_protocol(in, where);
}

inline ProtocolSpec load_protocol(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open protocol file '" + path + "'");
  return parse_protocol(in, path);
}

// trivial | parity | nw[:m=<int>,seed=<int>] | const:<bit> |
// random:depth=<int>,rounds=<int>,seed=<int> | file:<path>
inline ProtocolSpec protocol_from_selector(const std::string& selector, const ProblemParams& params) {
  const auto colon = selector.find(':');
  const std::string name = selector.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : selector.substr(colon + 1);
  auto options = [&]() {
    std::vector<std::pair<std::string, std::string>> kv;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("protocol option '" + item + "' is not key=value");
      kv.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    return kv;
  };
  if (name == "trivial") return trivial_protocol(params);
  if (name == "parity") return parity_protocol(params);
  if (name == "nw") {
    int m = default_nw_size(params);
    std::uint64_t seed = 0;
    for (auto& [key, value] : options()) {
      if (key == "m") m = std::stoi(value);
      else if (key == "seed") seed = std::stoull(value);
      else throw std::invalid_argument("unknown nw option '" + key + "'");
    }
    return nw_protocol(params, m, seed);
  }
  if (name == "const") {
    if (rest != "0" && rest != "1") throw std::invalid_argument("const protocol needs const:0 or const:1");
    return constant_protocol(params, rest == "1");
  }
  if (name == "random") {
    std::size_t depth = 4;
    int rounds = 2;
    std::uint64_t seed = 0;
    for (auto& [key, value] : options()) {
      if (key == "depth") depth = std::stoul(value);
      else if (key == "rounds") rounds = std::stoi(value);
      else if (key == "seed") seed = std::stoull(value);
      else throw std::invalid_argument("unknown random option '" + key + "'");
    }
    return random_protocol(params, depth, rounds, seed);
  }
  if (name == "file") return load_protocol(rest);
  throw std::invalid_argument("unknown protocol '" + selector + "'");
}

}  // namespace pclab
