// pclab command-line front end.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "pclab/pclab.hpp"

using namespace pclab;
using nlohmann::json;

namespace {

struct Common {
  int n = 3;
  int k = 3;
  std::string protocol = "trivial";
  std::string gamma = "auto";
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool json_out = false;
};

struct Failed {
  int code;
};

double resolve_gamma(const std::string& g, int n) {
  if (g == "auto") return DensityParams::for_n(n).gamma;
  std::size_t used = 0;
  double v = std::stod(g, &used);
  if (used != g.size()) throw std::invalid_argument("--gamma must be 'auto' or a number");
  if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument("--gamma must lie in (0, 1)");
  return v;
}

ProtocolSpec load_spec(Common& c) {
  if (c.protocol.rfind("file:", 0) == 0) {
    ProtocolSpec spec = load_protocol(c.protocol.substr(5));
    c.n = spec.params().n;
    c.k = spec.params().k;
    return spec;
  }
  return protocol_from_selector(c.protocol, ProblemParams(c.n, c.k));
}

json header(const std::string& command, const Common& c, std::optional<double> gamma) {
  json h = {{"tool", "pclab"}, {"version", kVersion}, {"command", command}, {"n", c.n},
            {"k", c.k},        {"protocol", c.protocol}, {"seed", c.seed}};
  if (gamma) {
    h["gamma"] = *gamma;
    h["gamma_source"] = c.gamma == "auto" ? "auto: 1 - 0.1/log2(n)" : "given";
  }
  return h;
}

void print_header(std::ostream& out, const json& h) {
  out << "# pclab " << h["version"].get<std::string>() << "  " << h["command"].get<std::string>();
  for (const char* key : {"n", "k", "protocol", "seed", "gamma", "gamma_source", "runs", "samples", "input"})
    if (h.contains(key)) out << "  " << key << "=" << (h[key].is_string() ? h[key].get<std::string>() : h[key].dump());
  out << '\n';
}

void emit(const Common& c, json header_json, json body, const std::function<void(std::ostream&)>& text) {
  if (c.json_out) {
    body["header"] = std::move(header_json);
    std::cout << body.dump(2) << '\n';
  } else {
    print_header(std::cout, header_json);
    text(std::cout);
  }
}

FunctionTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open table file '" + path + "'");
  return parse_table(in, path);
}

void add_common(CLI::App* cmd, Common& c, bool protocol) {
  cmd->add_option("--n", c.n, "labels per table")->check(CLI::Range(2, 255));
  cmd->add_option("--k", c.k, "pointer steps")->check(CLI::PositiveNumber);
  if (protocol)
    cmd->add_option("--protocol", c.protocol,
                    "trivial | parity | nw[:m=M,seed=S] | const:B | random:depth=D,rounds=R,seed=S | file:PATH");
  cmd->add_option("--seed", c.seed, "base seed");
  cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)");
  cmd->add_flag("--json", c.json_out, "machine-readable output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pointer-chasing communication lab"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Common c;

  // eval
  std::string fa_path, fb_path;
  auto* eval = app.add_subcommand("eval", "print pt_0..pt_k and PC_k for two tables");
  add_common(eval, c, false);
  eval->add_option("--fa", fa_path, "Alice's table file")->required();
  eval->add_option("--fb", fb_path, "Bob's table file")->required();

  // run
  auto* runc = app.add_subcommand("run", "run a protocol on one input pair");
  add_common(runc, c, true);
  runc->add_option("--fa", fa_path)->required();
  runc->add_option("--fb", fb_path)->required();

  // accuracy
  bool exact = false;
  std::uint64_t samples = 10000, public_seeds = 0;
  auto* acc = app.add_subcommand("accuracy", "accuracy under uniform inputs");
  add_common(acc, c, true);
  acc->add_flag("--exact", exact, "enumerate all n^(2n) pairs");
  acc->add_option("--samples", samples, "Monte-Carlo input samples")->check(CLI::PositiveNumber);
  acc->add_option("--public-seeds", public_seeds, "nw only: average over this many fresh public seeds");

  // ds
  std::size_t runs = 100;
  bool check = false;
  std::string trace_path, csv_path;
  auto* ds = app.add_subcommand("ds", "decomposition-and-sampling runs");
  add_common(ds, c, true);
  ds->add_option("--gamma", c.gamma, "density parameter or 'auto'");
  ds->add_option("--runs", runs)->check(CLI::PositiveNumber);
  ds->add_flag("--check-invariants", check, "assert the loop invariants after every iteration");
  ds->add_flag("--exact", exact, "enumerate every branch exactly and run the uniformity oracle");
  ds->add_option("--trace", trace_path, "JSON-lines trace file");
  ds->add_option("--csv", csv_path, "per-run CSV file");

  // partition
  std::string input_path;
  auto* part = app.add_subcommand("partition", "density-restoring partition of a point set");
  part->add_option("--input", input_path, "subcube file")->required();
  part->add_option("--gamma", c.gamma, "density parameter or 'auto'");
  part->add_flag("--json", c.json_out, "machine-readable output");

  // report
  auto* rep = app.add_subcommand("report", "bound reports for a protocol");
  add_common(rep, c, true);
  rep->add_option("--gamma", c.gamma, "density parameter or 'auto'");
  rep->add_option("--runs", runs)->check(CLI::PositiveNumber);
  rep->add_option("--samples", samples, "accuracy samples when exhaustive is out of budget");
  rep->add_option("--csv", csv_path, "per-run CSV file of the DS runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // usage errors share the parse-error code
  }

  try {
    const Budget budget = Budget::from_env();
    if (*eval) {
      FunctionTable fa = load_table(fa_path), fb = load_table(fb_path);
      require_same_dimension(fa, fb);
      if (eval->count("--n") && c.n != fa.n()) throw std::invalid_argument("--n does not match the table files");
      c.n = fa.n();
      ProblemParams p(c.n, c.k);
      json pts = json::array();
      for (int r = 0; r <= c.k; ++r) pts.push_back(eval_pointer(r, fa, fb));
      const int pc = eval_pc(p, fa, fb);
      emit(c, header("eval", c, std::nullopt), {{"pointers", pts}, {"pc", pc}}, [&](std::ostream& out) {
        for (int r = 0; r <= c.k; ++r) out << "pt_" << r << " = " << pts[r] << '\n';
        out << "PC_" << c.k << " = " << pc << '\n';
      });
      return 0;
    }

    if (*runc) {
      FunctionTable fa = load_table(fa_path), fb = load_table(fb_path);
      require_same_dimension(fa, fb);
      if (!runc->count("--n")) c.n = fa.n();
      ProtocolSpec spec = load_spec(c);
      RunResult r = run(spec, fa, fb);
      const int pc = eval_pc(spec.params(), fa, fb);
      emit(c, header("run", c, std::nullopt),
           {{"transcript", r.transcript.str()}, {"output", r.output}, {"cc", r.cc}, {"rounds", r.rounds}, {"pc", pc}},
           [&](std::ostream& out) {
             out << "transcript " << r.transcript.str() << '\n'
                 << "output     " << r.output << "  (PC_k = " << pc << ")\n"
                 << "cc         " << r.cc << '\n'
                 << "rounds     " << r.rounds << '\n';
           });
      return 0;
    }

    if (*acc) {
      ProtocolSpec spec = load_spec(c);
      AccuracyResult a;
      json h = header("accuracy", c, std::nullopt);
      if (public_seeds > 0) {
        if (c.protocol.rfind("nw", 0) != 0) throw std::invalid_argument("--public-seeds applies to nw only");
        const ProblemParams p = spec.params();
        int m = default_nw_size(p);
        if (auto pos = c.protocol.find("m="); pos != std::string::npos) m = std::stoi(c.protocol.substr(pos + 2));
        a = randomized_accuracy([&](std::uint64_t s) { return nw_protocol(p, m, s); }, p, public_seeds,
                                samples, c.seed, c.threads);
        h["public_seeds"] = public_seeds;
        h["samples"] = samples;
      } else if (exact) {
        a = exact_accuracy(spec, budget, c.threads);
      } else {
        a = mc_accuracy(spec, samples, c.seed, c.threads);
        h["samples"] = samples;
      }
      emit(c, h, to_json(a), [&](std::ostream& out) {
        out << "mode      " << to_string(a.mode) << '\n';
        if (a.mode == AccuracyMode::exact) {
          out << "accuracy  " << a.exact().str() << "  (" << fmt(a.value) << ")\n";
          out << "pairs     " << a.pair_count << '\n';
        } else {
          out << "accuracy  " << fmt(a.value) << "  stderr " << fmt(a.stderr_) << '\n';
          out << "samples   " << a.samples << '\n';
        }
      });
      return 0;
    }

    if (*ds) {
      ProtocolSpec spec = load_spec(c);
      const DensityParams params{resolve_gamma(c.gamma, c.n), 1e-9};
      json h = header("ds", c, params.gamma);
      if (exact) {
        auto outcomes = ds_enumerate(spec, params, budget);
        auto uni = uniformity_check(c.n, outcomes, budget);
        json list = json::array();
        for (const auto& o : outcomes) list.push_back(to_json(o, c.n));
        if (!trace_path.empty()) {
          std::ofstream t(trace_path);
          for (const auto& o : outcomes) t << to_json(o, c.n).dump() << '\n';
        }
        json body = {{"outcomes", list},
                     {"total_probability", uni.total.str()},
                     {"pairs", uni.pairs},
                     {"mismatched_pairs", uni.mismatched},
                     {"uniformity", uni.ok() ? "PASS" : "FAIL"}};
        emit(c, h, body, [&](std::ostream& out) {
          out << "outcomes          " << outcomes.size() << '\n'
              << "total probability " << uni.total.str() << '\n'
              << "uniformity oracle " << (uni.ok() ? "PASS" : "FAIL") << "  (" << uni.mismatched << " of "
              << uni.pairs << " pairs off 1/n^(2n))\n";
        });
        return uni.ok() ? 0 : 1;
      }
      h["runs"] = runs;
      std::vector<std::pair<DsOutcome, DsTrace>> results =
          parallel_map(runs, c.threads, [&](std::size_t i) { return ds_run(spec, params, derive_seed(c.seed, i), check); });
      std::vector<DsOutcome> outcomes;
      for (auto& [o, t] : results) outcomes.push_back(o);
      if (!trace_path.empty()) {
        std::ofstream t(trace_path);
        t << json{{"type", "header"}, {"header", h}}.dump() << '\n';
        for (std::size_t i = 0; i < results.size(); ++i) write_trace(t, results[i].second, results[i].first, c.n, i);
      }
      if (!csv_path.empty()) {
        std::ofstream f(csv_path);
        write_ds_csv(f, outcomes, c.n, c.seed);
      }
      const Estimate fixed = estimate_avg_fixed_size(outcomes, c.n);
      const Estimate bad = estimate_bad_prob(outcomes);
      json body = {{"fixed_size", {{"mean", fixed.mean}, {"stderr", fixed.stderr_}}},
                   {"bad", {{"mean", bad.mean}, {"stderr", bad.stderr_}}},
                   {"invariants_checked", check},
                   {"cc", spec.depth()},
                   {"rounds", spec.rounds()}};
      emit(c, h, body, [&](std::ostream& out) {
        out << "runs              " << runs << '\n'
            << "cc                " << spec.depth() << "  rounds " << spec.rounds() << '\n'
            << "avg fixed size    " << fmt(fixed.mean) << "  stderr " << fmt(fixed.stderr_) << '\n'
            << "Pr[bad]           " << fmt(bad.mean) << "  stderr " << fmt(bad.stderr_) << '\n'
            << "invariants        " << (check ? "checked every iteration, no violations" : "not checked") << '\n';
      });
      return 0;
    }

    if (*part) {
      SubcubeSet s = load_subcube(input_path);
      c.n = s.n;
      const DensityParams params{resolve_gamma(c.gamma, s.n), 1e-9};
      const auto parts = density_restoring_partition(s, params, budget);
      const auto report = verify_partition(s, params, parts);
      json h = {{"tool", "pclab"}, {"version", kVersion}, {"command", "partition"}, {"input", input_path},
                {"n", s.n},        {"gamma", params.gamma},
                {"gamma_source", c.gamma == "auto" ? "auto: 1 - 0.1/log2(n)" : "given"}};
      json list = json::array();
      for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& p = parts[i];
        const auto& chk = report.parts[i];
        list.push_back({{"size", p.part.size()},
                        {"I", labels_json(p.I)},
                        {"alpha", p.alpha},
                        {"delta", p.delta},
                        {"item1", chk.item1},
                        {"item2", chk.item2},
                        {"item3", chk.item3},
                        {"deficiency", chk.lhs},
                        {"deficiency_bound", chk.rhs}});
      }
      json body = {{"parts", list},
                   {"disjoint", report.disjoint},
                   {"covers", report.covers},
                   {"expected_delta", report.expected_delta},
                   {"expected_delta_bound", kDeltaIntegralBound},
                   {"ok", report.ok()}};
      emit(c, h, body, [&](std::ostream& out) {
        out << "part  size  I            alpha        delta     items\n";
        for (std::size_t i = 0; i < parts.size(); ++i) {
          const auto& p = parts[i];
          const auto& chk = report.parts[i];
          std::string I, alpha;
          for (int x : p.I) I += (I.empty() ? "" : ",") + std::to_string(x + 1);
          for (Label a : p.alpha) alpha += (alpha.empty() ? "" : ",") + std::to_string(a);
          out << std::left << std::setw(6) << i + 1 << std::setw(6) << p.part.size() << std::setw(13)
              << (I.empty() ? "-" : I) << std::setw(13) << (alpha.empty() ? "-" : alpha) << std::setw(10)
              << fmt(p.delta) << (chk.item1 ? "1" : "-") << (chk.item2 ? "2" : "-") << (chk.item3 ? "3" : "-")
              << '\n';
        }
        out << "disjoint " << (report.disjoint ? "yes" : "no") << "  covers " << (report.covers ? "yes" : "no")
            << "  E[delta] " << fmt(report.expected_delta) << " (<= " << fmt(kDeltaIntegralBound) << ")\n"
            << "verify   " << (report.ok() ? "PASS" : "FAIL") << '\n';
      });
      return report.ok() ? 0 : 1;
    }

    if (*rep) {
      ProtocolSpec spec = load_spec(c);
      const DensityParams params{resolve_gamma(c.gamma, c.n), 1e-9};
      ReportConfig cfg;
      cfg.runs = runs;
      cfg.seed = c.seed;
      cfg.threads = c.threads;
      cfg.mc_samples = samples;
      cfg.budget = budget;
      json h = header("report", c, params.gamma);
      h["runs"] = runs;
      AccuracyResult a;
      DsSummary summary;
      const auto reports = full_report(spec, params, cfg, &a, &summary);
      if (!csv_path.empty()) {
        std::ofstream f(csv_path);
        write_ds_csv(f, summary.outcomes, c.n, c.seed);
      }
      bool ok = true;
      json list = json::array();
      for (const auto& r : reports) {
        ok = ok && r.ok();
        list.push_back(to_json(r));
      }
      json body = {{"accuracy", to_json(a)}, {"reports", list}, {"ok", ok}};
      if (summary.available)
        body["ds"] = {{"fixed_size", {{"mean", summary.fixed.mean}, {"stderr", summary.fixed.stderr_}}},
                      {"bad", {{"mean", summary.bad.mean}, {"stderr", summary.bad.stderr_}}}};
      emit(c, h, body, [&](std::ostream& out) {
        out << "accuracy " << to_string(a.mode) << " " << fmt(a.value);
        if (a.mode == AccuracyMode::monte_carlo) out << "  stderr " << fmt(a.stderr_);
        out << '\n';
        if (summary.available)
          out << "DS       avg fixed size " << fmt(summary.fixed.mean) << " (stderr " << fmt(summary.fixed.stderr_)
              << ")  Pr[bad] " << fmt(summary.bad.mean) << " (stderr " << fmt(summary.bad.stderr_) << ")\n";
        else
          out << "DS       not run: " << summary.reason << '\n';
        out << "constants\n";
        print_constants(out, reports.back().constants);
        for (const auto& r : reports) print_report(out, r);
        out << "overall  " << (ok ? "PASS" : "FAIL") << '\n';
      });
      return ok ? 0 : 1;
    }
  } catch (const parse_error& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const budget_error& e) {
    std::cerr << "budget exceeded: " << e.what() << " (raise it with PC_LAB_BUDGET)\n";
    return 2;
  } catch (const invariant_violation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
