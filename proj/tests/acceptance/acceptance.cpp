// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Training criteria run real desk-scale trainings on the
// corpus given on the command line.
//
//   acceptance --train DIR --val DIR --work DIR [--only 1,2,...]

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "igkit/config.hpp"
#include "verify.hpp"

namespace fs = std::filesystem;
using namespace igkit;
using verify::CheckResult;

namespace {

struct Line {
  int id;
  CheckResult result;
};

// Applies a wall-time budget on top of the check's own verdict.
CheckResult within(CheckResult r, double budget_s) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << "; " << r.seconds << " s (budget " << budget_s << " s)";
  r.detail += os.str();
  r.passed = r.passed && r.seconds < budget_s;
  return r;
}

void save(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"igkit acceptance criteria"};
  std::string train, val, work;
  std::string only;
  std::int64_t cka_iterations = 2000;
  app.add_option("--train", train, "training image directory")->required();
  app.add_option("--val", val, "held-out image directory")->required();
  app.add_option("--work", work, "output directory for runs and reports")->required();
  app.add_option("--only", only, "comma-separated criterion numbers to run");
  app.add_option("--cka-iterations", cka_iterations, "iterations per scale-specific model");
  CLI11_PARSE(app, argc, argv);

  std::set<int> selected;
  if (!only.empty())
    for (int id : parse_int_list(only, "--only")) selected.insert(id);
  auto want = [&](int id) { return selected.empty() || selected.count(id) > 0; };

  const verify::Corpus corpus{train, val};
  const fs::path dir(work);
  fs::create_directories(dir);
  std::vector<Line> lines;
  auto record = [&](int id, CheckResult r) {
    std::cout << "  -> " << (r.passed ? "PASS" : "FAIL") << " " << r.detail << std::endl;
    lines.push_back({id, std::move(r)});
  };
  auto announce = [](int id, const std::string& what) { std::cout << "[" << id << "] " << what << std::endl; };

  if (want(1)) {
    announce(1, "fgrep three-form equivalence");
    record(1, within(verify::timed([] { return verify::check_fgrep_equivalence(100, 7); }), 10.0));
  }
  if (want(2)) {
    announce(2, "instantiation equivalence");
    record(2, verify::timed([] { return verify::check_instantiation(20, 11); }));
  }
  if (want(3)) {
    announce(3, "gradient validation");
    record(3, within(verify::timed(verify::check_gradients), 60.0));
  }
  if (want(4)) {
    announce(4, "parameter counts");
    record(4, verify::timed(verify::check_param_counts));
  }
  if (want(5)) {
    announce(5, "efficiency direction");
    std::vector<analysis::BenchResult> rows;
    record(5, verify::timed([&] { return verify::check_efficiency(true, &rows); }));
    std::cout << analysis::bench_pretty(rows);
    save(dir / "bench.csv", analysis::bench_csv(rows));
  }
  if (want(6)) {
    announce(6, "zero-network degeneracies");
    record(6, verify::timed(verify::check_zero_degeneracy));
  }

  std::optional<verify::TrainingOutcome> plus;
  if (want(7) || want(8)) {
    announce(7, "desk-scale multi-scale training (IGConv+)");
    const CheckResult r = verify::timed([&] {
      plus = verify::run_experiment(verify::desk_config(Variant::IGConvPlus), corpus, dir / "igconv_plus", std::cout);
      std::cout << plus->table.pretty();
      return verify::judge_multiscale(*plus);
    });
    if (want(7)) record(7, r);
    if (!plus) std::cout << "  training failed: " << r.detail << std::endl;
  }
  if (want(8)) {
    announce(8, "ablation direction (IGConv+ vs IGConv)");
    record(8, verify::timed([&] {
      if (!plus) return CheckResult{"ablation direction (x2)", false, 0.0, "IGConv+ run unavailable", 0.0};
      TrainConfig cfg = verify::desk_config(Variant::IGConv);
      cfg.loss.freq_enabled = false;
      const verify::TrainingOutcome plain = verify::run_experiment(cfg, corpus, dir / "igconv", std::cout);
      std::cout << plain.table.pretty();
      return verify::judge_ablation(*plus, plain);
    }));
  }
  if (want(9)) {
    announce(9, "metric fidelity");
    record(9, verify::timed([] { return verify::check_metric_fidelity(5); }));
  }
  if (want(10)) {
    announce(10, "cka instrument and layer trend");
    record(10, verify::timed([&] {
      CheckResult inst = verify::check_cka_instrument(3);
      const analysis::CkaReport rep = verify::scale_specific_cka(corpus, dir / "cka", cka_iterations, std::cout);
      std::cout << rep.pretty();
      save(dir / "cka.csv", rep.csv());
      CheckResult trend = verify::judge_cka_trend(rep);
      CheckResult out;
      out.name = "cka";
      out.passed = inst.passed && trend.passed;
      out.metric = trend.metric;
      out.detail = inst.detail + "; " + trend.detail;
      return out;
    }));
  }
  if (want(11)) {
    announce(11, "determinism");
    record(11, verify::timed([&] { return verify::check_determinism(corpus, dir / "determinism", 20); }));
  }

  static const char* names[] = {"",
                                "FGRep three-form equivalence",
                                "Instantiation equivalence",
                                "Gradient validation",
                                "Parameter-count reproduction",
                                "Efficiency direction",
                                "Zero-network degeneracies",
                                "Desk-scale multi-scale training",
                                "Ablation direction",
                                "Metric fidelity",
                                "CKA instrument",
                                "Determinism"};
  std::cout << "\n==== acceptance summary ====\n";
  int failed = 0;
  std::ostringstream summary;
  for (const Line& l : lines) {
    summary << (l.result.passed ? "PASS" : "FAIL") << "  " << std::setw(2) << l.id << ". " << names[l.id] << "  ("
            << std::fixed << std::setprecision(1) << l.result.seconds << " s)  " << l.result.detail << "\n";
    failed += l.result.passed ? 0 : 1;
  }
  summary << (lines.size() - failed) << "/" << lines.size() << " criteria passed\n";
  std::cout << summary.str();
  save(dir / "summary.txt", summary.str());
  return failed == 0 ? 0 : 1;
}
