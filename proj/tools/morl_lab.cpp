// morl_lab: command-line front end for the experiment pipeline.

#include "morl/harness.hpp"
#include "morl/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace morl;
using nlohmann::json;

struct CommonOptions {
  std::string config_path;
  std::string out;
  std::string reducer;
  std::string ablation;
  bool ablation_set = false;
  long seed = -1;
  std::string seeds;
};

ExperimentConfig load(const CommonOptions& o) {
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  if (!o.reducer.empty()) {
    c.reducer = o.reducer;
    if (!o.ablation_set) c.ablation = {};
  }
  if (o.ablation_set) c.ablation = AblationFlags::parse(o.ablation);
  if (!o.seeds.empty()) c.seeds = parse_seed_range(o.seeds);
  if (!o.out.empty()) c.out_dir = o.out;
  c.validate();
  return c;
}

std::uint64_t single_seed(const CommonOptions& o, const ExperimentConfig& c) {
  if (o.seed >= 0) return static_cast<std::uint64_t>(o.seed);
  if (c.seeds.size() == 1) return c.seeds.front();
  throw UsageError("this verb needs --seed N");
}

void write_timing(const fs::path& dir, const std::string& stage, double seconds) {
  write_text(dir / ("timing_" + stage + ".json"), json_text({{"stage", stage}, {"wall_seconds", seconds}}));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_train(const CommonOptions& o) {
  const ExperimentConfig c = load(o);
  const std::uint64_t seed = single_seed(o, c);
  const auto t0 = std::chrono::steady_clock::now();
  TrainedRun run = run_training(c, seed);
  const fs::path dir = seed_dir(method_dir(c), seed);
  write_text(dir / "checkpoint.json", json_text(checkpoint(run)));
  write_training_logs(dir, run.logs);
  write_timing(dir, "train", seconds_since(t0));
  for (const auto& w : run.logs.warnings) std::cerr << json({{"warning", w}}).dump() << "\n";
  std::cout << json({{"verb", "train"}, {"seed", seed}, {"dir", dir.string()}}).dump() << "\n";
  return 0;
}

int cmd_evaluate(const CommonOptions& o) {
  const ExperimentConfig c = load(o);
  const std::uint64_t seed = single_seed(o, c);
  const fs::path dir = seed_dir(method_dir(c), seed);
  const auto t0 = std::chrono::steady_clock::now();
  const TrainedRun run = restore_run(c, json::parse(read_text(dir / "checkpoint.json")));
  write_text(dir / "evaluated.csv", evaluated_csv(evaluate(*run.agent, c)));
  write_timing(dir, "evaluate", seconds_since(t0));
  std::cout << json({{"verb", "evaluate"}, {"seed", seed}, {"file", (dir / "evaluated.csv").string()}}).dump() << "\n";
  return 0;
}

int cmd_score(const CommonOptions& o) {
  const ExperimentConfig c = load(o);
  const std::uint64_t seed = single_seed(o, c);
  const fs::path dir = seed_dir(method_dir(c), seed);
  const SeedReport r = make_seed_report(c, seed, read_evaluated_csv(read_text(dir / "evaluated.csv"), c.policy_dim()));
  write_text(dir / "report.json", json_text(to_json(r)));
  write_text(dir / "front.csv", front_csv(r.score.front));
  std::cout << json({{"verb", "score"},
                     {"seed", seed},
                     {"hypervolume", r.score.hypervolume},
                     {"sparsity", r.score.sparsity},
                     {"eum", r.score.eum}})
                   .dump()
            << "\n";
  return 0;
}

int cmd_aggregate(const CommonOptions& o) {
  const ExperimentConfig c = load(o);
  const fs::path dir = method_dir(c);
  std::vector<SeedReport> reports;
  for (std::uint64_t s : c.seeds)
    reports.push_back(seed_report_from_json(json::parse(read_text(seed_dir(dir, s) / "report.json")), c));
  const AggregateSummary summary = aggregate_seeds(std::move(reports));
  emit_report(summary, dir);
  std::cout << to_json(summary)["trimmed"].dump() << "\n";
  return 0;
}

int cmd_bench(const CommonOptions& o, const std::vector<std::string>& reducers) {
  ExperimentConfig base = load(o);
  std::vector<AggregateSummary> summaries;
  std::vector<std::string> methods = reducers.empty() ? std::vector<std::string>{base.reducer} : reducers;
  for (const auto& name : methods) {
    ExperimentConfig c = base;
    if (!reducers.empty()) {
      c.reducer = name;
      if (name != "ours") c.ablation = {};
    }
    c.validate();
    const fs::path dir = method_dir(c);
    std::vector<SeedReport> reports;
    for (std::uint64_t s : c.seeds) {
      const auto t0 = std::chrono::steady_clock::now();
      TrainingLogs logs;
      reports.push_back(run_seed(c, s, &logs));
      write_training_logs(seed_dir(dir, s), logs);
      write_timing(seed_dir(dir, s), "bench", seconds_since(t0));
      std::cerr << json({{"method", method_label(c)},
                         {"seed", s},
                         {"hypervolume", reports.back().score.hypervolume},
                         {"sparsity", reports.back().score.sparsity},
                         {"seconds", seconds_since(t0)}})
                       .dump()
                << "\n";
    }
    summaries.push_back(aggregate_seeds(std::move(reports)));
    emit_report(summaries.back(), dir);
  }
  write_text(fs::path(base.out_dir) / "comparison.csv", comparison_csv(summaries));
  std::cout << comparison_csv(summaries);
  return 0;
}

int cmd_oracle(long seed, std::size_t instances, const std::string& family, const std::string& out) {
  Theorem1SuiteConfig sc;
  sc.instances = instances;
  sc.seed = static_cast<std::uint64_t>(seed < 0 ? 1 : seed);
  if (family == "positive") sc.family = MatrixFamily::PositiveRowStochastic;
  else if (family == "signed") sc.family = MatrixFamily::SignedRowStochastic;
  else throw UsageError("--family must be positive or signed");
  const Theorem1Verdict v = run_theorem1_suite(sc);
  const std::string text = json_text(to_json(v));
  if (!out.empty()) write_text(fs::path(out) / "oracle_verdict.json", text);
  std::cout << text;
  return v.passed() || sc.family == MatrixFamily::SignedRowStochastic ? 0 : 3;
}

void add_common(CLI::App* app, CommonOptions& o, bool seed_flag, bool seeds_flag) {
  app->add_option("--config", o.config_path, "experiment config file");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--reducer", o.reducer, "none, ours, ipca, npca or ae");
  app->add_option_function<std::string>(
      "--ablation",
      [&o](const std::string& v) {
        o.ablation = v;
        o.ablation_set = true;
      },
      "comma list of +bias, -rowst, -positivity, -dropout");
  if (seed_flag) app->add_option("--seed", o.seed, "run seed");
  if (seeds_flag) app->add_option("--seeds", o.seeds, "seed range A..B or comma list");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-objective RL with online reward dimension reduction"};
  app.require_subcommand(1);
  CommonOptions o;

  auto* train = app.add_subcommand("train", "train one seed and write a checkpoint plus logs");
  add_common(train, o, true, false);
  auto* evaluate = app.add_subcommand("evaluate", "greedy rollouts on the preference lattice");
  add_common(evaluate, o, true, false);
  auto* score = app.add_subcommand("score", "Pareto filter, hypervolume, sparsity and EUM of one seed");
  add_common(score, o, true, false);
  auto* aggregate = app.add_subcommand("aggregate", "trimmed mean over seed reports");
  add_common(aggregate, o, false, true);
  auto* bench = app.add_subcommand("bench", "train, evaluate, score and aggregate every seed");
  add_common(bench, o, false, true);
  std::vector<std::string> bench_reducers;
  bench->add_option("--methods", bench_reducers, "reducers to compare (comma list)")->delimiter(',');

  auto* oracle = app.add_subcommand("oracle-verify", "exhaustive check of Pareto preservation on random MOMDPs");
  long oracle_seed = 1;
  std::size_t instances = 200;
  std::string family = "positive";
  std::string oracle_out;
  oracle->add_option("--seed", oracle_seed, "suite seed");
  oracle->add_option("--instances", instances, "number of random instances");
  oracle->add_option("--family", family, "positive or signed matrix family");
  oracle->add_option("--out", oracle_out, "directory for oracle_verdict.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train) return cmd_train(o);
    if (*evaluate) return cmd_evaluate(o);
    if (*score) return cmd_score(o);
    if (*aggregate) return cmd_aggregate(o);
    if (*bench) return cmd_bench(o, bench_reducers);
    if (*oracle) return cmd_oracle(oracle_seed, instances, family, oracle_out);
  } catch (const UsageError& e) {
    std::cerr << json({{"error", "usage"}, {"message", e.what()}}).dump() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << json({{"error", "io"}, {"message", e.what()}}).dump() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << json({{"error", "runtime"}, {"message", e.what()}}).dump() << "\n";
    return 1;
  }
  return 0;
}
