// Command-line entry point: train / eval / pbt / report.
// Exit codes: 0 success, 1 I/O failure, 2 validation failure.
#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "mtac/checkpoint.hpp"
#include "mtac/config.hpp"
#include "mtac/csv.hpp"
#include "mtac/errors.hpp"
#include "mtac/oracle.hpp"
#include "mtac/pbt.hpp"
#include "mtac/rng.hpp"
#include "mtac/runtime.hpp"
#include "mtac/scores.hpp"

namespace {

namespace fs = std::filesystem;

std::string apply_out_root(const std::string& out) {
  const char* root = std::getenv("MTAC_OUT_ROOT");
  if (!root || out.empty()) return out;
  fs::path p(out);
  if (p.is_absolute()) return out;
  return (fs::path(root) / p).string();
}

void apply_set_overrides(mtac::RunConfig& cfg, const std::vector<std::string>& sets) {
  for (const std::string& kv : sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw mtac::ValidationError("--set expects key=value, got '" + kv + "'");
    }
    mtac::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& sets) {
  mtac::RunConfig cfg =
      config_path.empty() ? mtac::RunConfig{} : mtac::load_config_file(config_path);
  apply_set_overrides(cfg, sets);
  cfg.out_dir = apply_out_root(cfg.out_dir);
  cfg.validate();
  mtac::resolve_suite(cfg.suite).validate();  // fail before any work starts
  mtac::TrainResult result = mtac::run_training(cfg);
  if (!cfg.quiet && !result.out_dir.empty()) {
    std::cout << "artifacts written to " << result.out_dir.string() << "\n";
  }
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& suite_name, int episodes,
             std::uint64_t seed, const std::string& out_dir_raw, int oracle_episodes) {
  mtac::Checkpoint ckpt = mtac::load_checkpoint(checkpoint_path);
  mtac::Suite suite = mtac::resolve_suite(suite_name);
  suite.validate();
  int task_count = static_cast<int>(suite.tasks.size());
  mtac::VariantTraits traits = mtac::make_agent_config(ckpt.variant, task_count);
  if (ckpt.net.cfg.value_heads != traits.value_heads) {
    throw mtac::ValidationError("checkpoint has " + std::to_string(ckpt.net.cfg.value_heads) +
                                " value heads but suite '" + suite.name + "' needs " +
                                std::to_string(traits.value_heads) + " for variant " +
                                mtac::variant_to_string(ckpt.variant));
  }

  mtac::OracleRefs refs = mtac::compute_oracle_refs(suite, oracle_episodes, mtac::kOracleRefSeed);
  std::vector<mtac::ScoreRecord> records =
      mtac::evaluate(ckpt.net, suite, episodes, seed, refs);
  mtac::AggregateScores agg = mtac::aggregate(records);

  std::cout << "task_id,raw_return,random_ref,optimal_ref,normalized,capped\n";
  for (const mtac::ScoreRecord& r : records) {
    std::cout << r.task_id << ',' << r.raw_return << ',' << r.random_ref << ',' << r.optimal_ref
              << ',' << r.normalized << ',' << r.capped << "\n";
  }
  std::cout << "aggregate median_normalized=" << agg.median_normalized
            << " mean_capped=" << agg.mean_capped << "\n";

  std::string out_dir = apply_out_root(out_dir_raw);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    mtac::CsvWriter breakdown(fs::path(out_dir) / "breakdown.csv",
                              {"task_id", "raw_return", "random_ref", "optimal_ref", "normalized",
                               "capped"});
    for (const mtac::ScoreRecord& r : records) {
      breakdown.row({std::to_string(r.task_id), mtac::fmt_g17(r.raw_return),
                     mtac::fmt_g17(r.random_ref), mtac::fmt_g17(r.optimal_ref),
                     mtac::fmt_g17(r.normalized), mtac::fmt_g17(r.capped)});
    }
    mtac::write_oracle_cache(fs::path(out_dir) / "oracle_cache.csv", refs);
  }
  return 0;
}

int cmd_pbt(const std::string& config_path, const std::vector<std::string>& sets, int population,
            int intervals, std::uint64_t frames_per_interval, int eval_episodes) {
  mtac::RunConfig cfg =
      config_path.empty() ? mtac::RunConfig{} : mtac::load_config_file(config_path);
  apply_set_overrides(cfg, sets);
  cfg.out_dir = apply_out_root(cfg.out_dir);
  if (population < 2) {
    throw mtac::ValidationError("pbt: population must be >= 2 (got " + std::to_string(population) +
                                ")");
  }
  mtac::PbtConfig pbt_cfg;
  pbt_cfg.population = population;
  pbt_cfg.intervals = intervals;
  pbt_cfg.frames_per_interval = frames_per_interval;
  pbt_cfg.eval_episodes = eval_episodes;
  // Member hyperparameters are sampled from the tuning distributions; the
  // base values only seed everything else.
  mtac::PbtResult result = mtac::run_pbt(cfg, pbt_cfg);
  if (!cfg.quiet && !result.fitness_csv.empty()) {
    std::cout << "fitness history written to " << result.fitness_csv.string() << "\n";
  }
  return 0;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_csv_raw) {
  struct Row {
    std::string variant, suite, median, capped;
  };
  std::vector<Row> rows;
  for (const std::string& dir : run_dirs) {
    fs::path summary = fs::path(dir) / "summary.csv";
    std::ifstream in(summary);
    if (!in) throw mtac::IoError("cannot open " + summary.string());
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      Row row;
      std::getline(ss, row.variant, ',');
      std::getline(ss, row.suite, ',');
      std::getline(ss, row.median, ',');
      std::getline(ss, row.capped, ',');
      if (!row.variant.empty()) rows.push_back(row);
    }
  }
  std::cout << std::left << std::setw(12) << "variant" << std::setw(16) << "suite" << std::setw(20)
            << "median_normalized" << std::setw(14) << "mean_capped" << "\n";
  for (const Row& r : rows) {
    std::cout << std::left << std::setw(12) << r.variant << std::setw(16) << r.suite
              << std::setw(20) << r.median << std::setw(14) << r.capped << "\n";
  }
  std::string out_csv = apply_out_root(out_csv_raw);
  if (!out_csv.empty()) {
    mtac::CsvWriter out(out_csv, {"variant", "suite", "median_normalized", "mean_capped"});
    for (const Row& r : rows) out.row({r.variant, r.suite, r.median, r.capped});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-task actor-critic with adaptive return normalization"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "run a training job");
  std::string train_config;
  std::vector<std::string> train_sets;
  std::string train_suite, train_variant, train_out, train_mode;
  std::uint64_t train_frames = 0, train_seed = 0;
  auto* frames_opt = train->add_option("--frames", train_frames, "environment frame budget");
  auto* seed_opt = train->add_option("--seed", train_seed, "run seed");
  train->add_option("--config", train_config, "key=value config file");
  train->add_option("--suite", train_suite, "suite name or suite file");
  train->add_option("--variant", train_variant, "agent variant (popart, multihead, baseline)");
  train->add_option("--out", train_out, "output directory");
  train->add_option("--mode", train_mode, "sync or threaded");
  train->add_option("--set", train_sets, "extra key=value overrides")->take_all();

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a frozen checkpoint");
  std::string eval_ckpt, eval_suite = "scale6", eval_out;
  int eval_episodes = 100, eval_oracle_episodes = 4000;
  std::uint64_t eval_seed = 1;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval->add_option("--suite", eval_suite, "suite name or suite file");
  eval->add_option("--episodes", eval_episodes, "episodes per task");
  eval->add_option("--seed", eval_seed, "evaluation seed");
  eval->add_option("--out", eval_out, "directory for breakdown.csv and oracle_cache.csv");
  eval->add_option("--oracle-episodes", eval_oracle_episodes, "episodes for the random reference");

  // pbt
  auto* pbt = app.add_subcommand("pbt", "population-based training");
  std::string pbt_config;
  std::vector<std::string> pbt_sets;
  int pbt_population = 4, pbt_intervals = 3, pbt_eval_episodes = 32;
  std::uint64_t pbt_frames = 60'000;
  pbt->add_option("--config", pbt_config, "key=value config file");
  pbt->add_option("--population", pbt_population, "population size (>= 2)");
  pbt->add_option("--intervals", pbt_intervals, "exploit intervals");
  pbt->add_option("--frames-per-interval", pbt_frames, "frames each member trains per interval");
  pbt->add_option("--eval-episodes", pbt_eval_episodes, "episodes per fitness evaluation");
  pbt->add_option("--set", pbt_sets, "extra key=value overrides")->take_all();

  // report
  auto* report = app.add_subcommand("report", "summary table from stored run directories");
  std::vector<std::string> report_runs;
  std::string report_out;
  report->add_option("--runs", report_runs, "run directories containing summary.csv")
      ->required()
      ->take_all();
  report->add_option("--out", report_out, "also write the table as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      // Assemble: config file first, then explicit flags, then --set overrides.
      std::vector<std::string> sets;
      if (!train_suite.empty()) sets.push_back("suite=" + train_suite);
      if (!train_variant.empty()) sets.push_back("variant=" + train_variant);
      if (frames_opt->count() > 0) sets.push_back("frames=" + std::to_string(train_frames));
      if (seed_opt->count() > 0) sets.push_back("seed=" + std::to_string(train_seed));
      if (!train_out.empty()) sets.push_back("out_dir=" + train_out);
      if (!train_mode.empty()) sets.push_back("mode=" + train_mode);
      sets.insert(sets.end(), train_sets.begin(), train_sets.end());
      return cmd_train(train_config, sets);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_ckpt, eval_suite, eval_episodes, eval_seed, eval_out,
                      eval_oracle_episodes);
    }
    if (pbt->parsed()) {
      return cmd_pbt(pbt_config, pbt_sets, pbt_population, pbt_intervals, pbt_frames,
                     pbt_eval_episodes);
    }
    if (report->parsed()) {
      return cmd_report(report_runs, report_out);
    }
  } catch (const mtac::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const mtac::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
