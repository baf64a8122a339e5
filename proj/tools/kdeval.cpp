// Command-line front end: evaluate, bench, calibrate, rank.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kdeval/kdeval.hpp"

namespace fs = std::filesystem;
using namespace kdeval;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct Overrides {
  std::string config_path;
  std::optional<std::size_t> k_min;
  std::optional<std::size_t> k_max;
  std::optional<std::uint64_t> seed;
  std::string indices;
  std::string generators;
  std::string output;
  std::optional<int> label_column;
  std::optional<double> delta;
  std::optional<double> alpha;
  bool svg = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "config file (key = value, [run]/[kdi]/[bandwidth] sections)");
  cmd->add_option("--k-min", o.k_min, "smallest candidate K");
  cmd->add_option("--k-max", o.k_max, "largest candidate K");
  cmd->add_option("--seed", o.seed, "global random seed");
  cmd->add_option("--indices", o.indices, "comma list: ch,sc,db,new,new_ib,new_ia_v1..v3,new_is_v1..v3");
  cmd->add_option("--generators", o.generators, "comma list: ward,complete,average,single,kmeans,gmm");
  cmd->add_option("--output,-o", o.output, "output directory");
  cmd->add_option("--label-column", o.label_column, "label column for csv/whitespace input (negative counts from the end)");
  cmd->add_option("--delta", o.delta, "mixture weight of the ambiguous term");
  cmd->add_option("--alpha", o.alpha, "territory margin multiplier (sets alpha1 and alpha2)");
  cmd->add_flag("--svg", o.svg, "write top-ranked partitions as SVG scatter plots");
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg;
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) apply_config_file(env, cfg);
  if (!o.config_path.empty()) apply_config_file(o.config_path, cfg);
  ConfigEntries cli;
  if (o.k_min) cli.emplace_back("run.k_min", std::to_string(*o.k_min));
  if (o.k_max) cli.emplace_back("run.k_max", std::to_string(*o.k_max));
  if (o.seed) cli.emplace_back("run.seed", std::to_string(*o.seed));
  if (!o.indices.empty()) cli.emplace_back("run.indices", o.indices);
  if (!o.generators.empty()) cli.emplace_back("run.generators", o.generators);
  if (!o.output.empty()) cli.emplace_back("run.output", o.output);
  if (o.label_column) cli.emplace_back("run.label_column", std::to_string(*o.label_column));
  if (o.delta) cli.emplace_back("kdi.delta", text::exact(*o.delta));
  if (o.alpha) {
    cli.emplace_back("kdi.alpha1", text::exact(*o.alpha));
    cli.emplace_back("kdi.alpha2", text::exact(*o.alpha));
  }
  if (o.svg) cli.emplace_back("run.svg", "true");
  apply_config(cli, cfg);
  cfg.validate();
  return cfg;
}

void print_champions(const EvaluationReport& rep) {
  std::printf("%s: n=%zu d=%zu candidates=%zu\n", rep.dataset_id.c_str(), rep.n, rep.dim, rep.rows.size());
  for (std::size_t c = 0; c < rep.indices.size(); ++c) {
    const auto& o = rep.outcomes[c];
    const auto& row = rep.rows[o.champion()];
    std::printf("  %-10s %-28s K=%-3d", to_string(o.id), row.source.c_str(), row.k);
    if (o.success) std::printf(" ARI=%.4f %s", *o.champion_ari, *o.success ? "S" : "F");
    std::printf("\n");
  }
}

int cmd_evaluate(const Overrides& o, const std::string& path) {
  const auto cfg = resolve(o);
  const auto data = load_input(path, cfg);
  const auto rep = evaluate_dataset(cfg, data);
  write_outputs(cfg.output_dir, rep, data);
  print_champions(rep);
  for (const auto& w : rep.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return kExitOk;
}

int cmd_bench(const Overrides& o, const std::string& dir) {
  const auto cfg = resolve(o);
  const auto files = list_datasets(dir);
  if (files.empty()) throw DataError("no dataset files in '" + dir + "'");
  std::vector<EvaluationReport> reports;
  for (const auto& f : files) {
    std::optional<Dataset> loaded;
    try {
      loaded = load_input(f, cfg);
    } catch (const DataError& e) {
      std::fprintf(stderr, "skipping %s: %s\n", f.string().c_str(), e.what());
      continue;
    }
    const Dataset& data = *loaded;
    auto rep = evaluate_dataset(cfg, data);
    write_outputs(fs::path(cfg.output_dir) / data.id(), rep, data);
    print_champions(rep);
    reports.push_back(std::move(rep));
  }
  if (reports.empty()) throw DataError("no dataset could be loaded from '" + dir + "'");
  const auto table = aggregate_accuracy(reports);
  write_accuracy_outputs(cfg.output_dir, table);
  for (const auto& w : table.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("accuracy over %zu datasets:\n", table.total);
  for (std::size_t c = 0; c < table.indices.size(); ++c) {
    std::printf("  %-10s %s\n", to_string(table.indices[c]), table.accuracy(c).c_str());
  }
  return kExitOk;
}

int cmd_calibrate(const Overrides& o, const std::string& dir, const std::string& train_list) {
  auto cfg = resolve(o);
  std::ifstream in(train_list);
  if (!in) throw DataError("cannot open training list '" + train_list + "'");
  std::vector<Dataset> training;
  std::string line;
  while (std::getline(in, line)) {
    const auto name = text::trim(line);
    if (name.empty() || name.front() == '#') continue;
    fs::path p(name);
    if (p.is_relative()) p = fs::path(dir) / p;
    training.push_back(load_input(p, cfg));
  }
  if (training.empty()) throw DataError("training list '" + train_list + "' is empty");
  const auto result = calibrate(cfg, training);
  cfg.kdi = result.params;
  fs::create_directories(cfg.output_dir);
  const auto out_path = fs::path(cfg.output_dir) / "calibrated.cfg";
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + out_path.string() + "'");
  out << write_config(cfg);
  std::printf("best: delta=%s alpha=%s  %zu/%zu datasets succeeded\nwritten to %s\n",
              text::general(result.params.delta, 3).c_str(), text::general(result.params.alpha1, 3).c_str(),
              result.successes, result.datasets, out_path.string().c_str());
  return kExitOk;
}

int cmd_rank(const Overrides& o, const std::string& path, const std::string& parts_dir) {
  const auto cfg = resolve(o);
  const auto data = load_input(path, cfg);
  auto parts = read_candidates(parts_dir);
  if (parts.empty()) throw DataError("no partitions in '" + parts_dir + "'");
  const auto rep = evaluate_candidates(cfg, data, std::move(parts));
  write_outputs(cfg.output_dir, rep, data);
  print_champions(rep);
  for (const auto& w : rep.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Internal clustering validity with per-cluster kernel density estimates"};
  app.require_subcommand(1);

  Overrides o;
  std::string dataset;
  std::string dir;
  std::string train_list;
  std::string parts_dir;

  auto* evaluate = app.add_subcommand("evaluate", "score generated candidate partitions of one dataset");
  evaluate->add_option("dataset", dataset, "dataset file (.csv, .arff, whitespace text)")->required();
  add_common(evaluate, o);

  auto* bench = app.add_subcommand("bench", "evaluate every dataset in a directory and tabulate accuracy");
  bench->add_option("dir", dir, "directory of dataset files")->required();
  add_common(bench, o);

  auto* calib = app.add_subcommand("calibrate", "grid-search delta and alpha on training datasets");
  calib->add_option("dir", dir, "directory the training list is relative to")->required();
  calib->add_option("--train-list", train_list, "file with one dataset name per line")->required();
  add_common(calib, o);

  auto* rank = app.add_subcommand("rank", "score externally supplied partitions");
  rank->add_option("dataset", dataset, "dataset file")->required();
  rank->add_option("--partitions", parts_dir, "directory of partition files")->required();
  add_common(rank, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*evaluate) return cmd_evaluate(o, dataset);
    if (*bench) return cmd_bench(o, dir);
    if (*calib) return cmd_calibrate(o, dir, train_list);
    if (*rank) return cmd_rank(o, dataset, parts_dir);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
