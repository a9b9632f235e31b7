// mfkd: multi-fidelity architecture search over tabular benchmarks.
// Subcommands: search, correlate, synth, kd-eval, compare.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <mutex>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfkd/benchmark.hpp"
#include "mfkd/kd_losses.hpp"
#include "mfkd/matrix_io.hpp"
#include "mfkd/search.hpp"

namespace {

using nlohmann::json;

constexpr const char* kToolVersion = "0.1.0";
constexpr std::uint64_t kSynthSeedSalt = 0x9e3779b97f4a7c15ull;

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct BenchSource {
  std::string bench_path;
  std::string synthetic;  // "tau=0.47,size=1000" style
  bool percent = false;
};

void add_bench_options(CLI::App* cmd, BenchSource* src) {
  auto* bench = cmd->add_option("--bench", src->bench_path,
                                "Benchmark JSONL file (relative paths resolve "
                                "against $MFKD_DATA_DIR)");
  auto* synth = cmd->add_option(
      "--synthetic", src->synthetic,
      "Synthetic benchmark, e.g. tau=0.47,size=1000[,tau2=0.17][,cost-low=1][,cost-high=12]");
  bench->excludes(synth);
  cmd->add_flag("--percent", src->percent, "Benchmark accuracies are percentages");
}

std::string resolve_bench_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::path(path).is_absolute() || fs::exists(path)) return path;
  if (const char* dir = std::getenv("MFKD_DATA_DIR")) {
    const fs::path candidate = fs::path(dir) / path;
    if (fs::exists(candidate)) return candidate.string();
  }
  return path;
}

mfkd::SpaceSpec spec_for_size(std::uint64_t size) {
  for (int edges = 20; edges >= 1; --edges) {
    const int ops = static_cast<int>(std::llround(std::pow(
        static_cast<double>(size), 1.0 / edges)));
    if (ops < (edges == 1 ? 1 : 2)) continue;
    mfkd::SpaceSpec spec{edges, ops};
    try {
      if (spec.size() == size) return spec;
    } catch (const std::overflow_error&) {
    }
  }
  throw std::invalid_argument("--synthetic size=" + std::to_string(size) +
                              " is not expressible as ops^edges");
}

struct SynthSpec {
  mfkd::SpaceSpec space{6, 3};
  mfkd::SyntheticConfig cfg;
};

SynthSpec parse_synthetic(const std::string& text) {
  SynthSpec out;
  std::optional<std::uint64_t> size;
  std::optional<int> edges, ops;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--synthetic: expected key=value, got '" + item + "'");
    }
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    if (key == "tau") {
      out.cfg.target_tau = std::stod(val);
    } else if (key == "tau2") {
      out.cfg.target_tau_logistic = std::stod(val);
    } else if (key == "size") {
      size = std::stoull(val);
    } else if (key == "edges") {
      edges = std::stoi(val);
    } else if (key == "ops") {
      ops = std::stoi(val);
    } else if (key == "cost-low") {
      out.cfg.cost_low = std::stod(val);
    } else if (key == "cost-high") {
      out.cfg.cost_high = std::stod(val);
    } else {
      throw std::invalid_argument("--synthetic: unknown key '" + key + "'");
    }
  }
  if (size && (edges || ops)) {
    throw std::invalid_argument("--synthetic: give either size or edges/ops, not both");
  }
  if (size) {
    out.space = spec_for_size(*size);
  } else {
    if (edges) out.space.num_edges = *edges;
    if (ops) out.space.num_ops = *ops;
  }
  return out;
}

mfkd::Benchmark realize_benchmark(const BenchSource& src, std::uint64_t seed,
                                  json* manifest_cfg) {
  if (!src.bench_path.empty()) {
    const std::string path = resolve_bench_path(src.bench_path);
    (*manifest_cfg)["bench"] = path;
    (*manifest_cfg)["percent"] = src.percent;
    return mfkd::load_benchmark(path, src.percent);
  }
  if (!src.synthetic.empty()) {
    const SynthSpec spec = parse_synthetic(src.synthetic);
    (*manifest_cfg)["synthetic"] = src.synthetic;
    mfkd::Rng rng(seed ^ kSynthSeedSalt);
    return mfkd::generate_synthetic(spec.space, spec.cfg, rng);
  }
  throw CLI::ValidationError("benchmark", "one of --bench or --synthetic is required");
}

std::uint64_t ensure_seed(std::optional<std::uint64_t> seed_opt) {
  if (seed_opt) return *seed_opt;
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  std::cerr << "generated seed: " << seed << "\n";
  return seed;
}

json config_json(const mfkd::SearchConfig& cfg) {
  return json{{"n1", cfg.n1},
              {"n2", cfg.n2},
              {"e1", cfg.e1},
              {"e2", cfg.e2},
              {"candidate_pool", cfg.candidate_pool},
              {"budget", cfg.budget},
              {"ucb_beta", cfg.ucb_beta},
              {"ucb_uncertainty", cfg.ucb_use_stddev ? "stddev" : "variance"}};
}

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const json& config, std::uint64_t seed, const std::string& bench_name,
                    const std::string& started_at) {
  json manifest;
  manifest["command"] = command;
  manifest["config"] = config;
  manifest["seed"] = seed;
  manifest["benchmark_name"] = bench_name;
  manifest["tool_version"] = kToolVersion;
  manifest["started_at"] = started_at;
  manifest["finished_at"] = iso_now();
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

void write_curves(const std::filesystem::path& path,
                  const std::vector<mfkd::CurvePoint>& curves) {
  std::ofstream out(path);
  out << "method,run,spent_seconds,best_test_acc\n";
  for (const auto& p : curves) {
    out << p.method << ',' << p.run << ',' << fmt_double(p.spent) << ','
        << fmt_double(p.best_test_acc) << '\n';
  }
}

void write_trajectories(const std::filesystem::path& path, const std::string& method,
                        const std::vector<mfkd::SearchResult>& results) {
  std::ofstream out(path);
  out << "method,run,step,arch,level,fidelity,val_acc,cost,spent_after,over_budget\n";
  for (std::size_t r = 0; r < results.size(); ++r) {
    const auto& traj = results[r].trajectory;
    for (std::size_t s = 0; s < traj.size(); ++s) {
      const auto& rec = traj[s];
      out << method << ',' << r << ',' << s << ",\"" << rec.arch.str() << "\","
          << rec.level << ',' << (rec.fidelity == mfkd::Fidelity::High ? "high" : "low")
          << ',' << fmt_double(rec.val_acc) << ',' << fmt_double(rec.cost) << ','
          << fmt_double(rec.spent_after) << ',' << (rec.over_budget ? 1 : 0) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// search

struct SearchArgs {
  BenchSource bench;
  std::string method;
  int runs = 1;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "mfkd-out";
  int parallel = 1;
  mfkd::SearchConfig cfg;
};

void add_config_options(CLI::App* cmd, mfkd::SearchConfig* cfg) {
  cmd->add_option("--n1", cfg->n1, "Low-fidelity warm-up evaluations");
  cmd->add_option("--n2", cfg->n2, "High-fidelity warm-up evaluations");
  cmd->add_option("--pool", cfg->candidate_pool, "Candidate pool size N");
  cmd->add_option("--budget", cfg->budget, "Total budget T in seconds");
  cmd->add_option("--ucb-beta", cfg->ucb_beta, "UCB exploration weight");
  cmd->add_option("--ucb-uncertainty",
                  [cfg](const std::vector<std::string>& vals) {
                    if (vals.front() == "variance") {
                      cfg->ucb_use_stddev = false;
                    } else if (vals.front() == "stddev") {
                      cfg->ucb_use_stddev = true;
                    } else {
                      return false;
                    }
                    return true;
                  },
                  "UCB uncertainty term: variance (default) or stddev");
}

int run_search(const SearchArgs& args) {
  const std::string started_at = iso_now();
  const std::uint64_t seed = ensure_seed(args.seed);
  json manifest_cfg = config_json(args.cfg);
  manifest_cfg["method"] = args.method;
  manifest_cfg["runs"] = args.runs;

  const mfkd::Benchmark bench = realize_benchmark(args.bench, seed, &manifest_cfg);

  std::vector<mfkd::SearchResult> results(static_cast<std::size_t>(args.runs));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;
  auto body = [&]() {
    for (std::size_t r = next.fetch_add(1); r < results.size(); r = next.fetch_add(1)) {
      mfkd::Rng rng(seed + r);
      try {
        results[r] = mfkd::run_method(bench, args.method, args.cfg, rng);
      } catch (const std::exception& e) {
        std::scoped_lock lock(failure_mutex);
        failed = true;
        failure = e.what();
      }
    }
  };
  const int workers = std::min<int>(std::max(1, args.parallel), args.runs);
  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(body);
    for (auto& t : threads) t.join();
  }
  if (failed) throw std::runtime_error(failure);

  std::filesystem::create_directories(args.out_dir);
  const std::filesystem::path dir(args.out_dir);

  json per_run = json::array();
  std::vector<double> best_tests;
  std::vector<mfkd::CurvePoint> curves;
  for (std::size_t r = 0; r < results.size(); ++r) {
    const auto& res = results[r];
    json obj;
    obj["run"] = r;
    obj["seed"] = seed + r;
    obj["any_high"] = res.any_high;
    obj["best_arch"] = res.any_high ? res.best_arch.str() : "";
    obj["best_val_acc"] = res.best_val_acc;
    obj["best_test_acc"] = res.best_test_acc;
    obj["evaluations"] = res.trajectory.size();
    obj["spent"] = res.trajectory.empty() ? 0.0 : res.trajectory.back().spent_after;
    obj["warmup_exceeded_budget"] = res.warmup_exceeded_budget;
    per_run.push_back(obj);
    if (res.any_high) best_tests.push_back(res.best_test_acc);

    bool have = false;
    double best_val = 0.0, best_test = 0.0;
    int top = 0;
    for (const auto& rec : res.trajectory) top = std::max(top, rec.level);
    for (const auto& rec : res.trajectory) {
      if (rec.level != top) continue;
      if (!have || rec.val_acc > best_val) {
        have = true;
        best_val = rec.val_acc;
        best_test = bench.row(rec.arch).test_acc_final;
      }
      curves.push_back({args.method, static_cast<int>(r), rec.spent_after, best_test});
    }
  }

  json summary;
  summary["benchmark"] = bench.name;
  summary["method"] = args.method;
  summary["runs"] = per_run;
  if (!best_tests.empty()) {
    summary["mean_best_test_acc"] = mfkd::mean(best_tests);
    summary["stddev_best_test_acc"] = mfkd::sample_stddev(best_tests);
  }
  {
    std::ofstream out(dir / "results.json");
    out << summary.dump(2) << '\n';
  }
  write_trajectories(dir / "trajectory.csv", args.method, results);
  write_curves(dir / "curves.csv", curves);
  write_manifest(dir, "search", manifest_cfg, seed, bench.name, started_at);

  if (best_tests.empty()) {
    std::cout << args.method << ": no high-fidelity evaluations (budget too small)\n";
  } else {
    std::cout << args.method << ": best test accuracy " << mfkd::mean(best_tests) << " +- "
              << mfkd::sample_stddev(best_tests) << " over " << args.runs << " run(s)\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// correlate

struct CorrelateArgs {
  BenchSource bench;
  std::optional<std::uint64_t> seed;
  std::string out_csv;
};

int run_correlate(const CorrelateArgs& args) {
  const std::uint64_t seed = ensure_seed(args.seed);
  json manifest_cfg;
  const mfkd::Benchmark bench = realize_benchmark(args.bench, seed, &manifest_cfg);

  const double tau_low = mfkd::correlate_fidelities(bench);
  std::optional<double> tau_logistic;
  if (!bench.rows.empty() && bench.rows.front().val_acc_low_logistic) {
    tau_logistic = mfkd::correlate_fidelities_logistic(bench);
  }
  std::cout << "val_acc_low vs val_acc_high: tau = " << tau_low << "\n";
  if (tau_logistic) {
    std::cout << "val_acc_low_logistic vs val_acc_high: tau = " << *tau_logistic << "\n";
  }
  if (!args.out_csv.empty()) {
    std::ofstream out(args.out_csv);
    out << "column,tau\n";
    out << "val_acc_low," << fmt_double(tau_low) << '\n';
    if (tau_logistic) out << "val_acc_low_logistic," << fmt_double(*tau_logistic) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  int edges = 6;
  int ops = 3;
  double tau = 0.47;
  std::optional<double> tau_logistic;
  double cost_low = 1.0;
  double cost_high = 12.0;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_synth(const SynthArgs& args) {
  const std::uint64_t seed = ensure_seed(args.seed);
  mfkd::SpaceSpec spec{args.edges, args.ops};
  mfkd::SyntheticConfig cfg;
  cfg.target_tau = args.tau;
  cfg.target_tau_logistic = args.tau_logistic;
  cfg.cost_low = args.cost_low;
  cfg.cost_high = args.cost_high;
  mfkd::Rng rng(seed ^ kSynthSeedSalt);
  const mfkd::Benchmark bench = mfkd::generate_synthetic(spec, cfg, rng);
  mfkd::save_benchmark(bench, args.out);
  std::cout << "wrote " << bench.rows.size() << " rows to " << args.out
            << "; achieved tau = " << mfkd::correlate_fidelities(bench);
  if (args.tau_logistic) {
    std::cout << ", logistic tau = " << mfkd::correlate_fidelities_logistic(bench);
  }
  std::cout << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// kd-eval

struct KdEvalArgs {
  std::string student_logits;
  std::string teacher_logits;
  std::string labels;
  std::vector<std::string> ft_files;
  std::vector<std::string> fs_files;
  mfkd::KdConfig cfg;
  mfkd::MmdKernelSpec kernel;
  std::string subset_t;
  std::string subset_s;
  std::string out_dir;
};

std::vector<int> parse_index_list(const std::string& text) {
  std::vector<int> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

int run_kd_eval(const KdEvalArgs& args) {
  const std::string started_at = iso_now();
  json result;
  result["config"] = {{"tau", args.cfg.tau},
                      {"lambda", args.cfg.lambda},
                      {"nst_beta", args.cfg.nst_beta},
                      {"kernel_c", args.kernel.c},
                      {"kernel_b", args.kernel.b}};

  std::vector<Eigen::MatrixXd> ft, fs;
  for (const auto& f : args.ft_files) ft.push_back(mfkd::load_matrix(f).values);
  for (const auto& f : args.fs_files) fs.push_back(mfkd::load_matrix(f).values);

  if (!ft.empty() && !fs.empty()) {
    result["mmd2"] = mfkd::mmd2(ft.front(), fs.front(), args.kernel);
    if (!args.subset_t.empty() && !args.subset_s.empty()) {
      result["mmd2_subset"] =
          mfkd::mmd2_subset(ft.front(), fs.front(), parse_index_list(args.subset_t),
                            parse_index_list(args.subset_s), args.kernel);
    }
  }
  if (!args.student_logits.empty() && !args.labels.empty()) {
    const Eigen::MatrixXd zs = mfkd::load_matrix(args.student_logits).values;
    const std::vector<int> labels = mfkd::load_labels(args.labels);
    if (!args.teacher_logits.empty()) {
      const Eigen::MatrixXd zt = mfkd::load_matrix(args.teacher_logits).values;
      result["kd_loss"] = mfkd::kd_loss(zs, zt, labels, args.cfg);
    }
    if (!ft.empty() && !fs.empty()) {
      result["nst_loss"] = mfkd::nst_loss(zs, labels, ft, fs, args.cfg, args.kernel);
    }
  }
  if (result.size() == 1) {
    throw CLI::ValidationError(
        "kd-eval", "need fixtures: feature maps (--ft/--fs) and/or logits with labels");
  }
  std::cout << result.dump(2) << '\n';
  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    write_manifest(args.out_dir, "kd-eval", result["config"], 0, "", started_at);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
  BenchSource bench;
  std::vector<std::string> methods;
  int runs = 100;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "mfkd-compare";
  int parallel = 1;
  mfkd::SearchConfig cfg;
};

int run_compare(const CompareArgs& args) {
  if (args.methods.size() < 2) {
    throw CLI::ValidationError("compare", "at least two --methods required");
  }
  const std::string started_at = iso_now();
  const std::uint64_t seed = ensure_seed(args.seed);
  json manifest_cfg = config_json(args.cfg);
  manifest_cfg["methods"] = args.methods;
  manifest_cfg["runs"] = args.runs;

  const mfkd::Benchmark bench = realize_benchmark(args.bench, seed, &manifest_cfg);
  const mfkd::Report report = mfkd::compare_methods(bench, args.methods, args.runs,
                                                    args.cfg, seed, args.parallel);

  std::filesystem::create_directories(args.out_dir);
  const std::filesystem::path dir(args.out_dir);

  json out;
  out["benchmark"] = bench.name;
  out["runs"] = args.runs;
  json methods = json::array();
  for (const auto& m : report.methods) {
    json runs = json::array();
    for (const auto& r : m.runs) {
      runs.push_back({{"run", r.run},
                      {"seed", r.seed},
                      {"best_arch", r.best_arch},
                      {"best_val_acc", r.best_val_acc},
                      {"best_test_acc", r.best_test_acc},
                      {"spent", r.spent},
                      {"evaluations", r.evaluations}});
    }
    methods.push_back({{"name", m.name},
                       {"mean_best_test_acc", m.mean_best_test},
                       {"stddev_best_test_acc", m.stddev_best_test},
                       {"runs", runs}});
  }
  out["methods"] = methods;
  if (report.significance) {
    out["significance"] = {{"top_method", report.top_method},
                           {"second_method", report.second_method},
                           {"t", report.significance->t},
                           {"df", report.significance->df},
                           {"p_value", report.significance->p_value},
                           {"significant_at_0.05", report.significance->p_value < 0.05}};
  }
  {
    std::ofstream file(dir / "results.json");
    file << out.dump(2) << '\n';
  }
  write_curves(dir / "curves.csv", report.curves);
  write_manifest(dir, "compare", manifest_cfg, seed, bench.name, started_at);

  std::printf("%-10s %12s %12s\n", "method", "mean", "std");
  for (const auto& m : report.methods) {
    std::printf("%-10s %12.4f %12.4f\n", m.name.c_str(), m.mean_best_test,
                m.stddev_best_test);
  }
  if (report.significance) {
    std::printf("%s vs %s: Welch p = %.4g (%s at 0.05)\n", report.top_method.c_str(),
                report.second_method.c_str(), report.significance->p_value,
                report.significance->p_value < 0.05 ? "significant" : "not significant");
  } else {
    std::printf("significance test skipped (needs >= 2 runs)\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-fidelity Bayesian architecture search over tabular benchmarks"};
  app.require_subcommand(1);

  SearchArgs search_args;
  auto* search = app.add_subcommand("search", "Run a search method");
  add_bench_options(search, &search_args.bench);
  search->add_option("--method", search_args.method, "mfkd | random | gpr | mf-no-kd")
      ->required()
      ->check(CLI::IsMember({"mfkd", "random", "gpr", "mf-no-kd"}));
  search->add_option("--runs", search_args.runs, "Replicates")->check(CLI::PositiveNumber);
  search->add_option("--seed", search_args.seed, "Random seed");
  search->add_option("--out", search_args.out_dir, "Output directory");
  search->add_option("--parallel", search_args.parallel, "Worker threads");
  add_config_options(search, &search_args.cfg);

  CorrelateArgs correlate_args;
  auto* correlate = app.add_subcommand("correlate", "Fidelity rank correlations");
  add_bench_options(correlate, &correlate_args.bench);
  correlate->add_option("--seed", correlate_args.seed, "Random seed (synthetic input)");
  correlate->add_option("--out", correlate_args.out_csv, "Optional CSV output");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark file");
  synth->add_option("--edges", synth_args.edges, "Cell edges")->check(CLI::PositiveNumber);
  synth->add_option("--ops", synth_args.ops, "Operations per edge")
      ->check(CLI::PositiveNumber);
  synth->add_option("--tau", synth_args.tau, "Target Kendall tau (KD low fidelity)");
  synth->add_option("--tau-logistic", synth_args.tau_logistic,
                    "Target tau for the logistic low-fidelity column");
  synth->add_option("--cost-low", synth_args.cost_low, "Low-fidelity cost, seconds");
  synth->add_option("--cost-high", synth_args.cost_high, "High-fidelity cost, seconds");
  synth->add_option("--seed", synth_args.seed, "Random seed");
  synth->add_option("--out", synth_args.out, "Output JSONL path")->required();

  KdEvalArgs kd_args;
  auto* kd = app.add_subcommand("kd-eval", "Evaluate distillation losses on fixtures");
  kd->add_option("--student-logits", kd_args.student_logits, "Student logits fixture");
  kd->add_option("--teacher-logits", kd_args.teacher_logits, "Teacher logits fixture");
  kd->add_option("--labels", kd_args.labels, "Labels fixture");
  kd->add_option("--ft", kd_args.ft_files, "Teacher feature-map fixture(s)");
  kd->add_option("--fs", kd_args.fs_files, "Student feature-map fixture(s)");
  kd->add_option("--tau", kd_args.cfg.tau, "Softmax temperature");
  kd->add_option("--lambda", kd_args.cfg.lambda, "KD loss mixing weight");
  kd->add_option("--nst-beta", kd_args.cfg.nst_beta, "MMD^2 weight");
  kd->add_option("--kernel-c", kd_args.kernel.c, "Polynomial kernel offset c");
  kd->add_option("--kernel-b", kd_args.kernel.b, "Polynomial kernel degree b");
  kd->add_option("--subset-t", kd_args.subset_t, "Teacher channel subset, e.g. 0,2,5");
  kd->add_option("--subset-s", kd_args.subset_s, "Student channel subset");
  kd->add_option("--out", kd_args.out_dir, "Optional manifest output directory");

  CompareArgs compare_args;
  auto* compare = app.add_subcommand("compare", "Compare methods under one budget");
  add_bench_options(compare, &compare_args.bench);
  compare->add_option("--methods", compare_args.methods, "Two or more method names")
      ->required()
      ->delimiter(',');
  compare->add_option("--runs", compare_args.runs, "Replicates per method")
      ->check(CLI::PositiveNumber);
  compare->add_option("--seed", compare_args.seed, "Random seed");
  compare->add_option("--out", compare_args.out_dir, "Output directory");
  compare->add_option("--parallel", compare_args.parallel, "Worker threads");
  add_config_options(compare, &compare_args.cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints message + usage to stderr
    return 2;
  }

  try {
    if (search->parsed()) return run_search(search_args);
    if (correlate->parsed()) return run_correlate(correlate_args);
    if (synth->parsed()) return run_synth(synth_args);
    if (kd->parsed()) return run_kd_eval(kd_args);
    if (compare->parsed()) return run_compare(compare_args);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
