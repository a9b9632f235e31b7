#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mfkd/benchmark.hpp"
#include "mfkd/cokriging.hpp"
#include "mfkd/stats.hpp"

namespace mfkd {

struct SearchConfig {
  int n1 = 100;             // low-fidelity warm-up evaluations
  int n2 = 20;              // high-fidelity warm-up evaluations
  double e1 = 1.0;          // epochs behind the low fidelity (informational)
  double e2 = 12.0;
  int candidate_pool = 5000;  // N candidates per UCB iteration
  double budget = 12000.0;    // total seconds T
  double ucb_beta = 1.0;
  bool ucb_use_stddev = false;  // default: literal variance in the UCB score
  CoKrigingGrids grids;
};

struct SearchResult {
  bool any_high = false;  // false marks a run with zero high-fidelity evaluations
  Architecture best_arch;
  double best_val_acc = 0.0;
  double best_test_acc = 0.0;
  std::vector<EvalRecord> trajectory;
  std::optional<CoKrigingModel> model_final;
  std::optional<MultiLevelModel> ml_model;
  bool warmup_exceeded_budget = false;
};

/// Index of the candidate maximizing mean + beta * uncertainty; ties go to
/// the lowest index.
std::size_t ucb_argmax(const std::vector<Prediction>& preds, double ucb_beta,
                       bool use_stddev = false);
std::size_t ucb_select(const CoKrigingModel& model,
                       const std::vector<Encoding>& candidates, double ucb_beta,
                       bool use_stddev = false);

/// One fidelity level of a generalized run: column accessors plus the warm-up
/// count at that level.
struct LevelSpec {
  std::function<double(const BenchRow&)> value;
  std::function<double(const BenchRow&)> cost;
  int warmup = 1;
};

/// Full MF-KD procedure: warm-up at both fidelities, co-kriging fit, UCB loop
/// over the high fidelity until the budget runs out.
SearchResult run_mfkd(const Benchmark& bench, const SearchConfig& cfg, Rng& rng);

/// Same loop, reading the logistic-loss low-fidelity column.
SearchResult run_mf_no_kd(const Benchmark& bench, const SearchConfig& cfg, Rng& rng);

/// Ablation: high fidelity only, plain GP surrogate, same sampling and
/// stopping rules.
SearchResult run_gpr_single_fidelity(const Benchmark& bench, const SearchConfig& cfg,
                                     Rng& rng);

/// Multi-level generalization; levels run cheapest to most expensive and UCB
/// acts on the last one. Two levels reproduce run_mfkd exactly.
SearchResult run_mfkd_multilevel(const Benchmark& bench,
                                 const std::vector<LevelSpec>& levels,
                                 const SearchConfig& cfg, Rng& rng);

/// High-fidelity random search under the same budget metering.
SearchResult run_random_search(const Benchmark& bench, double budget, Rng& rng);

struct MethodRunSummary {
  int run = 0;
  std::uint64_t seed = 0;
  bool any_high = false;
  std::string best_arch;
  double best_val_acc = 0.0;
  double best_test_acc = 0.0;
  double spent = 0.0;
  std::size_t evaluations = 0;
};

struct CurvePoint {
  std::string method;
  int run = 0;
  double spent = 0.0;
  double best_test_acc = 0.0;
};

struct Report {
  struct MethodStats {
    std::string name;
    double mean_best_test = 0.0;
    double stddev_best_test = 0.0;
    std::vector<MethodRunSummary> runs;
  };
  std::vector<MethodStats> methods;  // input order
  // Welch's t-test between the two best-by-mean methods; absent for runs < 2.
  std::optional<WelchResult> significance;
  std::string top_method;
  std::string second_method;
  std::vector<CurvePoint> curves;
};

SearchResult run_method(const Benchmark& bench, const std::string& method,
                        const SearchConfig& cfg, Rng& rng);

/// Runs each method for `runs` replicates (per-run rng seeded seed + run
/// index, shared across methods) and aggregates best test accuracies.
Report compare_methods(const Benchmark& bench, const std::vector<std::string>& methods,
                       int runs, const SearchConfig& cfg, std::uint64_t seed,
                       int parallel = 1);

}  // namespace mfkd
