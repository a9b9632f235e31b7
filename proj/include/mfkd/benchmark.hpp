#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfkd/search_space.hpp"

namespace mfkd {

struct BenchRow {
  double val_acc_low = 0.0;    // validation accuracy after E1 epochs, KD/NST training
  double val_acc_high = 0.0;   // validation accuracy after E2 epochs, logistic loss
  double test_acc_final = 0.0; // test accuracy after full training, reporting only
  double cost_low = 1.0;       // seconds
  double cost_high = 12.0;     // seconds
  std::optional<double> val_acc_low_logistic;  // ablation low-fidelity column
};

/// Complete tabular oracle: one row per enumerable architecture, indexed by
/// the canonical lexicographic architecture index.
struct Benchmark {
  SpaceSpec spec;
  std::string name;
  std::vector<BenchRow> rows;

  const BenchRow& row(const Architecture& arch) const;
  const BenchRow& row_at(std::uint64_t index) const;
};

/// JSON Lines: header object first ({"spec":...,"name":...}), then one row
/// object per architecture. With percent=true accuracies are divided by 100.
Benchmark load_benchmark(const std::string& path, bool percent = false);
void save_benchmark(const Benchmark& bench, const std::string& path);

struct SyntheticConfig {
  double target_tau = 0.47;
  std::optional<double> target_tau_logistic;
  double cost_low = 1.0;   // abstract seconds, proportional to E1
  double cost_high = 12.0; // proportional to E2
  double surface_lengthscale = 2.0;
  double test_noise = 0.15;
  std::uint64_t max_space = 4096;
};

/// Smooth random high-fidelity surface (GP sample over encodings, Cholesky on
/// the full Gram matrix) with a noisy low-fidelity copy; the noise scale is
/// bisected until the empirical Kendall tau is within +-0.02 of the target.
Benchmark generate_synthetic(const SpaceSpec& spec, const SyntheticConfig& cfg, Rng& rng);

/// Kendall tau between val_acc_low and val_acc_high over the whole table.
double correlate_fidelities(const Benchmark& bench);
/// Same, for the logistic low-fidelity column. Throws when the column is absent.
double correlate_fidelities_logistic(const Benchmark& bench);

enum class Fidelity { Low, High };

struct BudgetMeter {
  double spent = 0.0;
  double limit = 0.0;
};

struct EvalRecord {
  Architecture arch;
  Fidelity fidelity = Fidelity::Low;
  int level = 0;  // multi-level runs; 0 = cheapest
  double val_acc = 0.0;
  double cost = 0.0;
  double spent_after = 0.0;
  bool over_budget = false;  // spent_after exceeded the meter limit
};

/// Table lookup plus budget debit. Evaluations are always permitted; the
/// record is flagged when spent_after exceeds the limit. With
/// logistic_low=true the Low fidelity reads the logistic column.
EvalRecord evaluate(const Benchmark& bench, BudgetMeter& meter, const Architecture& arch,
                    Fidelity fidelity, std::vector<EvalRecord>& log,
                    bool logistic_low = false);

}  // namespace mfkd
