#include "mfkd/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <unordered_set>

namespace mfkd {
namespace {

Eigen::MatrixXd encodings_of(const std::vector<std::uint64_t>& idxs, const SpaceSpec& spec) {
  const Eigen::Index d = static_cast<Eigen::Index>(spec.num_edges) * spec.num_ops;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(idxs.size()), d);
  for (std::size_t i = 0; i < idxs.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) =
        encode(arch_from_index(idxs[i], spec), spec).transpose();
  }
  return x;
}

Eigen::VectorXd vector_of(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void finalize_best(const Benchmark& bench, int top_level, SearchResult* result) {
  bool found = false;
  double best_val = 0.0;
  Architecture best;
  for (const EvalRecord& rec : result->trajectory) {
    if (rec.level != top_level) continue;
    if (!found || rec.val_acc > best_val) {
      found = true;
      best_val = rec.val_acc;
      best = rec.arch;
    }
  }
  result->any_high = found;
  if (found) {
    result->best_arch = best;
    result->best_val_acc = best_val;
    result->best_test_acc = bench.row(best).test_acc_final;
  }
}

// The shared engine behind run_mfkd / run_gpr_single_fidelity /
// run_mfkd_multilevel. With a single level the surrogate is a plain GP
// refitted on the growing top-level data; with more, level 0 is fitted once
// and the rho/delta stages are refitted each iteration.
SearchResult run_levels(const Benchmark& bench, const std::vector<LevelSpec>& levels,
                        const SearchConfig& cfg, Rng& rng) {
  if (levels.empty()) throw std::invalid_argument("run_levels: no levels");
  if (!(cfg.budget > 0.0)) throw std::invalid_argument("run_levels: budget must be > 0");
  if (cfg.candidate_pool < 1) {
    throw std::invalid_argument("run_levels: candidate_pool must be >= 1");
  }
  const std::size_t num_levels = levels.size();
  const int top = static_cast<int>(num_levels) - 1;
  const SpaceSpec& spec = bench.spec;
  const std::uint64_t total = spec.size();

  SearchResult result;
  BudgetMeter meter{0.0, cfg.budget};
  std::vector<std::vector<std::uint64_t>> idxs(num_levels);
  std::vector<std::vector<double>> vals(num_levels);

  auto eval_at = [&](int level, const Architecture& arch) {
    const BenchRow& row = bench.row(arch);
    EvalRecord rec;
    rec.arch = arch;
    rec.level = level;
    rec.fidelity = level == top ? Fidelity::High : Fidelity::Low;
    rec.val_acc = levels[static_cast<std::size_t>(level)].value(row);
    rec.cost = levels[static_cast<std::size_t>(level)].cost(row);
    meter.spent += rec.cost;
    rec.spent_after = meter.spent;
    rec.over_budget = rec.spent_after > meter.limit;
    result.trajectory.push_back(rec);
    idxs[static_cast<std::size_t>(level)].push_back(arch_index(arch, spec));
    vals[static_cast<std::size_t>(level)].push_back(rec.val_acc);
  };

  // Warm-up, cheapest level first.
  for (std::size_t level = 0; level < num_levels; ++level) {
    if (levels[level].warmup < 1) {
      throw std::invalid_argument("run_levels: warm-up counts must be >= 1");
    }
    const auto archs =
        sample_uniform(spec, static_cast<std::size_t>(levels[level].warmup), rng);
    for (const Architecture& arch : archs) eval_at(static_cast<int>(level), arch);
  }
  result.warmup_exceeded_budget = meter.spent >= meter.limit;

  MultiLevelModel model;
  const bool multi = num_levels >= 2;
  if (multi) {
    model.base = fit_gp_auto(encodings_of(idxs[0], spec), vector_of(vals[0]), cfg.grids.low);
  }

  auto refit = [&]() {
    model.stages.clear();
    if (!multi) {
      model.base =
          fit_gp_auto(encodings_of(idxs[0], spec), vector_of(vals[0]), cfg.grids.low);
      return;
    }
    for (std::size_t level = 1; level < num_levels; ++level) {
      const Eigen::MatrixXd x = encodings_of(idxs[level], spec);
      const Eigen::VectorXd y = vector_of(vals[level]);
      Eigen::VectorXd mu_prev(y.size());
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        mu_prev[i] = predict_level(model, x.row(i).transpose(), level - 1).mean;
      }
      const auto stage = detail::fit_stage(mu_prev, x, y, cfg.grids.delta, cfg.grids.rho);
      model.stages.push_back({stage.rho, stage.gp_delta, x, y});
    }
  };

  std::unordered_set<std::uint64_t> evaluated_top(idxs[static_cast<std::size_t>(top)].begin(),
                                                  idxs[static_cast<std::size_t>(top)].end());

  while (meter.spent < meter.limit) {
    std::vector<std::uint64_t> remaining;
    remaining.reserve(static_cast<std::size_t>(total) - evaluated_top.size());
    for (std::uint64_t i = 0; i < total; ++i) {
      if (!evaluated_top.contains(i)) remaining.push_back(i);
    }
    if (remaining.empty()) break;
    const std::size_t pool_size =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.candidate_pool), remaining.size());
    const auto pool = sample_from_pool(remaining, pool_size, rng);

    refit();

    std::vector<Prediction> preds(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      preds[i] = predict_top(model, encode(arch_from_index(pool[i], spec), spec));
    }
    const std::size_t pick = ucb_argmax(preds, cfg.ucb_beta, cfg.ucb_use_stddev);
    const Architecture arch = arch_from_index(pool[pick], spec);
    eval_at(top, arch);
    evaluated_top.insert(pool[pick]);
  }

  refit();  // final model reflects every evaluation
  result.ml_model = model;
  if (multi) {
    const auto& s0 = model.stages.front();
    result.model_final = CoKrigingModel{model.base, s0.rho, s0.gp_delta, s0.x, s0.y};
  }
  finalize_best(bench, top, &result);
  return result;
}

std::vector<LevelSpec> two_level_specs(const SearchConfig& cfg, bool logistic_low) {
  LevelSpec low;
  low.value = [logistic_low](const BenchRow& row) {
    if (logistic_low) {
      if (!row.val_acc_low_logistic) {
        throw std::runtime_error("run_mf_no_kd: missing-column val_acc_low_logistic");
      }
      return *row.val_acc_low_logistic;
    }
    return row.val_acc_low;
  };
  low.cost = [](const BenchRow& row) { return row.cost_low; };
  low.warmup = cfg.n1;
  LevelSpec high;
  high.value = [](const BenchRow& row) { return row.val_acc_high; };
  high.cost = [](const BenchRow& row) { return row.cost_high; };
  high.warmup = cfg.n2;
  return {low, high};
}

}  // namespace

std::size_t ucb_argmax(const std::vector<Prediction>& preds, double ucb_beta,
                       bool use_stddev) {
  if (preds.empty()) throw std::invalid_argument("ucb_select: empty-candidates");
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double u = use_stddev ? std::sqrt(preds[i].variance) : preds[i].variance;
    const double score = preds[i].mean + ucb_beta * u;
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

std::size_t ucb_select(const CoKrigingModel& model, const std::vector<Encoding>& candidates,
                       double ucb_beta, bool use_stddev) {
  if (candidates.empty()) throw std::invalid_argument("ucb_select: empty-candidates");
  std::vector<Prediction> preds(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    preds[i] = predict_high(model, candidates[i]);
  }
  return ucb_argmax(preds, ucb_beta, use_stddev);
}

SearchResult run_mfkd(const Benchmark& bench, const SearchConfig& cfg, Rng& rng) {
  return run_levels(bench, two_level_specs(cfg, false), cfg, rng);
}

SearchResult run_mf_no_kd(const Benchmark& bench, const SearchConfig& cfg, Rng& rng) {
  if (!bench.rows.empty() && !bench.rows.front().val_acc_low_logistic) {
    throw std::runtime_error("run_mf_no_kd: missing-column val_acc_low_logistic");
  }
  return run_levels(bench, two_level_specs(cfg, true), cfg, rng);
}

SearchResult run_gpr_single_fidelity(const Benchmark& bench, const SearchConfig& cfg,
                                     Rng& rng) {
  LevelSpec high;
  high.value = [](const BenchRow& row) { return row.val_acc_high; };
  high.cost = [](const BenchRow& row) { return row.cost_high; };
  high.warmup = cfg.n2;
  return run_levels(bench, {high}, cfg, rng);
}

SearchResult run_mfkd_multilevel(const Benchmark& bench, const std::vector<LevelSpec>& levels,
                                 const SearchConfig& cfg, Rng& rng) {
  if (levels.size() < 2) {
    throw std::invalid_argument("run_mfkd_multilevel: at least two levels required");
  }
  return run_levels(bench, levels, cfg, rng);
}

SearchResult run_random_search(const Benchmark& bench, double budget, Rng& rng) {
  if (!(budget > 0.0)) throw std::invalid_argument("run_random_search: budget must be > 0");
  const SpaceSpec& spec = bench.spec;
  const std::uint64_t total = spec.size();

  SearchResult result;
  BudgetMeter meter{0.0, budget};
  std::unordered_set<std::uint64_t> evaluated;
  while (true) {
    std::vector<std::uint64_t> remaining;
    remaining.reserve(static_cast<std::size_t>(total) - evaluated.size());
    for (std::uint64_t i = 0; i < total; ++i) {
      if (!evaluated.contains(i)) remaining.push_back(i);
    }
    if (remaining.empty()) break;
    const std::uint64_t idx = sample_from_pool(remaining, 1, rng).front();
    const Architecture arch = arch_from_index(idx, spec);
    const BenchRow& row = bench.row(arch);
    if (meter.spent + row.cost_high > meter.limit) break;
    EvalRecord rec;
    rec.arch = arch;
    rec.level = 0;
    rec.fidelity = Fidelity::High;
    rec.val_acc = row.val_acc_high;
    rec.cost = row.cost_high;
    meter.spent += rec.cost;
    rec.spent_after = meter.spent;
    result.trajectory.push_back(rec);
    evaluated.insert(idx);
  }
  finalize_best(bench, 0, &result);
  return result;
}

SearchResult run_method(const Benchmark& bench, const std::string& method,
                        const SearchConfig& cfg, Rng& rng) {
  if (method == "mfkd") return run_mfkd(bench, cfg, rng);
  if (method == "random") return run_random_search(bench, cfg.budget, rng);
  if (method == "gpr") return run_gpr_single_fidelity(bench, cfg, rng);
  if (method == "mf-no-kd") return run_mf_no_kd(bench, cfg, rng);
  throw std::invalid_argument("unknown method '" + method + "'");
}

Report compare_methods(const Benchmark& bench, const std::vector<std::string>& methods,
                       int runs, const SearchConfig& cfg, std::uint64_t seed, int parallel) {
  if (methods.empty()) throw std::invalid_argument("compare_methods: no methods");
  if (runs < 1) throw std::invalid_argument("compare_methods: runs must be >= 1");

  struct Task {
    std::size_t method_idx;
    int run;
  };
  std::vector<Task> tasks;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (int r = 0; r < runs; ++r) tasks.push_back({m, r});
  }
  std::vector<SearchResult> outcomes(tasks.size());
  std::vector<std::string> failures(tasks.size());

  auto worker_body = [&](std::size_t t) {
    const Task& task = tasks[t];
    Rng rng(seed + static_cast<std::uint64_t>(task.run));
    try {
      outcomes[t] = run_method(bench, methods[task.method_idx], cfg, rng);
    } catch (const std::exception& e) {
      failures[t] = e.what();
    }
  };

  const int workers = std::max(1, parallel);
  if (workers == 1) {
    for (std::size_t t = 0; t < tasks.size(); ++t) worker_body(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      threads.emplace_back([&]() {
        for (std::size_t t = next.fetch_add(1); t < tasks.size(); t = next.fetch_add(1)) {
          worker_body(t);
        }
      });
    }
    for (auto& th : threads) th.join();
  }
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (!failures[t].empty()) throw std::runtime_error("compare_methods: " + failures[t]);
  }

  Report report;
  report.methods.resize(methods.size());
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const Task& task = tasks[t];
    const SearchResult& res = outcomes[t];
    auto& stats = report.methods[task.method_idx];
    stats.name = methods[task.method_idx];

    MethodRunSummary summary;
    summary.run = task.run;
    summary.seed = seed + static_cast<std::uint64_t>(task.run);
    summary.any_high = res.any_high;
    summary.best_arch = res.any_high ? res.best_arch.str() : std::string();
    summary.best_val_acc = res.best_val_acc;
    summary.best_test_acc = res.best_test_acc;
    summary.spent = res.trajectory.empty() ? 0.0 : res.trajectory.back().spent_after;
    summary.evaluations = res.trajectory.size();
    stats.runs.push_back(summary);

    // Best-so-far curve over the run's high-fidelity records; the reported
    // accuracy is the test column of the current val-argmax.
    bool have = false;
    double best_val = 0.0, best_test = 0.0;
    const int top = res.trajectory.empty()
                        ? 0
                        : std::max_element(res.trajectory.begin(), res.trajectory.end(),
                                           [](const EvalRecord& a, const EvalRecord& b) {
                                             return a.level < b.level;
                                           })
                              ->level;
    for (const EvalRecord& rec : res.trajectory) {
      if (rec.level != top) continue;
      if (!have || rec.val_acc > best_val) {
        have = true;
        best_val = rec.val_acc;
        best_test = bench.row(rec.arch).test_acc_final;
      }
      report.curves.push_back(
          {methods[task.method_idx], task.run, rec.spent_after, best_test});
    }
  }

  for (auto& stats : report.methods) {
    std::vector<double> best_tests;
    best_tests.reserve(stats.runs.size());
    for (const auto& r : stats.runs) best_tests.push_back(r.best_test_acc);
    stats.mean_best_test = mean(best_tests);
    stats.stddev_best_test = sample_stddev(best_tests);
  }

  if (report.methods.size() >= 2 && runs >= 2) {
    std::vector<std::size_t> order(report.methods.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return report.methods[a].mean_best_test > report.methods[b].mean_best_test;
    });
    const auto& top_stats = report.methods[order[0]];
    const auto& second_stats = report.methods[order[1]];
    std::vector<double> a, b;
    for (const auto& r : top_stats.runs) a.push_back(r.best_test_acc);
    for (const auto& r : second_stats.runs) b.push_back(r.best_test_acc);
    report.top_method = top_stats.name;
    report.second_method = second_stats.name;
    report.significance = welch_t_test(a, b);
  }
  return report;
}

}  // namespace mfkd
