#include "mfkd/benchmark.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "mfkd/gp.hpp"
#include "mfkd/stats.hpp"

namespace mfkd {
namespace {

using nlohmann::json;

void check_fraction(double v, const std::string& key, const std::string& arch) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::runtime_error("benchmark: accuracy-out-of-range, " + key + "=" +
                             std::to_string(v) + " for arch \"" + arch + "\"");
  }
}

Eigen::VectorXd affine_to_range(const Eigen::VectorXd& v, double lo, double hi) {
  const double vmin = v.minCoeff();
  const double vmax = v.maxCoeff();
  if (vmax == vmin) {
    return Eigen::VectorXd::Constant(v.size(), 0.5 * (lo + hi));
  }
  return lo + ((v.array() - vmin) / (vmax - vmin)) * (hi - lo);
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

// Bisects the noise scale until kendall(u + s*eps, u) lands near the target.
double calibrate_noise_scale(const Eigen::VectorXd& u, const Eigen::VectorXd& eps,
                             double target_tau) {
  const std::vector<double> base = to_std(u);
  auto tau_at = [&](double s) {
    return kendall_tau(to_std(u + s * eps), base);
  };

  double lo = 0.0;
  double hi = 1.0;
  while (tau_at(hi) > target_tau) {
    hi *= 2.0;
    if (hi > 1e6) break;
  }
  double best_s = hi;
  double best_gap = std::abs(tau_at(hi) - target_tau);
  for (int step = 0; step < 50; ++step) {
    const double mid = 0.5 * (lo + hi);
    const double t = tau_at(mid);
    const double gap = std::abs(t - target_tau);
    if (gap < best_gap) {
      best_gap = gap;
      best_s = mid;
    }
    if (t > target_tau) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (best_gap > 0.02) {
    throw std::runtime_error("generate_synthetic: calibration-failure (closest tau off by " +
                             std::to_string(best_gap) + ")");
  }
  return best_s;
}

}  // namespace

const BenchRow& Benchmark::row(const Architecture& arch) const {
  return row_at(arch_index(arch, spec));
}

const BenchRow& Benchmark::row_at(std::uint64_t index) const {
  if (index >= rows.size()) {
    throw std::out_of_range("benchmark: unknown-architecture index " + std::to_string(index));
  }
  return rows[static_cast<std::size_t>(index)];
}

Benchmark load_benchmark(const std::string& path, bool percent) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_benchmark: cannot open " + path);

  std::string line;
  json header;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = json::parse(line);
    break;
  }
  if (header.is_null()) throw std::runtime_error("load_benchmark: parse-error, empty file");
  if (!header.contains("spec")) {
    throw std::runtime_error("load_benchmark: parse-error, missing header spec");
  }

  Benchmark bench;
  bench.spec.num_edges = header["spec"].at("num_edges").get<int>();
  bench.spec.num_ops = header["spec"].at("num_ops").get<int>();
  bench.name = header.value("name", std::string("unnamed"));

  const std::uint64_t total = bench.spec.size();
  if (total > (1ull << 22)) {
    throw std::runtime_error("load_benchmark: space-too-large");
  }
  bench.rows.resize(static_cast<std::size_t>(total));
  std::vector<bool> seen(static_cast<std::size_t>(total), false);

  const double scale = percent ? 0.01 : 1.0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(std::string("load_benchmark: parse-error, ") + e.what());
    }
    const std::string arch_text = obj.at("arch").get<std::string>();
    const Architecture arch = Architecture::parse(arch_text);
    if (!is_valid(arch, bench.spec)) {
      throw std::runtime_error("load_benchmark: invalid architecture \"" + arch_text + "\"");
    }
    const std::uint64_t idx = arch_index(arch, bench.spec);
    if (seen[static_cast<std::size_t>(idx)]) {
      throw std::runtime_error("load_benchmark: duplicate architecture \"" + arch_text + "\"");
    }
    seen[static_cast<std::size_t>(idx)] = true;

    BenchRow row;
    row.val_acc_low = obj.at("val_acc_low").get<double>() * scale;
    row.val_acc_high = obj.at("val_acc_high").get<double>() * scale;
    row.test_acc_final = obj.at("test_acc_final").get<double>() * scale;
    row.cost_low = obj.at("cost_low").get<double>();
    row.cost_high = obj.at("cost_high").get<double>();
    if (obj.contains("val_acc_low_logistic")) {
      row.val_acc_low_logistic = obj["val_acc_low_logistic"].get<double>() * scale;
    }
    check_fraction(row.val_acc_low, "val_acc_low", arch_text);
    check_fraction(row.val_acc_high, "val_acc_high", arch_text);
    check_fraction(row.test_acc_final, "test_acc_final", arch_text);
    if (row.val_acc_low_logistic) {
      check_fraction(*row.val_acc_low_logistic, "val_acc_low_logistic", arch_text);
    }
    if (row.cost_low < 0.0 || row.cost_high < 0.0) {
      throw std::runtime_error("load_benchmark: negative cost for arch \"" + arch_text + "\"");
    }
    bench.rows[static_cast<std::size_t>(idx)] = row;
  }

  for (std::uint64_t i = 0; i < total; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) {
      throw std::runtime_error("load_benchmark: incomplete-table, missing architecture \"" +
                               arch_from_index(i, bench.spec).str() + "\"");
    }
  }
  return bench;
}

void save_benchmark(const Benchmark& bench, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_benchmark: cannot open " + path);
  json header;
  header["spec"] = {{"num_edges", bench.spec.num_edges}, {"num_ops", bench.spec.num_ops}};
  header["name"] = bench.name;
  out << header.dump() << '\n';
  for (std::uint64_t i = 0; i < bench.rows.size(); ++i) {
    const BenchRow& row = bench.rows[static_cast<std::size_t>(i)];
    json obj;
    obj["arch"] = arch_from_index(i, bench.spec).str();
    obj["val_acc_low"] = row.val_acc_low;
    obj["val_acc_high"] = row.val_acc_high;
    obj["test_acc_final"] = row.test_acc_final;
    obj["cost_low"] = row.cost_low;
    obj["cost_high"] = row.cost_high;
    if (row.val_acc_low_logistic) obj["val_acc_low_logistic"] = *row.val_acc_low_logistic;
    out << obj.dump() << '\n';
  }
}

Benchmark generate_synthetic(const SpaceSpec& spec, const SyntheticConfig& cfg, Rng& rng) {
  if (!(cfg.target_tau > 0.0 && cfg.target_tau < 1.0)) {
    throw std::invalid_argument("generate_synthetic: target_tau must be in (0,1)");
  }
  const std::uint64_t total = spec.size();
  if (total > cfg.max_space) {
    throw std::length_error("generate_synthetic: space-too-large for full-Gram sampling");
  }
  const auto n = static_cast<Eigen::Index>(total);
  const Eigen::Index d = static_cast<Eigen::Index>(spec.num_edges) * spec.num_ops;

  Eigen::MatrixXd enc(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    enc.row(i) = encode(arch_from_index(static_cast<std::uint64_t>(i), spec), spec).transpose();
  }

  Eigen::MatrixXd k = (-detail::pairwise_sqdist(enc) /
                       (2.0 * cfg.surface_lengthscale * cfg.surface_lengthscale))
                          .array()
                          .exp()
                          .matrix();
  k.diagonal().array() += 1e-8;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("generate_synthetic: Gram Cholesky failed");
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](Eigen::Index m) {
    Eigen::VectorXd v(m);
    for (Eigen::Index i = 0; i < m; ++i) v[i] = normal(rng);
    return v;
  };

  const Eigen::VectorXd z = Eigen::MatrixXd(llt.matrixL()) * draw(n);
  Eigen::VectorXd u = z.array() - z.mean();
  const double sd = std::sqrt(u.squaredNorm() / static_cast<double>(n));
  if (sd > 0.0) u /= sd;

  const Eigen::VectorXd eps_low = draw(n);
  const Eigen::VectorXd eps_logistic = cfg.target_tau_logistic ? draw(n) : Eigen::VectorXd();
  const Eigen::VectorXd eps_test = draw(n);

  const double s_low = calibrate_noise_scale(u, eps_low, cfg.target_tau);
  const Eigen::VectorXd high = affine_to_range(u, 0.3, 0.95);
  const Eigen::VectorXd low = affine_to_range(u + s_low * eps_low, 0.3, 0.95);
  const Eigen::VectorXd test = affine_to_range(u + cfg.test_noise * eps_test, 0.3, 0.95);

  Eigen::VectorXd logistic;
  if (cfg.target_tau_logistic) {
    const double s = calibrate_noise_scale(u, eps_logistic, *cfg.target_tau_logistic);
    logistic = affine_to_range(u + s * eps_logistic, 0.3, 0.95);
  }

  Benchmark bench;
  bench.spec = spec;
  bench.name = "synthetic";
  bench.rows.resize(static_cast<std::size_t>(total));
  for (Eigen::Index i = 0; i < n; ++i) {
    BenchRow& row = bench.rows[static_cast<std::size_t>(i)];
    row.val_acc_low = low[i];
    row.val_acc_high = high[i];
    row.test_acc_final = test[i];
    row.cost_low = cfg.cost_low;
    row.cost_high = cfg.cost_high;
    if (cfg.target_tau_logistic) row.val_acc_low_logistic = logistic[i];
  }
  return bench;
}

double correlate_fidelities(const Benchmark& bench) {
  std::vector<double> low, high;
  low.reserve(bench.rows.size());
  high.reserve(bench.rows.size());
  for (const BenchRow& row : bench.rows) {
    low.push_back(row.val_acc_low);
    high.push_back(row.val_acc_high);
  }
  return kendall_tau(low, high);
}

double correlate_fidelities_logistic(const Benchmark& bench) {
  std::vector<double> low, high;
  low.reserve(bench.rows.size());
  high.reserve(bench.rows.size());
  for (const BenchRow& row : bench.rows) {
    if (!row.val_acc_low_logistic) {
      throw std::runtime_error("benchmark: missing-column val_acc_low_logistic");
    }
    low.push_back(*row.val_acc_low_logistic);
    high.push_back(row.val_acc_high);
  }
  return kendall_tau(low, high);
}

EvalRecord evaluate(const Benchmark& bench, BudgetMeter& meter, const Architecture& arch,
                    Fidelity fidelity, std::vector<EvalRecord>& log, bool logistic_low) {
  const BenchRow& row = bench.row(arch);
  EvalRecord rec;
  rec.arch = arch;
  rec.fidelity = fidelity;
  rec.level = fidelity == Fidelity::Low ? 0 : 1;
  if (fidelity == Fidelity::Low) {
    if (logistic_low) {
      if (!row.val_acc_low_logistic) {
        throw std::runtime_error("evaluate: missing-column val_acc_low_logistic");
      }
      rec.val_acc = *row.val_acc_low_logistic;
    } else {
      rec.val_acc = row.val_acc_low;
    }
    rec.cost = row.cost_low;
  } else {
    rec.val_acc = row.val_acc_high;
    rec.cost = row.cost_high;
  }
  meter.spent += rec.cost;
  rec.spent_after = meter.spent;
  rec.over_budget = rec.spent_after > meter.limit;
  log.push_back(rec);
  return rec;
}

}  // namespace mfkd
