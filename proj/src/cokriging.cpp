#include "mfkd/cokriging.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mfkd {

std::vector<double> RhoGrid::values() const {
  if (!(step > 0.0) || hi < lo) throw std::invalid_argument("RhoGrid: bad range");
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = lo + step * i;
    if (v > hi + 0.5 * step) break;
    out.push_back(v);
  }
  return out;
}

namespace detail {

StageFit fit_stage(const Eigen::VectorXd& mu_prev_at_x, const Eigen::MatrixXd& x,
                   const Eigen::VectorXd& y, const HyperGrid& delta_grid,
                   const RhoGrid& rho_grid) {
  if (mu_prev_at_x.size() != y.size()) {
    throw std::invalid_argument("fit_stage: prediction/target length mismatch");
  }
  const GridScanner scanner(x, delta_grid);
  const std::vector<double> rhos = rho_grid.values();
  if (rhos.empty()) throw std::invalid_argument("fit_stage: empty rho grid");

  bool found = false;
  double best_rho = 0.0;
  double best_score = -std::numeric_limits<double>::infinity();
  KernelConfig best_cfg;
  for (double rho : rhos) {
    const Eigen::VectorXd resid = y - rho * mu_prev_at_x;
    double score = 0.0;
    KernelConfig cfg;
    try {
      cfg = scanner.best_config(resid, &score);
    } catch (const std::runtime_error&) {
      continue;
    }
    const bool better =
        !found || score > best_score ||
        (score == best_score && std::abs(rho) < std::abs(best_rho));
    if (better) {
      found = true;
      best_rho = rho;
      best_score = score;
      best_cfg = cfg;
    }
  }
  if (!found) throw std::runtime_error("fit_stage: all-fits-failed");

  StageFit fit;
  fit.rho = best_rho;
  fit.gp_delta = fit_gp(x, y - best_rho * mu_prev_at_x, best_cfg);
  return fit;
}

}  // namespace detail

CoKrigingModel fit_cokriging(const Eigen::MatrixXd& x1, const Eigen::VectorXd& y1,
                             const Eigen::MatrixXd& x2, const Eigen::VectorXd& y2,
                             const CoKrigingGrids& grids) {
  if (y1.size() == 0 || y2.size() == 0) {
    throw std::invalid_argument("fit_cokriging: empty fidelity dataset");
  }
  if (x1.cols() != x2.cols()) {
    throw std::invalid_argument("fit_cokriging: dimension-mismatch between fidelities");
  }
  CoKrigingModel m;
  m.gp_low = fit_gp_auto(x1, y1, grids.low);

  Eigen::VectorXd mu_low(y2.size());
  for (Eigen::Index i = 0; i < y2.size(); ++i) {
    mu_low[i] = predict(m.gp_low, x2.row(i).transpose()).mean;
  }
  const auto stage = detail::fit_stage(mu_low, x2, y2, grids.delta, grids.rho);
  m.rho = stage.rho;
  m.gp_delta = stage.gp_delta;
  m.x2 = x2;
  m.y2 = y2;
  return m;
}

Prediction predict_high(const CoKrigingModel& m, const Eigen::VectorXd& x) {
  const Prediction low = predict(m.gp_low, x);
  const Prediction delta = predict(m.gp_delta, x);
  Prediction p;
  p.mean = m.rho * low.mean + delta.mean;
  p.variance = m.rho * m.rho * low.variance + delta.variance;
  if (p.variance < 0.0) p.variance = 0.0;
  return p;
}

CoKrigingModel update_high(const CoKrigingModel& m, const Eigen::VectorXd& x,
                           double y, const CoKrigingGrids& grids) {
  if (x.size() != m.gp_low.train_x.cols()) {
    throw std::invalid_argument("update_high: dimension-mismatch");
  }
  const Eigen::Index n = m.y2.size();
  Eigen::MatrixXd x2(n + 1, m.x2.cols());
  x2.topRows(n) = m.x2;
  x2.row(n) = x.transpose();
  Eigen::VectorXd y2(n + 1);
  y2.head(n) = m.y2;
  y2[n] = y;

  CoKrigingModel out;
  out.gp_low = m.gp_low;  // low-fidelity data unchanged
  Eigen::VectorXd mu_low(y2.size());
  for (Eigen::Index i = 0; i < y2.size(); ++i) {
    mu_low[i] = predict(out.gp_low, x2.row(i).transpose()).mean;
  }
  const auto stage = detail::fit_stage(mu_low, x2, y2, grids.delta, grids.rho);
  out.rho = stage.rho;
  out.gp_delta = stage.gp_delta;
  out.x2 = std::move(x2);
  out.y2 = std::move(y2);
  return out;
}

MultiLevelModel fit_multilevel(
    const std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>>& levels,
    const CoKrigingGrids& grids) {
  if (levels.size() < 2) {
    throw std::invalid_argument("fit_multilevel: at least two fidelity levels required");
  }
  for (const auto& [x, y] : levels) {
    if (y.size() == 0) throw std::invalid_argument("fit_multilevel: empty level");
    if (x.rows() != y.size()) throw std::invalid_argument("fit_multilevel: x/y mismatch");
  }
  MultiLevelModel m;
  m.base = fit_gp_auto(levels[0].first, levels[0].second, grids.low);
  for (std::size_t level = 1; level < levels.size(); ++level) {
    const auto& [x, y] = levels[level];
    Eigen::VectorXd mu_prev(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      mu_prev[i] = predict_level(m, x.row(i).transpose(), level - 1).mean;
    }
    const auto stage = detail::fit_stage(mu_prev, x, y, grids.delta, grids.rho);
    m.stages.push_back({stage.rho, stage.gp_delta, x, y});
  }
  return m;
}

Prediction predict_level(const MultiLevelModel& m, const Eigen::VectorXd& x,
                         std::size_t level) {
  if (level > m.stages.size()) {
    throw std::out_of_range("predict_level: no such level");
  }
  Prediction p = predict(m.base, x);
  for (std::size_t s = 0; s < level; ++s) {
    const Prediction d = predict(m.stages[s].gp_delta, x);
    p.mean = m.stages[s].rho * p.mean + d.mean;
    p.variance = m.stages[s].rho * m.stages[s].rho * p.variance + d.variance;
  }
  if (p.variance < 0.0) p.variance = 0.0;
  return p;
}

Prediction predict_top(const MultiLevelModel& m, const Eigen::VectorXd& x) {
  return predict_level(m, x, m.stages.size());
}

}  // namespace mfkd
