#pragma once

#include <utility>
#include <vector>

#include "mfkd/gp.hpp"

namespace mfkd {

/// Candidates for the fidelity scaling factor rho.
struct RhoGrid {
  double lo = -2.0;
  double hi = 3.0;
  double step = 0.25;

  [[nodiscard]] std::vector<double> values() const;
};

struct CoKrigingGrids {
  HyperGrid low;
  HyperGrid delta;
  RhoGrid rho;
};

/// Two-fidelity fusion y_high(x) = rho * y_low(x) + delta(x). The low GP and
/// the discrepancy GP share no parameters.
struct CoKrigingModel {
  GpModel gp_low;
  double rho = 0.0;
  GpModel gp_delta;
  Eigen::MatrixXd x2;
  Eigen::VectorXd y2;
};

CoKrigingModel fit_cokriging(const Eigen::MatrixXd& x1, const Eigen::VectorXd& y1,
                             const Eigen::MatrixXd& x2, const Eigen::VectorXd& y2,
                             const CoKrigingGrids& grids);

Prediction predict_high(const CoKrigingModel& m, const Eigen::VectorXd& x);

/// Adds one high-fidelity observation and refits rho and the discrepancy GP.
/// Low-fidelity data is unchanged, so the fitted low GP is reused as-is.
CoKrigingModel update_high(const CoKrigingModel& m, const Eigen::VectorXd& x,
                           double y, const CoKrigingGrids& grids);

/// Recursive multi-level stack: level 1 is a plain GP; each further level
/// regresses on the posterior mean of the composed model below it.
struct MultiLevelModel {
  struct Stage {
    double rho = 0.0;
    GpModel gp_delta;
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
  };
  GpModel base;
  std::vector<Stage> stages;
};

MultiLevelModel fit_multilevel(
    const std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>>& levels,
    const CoKrigingGrids& grids);

/// Posterior at a given level; level 0 is the base GP.
Prediction predict_level(const MultiLevelModel& m, const Eigen::VectorXd& x,
                         std::size_t level);
Prediction predict_top(const MultiLevelModel& m, const Eigen::VectorXd& x);

namespace detail {

struct StageFit {
  double rho = 0.0;
  GpModel gp_delta;
};

/// Profile-likelihood rho fit: for each rho candidate the residual GP's
/// hyperparameters are re-optimized and the candidate is scored by the
/// residual GP's log marginal likelihood. Exact score ties go to the
/// smaller |rho|.
StageFit fit_stage(const Eigen::VectorXd& mu_prev_at_x, const Eigen::MatrixXd& x,
                   const Eigen::VectorXd& y, const HyperGrid& delta_grid,
                   const RhoGrid& rho_grid);

}  // namespace detail

}  // namespace mfkd
