#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mfkd {

/// RBF kernel settings. k(x,x') = signal_variance * exp(-|x-x'|^2 / (2 l^2)).
struct KernelConfig {
  double lengthscale = 1.0;
  double signal_variance = 1.0;
  double noise_variance = 1e-6;
};

double kernel_eval(const KernelConfig& cfg, const Eigen::VectorXd& a,
                   const Eigen::VectorXd& b);

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Exact GP regressor. Targets are stored centered; y_mean is restored at
/// prediction time. chol is the lower Cholesky factor of
/// K + (noise_variance + jitter) I.
struct GpModel {
  Eigen::MatrixXd train_x;
  Eigen::VectorXd train_y;  // centered
  double y_mean = 0.0;
  KernelConfig kernel;
  Eigen::MatrixXd chol;
  Eigen::VectorXd alpha;
  double jitter = 0.0;
};

GpModel fit_gp(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
               const KernelConfig& cfg);

Prediction predict(const GpModel& m, const Eigen::VectorXd& x);

double log_marginal_likelihood(const GpModel& m);

/// Fixed log-spaced grid; scales sized for accuracy targets in [0,1].
struct HyperGrid {
  std::vector<double> lengthscales{0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<double> signal_variances{0.01, 0.1, 1.0};
  std::vector<double> noise_variances{1e-6, 1e-4, 1e-2};
};

/// Grid point maximizing log marginal likelihood; ties go to the earliest
/// grid point in (lengthscale, signal, noise) nesting order.
KernelConfig optimize_hyperparams(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& y,
                                  const HyperGrid& grid);

/// optimize_hyperparams followed by fit_gp on the winner.
GpModel fit_gp_auto(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const HyperGrid& grid);

namespace detail {

Eigen::MatrixXd pairwise_sqdist(const Eigen::MatrixXd& x);

/// Caches distance and per-lengthscale exp terms so repeated grid scans over
/// changing targets (fixed inputs) stay cheap.
class GridScanner {
 public:
  GridScanner(Eigen::MatrixXd x, HyperGrid grid);

  /// Best config for targets y (uncentered); optionally reports its lml.
  KernelConfig best_config(const Eigen::VectorXd& y, double* best_lml = nullptr) const;

  const Eigen::MatrixXd& x() const { return x_; }

 private:
  Eigen::MatrixXd x_;
  HyperGrid grid_;
  std::vector<Eigen::MatrixXd> exp_terms_;  // exp(-D / (2 ls^2)) per lengthscale
};

}  // namespace detail

}  // namespace mfkd
