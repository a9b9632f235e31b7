#include "mfkd/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace mfkd {
namespace {

constexpr double kJitterStart = 1e-10;  // relative to signal_variance
constexpr double kJitterMax = 1e-4;

// Cholesky with diagonal jitter escalation. Returns false when even the
// maximum jitter fails.
bool cholesky_with_jitter(const Eigen::MatrixXd& a, double signal_variance,
                          Eigen::MatrixXd* lower, double* jitter_out) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) {
    *lower = llt.matrixL();
    *jitter_out = 0.0;
    return true;
  }
  for (double j = kJitterStart * signal_variance; j <= kJitterMax * signal_variance * 1.0000001;
       j *= 10.0) {
    Eigen::MatrixXd aj = a;
    aj.diagonal().array() += j;
    llt.compute(aj);
    if (llt.info() == Eigen::Success) {
      *lower = llt.matrixL();
      *jitter_out = j;
      return true;
    }
  }
  return false;
}

double lml_from_factor(const Eigen::MatrixXd& lower, const Eigen::VectorXd& yc,
                       const Eigen::VectorXd& alpha) {
  const auto n = static_cast<double>(yc.size());
  double logdet_half = 0.0;
  for (Eigen::Index i = 0; i < lower.rows(); ++i) logdet_half += std::log(lower(i, i));
  return -0.5 * yc.dot(alpha) - logdet_half - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

void check_kernel(const KernelConfig& cfg) {
  if (!(cfg.lengthscale > 0.0)) throw std::invalid_argument("kernel: lengthscale must be > 0");
  if (!(cfg.signal_variance > 0.0)) {
    throw std::invalid_argument("kernel: signal_variance must be > 0");
  }
  if (cfg.noise_variance < 0.0) {
    throw std::invalid_argument("kernel: noise_variance must be >= 0");
  }
}

}  // namespace

double kernel_eval(const KernelConfig& cfg, const Eigen::VectorXd& a,
                   const Eigen::VectorXd& b) {
  check_kernel(cfg);
  if (a.size() != b.size()) {
    throw std::invalid_argument("kernel_eval: dimension-mismatch");
  }
  const double sq = (a - b).squaredNorm();
  return cfg.signal_variance * std::exp(-sq / (2.0 * cfg.lengthscale * cfg.lengthscale));
}

GpModel fit_gp(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
               const KernelConfig& cfg) {
  check_kernel(cfg);
  const Eigen::Index n = y.size();
  if (n == 0) throw std::invalid_argument("fit_gp: empty training set");
  if (x.rows() != n) throw std::invalid_argument("fit_gp: x/y row mismatch");

  if (cfg.noise_variance == 0.0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if ((x.row(i) - x.row(j)).squaredNorm() == 0.0) {
          throw std::invalid_argument("fit_gp: duplicate-inputs-with-zero-noise");
        }
      }
    }
  }

  const Eigen::MatrixXd d = detail::pairwise_sqdist(x);
  Eigen::MatrixXd k =
      cfg.signal_variance *
      (-d / (2.0 * cfg.lengthscale * cfg.lengthscale)).array().exp().matrix();
  k.diagonal().array() += cfg.noise_variance;

  GpModel m;
  m.train_x = x;
  m.y_mean = y.mean();
  m.train_y = y.array() - m.y_mean;
  m.kernel = cfg;
  if (!cholesky_with_jitter(k, cfg.signal_variance, &m.chol, &m.jitter)) {
    throw std::runtime_error("fit_gp: cholesky-failure after maximum jitter escalation");
  }
  m.alpha = m.chol.triangularView<Eigen::Lower>().solve(m.train_y);
  m.chol.triangularView<Eigen::Lower>().transpose().solveInPlace(m.alpha);
  return m;
}

Prediction predict(const GpModel& m, const Eigen::VectorXd& x) {
  if (x.size() != m.train_x.cols()) {
    throw std::invalid_argument("predict: dimension-mismatch");
  }
  const Eigen::Index n = m.train_y.size();
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ks[i] = kernel_eval(m.kernel, m.train_x.row(i).transpose(), x);
  }
  Prediction p;
  p.mean = m.y_mean + ks.dot(m.alpha);
  const Eigen::VectorXd v = m.chol.triangularView<Eigen::Lower>().solve(ks);
  p.variance = kernel_eval(m.kernel, x, x) - v.squaredNorm();
  if (p.variance < 0.0) p.variance = 0.0;
  return p;
}

double log_marginal_likelihood(const GpModel& m) {
  return lml_from_factor(m.chol, m.train_y, m.alpha);
}

KernelConfig optimize_hyperparams(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  const HyperGrid& grid) {
  detail::GridScanner scanner(x, grid);
  return scanner.best_config(y);
}

GpModel fit_gp_auto(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const HyperGrid& grid) {
  return fit_gp(x, y, optimize_hyperparams(x, y, grid));
}

namespace detail {

Eigen::MatrixXd pairwise_sqdist(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double sq = (x.row(i) - x.row(j)).squaredNorm();
      d(i, j) = sq;
      d(j, i) = sq;
    }
  }
  return d;
}

GridScanner::GridScanner(Eigen::MatrixXd x, HyperGrid grid)
    : x_(std::move(x)), grid_(std::move(grid)) {
  if (grid_.lengthscales.empty() || grid_.signal_variances.empty() ||
      grid_.noise_variances.empty()) {
    throw std::invalid_argument("optimize_hyperparams: empty grid");
  }
  const Eigen::MatrixXd d = pairwise_sqdist(x_);
  exp_terms_.reserve(grid_.lengthscales.size());
  for (double ls : grid_.lengthscales) {
    exp_terms_.push_back((-d / (2.0 * ls * ls)).array().exp().matrix());
  }
}

KernelConfig GridScanner::best_config(const Eigen::VectorXd& y, double* best_lml) const {
  if (y.size() != x_.rows()) {
    throw std::invalid_argument("optimize_hyperparams: x/y row mismatch");
  }
  const Eigen::VectorXd yc = y.array() - y.mean();
  bool found = false;
  KernelConfig best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t li = 0; li < grid_.lengthscales.size(); ++li) {
    for (double sv : grid_.signal_variances) {
      for (double nv : grid_.noise_variances) {
        Eigen::MatrixXd k = sv * exp_terms_[li];
        k.diagonal().array() += nv;
        Eigen::MatrixXd lower;
        double jitter = 0.0;
        if (!cholesky_with_jitter(k, sv, &lower, &jitter)) continue;
        Eigen::VectorXd alpha = lower.triangularView<Eigen::Lower>().solve(yc);
        lower.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha);
        const double score = lml_from_factor(lower, yc, alpha);
        if (!std::isfinite(score)) continue;
        if (!found || score > best_score) {
          found = true;
          best_score = score;
          best = KernelConfig{grid_.lengthscales[li], sv, nv};
        }
      }
    }
  }
  if (!found) throw std::runtime_error("optimize_hyperparams: all-fits-failed");
  if (best_lml != nullptr) *best_lml = best_score;
  return best;
}

}  // namespace detail

}  // namespace mfkd
