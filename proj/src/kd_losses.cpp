#include "mfkd/kd_losses.hpp"

#include <cmath>
#include <stdexcept>

namespace mfkd {
namespace {

constexpr double kProbFloor = 1e-12;
constexpr double kNormFloor = 1e-12;

double poly_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                   const MmdKernelSpec& kernel) {
  if (kernel.b < 1) throw std::invalid_argument("mmd2: kernel degree b must be >= 1");
  return std::pow(a.dot(b) + kernel.c, kernel.b);
}

// Row normalized to unit L2 norm. Tiny norms are floored; an exactly
// all-zero row is rejected.
Eigen::VectorXd normalized_row(const Eigen::MatrixXd& f, int row) {
  const Eigen::VectorXd r = f.row(row).transpose();
  double norm = r.norm();
  if (norm < kNormFloor) {
    if ((r.array() == 0.0).all()) {
      throw std::invalid_argument("mmd2: zero-row-after-flooring (all-zero channel)");
    }
    norm = kNormFloor;
  }
  return r / norm;
}

double one_hot_cross_entropy(int label, const Eigen::VectorXd& q) {
  if (label < 0 || label >= q.size()) {
    throw std::out_of_range("label index out of range");
  }
  return -std::log(std::max(q[label], kProbFloor));
}

void check_logits(const Eigen::MatrixXd& logits, const std::vector<int>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows()) {
    throw std::invalid_argument("dimension-mismatch: labels vs logits batch");
  }
}

}  // namespace

Eigen::VectorXd softmax_temp(const Eigen::VectorXd& z, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("softmax_temp: non-positive-temperature");
  const Eigen::ArrayXd scaled = z.array() / tau;
  const Eigen::ArrayXd e = (scaled - scaled.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

double cross_entropy(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw std::invalid_argument("cross_entropy: dimension-mismatch");
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      if (q[i] <= 0.0) {
        throw std::invalid_argument("cross_entropy: support-mismatch (p>0 where q=0)");
      }
      h -= p[i] * std::log(q[i]);
    }
  }
  return h;
}

double kd_loss(const Eigen::MatrixXd& student_logits,
               const Eigen::MatrixXd& teacher_logits,
               const std::vector<int>& labels, const KdConfig& cfg) {
  if (student_logits.rows() != teacher_logits.rows() ||
      student_logits.cols() != teacher_logits.cols()) {
    throw std::invalid_argument("kd_loss: dimension-mismatch between student and teacher");
  }
  check_logits(student_logits, labels);
  if (!(cfg.tau > 0.0)) throw std::invalid_argument("kd_loss: non-positive-temperature");

  double label_term = 0.0;
  double distill_term = 0.0;
  for (Eigen::Index i = 0; i < student_logits.rows(); ++i) {
    const Eigen::VectorXd zs = student_logits.row(i).transpose();
    const Eigen::VectorXd zt = teacher_logits.row(i).transpose();
    label_term += one_hot_cross_entropy(labels[static_cast<std::size_t>(i)],
                                        softmax_temp(zs, 1.0));
    distill_term += cross_entropy(softmax_temp(zt, cfg.tau), softmax_temp(zs, cfg.tau));
  }
  double loss = (1.0 - cfg.lambda) * label_term +
                cfg.lambda * cfg.tau * cfg.tau * distill_term;
  if (cfg.mean_reduction && student_logits.rows() > 0) {
    loss /= static_cast<double>(student_logits.rows());
  }
  return loss;
}

double mmd2_subset(const Eigen::MatrixXd& ft, const Eigen::MatrixXd& fs,
                   const std::vector<int>& subset_t, const std::vector<int>& subset_s,
                   const MmdKernelSpec& kernel) {
  if (ft.cols() != fs.cols()) {
    throw std::invalid_argument("mmd2: positions-mismatch between maps");
  }
  if (subset_t.empty() || subset_s.empty()) {
    throw std::invalid_argument("mmd2_subset: empty-subset");
  }
  for (int i : subset_t) {
    if (i < 0 || i >= ft.rows()) throw std::out_of_range("mmd2_subset: teacher index-out-of-range");
  }
  for (int j : subset_s) {
    if (j < 0 || j >= fs.rows()) throw std::out_of_range("mmd2_subset: student index-out-of-range");
  }

  std::vector<Eigen::VectorXd> t_rows, s_rows;
  t_rows.reserve(subset_t.size());
  for (int i : subset_t) t_rows.push_back(normalized_row(ft, i));
  s_rows.reserve(subset_s.size());
  for (int j : subset_s) s_rows.push_back(normalized_row(fs, j));

  const double ct = static_cast<double>(t_rows.size());
  const double cs = static_cast<double>(s_rows.size());

  double tt = 0.0;
  for (const auto& a : t_rows) {
    for (const auto& b : t_rows) tt += poly_kernel(a, b, kernel);
  }
  double ss = 0.0;
  for (const auto& a : s_rows) {
    for (const auto& b : s_rows) ss += poly_kernel(a, b, kernel);
  }
  double ts = 0.0;
  for (const auto& a : t_rows) {
    for (const auto& b : s_rows) ts += poly_kernel(a, b, kernel);
  }
  return tt / (ct * ct) + ss / (cs * cs) - 2.0 * ts / (ct * cs);
}

double mmd2(const Eigen::MatrixXd& ft, const Eigen::MatrixXd& fs,
            const MmdKernelSpec& kernel) {
  if (ft.rows() < 1 || fs.rows() < 1) {
    throw std::invalid_argument("mmd2: feature maps need at least one channel");
  }
  std::vector<int> full_t(static_cast<std::size_t>(ft.rows()));
  std::vector<int> full_s(static_cast<std::size_t>(fs.rows()));
  for (int i = 0; i < ft.rows(); ++i) full_t[static_cast<std::size_t>(i)] = i;
  for (int j = 0; j < fs.rows(); ++j) full_s[static_cast<std::size_t>(j)] = j;
  return mmd2_subset(ft, fs, full_t, full_s, kernel);
}

double nst_loss(const Eigen::MatrixXd& student_logits, const std::vector<int>& labels,
                const std::vector<Eigen::MatrixXd>& ft_list,
                const std::vector<Eigen::MatrixXd>& fs_list, const KdConfig& cfg,
                const MmdKernelSpec& kernel) {
  check_logits(student_logits, labels);
  if (ft_list.size() != fs_list.size()) {
    throw std::invalid_argument("nst_loss: list-length-mismatch");
  }
  if (cfg.nst_beta < 0.0) throw std::invalid_argument("nst_loss: nst_beta must be >= 0");

  double label_term = 0.0;
  for (Eigen::Index i = 0; i < student_logits.rows(); ++i) {
    label_term += one_hot_cross_entropy(
        labels[static_cast<std::size_t>(i)],
        softmax_temp(student_logits.row(i).transpose(), 1.0));
  }
  double mmd_term = 0.0;
  for (std::size_t k = 0; k < ft_list.size(); ++k) {
    mmd_term += mmd2(ft_list[k], fs_list[k], kernel);
  }
  double loss = label_term + cfg.nst_beta * mmd_term;
  if (cfg.mean_reduction && student_logits.rows() > 0) {
    loss /= static_cast<double>(student_logits.rows());
  }
  return loss;
}

}  // namespace mfkd
