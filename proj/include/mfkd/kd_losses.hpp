#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mfkd {

/// Polynomial kernel k(x,y) = (x.y + c)^b.
struct MmdKernelSpec {
  double c = 0.0;
  int b = 2;
};

struct KdConfig {
  double tau = 1.0;        // softmax temperature
  double lambda = 0.5;     // weight between label loss and distillation loss
  double nst_beta = 12.5;  // weight of the MMD^2 term
  bool mean_reduction = false;  // divide batch sums by the batch size
};

/// Temperature softmax with max-subtraction for stability.
Eigen::VectorXd softmax_temp(const Eigen::VectorXd& z, double tau);

/// -sum_i p_i log q_i.
double cross_entropy(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

/// (1-lambda) * sum_i H(y_i, softmax(zS_i))
///   + lambda * tau^2 * sum_i H(softmax(zT_i/tau), softmax(zS_i/tau)).
double kd_loss(const Eigen::MatrixXd& student_logits,
               const Eigen::MatrixXd& teacher_logits,
               const std::vector<int>& labels, const KdConfig& cfg);

/// Squared MMD between row-normalized feature maps (rows are channels,
/// columns flattened spatial positions).
double mmd2(const Eigen::MatrixXd& ft, const Eigen::MatrixXd& fs,
            const MmdKernelSpec& kernel);

/// Squared MMD restricted to channel subsets of each map.
double mmd2_subset(const Eigen::MatrixXd& ft, const Eigen::MatrixXd& fs,
                   const std::vector<int>& subset_t, const std::vector<int>& subset_s,
                   const MmdKernelSpec& kernel);

/// sum_i H(y_i, softmax(zS_i)) + nst_beta * sum over paired maps of mmd2.
double nst_loss(const Eigen::MatrixXd& student_logits, const std::vector<int>& labels,
                const std::vector<Eigen::MatrixXd>& ft_list,
                const std::vector<Eigen::MatrixXd>& fs_list, const KdConfig& cfg,
                const MmdKernelSpec& kernel);

}  // namespace mfkd
