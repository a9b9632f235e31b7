#pragma once

#include <vector>

namespace mfkd {

/// Tie-corrected Kendall tau-b. Throws when either vector is all ties
/// (coefficient undefined) or lengths differ or n < 2.
double kendall_tau(const std::vector<double>& a, const std::vector<double>& b);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// Two-sided Welch's t-test on two samples.
WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

double mean(const std::vector<double>& v);
double sample_stddev(const std::vector<double>& v);

}  // namespace mfkd
