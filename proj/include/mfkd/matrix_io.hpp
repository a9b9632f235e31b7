#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mfkd {

/// Fixture file: one JSON header line {"rows":R,"cols":C,"role":"..."} then
/// R lines of C whitespace-separated decimals.
struct MatrixFixture {
  Eigen::MatrixXd values;
  std::string role;
};

MatrixFixture load_matrix(const std::string& path);
void save_matrix(const MatrixFixture& fixture, const std::string& path);

/// Single-column fixture read as class indices.
std::vector<int> load_labels(const std::string& path);

}  // namespace mfkd
