#include "mfkd/matrix_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mfkd {

MatrixFixture load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_matrix: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_matrix: empty file " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("load_matrix: bad header, ") + e.what());
  }
  const auto rows = header.at("rows").get<Eigen::Index>();
  const auto cols = header.at("cols").get<Eigen::Index>();
  if (rows < 1 || cols < 1) throw std::runtime_error("load_matrix: bad dimensions");

  MatrixFixture fixture;
  fixture.role = header.value("role", std::string());
  fixture.values.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) {
      throw std::runtime_error("load_matrix: truncated at row " + std::to_string(r));
    }
    std::istringstream row(line);
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!(row >> fixture.values(r, c))) {
        throw std::runtime_error("load_matrix: bad value at row " + std::to_string(r));
      }
    }
  }
  return fixture;
}

void save_matrix(const MatrixFixture& fixture, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_matrix: cannot open " + path);
  nlohmann::json header;
  header["rows"] = fixture.values.rows();
  header["cols"] = fixture.values.cols();
  header["role"] = fixture.role;
  out << header.dump() << '\n';
  out.precision(17);
  for (Eigen::Index r = 0; r < fixture.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < fixture.values.cols(); ++c) {
      if (c > 0) out << ' ';
      out << fixture.values(r, c);
    }
    out << '\n';
  }
}

std::vector<int> load_labels(const std::string& path) {
  const MatrixFixture fixture = load_matrix(path);
  if (fixture.values.cols() != 1) {
    throw std::runtime_error("load_labels: expected a single column");
  }
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(fixture.values.rows()));
  for (Eigen::Index r = 0; r < fixture.values.rows(); ++r) {
    const double v = fixture.values(r, 0);
    if (v != std::floor(v)) throw std::runtime_error("load_labels: non-integer label");
    labels.push_back(static_cast<int>(v));
  }
  return labels;
}

}  // namespace mfkd
