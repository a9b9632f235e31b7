#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mfkd {

using Rng = std::mt19937_64;

/// Cell search space: a fixed number of DAG edges, each carrying one
/// operation index. Only the edge->operation assignment is modeled.
struct SpaceSpec {
  int num_edges = 6;
  int num_ops = 5;

  /// num_ops^num_edges, with overflow check.
  [[nodiscard]] std::uint64_t size() const;
};

struct Architecture {
  std::vector<int> edge_ops;

  bool operator==(const Architecture&) const = default;

  /// Comma-separated operation indices, e.g. "4,3,2,1,0,4".
  [[nodiscard]] std::string str() const;
  static Architecture parse(const std::string& text);
};

/// Concatenated one-hot blocks, dimension num_edges * num_ops.
using Encoding = Eigen::VectorXd;

bool is_valid(const Architecture& arch, const SpaceSpec& spec);

Encoding encode(const Architecture& arch, const SpaceSpec& spec);
Architecture decode(const Encoding& enc, const SpaceSpec& spec);

/// Canonical lexicographic index of edge_ops; benchmark tables key on this.
std::uint64_t arch_index(const Architecture& arch, const SpaceSpec& spec);
Architecture arch_from_index(std::uint64_t index, const SpaceSpec& spec);

/// All architectures in lexicographic edge_ops order.
std::vector<Architecture> enumerate_all(const SpaceSpec& spec,
                                        std::uint64_t cap = (1ull << 20));

/// n distinct architectures, uniform without replacement within one call.
std::vector<Architecture> sample_uniform(const SpaceSpec& spec, std::size_t n,
                                         Rng& rng);

/// n distinct entries of pool, uniform without replacement. Pool order is
/// not preserved in the result.
std::vector<std::uint64_t> sample_from_pool(const std::vector<std::uint64_t>& pool,
                                            std::size_t n, Rng& rng);

}  // namespace mfkd
