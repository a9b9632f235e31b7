#include "mfkd/search_space.hpp"

#include <sstream>
#include <stdexcept>

namespace mfkd {

std::uint64_t SpaceSpec::size() const {
  if (num_edges < 1 || num_ops < 1) {
    throw std::invalid_argument("SpaceSpec: num_edges and num_ops must be positive");
  }
  std::uint64_t total = 1;
  for (int e = 0; e < num_edges; ++e) {
    const std::uint64_t next = total * static_cast<std::uint64_t>(num_ops);
    if (next / static_cast<std::uint64_t>(num_ops) != total) {
      throw std::overflow_error("SpaceSpec: space size overflows 64 bits");
    }
    total = next;
  }
  return total;
}

std::string Architecture::str() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < edge_ops.size(); ++i) {
    if (i > 0) out << ',';
    out << edge_ops[i];
  }
  return out.str();
}

Architecture Architecture::parse(const std::string& text) {
  Architecture arch;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    std::size_t pos = 0;
    const int v = std::stoi(tok, &pos);
    if (pos != tok.size()) {
      throw std::invalid_argument("Architecture::parse: bad token '" + tok + "'");
    }
    arch.edge_ops.push_back(v);
  }
  if (arch.edge_ops.empty()) {
    throw std::invalid_argument("Architecture::parse: empty text");
  }
  return arch;
}

bool is_valid(const Architecture& arch, const SpaceSpec& spec) {
  if (arch.edge_ops.size() != static_cast<std::size_t>(spec.num_edges)) return false;
  for (int op : arch.edge_ops) {
    if (op < 0 || op >= spec.num_ops) return false;
  }
  return true;
}

Encoding encode(const Architecture& arch, const SpaceSpec& spec) {
  if (arch.edge_ops.size() != static_cast<std::size_t>(spec.num_edges)) {
    throw std::invalid_argument("encode: wrong number of edges");
  }
  Encoding enc = Encoding::Zero(static_cast<Eigen::Index>(spec.num_edges) * spec.num_ops);
  for (int e = 0; e < spec.num_edges; ++e) {
    const int op = arch.edge_ops[static_cast<std::size_t>(e)];
    if (op < 0 || op >= spec.num_ops) {
      throw std::out_of_range("encode: invalid-operation-index " + std::to_string(op));
    }
    enc[static_cast<Eigen::Index>(e) * spec.num_ops + op] = 1.0;
  }
  return enc;
}

Architecture decode(const Encoding& enc, const SpaceSpec& spec) {
  if (enc.size() != static_cast<Eigen::Index>(spec.num_edges) * spec.num_ops) {
    throw std::invalid_argument("decode: dimension mismatch");
  }
  Architecture arch;
  arch.edge_ops.resize(static_cast<std::size_t>(spec.num_edges));
  for (int e = 0; e < spec.num_edges; ++e) {
    int hit = -1;
    for (int k = 0; k < spec.num_ops; ++k) {
      if (enc[static_cast<Eigen::Index>(e) * spec.num_ops + k] > 0.5) {
        if (hit >= 0) throw std::invalid_argument("decode: block is not one-hot");
        hit = k;
      }
    }
    if (hit < 0) throw std::invalid_argument("decode: block is not one-hot");
    arch.edge_ops[static_cast<std::size_t>(e)] = hit;
  }
  return arch;
}

std::uint64_t arch_index(const Architecture& arch, const SpaceSpec& spec) {
  if (!is_valid(arch, spec)) {
    throw std::invalid_argument("arch_index: architecture invalid under spec");
  }
  std::uint64_t idx = 0;
  for (int e = 0; e < spec.num_edges; ++e) {
    idx = idx * static_cast<std::uint64_t>(spec.num_ops) +
          static_cast<std::uint64_t>(arch.edge_ops[static_cast<std::size_t>(e)]);
  }
  return idx;
}

Architecture arch_from_index(std::uint64_t index, const SpaceSpec& spec) {
  if (index >= spec.size()) {
    throw std::out_of_range("arch_from_index: index beyond space size");
  }
  Architecture arch;
  arch.edge_ops.resize(static_cast<std::size_t>(spec.num_edges));
  for (int e = spec.num_edges - 1; e >= 0; --e) {
    arch.edge_ops[static_cast<std::size_t>(e)] =
        static_cast<int>(index % static_cast<std::uint64_t>(spec.num_ops));
    index /= static_cast<std::uint64_t>(spec.num_ops);
  }
  return arch;
}

std::vector<Architecture> enumerate_all(const SpaceSpec& spec, std::uint64_t cap) {
  const std::uint64_t total = spec.size();
  if (total > cap) {
    throw std::length_error("enumerate_all: space-too-large (" + std::to_string(total) +
                            " > cap " + std::to_string(cap) + ")");
  }
  std::vector<Architecture> out;
  out.reserve(static_cast<std::size_t>(total));
  for (std::uint64_t i = 0; i < total; ++i) {
    out.push_back(arch_from_index(i, spec));
  }
  return out;
}

std::vector<Architecture> sample_uniform(const SpaceSpec& spec, std::size_t n, Rng& rng) {
  const std::uint64_t total = spec.size();
  if (n > total) {
    throw std::invalid_argument("sample_uniform: n exceeds space size");
  }
  std::vector<std::uint64_t> pool(static_cast<std::size_t>(total));
  for (std::uint64_t i = 0; i < total; ++i) pool[static_cast<std::size_t>(i)] = i;
  const auto picked = sample_from_pool(pool, n, rng);
  std::vector<Architecture> out;
  out.reserve(n);
  for (std::uint64_t idx : picked) out.push_back(arch_from_index(idx, spec));
  return out;
}

std::vector<std::uint64_t> sample_from_pool(const std::vector<std::uint64_t>& pool,
                                            std::size_t n, Rng& rng) {
  if (n > pool.size()) {
    throw std::invalid_argument("sample_from_pool: n exceeds pool size");
  }
  std::vector<std::uint64_t> work = pool;
  // Partial Fisher-Yates: the first n slots end up a uniform sample.
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, work.size() - 1);
    std::swap(work[i], work[pick(rng)]);
  }
  work.resize(n);
  return work;
}

}  // namespace mfkd
