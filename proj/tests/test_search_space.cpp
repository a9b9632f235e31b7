#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "mfkd/search_space.hpp"

using namespace mfkd;

TEST_CASE("encode places one-hot blocks by index formula") {
  const SpaceSpec spec{6, 5};

  SUBCASE("all-zero architecture") {
    const Encoding enc = encode(Architecture{{0, 0, 0, 0, 0, 0}}, spec);
    std::set<int> ones;
    for (int i = 0; i < enc.size(); ++i) {
      if (enc[i] == 1.0) ones.insert(i);
    }
    CHECK(ones == std::set<int>{0, 5, 10, 15, 20, 25});
  }

  SUBCASE("mixed architecture, ones at 5e+k") {
    const Encoding enc = encode(Architecture{{4, 3, 2, 1, 0, 4}}, spec);
    std::set<int> ones;
    for (int i = 0; i < enc.size(); ++i) {
      if (enc[i] == 1.0) ones.insert(i);
    }
    CHECK(ones == std::set<int>{4, 8, 12, 16, 20, 29});
  }

  SUBCASE("operation index out of range") {
    CHECK_THROWS_AS(encode(Architecture{{0, 0, 0, 0, 0, 7}}, spec), std::out_of_range);
  }
}

TEST_CASE("enumerate_all is lexicographic and complete") {
  SUBCASE("2x2") {
    const auto all = enumerate_all(SpaceSpec{2, 2});
    REQUIRE(all.size() == 4);
    CHECK(all[0].edge_ops == std::vector<int>{0, 0});
    CHECK(all[1].edge_ops == std::vector<int>{0, 1});
    CHECK(all[2].edge_ops == std::vector<int>{1, 0});
    CHECK(all[3].edge_ops == std::vector<int>{1, 1});
  }
  SUBCASE("6x5 has 15625 architectures") {
    CHECK(enumerate_all(SpaceSpec{6, 5}).size() == 15625);
  }
  SUBCASE("1x3") {
    const auto all = enumerate_all(SpaceSpec{1, 3});
    REQUIRE(all.size() == 3);
    CHECK(all[0].edge_ops == std::vector<int>{0});
    CHECK(all[2].edge_ops == std::vector<int>{2});
  }
  SUBCASE("cap is enforced") {
    CHECK_THROWS_AS(enumerate_all(SpaceSpec{6, 5}, 100), std::length_error);
  }
}

TEST_CASE("sample_uniform semantics") {
  SUBCASE("n=0 yields empty") {
    Rng rng(1);
    CHECK(sample_uniform(SpaceSpec{2, 2}, 0, rng).empty());
  }
  SUBCASE("n=size is a permutation of the space") {
    Rng rng(7);
    const auto sample = sample_uniform(SpaceSpec{2, 2}, 4, rng);
    std::set<std::uint64_t> seen;
    for (const auto& arch : sample) seen.insert(arch_index(arch, SpaceSpec{2, 2}));
    CHECK(seen == std::set<std::uint64_t>{0, 1, 2, 3});
  }
  SUBCASE("deterministic under a fixed seed") {
    Rng a(42), b(42);
    CHECK(sample_uniform(SpaceSpec{6, 5}, 100, a) == sample_uniform(SpaceSpec{6, 5}, 100, b));
  }
  SUBCASE("n beyond space size fails") {
    Rng rng(1);
    CHECK_THROWS_AS(sample_uniform(SpaceSpec{2, 2}, 5, rng), std::invalid_argument);
  }
}

TEST_CASE("round trip, injectivity, norm") {
  const SpaceSpec spec{3, 4};
  const auto all = enumerate_all(spec);
  std::set<std::vector<double>> encodings;
  for (const auto& arch : all) {
    const Encoding enc = encode(arch, spec);
    CHECK(decode(enc, spec) == arch);
    CHECK(enc.norm() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    encodings.insert({enc.data(), enc.data() + enc.size()});
  }
  CHECK(encodings.size() == all.size());  // injective
}

TEST_CASE("index round trip") {
  const SpaceSpec spec{4, 3};
  for (std::uint64_t i = 0; i < spec.size(); ++i) {
    CHECK(arch_index(arch_from_index(i, spec), spec) == i);
  }
}

TEST_CASE("text form round trip") {
  const Architecture arch{{4, 3, 2, 1, 0, 4}};
  CHECK(arch.str() == "4,3,2,1,0,4");
  CHECK(Architecture::parse("4,3,2,1,0,4") == arch);
}

TEST_CASE("sampling is uniform: chi-square on a 2x2 space") {
  // 10^4 single draws (with replacement across calls), 3 dof, alpha = 0.01.
  const SpaceSpec spec{2, 2};
  Rng rng(123);
  std::array<int, 4> counts{};
  for (int i = 0; i < 10000; ++i) {
    const auto sample = sample_uniform(spec, 1, rng);
    counts[arch_index(sample[0], spec)]++;
  }
  double chi2 = 0.0;
  for (int c : counts) {
    const double expected = 2500.0;
    chi2 += (c - expected) * (c - expected) / expected;
  }
  CHECK(chi2 < 11.345);  // chi-square(3) critical value at 0.01
}
