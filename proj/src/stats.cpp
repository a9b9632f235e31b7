#include "mfkd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace mfkd {
namespace {

// Inversion count via merge sort; counts pairs i<j with v[i] > v[j].
std::uint64_t count_inversions(std::vector<double>& v, std::vector<double>& buf,
                               std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += mid - i;
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
            buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

std::uint64_t pairs_of(std::uint64_t t) { return t * (t - 1) / 2; }

}  // namespace

double kendall_tau(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("kendall_tau: length-mismatch");
  const std::size_t n = a.size();
  if (n < 2) throw std::invalid_argument("kendall_tau: need at least two observations");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    if (a[i] != a[j]) return a[i] < a[j];
    return b[i] < b[j];
  });

  // Tie counts: n1 over a-groups, n2 over b-values, n3 over joint pairs.
  std::uint64_t n1 = 0, n3 = 0;
  {
    std::size_t run_a = 1, run_ab = 1;
    for (std::size_t k = 1; k < n; ++k) {
      const bool same_a = a[order[k]] == a[order[k - 1]];
      const bool same_ab = same_a && b[order[k]] == b[order[k - 1]];
      if (same_a) {
        ++run_a;
      } else {
        n1 += pairs_of(run_a);
        run_a = 1;
      }
      if (same_ab) {
        ++run_ab;
      } else {
        n3 += pairs_of(run_ab);
        run_ab = 1;
      }
    }
    n1 += pairs_of(run_a);
    n3 += pairs_of(run_ab);
  }
  std::uint64_t n2 = 0;
  {
    std::vector<double> bs = b;
    std::sort(bs.begin(), bs.end());
    std::size_t run = 1;
    for (std::size_t k = 1; k < n; ++k) {
      if (bs[k] == bs[k - 1]) {
        ++run;
      } else {
        n2 += pairs_of(run);
        run = 1;
      }
    }
    n2 += pairs_of(run);
  }

  const std::uint64_t n0 = pairs_of(n);
  if (n1 == n0 || n2 == n0) {
    throw std::invalid_argument("kendall_tau: undefined, all ties in one vector");
  }

  // b in a-sorted order (ties in a broken by b, so within-group pairs add no
  // inversions); inversions are exactly the discordant pairs.
  std::vector<double> bseq(n), buf(n);
  for (std::size_t k = 0; k < n; ++k) bseq[k] = b[order[k]];
  const std::uint64_t discordant = count_inversions(bseq, buf, 0, n);

  const double num = static_cast<double>(n0) - static_cast<double>(n1) -
                     static_cast<double>(n2) + static_cast<double>(n3) -
                     2.0 * static_cast<double>(discordant);
  const double den = std::sqrt(static_cast<double>(n0 - n1)) *
                     std::sqrt(static_cast<double>(n0 - n2));
  return num / den;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean: empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) {
    throw std::invalid_argument("welch_t_test: need at least two observations per sample");
  }
  const double ma = mean(a), mb = mean(b);
  const double sa = sample_stddev(a), sb = sample_stddev(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double va = sa * sa / na, vb = sb * sb / nb;

  WelchResult r;
  if (va + vb == 0.0) {
    // Zero variance in both samples: identical means are a sure non-effect.
    r.t = 0.0;
    r.df = na + nb - 2.0;
    r.p_value = (ma == mb) ? 1.0 : 0.0;
    return r;
  }
  r.t = (ma - mb) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) /
         (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  const boost::math::students_t dist(r.df);
  r.p_value = 2.0 * boost::math::cdf(dist, -std::abs(r.t));
  return r;
}

}  // namespace mfkd
