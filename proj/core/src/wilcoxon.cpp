#include "meshcorr/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "meshcorr/errors.hpp"

namespace meshcorr::metrics {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::ShapeMismatch, "wilcoxon: sample lengths differ");

  std::vector<double> diffs;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  const size_t n = diffs.size();
  if (n < 5)
    throw Error(ErrorCode::TooFewSamples,
                "wilcoxon: need >= 5 non-zero differences, have " + std::to_string(n));

  // Average ranks of |d|, doubled so ties keep them integral.
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t(0));
  std::sort(order.begin(), order.end(),
            [&](size_t x, size_t y) { return std::abs(diffs[x]) < std::abs(diffs[y]); });
  std::vector<int64_t> rank2(n, 0);
  std::vector<size_t> tie_sizes;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
    // ranks i+1 .. j averaged; doubled average = (i+1 + j)
    int64_t doubled = int64_t(i + 1 + j);
    for (size_t k = i; k < j; ++k) rank2[order[k]] = doubled;
    tie_sizes.push_back(j - i);
    i = j;
  }

  int64_t w_plus2 = 0, total2 = 0;
  for (size_t k = 0; k < n; ++k) {
    total2 += rank2[k];
    if (diffs[k] > 0) w_plus2 += rank2[k];
  }
  int64_t w_minus2 = total2 - w_plus2;
  int64_t w2 = std::min(w_plus2, w_minus2);

  WilcoxonResult result;
  result.n = n;
  result.statistic = double(w2) / 2.0;

  if (n <= 25) {
    // Exact distribution of the doubled positive rank sum over all 2^n sign
    // assignments, via the subset-sum count.
    std::vector<double> count(size_t(total2) + 1, 0.0);
    count[0] = 1.0;
    for (size_t k = 0; k < n; ++k)
      for (int64_t s = total2; s >= rank2[k]; --s) count[size_t(s)] += count[size_t(s - rank2[k])];
    const double denom = std::pow(2.0, double(n));
    double lower = 0.0, upper = 0.0;
    for (int64_t s = 0; s <= total2; ++s) {
      if (s <= w2) lower += count[size_t(s)];
      if (s >= total2 - w2) upper += count[size_t(s)];
    }
    result.exact = true;
    result.p_value = std::min(1.0, (lower + upper) / denom);
  } else {
    const double nn = double(n);
    double mean = nn * (nn + 1.0) / 4.0;
    double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
    for (size_t t : tie_sizes) {
      double tt = double(t);
      var -= (tt * tt * tt - tt) / 48.0;
    }
    double w = double(w2) / 2.0;
    double z = (w - mean + 0.5) / std::sqrt(var);  // continuity corrected
    result.p_value = std::min(1.0, 2.0 * normal_cdf(z));
  }
  return result;
}

int significance_level(double p_value) {
  int level = 0;
  for (double threshold : {0.05, 0.005, 0.0005, 0.00005})
    if (p_value < threshold) ++level;
  return level;
}

}  // namespace meshcorr::metrics
