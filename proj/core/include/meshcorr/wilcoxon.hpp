#pragma once

#include <vector>

namespace meshcorr::metrics {

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double p_value = 1.0;    // two-sided
  size_t n = 0;            // pairs remaining after dropping zero differences
  bool exact = false;
};

// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
// are dropped; at least 5 pairs must remain. Tied |differences| receive
// average ranks. n <= 25 uses the exact null distribution (a rank-sum count
// over doubled ranks, so average ranks stay integral); larger n uses the
// normal approximation with tie and continuity corrections.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

// Significance marker for result tables: the count of thresholds
// {0.05, 0.005, 0.0005, 0.00005} the p-value falls below (0..4).
int significance_level(double p_value);

}  // namespace meshcorr::metrics
