#pragma once

#include <cstddef>

namespace rsor {

struct BinomialSummary {
  std::size_t wins = 0;
  std::size_t trials = 0;
  double rate = 0;
  /// Clopper-Pearson interval at the requested confidence.
  double ci_low = 0;
  double ci_high = 1;
  /// Exact two-sided test against p0.
  double p_value = 1;
};

BinomialSummary binomial_summary(std::size_t wins, std::size_t trials, double p0 = 0.5,
                                 double confidence = 0.99);

/// Exact two-sided binomial test (sum of outcomes no more likely than the
/// observed one).
double binomial_two_sided_p(std::size_t wins, std::size_t trials, double p0);

/// True if a rate of p0 is not rejected at level alpha.
bool consistent_with_rate(std::size_t wins, std::size_t trials, double p0, double alpha = 0.01);

}  // namespace rsor
