#include "rsor/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/binomial.hpp>

namespace rsor {

double binomial_two_sided_p(std::size_t wins, std::size_t trials, double p0) {
  if (trials == 0) return 1.0;
  const boost::math::binomial_distribution<double> d(static_cast<double>(trials), p0);
  const double observed = boost::math::pdf(d, static_cast<double>(wins));
  const double tol = observed * (1 + 1e-7);
  double p = 0;
  for (std::size_t k = 0; k <= trials; ++k) {
    const double q = boost::math::pdf(d, static_cast<double>(k));
    if (q <= tol) p += q;
  }
  return std::min(1.0, p);
}

BinomialSummary binomial_summary(std::size_t wins, std::size_t trials, double p0,
                                 double confidence) {
  using boost::math::binomial_distribution;
  BinomialSummary s;
  s.wins = wins;
  s.trials = trials;
  if (trials == 0) return s;
  const double n = static_cast<double>(trials);
  const double k = static_cast<double>(wins);
  const double a = (1 - confidence) / 2;
  s.rate = k / n;
  s.ci_low = binomial_distribution<double>::find_lower_bound_on_p(n, k, a);
  s.ci_high = binomial_distribution<double>::find_upper_bound_on_p(n, k, a);
  s.p_value = binomial_two_sided_p(wins, trials, p0);
  return s;
}

bool consistent_with_rate(std::size_t wins, std::size_t trials, double p0, double alpha) {
  return binomial_two_sided_p(wins, trials, p0) >= alpha;
}

}  // namespace rsor
