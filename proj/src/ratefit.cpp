#include "vvsgd/ratefit.hpp"

#include <cmath>
#include <stdexcept>

namespace vvsgd {

RateFit fit_rate(const std::vector<double>& horizons, const std::vector<double>& errors) {
  const std::size_t n = horizons.size();
  if (n != errors.size()) throw std::invalid_argument("fit_rate: length mismatch");
  if (n < 3) throw std::invalid_argument("fit_rate: needs at least 3 horizons");
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(horizons[i] > 0)) throw std::domain_error("fit_rate: horizons must be positive");
    if (!(errors[i] > 0)) throw std::domain_error("fit_rate: errors must be positive");
    xs[i] = std::log(horizons[i]);
    ys[i] = std::log(errors[i]);
  }
  double x_mean = 0, y_mean = 0;
  for (std::size_t i = 0; i < n; ++i) {
    x_mean += xs[i];
    y_mean += ys[i];
  }
  x_mean /= static_cast<double>(n);
  y_mean /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - x_mean) * (xs[i] - x_mean);
    sxy += (xs[i] - x_mean) * (ys[i] - y_mean);
  }
  if (sxx == 0) throw std::domain_error("fit_rate: horizons are all equal");
  const double slope = sxy / sxx;
  const double intercept = y_mean - slope * x_mean;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double resid = ys[i] - intercept - slope * xs[i];
    rss += resid * resid;
  }
  const double sigma_sq = rss / static_cast<double>(n - 2);
  return {slope, std::sqrt(sigma_sq / sxx)};
}

}  // namespace vvsgd
