#pragma once

#include <vector>

namespace vvsgd {

struct RateFit {
  double slope;
  double std_error;
};

// Ordinary least squares of log(error) on log(horizon).
RateFit fit_rate(const std::vector<double>& horizons, const std::vector<double>& errors);

}  // namespace vvsgd
