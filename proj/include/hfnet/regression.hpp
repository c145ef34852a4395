#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hfnet {

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Welford accumulator.
class RunningStats {
 public:
  void add(double x);
  std::size_t count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased
  double stderr_of_mean() const;
  Estimate estimate() const { return {mean(), stderr_of_mean()}; }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

// Ordinary least squares y = intercept + slope * x. Optional weights.
// Throws std::invalid_argument with fewer than 2 points or constant x.
LinearFit ordinary_least_squares(std::span<const double> x, std::span<const double> y,
                                 std::span<const double> weights = {});

struct SlopeReport {
  double slope = 0.0;
  double stderr_ = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points_used = 0;
  std::size_t points_dropped = 0;
};

// OLS on (log x, log y). Non-positive points are dropped with a warning;
// fewer than 3 remaining is an error.
SlopeReport loglog_slope(std::span<const double> xs, std::span<const double> ys);

}  // namespace hfnet
