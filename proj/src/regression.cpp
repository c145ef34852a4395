#include "hfnet/regression.hpp"

#include <cmath>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace hfnet {

void RunningStats::add(double x) {
  ++count_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - mean_);
}

double RunningStats::variance() const {
  return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
}

double RunningStats::stderr_of_mean() const {
  return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
}

LinearFit ordinary_least_squares(std::span<const double> x, std::span<const double> y,
                                 std::span<const double> weights) {
  if (x.size() != y.size() || (!weights.empty() && weights.size() != x.size())) {
    throw std::invalid_argument("ordinary_least_squares: size mismatch");
  }
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("ordinary_least_squares: need at least 2 points");

  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w(i);
    sx += w(i) * x[i];
    sy += w(i) * y[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += w(i) * dx * dx;
    sxy += w(i) * dx * dy;
    syy += w(i) * dy * dy;
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("ordinary_least_squares: x values are constant");

  LinearFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    sse += w(i) * r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  if (n > 2) fit.slope_stderr = std::sqrt(std::max(sse, 0.0) / static_cast<double>(n - 2) / sxx);
  return fit;
}

SlopeReport loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("loglog_slope: size mismatch");
  std::vector<double> lx, ly;
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] > 0.0 && ys[i] > 0.0 && std::isfinite(xs[i]) && std::isfinite(ys[i])) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(ys[i]));
    } else {
      ++dropped;
    }
  }
  if (dropped > 0) spdlog::warn("loglog_slope: dropped {} non-positive point(s)", dropped);
  if (lx.size() < 3) throw std::invalid_argument("loglog_slope: fewer than 3 positive points");
  const LinearFit fit = ordinary_least_squares(lx, ly);
  return SlopeReport{fit.slope, fit.slope_stderr, fit.intercept, fit.r_squared, fit.points, dropped};
}

}  // namespace hfnet
