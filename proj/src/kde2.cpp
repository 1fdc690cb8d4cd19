#include "epiident/kde2.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epiident/stats.hpp"

namespace epiident {

namespace {
constexpr double kBandwidthFloor = 1e-6;
constexpr double kTwoPi = 6.283185307179586476925286766559;
}  // namespace

Kde2::Kde2(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("Kde2 needs two equal-length samples with n >= 2");
  const auto n = static_cast<double>(xs.size());
  mx_ = mean_of(xs);
  my_ = mean_of(ys);
  sx_ = stddev_of(xs, 1);
  sy_ = stddev_of(ys, 1);
  bool degenerate_x = false, degenerate_y = false;
  if (sx_ < kBandwidthFloor) {
    sx_ = 1.0;
    degenerate_x = true;
  }
  if (sy_ < kBandwidthFloor) {
    sy_ = 1.0;
    degenerate_y = true;
  }
  degenerate_ = degenerate_x || degenerate_y;
  zx_.resize(xs.size());
  zy_.resize(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    zx_[i] = (xs[i] - mx_) / sx_;
    zy_[i] = (ys[i] - my_) / sy_;
  }
  // Scott's rule on standardized data: h = n^(-1/(d+4)), d = 2.
  const double scott = std::pow(n, -1.0 / 6.0);
  hx_ = degenerate_x ? kBandwidthFloor : std::max(scott, kBandwidthFloor);
  hy_ = degenerate_y ? kBandwidthFloor : std::max(scott, kBandwidthFloor);
}

double Kde2::density(double x, double y) const {
  const double qx = (x - mx_) / sx_;
  const double qy = (y - my_) / sy_;
  double acc = 0.0;
  const double inv_hx = 1.0 / hx_, inv_hy = 1.0 / hy_;
  for (std::size_t i = 0; i < zx_.size(); ++i) {
    const double dx = (qx - zx_[i]) * inv_hx;
    const double dy = (qy - zy_[i]) * inv_hy;
    acc += std::exp(-0.5 * (dx * dx + dy * dy));
  }
  const double n = static_cast<double>(zx_.size());
  return acc / (n * kTwoPi * hx_ * hy_ * sx_ * sy_);
}

std::pair<double, double> Kde2::sample(RandomStream& rng) const {
  const auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(zx_.size()));
  const std::size_t i = idx < zx_.size() ? idx : zx_.size() - 1;
  const double zx = zx_[i] + hx_ * rng.normal();
  const double zy = zy_[i] + hy_ * rng.normal();
  return {mx_ + sx_ * zx, my_ + sy_ * zy};
}

}  // namespace epiident
