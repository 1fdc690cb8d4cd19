#pragma once

#include <utility>
#include <vector>

#include "epiident/rng.hpp"

namespace epiident {

/// Product-Gaussian kernel density estimate in two dimensions, built on
/// standardized coordinates with Scott's rule bandwidth per dimension.
/// A bandwidth floor of 1e-6 guards degenerate (zero-variance) samples.
class Kde2 {
 public:
  Kde2(std::vector<double> xs, std::vector<double> ys);

  /// Unnormalized density is fine for HDR thresholds; this one carries the
  /// full normalization so values are comparable across evaluations.
  double density(double x, double y) const;

  /// Smoothed bootstrap draw: pick a stored sample uniformly, add kernel
  /// noise, de-standardize.
  std::pair<double, double> sample(RandomStream& rng) const;

  std::size_t size() const { return zx_.size(); }
  double bandwidth_x() const { return hx_; }
  double bandwidth_y() const { return hy_; }
  double mean_x() const { return mx_; }
  double mean_y() const { return my_; }
  double sd_x() const { return sx_; }
  double sd_y() const { return sy_; }
  bool degenerate() const { return degenerate_; }

 private:
  std::vector<double> zx_, zy_;  // standardized sample
  double mx_, my_, sx_, sy_;
  double hx_, hy_;
  bool degenerate_ = false;
};

}  // namespace epiident
