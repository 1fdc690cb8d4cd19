#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace epiident {

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Nelder-Mead with the standard coefficients (reflection 1, expansion 2,
/// contraction 0.5, shrink 0.5). Converges when the simplex's objective
/// spread drops below f_tolerance or the iteration cap is reached.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x0,
                                    const std::vector<double>& initial_steps, int max_iterations,
                                    double f_tolerance) {
  const std::size_t d = x0.size();
  std::vector<std::vector<double>> simplex(d + 1, x0);
  for (std::size_t i = 0; i < d; ++i) simplex[i + 1][i] += initial_steps[i];
  std::vector<double> fv(d + 1);
  for (std::size_t i = 0; i <= d; ++i) fv[i] = f(simplex[i]);

  auto order = [&] {
    std::vector<std::size_t> idx(d + 1);
    for (std::size_t i = 0; i <= d; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> s2(d + 1);
    std::vector<double> f2(d + 1);
    for (std::size_t i = 0; i <= d; ++i) {
      s2[i] = simplex[idx[i]];
      f2[i] = fv[idx[i]];
    }
    simplex.swap(s2);
    fv.swap(f2);
  };

  NelderMeadResult result;
  int it = 0;
  for (; it < max_iterations; ++it) {
    order();
    if (std::isfinite(fv[0]) && fv[d] - fv[0] < f_tolerance) {
      result.converged = true;
      break;
    }
    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) centroid[j] += simplex[i][j];
    }
    for (auto& c : centroid) c /= static_cast<double>(d);

    auto point_at = [&](double coeff) {
      std::vector<double> p(d);
      for (std::size_t j = 0; j < d; ++j) p[j] = centroid[j] + coeff * (centroid[j] - simplex[d][j]);
      return p;
    };

    const auto reflected = point_at(1.0);
    const double fr = f(reflected);
    if (fr < fv[0]) {
      const auto expanded = point_at(2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[d] = expanded;
        fv[d] = fe;
      } else {
        simplex[d] = reflected;
        fv[d] = fr;
      }
    } else if (fr < fv[d - 1]) {
      simplex[d] = reflected;
      fv[d] = fr;
    } else {
      const bool outside = fr < fv[d];
      const auto contracted = point_at(outside ? 0.5 : -0.5);
      const double fc = f(contracted);
      if (fc < (outside ? fr : fv[d])) {
        simplex[d] = contracted;
        fv[d] = fc;
      } else {
        for (std::size_t i = 1; i <= d; ++i) {
          for (std::size_t j = 0; j < d; ++j)
            simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
          fv[i] = f(simplex[i]);
        }
      }
    }
  }
  order();
  result.x = simplex[0];
  result.f = fv[0];
  result.iterations = it;
  return result;
}

}  // namespace epiident
