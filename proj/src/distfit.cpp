#include "epiident/distfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "epiident/parallel.hpp"
#include "epiident/stats.hpp"

namespace epiident {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kPi = 3.1415926535897932384626433832795;

double mle_variance(std::span<const double> xs, double mu) {
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return s / static_cast<double>(xs.size());
}

void require_fittable(std::span<const double> samples, bool positive_support) {
  if (samples.size() < 20) throw SampleTooSmallError("fit_family needs at least 20 samples");
  bool all_equal = true;
  for (double x : samples) {
    if (positive_support && !(x > 0.0))
      throw std::invalid_argument("positive-support family fitted to non-positive sample");
    if (x != samples[0]) all_equal = false;
  }
  if (all_equal) throw DegenerateSampleError("all samples identical");
}

FitResult make_result(Family family, std::vector<double> params, double loglik, int k) {
  FitResult r;
  r.family = family;
  r.params = std::move(params);
  r.loglik = loglik;
  r.k = k;
  r.aic = 2.0 * k - 2.0 * loglik;
  return r;
}

FitResult fit_normal(std::span<const double> xs) {
  require_fittable(xs, false);
  const double n = static_cast<double>(xs.size());
  const double mu = mean_of(xs);
  const double var = mle_variance(xs, mu);
  const double loglik = -0.5 * n * (kLog2Pi + std::log(var)) - 0.5 * n;
  return make_result(Family::normal, {mu, std::sqrt(var)}, loglik, 2);
}

FitResult fit_lognormal(std::span<const double> xs) {
  require_fittable(xs, true);
  const double n = static_cast<double>(xs.size());
  std::vector<double> logs(xs.begin(), xs.end());
  double sum_log = 0.0;
  for (auto& v : logs) {
    v = std::log(v);
    sum_log += v;
  }
  const double mu = mean_of(logs);
  const double var = mle_variance(logs, mu);
  if (var <= 0.0) throw DegenerateSampleError("zero variance on the log scale");
  const double loglik = -0.5 * n * (kLog2Pi + std::log(var)) - 0.5 * n - sum_log;
  return make_result(Family::lognormal, {mu, std::sqrt(var)}, loglik, 2);
}

FitResult fit_gamma(std::span<const double> xs) {
  require_fittable(xs, true);
  const double n = static_cast<double>(xs.size());
  const double m = mean_of(xs);
  double mean_log = 0.0;
  for (double x : xs) mean_log += std::log(x);
  mean_log /= n;
  const double s = std::log(m) - mean_log;  // > 0 by AM-GM unless degenerate
  if (!(s > 0.0)) throw DegenerateSampleError("gamma shape equation degenerate");

  // Newton iteration on log(k) - digamma(k) = s, from the Minka starting point.
  double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
  for (int it = 0; it < 100; ++it) {
    const double f = std::log(k) - digamma(k) - s;
    const double fp = 1.0 / k - trigamma(k);
    double step = f / fp;
    double next = k - step;
    while (next <= 0.0) {
      step *= 0.5;
      next = k - step;
    }
    const bool done = std::abs(next - k) < 1e-12 * (1.0 + k);
    k = next;
    if (done) break;
  }
  const double theta = m / k;
  const double loglik =
      (k - 1.0) * mean_log * n - n * m / theta - n * k * std::log(theta) - n * std::lgamma(k);
  return make_result(Family::gamma, {k, theta}, loglik, 2);
}

FitResult fit_weibull(std::span<const double> xs) {
  require_fittable(xs, true);
  const double n = static_cast<double>(xs.size());
  const double xmax = *std::max_element(xs.begin(), xs.end());
  std::vector<double> logs;
  logs.reserve(xs.size());
  for (double x : xs) logs.push_back(std::log(x));
  const double mean_log = mean_of(logs);
  const double sd_log = stddev_of(logs, 1);
  if (!(sd_log > 0.0)) throw DegenerateSampleError("weibull profile degenerate");

  // Profile equation g(k) = sum(x^k ln x)/sum(x^k) - 1/k - mean(ln x) = 0 is
  // strictly increasing in k; Newton from the extreme-value moment start.
  // Powers are computed on x/xmax to avoid overflow at large k.
  auto profile = [&](double k, double& g, double& gp) {
    double sw = 0.0, swl = 0.0, swll = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double w = std::exp(k * (logs[i] - std::log(xmax)));
      sw += w;
      swl += w * logs[i];
      swll += w * logs[i] * logs[i];
    }
    const double ratio = swl / sw;
    g = ratio - 1.0 / k - mean_log;
    gp = (swll / sw - ratio * ratio) + 1.0 / (k * k);
  };
  double k = 1.2825498301618640955/* pi/sqrt(6) */ / sd_log;
  if (!(k > 0.0) || !std::isfinite(k)) k = 1.0;
  for (int it = 0; it < 200; ++it) {
    double g, gp;
    profile(k, g, gp);
    double step = g / gp;
    double next = k - step;
    while (next <= 0.0) {
      step *= 0.5;
      next = k - step;
    }
    const bool done = std::abs(next - k) < 1e-12 * (1.0 + k);
    k = next;
    if (done) break;
    if (it == 199) throw FitFailure("weibull shape iteration did not converge");
  }
  double sw = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) sw += std::exp(k * (logs[i] - std::log(xmax)));
  const double lambda = xmax * std::pow(sw / n, 1.0 / k);
  double loglik = n * std::log(k) - n * k * std::log(lambda) + (k - 1.0) * mean_log * n;
  for (double x : xs) loglik -= std::pow(x / lambda, k);
  return make_result(Family::weibull, {k, lambda}, loglik, 2);
}

// --- skew-normal -----------------------------------------------------------

double skewnormal_nll(std::span<const double> xs, const double* theta, double* grad) {
  const double xi = theta[0];
  const double omega = std::exp(theta[1]);
  const double alpha = theta[2];
  double nll = 0.0;
  double g0 = 0.0, g1 = 0.0, g2 = 0.0;
  for (double x : xs) {
    const double z = (x - xi) / omega;
    const double az = alpha * z;
    const double logcdf = normal_logcdf(az);
    nll -= 0.6931471805599453094 - 0.5 * kLog2Pi - theta[1] - 0.5 * z * z + logcdf;
    if (grad != nullptr) {
      const double zeta = normal_hazard(az);
      g0 -= (z - alpha * zeta) / omega;
      g1 -= -1.0 + z * z - alpha * z * zeta;
      g2 -= zeta * z;
    }
  }
  if (grad != nullptr) {
    grad[0] = g0;
    grad[1] = g1;
    grad[2] = g2;
  }
  return nll;
}

// Small dense BFGS with Armijo backtracking; deterministic.
bool bfgs3(std::span<const double> xs, double* theta, double& fval) {
  constexpr int d = 3;
  double h[d][d] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  double g[d], gn[d], p[d], s[d], y[d];
  fval = skewnormal_nll(xs, theta, g);
  if (!std::isfinite(fval)) return false;
  for (int it = 0; it < 200; ++it) {
    for (int i = 0; i < d; ++i) {
      p[i] = 0.0;
      for (int j = 0; j < d; ++j) p[i] -= h[i][j] * g[j];
    }
    double slope = 0.0;
    for (int i = 0; i < d; ++i) slope += p[i] * g[i];
    if (slope >= 0.0) {  // reset to steepest descent
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) h[i][j] = (i == j) ? 1.0 : 0.0;
      for (int i = 0; i < d; ++i) p[i] = -g[i];
      slope = 0.0;
      for (int i = 0; i < d; ++i) slope += p[i] * g[i];
    }
    double t = 1.0;
    double trial[d];
    double fnew = fval;
    bool moved = false;
    for (int ls = 0; ls < 50; ++ls) {
      for (int i = 0; i < d; ++i) trial[i] = theta[i] + t * p[i];
      fnew = skewnormal_nll(xs, trial, nullptr);
      if (std::isfinite(fnew) && fnew <= fval + 1e-4 * t * slope) {
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) return true;  // no further progress
    skewnormal_nll(xs, trial, gn);
    double step_norm = 0.0, grad_norm = 0.0;
    for (int i = 0; i < d; ++i) {
      s[i] = trial[i] - theta[i];
      y[i] = gn[i] - g[i];
      theta[i] = trial[i];
      g[i] = gn[i];
      step_norm = std::max(step_norm, std::abs(s[i]));
      grad_norm = std::max(grad_norm, std::abs(gn[i]));
    }
    fval = fnew;
    if (grad_norm < 1e-8 * (1.0 + std::abs(fval)) || step_norm < 1e-12) return true;
    double sy = 0.0;
    for (int i = 0; i < d; ++i) sy += s[i] * y[i];
    if (sy > 1e-12) {
      double hy[d];
      for (int i = 0; i < d; ++i) {
        hy[i] = 0.0;
        for (int j = 0; j < d; ++j) hy[i] += h[i][j] * y[j];
      }
      double yhy = 0.0;
      for (int i = 0; i < d; ++i) yhy += y[i] * hy[i];
      const double c1 = (sy + yhy) / (sy * sy);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          h[i][j] += c1 * s[i] * s[j] - (hy[i] * s[j] + s[i] * hy[j]) / sy;
    }
  }
  return true;
}

FitResult fit_skewnormal(std::span<const double> xs) {
  require_fittable(xs, false);
  const double m = mean_of(xs);
  const double sd = std::sqrt(mle_variance(xs, m));
  constexpr double kShapeStarts[5] = {-8.0, -2.0, 0.0, 2.0, 8.0};

  double best_theta[3] = {m, std::log(sd), 0.0};
  double best_f = std::numeric_limits<double>::infinity();
  bool any = false;
  for (double a0 : kShapeStarts) {
    // Moment-consistent location/scale for the candidate shape.
    const double delta = a0 / std::sqrt(1.0 + a0 * a0);
    const double omega0 = sd / std::sqrt(std::max(1.0 - 2.0 * delta * delta / kPi, 0.1));
    const double xi0 = m - omega0 * delta * std::sqrt(2.0 / kPi);
    double theta[3] = {xi0, std::log(omega0), a0};
    double f;
    if (!bfgs3(xs, theta, f)) continue;
    if (std::isfinite(f) && f < best_f) {
      best_f = f;
      std::copy(theta, theta + 3, best_theta);
      any = true;
    }
  }
  if (!any) throw FitFailure("skew-normal optimization failed from all starts");

  const double shape = best_theta[2];
  if (std::abs(shape) > 50.0) {
    // Known divergence direction of the skew-normal MLE: report the
    // normal-equivalent fit, flagged.
    FitResult normal_eq = fit_normal(xs);
    FitResult r = make_result(Family::skewnormal, {normal_eq.params[0], normal_eq.params[1], 0.0},
                              normal_eq.loglik, 3);
    r.boundary_flag = true;
    return r;
  }
  return make_result(Family::skewnormal, {best_theta[0], std::exp(best_theta[1]), shape}, -best_f,
                     3);
}

}  // namespace

const char* to_string(Family f) {
  switch (f) {
    case Family::gamma: return "gamma";
    case Family::lognormal: return "lognormal";
    case Family::normal: return "normal";
    case Family::skewnormal: return "skewnormal";
    default: return "weibull";
  }
}

ShiftedSample shift_residuals(std::span<const double> residuals) {
  ShiftedSample out;
  out.values.reserve(residuals.size());
  for (double r : residuals) {
    if (r < -1.0) throw std::invalid_argument("residual below -1 violates the scaling invariant");
    double v = r + 1.0;
    if (v == 0.0) {
      v = 1e-9;
      ++out.nudge_count;
    }
    out.values.push_back(v);
  }
  return out;
}

FitResult fit_family(Family family, std::span<const double> samples) {
  switch (family) {
    case Family::normal: return fit_normal(samples);
    case Family::lognormal: return fit_lognormal(samples);
    case Family::gamma: return fit_gamma(samples);
    case Family::weibull: return fit_weibull(samples);
    default: return fit_skewnormal(samples);
  }
}

AicRanking aic_rank(std::span<const double> samples) {
  AicRanking out;
  for (Family f : kAllFamilies) {
    try {
      out.ranked.push_back(fit_family(f, samples));
    } catch (const std::exception& e) {
      out.failures.push_back(std::string(to_string(f)) + ": " + e.what());
    }
  }
  if (out.ranked.empty()) throw FitFailure("all families failed to fit");
  std::sort(out.ranked.begin(), out.ranked.end(), [](const FitResult& a, const FitResult& b) {
    if (std::abs(a.aic - b.aic) >= 1e-9) return a.aic < b.aic;
    if (a.k != b.k) return a.k < b.k;
    return std::string(to_string(a.family)) < std::string(to_string(b.family));
  });
  return out;
}

AdResult anderson_darling_lognormal(std::span<const double> shifted_residuals) {
  const auto n = static_cast<int>(shifted_residuals.size());
  if (n < 8) throw SampleTooSmallError("Anderson-Darling needs n >= 8");
  std::vector<double> z;
  z.reserve(shifted_residuals.size());
  for (double v : shifted_residuals) {
    if (!(v > 0.0)) throw std::invalid_argument("shifted residuals must be positive");
    z.push_back(std::log(v));
  }
  const double mu = mean_of(z);
  const double sd = stddev_of(z, 1);
  if (!(sd > 0.0)) throw DegenerateSampleError("zero variance on the log scale");
  for (auto& v : z) v = (v - mu) / sd;
  std::sort(z.begin(), z.end());

  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = 2.0 * (i + 1) - 1.0;
    acc += w * (normal_logcdf(z[i]) + normal_logcdf(-z[n - 1 - i]));
  }
  AdResult out;
  out.n = n;
  out.a2 = -static_cast<double>(n) - acc / static_cast<double>(n);
  out.a2_star = out.a2 * (1.0 + 0.75 / n + 2.25 / (static_cast<double>(n) * n));
  for (const auto& [level, crit] : kAdCriticalValues) out.rejections[level] = out.a2_star > crit;
  return out;
}

std::map<double, double> ad_calibrate(int sample_size, int replicates, RngSeed seed, int threads) {
  std::vector<double> stats(replicates);
  parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t r) {
    RandomStream rng({seed.master, derive_stream({seed.stream, 0xadcaULL, r})});
    std::vector<double> sample(sample_size);
    for (auto& v : sample) v = std::exp(rng.normal());
    stats[r] = anderson_darling_lognormal(sample).a2_star;
  });
  std::map<double, double> rates;
  for (const auto& [level, crit] : kAdCriticalValues) {
    int rejected = 0;
    for (double s : stats)
      if (s > crit) ++rejected;
    rates[level] = static_cast<double>(rejected) / static_cast<double>(replicates);
  }
  return rates;
}

std::vector<StratumFit> fit_bank_strata(const Scenario& scenario, const ResidualBank& bank,
                                        int min_samples, int threads) {
  struct Task {
    int bin;
    Phase phase;
  };
  std::vector<Task> tasks;
  for (int b = 0; b < bank.bins(); ++b)
    for (Phase p : {Phase::pre, Phase::post})
      if (static_cast<int>(bank.stratum(b, p).size()) >= min_samples) tasks.push_back({b, p});

  std::vector<StratumFit> fits(tasks.size());
  const double r0 = basic_reproduction_number(scenario.params);
  parallel_for(tasks.size(), threads, [&](std::size_t t) {
    const auto& stratum = bank.stratum(tasks[t].bin, tasks[t].phase);
    const ShiftedSample shifted = shift_residuals(stratum);
    AicRanking ranking = aic_rank(shifted.values);
    StratumFit f;
    f.scenario = scenario.label;
    f.r0 = r0;
    f.bin = tasks[t].bin;
    f.phase = tasks[t].phase;
    f.winner = ranking.winner().family;
    f.n = static_cast<int>(stratum.size());
    f.ranked = std::move(ranking.ranked);
    fits[t] = std::move(f);
  });
  return fits;
}

std::vector<WinTableRow> aic_win_table(std::span<const StratumFit> fits, Stratification how) {
  auto cell_of = [&](const StratumFit& f) -> std::string {
    switch (how) {
      case Stratification::overall: return "overall";
      case Stratification::by_phase: return to_string(f.phase);
      default:
        if (f.r0 < 4.0) return "low";
        if (f.r0 < 8.0) return "mid";
        return "high";
    }
  };
  std::map<std::string, std::map<Family, int>> counts;
  std::map<std::string, int> totals;
  for (const auto& f : fits) {
    counts[cell_of(f)][f.winner] += 1;
    totals[cell_of(f)] += 1;
  }
  std::vector<WinTableRow> rows;
  for (const auto& [cell, wins] : counts) {
    WinTableRow row;
    row.stratum = cell;
    row.fits = totals[cell];
    for (Family f : kAllFamilies) {
      const auto it = wins.find(f);
      row.share[f] =
          it == wins.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(row.fits);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace epiident
