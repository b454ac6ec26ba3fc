#include "qrfsj/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qrfsj/errors.hpp"
#include "qrfsj/qrf.hpp"

namespace qrfsj {

namespace {

// Canonical-bandwidth ratio between the Epanechnikov and Gaussian kernels:
// (R(K)/mu2(K)^2)^(1/5) of one over the other = (30*sqrt(pi))^(1/5).
const double kKernelRatio = std::pow(30.0 * std::sqrt(std::numbers::pi), 0.2);

double sample_sd(std::span<const double> sample) {
  const auto n = static_cast<double>(sample.size());
  double sum = 0.0;
  for (double v : sample) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : sample) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0));
}

// Linear-interpolation sample quantile of sorted values.
double sorted_quantile(const std::vector<double>& sorted, double p) {
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Histogram of pairwise distances: cnt[d] counts index pairs whose values fall
// d bins apart, with bin width `binwidth`. Keeps the curvature functionals
// below O(bins) per evaluation instead of O(n^2).
struct PairCounts {
  std::vector<double> cnt;
  double binwidth = 0.0;
  std::size_t n = 0;
};

PairCounts bin_pairs(std::span<const double> sample, std::size_t bins) {
  PairCounts pc;
  pc.n = sample.size();
  pc.cnt.assign(bins + 1, 0.0);
  double lo = sample[0], hi = sample[0];
  for (double v : sample) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  pc.binwidth = (hi - lo) * 1.01 / static_cast<double>(bins);
  std::vector<std::size_t> bin(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    bin[i] = static_cast<std::size_t>((sample[i] - lo) / pc.binwidth);
  }
  for (std::size_t i = 1; i < sample.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const std::size_t d = bin[i] > bin[j] ? bin[i] - bin[j] : bin[j] - bin[i];
      pc.cnt[d] += 1.0;
    }
  }
  return pc;
}

constexpr double kArgCutoff = 1000.0;  // skip Gaussian-tail terms below exp(-500)

// Estimate of psi_4 = integral of f''''(x) f(x) dx (= R(f'')) with a Gaussian
// pilot kernel of bandwidth g; phi''''(t) = (t^4 - 6 t^2 + 3) phi(t).
double psi4_hat(const PairCounts& pc, double g) {
  double sum = 0.0;
  for (std::size_t d = 0; d < pc.cnt.size(); ++d) {
    const double t = static_cast<double>(d) * pc.binwidth / g;
    const double t2 = t * t;
    if (t2 >= kArgCutoff) break;
    sum += std::exp(-t2 / 2.0) * (t2 * t2 - 6.0 * t2 + 3.0) * pc.cnt[d];
  }
  const auto n = static_cast<double>(pc.n);
  sum = 2.0 * sum + n * 3.0;  // diagonal i == j terms
  return sum / (n * (n - 1.0) * std::pow(g, 5.0) * std::sqrt(2.0 * std::numbers::pi));
}

// Estimate of psi_6; phi^(6)(t) = (t^6 - 15 t^4 + 45 t^2 - 15) phi(t).
double psi6_hat(const PairCounts& pc, double g) {
  double sum = 0.0;
  for (std::size_t d = 0; d < pc.cnt.size(); ++d) {
    const double t = static_cast<double>(d) * pc.binwidth / g;
    const double t2 = t * t;
    if (t2 >= kArgCutoff) break;
    sum += std::exp(-t2 / 2.0) * (t2 * t2 * t2 - 15.0 * t2 * t2 + 45.0 * t2 - 15.0) * pc.cnt[d];
  }
  const auto n = static_cast<double>(pc.n);
  sum = 2.0 * sum + n * (-15.0);  // diagonal i == j terms
  return sum / (n * (n - 1.0) * std::pow(g, 7.0) * std::sqrt(2.0 * std::numbers::pi));
}

Bandwidth silverman_epanechnikov(double sd, std::size_t n) {
  return {2.345 * sd * std::pow(static_cast<double>(n), -0.2),
          BandwidthMethod::silverman_fallback};
}

}  // namespace

std::string to_string(BandwidthMethod m) {
  switch (m) {
    case BandwidthMethod::sheather_jones: return "sheather_jones";
    case BandwidthMethod::silverman_fallback: return "silverman_fallback";
    case BandwidthMethod::fixed: return "fixed";
  }
  return "unknown";
}

double epanechnikov(double u) {
  return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

Bandwidth sj_bandwidth(std::span<const double> sample) {
  AmiseFunctionals unused;
  return sj_bandwidth(sample, unused);
}

Bandwidth sj_bandwidth(std::span<const double> sample, AmiseFunctionals& out) {
  const std::size_t n = sample.size();
  if (n < 8) {
    throw_validation("InvalidArgument", "bandwidth selection needs at least 8 samples");
  }
  const double sd = sample_sd(sample);
  if (!(sd > 0.0)) {
    throw_numeric("DegenerateSample",
                  "all samples are (numerically) equal; no bandwidth exists");
  }
  const auto nd = static_cast<double>(n);
  auto finish = [&](Bandwidth bw) {
    out.r_kernel = 0.6;
    out.mu2_kernel = 0.2;
    out.r_f2_estimate = 15.0 / (nd * std::pow(bw.value, 5.0));
    return bw;
  };

  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
  double lambda = std::min(sd, iqr / 1.349);
  if (!(lambda > 0.0)) lambda = sd;

  const PairCounts pc = bin_pairs(sample, 1000);
  const double a = 1.24 * lambda * std::pow(nd, -1.0 / 7.0);
  const double b = 1.23 * lambda * std::pow(nd, -1.0 / 9.0);
  const double TD = -psi6_hat(pc, b);
  const double SD = psi4_hat(pc, a);
  if (!std::isfinite(TD) || !std::isfinite(SD) || TD <= 0.0 || SD <= 0.0) {
    return finish(silverman_epanechnikov(sd, n));
  }
  const double alpha2 = 1.357 * std::pow(SD / TD, 1.0 / 7.0);
  if (!std::isfinite(alpha2) || alpha2 <= 0.0) {
    return finish(silverman_epanechnikov(sd, n));
  }

  // Fixed point in the Epanechnikov scale: h should equal the AMISE minimizer
  // (15 / (n * psi4))^(1/5), with the pilot bandwidth tied back to h through
  // the canonical Gaussian scale h/ratio.
  auto discrepancy = [&](double h) {
    const double g = alpha2 * std::pow(h / kKernelRatio, 5.0 / 7.0);
    const double psi4 = psi4_hat(pc, g);
    if (!(psi4 > 0.0)) return std::numeric_limits<double>::infinity();
    return std::pow(15.0 / (nd * psi4), 0.2) - h;
  };

  double lo = sd / nd;
  double hi = 10.0 * sd * std::pow(nd, 0.2);
  double flo = discrepancy(lo);
  double fhi = discrepancy(hi);
  if (!std::isfinite(fhi) || flo == 0.0) {
    return finish(flo == 0.0 ? Bandwidth{lo, BandwidthMethod::sheather_jones}
                             : silverman_epanechnikov(sd, n));
  }
  if ((flo > 0.0) == (fhi > 0.0)) {
    return finish(silverman_epanechnikov(sd, n));
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-9 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = discrepancy(mid);
    if (fmid == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((fmid > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return finish({0.5 * (lo + hi), BandwidthMethod::sheather_jones});
}

DensityCurve kde_evaluate(std::span<const double> samples, Bandwidth bandwidth,
                          std::span<const double> grid) {
  if (samples.empty()) {
    throw_validation("InvalidArgument", "kde needs at least one sample");
  }
  if (!(bandwidth.value > 0.0)) {
    throw_validation("InvalidArgument", "kde bandwidth must be positive");
  }
  if (grid.empty()) {
    throw_validation("InvalidArgument", "kde needs at least one grid point");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i - 1] < grid[i])) {
      throw_validation("InvalidArgument", "kde grid must be strictly increasing");
    }
  }
  DensityCurve curve;
  curve.grid.assign(grid.begin(), grid.end());
  curve.density.reserve(grid.size());
  curve.bandwidth = bandwidth;
  curve.sample_count = samples.size();
  const double scale = 1.0 / (static_cast<double>(samples.size()) * bandwidth.value);
  for (double x : grid) {
    double sum = 0.0;
    for (double s : samples) {
      sum += epanechnikov((s - x) / bandwidth.value);
    }
    curve.density.push_back(sum * scale);
  }
  return curve;
}

DensityCurve density_forecast(const Forest& forest, std::span<const double> x,
                              std::span<const double> tau_grid, std::size_t grid_points) {
  if (tau_grid.size() < 8) {
    throw_validation("InvalidArgument", "density forecast needs at least 8 quantile levels");
  }
  if (grid_points < 32) {
    throw_validation("InvalidArgument", "density forecast needs at least 32 grid points");
  }
  const ConditionalCDF cdf = conditional_cdf(forest, x);
  std::vector<double> samples;
  samples.reserve(tau_grid.size());
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    if (tau_grid[i] <= 0.0 || tau_grid[i] >= 1.0 || (i > 0 && !(tau_grid[i - 1] < tau_grid[i]))) {
      throw_validation("InvalidArgument", "tau grid must be strictly increasing within (0,1)");
    }
    samples.push_back(quantile(cdf, tau_grid[i]));
  }

  Bandwidth bw = sj_bandwidth(samples);
  // The smoothed curve must stay strictly positive across the central 90% of
  // the forecast distribution. The kernel has compact support, so widen the
  // bandwidth just past half the largest pseudo-sample gap touching
  // [q_0.05, q_0.95], and past any tail deficit, when the plug-in choice is
  // narrower than that.
  {
    const double q05 = quantile(cdf, 0.05);
    const double q95 = quantile(cdf, 0.95);
    std::vector<double> sorted(samples);
    std::sort(sorted.begin(), sorted.end());
    double needed = std::max(sorted.front() - q05, q95 - sorted.back());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      if (sorted[i + 1] >= q05 && sorted[i] <= q95) {
        needed = std::max(needed, 0.5 * (sorted[i + 1] - sorted[i]));
      }
    }
    if (needed >= bw.value) bw.value = needed * (1.0 + 1e-9);
  }
  const auto [min_it, max_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *min_it - bw.value;
  const double hi = *max_it + bw.value;
  std::vector<double> grid(grid_points);
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  for (std::size_t k = 0; k < grid_points; ++k) {
    grid[k] = lo + step * static_cast<double>(k);
  }
  grid.back() = hi;
  return kde_evaluate(samples, bw, grid);
}

std::vector<double> default_tau_grid(std::size_t grid_size) {
  if (grid_size < 1) {
    throw_validation("InvalidArgument", "tau grid size must be at least 1");
  }
  std::vector<double> taus(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    taus[i] = static_cast<double>(i + 1) / static_cast<double>(grid_size + 1);
  }
  return taus;
}

}  // namespace qrfsj
