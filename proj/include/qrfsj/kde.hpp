#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qrfsj {

struct Forest;

enum class BandwidthMethod {
  sheather_jones,
  silverman_fallback,
  fixed,
};

std::string to_string(BandwidthMethod m);

struct Bandwidth {
  double value = 0.0;
  BandwidthMethod method = BandwidthMethod::fixed;
};

// Diagnostics for the asymptotic-MISE view of the bandwidth choice.
struct AmiseFunctionals {
  double r_kernel = 0.6;       // integral of K^2 for the Epanechnikov kernel
  double mu2_kernel = 0.2;     // second moment of the kernel
  double r_f2_estimate = 0.0;  // estimated integral of f''^2
};

struct DensityCurve {
  std::vector<double> grid;     // strictly increasing
  std::vector<double> density;  // non-negative, same length
  Bandwidth bandwidth;
  std::size_t sample_count = 0;
};

// 3/4 (1 - u^2) on [-1, 1], 0 outside.
double epanechnikov(double u);

// Plug-in estimate of the bandwidth minimizing the asymptotic MISE, in the
// Epanechnikov kernel's scale: the two-stage solve-the-equation construction
// with Gaussian-shaped pilot kernels for the curvature functional, converted
// through the canonical-bandwidth ratio. Requires n >= 8 and a sample with
// positive standard deviation. When the pilot functionals are unusable or the
// fixed point is not bracketed, returns the rule-of-thumb bandwidth
// 2.345 * sd * n^(-1/5) tagged silverman_fallback.
Bandwidth sj_bandwidth(std::span<const double> sample);
Bandwidth sj_bandwidth(std::span<const double> sample, AmiseFunctionals& out);

// Average of scaled kernels centered at the samples, evaluated on the grid.
DensityCurve kde_evaluate(std::span<const double> samples, Bandwidth bandwidth,
                          std::span<const double> grid);

// Probability-density forecast at a query point: samples the conditional
// quantile function on tau_grid, picks a bandwidth for those pseudo-samples,
// and evaluates the KDE on grid_points points spanning the samples padded by
// one bandwidth on each side.
DensityCurve density_forecast(const Forest& forest, std::span<const double> x,
                              std::span<const double> tau_grid, std::size_t grid_points = 512);

// grid_size equally spaced interior levels: (1, ..., grid_size) / (grid_size + 1).
std::vector<double> default_tau_grid(std::size_t grid_size = 99);

}  // namespace qrfsj
