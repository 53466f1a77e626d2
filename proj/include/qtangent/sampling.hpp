#pragma once

// Inverse-CDF sampling from tabulated densities, and reproducible uniform
// streams.

#include <cstdint>
#include <functional>
#include <random>

#include <Eigen/Core>

#include "qtangent/kernels.hpp"

namespace qtangent {

struct SeedSpec {
  std::uint64_t base_seed = 0;
  std::uint64_t stream_index = 0;
};

/// Uniform doubles in [0, 1) with 53 random bits. One consumer per stream.
class UniformStream {
 public:
  explicit UniformStream(const SeedSpec& seed);

  double next() { return double(engine_() >> 11) * 0x1.0p-53; }
  double operator()() { return next(); }

 private:
  std::mt19937_64 engine_;
};

/// Where to concentrate nodes: a tan-mapped cluster of width ~scale around
/// center. Ignored when scale <= 0.
struct NodeHint {
  double center = 0.0;
  double scale = 0.0;
};

struct CdfOptions {
  int n = 128;
  double tail_mass_tol = 1e-10;
  NodeHint hint{};
  // cells whose Simpson and trapezoid masses differ by more than
  // refine_tol / n are bisected, up to max_refine_factor * n nodes
  double refine_tol = 1e-3;
  int max_refine_factor = 8;
};

/// Tabulated cumulative distribution on a (possibly truncated) support.
/// Immutable after construction.
struct CdfTable {
  Support support;
  Eigen::ArrayXd nodes;
  Eigen::ArrayXd cdf_values;
  Eigen::ArrayXd density;
  double raw_mass = 1.0;

  Eigen::Index size() const { return nodes.size(); }
  /// Interpolated CDF at x (consistent with `sample`).
  double cdf(double x) const;
};

using DensityFn = std::function<double(double)>;

CdfTable build_cdf(const DensityFn& density, Support support, const CdfOptions& options = {});

inline CdfTable build_cdf(const DensityFn& density, Support support, int n, double tail_mass_tol = 1e-10) {
  CdfOptions options;
  options.n = n;
  options.tail_mass_tol = tail_mass_tol;
  return build_cdf(density, support, options);
}

/// Quantile of the piecewise-linear density through the table nodes.
double sample(const CdfTable& table, double u);

}  // namespace qtangent
