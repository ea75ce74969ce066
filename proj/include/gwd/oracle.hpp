#pragma once

#include <functional>
#include <utility>

#include "gwd/measures.hpp"
#include "gwd/mobility.hpp"

namespace gwd {

/// Adaptive Gauss-Kronrod quadrature of f on [lo, hi]. Throws
/// std::runtime_error when the error estimate does not reach `tol`
/// (absolute) after the maximum number of bisections.
double quadrature(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-10);

/// Two cells of width `cell_width` on [0, 2 * cell_width] joined by one face.
/// `weight_left` / `weight_right` multiply the cell volume to form the
/// reference weights, so unequal weights give a Gibbs-type reference.
struct TwoCellInstance {
  std::pair<double, double> rho0;  ///< (left, right) at t = 0
  std::pair<double, double> rho1;  ///< (left, right) at t = 1
  double cell_width = 1.0;
  MobilitySpec mobility = MobilitySpec::quadratic();
  double p = 2.0;
  int time_steps = 8;
  double weight_left = 1.0;
  double weight_right = 1.0;

  ReferenceMeasure reference() const;
  GridMeasure initial() const;
  GridMeasure final() const;
};

/// Minimal discrete action over the single flux time series, to the power
/// 1/p. Multi-resolution dynamic programming over the left-cell density
/// followed by coordinate-wise golden-section polishing. Shares no code with
/// the splitting solver. Throws when the endpoint masses differ or a density
/// lies outside [a, b].
double two_cell_exact(const TwoCellInstance& inst);

}  // namespace gwd
