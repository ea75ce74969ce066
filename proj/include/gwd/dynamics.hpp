#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "gwd/measures.hpp"
#include "gwd/mobility.hpp"

namespace gwd {

/// Discrete curve on [0, T] with N steps: densities at the N+1 time nodes
/// (cell centres) and scalar momenta at the N time midpoints on every
/// interior face. Boundary faces carry no flux; faces next to inactive cells
/// are forced to zero.
///
/// The discrete continuity equation for step k and cell i reads
///   gamma_i (rho_i^{k+1} - rho_i^k) / dt + sum_f s_if (gamma_f / dx_f) w_f^{k+1/2} = 0
/// with s_if = +1 when i is the `lo` cell of f and -1 when it is the `hi` cell.
class TransportCurve {
public:
  TransportCurve(ReferenceMeasure reference, double horizon, std::vector<double> densities,
                 std::vector<double> momenta);

  /// Constant density, zero momenta.
  static TransportCurve stationary(const GridMeasure& mu, double horizon, int steps);

  const ReferenceMeasure& reference() const { return reference_; }
  const Grid& grid() const { return reference_.grid(); }
  int steps() const { return steps_; }
  double horizon() const { return horizon_; }
  double dt() const { return horizon_ / steps_; }

  std::span<const double> density(int node) const;
  std::span<const double> momentum(int step) const;
  std::span<const double> densities() const { return densities_; }
  std::span<const double> momenta() const { return momenta_; }

  GridMeasure measure(int node) const;
  GridMeasure initial() const { return measure(0); }
  GridMeasure final() const { return measure(steps_); }

private:
  ReferenceMeasure reference_;
  double horizon_;
  int steps_;
  std::vector<double> densities_;
  std::vector<double> momenta_;
};

/// max over steps and cells of |(rho^{k+1}-rho^k)/dt + div_h w^{k+1/2}|,
/// divided by max |rho| (or 1 for the zero curve).
double ce_residual(const TransportCurve& c);

/// Face density for step k: mean of the two adjacent cells at both time nodes.
double face_density(const TransportCurve& c, int step, const Face& f);

/// dt * sum_k sum_f gamma_f phi(rho_hat, w). +infinity as soon as one term is.
double action_integral(const TransportCurve& c, const ActionDensity& phi);
std::vector<double> step_actions(const TransportCurve& c, const ActionDensity& phi);

std::vector<double> mass_trace(const TransportCurve& c);

/// Concatenation on [0, T1 + T2]. Both curves must share the reference and
/// the time step, and c1's last frame must equal c2's first frame exactly.
TransportCurve glue(const TransportCurve& c1, const TransportCurve& c2);

/// Linear reparametrization onto [0, new_horizon]; momenta scale by T / new_T.
TransportCurve time_rescale(const TransportCurve& c, double new_horizon);

struct DilationCurve {
  TransportCurve curve;
  double exponent;      ///< (1 - d) p + d
  bool finite_action;   ///< exponent < 0, i.e. d > q
  double residual;      ///< ce_residual of the sampled curve
};

/// rho_t(x) = e^{-dt} rho0(e^{-t} x), w_t = x rho_t(x), sampled on the grid of
/// rho0 for t in [0, horizon]. Throws when e^{horizon} * support leaves the box.
DilationCurve dilation_curve(const GridMeasure& rho0, double p, double horizon, int steps);

/// Time exponent of the dilation energy; closed form, no grid needed.
double dilation_exponent(double p, int d);

struct ConnectivityCurve {
  TransportCurve curve;
  double action_bound;  ///< C_{p,d} * generalized p-th moment of mu
};

/// Push-forward by T_t(x) = (1 + t^p) x for t in [0, 1] with velocity
/// p t^{p-1} x / (1 + t^p). Requires 0 <= rho <= 1 and a doubled support that
/// fits the box.
ConnectivityCurve connectivity_curve(const GridMeasure& mu, double p, int steps);

/// integral_0^1 p^p d^{1-p} (1 + t^p)^{d(p-1)} dt.
double c_pd_constant(double p, int d);

/// W_p between two nonnegative 1D measures of equal mass, from their
/// piecewise-linear quantile functions: (m * int_0^1 |F0^-1 - F1^-1|^p ds)^{1/p}.
double wasserstein_1d(const GridMeasure& mu0, const GridMeasure& mu1, double p);

/// <dir>/curve.json manifest, frame_<k>.f64 densities, momenta.f64 and a
/// CSV with (t, mass) per node and (t_mid, action) per step.
void export_curve(const std::filesystem::path& dir, const TransportCurve& c, const ActionDensity& phi);

}  // namespace gwd
