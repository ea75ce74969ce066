#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gwd/dynamics.hpp"
#include "gwd/measures.hpp"
#include "gwd/mobility.hpp"

namespace gwd {

/// Implicit-Euler finite-volume solution of the heat equation on a box with
/// zero-flux faces. Frame k lives at time k * dt.
class HeatTrajectory {
public:
  HeatTrajectory(ReferenceMeasure reference, double dt, std::vector<std::vector<double>> frames);

  const ReferenceMeasure& reference() const { return reference_; }
  const Grid& grid() const { return reference_.grid(); }
  double dt() const { return dt_; }
  int steps() const { return static_cast<int>(frames_.size()) - 1; }
  double time(int k) const { return k * dt_; }
  double horizon() const { return steps() * dt_; }
  double mean() const { return mean_; }

  const std::vector<double>& frame(int k) const { return frames_[static_cast<std::size_t>(k)]; }
  GridMeasure measure(int k) const;

  /// The trajectory read as a transport curve on [0, horizon] with momenta
  /// -grad rho^{k+1}, which solves the discrete continuity equation exactly.
  TransportCurve to_curve() const;

  /// Trajectory truncated to its first `steps` steps.
  HeatTrajectory prefix(int steps) const;

private:
  ReferenceMeasure reference_;
  double dt_;
  std::vector<std::vector<double>> frames_;
  double mean_;
};

/// Marches ceil(T / dt) steps. Requires a Lebesgue reference on the box.
HeatTrajectory solve_neumann_heat(const GridMeasure& rho0, double T, double dt);

/// Marches until `stop` accepts the current frame or `t_max` is exceeded.
/// Returns std::nullopt in the latter case.
std::optional<HeatTrajectory> solve_neumann_heat_until(const GridMeasure& rho0, double dt, double t_max,
                                                       const std::function<bool(std::span<const double>)>& stop);

/// U with U'' = 1/h, U(m) = U'(m) = 0 at the midpoint m. +infinity outside [a, b]
/// and wherever the defining integral diverges.
double entropy_density(const MobilitySpec& h, double rho);

/// Integral of U(rho) against the reference.
double entropy(const GridMeasure& rho, const MobilitySpec& h);

struct DissipationReport {
  std::vector<double> entropy;      ///< per frame
  std::vector<double> dissipation;  ///< per step: sum over faces of |grad rho^{k+1}|^2 / h(face mean) * weight
  double worst_margin;              ///< max_k [U_{k+1} - U_k + dt * dissipation_k]
  double cumulative;                ///< dt * sum_k dissipation_k
  double max_increase;              ///< max_k [U_{k+1} - U_k]
  /// U_{k+1} < U_k at every step whose dissipation is above roundoff.
  bool strictly_decreasing;
};

DissipationReport dissipation_report(const HeatTrajectory& traj, const MobilitySpec& h);

struct DecayReport {
  std::vector<double> l2_gap;
  std::vector<double> linf_gap;
  std::optional<double> l2_rate;    ///< none when fewer than 10 usable frames after t = 1
  std::optional<double> linf_rate;
  double gradient_ratio;            ///< max over frames of sqrt(t) * max|grad rho_t| / ||rho_0||_inf
  bool gradient_bound_holds;        ///< gradient_ratio <= 1
};

DecayReport decay_report(const HeatTrajectory& traj);

struct HeatBoundConfig {
  double dt = 1e-3;
  double t_max = 10.0;
};

struct HeatBound {
  double bound;                ///< first_leg + middle + second_leg
  double stopping_time;        ///< T
  double first_leg;            ///< sqrt(T * action of the heat curve from mu0)
  double middle;               ///< C * W_2 of the shifted smoothed measures
  double second_leg;
  double comparison_constant;  ///< C, evaluated at M' = rho_inf + (b - rho_inf) / 2
};

/// Upper bound on the distance between mu0 and mu1 obtained by running both
/// through the heat flow until they fall below M', then comparing the
/// smoothed measures with W_2. Requires p = 2, a Lebesgue reference and equal
/// masses; throws std::runtime_error when M' is not reached before t_max.
HeatBound heat_then_transport_bound(const GridMeasure& mu0, const GridMeasure& mu1, const ActionDensity& phi,
                                    const HeatBoundConfig& cfg = {});

/// CSV with columns t, l2_gap, linf_gap, entropy, dissipation.
void write_heat_csv(const std::filesystem::path& path, const HeatTrajectory& traj, const MobilitySpec& h);

}  // namespace gwd
