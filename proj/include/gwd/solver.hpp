#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gwd/dynamics.hpp"
#include "gwd/measures.hpp"
#include "gwd/mobility.hpp"
#include "json.hpp"

namespace gwd {

enum class InitMode { linear_interpolation, given_curve };
enum class SolverStatus { converged, max_iterations, infeasible };

std::string to_string(SolverStatus status);

struct SolverConfig {
  int time_steps = 16;
  int max_iterations = 50000;
  /// Primal/dual steps of the Chambolle-Pock iteration. Non-positive values
  /// are replaced by step_ratio-balanced steps with tau * sigma * ||K||^2 = 0.99.
  double primal_step = 0.0;
  double dual_step = 0.0;
  double step_ratio = 1.0;  ///< sigma / tau when the steps are chosen automatically
  double tolerance = 1e-7;  ///< on the fixed-point residual
  int check_every = 10;
  /// Iterations with infinite (or capped) objective and a stalled residual
  /// before the run is declared infeasible.
  int infeasibility_window = 5000;
  double objective_cap = 1e12;
  InitMode init = InitMode::linear_interpolation;
  std::optional<TransportCurve> initial_curve;

  nlohmann::json to_json() const;
  static SolverConfig from_json(const nlohmann::json& j);
};

struct SolverResult {
  double distance = kInfinity;  ///< action^(1/p)
  double action = kInfinity;
  TransportCurve geodesic;
  int iterations = 0;
  double residual = kInfinity;
  double mass_gap = 0.0;
  double ce_residual = 0.0;
  double step_norm = 0.0;  ///< power-iteration estimate of ||K||
  SolverStatus status = SolverStatus::max_iterations;
};

/// Minimizes the discrete action over discrete continuity-equation curves on
/// [0, 1] joining mu0 and mu1. Throws std::invalid_argument when the measures
/// live on different references or a density lies outside [a, b].
SolverResult compute_distance(const GridMeasure& mu0, const GridMeasure& mu1, const ActionDensity& phi,
                              const SolverConfig& cfg = {});

/// Equal total masses within 1e-10 * max(1, |mass|). On a bounded grid the
/// moment condition on the reference always holds, so this is the whole test;
/// q is accepted for interface symmetry with the continuous statement.
bool preflight_mass_check(const GridMeasure& mu0, const GridMeasure& mu1, const ReferenceMeasure& gamma, double q);

struct CellProx {
  double rho;
  std::vector<double> w;
};

/// argmin over [a, b] x R^d of phi(rho, w) + (|rho - rho_t|^2 + |w - w_t|^2) / (2 tau).
CellProx prox_action_cell(double rho_t, std::span<const double> w_t, double tau, const ActionDensity& phi);
/// Scalar-momentum overload used on faces.
std::pair<double, double> prox_action_cell(double rho_t, double w_t, double tau, const ActionDensity& phi);

/// For each fraction s, distance(mu0, mu_s) / (s * distance), with mu_s read
/// off the geodesic (linear in time between nodes). s = 0 maps to 1.
std::vector<double> geodesic_speed_profile(const SolverResult& result, const ActionDensity& phi,
                                           const std::vector<double>& fractions, const SolverConfig& cfg = {});

/// {distance, status, iterations, residual, mass_gap}
nlohmann::json diagnostics_json(const SolverResult& result);

}  // namespace gwd
