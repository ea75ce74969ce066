#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gwd/solver.hpp"
#include "json.hpp"

namespace gwd {

/// One verified property: passes when value <= limit.
struct PropertyCheck {
  std::string name;
  bool passed;
  double value;
  double limit;
  int instances;
  nlohmann::json details;
};

nlohmann::json to_json(const PropertyCheck& c);

/// Random instances live on a 1D Lebesgue box [0, 1] with `cells` cells and
/// the quadratic mobility rho(1 - rho), p = 2. All limits derive from
/// `tolerance`:
///   symmetry 2 tol, triangle 3 tol, convexity / comparison / monotonicity /
///   mollification / oracle tol, speed ratio 30 tol, mass drift 1e-5 tol,
///   density bounds 1e-3 tol.
struct PropertyConfig {
  std::uint64_t seed = 20240607;
  int cells = 16;
  int time_steps = 16;
  double tolerance = 1e-3;
  SolverConfig solver = default_solver();
  int triples = 10;
  int quadruples = 5;
  int comparison_instances = 10;
  int monotonicity_instances = 10;
  int geodesic_instances = 5;
  int oracle_instances = 20;

  static SolverConfig default_solver();
  static PropertyConfig from_json(const nlohmann::json& j);
};

std::vector<PropertyCheck> check_metric_axioms(const PropertyConfig& cfg);  ///< symmetry, triangle
PropertyCheck check_convexity(const PropertyConfig& cfg);
PropertyCheck check_comparison(const PropertyConfig& cfg);
PropertyCheck check_monotonicity(const PropertyConfig& cfg);
/// Mass along converged geodesics plus the infeasible verdict for endpoint
/// masses that differ by 2e-6.
PropertyCheck check_mass_conservation(const PropertyConfig& cfg);
PropertyCheck check_density_bounds(const PropertyConfig& cfg);
PropertyCheck check_constant_speed(const PropertyConfig& cfg);
PropertyCheck check_mollification(const PropertyConfig& cfg);
PropertyCheck check_oracle_agreement(const PropertyConfig& cfg);

struct PropertyReport {
  std::vector<PropertyCheck> checks;
  nlohmann::json constants;  ///< C_{p,d}, dilation exponents, comparison constant
  bool all_passed() const;
  nlohmann::json to_json() const;
};

PropertyReport run_property_suite(const PropertyConfig& cfg);

/// Rows (p, d, C_{p,d}, dilation exponent, finite-action flag, comparison
/// constant for rho(1 - rho) at M' = 1/2) for p in {1.5, 2, 3}, d in {1, 2, 3}.
nlohmann::json constants_table();

}  // namespace gwd
