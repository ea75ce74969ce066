#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace gwd {

/// Positive infinity is the only non-finite value the library produces on
/// purpose. It propagates through sums and compares above every finite value.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class MobilityKind { quadratic, power, linear, tabulated };

std::string to_string(MobilityKind kind);

/// A concave mobility h, positive on (a, b).
///
/// Built-in kinds (all multiplied by `scale`):
///   quadratic:  (rho - a)(b - rho)
///   power:      (rho - a)^alpha (b - rho)^beta
///   linear:     rho - a
///   tabulated:  piecewise-linear through values on a uniform grid over [a, b]
///
/// Evaluation at the endpoints returns the upper semicontinuous extension
/// (0 for quadratic/power, 0 and scale*(b - a) for linear). Outside [a, b]
/// the mobility is -infinity.
class MobilitySpec {
public:
  static MobilitySpec quadratic(double a = 0.0, double b = 1.0, double scale = 1.0);
  static MobilitySpec power(double a, double b, double alpha, double beta, double scale = 1.0);
  static MobilitySpec linear(double a, double b, double scale = 1.0);
  static MobilitySpec tabulated(double a, double b, std::vector<double> values);

  double operator()(double rho) const;

  /// One-sided derivative from the right at a, from the left at b.
  double derivative(double rho) const;

  /// c * h, same domain.
  MobilitySpec scaled(double c) const;

  MobilityKind kind() const { return kind_; }
  double lower() const { return a_; }
  double upper() const { return b_; }
  double midpoint() const { return 0.5 * (a_ + b_); }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double scale() const { return scale_; }
  const std::vector<double>& table() const { return table_; }

  bool contains(double rho) const { return rho >= a_ && rho <= b_; }

private:
  MobilitySpec(MobilityKind kind, double a, double b, double alpha, double beta, double scale,
               std::vector<double> table);
  void validate() const;

  MobilityKind kind_;
  double a_;
  double b_;
  double alpha_ = 1.0;
  double beta_ = 1.0;
  double scale_ = 1.0;
  std::vector<double> table_;
};

/// phi_h(rho, w) = |w|^p / h(rho)^(p-1) with the extended-real conventions at
/// h = 0 and outside the domain.
class ActionDensity {
public:
  ActionDensity(double p, MobilitySpec mobility);

  double p() const { return p_; }
  double q() const { return p_ / (p_ - 1.0); }
  const MobilitySpec& mobility() const { return mobility_; }

private:
  double p_;
  MobilitySpec mobility_;
};

double eval_action(const ActionDensity& phi, double rho, std::span<const double> w);
double eval_action(const ActionDensity& phi, double rho, double w);

double eval_conjugate(const ActionDensity& phi, double rho, std::span<const double> z);

/// Recession function of a density with bounded domain: 0 at the origin,
/// +infinity everywhere else.
double eval_recession(const ActionDensity& phi, double rho, std::span<const double> w);

struct PhiNorms {
  double primal;  ///< ||w||_(phi,rho) = phi(rho, w)^(1/p)
  double dual;    ///< ||z||_(phi,rho)* = phi~(rho, z)^(1/q)
};

/// Throws std::domain_error when rho is not in the open interval (a, b).
PhiNorms phi_norms(const ActionDensity& phi, double rho, std::span<const double> w,
                   std::span<const double> z);

struct ConcaveBound {
  MobilitySpec bound;  ///< h / h(midpoint)
  double h_max;        ///< sup of the bound over [a, b]
};

ConcaveBound upper_concave_bound(const ActionDensity& phi);

/// Coefficients of a parabola A*rho*(M/B - B*rho) lying below h on [0, M].
struct Parabola {
  double A;
  double B;
  double operator()(double rho, double M) const { return A * rho * (M / B - B * rho); }
};

/// Requires a == 0. Throws std::domain_error when no parabola with positive
/// coefficients fits below h on the verification grid.
Parabola parabola_minorant(const MobilitySpec& h, int verification_points = 1000);

/// ((M' - a) / h(M'))^((p-1)/p): the factor between the generalized distance
/// and W_p of the shifted densities rho - a, for densities in [a, M'].
/// Requires a < M' < b.
double comparison_constant(const MobilitySpec& h, double m_prime, double p);

void to_json(nlohmann::json& j, const MobilitySpec& h);
MobilitySpec mobility_from_json(const nlohmann::json& j);

}  // namespace gwd
