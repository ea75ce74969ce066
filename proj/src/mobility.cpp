#include "gwd/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gwd {

namespace {

double norm2(std::span<const double> v)
{
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Maximum of a concave function on [lo, hi] by golden-section search.
template <typename F>
double concave_max(F f, double lo, double hi)
{
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    }
  }
  return std::max({f1, f2, f(lo), f(hi)});
}

}  // namespace

std::string to_string(MobilityKind kind)
{
  switch (kind) {
  case MobilityKind::quadratic: return "quadratic";
  case MobilityKind::power: return "power";
  case MobilityKind::linear: return "linear";
  case MobilityKind::tabulated: return "tabulated";
  }
  return "unknown";
}

MobilitySpec::MobilitySpec(MobilityKind kind, double a, double b, double alpha, double beta,
                           double scale, std::vector<double> table)
    : kind_(kind), a_(a), b_(b), alpha_(alpha), beta_(beta), scale_(scale), table_(std::move(table))
{
  validate();
}

MobilitySpec MobilitySpec::quadratic(double a, double b, double scale)
{
  return MobilitySpec(MobilityKind::quadratic, a, b, 1.0, 1.0, scale, {});
}

MobilitySpec MobilitySpec::power(double a, double b, double alpha, double beta, double scale)
{
  return MobilitySpec(MobilityKind::power, a, b, alpha, beta, scale, {});
}

MobilitySpec MobilitySpec::linear(double a, double b, double scale)
{
  return MobilitySpec(MobilityKind::linear, a, b, 1.0, 0.0, scale, {});
}

MobilitySpec MobilitySpec::tabulated(double a, double b, std::vector<double> values)
{
  return MobilitySpec(MobilityKind::tabulated, a, b, 1.0, 1.0, 1.0, std::move(values));
}

void MobilitySpec::validate() const
{
  if (!(std::isfinite(a_) && std::isfinite(b_) && a_ < b_)) {
    throw std::invalid_argument("mobility: need finite a < b");
  }
  if (!(scale_ > 0.0 && std::isfinite(scale_))) {
    throw std::invalid_argument("mobility: scale must be positive");
  }
  if (kind_ == MobilityKind::power && !(alpha_ > 0.0 && beta_ > 0.0)) {
    throw std::invalid_argument("mobility: power exponents must be positive");
  }
  if (kind_ == MobilityKind::tabulated) {
    if (table_.size() < 3) throw std::invalid_argument("mobility: table needs at least 3 values");
    for (std::size_t i = 0; i < table_.size(); ++i) {
      const bool interior = i > 0 && i + 1 < table_.size();
      if (!std::isfinite(table_[i]) || table_[i] < 0.0 || (interior && table_[i] <= 0.0)) {
        throw std::invalid_argument("mobility: table must be nonnegative and positive inside");
      }
    }
    double peak = *std::max_element(table_.begin(), table_.end());
    for (std::size_t i = 1; i + 1 < table_.size(); ++i) {
      if (table_[i - 1] - 2.0 * table_[i] + table_[i + 1] > 1e-12 * peak) {
        throw std::invalid_argument("mobility: tabulated values are not concave");
      }
    }
    return;
  }

  // Sampled concavity check for the closed-form kinds.
  const int n = 2000;
  const double step = (b_ - a_) / n;
  double peak = 0.0;
  std::vector<double> vals(n + 1);
  for (int i = 0; i <= n; ++i) {
    vals[i] = (*this)(a_ + i * step);
    peak = std::max(peak, vals[i]);
  }
  for (int i = 1; i < n; ++i) {
    if (!(vals[i] > 0.0)) throw std::invalid_argument("mobility: h must be positive on (a, b)");
    if (vals[i - 1] - 2.0 * vals[i] + vals[i + 1] > 1e-10 * peak) {
      throw std::invalid_argument("mobility: h is not concave");
    }
  }
}

double MobilitySpec::operator()(double rho) const
{
  if (!(rho >= a_ && rho <= b_)) return -kInfinity;
  switch (kind_) {
  case MobilityKind::quadratic:
    return scale_ * (rho - a_) * (b_ - rho);
  case MobilityKind::power:
    return scale_ * std::pow(rho - a_, alpha_) * std::pow(b_ - rho, beta_);
  case MobilityKind::linear:
    return scale_ * (rho - a_);
  case MobilityKind::tabulated: {
    const double n = static_cast<double>(table_.size() - 1);
    const double s = (rho - a_) / (b_ - a_) * n;
    const auto i = std::min(static_cast<std::size_t>(s), table_.size() - 2);
    const double t = s - static_cast<double>(i);
    return (1.0 - t) * table_[i] + t * table_[i + 1];
  }
  }
  return -kInfinity;
}

double MobilitySpec::derivative(double rho) const
{
  if (!(rho >= a_ && rho <= b_)) return 0.0;
  switch (kind_) {
  case MobilityKind::quadratic:
    return scale_ * ((b_ - rho) - (rho - a_));
  case MobilityKind::power: {
    // d/drho of (rho-a)^alpha (b-rho)^beta, with the endpoint limits.
    auto term = [](double x, double e) {
      if (x > 0.0) return std::pow(x, e);
      return e > 0.0 ? 0.0 : (e == 0.0 ? 1.0 : kInfinity);
    };
    const double left = alpha_ * term(rho - a_, alpha_ - 1.0) * term(b_ - rho, beta_);
    const double right = beta_ * term(rho - a_, alpha_) * term(b_ - rho, beta_ - 1.0);
    if (std::isinf(left) && std::isinf(right)) return 0.0;
    return scale_ * (left - right);
  }
  case MobilityKind::linear:
    return scale_;
  case MobilityKind::tabulated: {
    const double n = static_cast<double>(table_.size() - 1);
    const double s = (rho - a_) / (b_ - a_) * n;
    const auto i = std::min(static_cast<std::size_t>(s), table_.size() - 2);
    return (table_[i + 1] - table_[i]) * n / (b_ - a_);
  }
  }
  return 0.0;
}

MobilitySpec MobilitySpec::scaled(double c) const
{
  if (kind_ == MobilityKind::tabulated) {
    std::vector<double> t = table_;
    for (double& v : t) v *= c;
    return tabulated(a_, b_, std::move(t));
  }
  return MobilitySpec(kind_, a_, b_, alpha_, beta_, scale_ * c, {});
}

ActionDensity::ActionDensity(double p, MobilitySpec mobility) : p_(p), mobility_(std::move(mobility))
{
  if (!(p > 1.0 && std::isfinite(p))) throw std::invalid_argument("action density: need p > 1");
}

double eval_action(const ActionDensity& phi, double rho, double w)
{
  const double h = phi.mobility()(rho);
  if (h == -kInfinity) return kInfinity;
  if (h <= 0.0) return w == 0.0 ? 0.0 : kInfinity;
  const double aw = std::abs(w);
  if (phi.p() == 2.0) return aw * aw / h;
  return std::pow(aw, phi.p()) / std::pow(h, phi.p() - 1.0);
}

double eval_action(const ActionDensity& phi, double rho, std::span<const double> w)
{
  return eval_action(phi, rho, norm2(w));
}

double eval_conjugate(const ActionDensity& phi, double rho, std::span<const double> z)
{
  const double h = phi.mobility()(rho);
  if (h == -kInfinity) return -kInfinity;
  const double nz = norm2(z);
  if (nz == 0.0) return 0.0;
  return h * std::pow(nz, phi.q());
}

double eval_recession(const ActionDensity&, double rho, std::span<const double> w)
{
  if (rho == 0.0 && norm2(w) == 0.0) return 0.0;
  return kInfinity;
}

PhiNorms phi_norms(const ActionDensity& phi, double rho, std::span<const double> w,
                   std::span<const double> z)
{
  const auto& h = phi.mobility();
  if (!(rho > h.lower() && rho < h.upper())) {
    throw std::domain_error("phi_norms: rho must lie in the open interval (a, b)");
  }
  return {std::pow(eval_action(phi, rho, w), 1.0 / phi.p()),
          std::pow(eval_conjugate(phi, rho, z), 1.0 / phi.q())};
}

ConcaveBound upper_concave_bound(const ActionDensity& phi)
{
  const auto& h = phi.mobility();
  MobilitySpec bound = h.scaled(1.0 / h(h.midpoint()));
  const double h_max = concave_max([&](double r) { return bound(r); }, h.lower(), h.upper());
  return {std::move(bound), h_max};
}

Parabola parabola_minorant(const MobilitySpec& h, int verification_points)
{
  if (h.lower() != 0.0) throw std::invalid_argument("parabola_minorant: mobility must live on (0, M)");
  if (verification_points < 2) throw std::invalid_argument("parabola_minorant: need >= 2 points");
  const double M = h.upper();

  // With B = 1 the parabola vanishes at 0 and M; A is the smallest ratio
  // h / (rho (M - rho)) over a grid that refines the verification grid.
  const int refine = 10;
  const int n = verification_points * refine;
  double A = kInfinity;
  for (int i = 1; i < n; ++i) {
    const double r = M * static_cast<double>(i) / n;
    A = std::min(A, h(r) / (r * (M - r)));
  }
  for (double r : {M * 1e-9, M * (1.0 - 1e-9)}) A = std::min(A, h(r) / (r * (M - r)));
  if (!(A > 0.0 && std::isfinite(A))) {
    throw std::domain_error("parabola_minorant: no positive parabola fits below h");
  }

  const Parabola result{A, 1.0};
  for (int i = 0; i <= verification_points; ++i) {
    const double r = M * static_cast<double>(i) / verification_points;
    if (result(r, M) > h(r) + 1e-14 * M * M) {
      throw std::domain_error("parabola_minorant: grid verification failed");
    }
  }
  return result;
}

double comparison_constant(const MobilitySpec& h, double m_prime, double p)
{
  if (!(m_prime > h.lower() && m_prime < h.upper())) {
    throw std::invalid_argument("comparison_constant: need a < M' < b");
  }
  return std::pow((m_prime - h.lower()) / h(m_prime), (p - 1.0) / p);
}

void to_json(nlohmann::json& j, const MobilitySpec& h)
{
  j = nlohmann::json{{"kind", to_string(h.kind())}, {"a", h.lower()}, {"b", h.upper()}};
  if (h.kind() == MobilityKind::power) {
    j["alpha"] = h.alpha();
    j["beta"] = h.beta();
  }
  if (h.kind() == MobilityKind::tabulated) {
    j["values"] = h.table();
  } else if (h.scale() != 1.0) {
    j["scale"] = h.scale();
  }
}

MobilitySpec mobility_from_json(const nlohmann::json& j)
{
  const std::string kind = j.at("kind").get<std::string>();
  const double a = j.value("a", 0.0);
  const double b = j.value("b", 1.0);
  const double scale = j.value("scale", 1.0);
  if (kind == "quadratic") return MobilitySpec::quadratic(a, b, scale);
  if (kind == "power") {
    return MobilitySpec::power(a, b, j.at("alpha").get<double>(), j.at("beta").get<double>(), scale);
  }
  if (kind == "linear") return MobilitySpec::linear(a, b, scale);
  if (kind == "tabulated") return MobilitySpec::tabulated(a, b, j.at("values").get<std::vector<double>>());
  throw std::invalid_argument("unknown mobility kind: " + kind);
}

}  // namespace gwd
