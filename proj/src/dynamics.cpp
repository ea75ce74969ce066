#include "gwd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "gwd/measure_io.hpp"
#include "gwd/oracle.hpp"

namespace gwd {

TransportCurve::TransportCurve(ReferenceMeasure reference, double horizon, std::vector<double> densities,
                               std::vector<double> momenta)
    : reference_(std::move(reference)), horizon_(horizon), densities_(std::move(densities)),
      momenta_(std::move(momenta))
{
  const std::size_t cells = reference_.grid().cell_count();
  const std::size_t faces = reference_.grid().faces().size();
  if (!(horizon_ > 0.0)) throw std::invalid_argument("transport curve: horizon must be positive");
  if (densities_.size() % cells != 0 || densities_.size() < 2 * cells) {
    throw std::invalid_argument("transport curve: need at least two density frames");
  }
  steps_ = static_cast<int>(densities_.size() / cells) - 1;
  if (momenta_.size() != static_cast<std::size_t>(steps_) * faces) {
    throw std::invalid_argument("transport curve: momenta size must be steps * faces");
  }
  const auto& fl = reference_.grid().faces();
  for (int k = 0; k < steps_; ++k) {
    for (std::size_t f = 0; f < faces; ++f) {
      if (reference_.face_weight(fl[f]) == 0.0) momenta_[k * faces + f] = 0.0;
    }
  }
  for (int k = 0; k <= steps_; ++k) {
    for (std::size_t i = 0; i < cells; ++i) {
      if (reference_.weight(i) == 0.0) densities_[k * cells + i] = 0.0;
    }
  }
}

TransportCurve TransportCurve::stationary(const GridMeasure& mu, double horizon, int steps)
{
  if (steps < 1) throw std::invalid_argument("transport curve: need at least one step");
  std::vector<double> rho;
  for (int k = 0; k <= steps; ++k) rho.insert(rho.end(), mu.density().begin(), mu.density().end());
  std::vector<double> w(static_cast<std::size_t>(steps) * mu.grid().faces().size(), 0.0);
  return TransportCurve(mu.reference(), horizon, std::move(rho), std::move(w));
}

std::span<const double> TransportCurve::density(int node) const
{
  const std::size_t n = grid().cell_count();
  return std::span<const double>(densities_).subspan(static_cast<std::size_t>(node) * n, n);
}

std::span<const double> TransportCurve::momentum(int step) const
{
  const std::size_t n = grid().faces().size();
  return std::span<const double>(momenta_).subspan(static_cast<std::size_t>(step) * n, n);
}

GridMeasure TransportCurve::measure(int node) const
{
  const auto d = density(node);
  return GridMeasure(reference_, std::vector<double>(d.begin(), d.end()));
}

double ce_residual(const TransportCurve& c)
{
  const auto& ref = c.reference();
  const auto& faces = c.grid().faces();
  const std::size_t n = c.grid().cell_count();
  double scale = 0.0;
  for (double r : c.densities()) scale = std::max(scale, std::abs(r));
  if (scale == 0.0) scale = 1.0;

  std::vector<double> div(n);
  double worst = 0.0;
  for (int k = 0; k < c.steps(); ++k) {
    std::fill(div.begin(), div.end(), 0.0);
    const auto w = c.momentum(k);
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const double flux = ref.face_weight(faces[f]) / c.grid().axis(faces[f].axis).spacing() * w[f];
      div[faces[f].lo] += flux;
      div[faces[f].hi] -= flux;
    }
    const auto r0 = c.density(k);
    const auto r1 = c.density(k + 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (ref.weight(i) == 0.0) continue;
      const double res = (r1[i] - r0[i]) / c.dt() + div[i] / ref.weight(i);
      worst = std::max(worst, std::abs(res));
    }
  }
  return worst / scale;
}

double face_density(const TransportCurve& c, int step, const Face& f)
{
  const auto r0 = c.density(step);
  const auto r1 = c.density(step + 1);
  return 0.25 * (r0[f.lo] + r0[f.hi] + r1[f.lo] + r1[f.hi]);
}

std::vector<double> step_actions(const TransportCurve& c, const ActionDensity& phi)
{
  const auto& ref = c.reference();
  const auto& faces = c.grid().faces();
  std::vector<double> out(static_cast<std::size_t>(c.steps()), 0.0);
  for (int k = 0; k < c.steps(); ++k) {
    const auto w = c.momentum(k);
    double acc = 0.0;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const double gw = ref.face_weight(faces[f]);
      if (gw == 0.0) continue;
      acc += gw * eval_action(phi, face_density(c, k, faces[f]), w[f]);
    }
    out[k] = c.dt() * acc;
  }
  return out;
}

double action_integral(const TransportCurve& c, const ActionDensity& phi)
{
  double total = 0.0;
  for (double a : step_actions(c, phi)) total += a;
  return total;
}

std::vector<double> mass_trace(const TransportCurve& c)
{
  std::vector<double> out;
  for (int k = 0; k <= c.steps(); ++k) out.push_back(total_mass(c.measure(k)));
  return out;
}

TransportCurve glue(const TransportCurve& c1, const TransportCurve& c2)
{
  if (!(c1.reference() == c2.reference())) throw std::invalid_argument("glue: curves live on different references");
  if (std::abs(c1.dt() - c2.dt()) > 1e-12 * std::max(c1.dt(), c2.dt())) {
    throw std::invalid_argument("glue: curves must share the time step");
  }
  const auto end = c1.density(c1.steps());
  const auto start = c2.density(0);
  if (!std::equal(end.begin(), end.end(), start.begin())) {
    throw std::invalid_argument("glue: final density of the first curve differs from the initial density of the second");
  }
  std::vector<double> rho(c1.densities().begin(), c1.densities().end());
  rho.insert(rho.end(), c2.densities().begin() + static_cast<long>(start.size()), c2.densities().end());
  std::vector<double> w(c1.momenta().begin(), c1.momenta().end());
  w.insert(w.end(), c2.momenta().begin(), c2.momenta().end());
  return TransportCurve(c1.reference(), c1.horizon() + c2.horizon(), std::move(rho), std::move(w));
}

TransportCurve time_rescale(const TransportCurve& c, double new_horizon)
{
  if (!(new_horizon > 0.0)) throw std::invalid_argument("time_rescale: new horizon must be positive");
  const double speed = c.horizon() / new_horizon;
  std::vector<double> w(c.momenta().begin(), c.momenta().end());
  for (double& x : w) x *= speed;
  return TransportCurve(c.reference(), new_horizon,
                        std::vector<double>(c.densities().begin(), c.densities().end()), std::move(w));
}

namespace {

Point face_center(const Grid& g, const Face& f)
{
  const Point a = g.center(f.lo);
  const Point b = g.center(f.hi);
  return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
}

// Every corner of every cell in the support, scaled by `factor`, stays in the box.
void require_scaled_support(const GridMeasure& mu, double factor, const char* what)
{
  const Grid& g = mu.grid();
  const double slack = 1e-12 * g.diameter();
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    if (mu[i] == 0.0) continue;
    const Point c = g.center(i);
    for (int m = 0; m < (1 << g.dim()); ++m) {
      Point y{0.0, 0.0, 0.0};
      for (int k = 0; k < g.dim(); ++k) {
        y[k] = factor * (c[k] + 0.5 * g.axis(k).spacing() * (((m >> k) & 1) ? 1.0 : -1.0));
      }
      if (!g.contains(y, slack)) throw std::out_of_range(std::string(what) + ": support leaves the grid");
    }
  }
}

// Samples rho(t, x) at nodes and momentum(t, x) (vector) at face midpoints.
template <typename Density, typename Momentum>
TransportCurve sample_curve(const GridMeasure& mu, double horizon, int steps, Density rho, Momentum mom)
{
  const Grid& g = mu.grid();
  const double dt = horizon / steps;
  std::vector<double> dens;
  dens.reserve(static_cast<std::size_t>(steps + 1) * g.cell_count());
  dens.insert(dens.end(), mu.density().begin(), mu.density().end());
  for (int k = 1; k <= steps; ++k) {
    for (std::size_t i = 0; i < g.cell_count(); ++i) dens.push_back(rho(k * dt, g.center(i)));
  }
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(steps) * g.faces().size());
  for (int k = 0; k < steps; ++k) {
    for (const auto& f : g.faces()) w.push_back(mom((k + 0.5) * dt, face_center(g, f), f.axis));
  }
  return TransportCurve(mu.reference(), horizon, std::move(dens), std::move(w));
}

}  // namespace

double dilation_exponent(double p, int d) { return (1.0 - d) * p + d; }

DilationCurve dilation_curve(const GridMeasure& rho0, double p, double horizon, int steps)
{
  if (!(p > 1.0)) throw std::invalid_argument("dilation_curve: need p > 1");
  if (!(horizon > 0.0) || steps < 1) throw std::invalid_argument("dilation_curve: need horizon > 0 and steps >= 1");
  require_scaled_support(rho0, std::exp(horizon), "dilation_curve");
  const int d = rho0.grid().dim();
  auto rho = [&](double t, const Point& x) {
    const double s = std::exp(-t);
    return std::exp(-d * t) * rho0.interpolate({s * x[0], s * x[1], s * x[2]});
  };
  auto mom = [&](double t, const Point& x, int axis) { return x[axis] * rho(t, x); };
  TransportCurve curve = sample_curve(rho0, horizon, steps, rho, mom);
  const double e = dilation_exponent(p, d);
  const double res = ce_residual(curve);
  return {std::move(curve), e, e < 0.0, res};
}

ConnectivityCurve connectivity_curve(const GridMeasure& mu, double p, int steps)
{
  if (!(p > 1.0)) throw std::invalid_argument("connectivity_curve: need p > 1");
  if (steps < 1) throw std::invalid_argument("connectivity_curve: need steps >= 1");
  if (mu.max_density() > 1.0 || mu.min_density() < 0.0) {
    throw std::invalid_argument("connectivity_curve: density must lie in [0, 1]");
  }
  require_scaled_support(mu, 2.0, "connectivity_curve");
  const int d = mu.grid().dim();
  auto rho = [&](double t, const Point& y) {
    const double s = 1.0 + std::pow(t, p);
    return std::pow(s, -d) * mu.interpolate({y[0] / s, y[1] / s, y[2] / s});
  };
  auto mom = [&](double t, const Point& y, int axis) {
    const double s = 1.0 + std::pow(t, p);
    return p * std::pow(t, p - 1.0) / s * y[axis] * rho(t, y);
  };
  TransportCurve curve = sample_curve(mu, 1.0, steps, rho, mom);
  return {std::move(curve), c_pd_constant(p, d) * generalized_moment(mu, p)};
}

double c_pd_constant(double p, int d)
{
  if (!(p > 1.0) || d < 1) throw std::invalid_argument("c_pd_constant: need p > 1 and d >= 1");
  const double lead = std::pow(p, p) * std::pow(static_cast<double>(d), 1.0 - p);
  return quadrature([&](double t) { return lead * std::pow(1.0 + std::pow(t, p), d * (p - 1.0)); }, 0.0, 1.0,
                    1e-10);
}

namespace {

struct Quantile {
  std::vector<double> s;  // cumulative mass fractions at cell edges
  double lo;
  double dx;
  double mass;

  double eval(std::size_t cell, double at) const
  {
    return lo + (cell + (at - s[cell]) / (s[cell + 1] - s[cell])) * dx;
  }
  std::size_t cell_of(double mid) const
  {
    auto it = std::upper_bound(s.begin(), s.end(), mid);
    const auto j = static_cast<std::size_t>(std::distance(s.begin(), it));
    return std::min(j == 0 ? 0 : j - 1, s.size() - 2);
  }
};

Quantile make_quantile(const GridMeasure& mu)
{
  const auto& ax = mu.grid().axis(0);
  Quantile q{{0.0}, ax.lo, ax.spacing(), 0.0};
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.grid().cell_count(); ++i) {
    const double m = mu[i] * mu.reference().weight(i);
    if (m < 0.0) throw std::invalid_argument("wasserstein_1d: densities must be nonnegative");
    acc += m;
    q.s.push_back(acc);
  }
  q.mass = acc;
  if (!(acc > 0.0)) throw std::invalid_argument("wasserstein_1d: measures must have positive mass");
  for (double& v : q.s) v /= acc;
  q.s.back() = 1.0;
  return q;
}

// integral over an interval of length len of |l(s)|^p for linear l from l0 to l1.
double linear_power_integral(double l0, double l1, double len, double p)
{
  if ((l0 < 0.0 && l1 > 0.0) || (l0 > 0.0 && l1 < 0.0)) {
    const double z = l0 / (l0 - l1);
    return linear_power_integral(l0, 0.0, z * len, p) + linear_power_integral(0.0, l1, (1.0 - z) * len, p);
  }
  const double a0 = std::abs(l0);
  const double a1 = std::abs(l1);
  const double big = std::max(a0, a1);
  if (big == 0.0) return 0.0;
  if (std::abs(a1 - a0) <= 1e-3 * big) {
    auto f = [&](double u) { return std::pow(a0 + (a1 - a0) * u, p); };
    return len * boost::math::quadrature::gauss<double, 10>::integrate(f, 0.0, 1.0);
  }
  return len * (std::pow(a1, p + 1.0) - std::pow(a0, p + 1.0)) / ((p + 1.0) * (a1 - a0));
}

}  // namespace

double wasserstein_1d(const GridMeasure& mu0, const GridMeasure& mu1, double p)
{
  if (mu0.grid().dim() != 1 || mu1.grid().dim() != 1) throw std::invalid_argument("wasserstein_1d: 1D measures only");
  if (!(p >= 1.0)) throw std::invalid_argument("wasserstein_1d: need p >= 1");
  const Quantile q0 = make_quantile(mu0);
  const Quantile q1 = make_quantile(mu1);
  if (std::abs(q0.mass - q1.mass) > 1e-10 * std::max(1.0, std::abs(q0.mass))) {
    throw std::invalid_argument("wasserstein_1d: masses differ");
  }

  std::vector<double> breaks(q0.s);
  breaks.insert(breaks.end(), q1.s.begin(), q1.s.end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  double total = 0.0;
  for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
    const double sl = breaks[j];
    const double sr = breaks[j + 1];
    if (!(sr > sl)) continue;
    const double mid = 0.5 * (sl + sr);
    const auto c0 = q0.cell_of(mid);
    const auto c1 = q1.cell_of(mid);
    const double l0 = q0.eval(c0, sl) - q1.eval(c1, sl);
    const double l1 = q0.eval(c0, sr) - q1.eval(c1, sr);
    total += linear_power_integral(l0, l1, sr - sl, p);
  }
  return std::pow(q0.mass * total, 1.0 / p);
}

void export_curve(const std::filesystem::path& dir, const TransportCurve& c, const ActionDensity& phi)
{
  std::filesystem::create_directories(dir);
  auto manifest = grid_header(c.grid());
  manifest["steps"] = c.steps();
  manifest["horizon"] = c.horizon();
  manifest["faces"] = c.grid().faces().size();
  nlohmann::json frames = nlohmann::json::array();
  for (int k = 0; k <= c.steps(); ++k) {
    const std::string name = "frame_" + std::to_string(k) + ".f64";
    write_f64(dir / name, c.density(k));
    frames.push_back(name);
  }
  manifest["frames"] = frames;
  write_f64(dir / "momenta.f64", c.momenta());
  manifest["momenta"] = "momenta.f64";
  write_f64(dir / "weights.f64", c.reference().weights());
  manifest["weights"] = "weights.f64";
  {
    std::ofstream out(dir / "curve.json");
    out << manifest.dump(2) << '\n';
  }

  const auto mass = mass_trace(c);
  const auto act = step_actions(c, phi);
  std::ofstream csv(dir / "mass_trace.csv");
  csv << "t,mass\n" << std::setprecision(17);
  for (int k = 0; k <= c.steps(); ++k) csv << k * c.dt() << ',' << mass[k] << '\n';
  std::ofstream csv2(dir / "step_action.csv");
  csv2 << "t_mid,action\n" << std::setprecision(17);
  for (int k = 0; k < c.steps(); ++k) csv2 << (k + 0.5) * c.dt() << ',' << act[k] << '\n';
}

}  // namespace gwd
