#include "gwd/heat.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "gwd/oracle.hpp"

namespace gwd {

namespace {

double weighted_mean(const ReferenceMeasure& ref, std::span<const double> rho)
{
  double mass = 0.0;
  double vol = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    mass += ref.weight(i) * rho[i];
    vol += ref.weight(i);
  }
  return mass / vol;
}

double face_gradient(const Grid& g, const Face& f, std::span<const double> rho)
{
  return (rho[f.hi] - rho[f.lo]) / g.axis(f.axis).spacing();
}

// Factorization of diag(gamma) + dt * L for one (grid, dt) pair.
class HeatStepper {
public:
  HeatStepper(const ReferenceMeasure& ref, double dt) : ref_(ref)
  {
    const Grid& g = ref.grid();
    const auto n = static_cast<Eigen::Index>(g.cell_count());
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index i = 0; i < n; ++i) trip.emplace_back(i, i, ref.weight(static_cast<std::size_t>(i)));
    for (const Face& f : g.faces()) {
      const double dx = g.axis(f.axis).spacing();
      const double c = dt * ref.face_weight(f) / (dx * dx);
      const auto lo = static_cast<Eigen::Index>(f.lo);
      const auto hi = static_cast<Eigen::Index>(f.hi);
      trip.emplace_back(lo, lo, c);
      trip.emplace_back(hi, hi, c);
      trip.emplace_back(lo, hi, -c);
      trip.emplace_back(hi, lo, -c);
    }
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    solver_.compute(m);
    if (solver_.info() != Eigen::Success) throw std::runtime_error("solve_neumann_heat: factorization failed");
  }

  std::vector<double> step(const std::vector<double>& rho) const
  {
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(rho.size()));
    for (std::size_t i = 0; i < rho.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = ref_.weight(i) * rho[i];
    const Eigen::VectorXd next = solver_.solve(rhs);
    return std::vector<double>(next.data(), next.data() + next.size());
  }

private:
  const ReferenceMeasure& ref_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

void check_heat_input(const GridMeasure& rho0, double dt)
{
  if (!(dt > 0.0)) throw std::invalid_argument("solve_neumann_heat: dt must be positive");
  if (rho0.reference().kind() != ReferenceKind::lebesgue) {
    throw std::invalid_argument("solve_neumann_heat: the heat flow is defined on a Lebesgue box");
  }
}

HeatTrajectory march(const GridMeasure& rho0, double dt, int steps)
{
  const HeatStepper stepper(rho0.reference(), dt);
  std::vector<std::vector<double>> frames;
  frames.reserve(static_cast<std::size_t>(steps) + 1);
  frames.emplace_back(rho0.density().begin(), rho0.density().end());
  for (int k = 0; k < steps; ++k) frames.push_back(stepper.step(frames.back()));
  return HeatTrajectory(rho0.reference(), dt, std::move(frames));
}

}  // namespace

HeatTrajectory::HeatTrajectory(ReferenceMeasure reference, double dt, std::vector<std::vector<double>> frames)
    : reference_(std::move(reference)), dt_(dt), frames_(std::move(frames))
{
  if (frames_.empty()) throw std::invalid_argument("HeatTrajectory: need at least one frame");
  for (const auto& f : frames_) {
    if (f.size() != reference_.grid().cell_count()) throw std::invalid_argument("HeatTrajectory: frame size mismatch");
  }
  mean_ = weighted_mean(reference_, frames_.front());
}

GridMeasure HeatTrajectory::measure(int k) const { return GridMeasure(reference_, frame(k)); }

TransportCurve HeatTrajectory::to_curve() const
{
  if (steps() < 1) throw std::invalid_argument("HeatTrajectory::to_curve: need at least one step");
  const Grid& g = grid();
  std::vector<double> dens;
  dens.reserve(frames_.size() * g.cell_count());
  for (const auto& f : frames_) dens.insert(dens.end(), f.begin(), f.end());
  std::vector<double> mom;
  mom.reserve(static_cast<std::size_t>(steps()) * g.faces().size());
  for (int k = 1; k <= steps(); ++k) {
    for (const Face& f : g.faces()) mom.push_back(-face_gradient(g, f, frame(k)));
  }
  return TransportCurve(reference_, horizon(), std::move(dens), std::move(mom));
}

HeatTrajectory HeatTrajectory::prefix(int steps) const
{
  if (steps < 0 || steps > this->steps()) throw std::out_of_range("HeatTrajectory::prefix: bad step count");
  return HeatTrajectory(reference_, dt_, {frames_.begin(), frames_.begin() + steps + 1});
}

HeatTrajectory solve_neumann_heat(const GridMeasure& rho0, double T, double dt)
{
  check_heat_input(rho0, dt);
  if (!(T >= 0.0)) throw std::invalid_argument("solve_neumann_heat: T must be nonnegative");
  const int steps = static_cast<int>(std::ceil(T / dt - 1e-9));
  return march(rho0, dt, std::max(steps, 0));
}

std::optional<HeatTrajectory> solve_neumann_heat_until(const GridMeasure& rho0, double dt, double t_max,
                                                       const std::function<bool(std::span<const double>)>& stop)
{
  check_heat_input(rho0, dt);
  const HeatStepper stepper(rho0.reference(), dt);
  std::vector<std::vector<double>> frames;
  frames.emplace_back(rho0.density().begin(), rho0.density().end());
  const int max_steps = static_cast<int>(std::ceil(t_max / dt - 1e-9));
  for (int k = 0;; ++k) {
    if (stop(frames.back())) return HeatTrajectory(rho0.reference(), dt, std::move(frames));
    if (k == max_steps) return std::nullopt;
    frames.push_back(stepper.step(frames.back()));
  }
}

double entropy_density(const MobilitySpec& h, double rho)
{
  const double a = h.lower();
  const double b = h.upper();
  if (!h.contains(rho)) return kInfinity;
  const double s = h.scale();
  switch (h.kind()) {
  case MobilityKind::quadratic: {
    const double u = (rho - a) / (b - a);
    auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
    return (xlogx(u) + xlogx(1.0 - u) + std::log(2.0)) / s;
  }
  case MobilityKind::linear: {
    const double v = rho - a;
    const double m = 0.5 * (b - a);
    return ((v > 0.0 ? v * std::log(v / m) : 0.0) - v + m) / s;
  }
  case MobilityKind::power:
  case MobilityKind::tabulated:
    break;
  }
  const double m = h.midpoint();
  if (rho == m) return 0.0;
  const double lo = std::min(m, rho);
  const double hi = std::max(m, rho);
  // Tabulated mobilities are only piecewise smooth, so integrate knot to knot.
  std::vector<double> cuts{lo};
  if (h.kind() == MobilityKind::tabulated) {
    const std::size_t n = h.table().size() - 1;
    for (std::size_t i = 1; i < n; ++i) {
      const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
      if (x > lo && x < hi) cuts.push_back(x);
    }
  }
  cuts.push_back(hi);
  try {
    double value = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      value += quadrature([&](double sigma) { return (rho - sigma) / h(sigma); }, cuts[i], cuts[i + 1], 1e-10);
    }
    return rho > m ? value : -value;
  } catch (const std::runtime_error&) {
    return kInfinity;
  }
}

double entropy(const GridMeasure& rho, const MobilitySpec& h)
{
  double total = 0.0;
  for (std::size_t i = 0; i < rho.grid().cell_count(); ++i) {
    const double w = rho.reference().weight(i);
    if (w > 0.0) total += w * entropy_density(h, rho[i]);
  }
  return total;
}

DissipationReport dissipation_report(const HeatTrajectory& traj, const MobilitySpec& h)
{
  const Grid& g = traj.grid();
  DissipationReport r{{}, {}, -kInfinity, 0.0, -kInfinity, true};
  for (int k = 0; k <= traj.steps(); ++k) r.entropy.push_back(entropy(traj.measure(k), h));
  for (int k = 0; k < traj.steps(); ++k) {
    const auto& next = traj.frame(k + 1);
    double fisher = 0.0;
    for (const Face& f : g.faces()) {
      const double grad = face_gradient(g, f, next);
      if (grad == 0.0) continue;
      const double hv = h(0.5 * (next[f.lo] + next[f.hi]));
      fisher += hv > 0.0 ? traj.reference().face_weight(f) * grad * grad / hv : kInfinity;
    }
    r.dissipation.push_back(fisher);
    r.cumulative += traj.dt() * fisher;
    const double change = r.entropy[k + 1] - r.entropy[k];
    r.worst_margin = std::max(r.worst_margin, change + traj.dt() * fisher);
    r.max_increase = std::max(r.max_increase, change);
    const double resolvable = 1e-13 * std::max(1.0, std::abs(r.entropy.front()));
    if (!(change < 0.0) && traj.dt() * fisher > resolvable) r.strictly_decreasing = false;
  }
  return r;
}

namespace {

std::optional<double> fitted_rate(const HeatTrajectory& traj, const std::vector<double>& gap, double floor)
{
  std::vector<double> t;
  std::vector<double> y;
  for (int k = 0; k <= traj.steps(); ++k) {
    if (traj.time(k) >= 1.0 - 1e-12 && gap[k] > floor) {
      t.push_back(traj.time(k));
      y.push_back(std::log(gap[k]));
    }
  }
  if (t.size() < 10) return std::nullopt;
  const double n = static_cast<double>(t.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  const double den = n * stt - st * st;
  if (!(den > 0.0)) return std::nullopt;
  return -(n * sty - st * sy) / den;
}

}  // namespace

DecayReport decay_report(const HeatTrajectory& traj)
{
  const Grid& g = traj.grid();
  const auto& ref = traj.reference();
  DecayReport r{{}, {}, std::nullopt, std::nullopt, 0.0, true};
  double sup0 = 0.0;
  for (double v : traj.frame(0)) sup0 = std::max(sup0, std::abs(v));

  for (int k = 0; k <= traj.steps(); ++k) {
    const auto& f = traj.frame(k);
    double l2 = 0.0;
    double linf = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double e = f[i] - traj.mean();
      l2 += ref.weight(i) * e * e;
      linf = std::max(linf, std::abs(e));
    }
    r.l2_gap.push_back(std::sqrt(l2));
    r.linf_gap.push_back(linf);
    if (k > 0) {
      double grad = 0.0;
      for (const Face& face : g.faces()) grad = std::max(grad, std::abs(face_gradient(g, face, f)));
      const double ratio = sup0 > 0.0 ? std::sqrt(traj.time(k)) * grad / sup0 : 0.0;
      r.gradient_ratio = std::max(r.gradient_ratio, ratio);
    }
  }
  r.gradient_bound_holds = r.gradient_ratio <= 1.0;

  const double floor = 1e-11 * std::max(1.0, sup0);
  r.l2_rate = fitted_rate(traj, r.l2_gap, floor);
  r.linf_rate = fitted_rate(traj, r.linf_gap, floor);
  return r;
}

HeatBound heat_then_transport_bound(const GridMeasure& mu0, const GridMeasure& mu1, const ActionDensity& phi,
                                    const HeatBoundConfig& cfg)
{
  if (phi.p() != 2.0) throw std::invalid_argument("heat_then_transport_bound: requires p = 2");
  if (!(mu0.reference() == mu1.reference())) {
    throw std::invalid_argument("heat_then_transport_bound: measures live on different references");
  }
  const double m0 = total_mass(mu0);
  const double m1 = total_mass(mu1);
  if (std::abs(m0 - m1) > 1e-10 * std::max({1.0, std::abs(m0), std::abs(m1)})) {
    throw std::invalid_argument("heat_then_transport_bound: masses differ");
  }
  const MobilitySpec& h = phi.mobility();
  for (const auto* mu : {&mu0, &mu1}) {
    for (double v : mu->density()) {
      if (!h.contains(v)) throw std::invalid_argument("heat_then_transport_bound: density outside [a, b]");
    }
  }

  const double a = h.lower();
  const double b = h.upper();
  const double rho_inf = weighted_mean(mu0.reference(), mu0.density());
  if (!(rho_inf > a && rho_inf < b)) {
    // The only admissible measures with this mean are constant at an endpoint.
    return HeatBound{0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  }
  const double m_prime = rho_inf + 0.5 * (b - rho_inf);
  auto below = [m_prime](std::span<const double> rho) {
    return std::all_of(rho.begin(), rho.end(), [m_prime](double v) { return v <= m_prime; });
  };

  const auto t0 = solve_neumann_heat_until(mu0, cfg.dt, cfg.t_max, below);
  const auto t1 = solve_neumann_heat_until(mu1, cfg.dt, cfg.t_max, below);
  if (!t0 || !t1) throw std::runtime_error("heat_then_transport_bound: smoothing did not reach M' before t_max");
  const int steps = std::max(t0->steps(), t1->steps());

  auto leg = [&](const GridMeasure& mu) -> std::pair<double, HeatTrajectory> {
    HeatTrajectory traj = march(mu, cfg.dt, steps);
    if (steps == 0) return {0.0, std::move(traj)};
    const double action = action_integral(traj.to_curve(), phi);
    return {std::sqrt(traj.horizon() * action), std::move(traj)};
  };
  const auto [leg0, traj0] = leg(mu0);
  const auto [leg1, traj1] = leg(mu1);

  auto shifted = [&](const HeatTrajectory& traj) {
    std::vector<double> rho = traj.frame(traj.steps());
    for (double& v : rho) v = std::max(v - a, 0.0);
    return GridMeasure(traj.reference(), std::move(rho));
  };
  const GridMeasure s0 = shifted(traj0);
  const GridMeasure s1 = shifted(traj1);
  double w2 = 0.0;
  if (mu0.grid().dim() == 1) {
    w2 = total_mass(s0) > 0.0 ? wasserstein_1d(s0, s1, 2.0) : 0.0;
  } else {
    w2 = mu0.grid().diameter() * std::sqrt(total_mass(s0));
  }
  const double c = comparison_constant(h, m_prime, 2.0);
  const double middle = c * w2;
  return HeatBound{leg0 + middle + leg1, steps * cfg.dt, leg0, middle, leg1, c};
}

void write_heat_csv(const std::filesystem::path& path, const HeatTrajectory& traj, const MobilitySpec& h)
{
  const DissipationReport diss = dissipation_report(traj, h);
  const DecayReport decay = decay_report(traj);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_heat_csv: cannot open " + path.string());
  out.precision(17);
  out << "t,l2_gap,linf_gap,entropy,dissipation\n";
  for (int k = 0; k <= traj.steps(); ++k) {
    out << traj.time(k) << ',' << decay.l2_gap[k] << ',' << decay.linf_gap[k] << ',' << diss.entropy[k] << ','
        << (k == 0 ? 0.0 : diss.dissipation[k - 1]) << '\n';
  }
}

}  // namespace gwd
