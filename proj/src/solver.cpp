#include "gwd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace gwd {

std::string to_string(SolverStatus status)
{
  switch (status) {
  case SolverStatus::converged: return "converged";
  case SolverStatus::max_iterations: return "max-iters";
  case SolverStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

nlohmann::json SolverConfig::to_json() const
{
  return {{"time_steps", time_steps},
          {"max_iterations", max_iterations},
          {"primal_step", primal_step},
          {"dual_step", dual_step},
          {"step_ratio", step_ratio},
          {"tolerance", tolerance},
          {"check_every", check_every},
          {"infeasibility_window", infeasibility_window},
          {"objective_cap", objective_cap},
          {"init", init == InitMode::linear_interpolation ? "linear-interpolation" : "given-curve"}};
}

SolverConfig SolverConfig::from_json(const nlohmann::json& j)
{
  SolverConfig c;
  c.time_steps = j.value("time_steps", c.time_steps);
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  c.primal_step = j.value("primal_step", c.primal_step);
  c.dual_step = j.value("dual_step", c.dual_step);
  c.step_ratio = j.value("step_ratio", c.step_ratio);
  c.tolerance = j.value("tolerance", c.tolerance);
  c.check_every = j.value("check_every", c.check_every);
  c.infeasibility_window = j.value("infeasibility_window", c.infeasibility_window);
  c.objective_cap = j.value("objective_cap", c.objective_cap);
  const std::string init = j.value("init", std::string("linear-interpolation"));
  if (init == "linear-interpolation") {
    c.init = InitMode::linear_interpolation;
  } else if (init == "given-curve") {
    c.init = InitMode::given_curve;
  } else {
    throw std::invalid_argument("solver config: unknown init mode " + init);
  }
  if (c.time_steps < 1 || c.max_iterations < 1 || c.check_every < 1) {
    throw std::invalid_argument("solver config: steps, iterations and check interval must be positive");
  }
  return c;
}

bool preflight_mass_check(const GridMeasure& mu0, const GridMeasure& mu1, const ReferenceMeasure& gamma, double)
{
  if (!(mu0.reference() == gamma) || !(mu1.reference() == gamma)) {
    throw std::invalid_argument("preflight_mass_check: measures must live on the given reference");
  }
  const double m0 = total_mass(mu0);
  const double m1 = total_mass(mu1);
  return std::abs(m0 - m1) <= 1e-10 * std::max({1.0, std::abs(m0), std::abs(m1)});
}

// ---------------------------------------------------------------------------
// Proximal map of the action density.

namespace {

struct ProxScalar {
  const ActionDensity& phi;
  double rho_t;
  double s;    // |w_t|
  double tau;

  // Minimizing momentum magnitude for a fixed density with mobility value hv.
  double momentum(double hv) const
  {
    if (!(hv > 0.0)) return 0.0;
    const double p = phi.p();
    if (p == 2.0) return s * hv / (hv + 2.0 * tau);
    // p t^{p-1} / hv^{p-1} + (t - s) / tau = 0 on [0, s]
    double lo = 0.0;
    double hi = s;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * s; ++it) {
      const double t = 0.5 * (lo + hi);
      const double g = p * std::pow(t / hv, p - 1.0) + (t - s) / tau;
      (g > 0.0 ? hi : lo) = t;
    }
    return 0.5 * (lo + hi);
  }

  // Derivative of the partially minimized objective (envelope theorem).
  double slope(double rho) const
  {
    const auto& h = phi.mobility();
    const double hv = h(rho);
    const double dh = h.derivative(rho);
    const double base = (rho - rho_t) / tau;
    if (phi.p() == 2.0) {
      const double den = hv + 2.0 * tau;
      if (dh == 0.0) return base;
      return base - s * s * dh / (den * den);
    }
    if (!(hv > 0.0)) {
      // limit of t^p / h^p at h -> 0
      const double ratio = std::pow(s / (phi.p() * tau), phi.q());
      if (dh == 0.0) return base;
      return base - (phi.p() - 1.0) * ratio * dh;
    }
    const double t = momentum(hv);
    if (t == 0.0 || dh == 0.0) return base;
    return base - (phi.p() - 1.0) * std::pow(t / hv, phi.p()) * dh;
  }
};

double solve_density(const ProxScalar& pr)
{
  const auto& h = pr.phi.mobility();
  const double a = h.lower();
  const double b = h.upper();
  if (pr.s == 0.0) return std::clamp(pr.rho_t, a, b);

  double lo = a;
  double hi = b;
  double glo = pr.slope(lo);
  double ghi = pr.slope(hi);
  if (glo >= 0.0) return a;
  if (ghi <= 0.0) return b;

  // Illinois regula falsi with a bisection fallback.
  int side = 0;
  const double tol = 1e-14 * (b - a);
  for (int it = 0; it < 300 && hi - lo > tol; ++it) {
    double x = 0.5 * (lo + hi);
    if (std::isfinite(glo) && std::isfinite(ghi) && (it % 8) != 7) {
      x = (lo * ghi - hi * glo) / (ghi - glo);
      if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    }
    const double g = pr.slope(x);
    if (g == 0.0) return x;
    if (g < 0.0) {
      lo = x;
      glo = g;
      if (side == -1) ghi *= 0.5;
      side = -1;
    } else {
      hi = x;
      ghi = g;
      if (side == 1) glo *= 0.5;
      side = 1;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::pair<double, double> prox_action_cell(double rho_t, double w_t, double tau, const ActionDensity& phi)
{
  if (!(tau > 0.0)) throw std::invalid_argument("prox_action_cell: tau must be positive");
  const ProxScalar pr{phi, rho_t, std::abs(w_t), tau};
  const double rho = solve_density(pr);
  const double t = pr.momentum(phi.mobility()(rho));
  return {rho, w_t < 0.0 ? -t : t};
}

CellProx prox_action_cell(double rho_t, std::span<const double> w_t, double tau, const ActionDensity& phi)
{
  double s = 0.0;
  for (double v : w_t) s += v * v;
  s = std::sqrt(s);
  const auto [rho, t] = prox_action_cell(rho_t, s, tau, phi);
  CellProx out{rho, std::vector<double>(w_t.begin(), w_t.end())};
  for (double& v : out.w) v = s > 0.0 ? v * (t / s) : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Discrete problem: unknown densities at interior time nodes and face momenta
// at every time midpoint, linked by the continuity equation.

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

class StaggeredProblem {
public:
  StaggeredProblem(const GridMeasure& mu0, const GridMeasure& mu1, int steps)
      : ref_(mu0.reference()), steps_(steps), dt_(1.0 / steps)
  {
    const Grid& g = ref_.grid();
    index_of_cell_.assign(g.cell_count(), -1);
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
      if (ref_.weight(i) > 0.0) {
        index_of_cell_[i] = static_cast<long>(cells_.size());
        cells_.push_back(i);
      }
    }
    for (std::size_t f = 0; f < g.faces().size(); ++f) {
      if (ref_.face_weight(g.faces()[f]) > 0.0) faces_.push_back(f);
    }
    for (std::size_t i : cells_) {
      rho0_.push_back(mu0[i]);
      rho1_.push_back(mu1[i]);
    }
    build_components();
    build_weights();
    build_constraints();
  }

  std::size_t n_cells() const { return cells_.size(); }
  std::size_t n_faces() const { return faces_.size(); }
  std::size_t n_rho() const { return static_cast<std::size_t>(steps_ - 1) * n_cells(); }
  std::size_t n_x() const { return n_rho() + static_cast<std::size_t>(steps_) * n_faces(); }
  std::size_t n_pairs() const { return static_cast<std::size_t>(steps_) * n_faces(); }

  bool components_balanced() const { return balanced_; }
  double weight_scale() const { return weight_scale_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& offsets() const { return offsets_; }

  // Density of active cell a at node k, reading x for interior nodes.
  double rho(const Vec& x, int k, std::size_t a) const
  {
    if (k == 0) return rho0_[a];
    if (k == steps_) return rho1_[a];
    return x[static_cast<Eigen::Index>((k - 1) * n_cells() + a)];
  }

  // V = K x (without the endpoint offsets): face densities then momenta.
  void apply_k(const Vec& x, Vec& v) const
  {
    const auto& fl = ref_.grid().faces();
    const std::size_t np = n_pairs();
    for (int k = 0; k < steps_; ++k) {
      for (std::size_t j = 0; j < n_faces(); ++j) {
        const Face& f = fl[faces_[j]];
        const auto lo = static_cast<std::size_t>(index_of_cell_[f.lo]);
        const auto hi = static_cast<std::size_t>(index_of_cell_[f.hi]);
        double acc = 0.0;
        if (k >= 1) acc += x[idx_rho(k, lo)] + x[idx_rho(k, hi)];
        if (k + 1 <= steps_ - 1) acc += x[idx_rho(k + 1, lo)] + x[idx_rho(k + 1, hi)];
        const std::size_t p = k * n_faces() + j;
        v[static_cast<Eigen::Index>(p)] = 0.25 * acc;
        v[static_cast<Eigen::Index>(np + p)] = x[idx_w(k, j)];
      }
    }
  }

  void apply_kt(const Vec& v, Vec& x) const
  {
    x.setZero();
    const auto& fl = ref_.grid().faces();
    const std::size_t np = n_pairs();
    for (int k = 0; k < steps_; ++k) {
      for (std::size_t j = 0; j < n_faces(); ++j) {
        const Face& f = fl[faces_[j]];
        const auto lo = static_cast<std::size_t>(index_of_cell_[f.lo]);
        const auto hi = static_cast<std::size_t>(index_of_cell_[f.hi]);
        const std::size_t p = k * n_faces() + j;
        const double r = 0.25 * v[static_cast<Eigen::Index>(p)];
        if (k >= 1) {
          x[idx_rho(k, lo)] += r;
          x[idx_rho(k, hi)] += r;
        }
        if (k + 1 <= steps_ - 1) {
          x[idx_rho(k + 1, lo)] += r;
          x[idx_rho(k + 1, hi)] += r;
        }
        x[idx_w(k, j)] += v[static_cast<Eigen::Index>(np + p)];
      }
    }
  }

  void project(Vec& x) const
  {
    if (a_.rows() == 0) return;
    const Vec r = a_ * x - b_;
    const Vec lambda = aat_.solve(r);
    x -= a_.transpose() * lambda;
  }

  Vec linear_start() const
  {
    Vec x = Vec::Zero(static_cast<Eigen::Index>(n_x()));
    for (int k = 1; k < steps_; ++k) {
      const double t = static_cast<double>(k) / steps_;
      for (std::size_t a = 0; a < n_cells(); ++a) x[idx_rho(k, a)] = (1.0 - t) * rho0_[a] + t * rho1_[a];
    }
    return x;
  }

  Vec from_curve(const TransportCurve& c) const
  {
    if (c.steps() != steps_ || !(c.reference() == ref_)) {
      throw std::invalid_argument("compute_distance: initial curve does not match the problem");
    }
    Vec x = Vec::Zero(static_cast<Eigen::Index>(n_x()));
    for (int k = 1; k < steps_; ++k) {
      const auto d = c.density(k);
      for (std::size_t a = 0; a < n_cells(); ++a) x[idx_rho(k, a)] = d[cells_[a]];
    }
    for (int k = 0; k < steps_; ++k) {
      const auto w = c.momentum(k);
      for (std::size_t j = 0; j < n_faces(); ++j) x[idx_w(k, j)] = w[faces_[j]];
    }
    return x;
  }

  TransportCurve to_curve(const Vec& x) const
  {
    const Grid& g = ref_.grid();
    std::vector<double> dens(static_cast<std::size_t>(steps_ + 1) * g.cell_count(), 0.0);
    for (int k = 0; k <= steps_; ++k) {
      for (std::size_t a = 0; a < n_cells(); ++a) dens[k * g.cell_count() + cells_[a]] = rho(x, k, a);
    }
    std::vector<double> mom(static_cast<std::size_t>(steps_) * g.faces().size(), 0.0);
    for (int k = 0; k < steps_; ++k) {
      for (std::size_t j = 0; j < n_faces(); ++j) mom[k * g.faces().size() + faces_[j]] = x[idx_w(k, j)];
    }
    return TransportCurve(ref_, 1.0, std::move(dens), std::move(mom));
  }

private:
  Eigen::Index idx_rho(int k, std::size_t a) const { return static_cast<Eigen::Index>((k - 1) * n_cells() + a); }
  Eigen::Index idx_w(int k, std::size_t j) const
  {
    return static_cast<Eigen::Index>(n_rho() + k * n_faces() + j);
  }

  void build_components()
  {
    std::vector<std::size_t> parent(n_cells());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t u) {
      while (parent[u] != u) u = parent[u] = parent[parent[u]];
      return u;
    };
    const auto& fl = ref_.grid().faces();
    for (std::size_t f : faces_) {
      const auto u = find(static_cast<std::size_t>(index_of_cell_[fl[f].lo]));
      const auto v = find(static_cast<std::size_t>(index_of_cell_[fl[f].hi]));
      if (u != v) parent[u] = v;
    }
    component_.resize(n_cells());
    std::vector<double> gap(n_cells(), 0.0);
    std::vector<double> scale(n_cells(), 0.0);
    for (std::size_t a = 0; a < n_cells(); ++a) {
      component_[a] = find(a);
      const double w = ref_.weight(cells_[a]);
      gap[component_[a]] += w * (rho0_[a] - rho1_[a]);
      scale[component_[a]] += w * (std::abs(rho0_[a]) + std::abs(rho1_[a]));
    }
    balanced_ = true;
    for (std::size_t a = 0; a < n_cells(); ++a) {
      if (component_[a] == a && std::abs(gap[a]) > 1e-10 * std::max(1.0, scale[a])) balanced_ = false;
    }
  }

  void build_weights()
  {
    const auto& fl = ref_.grid().faces();
    weights_.resize(n_pairs());
    offsets_.assign(n_pairs(), 0.0);
    double mean = 0.0;
    for (int k = 0; k < steps_; ++k) {
      for (std::size_t j = 0; j < n_faces(); ++j) {
        const Face& f = fl[faces_[j]];
        const std::size_t p = k * n_faces() + j;
        weights_[p] = dt_ * ref_.face_weight(f);
        mean += weights_[p];
        const auto lo = static_cast<std::size_t>(index_of_cell_[f.lo]);
        const auto hi = static_cast<std::size_t>(index_of_cell_[f.hi]);
        if (k == 0) offsets_[p] += 0.25 * (rho0_[lo] + rho0_[hi]);
        if (k + 1 == steps_) offsets_[p] += 0.25 * (rho1_[lo] + rho1_[hi]);
      }
    }
    weight_scale_ = n_pairs() > 0 ? mean / static_cast<double>(n_pairs()) : 1.0;
    for (double& w : weights_) w /= weight_scale_;
  }

  void build_constraints()
  {
    const auto& fl = ref_.grid().faces();
    // For each active cell, the open faces it touches with their signed coefficient.
    std::vector<std::vector<std::pair<std::size_t, double>>> touching(n_cells());
    for (std::size_t j = 0; j < n_faces(); ++j) {
      const Face& f = fl[faces_[j]];
      const double area = ref_.face_weight(f) / ref_.grid().axis(f.axis).spacing();
      touching[static_cast<std::size_t>(index_of_cell_[f.lo])].push_back({j, area});
      touching[static_cast<std::size_t>(index_of_cell_[f.hi])].push_back({j, -area});
    }
    // The last cell of every connected component at the last step is implied
    // by the others once the component masses agree.
    std::vector<bool> dropped(n_cells(), false);
    {
      std::vector<long> last(n_cells(), -1);
      for (std::size_t a = 0; a < n_cells(); ++a) last[component_[a]] = static_cast<long>(a);
      for (std::size_t a = 0; a < n_cells(); ++a) {
        if (last[a] >= 0) dropped[static_cast<std::size_t>(last[a])] = true;
      }
    }

    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> rhs;
    Eigen::Index row = 0;
    for (int k = 0; k < steps_; ++k) {
      for (std::size_t a = 0; a < n_cells(); ++a) {
        if (k + 1 == steps_ && dropped[a]) continue;
        double b = 0.0;
        if (k + 1 <= steps_ - 1) {
          trip.emplace_back(row, idx_rho(k + 1, a), 1.0);
        } else {
          b -= rho1_[a];
        }
        if (k >= 1) {
          trip.emplace_back(row, idx_rho(k, a), -1.0);
        } else {
          b += rho0_[a];
        }
        const double scale = dt_ / ref_.weight(cells_[a]);
        for (const auto& [j, coef] : touching[a]) trip.emplace_back(row, idx_w(k, j), scale * coef);
        rhs.push_back(b);
        ++row;
      }
    }
    a_.resize(row, static_cast<Eigen::Index>(n_x()));
    a_.setFromTriplets(trip.begin(), trip.end());
    b_ = Eigen::Map<Vec>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    if (row > 0) {
      SpMat aat = a_ * a_.transpose();
      aat_.compute(aat);
      if (aat_.info() != Eigen::Success) throw std::runtime_error("compute_distance: constraint factorization failed");
    }
  }

  ReferenceMeasure ref_;
  int steps_;
  double dt_;
  std::vector<long> index_of_cell_;
  std::vector<std::size_t> cells_;
  std::vector<std::size_t> faces_;
  std::vector<double> rho0_;
  std::vector<double> rho1_;
  std::vector<std::size_t> component_;
  bool balanced_ = true;
  std::vector<double> weights_;
  std::vector<double> offsets_;
  double weight_scale_ = 1.0;
  SpMat a_;
  Vec b_;
  Eigen::SimplicialLDLT<SpMat> aat_;
};

double operator_norm(const StaggeredProblem& pb)
{
  Vec x = Vec::Ones(static_cast<Eigen::Index>(pb.n_x()));
  Vec v(static_cast<Eigen::Index>(2 * pb.n_pairs()));
  Vec y(static_cast<Eigen::Index>(pb.n_x()));
  double lambda = 0.0;
  for (int it = 0; it < 50; ++it) {
    const double n = x.norm();
    if (n == 0.0) return 1.0;
    x /= n;
    pb.apply_k(x, v);
    pb.apply_kt(v, y);
    lambda = x.dot(y);
    x = y;
  }
  return std::sqrt(std::max(lambda, 1e-300));
}

void check_inputs(const GridMeasure& mu0, const GridMeasure& mu1, const ActionDensity& phi)
{
  if (!(mu0.reference() == mu1.reference())) {
    throw std::invalid_argument("compute_distance: measures live on different grids or references");
  }
  const auto& h = phi.mobility();
  for (const auto* mu : {&mu0, &mu1}) {
    for (std::size_t i = 0; i < mu->grid().cell_count(); ++i) {
      if (mu->reference().weight(i) > 0.0 && !h.contains((*mu)[i])) {
        throw std::invalid_argument("compute_distance: density outside the mobility domain [a, b]");
      }
    }
  }
}

}  // namespace

SolverResult compute_distance(const GridMeasure& mu0, const GridMeasure& mu1, const ActionDensity& phi,
                              const SolverConfig& cfg)
{
  check_inputs(mu0, mu1, phi);
  if (cfg.time_steps < 1) throw std::invalid_argument("compute_distance: need at least one time step");

  const double mass_gap = std::abs(total_mass(mu0) - total_mass(mu1));
  const StaggeredProblem pb(mu0, mu1, cfg.time_steps);

  auto infeasible_result = [&](int iterations) {
    std::vector<double> dens(mu0.density().begin(), mu0.density().end());
    dens.insert(dens.end(), mu1.density().begin(), mu1.density().end());
    TransportCurve endpoints(mu0.reference(), 1.0, std::move(dens),
                             std::vector<double>(mu0.grid().faces().size(), 0.0));
    return SolverResult{.distance = kInfinity,
                        .action = kInfinity,
                        .geodesic = std::move(endpoints),
                        .iterations = iterations,
                        .residual = kInfinity,
                        .mass_gap = mass_gap,
                        .ce_residual = kInfinity,
                        .step_norm = 0.0,
                        .status = SolverStatus::infeasible};
  };

  if (!preflight_mass_check(mu0, mu1, mu0.reference(), phi.q()) || !pb.components_balanced()) {
    return infeasible_result(0);
  }

  Vec x = cfg.init == InitMode::given_curve && cfg.initial_curve ? pb.from_curve(*cfg.initial_curve)
                                                                   : pb.linear_start();
  pb.project(x);

  const double knorm = operator_norm(pb);
  double tau = cfg.primal_step;
  double sigma = cfg.dual_step;
  if (!(tau > 0.0) || !(sigma > 0.0)) {
    const double ratio = cfg.step_ratio > 0.0 ? cfg.step_ratio : 1.0;
    tau = std::sqrt(0.99 / ratio) / knorm;
    sigma = ratio * tau;
  }

  const std::size_t np = pb.n_pairs();
  const auto& weights = pb.weights();
  const auto& offsets = pb.offsets();
  Vec y = Vec::Zero(static_cast<Eigen::Index>(2 * np));
  Vec xbar = x;
  Vec kx(static_cast<Eigen::Index>(2 * np));
  Vec z(static_cast<Eigen::Index>(2 * np));
  Vec ktY(static_cast<Eigen::Index>(pb.n_x()));
  Vec x_prev(static_cast<Eigen::Index>(pb.n_x()));

  auto objective = [&](const Vec& xs) {
    return action_integral(pb.to_curve(xs), phi);
  };
  // Action read off the dual-side point z, which always lies in the domain of
  // phi. Primal iterates can sit a roundoff below a with a roundoff flux.
  auto split_objective = [&](const Vec& zs) {
    double total = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
      const auto ip = static_cast<Eigen::Index>(p);
      total += weights[p] * eval_action(phi, zs[ip] + offsets[p], zs[static_cast<Eigen::Index>(np + p)]);
    }
    return total * pb.weight_scale();
  };
  double split_action = kInfinity;

  SolverStatus status = SolverStatus::max_iterations;
  double residual = kInfinity;
  int iterations = 0;
  int bad_streak = 0;
  double residual_at_streak_start = kInfinity;

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    iterations = it;
    // Dual step: prox of sigma F* through Moreau's identity.
    pb.apply_k(xbar, kx);
    for (std::size_t p = 0; p < np; ++p) {
      const auto ir = static_cast<Eigen::Index>(p);
      const auto iw = static_cast<Eigen::Index>(np + p);
      const double vr = y[ir] + sigma * kx[ir];
      const double vw = y[iw] + sigma * kx[iw];
      const auto [r, w] = prox_action_cell(vr / sigma + offsets[p], vw / sigma, weights[p] / sigma, phi);
      z[ir] = r - offsets[p];
      z[iw] = w;
      y[ir] = vr - sigma * z[ir];
      y[iw] = vw - sigma * z[iw];
    }
    // Primal step: projection onto the continuity-equation constraint.
    x_prev = x;
    pb.apply_kt(y, ktY);
    x -= tau * ktY;
    pb.project(x);
    xbar = 2.0 * x - x_prev;

    if (it % cfg.check_every != 0 && it != cfg.max_iterations) continue;
    pb.apply_k(x, kx);
    const double change = (x - x_prev).lpNorm<Eigen::Infinity>();
    const double gap = (kx - z).lpNorm<Eigen::Infinity>();
    residual = std::max(change, gap) / std::max(1.0, x.lpNorm<Eigen::Infinity>());

    const double obj = objective(x);
    if (!(obj <= cfg.objective_cap)) {
      if (bad_streak == 0) residual_at_streak_start = residual;
      bad_streak += cfg.check_every;
      if (bad_streak >= cfg.infeasibility_window && residual > 0.5 * residual_at_streak_start) {
        return infeasible_result(it);
      }
    } else {
      bad_streak = 0;
    }
    if (residual <= cfg.tolerance) {
      split_action = split_objective(z);
      if (obj <= cfg.objective_cap || split_action <= cfg.objective_cap) {
        status = SolverStatus::converged;
        break;
      }
    }
  }

  TransportCurve geodesic = pb.to_curve(x);
  double action = action_integral(geodesic, phi);
  if (!(action <= cfg.objective_cap)) {
    action = status == SolverStatus::converged ? split_action : split_objective(z);
    if (!(action <= cfg.objective_cap)) return infeasible_result(iterations);
  }
  const double ce = ce_residual(geodesic);
  return SolverResult{.distance = std::pow(action, 1.0 / phi.p()),
                      .action = action,
                      .geodesic = std::move(geodesic),
                      .iterations = iterations,
                      .residual = residual,
                      .mass_gap = mass_gap,
                      .ce_residual = ce,
                      .step_norm = knorm,
                      .status = status};
}

std::vector<double> geodesic_speed_profile(const SolverResult& result, const ActionDensity& phi,
                                           const std::vector<double>& fractions, const SolverConfig& cfg)
{
  if (result.status != SolverStatus::converged) {
    throw std::invalid_argument("geodesic_speed_profile: needs a converged result");
  }
  const TransportCurve& c = result.geodesic;
  const GridMeasure mu0 = c.initial();
  std::vector<double> out;
  for (double s : fractions) {
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("geodesic_speed_profile: fractions must lie in [0, 1]");
    if (s == 0.0 || result.distance == 0.0) {
      out.push_back(1.0);
      continue;
    }
    const double pos = s * c.steps();
    const int k = std::min(static_cast<int>(std::floor(pos)), c.steps() - 1);
    const double frac = pos - k;
    const auto d0 = c.density(k);
    const auto d1 = c.density(k + 1);
    std::vector<double> mid(d0.size());
    for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = (1.0 - frac) * d0[i] + frac * d1[i];
    const GridMeasure mu_s(c.reference(), std::move(mid));
    const SolverResult part = compute_distance(mu0, mu_s, phi, cfg);
    out.push_back(part.distance / (s * result.distance));
  }
  return out;
}

nlohmann::json diagnostics_json(const SolverResult& r)
{
  nlohmann::json j;
  j["distance"] = std::isfinite(r.distance) ? nlohmann::json(r.distance) : nlohmann::json("inf");
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  j["residual"] = std::isfinite(r.residual) ? nlohmann::json(r.residual) : nlohmann::json(nullptr);
  j["mass_gap"] = r.mass_gap;
  return j;
}

}  // namespace gwd
