#include "gwd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace gwd {

double quadrature(const std::function<double(double)>& f, double lo, double hi, double tol)
{
  if (!(tol > 0.0)) throw std::invalid_argument("quadrature: tol must be positive");
  if (lo == hi) return 0.0;
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, lo, hi, 30, 0.1 * tol, &error, &l1);
  if (!std::isfinite(value) || error > tol * std::max(1.0, l1)) {
    throw std::runtime_error("quadrature: no convergence to the requested tolerance");
  }
  return value;
}

ReferenceMeasure TwoCellInstance::reference() const
{
  Grid g({Axis{0.0, 2.0 * cell_width, 2}});
  const double vol = g.cell_volume();
  return ReferenceMeasure::from_weights(std::move(g), {weight_left * vol, weight_right * vol});
}

GridMeasure TwoCellInstance::initial() const { return GridMeasure(reference(), {rho0.first, rho0.second}); }
GridMeasure TwoCellInstance::final() const { return GridMeasure(reference(), {rho1.first, rho1.second}); }

namespace {

struct ChainProblem {
  double gamma_left;
  double gamma_right;
  double gamma_face;
  double dx;
  double dt;
  double mass;
  double p;
  const MobilitySpec* h;

  double right(double left) const { return (mass - gamma_left * left) / gamma_right; }

  double step_cost(double x, double y) const
  {
    const double w = -gamma_left * (y - x) / (dt * gamma_face / dx);
    const double rho = 0.25 * (x + right(x) + y + right(y));
    const double hv = (*h)(rho);
    double phi = 0.0;
    if (hv == -std::numeric_limits<double>::infinity()) {
      phi = std::numeric_limits<double>::infinity();
    } else if (hv <= 0.0) {
      phi = w == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
      phi = p == 2.0 ? w * w / hv : std::pow(std::abs(w), p) / std::pow(hv, p - 1.0);
    }
    return dt * gamma_face * phi;
  }
};

// Exact minimum over paths restricted to the per-node candidate grids.
double chain_dp(const ChainProblem& pb, double start, double end, const std::vector<std::vector<double>>& grids,
                std::vector<double>& best_path)
{
  const std::size_t inner = grids.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> value(inner);
  std::vector<std::vector<std::size_t>> parent(inner);
  for (std::size_t k = 0; k < inner; ++k) {
    value[k].assign(grids[k].size(), inf);
    parent[k].assign(grids[k].size(), 0);
    for (std::size_t j = 0; j < grids[k].size(); ++j) {
      if (k == 0) {
        value[k][j] = pb.step_cost(start, grids[k][j]);
        continue;
      }
      for (std::size_t i = 0; i < grids[k - 1].size(); ++i) {
        const double v = value[k - 1][i] + pb.step_cost(grids[k - 1][i], grids[k][j]);
        if (v < value[k][j]) {
          value[k][j] = v;
          parent[k][j] = i;
        }
      }
    }
  }
  double total = inf;
  std::size_t arg = 0;
  for (std::size_t j = 0; j < grids[inner - 1].size(); ++j) {
    const double v = value[inner - 1][j] + pb.step_cost(grids[inner - 1][j], end);
    if (v < total) {
      total = v;
      arg = j;
    }
  }
  best_path.assign(inner, 0.0);
  for (std::size_t k = inner; k-- > 0;) {
    best_path[k] = grids[k][arg];
    arg = parent[k][arg];
  }
  return total;
}

std::vector<double> linspace(double lo, double hi, int n)
{
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace

double two_cell_exact(const TwoCellInstance& inst)
{
  if (inst.time_steps < 1) throw std::invalid_argument("two_cell_exact: need at least one time step");
  if (!(inst.p > 1.0)) throw std::invalid_argument("two_cell_exact: need p > 1");
  const auto& h = inst.mobility;
  for (double r : {inst.rho0.first, inst.rho0.second, inst.rho1.first, inst.rho1.second}) {
    if (!h.contains(r)) throw std::invalid_argument("two_cell_exact: density outside [a, b]");
  }
  const double dx = inst.cell_width;
  ChainProblem pb{inst.weight_left * dx,
                  inst.weight_right * dx,
                  0.0,
                  dx,
                  1.0 / inst.time_steps,
                  0.0,
                  inst.p,
                  &h};
  pb.gamma_face = 0.5 * (pb.gamma_left + pb.gamma_right);
  pb.mass = pb.gamma_left * inst.rho0.first + pb.gamma_right * inst.rho0.second;
  const double mass1 = pb.gamma_left * inst.rho1.first + pb.gamma_right * inst.rho1.second;
  if (std::abs(pb.mass - mass1) > 1e-10 * std::max(1.0, std::abs(pb.mass))) {
    throw std::invalid_argument("two_cell_exact: endpoint masses differ");
  }

  const double start = inst.rho0.first;
  const double end = inst.rho1.first;
  if (inst.time_steps == 1) return std::pow(pb.step_cost(start, end), 1.0 / inst.p);

  // Left densities that keep the right cell inside [a, b].
  const double lo = std::max(h.lower(), (pb.mass - pb.gamma_right * h.upper()) / pb.gamma_left);
  const double hi = std::min(h.upper(), (pb.mass - pb.gamma_right * h.lower()) / pb.gamma_left);

  const std::size_t inner = static_cast<std::size_t>(inst.time_steps - 1);
  std::vector<std::vector<double>> grids(inner, linspace(lo, hi, 2001));
  std::vector<double> path;
  double best = chain_dp(pb, start, end, grids, path);
  double spacing = (hi - lo) / 2000.0;

  while (spacing > 1e-13 * std::max(1.0, hi - lo)) {
    for (std::size_t k = 0; k < inner; ++k) {
      grids[k] = linspace(std::max(lo, path[k] - 10.0 * spacing), std::min(hi, path[k] + 10.0 * spacing), 101);
    }
    spacing *= 0.2;
    best = std::min(best, chain_dp(pb, start, end, grids, path));
  }
  return std::pow(best, 1.0 / inst.p);
}

}  // namespace gwd
