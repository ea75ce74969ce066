#include "gwd/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gwd {

GridMeasure InstanceGenerator::smooth_density(const ReferenceMeasure& reference, double mean, double amplitude,
                                              int modes)
{
  if (modes < 1) throw std::invalid_argument("smooth_density: need at least one mode");
  const Grid& g = reference.grid();
  struct Mode {
    std::array<int, 3> k;
    double coef;
  };
  std::vector<Mode> terms;
  for (int m = 0; m < modes; ++m) {
    Mode t{{0, 0, 0}, uniform(-1.0, 1.0)};
    for (int ax = 0; ax < g.dim(); ++ax) t.k[ax] = std::uniform_int_distribution<int>(0, 3)(rng_);
    if (t.k[0] + t.k[1] + t.k[2] == 0) t.k[0] = 1;
    terms.push_back(t);
  }
  std::vector<double> gval(g.cell_count(), 0.0);
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const Point x = g.center(i);
    for (const Mode& t : terms) {
      double v = t.coef;
      for (int ax = 0; ax < g.dim(); ++ax) {
        const Axis& a = g.axis(ax);
        v *= std::cos(std::numbers::pi * t.k[ax] * (x[ax] - a.lo) / (a.hi - a.lo));
      }
      gval[i] += v;
    }
  }
  double mass = 0.0;
  double vol = 0.0;
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    mass += reference.weight(i) * gval[i];
    vol += reference.weight(i);
  }
  const double shift = mass / vol;
  double peak = 0.0;
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    if (reference.weight(i) > 0.0) peak = std::max(peak, std::abs(gval[i] - shift));
  }
  std::vector<double> rho(g.cell_count());
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    rho[i] = mean + (peak > 0.0 ? amplitude * (gval[i] - shift) / peak : 0.0);
  }
  return GridMeasure(reference, std::move(rho));
}

GridMeasure InstanceGenerator::rough_density(const ReferenceMeasure& reference, double lo, double hi)
{
  std::vector<double> rho(reference.grid().cell_count());
  for (double& v : rho) v = uniform(lo, hi);
  return GridMeasure(reference, std::move(rho));
}

TwoCellInstance InstanceGenerator::two_cell(int time_steps, double margin)
{
  TwoCellInstance inst{{0.0, 0.0}, {0.0, 0.0}};
  inst.time_steps = time_steps;
  inst.weight_left = uniform(0.5, 1.5);
  inst.weight_right = uniform(0.5, 1.5);
  const double lo = margin;
  const double hi = 1.0 - margin;
  inst.rho0 = {uniform(lo, hi), uniform(lo, hi)};
  const double mass = inst.weight_left * inst.rho0.first + inst.weight_right * inst.rho0.second;
  // Left densities of the target that keep the right one inside [lo, hi].
  const double left_lo = std::max(lo, (mass - inst.weight_right * hi) / inst.weight_left);
  const double left_hi = std::min(hi, (mass - inst.weight_right * lo) / inst.weight_left);
  const double left = uniform(left_lo, left_hi);
  inst.rho1 = {left, (mass - inst.weight_left * left) / inst.weight_right};
  return inst;
}

}  // namespace gwd
