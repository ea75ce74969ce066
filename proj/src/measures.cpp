#include "gwd/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gwd {

Grid::Grid(std::vector<Axis> axes) : axes_(std::move(axes))
{
  if (axes_.empty() || axes_.size() > 3) throw std::invalid_argument("grid: dimension must be 1, 2 or 3");
  cell_count_ = 1;
  cell_volume_ = 1.0;
  for (const auto& ax : axes_) {
    if (!(ax.lo < ax.hi) || ax.cells < 1) throw std::invalid_argument("grid: need lo < hi and cells >= 1");
    cell_count_ *= static_cast<std::size_t>(ax.cells);
    cell_volume_ *= ax.spacing();
  }
  std::size_t stride = 1;
  for (int k = dim() - 1; k >= 0; --k) {
    strides_[k] = stride;
    stride *= static_cast<std::size_t>(axes_[k].cells);
  }
  for (int k = 0; k < dim(); ++k) {
    for (std::size_t c = 0; c < cell_count_; ++c) {
      if (coords(c)[k] + 1 < axes_[k].cells) faces_.push_back({c, c + strides_[k], k});
    }
  }
}

Grid Grid::uniform(int d, double lo, double hi, int cells)
{
  return Grid(std::vector<Axis>(static_cast<std::size_t>(d), Axis{lo, hi, cells}));
}

double Grid::box_volume() const
{
  double v = 1.0;
  for (const auto& ax : axes_) v *= ax.hi - ax.lo;
  return v;
}

double Grid::diameter() const
{
  double s = 0.0;
  for (const auto& ax : axes_) s += (ax.hi - ax.lo) * (ax.hi - ax.lo);
  return std::sqrt(s);
}

std::array<int, 3> Grid::coords(std::size_t cell) const
{
  std::array<int, 3> c{0, 0, 0};
  for (int k = 0; k < dim(); ++k) {
    c[k] = static_cast<int>(cell / strides_[k]);
    cell %= strides_[k];
  }
  return c;
}

std::size_t Grid::index(const std::array<int, 3>& c) const
{
  std::size_t i = 0;
  for (int k = 0; k < dim(); ++k) i += static_cast<std::size_t>(c[k]) * strides_[k];
  return i;
}

Point Grid::center(std::size_t cell) const
{
  const auto c = coords(cell);
  Point x{0.0, 0.0, 0.0};
  for (int k = 0; k < dim(); ++k) x[k] = axes_[k].lo + (c[k] + 0.5) * axes_[k].spacing();
  return x;
}

bool Grid::contains(const Point& x, double slack) const
{
  for (int k = 0; k < dim(); ++k) {
    if (x[k] < axes_[k].lo - slack || x[k] > axes_[k].hi + slack) return false;
  }
  return true;
}

long Grid::locate(const Point& x) const
{
  if (!contains(x)) return -1;
  std::array<int, 3> c{0, 0, 0};
  for (int k = 0; k < dim(); ++k) {
    const auto& ax = axes_[k];
    c[k] = std::clamp(static_cast<int>(std::floor((x[k] - ax.lo) / ax.spacing())), 0, ax.cells - 1);
  }
  return static_cast<long>(index(c));
}

ReferenceMeasure::ReferenceMeasure(Grid grid, std::vector<double> weights, ReferenceKind kind)
    : grid_(std::move(grid)), weights_(std::move(weights)), kind_(kind)
{
  if (weights_.size() != grid_.cell_count()) throw std::invalid_argument("reference: weight count mismatch");
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("reference: weights must be finite and >= 0");
  }
}

ReferenceMeasure ReferenceMeasure::lebesgue(Grid grid)
{
  std::vector<double> w(grid.cell_count(), grid.cell_volume());
  return ReferenceMeasure(std::move(grid), std::move(w), ReferenceKind::lebesgue);
}

ReferenceMeasure ReferenceMeasure::masked(Grid grid, const std::vector<bool>& active)
{
  if (active.size() != grid.cell_count()) throw std::invalid_argument("reference: mask size mismatch");
  std::vector<double> w(grid.cell_count());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = active[i] ? grid.cell_volume() : 0.0;
  return ReferenceMeasure(std::move(grid), std::move(w), ReferenceKind::masked);
}

ReferenceMeasure ReferenceMeasure::gibbs(Grid grid, const std::function<double(const Point&)>& potential)
{
  std::vector<double> w(grid.cell_count());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(-potential(grid.center(i))) * grid.cell_volume();
  return ReferenceMeasure(std::move(grid), std::move(w), ReferenceKind::gibbs);
}

ReferenceMeasure ReferenceMeasure::from_weights(Grid grid, std::vector<double> weights)
{
  const double vol = grid.cell_volume();
  bool uniform = true;
  bool mask = true;
  for (double w : weights) {
    uniform = uniform && w == vol;
    mask = mask && (w == vol || w == 0.0);
  }
  const auto kind = uniform ? ReferenceKind::lebesgue : (mask ? ReferenceKind::masked : ReferenceKind::gibbs);
  return ReferenceMeasure(std::move(grid), std::move(weights), kind);
}

double ReferenceMeasure::face_weight(const Face& f) const
{
  const double wl = weights_[f.lo];
  const double wh = weights_[f.hi];
  if (wl == 0.0 || wh == 0.0) return 0.0;
  return 0.5 * (wl + wh);
}

GridMeasure::GridMeasure(ReferenceMeasure reference, std::vector<double> density)
    : reference_(std::move(reference)), density_(std::move(density))
{
  if (density_.size() != reference_.grid().cell_count()) {
    throw std::invalid_argument("grid measure: density size does not match the grid");
  }
  for (std::size_t i = 0; i < density_.size(); ++i) {
    if (!std::isfinite(density_[i])) throw std::invalid_argument("grid measure: densities must be finite");
    if (reference_.weight(i) == 0.0) density_[i] = 0.0;
  }
}

GridMeasure GridMeasure::from_function(ReferenceMeasure reference, const std::function<double(const Point&)>& rho)
{
  std::vector<double> d(reference.grid().cell_count());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = rho(reference.grid().center(i));
  return GridMeasure(std::move(reference), std::move(d));
}

GridMeasure GridMeasure::constant(ReferenceMeasure reference, double value)
{
  std::vector<double> d(reference.grid().cell_count(), value);
  return GridMeasure(std::move(reference), std::move(d));
}

double GridMeasure::min_density() const { return *std::min_element(density_.begin(), density_.end()); }
double GridMeasure::max_density() const { return *std::max_element(density_.begin(), density_.end()); }

double GridMeasure::density_at(const Point& x) const
{
  const long c = grid().locate(x);
  return c < 0 ? 0.0 : density_[static_cast<std::size_t>(c)];
}

double GridMeasure::interpolate(const Point& x) const
{
  const Grid& g = grid();
  if (!g.contains(x)) return 0.0;
  std::array<int, 3> base{0, 0, 0};
  std::array<double, 3> frac{0.0, 0.0, 0.0};
  for (int k = 0; k < g.dim(); ++k) {
    const auto& ax = g.axis(k);
    const double s = std::clamp((x[k] - ax.lo) / ax.spacing() - 0.5, 0.0, ax.cells - 1.0);
    base[k] = std::min(static_cast<int>(s), std::max(ax.cells - 2, 0));
    frac[k] = ax.cells == 1 ? 0.0 : s - base[k];
  }
  double value = 0.0;
  const int corners = 1 << g.dim();
  for (int m = 0; m < corners; ++m) {
    double wgt = 1.0;
    std::array<int, 3> c = base;
    for (int k = 0; k < g.dim(); ++k) {
      const bool up = (m >> k) & 1;
      if (up && g.axis(k).cells == 1) {
        wgt = 0.0;
        break;
      }
      c[k] += up ? 1 : 0;
      wgt *= up ? frac[k] : 1.0 - frac[k];
    }
    if (wgt != 0.0) value += wgt * density_[g.index(c)];
  }
  return value;
}

double total_mass(const GridMeasure& mu)
{
  double m = 0.0;
  const auto w = mu.reference().weights();
  for (std::size_t i = 0; i < w.size(); ++i) m += mu[i] * w[i];
  return m;
}

namespace {

double moment_sum(const Grid& g, std::span<const double> cell_mass, double r)
{
  double m = 0.0;
  for (std::size_t i = 0; i < cell_mass.size(); ++i) {
    const Point x = g.center(i);
    const double n = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    m += (n <= 1.0 ? 1.0 : std::pow(n, r)) * cell_mass[i];
  }
  return m;
}

}  // namespace

double generalized_moment(const GridMeasure& nu, double r)
{
  std::vector<double> mass(nu.grid().cell_count());
  for (std::size_t i = 0; i < mass.size(); ++i) mass[i] = std::abs(nu[i]) * nu.reference().weight(i);
  return moment_sum(nu.grid(), mass, r);
}

double generalized_moment(const ReferenceMeasure& gamma, double r)
{
  return moment_sum(gamma.grid(), gamma.weights(), r);
}

namespace {

void require_lebesgue(const GridMeasure& mu, const char* what)
{
  if (mu.reference().kind() != ReferenceKind::lebesgue) {
    throw std::invalid_argument(std::string(what) + ": requires a Lebesgue reference");
  }
}

GridMeasure sample_push_forward(const GridMeasure& mu, double scale, const Point& shift, Grid target)
{
  const int d = mu.grid().dim();
  const double jac = std::pow(std::abs(scale), d);
  auto ref = ReferenceMeasure::lebesgue(std::move(target));
  return GridMeasure::from_function(std::move(ref), [&](const Point& y) {
    Point x{0.0, 0.0, 0.0};
    for (int k = 0; k < d; ++k) x[k] = (y[k] - shift[k]) / scale;
    return mu.density_at(x) / jac;
  });
}

}  // namespace

GridMeasure push_forward_affine(const GridMeasure& mu, double scale, const Point& shift)
{
  require_lebesgue(mu, "push_forward_affine");
  if (scale == 0.0 || !std::isfinite(scale)) throw std::invalid_argument("push_forward_affine: scale must be nonzero");
  std::vector<Axis> axes;
  for (const auto& ax : mu.grid().axes()) {
    double lo = scale * ax.lo + shift[axes.size()];
    double hi = scale * ax.hi + shift[axes.size()];
    if (lo > hi) std::swap(lo, hi);
    axes.push_back({lo, hi, ax.cells});
  }
  return sample_push_forward(mu, scale, shift, Grid(std::move(axes)));
}

GridMeasure push_forward_affine(const GridMeasure& mu, double scale, const Point& shift, const Grid& target)
{
  require_lebesgue(mu, "push_forward_affine");
  if (scale == 0.0 || !std::isfinite(scale)) throw std::invalid_argument("push_forward_affine: scale must be nonzero");
  if (target.dim() != mu.grid().dim()) throw std::invalid_argument("push_forward_affine: dimension mismatch");
  const Grid& g = mu.grid();
  const double slack = 1e-12 * target.diameter();
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    if (mu[i] == 0.0) continue;
    const Point c = g.center(i);
    for (int m = 0; m < (1 << g.dim()); ++m) {
      Point y{0.0, 0.0, 0.0};
      for (int k = 0; k < g.dim(); ++k) {
        const double half = 0.5 * g.axis(k).spacing() * (((m >> k) & 1) ? 1.0 : -1.0);
        y[k] = scale * (c[k] + half) + shift[k];
      }
      if (!target.contains(y, slack)) {
        throw std::out_of_range("push_forward_affine: image of the support leaves the target grid");
      }
    }
  }
  return sample_push_forward(mu, scale, shift, target);
}

namespace {

std::vector<double> bump_weights(double spacing, double eps)
{
  const int radius = static_cast<int>(std::ceil(eps / spacing));
  std::vector<double> k(2 * radius + 1, 0.0);
  double total = 0.0;
  for (int m = -radius; m <= radius; ++m) {
    const double s = m * spacing / eps;
    const double v = std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
    k[m + radius] = v;
    total += v;
  }
  for (double& v : k) v /= total;
  return k;
}

int mirror(int j, int n)
{
  if (j < 0) return -1 - j;
  if (j >= n) return 2 * n - 1 - j;
  return j;
}

}  // namespace

GridMeasure mollify(const GridMeasure& mu, double eps)
{
  if (!(eps > 0.0)) throw std::invalid_argument("mollify: eps must be positive");
  const Grid& g = mu.grid();
  const auto& ref = mu.reference();
  if (ref.kind() == ReferenceKind::masked) throw std::invalid_argument("mollify: masked references are not supported");
  for (const auto& ax : g.axes()) {
    if (eps > ax.hi - ax.lo) throw std::invalid_argument("mollify: kernel wider than the box");
  }

  // Convolve the Lebesgue density of mu; each 1D mirror convolution is a
  // symmetric doubly-stochastic operator.
  std::vector<double> field(g.cell_count());
  for (std::size_t i = 0; i < field.size(); ++i) field[i] = mu[i] * ref.weight(i) / g.cell_volume();

  std::vector<double> next(field.size());
  for (int k = 0; k < g.dim(); ++k) {
    const int n = g.axis(k).cells;
    const auto kernel = bump_weights(g.axis(k).spacing(), eps);
    const int radius = static_cast<int>(kernel.size() / 2);
    for (std::size_t c = 0; c < field.size(); ++c) {
      auto coord = g.coords(c);
      const int i = coord[k];
      double acc = 0.0;
      for (int m = -radius; m <= radius; ++m) {
        coord[k] = mirror(i + m, n);
        acc += kernel[m + radius] * field[g.index(coord)];
      }
      next[c] = acc;
    }
    field.swap(next);
  }

  for (std::size_t i = 0; i < field.size(); ++i) field[i] *= g.cell_volume() / ref.weight(i);
  return GridMeasure(ref, std::move(field));
}

}  // namespace gwd
