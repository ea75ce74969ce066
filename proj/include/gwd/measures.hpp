#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gwd {

struct Axis {
  double lo;
  double hi;
  int cells;

  double spacing() const { return (hi - lo) / cells; }
  bool operator==(const Axis&) const = default;
};

/// Interior face between two neighbouring cells; `lo` is the cell with the
/// smaller coordinate along `axis`. Positive momentum flows from lo to hi.
struct Face {
  std::size_t lo;
  std::size_t hi;
  int axis;
};

using Point = std::array<double, 3>;

/// Axis-aligned box split into a uniform cell grid, 1 <= d <= 3. Cells are
/// stored row-major: the last axis varies fastest.
class Grid {
public:
  explicit Grid(std::vector<Axis> axes);
  static Grid uniform(int d, double lo, double hi, int cells);

  int dim() const { return static_cast<int>(axes_.size()); }
  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& axis(int k) const { return axes_[k]; }
  std::size_t cell_count() const { return cell_count_; }
  double cell_volume() const { return cell_volume_; }
  double box_volume() const;
  double diameter() const;

  std::array<int, 3> coords(std::size_t cell) const;
  std::size_t index(const std::array<int, 3>& c) const;
  Point center(std::size_t cell) const;

  /// Cell containing x, or -1 when x lies outside the closed box.
  long locate(const Point& x) const;
  bool contains(const Point& x, double slack = 0.0) const;

  const std::vector<Face>& faces() const { return faces_; }

  bool operator==(const Grid& other) const { return axes_ == other.axes_; }

private:
  std::vector<Axis> axes_;
  std::size_t cell_count_ = 0;
  double cell_volume_ = 0.0;
  std::array<std::size_t, 3> strides_{};
  std::vector<Face> faces_;
};

enum class ReferenceKind { lebesgue, masked, gibbs };

/// gamma-mass of every cell. Lebesgue weights equal the cell volume; masked
/// weights are the cell volume or 0; Gibbs weights are exp(-V(center)) * volume.
class ReferenceMeasure {
public:
  static ReferenceMeasure lebesgue(Grid grid);
  static ReferenceMeasure masked(Grid grid, const std::vector<bool>& active);
  static ReferenceMeasure gibbs(Grid grid, const std::function<double(const Point&)>& potential);
  static ReferenceMeasure from_weights(Grid grid, std::vector<double> weights);

  const Grid& grid() const { return grid_; }
  ReferenceKind kind() const { return kind_; }
  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t cell) const { return weights_[cell]; }

  /// Mean of the two adjacent cell weights, or 0 when either cell is inactive
  /// (closed face).
  double face_weight(const Face& f) const;

  bool operator==(const ReferenceMeasure& other) const
  {
    return grid_ == other.grid_ && weights_ == other.weights_;
  }

private:
  ReferenceMeasure(Grid grid, std::vector<double> weights, ReferenceKind kind);

  Grid grid_;
  std::vector<double> weights_;
  ReferenceKind kind_;
};

/// mu = rho * gamma on a grid. Cells with zero reference weight carry
/// density 0.
class GridMeasure {
public:
  GridMeasure(ReferenceMeasure reference, std::vector<double> density);
  static GridMeasure from_function(ReferenceMeasure reference,
                                   const std::function<double(const Point&)>& rho);
  static GridMeasure constant(ReferenceMeasure reference, double value);

  const ReferenceMeasure& reference() const { return reference_; }
  const Grid& grid() const { return reference_.grid(); }
  std::span<const double> density() const { return density_; }
  double operator[](std::size_t cell) const { return density_[cell]; }

  double min_density() const;
  double max_density() const;

  /// Piecewise-constant density at x (0 outside the box).
  double density_at(const Point& x) const;
  /// Multilinear interpolation between cell centres, 0 outside the box and
  /// clamped to the nearest centre in the half-cell boundary layer.
  double interpolate(const Point& x) const;

private:
  ReferenceMeasure reference_;
  std::vector<double> density_;
};

/// Signed total mass sum rho_i gamma_i.
double total_mass(const GridMeasure& mu);

/// nu(B(0,1)) + integral over |x| > 1 of |x|^r d|nu|, by cell centres.
double generalized_moment(const GridMeasure& nu, double r);
double generalized_moment(const ReferenceMeasure& gamma, double r);

/// (T_#mu) for T(x) = scale * x + shift on the image grid T(box). Lebesgue only.
GridMeasure push_forward_affine(const GridMeasure& mu, double scale, const Point& shift);
/// Same map sampled on an explicit Lebesgue target grid. Throws when the
/// image of the support leaves the target box.
GridMeasure push_forward_affine(const GridMeasure& mu, double scale, const Point& shift,
                                const Grid& target);

/// Convolution with a normalized tensor bump of radius eps and mirror
/// boundaries. Preserves mass and the density range on Lebesgue grids.
GridMeasure mollify(const GridMeasure& mu, double eps);

}  // namespace gwd
