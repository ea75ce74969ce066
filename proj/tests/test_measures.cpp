#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "gwd/instances.hpp"
#include "gwd/measure_io.hpp"
#include "gwd/measures.hpp"

using namespace gwd;

TEST_CASE("grid geometry")
{
  const Grid g({Axis{0.0, 2.0, 4}, Axis{-1.0, 1.0, 8}});
  CHECK(g.cell_count() == 32);
  CHECK(g.cell_volume() == doctest::Approx(0.125));
  CHECK(g.box_volume() == doctest::Approx(4.0));
  CHECK(g.faces().size() == 3 * 8 + 4 * 7);
  const auto c = g.coords(13);
  CHECK(g.index(c) == 13);
  CHECK(g.locate(g.center(13)) == 13);
  CHECK(g.locate({5.0, 0.0, 0.0}) == -1);
  CHECK_THROWS(Grid({Axis{1.0, 0.0, 4}}));
  CHECK_THROWS(Grid({Axis{0.0, 1.0, 0}}));
}

TEST_CASE("total mass")
{
  const auto ref = ReferenceMeasure::lebesgue(Grid::uniform(1, 0.0, 1.0, 10));
  CHECK(total_mass(GridMeasure::constant(ref, 0.5)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(total_mass(GridMeasure::constant(ref, -0.2)) == doctest::Approx(-0.2).epsilon(1e-14));
}

TEST_CASE("references")
{
  const Grid g = Grid::uniform(2, 0.0, 1.0, 4);
  const auto leb = ReferenceMeasure::lebesgue(g);
  for (double w : leb.weights()) CHECK(w == doctest::Approx(g.cell_volume()));
  std::vector<bool> active(g.cell_count(), true);
  active[5] = false;
  const auto masked = ReferenceMeasure::masked(g, active);
  CHECK(masked.weight(5) == 0.0);
  for (const Face& f : g.faces()) {
    if (f.lo == 5 || f.hi == 5) CHECK(masked.face_weight(f) == 0.0);
  }
  const auto gibbs = ReferenceMeasure::gibbs(g, [](const Point& x) { return x[0] + x[1]; });
  CHECK(gibbs.kind() == ReferenceKind::gibbs);
  CHECK(gibbs.weight(0) > gibbs.weight(g.cell_count() - 1));
  CHECK_THROWS(ReferenceMeasure::from_weights(g, std::vector<double>(g.cell_count(), -1.0)));
  const GridMeasure mu(masked, std::vector<double>(g.cell_count(), 0.7));
  CHECK(mu[5] == 0.0);
}

TEST_CASE("generalized moments")
{
  const auto ref = ReferenceMeasure::lebesgue(Grid::uniform(1, -1.0, 1.0, 20));
  const auto mu = GridMeasure::constant(ref, 0.5);
  for (double r : {-2.0, 0.0, 1.0, 3.0}) CHECK(generalized_moment(mu, r) == doctest::Approx(1.0));

  const auto wide = ReferenceMeasure::lebesgue(Grid::uniform(1, -3.0, 3.0, 30));
  CHECK(generalized_moment(GridMeasure::constant(wide, 0.2), 0.0) == doctest::Approx(1.2));
  CHECK(std::isfinite(generalized_moment(wide, -2.0)));

  InstanceGenerator gen(2);
  for (int k = 0; k < 20; ++k) {
    const auto nu = gen.rough_density(wide, -1.0, 1.0);
    CHECK(generalized_moment(nu, 0.5) <= generalized_moment(nu, 2.0) + 1e-12);
    CHECK(generalized_moment(nu, -1.0) <= generalized_moment(nu, 0.5) + 1e-12);
  }
}

TEST_CASE("affine push-forward")
{
  const auto ref = ReferenceMeasure::lebesgue(Grid::uniform(1, 0.0, 1.0, 16));
  const auto mu = GridMeasure::constant(ref, 0.8);
  const GridMeasure doubled = push_forward_affine(mu, 2.0, {0.0, 0.0, 0.0});
  CHECK(doubled.grid().axis(0).hi == doctest::Approx(2.0));
  for (double v : doubled.density()) CHECK(v == doctest::Approx(0.4));
  CHECK(total_mass(doubled) == doctest::Approx(total_mass(mu)).epsilon(1e-12));

  const GridMeasure same = push_forward_affine(mu, 1.0, {0.0, 0.0, 0.0});
  for (std::size_t i = 0; i < mu.grid().cell_count(); ++i) CHECK(same[i] == doctest::Approx(mu[i]));

  // Support scaling: sup of the pushed density is 2^-d times the original.
  const auto box = ReferenceMeasure::lebesgue(Grid::uniform(2, -2.0, 2.0, 16));
  const auto inner = GridMeasure::from_function(
      box, [](const Point& x) { return std::abs(x[0]) < 0.9 && std::abs(x[1]) < 0.9 ? 0.6 + 0.3 * x[0] : 0.0; });
  const GridMeasure spread = push_forward_affine(inner, 2.0, {0.0, 0.0, 0.0}, box.grid());
  CHECK(spread.max_density() <= 0.25 * inner.max_density() + 1e-12);
  CHECK(total_mass(spread) == doctest::Approx(total_mass(inner)).epsilon(1e-12));
  CHECK_THROWS(push_forward_affine(inner, 3.0, {0.0, 0.0, 0.0}, box.grid()));

  InstanceGenerator gen(4);
  for (int k = 0; k < 50; ++k) {
    const double s = (gen.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0) * gen.uniform(0.3, 3.0);
    const Point shift{gen.uniform(-2.0, 2.0), 0.0, 0.0};
    const auto nu = gen.rough_density(ref, 0.0, 1.0);
    const auto pushed = push_forward_affine(nu, s, shift);
    CHECK(std::abs(total_mass(pushed) - total_mass(nu)) <= 1e-12 * std::abs(total_mass(nu)));
  }
}

TEST_CASE("mollification")
{
  const auto ref = ReferenceMeasure::lebesgue(Grid::uniform(1, 0.0, 1.0, 64));
  const auto flat = GridMeasure::constant(ref, 0.3);
  const auto flat_s = mollify(flat, 0.1);
  for (double v : flat_s.density()) CHECK(v == doctest::Approx(0.3).epsilon(1e-12));

  const auto step = GridMeasure::from_function(ref, [](const Point& x) { return x[0] < 0.4 ? 0.9 : 0.1; });
  const auto smooth = mollify(step, 0.1);
  CHECK(total_mass(smooth) == doctest::Approx(total_mass(step)).epsilon(1e-12));
  CHECK(smooth.max_density() <= step.max_density() + 1e-12);
  CHECK(smooth.min_density() >= step.min_density() - 1e-12);

  const auto ref2 = ReferenceMeasure::lebesgue(Grid::uniform(2, 0.0, 1.0, 16));
  InstanceGenerator gen(8);
  const auto rough = gen.rough_density(ref2, 0.2, 0.7);
  const auto rs = mollify(rough, 0.15);
  CHECK(total_mass(rs) == doctest::Approx(total_mass(rough)).epsilon(1e-12));
  CHECK(rs.max_density() <= rough.max_density() + 1e-12);
  CHECK(rs.min_density() >= rough.min_density() - 1e-12);
  CHECK_THROWS(mollify(rough, -1.0));
}

TEST_CASE("measure files round trip")
{
  const auto dir = std::filesystem::temp_directory_path() / "gwd_measure_io_test";
  std::filesystem::create_directories(dir);
  const auto ref = ReferenceMeasure::gibbs(Grid({Axis{0.0, 1.0, 3}, Axis{0.0, 2.0, 5}}),
                                           [](const Point& x) { return x[0] * x[1]; });
  InstanceGenerator gen(1);
  const auto mu = gen.rough_density(ref, -1.0, 1.0);
  const auto header = write_measure(dir / "mu", mu);
  const auto back = read_measure(header);
  CHECK(back.reference() == mu.reference());
  for (std::size_t i = 0; i < mu.grid().cell_count(); ++i) CHECK(back[i] == mu[i]);

  const nlohmann::json h = grid_header(mu.grid());
  CHECK(h.at("d") == 2);
  CHECK(h.at("order") == "row-major");
  write_measure_csv(dir / "mu.csv", mu);
  CHECK(std::filesystem::exists(dir / "mu.csv"));
  std::filesystem::remove_all(dir);
}
