#include <cmath>
#include <random>

#include "doctest.h"
#include "gwd/instances.hpp"
#include "gwd/oracle.hpp"
#include "gwd/solver.hpp"

using namespace gwd;

namespace {

double prox_objective(const ActionDensity& phi, double rho, const std::vector<double>& w, double rho_t,
                      const std::vector<double>& w_t, double tau)
{
  double dist = (rho - rho_t) * (rho - rho_t);
  for (std::size_t i = 0; i < w.size(); ++i) dist += (w[i] - w_t[i]) * (w[i] - w_t[i]);
  return eval_action(phi, rho, w) + dist / (2.0 * tau);
}

SolverConfig quick(int steps = 8)
{
  SolverConfig cfg;
  cfg.time_steps = steps;
  cfg.tolerance = 1e-9;
  cfg.max_iterations = 100000;
  return cfg;
}

}  // namespace

TEST_CASE("prox of the action")
{
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const ActionDensity& phi :
       {ActionDensity(2.0, MobilitySpec::quadratic()), ActionDensity(1.5, MobilitySpec::linear(0.0, 2.0)),
        ActionDensity(3.0, MobilitySpec::power(0.0, 1.0, 0.5, 1.0))}) {
    const MobilitySpec& h = phi.mobility();
    for (int trial = 0; trial < 20; ++trial) {
      const double rho_t = h.lower() - 0.3 + (h.upper() - h.lower() + 0.6) * u(rng);
      const std::vector<double> w_t{2.0 * u(rng) - 1.0, 2.0 * u(rng) - 1.0};
      const double tau = 0.01 + u(rng);
      const CellProx px = prox_action_cell(rho_t, w_t, tau, phi);
      CHECK(px.rho >= h.lower());
      CHECK(px.rho <= h.upper());
      const double f = prox_objective(phi, px.rho, px.w, rho_t, w_t, tau);
      CHECK(std::isfinite(f));

      // Random search around the candidate never does better.
      double best = kInfinity;
      for (int k = 0; k < 10000; ++k) {
        const double r = h.lower() + (h.upper() - h.lower()) * u(rng);
        const double s = u(rng);
        const std::vector<double> w{s * w_t[0] + 0.1 * (u(rng) - 0.5), s * w_t[1] + 0.1 * (u(rng) - 0.5)};
        best = std::min(best, prox_objective(phi, r, w, rho_t, w_t, tau));
      }
      CHECK(f <= best + 1e-9);
    }
  }

  const ActionDensity quad(2.0, MobilitySpec::quadratic());
  // Zero momentum: the density is clamped to [a, b].
  for (double r : {-0.5, 0.3, 1.7}) {
    const auto [rho, w] = prox_action_cell(r, 0.0, 0.5, quad);
    CHECK(rho == doctest::Approx(std::clamp(r, 0.0, 1.0)));
    CHECK(w == 0.0);
  }
  // The scalar overload agrees with the vector one.
  const auto [r1, w1] = prox_action_cell(0.4, 0.7, 0.3, quad);
  const CellProx v1 = prox_action_cell(0.4, std::vector<double>{0.7}, 0.3, quad);
  CHECK(r1 == doctest::Approx(v1.rho).epsilon(1e-10));
  CHECK(w1 == doctest::Approx(v1.w[0]).epsilon(1e-10));
  // Small steps barely move the point.
  const auto [r2, w2] = prox_action_cell(0.4, 0.7, 1e-8, quad);
  CHECK(std::abs(r2 - 0.4) < 1e-6);
  CHECK(std::abs(w2 - 0.7) < 1e-6);
  CHECK_THROWS(prox_action_cell(0.4, 0.7, 0.0, quad));
}

TEST_CASE("preflight mass check")
{
  const auto ref = ReferenceMeasure::lebesgue(Grid::uniform(1, 0.0, 1.0, 4));
  const GridMeasure a(ref, {0.1, 0.2, 0.3, 0.4});
  const GridMeasure b(ref, {0.4, 0.3, 0.2, 0.1});
  const GridMeasure c(ref, {0.4, 0.3, 0.2, 0.2});
  CHECK(preflight_mass_check(a, b, ref, 2.0));
  CHECK_FALSE(preflight_mass_check(a, c, ref, 2.0));
  // Signed densities when a < 0.
  const GridMeasure s0(ref, {-0.5, 0.5, -0.2, 0.2});
  const GridMeasure s1(ref, {0.0, 0.0, 0.0, 0.0});
  CHECK(preflight_mass_check(s0, s1, ref, 2.0));
  CHECK_FALSE(preflight_mass_check(s0, GridMeasure(ref, {0.1, 0.0, 0.0, 0.0}), ref, 2.0));
}

TEST_CASE("distance basics")
{
  const auto ref = ReferenceMeasure::lebesgue(Grid::uniform(1, 0.0, 1.0, 8));
  const ActionDensity phi(2.0, MobilitySpec::quadratic());
  InstanceGenerator gen(3);
  const GridMeasure mu = gen.smooth_density(ref, 0.5, 0.3);

  const SolverResult same = compute_distance(mu, mu, phi, quick());
  CHECK(same.status == SolverStatus::converged);
  CHECK(same.distance < 1e-6);

  const GridMeasure nu = gen.smooth_density(ref, 0.5, 0.3);
  const SolverResult r = compute_distance(mu, nu, phi, quick());
  CHECK(r.status == SolverStatus::converged);
  CHECK(r.distance > 0.0);
  CHECK(r.distance == doctest::Approx(std::sqrt(r.action)));
  CHECK(r.mass_gap < 1e-10);
  CHECK(r.ce_residual < 1e-8);
  CHECK(r.step_norm > 0.0);
  CHECK(r.geodesic.steps() == 8);
  for (std::size_t i = 0; i < mu.density().size(); ++i) {
    CHECK(r.geodesic.initial()[i] == doctest::Approx(mu[i]));
    CHECK(r.geodesic.final()[i] == doctest::Approx(nu[i]));
  }
  // The returned curve realizes the reported action.
  CHECK(action_integral(r.geodesic, phi) == doctest::Approx(r.action).epsilon(1e-6));

  const auto j = diagnostics_json(r);
  CHECK(j.at("status") == "converged");
  CHECK(j.contains("distance"));
  CHECK(j.contains("iterations"));
  CHECK(j.contains("residual"));
  CHECK(j.contains("mass_gap"));
}

TEST_CASE("two cells against the exact value")
{
  TwoCellInstance inst{{0.2, 0.6}, {0.6, 0.2}};
  inst.weight_left = 0.7;
  inst.weight_right = 1.3;
  inst.rho1 = {0.4, (0.7 * 0.2 + 1.3 * 0.6 - 0.7 * 0.4) / 1.3};
  SolverConfig cfg = quick(inst.time_steps);
  const SolverResult r = compute_distance(inst.initial(), inst.final(), ActionDensity(2.0, inst.mobility), cfg);
  CHECK(r.status == SolverStatus::converged);
  CHECK(r.distance == doctest::Approx(two_cell_exact(inst)).epsilon(1e-5));
}

TEST_CASE("infeasible and invalid inputs")
{
  const auto ref = ReferenceMeasure::lebesgue(Grid::uniform(1, 0.0, 1.0, 4));
  const ActionDensity phi(2.0, MobilitySpec::quadratic());
  const SolverResult r = compute_distance(GridMeasure::constant(ref, 0.25), GridMeasure::constant(ref, 0.275), phi, quick());
  CHECK(r.status == SolverStatus::infeasible);
  CHECK(r.distance == kInfinity);
  CHECK(diagnostics_json(r).at("status") == "infeasible");

  const auto other = ReferenceMeasure::lebesgue(Grid::uniform(1, 0.0, 1.0, 5));
  CHECK_THROWS_AS(compute_distance(GridMeasure::constant(ref, 0.2), GridMeasure::constant(other, 0.2), phi),
                  std::invalid_argument);
  CHECK_THROWS_AS(compute_distance(GridMeasure::constant(ref, 1.2), GridMeasure::constant(ref, 1.2), phi),
                  std::invalid_argument);

  // Two components of a masked reference must balance separately.
  const auto masked = ReferenceMeasure::masked(Grid::uniform(1, 0.0, 1.0, 5), {true, true, false, true, true});
  const GridMeasure m0(masked, {0.5, 0.5, 0.0, 0.2, 0.2});
  const GridMeasure m1(masked, {0.2, 0.2, 0.0, 0.5, 0.5});
  CHECK(compute_distance(m0, m1, phi, quick()).status == SolverStatus::infeasible);
  const GridMeasure m2(masked, {0.7, 0.3, 0.0, 0.1, 0.3});
  CHECK(compute_distance(m0, m2, phi, quick()).status == SolverStatus::converged);
}

TEST_CASE("geodesic speed profile")
{
  const auto ref = ReferenceMeasure::lebesgue(Grid::uniform(1, 0.0, 1.0, 8));
  const ActionDensity phi(2.0, MobilitySpec::quadratic());
  InstanceGenerator gen(11);
  const SolverConfig cfg = quick();
  const SolverResult r =
      compute_distance(gen.smooth_density(ref, 0.5, 0.3), gen.smooth_density(ref, 0.5, 0.3), phi, cfg);
  const auto prof = geodesic_speed_profile(r, phi, {0.0, 0.5, 1.0}, cfg);
  REQUIRE(prof.size() == 3);
  CHECK(prof[0] == 1.0);
  CHECK(prof[1] == doctest::Approx(1.0).epsilon(0.05));
  CHECK(prof[2] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("solver configuration round trip")
{
  SolverConfig cfg;
  cfg.time_steps = 12;
  cfg.tolerance = 1e-6;
  cfg.step_ratio = 2.0;
  cfg.check_every = 7;
  const SolverConfig back = SolverConfig::from_json(cfg.to_json());
  CHECK(back.time_steps == 12);
  CHECK(back.tolerance == 1e-6);
  CHECK(back.step_ratio == 2.0);
  CHECK(back.check_every == 7);
  CHECK(back.max_iterations == cfg.max_iterations);
  CHECK(to_string(SolverStatus::max_iterations) == "max-iters");
  CHECK_THROWS(SolverConfig::from_json(nlohmann::json{{"time_steps", 0}}));
}
