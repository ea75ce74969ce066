#include "gwd/properties.hpp"

#include <algorithm>
#include <cmath>

#include "gwd/instances.hpp"
#include "gwd/oracle.hpp"

namespace gwd {

nlohmann::json to_json(const PropertyCheck& c)
{
  return {{"name", c.name},       {"passed", c.passed},       {"value", c.value},
          {"limit", c.limit},     {"instances", c.instances}, {"details", c.details}};
}

SolverConfig PropertyConfig::default_solver()
{
  SolverConfig s;
  s.tolerance = 1e-9;
  s.max_iterations = 200000;
  return s;
}

PropertyConfig PropertyConfig::from_json(const nlohmann::json& j)
{
  PropertyConfig c;
  c.seed = j.value("seed", c.seed);
  c.cells = j.value("cells", c.cells);
  c.time_steps = j.value("time_steps", c.time_steps);
  c.tolerance = j.value("tolerance", c.tolerance);
  if (j.contains("solver")) c.solver = SolverConfig::from_json(j.at("solver"));
  c.triples = j.value("triples", c.triples);
  c.quadruples = j.value("quadruples", c.quadruples);
  c.comparison_instances = j.value("comparison_instances", c.comparison_instances);
  c.monotonicity_instances = j.value("monotonicity_instances", c.monotonicity_instances);
  c.geodesic_instances = j.value("geodesic_instances", c.geodesic_instances);
  c.oracle_instances = j.value("oracle_instances", c.oracle_instances);
  if (c.cells < 2 || c.time_steps < 2) throw std::invalid_argument("property config: need at least 2 cells and 2 steps");
  if (!(c.tolerance >= 0.0)) throw std::invalid_argument("property config: tolerance must be nonnegative");
  return c;
}

namespace {

struct Setup {
  ReferenceMeasure reference;
  ActionDensity phi;
  SolverConfig solver;
};

Setup make_setup(const PropertyConfig& cfg)
{
  SolverConfig s = cfg.solver;
  s.time_steps = cfg.time_steps;
  return Setup{ReferenceMeasure::lebesgue(Grid::uniform(1, 0.0, 1.0, cfg.cells)),
               ActionDensity(2.0, MobilitySpec::quadratic()), s};
}

// Distance of a converged run; anything else is a failed property.
double solved_distance(const GridMeasure& a, const GridMeasure& b, const ActionDensity& phi, const SolverConfig& s,
                       int& failures)
{
  const SolverResult r = compute_distance(a, b, phi, s);
  if (r.status != SolverStatus::converged) ++failures;
  return r.distance;
}

GridMeasure blend(const GridMeasure& a, const GridMeasure& b, double t)
{
  std::vector<double> rho(a.grid().cell_count());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = (1.0 - t) * a[i] + t * b[i];
  return GridMeasure(a.reference(), std::move(rho));
}

PropertyCheck make_check(std::string name, double value, double limit, int instances, int failures,
                         nlohmann::json details = nlohmann::json::object())
{
  details["unconverged_runs"] = failures;
  return PropertyCheck{std::move(name), failures == 0 && value <= limit, value, limit, instances,
                       std::move(details)};
}

}  // namespace

std::vector<PropertyCheck> check_metric_axioms(const PropertyConfig& cfg)
{
  const Setup st = make_setup(cfg);
  InstanceGenerator gen(cfg.seed);
  double sym = 0.0;
  double tri = -kInfinity;
  int failures = 0;
  for (int n = 0; n < cfg.triples; ++n) {
    const GridMeasure m0 = gen.smooth_density(st.reference, 0.5, 0.4);
    const GridMeasure m1 = gen.smooth_density(st.reference, 0.5, 0.4);
    const GridMeasure m2 = gen.smooth_density(st.reference, 0.5, 0.4);
    const double d01 = solved_distance(m0, m1, st.phi, st.solver, failures);
    const double d10 = solved_distance(m1, m0, st.phi, st.solver, failures);
    const double d12 = solved_distance(m1, m2, st.phi, st.solver, failures);
    const double d02 = solved_distance(m0, m2, st.phi, st.solver, failures);
    sym = std::max(sym, std::abs(d01 - d10));
    tri = std::max(tri, d02 - d01 - d12);
  }
  return {make_check("symmetry", sym, 2.0 * cfg.tolerance, cfg.triples, failures),
          make_check("triangle", tri, 3.0 * cfg.tolerance, cfg.triples, failures)};
}

PropertyCheck check_convexity(const PropertyConfig& cfg)
{
  const Setup st = make_setup(cfg);
  InstanceGenerator gen(cfg.seed + 1);
  double worst = -kInfinity;
  int failures = 0;
  for (int n = 0; n < cfg.quadruples; ++n) {
    const GridMeasure a0 = gen.smooth_density(st.reference, 0.5, 0.4);
    const GridMeasure a1 = gen.smooth_density(st.reference, 0.5, 0.4);
    const GridMeasure b0 = gen.smooth_density(st.reference, 0.5, 0.4);
    const GridMeasure b1 = gen.smooth_density(st.reference, 0.5, 0.4);
    const double da = std::pow(solved_distance(a0, a1, st.phi, st.solver, failures), 2.0);
    const double db = std::pow(solved_distance(b0, b1, st.phi, st.solver, failures), 2.0);
    for (double tau : {0.25, 0.5, 0.75}) {
      const double dt =
          std::pow(solved_distance(blend(a0, b0, tau), blend(a1, b1, tau), st.phi, st.solver, failures), 2.0);
      worst = std::max(worst, dt - ((1.0 - tau) * da + tau * db));
    }
  }
  return make_check("convexity", worst, cfg.tolerance, cfg.quadruples, failures);
}

PropertyCheck check_comparison(const PropertyConfig& cfg)
{
  const Setup st = make_setup(cfg);
  InstanceGenerator gen(cfg.seed + 2);
  const double c = comparison_constant(st.phi.mobility(), 0.5, 2.0);
  double worst = -kInfinity;
  int failures = 0;
  for (int n = 0; n < cfg.comparison_instances; ++n) {
    const GridMeasure m0 = gen.smooth_density(st.reference, 0.25, 0.2);
    const GridMeasure m1 = gen.smooth_density(st.reference, 0.25, 0.2);
    const double d = solved_distance(m0, m1, st.phi, st.solver, failures);
    worst = std::max(worst, d - c * wasserstein_1d(m0, m1, 2.0));
  }
  return make_check("comparison", worst, cfg.tolerance, cfg.comparison_instances, failures, {{"constant", c}});
}

PropertyCheck check_monotonicity(const PropertyConfig& cfg)
{
  const Setup st = make_setup(cfg);
  const ActionDensity weaker(2.0, MobilitySpec::quadratic(0.0, 1.0, 0.5));
  InstanceGenerator gen(cfg.seed + 3);
  double worst = -kInfinity;
  int failures = 0;
  for (int n = 0; n < cfg.monotonicity_instances; ++n) {
    const GridMeasure m0 = gen.smooth_density(st.reference, 0.5, 0.4);
    const GridMeasure m1 = gen.smooth_density(st.reference, 0.5, 0.4);
    const double d1 = solved_distance(m0, m1, st.phi, st.solver, failures);
    const double d2 = solved_distance(m0, m1, weaker, st.solver, failures);
    worst = std::max(worst, d1 - d2);
  }
  return make_check("monotonicity", worst, cfg.tolerance, cfg.monotonicity_instances, failures);
}

PropertyCheck check_mass_conservation(const PropertyConfig& cfg)
{
  const Setup st = make_setup(cfg);
  InstanceGenerator gen(cfg.seed + 4);
  double drift = 0.0;
  int failures = 0;
  bool verdicts = true;
  for (int n = 0; n < cfg.geodesic_instances; ++n) {
    const GridMeasure m0 = gen.smooth_density(st.reference, 0.5, 0.4);
    const GridMeasure m1 = gen.smooth_density(st.reference, 0.5, 0.4);
    const SolverResult r = compute_distance(m0, m1, st.phi, st.solver);
    if (r.status != SolverStatus::converged) ++failures;
    const auto trace = mass_trace(r.geodesic);
    for (double m : trace) drift = std::max(drift, std::abs(m - trace.front()) / std::abs(trace.front()));

    std::vector<double> heavier(m1.density().begin(), m1.density().end());
    for (double& v : heavier) v += 2e-6;
    const SolverResult bad = compute_distance(m0, GridMeasure(st.reference, std::move(heavier)), st.phi, st.solver);
    if (bad.status != SolverStatus::infeasible || std::isfinite(bad.distance)) verdicts = false;
  }
  auto check = make_check("mass-conservation", drift, 1e-5 * cfg.tolerance, cfg.geodesic_instances, failures,
                          {{"infeasible_verdicts", verdicts}});
  check.passed = check.passed && verdicts;
  return check;
}

PropertyCheck check_density_bounds(const PropertyConfig& cfg)
{
  const Setup st = make_setup(cfg);
  InstanceGenerator gen(cfg.seed + 5);
  const auto& h = st.phi.mobility();
  double worst = -kInfinity;
  int failures = 0;
  for (int n = 0; n < cfg.geodesic_instances; ++n) {
    const GridMeasure m0 = gen.smooth_density(st.reference, 0.5, 0.45);
    const GridMeasure m1 = gen.smooth_density(st.reference, 0.5, 0.45);
    const SolverResult r = compute_distance(m0, m1, st.phi, st.solver);
    if (r.status != SolverStatus::converged) ++failures;
    for (double v : r.geodesic.densities()) worst = std::max({worst, h.lower() - v, v - h.upper()});
  }
  return make_check("density-bounds", worst, 1e-3 * cfg.tolerance, cfg.geodesic_instances, failures);
}

PropertyCheck check_constant_speed(const PropertyConfig& cfg)
{
  const Setup st = make_setup(cfg);
  InstanceGenerator gen(cfg.seed + 6);
  double worst = 0.0;
  int failures = 0;
  nlohmann::json ratios = nlohmann::json::array();
  for (int n = 0; n < cfg.geodesic_instances; ++n) {
    const GridMeasure m0 = gen.smooth_density(st.reference, 0.5, 0.4);
    const GridMeasure m1 = gen.smooth_density(st.reference, 0.5, 0.4);
    const SolverResult r = compute_distance(m0, m1, st.phi, st.solver);
    if (r.status != SolverStatus::converged) {
      ++failures;
      continue;
    }
    const double ratio = geodesic_speed_profile(r, st.phi, {0.5}, st.solver).front();
    ratios.push_back(ratio);
    worst = std::max(worst, std::abs(ratio - 1.0));
  }
  return make_check("constant-speed", worst, 30.0 * cfg.tolerance, cfg.geodesic_instances, failures,
                    {{"ratios", ratios}});
}

PropertyCheck check_mollification(const PropertyConfig& cfg)
{
  const Setup st = make_setup(cfg);
  InstanceGenerator gen(cfg.seed + 7);
  double worst = -kInfinity;
  int failures = 0;
  for (int n = 0; n < cfg.geodesic_instances; ++n) {
    const GridMeasure m0 = gen.smooth_density(st.reference, 0.5, 0.4);
    const GridMeasure m1 = gen.smooth_density(st.reference, 0.5, 0.4);
    const double d = solved_distance(m0, m1, st.phi, st.solver, failures);
    const double ds = solved_distance(mollify(m0, 0.1), mollify(m1, 0.1), st.phi, st.solver, failures);
    worst = std::max(worst, ds - d);
  }
  return make_check("mollification", worst, cfg.tolerance, cfg.geodesic_instances, failures);
}

PropertyCheck check_oracle_agreement(const PropertyConfig& cfg)
{
  InstanceGenerator gen(cfg.seed + 8);
  SolverConfig s = cfg.solver;
  double worst = 0.0;
  int failures = 0;
  for (int n = 0; n < cfg.oracle_instances; ++n) {
    const TwoCellInstance inst = gen.two_cell(8);
    s.time_steps = inst.time_steps;
    const ActionDensity phi(inst.p, inst.mobility);
    const double d = solved_distance(inst.initial(), inst.final(), phi, s, failures);
    worst = std::max(worst, std::abs(d - two_cell_exact(inst)));
  }
  return make_check("two-cell-oracle", worst, cfg.tolerance, cfg.oracle_instances, failures);
}

bool PropertyReport::all_passed() const
{
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

nlohmann::json PropertyReport::to_json() const
{
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : checks) list.push_back(gwd::to_json(c));
  return {{"passed", all_passed()}, {"checks", list}, {"constants", constants}};
}

nlohmann::json constants_table()
{
  nlohmann::json rows = nlohmann::json::array();
  const MobilitySpec h = MobilitySpec::quadratic();
  for (double p : {1.5, 2.0, 3.0}) {
    for (int d : {1, 2, 3}) {
      const double e = dilation_exponent(p, d);
      rows.push_back({{"p", p},
                      {"d", d},
                      {"c_pd", c_pd_constant(p, d)},
                      {"dilation_exponent", e},
                      {"finite_action", e < 0.0},
                      {"comparison_constant", comparison_constant(h, 0.5, p)}});
    }
  }
  return rows;
}

PropertyReport run_property_suite(const PropertyConfig& cfg)
{
  PropertyReport report;
  report.checks = check_metric_axioms(cfg);
  report.checks.push_back(check_convexity(cfg));
  report.checks.push_back(check_comparison(cfg));
  report.checks.push_back(check_monotonicity(cfg));
  report.checks.push_back(check_mass_conservation(cfg));
  report.checks.push_back(check_density_bounds(cfg));
  report.checks.push_back(check_constant_speed(cfg));
  report.checks.push_back(check_mollification(cfg));
  report.checks.push_back(check_oracle_agreement(cfg));
  report.constants = constants_table();
  return report;
}

}  // namespace gwd
