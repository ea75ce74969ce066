#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "gwd/dynamics.hpp"
#include "gwd/heat.hpp"
#include "gwd/instances.hpp"
#include "gwd/properties.hpp"
#include "gwd/solver.hpp"
#include "json.hpp"

using namespace gwd;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail)
{
  if (!ok) ++failures;
  std::cout << (ok ? "PASS" : "FAIL") << "  [" << (id < 10 ? " " : "") << id << "] " << name << "  (" << detail
            << ")" << std::endl;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0)
{
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::string describe(const PropertyCheck& c)
{
  return c.name + " " + fmt("worst %.3g, limit %.3g", c.value, c.limit) + ", " + std::to_string(c.instances) +
         " runs";
}

GridMeasure raised_cosine(const ReferenceMeasure& ref, double center, double half_width, double height, double floor)
{
  return GridMeasure::from_function(ref, [=](const Point& x) {
    const double s = (x[0] - center) / half_width;
    return floor + (std::abs(s) < 1.0 ? height * std::pow(std::cos(0.5 * std::numbers::pi * s), 2) : 0.0);
  });
}

void linear_mobility_recovery()
{
  const auto ref = ReferenceMeasure::lebesgue(Grid::uniform(1, 0.0, 4.0, 64));
  const GridMeasure mu0 = raised_cosine(ref, 1.35, 1.25, 0.8, 0.02);
  const GridMeasure mu1 = raised_cosine(ref, 2.55, 1.25, 0.8, 0.02);
  const double m0 = total_mass(mu0);
  const GridMeasure u0(ref, [&] {
    std::vector<double> v(mu0.density().begin(), mu0.density().end());
    for (double& x : v) x /= m0;
    return v;
  }());
  const double m1 = total_mass(mu1);
  const GridMeasure u1(ref, [&] {
    std::vector<double> v(mu1.density().begin(), mu1.density().end());
    for (double& x : v) x /= m1;
    return v;
  }());

  SolverConfig cfg;
  cfg.time_steps = 32;
  cfg.tolerance = 1e-7;
  cfg.max_iterations = 200000;
  const auto start = std::chrono::steady_clock::now();
  const SolverResult r = compute_distance(u0, u1, ActionDensity(2.0, MobilitySpec::linear(0.0, 2.0)), cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double w2 = wasserstein_1d(u0, u1, 2.0);
  const double rel = std::abs(r.distance - w2) / w2;
  const bool ok = r.status == SolverStatus::converged && rel <= 0.02 && secs < 60.0 &&
                  std::max(u0.max_density(), u1.max_density()) <= 1.0;
  report(1, "linear mobility recovers W2", ok,
         fmt("solver %.6f, quantile %.6f, rel %.2e", r.distance, w2, rel) + fmt(", %.1f s", secs));
}

void oracle_equivalence(const PropertyConfig& cfg)
{
  const PropertyCheck c = check_oracle_agreement(cfg);
  report(2, "two-cell oracle agreement", c.passed && c.instances == 20, describe(c));
}

void constants()
{
  const double e1 = std::abs(c_pd_constant(2.0, 1) - 16.0 / 3.0);
  const double e2 = std::abs(c_pd_constant(2.0, 2) - 56.0 / 15.0);
  bool signs = true;
  for (double p : {1.5, 2.0, 3.0}) {
    for (int d : {1, 2, 3}) {
      const double e = dilation_exponent(p, d);
      signs = signs && std::abs(e - ((1 - d) * p + d)) < 1e-14 && ((e < 0.0) == (d > p / (p - 1.0)));
    }
  }
  report(3, "constants", e1 <= 1e-10 && e2 <= 1e-10 && signs,
         fmt("|C21 - 16/3| = %.1e, |C22 - 56/15| = %.1e", e1, e2) + (signs ? ", exponent signs match" : ", sign mismatch"));
}

void metric_axioms(const PropertyConfig& cfg)
{
  const auto checks = check_metric_axioms(cfg);
  bool ok = !checks.empty();
  std::string detail;
  for (const auto& c : checks) {
    ok = ok && c.passed;
    detail += (detail.empty() ? "" : "; ") + describe(c);
  }
  report(4, "symmetry and triangle inequality", ok, detail);
}

void simple(int id, const std::string& name, const PropertyCheck& c, int expected)
{
  report(id, name, c.passed && c.instances >= expected, describe(c));
}

int cli_exit_code(const std::string& gwd, const nlohmann::json& config)
{
  const auto path = std::filesystem::temp_directory_path() / "gwd_acceptance_mass.json";
  std::ofstream(path) << config.dump();
  const std::string cmd = "\"" + gwd + "\" distance --config \"" + path.string() + "\" > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  std::filesystem::remove(path);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void mass_conservation(const PropertyConfig& cfg, const std::string& gwd)
{
  const PropertyCheck c = check_mass_conservation(cfg);
  bool cli_ok = true;
  std::string codes;
  for (double extra : {1.5e-6, 1e-5, 1e-2}) {
    std::vector<double> a(8, 0.5);
    std::vector<double> b(8, 0.5);
    b[3] += extra * 8.0;
    const nlohmann::json conf = {{"grid", {{"d", 1}, {"lo", 0.0}, {"hi", 1.0}, {"cells", 8}}},
                                 {"mu0", a},
                                 {"mu1", b},
                                 {"solver", {{"time_steps", 8}}}};
    const int code = gwd.empty() ? -1 : cli_exit_code(gwd, conf);
    cli_ok = cli_ok && code == 2;
    codes += (codes.empty() ? "" : ",") + std::to_string(code);
  }
  report(8, "mass conservation and infeasible verdicts", c.passed && cli_ok,
         describe(c) + ", cli exit codes " + codes);
}

void heat_decay()
{
  const double lambda = std::numbers::pi * std::numbers::pi;
  const auto ref = ReferenceMeasure::lebesgue(Grid::uniform(1, 0.0, 1.0, 64));
  const auto cosine = GridMeasure::from_function(ref, [](const Point& x) { return 0.5 + 0.25 * std::cos(std::numbers::pi * x[0]); });
  const HeatTrajectory traj = solve_neumann_heat(cosine, 2.5, 1e-3);
  const DecayReport dec = decay_report(traj);
  const MobilitySpec h = MobilitySpec::quadratic();
  const DissipationReport diss = dissipation_report(traj, h);
  bool ok = dec.l2_rate && *dec.l2_rate >= 0.95 * lambda && dec.gradient_bound_holds && diss.strictly_decreasing &&
            diss.worst_margin <= 1e-8;

  InstanceGenerator gen(1011);
  double worst_ratio = dec.gradient_ratio;
  double worst_margin = diss.worst_margin;
  for (int n = 0; n < 10; ++n) {
    const GridMeasure rho0 = n % 2 == 0 ? gen.smooth_density(ref, 0.5, 0.45, 8) : gen.rough_density(ref, 0.05, 0.95);
    const HeatTrajectory t = solve_neumann_heat(rho0, 1.0, 1e-3);
    const DecayReport d = decay_report(t);
    const DissipationReport s = dissipation_report(t, h);
    ok = ok && d.gradient_bound_holds && s.strictly_decreasing && s.worst_margin <= 1e-8;
    worst_ratio = std::max(worst_ratio, d.gradient_ratio);
    worst_margin = std::max(worst_margin, s.worst_margin);
  }
  report(11, "heat decay, gradient bound and entropy dissipation", ok,
         fmt("L2 rate %.4f vs 0.95 pi^2 = %.4f", dec.l2_rate.value_or(0.0), 0.95 * lambda) +
             fmt(", worst gradient ratio %.3f, worst dissipation slack %.1e", worst_ratio, worst_margin));
}

void boundedness()
{
  const auto ref = ReferenceMeasure::lebesgue(Grid::uniform(1, 0.0, 1.0, 32));
  const ActionDensity phi(2.0, MobilitySpec::quadratic());
  SolverConfig cfg;
  cfg.time_steps = 16;
  cfg.tolerance = 1e-8;
  cfg.max_iterations = 200000;
  InstanceGenerator gen(1213);
  bool ok = true;
  double sup = 0.0;
  double tightest = kInfinity;
  for (int n = 0; n < 20; ++n) {
    const GridMeasure mu0 = gen.smooth_density(ref, 0.5, 0.45);
    const GridMeasure mu1 = gen.smooth_density(ref, 0.5, 0.45);
    const HeatBound hb = heat_then_transport_bound(mu0, mu1, phi);
    const SolverResult r = compute_distance(mu0, mu1, phi, cfg);
    ok = ok && std::isfinite(hb.bound) && r.status == SolverStatus::converged && r.distance <= hb.bound;
    sup = std::max(sup, hb.bound);
    tightest = std::min(tightest, hb.bound - r.distance);
  }
  report(12, "heat-then-transport bound", ok && std::isfinite(sup),
         fmt("sup of 20 bounds %.4f, smallest bound - distance %.4f", sup, tightest));
}

void convergence_interplay()
{
  const auto ref = ReferenceMeasure::lebesgue(Grid::uniform(1, 0.0, 1.0, 128));
  const GridMeasure mu = GridMeasure::from_function(ref, [](const Point& x) {
    return x[0] < 0.3 ? 0.2 : (x[0] < 0.55 ? 0.8 : (x[0] < 0.8 ? 0.35 : 0.65));
  });
  const ActionDensity phi(2.0, MobilitySpec::quadratic());
  SolverConfig cfg;
  cfg.time_steps = 16;
  cfg.tolerance = 1e-8;
  cfg.max_iterations = 200000;
  std::vector<double> dist;
  std::vector<double> w2;
  bool ok = true;
  for (double eps : {0.32, 0.16, 0.08, 0.04, 0.02}) {
    const GridMeasure mn = mollify(mu, eps);
    const SolverResult r = compute_distance(mn, mu, phi, cfg);
    ok = ok && r.status == SolverStatus::converged;
    dist.push_back(r.distance);
    w2.push_back(wasserstein_1d(mn, mu, 2.0));
  }
  for (std::size_t i = 1; i < dist.size(); ++i) ok = ok && dist[i] < dist[i - 1] && w2[i] < w2[i - 1];
  ok = ok && dist.back() < 5e-2 && w2.back() < 0.1 * w2.front();
  std::string d_str, w_str;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    d_str += fmt(i ? " %.4f" : "%.4f", dist[i]);
    w_str += fmt(i ? " %.4f" : "%.4f", w2[i]);
  }
  report(13, "mollified sequence converges", ok, "d: " + d_str + "; W2: " + w_str);
}

}  // namespace

int main(int argc, char** argv)
{
  const std::string gwd = argc > 1 ? argv[1] : "";
  PropertyConfig cfg;  // tolerance 1e-3 on [0, 1] with 16 cells and 16 steps

  try {
    linear_mobility_recovery();
    oracle_equivalence(cfg);
    constants();
    metric_axioms(cfg);
    simple(5, "convexity of d^p", check_convexity(cfg), 5);
    simple(6, "comparison with sqrt(2) W2", check_comparison(cfg), 10);
    simple(7, "monotonicity in the mobility", check_monotonicity(cfg), 10);
    mass_conservation(cfg, gwd);
    simple(9, "density bounds along geodesics", check_density_bounds(cfg), 1);
    simple(10, "constant-speed geodesics", check_constant_speed(cfg), 5);
    heat_decay();
    boundedness();
    convergence_interplay();
  } catch (const std::exception& e) {
    std::cout << "FAIL  acceptance run aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
