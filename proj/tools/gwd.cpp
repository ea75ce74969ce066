#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "gwd/heat.hpp"
#include "gwd/instances.hpp"
#include "gwd/measure_io.hpp"
#include "gwd/oracle.hpp"
#include "gwd/properties.hpp"
#include "gwd/solver.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gwd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

struct RunConfig {
  json doc = json::object();
  fs::path base = ".";
  std::optional<fs::path> out;
  std::optional<std::uint64_t> seed;
};

json load_config(const std::string& path)
{
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return json::parse(in);
}

Grid grid_from_config(const json& g)
{
  const int d = g.value("d", 1);
  if (g.contains("bounds")) return grid_from_header(g);
  return Grid::uniform(d, g.value("lo", 0.0), g.value("hi", 1.0), g.value("cells", 64));
}

// A measure is either a path to a measure header or an inline density array
// on the config's "grid" with a Lebesgue reference.
GridMeasure measure_from_config(const RunConfig& rc, const std::string& key)
{
  const json& v = rc.doc.at(key);
  if (v.is_string()) {
    fs::path p = v.get<std::string>();
    if (p.is_relative()) p = rc.base / p;
    return read_measure(p);
  }
  if (!rc.doc.contains("grid")) throw std::invalid_argument("inline densities need a \"grid\" entry");
  return GridMeasure(ReferenceMeasure::lebesgue(grid_from_config(rc.doc.at("grid"))), v.get<std::vector<double>>());
}

ActionDensity action_from_config(const json& doc)
{
  const MobilitySpec h = doc.contains("mobility") ? mobility_from_json(doc.at("mobility")) : MobilitySpec::quadratic();
  return ActionDensity(doc.value("p", 2.0), h);
}

void write_json(const fs::path& path, const json& j)
{
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

int emit_result(const RunConfig& rc, const SolverResult& r, const ActionDensity& phi, bool geodesic)
{
  const json diag = diagnostics_json(r);
  std::cout << diag.dump() << '\n';
  if (rc.out) {
    fs::create_directories(*rc.out);
    write_json(*rc.out / "diagnostics.json", diag);
    if (geodesic && r.status != SolverStatus::infeasible) export_curve(*rc.out / "geodesic", r.geodesic, phi);
  }
  return r.status == SolverStatus::infeasible ? kExitInfeasible : kExitOk;
}

int cmd_distance(const RunConfig& rc, bool geodesic)
{
  const GridMeasure mu0 = measure_from_config(rc, "mu0");
  const GridMeasure mu1 = measure_from_config(rc, "mu1");
  const ActionDensity phi = action_from_config(rc.doc);
  const SolverConfig cfg = rc.doc.contains("solver") ? SolverConfig::from_json(rc.doc.at("solver")) : SolverConfig{};
  return emit_result(rc, compute_distance(mu0, mu1, phi, cfg), phi, geodesic);
}

int cmd_properties(const RunConfig& rc)
{
  PropertyConfig cfg = PropertyConfig::from_json(rc.doc);
  if (rc.seed) cfg.seed = *rc.seed;
  const PropertyReport report = run_property_suite(cfg);
  const json j = report.to_json();
  std::cout << j.dump(2) << '\n';
  if (rc.out) {
    fs::create_directories(*rc.out);
    write_json(*rc.out / "properties.json", j);
  }
  return report.all_passed() ? kExitOk : kExitError;
}

int cmd_heat_decay(const RunConfig& rc)
{
  const MobilitySpec h = rc.doc.contains("mobility") ? mobility_from_json(rc.doc.at("mobility")) : MobilitySpec::quadratic();
  GridMeasure rho0 = [&] {
    if (rc.doc.contains("rho0")) return measure_from_config(rc, "rho0");
    const Grid g = rc.doc.contains("grid") ? grid_from_config(rc.doc.at("grid")) : Grid::uniform(1, 0.0, 1.0, 64);
    const ReferenceMeasure ref = ReferenceMeasure::lebesgue(g);
    if (rc.seed) {
      InstanceGenerator gen(*rc.seed);
      return gen.smooth_density(ref, h.midpoint(), 0.45 * (h.upper() - h.lower()));
    }
    return GridMeasure::from_function(ref, [&](const Point& x) {
      const Axis& a = g.axis(0);
      return 0.5 + 0.25 * std::cos(std::numbers::pi * (x[0] - a.lo) / (a.hi - a.lo));
    });
  }();
  const HeatTrajectory traj = solve_neumann_heat(rho0, rc.doc.value("T", 2.0), rc.doc.value("dt", 1e-3));
  const DecayReport decay = decay_report(traj);
  const DissipationReport diss = dissipation_report(traj, h);
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  const json j = {{"steps", traj.steps()},
                  {"mean", traj.mean()},
                  {"l2_rate", opt(decay.l2_rate)},
                  {"linf_rate", opt(decay.linf_rate)},
                  {"gradient_ratio", decay.gradient_ratio},
                  {"gradient_bound_holds", decay.gradient_bound_holds},
                  {"entropy_strictly_decreasing", diss.strictly_decreasing},
                  {"worst_dissipation_margin", diss.worst_margin},
                  {"cumulative_dissipation", diss.cumulative}};
  std::cout << j.dump(2) << '\n';
  if (rc.out) {
    fs::create_directories(*rc.out);
    write_json(*rc.out / "heat.json", j);
    write_heat_csv(*rc.out / "heat.csv", traj, h);
    const int every = std::max(1, traj.steps() / 20);
    for (int k = 0; k <= traj.steps(); k += every) {
      write_measure(*rc.out / ("frame_" + std::to_string(k)), traj.measure(k));
    }
  }
  return kExitOk;
}

int cmd_constants()
{
  const json rows = constants_table();
  std::cout << "p\td\tC_pd\tdilation_exponent\tfinite_action\tcomparison_constant\n";
  std::cout << std::fixed;
  for (const auto& r : rows) {
    std::cout << std::setprecision(1) << r["p"].get<double>() << '\t' << r["d"].get<int>() << '\t'
              << std::setprecision(10) << r["c_pd"].get<double>() << '\t' << std::setprecision(4)
              << r["dilation_exponent"].get<double>() << '\t' << (r["finite_action"].get<bool>() ? "true" : "false")
              << '\t' << std::setprecision(10) << r["comparison_constant"].get<double>() << '\n';
  }
  return kExitOk;
}

int cmd_oracle(const RunConfig& rc)
{
  TwoCellInstance inst{{0.2, 0.6}, {0.6, 0.2}};
  if (rc.seed && !rc.doc.contains("rho0")) {
    InstanceGenerator gen(*rc.seed);
    inst = gen.two_cell(rc.doc.value("time_steps", 8));
  }
  if (rc.doc.contains("rho0")) {
    const auto r0 = rc.doc.at("rho0").get<std::vector<double>>();
    const auto r1 = rc.doc.at("rho1").get<std::vector<double>>();
    if (r0.size() != 2 || r1.size() != 2) throw std::invalid_argument("oracle: rho0 and rho1 need two entries");
    inst.rho0 = {r0[0], r0[1]};
    inst.rho1 = {r1[0], r1[1]};
    inst.time_steps = rc.doc.value("time_steps", inst.time_steps);
  }
  inst.cell_width = rc.doc.value("cell_width", inst.cell_width);
  inst.weight_left = rc.doc.value("weight_left", inst.weight_left);
  inst.weight_right = rc.doc.value("weight_right", inst.weight_right);
  inst.p = rc.doc.value("p", inst.p);
  if (rc.doc.contains("mobility")) inst.mobility = mobility_from_json(rc.doc.at("mobility"));

  SolverConfig cfg = rc.doc.contains("solver") ? SolverConfig::from_json(rc.doc.at("solver")) : SolverConfig{};
  cfg.time_steps = inst.time_steps;
  const double exact = two_cell_exact(inst);
  const SolverResult r = compute_distance(inst.initial(), inst.final(), ActionDensity(inst.p, inst.mobility), cfg);
  const json j = {{"exact", exact},
                  {"solver", std::isfinite(r.distance) ? json(r.distance) : json("inf")},
                  {"status", to_string(r.status)},
                  {"abs_error", std::abs(exact - r.distance)}};
  std::cout << j.dump() << '\n';
  if (rc.out) {
    fs::create_directories(*rc.out);
    write_json(*rc.out / "oracle.json", j);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Generalized Wasserstein distances with concave mobility"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  auto* config_opt = app.add_option("--config", config_path, "JSON configuration file");
  auto* out_opt = app.add_option("--out", out_dir, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for every random draw");
  config_opt->check(CLI::ExistingFile);
  app.fallthrough();

  auto* distance = app.add_subcommand("distance", "Distance between two measures");
  auto* geodesic = app.add_subcommand("geodesic", "Distance plus exported geodesic frames");
  auto* properties = app.add_subcommand("properties", "Seeded property suites");
  auto* heat = app.add_subcommand("heat-decay", "Neumann heat flow decay and entropy report");
  auto* constants = app.add_subcommand("constants", "Table of constants");
  auto* oracle = app.add_subcommand("oracle", "Two-cell exact value against the solver");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    RunConfig rc;
    rc.doc = load_config(config_path);
    if (!config_path.empty()) rc.base = fs::path(config_path).parent_path();
    if (*out_opt) rc.out = fs::path(out_dir);
    if (*seed_opt) rc.seed = seed;

    if (*distance) return cmd_distance(rc, false);
    if (*geodesic) return cmd_distance(rc, true);
    if (*properties) return cmd_properties(rc);
    if (*heat) return cmd_heat_decay(rc);
    if (*constants) return cmd_constants();
    if (*oracle) return cmd_oracle(rc);
  } catch (const std::exception& e) {
    std::cerr << "gwd: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
