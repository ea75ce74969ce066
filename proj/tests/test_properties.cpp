#include "doctest.h"
#include "gwd/properties.hpp"

using namespace gwd;

namespace {

PropertyConfig small()
{
  PropertyConfig cfg;
  cfg.cells = 8;
  cfg.time_steps = 8;
  cfg.triples = 2;
  cfg.quadruples = 1;
  cfg.comparison_instances = 2;
  cfg.monotonicity_instances = 2;
  cfg.geodesic_instances = 1;
  cfg.oracle_instances = 2;
  return cfg;
}

}  // namespace

TEST_CASE("property suite on a small configuration")
{
  const PropertyReport rep = run_property_suite(small());
  CHECK(rep.checks.size() == 10);
  for (const PropertyCheck& c : rep.checks) {
    INFO(c.name);
    CHECK(c.passed);
    CHECK(c.instances > 0);
  }
  CHECK(rep.all_passed());
  const auto j = rep.to_json();
  CHECK(j.at("passed") == true);
  CHECK(j.at("checks").size() == 10);
  CHECK(j.at("constants").size() == 9);
}

TEST_CASE("a zero tolerance is reported as failure")
{
  PropertyConfig cfg = small();
  cfg.tolerance = 0.0;
  const PropertyCheck c = check_constant_speed(cfg);
  CHECK_FALSE(c.passed);
  CHECK(c.value > c.limit);
}

TEST_CASE("property configuration from JSON")
{
  const PropertyConfig cfg = PropertyConfig::from_json({{"seed", 5}, {"cells", 12}, {"tolerance", 1e-2}});
  CHECK(cfg.seed == 5);
  CHECK(cfg.cells == 12);
  CHECK(cfg.tolerance == 1e-2);
  CHECK(cfg.triples == PropertyConfig{}.triples);
}

TEST_CASE("constants table")
{
  const auto rows = constants_table();
  REQUIRE(rows.size() == 9);
  for (const auto& r : rows) {
    const double p = r.at("p");
    const int d = r.at("d");
    CHECK(r.at("finite_action").get<bool>() == (d > p / (p - 1.0)));
    if (p == 2.0 && d == 1) CHECK(r.at("c_pd").get<double>() == doctest::Approx(16.0 / 3.0));
  }
}
