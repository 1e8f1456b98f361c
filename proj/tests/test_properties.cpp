#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sel/acceptance.hpp"
#include "sel/errors.hpp"
#include "sel/property_suite.hpp"
#include "sel/report_io.hpp"

using namespace sel;

TEST_CASE("randomised property blocks hold") {
  // the acceptance suite runs 100 instances per block; a lighter pass here
  for (const auto& name : property_block_names()) {
    PropertyResult res = run_property_block(name, 2024, 40);
    INFO(name << ": " << res.detail);
    CHECK(res.instances >= 40);
    CHECK(res.failures == 0);
  }
  CHECK_THROWS_AS(run_property_block("nonesuch", 1, 1), ConfigError);
}

TEST_CASE("property runs are deterministic for a fixed seed") {
  PropertyResult a = run_property_block("nsep-monotone", 7, 20);
  PropertyResult b = run_property_block("nsep-monotone", 7, 20);
  CHECK(a.instances == b.instances);
  CHECK(a.failures == b.failures);
}

TEST_CASE("float formatting is fixed-width significant") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0 / 3.0) == "0.333333333333");
  CHECK(json_ext(ExtReal::neg_inf()) == "\"-inf\"");
  CHECK(json_ext(ExtReal::pos_inf()) == "\"inf\"");
  CHECK(json_ext(ExtReal(2.0)) == "2");
}

TEST_CASE("config round-trips stably") {
  ExperimentConfig cfg;
  cfg.system = "golden-mean";
  cfg.quantity = "h_cover";
  cfg.d_list = {4, 8};
  cfg.deltas = {0.5, 0.25};
  cfg.epsilons = {0.3};
  cfg.seed = 42;
  cfg.cover = "window:1";
  std::string once = cfg.to_json();
  std::string twice = ExperimentConfig::from_json(once).to_json();
  CHECK(once == twice);

  CHECK_THROWS_AS(ExperimentConfig::from_json("{broken"), ConfigError);
}

TEST_CASE("report serialisation is deterministic") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  Schedule sched = default_schedule(full, {4, 8});
  sched.seed = 9;
  std::string a = report_json(h_topological(full, sched));
  std::string b = report_json(h_topological(full, sched));
  CHECK(a == b);
  CHECK(a.find("\"quantity\":\"h_topological\"") != std::string::npos);
  CHECK(a.find("\"headline\"") != std::string::npos);
  CHECK(a.find("\"mode\"") != std::string::npos);
  CHECK(a.find("\"directionality\"") != std::string::npos);

  std::string csv = report_csv(h_topological(full, sched));
  CHECK(csv.rfind("d,F_radius,delta,eps,aux,lo,hi,mode\n", 0) == 0);
}

TEST_CASE("cover and measure specs parse") {
  ShiftSystem gm = ShiftSystem::builtin("golden-mean");
  CHECK(parse_cover(gm, "standard").member_count() == 2);
  CHECK(parse_cover(gm, "window:1").member_count() == 5);
  CHECK(parse_cover(gm, "whole").trivial);
  CHECK_THROWS_AS(parse_cover(gm, "bogus"), ConfigError);

  InvariantMeasure uni = parse_measure(gm, "uniform");
  CHECK(uni.stationary()[0] == doctest::Approx(0.5));
  InvariantMeasure ber = parse_measure(gm, "bernoulli:0.25,0.75");
  CHECK(ber.stationary()[1] == doctest::Approx(0.75));
  InvariantMeasure mk = parse_measure(gm, "markov:0.5,0.5;1,0");
  CHECK(mk.kind() == InvariantMeasure::Kind::Markov);
  CHECK_THROWS_AS(parse_measure(gm, "dirichlet:1"), ConfigError);
}

TEST_CASE("acceptance names and filters") {
  auto names = acceptance_criteria_names();
  CHECK(names.size() == 10);
  CHECK_THROWS_AS(run_acceptance("nonesuch", 0), ConfigError);
  AcceptanceOutcome one = run_acceptance("usc", 0);
  REQUIRE(one.results.size() == 1);
  CHECK(one.results[0].pass);
}
