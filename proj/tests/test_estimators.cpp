#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "sel/errors.hpp"
#include "sel/estimators.hpp"

using namespace sel;

namespace {

const double kLog2 = std::log(2.0);

Schedule small_schedule(const ShiftSystem& sys) { return default_schedule(sys, {4, 8}); }

}  // namespace

TEST_CASE("topological entropy of the full shift") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  Schedule sched = default_schedule(full);  // d in {4, 8, 12}
  EntropyReport rep = h_topological(full, sched);
  CHECK(rep.headline.contains(kLog2));
  CHECK(rep.headline.width() <= 0.2);
  CHECK(rep.mode == "exact");
  // monotone consistency: growing F or shrinking delta never raises hi
  for (const auto& a : rep.cells) {
    for (const auto& b : rep.cells) {
      if (a.mode == CellMode::Capped || b.mode == CellMode::Capped) continue;
      if (a.d == b.d && a.eps == b.eps && a.f_radius <= b.f_radius &&
          a.delta >= b.delta) {
        CHECK(b.value.hi <= a.value.hi + ExtReal(1e-12));
      }
    }
  }
}

TEST_CASE("topological entropy of the golden-mean shift") {
  ShiftSystem gm = ShiftSystem::builtin("golden-mean");
  EntropyReport rep = h_topological(gm, default_schedule(gm));
  // cyclically allowed labelings: log(7)/4 at d=4 dominates the sigma max
  double phi_rate = std::log(0.5 * (1.0 + std::sqrt(5.0)));
  CHECK(rep.headline.hi.value() == doctest::Approx(std::log(7.0) / 4.0));
  CHECK(std::abs(rep.headline.midpoint() - phi_rate) <= 0.01);
}

TEST_CASE("single fixed point has zero entropy") {
  GroupModel z = GroupModel::lattice(1);
  FiniteSubset cell(z, {GroupElement{0, 0}});
  ShiftSystem fixed =
      ShiftSystem::from_forbidden(z, {"0", "1"}, {ForbiddenPattern{cell, {1}}}, 8);
  EntropyReport rep = h_topological(fixed, default_schedule(fixed));
  CHECK(rep.headline.lo.value() == doctest::Approx(0.0));
  CHECK(rep.headline.hi.value() == doctest::Approx(0.0));
}

TEST_CASE("odometer headline stays near zero") {
  ShiftSystem odo = ShiftSystem::builtin("odometer-2adic");  // depth 6
  Schedule sched = default_schedule(odo);
  EntropyReport rep = h_topological(odo, sched);
  CHECK(rep.headline.hi.value() <= 0.05);
  // the pessimistic side is empty below the truncation tail
  CHECK(rep.headline.lo.is_neg_inf());
}

TEST_CASE("cover entropies") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  Schedule sched = default_schedule(full);

  EntropyReport trivial = h_cover(full, CoverSpec::whole_space(), sched);
  CHECK(trivial.headline.lo.value() == doctest::Approx(0.0));
  CHECK(trivial.headline.hi.value() == doctest::Approx(0.0));

  CoverSpec std_part = full.standard_partition();
  EntropyReport rep = h_cover(full, std_part, sched);
  CHECK(std::abs(rep.headline.midpoint() - kLog2) <= 0.1);
  // h(cover) <= log N(cover, X)
  CHECK(rep.headline.hi.value() <=
        std::log(static_cast<double>(std_part.member_count())) + 1e-12);
}

TEST_CASE("conditional cover entropy") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  Schedule sched = small_schedule(full);
  CoverSpec std_part = full.standard_partition();

  // conditioning on the trivial cover reproduces the plain count
  EntropyReport plain = h_cover(full, std_part, sched);
  EntropyReport cond =
      h_cover_conditional(full, std_part, CoverSpec::whole_space(), sched);
  CHECK(cond.headline.lo.value() == doctest::Approx(plain.headline.lo.value()));
  CHECK(cond.headline.hi.value() == doctest::Approx(plain.headline.hi.value()));

  // conditioning on itself pins every product cell
  EntropyReport self = h_cover_conditional(full, std_part, std_part, sched);
  CHECK(self.headline.lo.value() == doctest::Approx(0.0));
  CHECK(self.headline.hi.value() == doctest::Approx(0.0));

  // a coarser cover inside a finer conditioning cover costs nothing
  CoverSpec fine = full.window_partition(1);
  EntropyReport coarse = h_cover_conditional(full, std_part, fine, sched);
  CHECK(coarse.headline.hi.value() == doctest::Approx(0.0));
}

TEST_CASE("chain inequality on brackets") {
  for (const char* name : {"full-shift-2", "golden-mean"}) {
    ShiftSystem sys = ShiftSystem::builtin(name);
    Schedule sched = small_schedule(sys);
    CoverSpec u1 = sys.window_partition(1);
    CoverSpec u2 = sys.standard_partition();
    EntropyReport h1 = h_cover(sys, u1, sched);
    EntropyReport h2 = h_cover(sys, u2, sched);
    EntropyReport cond = h_cover_conditional(sys, u1, u2, sched);
    CHECK(h1.headline.lo <= h2.headline.hi + cond.headline.hi + ExtReal(1e-12));
  }
}

TEST_CASE("space-level conditional entropy is small for expansive shifts") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  Schedule sched = small_schedule(full);
  CoverSpec u2 = full.standard_partition();
  EntropyReport rep =
      h_space_conditional(full, u2, default_cover_family(full, 2), sched);
  CHECK(rep.headline.hi.value() <= 0.05);
  CHECK(rep.cylinder_restricted);
}

TEST_CASE("tail entropy bounds and propagation") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  Schedule sched = small_schedule(full);
  auto family = default_cover_family(full, 2);
  EntropyReport star = h_star(full, family, family, sched);
  CHECK(star.headline.hi.value() <= 0.1);
  EntropyReport top = h_topological(full, sched);
  CHECK(star.headline.hi <= top.headline.hi + ExtReal(1e-12));
}

TEST_CASE("minus infinity propagates through empty microstate sets") {
  GroupModel z = GroupModel::lattice(1);
  FiniteSubset pair(z, {GroupElement{0, 0}, GroupElement{1, 0}});
  ShiftSystem alt = ShiftSystem::from_forbidden(
      z, {"0", "1"},
      {ForbiddenPattern{pair, {0, 0}}, ForbiddenPattern{pair, {1, 1}}}, 8);
  Schedule sched;
  sched.sigmas = {SoficMap::cyclic(3), SoficMap::cyclic(5)};  // odd cycles
  sched.f_radii = {1};
  sched.deltas = {0.25};
  sched.epsilons = {0.3};
  EntropyReport top = h_topological(alt, sched);
  CHECK(top.headline.lo.is_neg_inf());
  CHECK(top.headline.hi.is_neg_inf());
  EntropyReport cov = h_cover(alt, alt.standard_partition(), sched);
  CHECK(cov.headline.hi.is_neg_inf());
  auto family = default_cover_family(alt, 1);
  EntropyReport star = h_star(alt, family, family, sched);
  CHECK(star.headline.hi.is_neg_inf());
}

TEST_CASE("measure cover entropy") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  InvariantMeasure half = InvariantMeasure::bernoulli({0.5, 0.5});
  Schedule sched = default_schedule(full);
  sched.deltas = {0.1, 0.05};
  CoverSpec std_part = full.standard_partition();
  auto tests = default_test_family(full, 0);
  EntropyReport rep = h_measure_cover(full, half, std_part, tests, sched);
  CHECK(std::abs(rep.headline.midpoint() - kLog2) <= 0.15);

  // the filtered set is contained in the unfiltered one
  EntropyReport plain = h_cover(full, std_part, sched);
  CHECK(rep.headline.hi <= plain.headline.hi + ExtReal(1e-12));

  // a near-deterministic measure leaves few balanced labelings
  InvariantMeasure skew = InvariantMeasure::bernoulli({0.99, 0.01});
  EntropyReport low = h_measure_cover(full, skew, std_part, tests, sched);
  CHECK(low.headline.hi.value() <= 0.2);
}

TEST_CASE("partition counting entropy") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  InvariantMeasure half = InvariantMeasure::bernoulli({0.5, 0.5});
  CoverSpec alpha = full.standard_partition();
  Schedule sched = default_schedule(full);
  sched.f_radii = {1};
  sched.epsilons = {0.2, 0.1};
  EntropyReport rep = bowen_measure_entropy(full, half, alpha, sched);
  CHECK(rep.headline.hi.value() <= kLog2 + 1e-12);
  CHECK(rep.headline.contains(kLog2));
}

TEST_CASE("scale conditional counts") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  Schedule sched = small_schedule(full);
  double w0 = full.identity_weight();

  EntropyReport near =
      h_eps_conditional(full, 0.9 * w0, CoverSpec::whole_space(), sched);
  CHECK(std::abs(near.headline.midpoint() - kLog2) <= 0.1);

  EntropyReport coarse =
      h_eps_conditional(full, 1.5, CoverSpec::whole_space(), sched);
  CHECK(coarse.headline.lo.value() == doctest::Approx(0.0));
  CHECK(coarse.headline.hi.value() == doctest::Approx(0.0));

  // conditioning on the symbol partition pins every product cell
  EntropyReport pinned =
      h_eps_conditional(full, 0.9 * w0, full.standard_partition(), sched);
  CHECK(pinned.headline.hi.value() == doctest::Approx(0.0));

  // with a truncated evaluation radius the tail is positive and small
  // scales violate the soundness margin
  Schedule truncated = sched;
  truncated.radius = 1;
  truncated.epsilons = {0.9};
  CHECK_THROWS_AS(
      h_eps_conditional(full, 0.1, CoverSpec::whole_space(), truncated),
      MarginViolation);

  // sandwich against the cover count: the window-1 partition has certified
  // diameter tail(1) and Lebesgue number at least the smallest window weight
  CoverSpec v = full.window_partition(1);
  double eps1 = full.tail(1) + 0.01;
  double eps2 = full.weight(GroupElement{1, 0}) * 0.9;
  EntropyReport above =
      h_eps_conditional(full, eps1, CoverSpec::whole_space(), sched);
  EntropyReport mid = h_cover_conditional(full, v, CoverSpec::whole_space(), sched);
  EntropyReport below =
      h_eps_conditional(full, eps2, CoverSpec::whole_space(), sched);
  CHECK(above.headline.lo <= mid.headline.hi + ExtReal(1e-12));
  CHECK(mid.headline.lo <= below.headline.hi + ExtReal(1e-12));
}

TEST_CASE("classification of the standard examples") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  Schedule sched = small_schedule(full);
  ClassifyReport rep = classify(full, sched);
  CHECK(rep.expansive);
  CHECK(rep.expansive_constant.lo.value() ==
        doctest::Approx(full.identity_weight()));
  CHECK(rep.h_expansive_evidence);
  CHECK(rep.asympt_h_expansive_evidence);

  ShiftSystem odo = ShiftSystem::builtin("odometer-2adic:4");
  Schedule osched = default_schedule(odo);
  ClassifyReport orep = classify(odo, osched);
  CHECK(!orep.expansive);
  CHECK(orep.h_expansive_evidence);

  // a finite phase space is expansive with vanishing conditional counts
  ShiftSystem finite = ShiftSystem::full_shift(GroupModel::cyclic(6), 2, 8);
  Schedule fsched = default_schedule(finite);
  ClassifyReport frep = classify(finite, fsched);
  CHECK(frep.expansive);
  CHECK(frep.conditional.headline.hi.value() == doctest::Approx(0.0));
}

TEST_CASE("rank-2 smoke test") {
  ShiftSystem full2d = ShiftSystem::full_shift(GroupModel::lattice(2), 2, 4);
  Schedule sched = default_schedule(full2d);
  EntropyReport rep = h_topological(full2d, sched);
  CHECK(rep.headline.contains(kLog2));
  CHECK(rep.headline.width() <= 0.2);
}

TEST_CASE("schedule validation") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  Schedule sched = default_schedule(full);
  Schedule bad = sched;
  bad.deltas = {0.25, 0.5};
  CHECK_THROWS_AS(bad.validate(full), ConfigError);
  bad = sched;
  bad.radius = 1;  // positive tail at the truncated radius
  bad.epsilons = {1e-12};
  CHECK_THROWS_AS(h_topological(full, bad), MarginViolation);
  bad = sched;
  bad.sigmas.clear();
  CHECK_THROWS_AS(bad.validate(full), ConfigError);
  bad = sched;
  bad.sigmas = {SoficMap::torus(2, 2)};
  CHECK_THROWS_AS(bad.validate(full), ConfigError);
}
