#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "sel/amenable.hpp"
#include "sel/errors.hpp"

using namespace sel;

namespace {

const double kLog2 = std::log(2.0);

FiniteSubset box(const GroupModel& g, int n) { return folner(g, n).base; }

}  // namespace

TEST_CASE("window counts over boxes are exact") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  GroupModel z = full.group();
  CoverSpec std_part = full.standard_partition();
  CoverSpec trivial = CoverSpec::whole_space();
  for (int n = 1; n <= 12; ++n) {
    MValue mv = m_value(full, std_part, trivial, box(z, n));
    CHECK(mv.exact);
    CHECK(mv.count == (std::uint64_t{1} << n));
    CHECK(std::abs(mv.log_n - n * kLog2) <= 1e-12);
  }

  ShiftSystem gm = ShiftSystem::builtin("golden-mean");
  MValue five = m_value(gm, gm.standard_partition(), trivial, box(z, 3));
  CHECK(five.count == 5);  // Fibonacci word count on a 3-window
  CHECK(five.log_n == doctest::Approx(std::log(5.0)));

  // the trivial base cover needs a single member everywhere
  MValue zero = m_value(full, trivial, std_part, box(z, 4));
  CHECK(zero.count == 1);
  CHECK(zero.log_n == doctest::Approx(0.0));
}

TEST_CASE("window counts are translation invariant and monotone") {
  ShiftSystem gm = ShiftSystem::builtin("golden-mean");
  GroupModel z = gm.group();
  CoverSpec std_part = gm.standard_partition();
  CoverSpec fine = gm.window_partition(1);
  CoverSpec trivial = CoverSpec::whole_space();
  for (int n = 1; n <= 6; ++n) {
    FiniteSubset f = box(z, n);
    MValue base = m_value(gm, std_part, trivial, f);
    for (std::int64_t shift : {-3, 2, 7}) {
      FiniteSubset fg = f.translated(z, GroupElement{shift, 0});
      MValue moved = m_value(gm, std_part, trivial, fg);
      CHECK(moved.count == base.count);  // exact, not approximate
    }
    // refining the base cover never shrinks the count
    MValue finer = m_value(gm, fine, trivial, f);
    CHECK(finer.count >= base.count);
  }
}

TEST_CASE("window counts are subadditive") {
  ShiftSystem gm = ShiftSystem::builtin("golden-mean");
  GroupModel z = gm.group();
  CoverSpec std_part = gm.standard_partition();
  CoverSpec trivial = CoverSpec::whole_space();
  for (int a = 1; a <= 4; ++a) {
    for (int b = 1; b <= 4; ++b) {
      FiniteSubset e = box(z, a);
      FiniteSubset f = box(z, b).translated(z, GroupElement{a + 2, 0});
      MValue me = m_value(gm, std_part, trivial, e);
      MValue mf = m_value(gm, std_part, trivial, f);
      MValue mu = m_value(gm, std_part, trivial, e.union_with(z, f));
      CHECK(mu.log_n <= me.log_n + mf.log_n + 1e-9);
    }
  }
}

TEST_CASE("join covers stay within the member bound") {
  ShiftSystem gm = ShiftSystem::builtin("golden-mean");
  GroupModel z = gm.group();
  CoverSpec joined = join_cover(gm, gm.standard_partition(), box(z, 3));
  CHECK(joined.member_count() <= 8);  // |base|^|F|
  CHECK(joined.member_count() == 5);  // occupied members only
}

TEST_CASE("normalized series for the full shift is flat at log 2") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  CoverSpec std_part = full.standard_partition();
  AmenableReport rep =
      h_a_conditional(full, std_part, CoverSpec::whole_space(), {2, 5, 10});
  for (double v : rep.trace.normalized) CHECK(v == doctest::Approx(kLog2));
  CHECK(rep.value == doctest::Approx(kLog2));
  CHECK(rep.headline.hi.value() == doctest::Approx(kLog2));
  CHECK(rep.headline.lo.value() == doctest::Approx(0.0));
}

TEST_CASE("golden-mean series approaches the spectral rate") {
  ShiftSystem gm = ShiftSystem::builtin("golden-mean");
  AmenableReport rep = h_a_topological(gm, {gm.window_partition(0)}, {5, 10, 20});
  double oracle = gm.transfer_matrix_entropy();
  CHECK(std::abs(rep.value - oracle) <= 0.05);
  CHECK(rep.trace.eventually_nonincreasing(1e-9));
  // the certified upper side dominates the true rate
  CHECK(rep.headline.hi.value() >= oracle - 1e-9);
}

TEST_CASE("conditioning on a finer partition collapses the count") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  AmenableReport rep = h_a_conditional(full, full.standard_partition(),
                                       full.window_partition(1), {2, 4, 6});
  for (double v : rep.trace.normalized) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("tail entropies collapse for coding-window covers") {
  for (const char* name : {"full-shift-2", "golden-mean"}) {
    ShiftSystem sys = ShiftSystem::builtin(name);
    auto family = default_cover_family(sys, 1);
    AmenableReport rep = h_a_tail(sys, family, family, {2, 4, 6});
    CHECK(rep.value <= 1e-9);
    CHECK(rep.headline.hi.value() <= 1e-9);
  }
  // finite systems have finitely many patterns overall
  ShiftSystem finite = ShiftSystem::full_shift(GroupModel::cyclic(4), 2, 8);
  auto family = default_cover_family(finite, 1);
  AmenableReport rep = h_a_tail(finite, family, family, {2, 4, 8});
  CHECK(rep.value <= kLog2 * 4 / 8 + 1e-9);
}

TEST_CASE("odometer pattern counts trend to zero") {
  ShiftSystem odo = ShiftSystem::builtin("odometer-2adic:4");
  AmenableReport rep =
      h_a_topological(odo, {odo.residue_partition(4)}, {8, 16, 32});
  // the pattern count equals the point count at every window length
  double m = std::log(16.0);
  CHECK(rep.trace.normalized[0] == doctest::Approx(m / 8.0));
  CHECK(rep.trace.normalized[2] == doctest::Approx(m / 32.0));
  CHECK(rep.value == doctest::Approx(m / 32.0));
}

TEST_CASE("cross-check of the two pipelines") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  CrossCheckReport cc =
      cross_check_sofic_amenable(full, default_schedule(full), {5, 10, 20});
  CHECK(cc.overlap);
  CHECK(cc.midpoint_diff <= 0.1);

  ShiftSystem gm = ShiftSystem::builtin("golden-mean");
  CrossCheckReport gc =
      cross_check_sofic_amenable(gm, default_schedule(gm), {5, 10, 20});
  CHECK(gc.overlap);
  CHECK(gc.midpoint_diff <= 0.1);

  ShiftSystem odo = ShiftSystem::builtin("odometer-2adic");
  CrossCheckReport oc = cross_check_sofic_amenable(odo, default_schedule(odo),
                                                   default_folner_indices(odo));
  CHECK(oc.sofic.headline.hi.value() <= 0.05);
  CHECK(oc.amenable.value <= 0.05);
}

TEST_CASE("rank-2 boxes count exactly") {
  ShiftSystem full2d = ShiftSystem::full_shift(GroupModel::lattice(2), 2, 4);
  GroupModel z2 = full2d.group();
  CoverSpec std_part = full2d.standard_partition();
  MValue mv = m_value(full2d, std_part, CoverSpec::whole_space(), box(z2, 2));
  CHECK(mv.count == 16);  // 2^(2x2)
  AmenableReport rep = h_a_topological(full2d, {std_part}, {1, 2, 3});
  for (double v : rep.trace.normalized) CHECK(v == doctest::Approx(kLog2));
}
