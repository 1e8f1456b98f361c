#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "sel/errors.hpp"
#include "sel/microstate.hpp"

using namespace sel;

namespace {

FiniteSubset singleton(const GroupModel& g, std::int64_t x) {
  return FiniteSubset(g, {GroupElement{x, 0}});
}

std::vector<const Microstate*> pointers(const std::vector<Microstate>& v) {
  std::vector<const Microstate*> out;
  for (const auto& m : v) out.push_back(&m);
  return out;
}

std::vector<Microstate> all_binary(int d) {
  std::vector<Microstate> out;
  for (int code = 0; code < (1 << d); ++code) {
    Microstate m;
    for (int i = 0; i < d; ++i) {
      m.omega.push_back(static_cast<std::uint8_t>((code >> i) & 1));
    }
    out.push_back(m);
  }
  return out;
}

}  // namespace

TEST_CASE("membership of equivariant pullbacks") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  GroupModel z = full.group();
  SoficMap c4 = SoficMap::cyclic(4);
  MicrostateEngine engine(full, c4, singleton(z, 1), 8);

  // quotient maps make the pullback tuples exactly equivariant, so every
  // locally allowed labeling is certified once delta clears the tail
  for (const auto& m : all_binary(4)) {
    MembershipVerdict v = engine.membership(m, 1e-9);
    CHECK(v.status == Verdict::In);
    CHECK(v.mean_square.lo.value() == doctest::Approx(0.0));
  }
  // delta above the diameter accepts everything allowed
  for (const auto& m : all_binary(4)) {
    CHECK(engine.membership(m, 1.5).status == Verdict::In);
  }
}

TEST_CASE("forbidden pullback windows force out") {
  ShiftSystem gm = ShiftSystem::builtin("golden-mean");
  GroupModel z = gm.group();
  SoficMap c4 = SoficMap::cyclic(4);
  MicrostateEngine engine(gm, c4, singleton(z, 1), 8);
  Microstate bad{{1, 1, 0, 0}};
  CHECK(engine.membership(bad, 0.25).status == Verdict::Out);
  Microstate good{{1, 0, 1, 0}};
  CHECK(engine.membership(good, 0.25).status == Verdict::In);
}

TEST_CASE("scan over the full shift keeps everything") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  GroupModel z = full.group();
  SoficMap c3 = SoficMap::cyclic(3);
  MicrostateEngine engine(full, c3, singleton(z, 1), 8);
  ScanResult scan = engine.enumerate(0.5, Caps{});
  CHECK(scan.entries.size() == 8);
  for (const auto& e : scan.entries) {
    CHECK(scan.verdict_at(e, 0.5) == Verdict::In);
  }
}

TEST_CASE("scan over the golden-mean cycle matches the brute-force count") {
  ShiftSystem gm = ShiftSystem::builtin("golden-mean");
  GroupModel z = gm.group();
  SoficMap c3 = SoficMap::cyclic(3);
  // oracle: cyclically allowed binary strings of length 3 without adjacent
  // ones are 000, 100, 010, 001
  MicrostateEngine engine(gm, c3, singleton(z, 1), 8);
  ScanResult scan = engine.enumerate(0.1, Caps{});
  CHECK(scan.entries.size() == 4);
  for (const auto& e : scan.entries) {
    int ones = 0;
    for (auto s : e.state.omega) ones += s;
    CHECK(ones <= 1);
  }
}

TEST_CASE("a fully constrained cycle can be empty") {
  // forbid both 00 and 11: alternating sequences only, impossible on an odd
  // cycle, so the scan certifies emptiness
  GroupModel z = GroupModel::lattice(1);
  FiniteSubset pair(z, {GroupElement{0, 0}, GroupElement{1, 0}});
  ShiftSystem alt = ShiftSystem::from_forbidden(
      z, {"0", "1"},
      {ForbiddenPattern{pair, {0, 0}}, ForbiddenPattern{pair, {1, 1}}}, 8);
  SoficMap c3 = SoficMap::cyclic(3);
  MicrostateEngine engine(alt, c3, singleton(z, 1), 8);
  ScanResult scan = engine.enumerate(0.25, Caps{});
  CHECK(scan.entries.empty());
  // downstream separated counts give the log 0 = -inf convention
  CountBracket cb = n_separated(engine, {}, 0.4, Caps{});
  CHECK(cb.lo == 0);
  CHECK(cb.hi == 0);
  CHECK(log_count(cb.hi).is_neg_inf());
}

TEST_CASE("empirical checks") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  GroupModel z = full.group();
  SoficMap c2 = SoficMap::cyclic(2);
  MicrostateEngine engine(full, c2, singleton(z, 1), 8);
  InvariantMeasure half = InvariantMeasure::bernoulli({0.5, 0.5});

  Microstate balanced{{1, 0}};
  Microstate ones{{1, 1}};
  CHECK(engine.empirical_check(balanced, half, {}, 0.01));  // vacuous

  CylinderIndicator f{singleton(z, 0), {1}};
  CHECK(engine.empirical_check(balanced, half, {f}, 0.01));
  CHECK(!engine.empirical_check(ones, half, {f}, 0.5));
  CHECK(engine.empirical_check(ones, half, {f}, 0.51));
}

TEST_CASE("tuple distance intervals") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  GroupModel z = full.group();
  SoficMap c4 = SoficMap::cyclic(4);
  MicrostateEngine engine(full, c4, singleton(z, 1), 2);

  Microstate a{{0, 0, 0, 0}};
  Bracket same = engine.rho_d(a, a);
  CHECK(same.lo.value() == doctest::Approx(0.0));
  CHECK(same.hi.value() == doctest::Approx(full.tail(2)));

  Microstate b{{1, 0, 0, 0}};
  Bracket d1 = engine.rho_d(a, b);
  CHECK(d1.lo.value() >= full.identity_weight() - 1e-12);

  Microstate ones{{1, 1, 1, 1}};
  Bracket dall = engine.rho_d(a, ones);
  CHECK(dall.lo.value() == doctest::Approx(full.sum_weights(2)));
}

TEST_CASE("separated counts at unit scale") {
  // truncation at radius one puts half the metric mass at the identity
  ShiftSystem full = ShiftSystem::full_shift(GroupModel::lattice(1), 2, 1);
  CHECK(full.identity_weight() == doctest::Approx(0.5));
  GroupModel z = full.group();
  SoficMap c2 = SoficMap::cyclic(2);
  MicrostateEngine engine(full, c2, singleton(z, 1), 1);

  auto states = all_binary(2);
  auto pts = pointers(states);
  CountBracket cb = n_separated(engine, pts, 0.4, Caps{});
  CHECK(cb.lo == 4);
  CHECK(cb.hi == 4);
  CHECK(log_count(cb.lo).scaled(0.5).value() == doctest::Approx(std::log(2.0)));

  // a single point is trivially a separated set
  std::vector<const Microstate*> one = {pts[0]};
  CountBracket single = n_separated(engine, one, 0.4, Caps{});
  CHECK(single.lo == 1);
  CHECK(single.hi == 1);

  CHECK_THROWS_AS(n_separated(engine, pts, 0.0f, Caps{}), MarginViolation);
}

TEST_CASE("separated counts are monotone in eps") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  GroupModel z = full.group();
  SoficMap c3 = SoficMap::cyclic(3);
  MicrostateEngine engine(full, c3, singleton(z, 1), 8);
  auto states = all_binary(3);
  auto pts = pointers(states);
  double prev_hi = 1e18;
  for (double eps : {0.05, 0.1, 0.2, 0.3, 0.5, 0.9}) {
    CountBracket cb = n_separated(engine, pts, eps, Caps{});
    CHECK(static_cast<double>(cb.lo) <= prev_hi);  // lo(eps') <= hi(eps)
    prev_hi = static_cast<double>(cb.hi);
    CHECK(cb.lo <= cb.hi);
  }
}

TEST_CASE("cover counts") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  GroupModel z = full.group();
  SoficMap c3 = SoficMap::cyclic(3);
  MicrostateEngine engine(full, c3, singleton(z, 1), 8);
  auto states = all_binary(3);
  auto pts = pointers(states);

  CoverSpec trivial = CoverSpec::whole_space();
  CountBracket whole = n_cover(engine, trivial, pts, Caps{});
  CHECK(whole.lo == 1);
  CHECK(whole.hi == 1);
  CHECK(n_cover(engine, trivial, {}, Caps{}).hi == 0);

  // standard partition separates every labeling into its own product cell
  CoverSpec std_part = full.standard_partition();
  CountBracket cells = n_cover(engine, std_part, pts, Caps{});
  CHECK(cells.lo == 8);
  CHECK(cells.hi == 8);

  std::vector<const Microstate*> one = {pts[5]};
  CountBracket single = n_cover(engine, std_part, one, Caps{});
  CHECK(single.lo == 1);
  CHECK(single.hi == 1);
}

TEST_CASE("general cover counting via masks") {
  // two overlapping members that jointly cover both symbols: {0,1} and {1}
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  GroupModel z = full.group();
  SoficMap c2 = SoficMap::cyclic(2);
  MicrostateEngine engine(full, c2, singleton(z, 1), 8);
  CoverSpec cover;
  cover.window = singleton(z, 0);
  cover.kind = CoverKind::Open;
  cover.members = {{{0}, {1}}, {{1}}};
  auto states = all_binary(2);
  auto pts = pointers(states);
  CountBracket cb = n_cover(engine, cover, pts, Caps{});
  // member 0 already covers everything
  CHECK(cb.lo == 1);
  CHECK(cb.hi == 1);
  CHECK(cb.mode == CellMode::Exact);
}

TEST_CASE("cover composition inequality") {
  ShiftSystem gm = ShiftSystem::builtin("golden-mean");
  GroupModel z = gm.group();
  SoficMap c4 = SoficMap::cyclic(4);
  MicrostateEngine engine(gm, c4, singleton(z, 1), 8);
  ScanResult scan = engine.enumerate(0.25, Caps{});
  std::vector<const Microstate*> pts;
  for (const auto& e : scan.entries) pts.push_back(&e.state);

  CoverSpec v1 = gm.window_partition(1);
  CoverSpec v2 = gm.standard_partition();
  CountBracket n1 = n_cover(engine, v1, pts, Caps{});
  CountBracket n2 = n_cover(engine, v2, pts, Caps{});
  // per-cell maxima of the finer cover within the coarser cells
  CoverProfiler profiler(engine, v2);
  std::map<std::vector<std::uint32_t>, std::vector<const Microstate*>> groups;
  for (const auto* pt : pts) groups[profiler.profile(*pt)].push_back(pt);
  std::uint64_t worst = 0;
  for (const auto& [profile, group] : groups) {
    worst = std::max(worst, n_cover(engine, v1, group, Caps{}).hi);
  }
  CHECK(n1.lo <= n2.hi * worst);
}

TEST_CASE("partition counting matches the hand count") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  GroupModel z = full.group();
  InvariantMeasure half = InvariantMeasure::bernoulli({0.5, 0.5});
  CoverSpec alpha = full.standard_partition();
  SoficMap c2 = SoficMap::cyclic(2);

  // oracle at d=2, F={0}: the distance is 2|1/2 - m/2| over block sizes m,
  // so exactly the two balanced labelings pass at eps = 0.1
  ApCount ap = bowen_ap_count(full, c2, alpha, singleton(z, 0), 0.1, half, Caps{}, 1);
  CHECK(ap.mode == CellMode::Exact);
  CHECK(ap.exact_count == 2);

  // the total-variation bound 2 admits every labeled partition
  ApCount all = bowen_ap_count(full, c2, alpha, singleton(z, 0), 2.0, half, Caps{}, 1);
  CHECK(all.exact_count == 4);  // k^d

  SoficMap c12 = SoficMap::cyclic(12);
  ApCount big =
      bowen_ap_count(full, c12, alpha, singleton(z, 0), 0.1, half, Caps{}, 1);
  // binomial oracle: |m - 6| <= 0.6 keeps only m = 6
  CHECK(big.exact_count == 924);
}

TEST_CASE("sampled partition counts agree with the exhaustive count") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  GroupModel z = full.group();
  InvariantMeasure half = InvariantMeasure::bernoulli({0.5, 0.5});
  CoverSpec alpha = full.standard_partition();
  SoficMap c12 = SoficMap::cyclic(12);

  ApCount exact =
      bowen_ap_count(full, c12, alpha, singleton(z, 0), 0.1, half, Caps{}, 7);
  REQUIRE(exact.mode == CellMode::Exact);
  Caps small;
  small.scan_nodes = 100;  // force the sampled path
  ApCount mc = bowen_ap_count(full, c12, alpha, singleton(z, 0), 0.1, half, small, 7);
  CHECK(mc.mode == CellMode::Sampled);
  double truth = std::log(static_cast<double>(exact.exact_count));
  CHECK(mc.log_count.lo.value() <= truth);
  CHECK(mc.log_count.hi.value() >= truth);
}

TEST_CASE("membership monotonicity in delta and window") {
  ShiftSystem gm = ShiftSystem::builtin("golden-mean");
  GroupModel z = gm.group();
  // a deliberately rough map: transposition on four points
  Perm rough = {1, 0, 3, 2};
  SoficMap sigma = SoficMap::custom(z, {rough}, "rough");
  FiniteSubset f1 = singleton(z, 1);
  FiniteSubset f2(z, {GroupElement{1, 0}, GroupElement{2, 0}});
  MicrostateEngine e1(gm, sigma, f1, 4);
  MicrostateEngine e2(gm, sigma, f2, 4);
  for (const auto& m : all_binary(4)) {
    for (double delta : {0.1, 0.2, 0.4, 0.8}) {
      Verdict small = e1.membership(m, delta).status;
      Verdict large = e1.membership(m, delta * 1.5).status;
      if (small == Verdict::In) CHECK(large == Verdict::In);
      if (large == Verdict::Out) CHECK(small == Verdict::Out);
      // enlarging F can only shrink the microstate set
      Verdict wide = e2.membership(m, delta).status;
      if (wide == Verdict::In) CHECK(e1.membership(m, delta).status == Verdict::In);
      if (small == Verdict::Out) CHECK(e2.membership(m, delta).status == Verdict::Out);
    }
  }
}
