#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <vector>

#include "sel/errors.hpp"
#include "sel/shift.hpp"

using namespace sel;

namespace {

// Independent path-count oracle: words of length n in the golden-mean shift
// equal the entry sum of [[1,1],[1,0]]^(n-1).
std::uint64_t golden_word_count(int n) {
  std::array<std::array<std::uint64_t, 2>, 2> a{{{1, 1}, {1, 0}}};
  std::array<std::array<std::uint64_t, 2>, 2> acc{{{1, 0}, {0, 1}}};
  for (int k = 0; k < n - 1; ++k) {
    std::array<std::array<std::uint64_t, 2>, 2> next{};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l) next[i][j] += acc[i][l] * a[l][j];
    acc = next;
  }
  return acc[0][0] + acc[0][1] + acc[1][0] + acc[1][1];
}

FiniteSubset interval(const GroupModel& g, int lo, int hi) {
  std::vector<GroupElement> coords;
  for (int x = lo; x <= hi; ++x) coords.push_back({x, 0});
  return FiniteSubset(g, coords);
}

}  // namespace

TEST_CASE("metric weights are normalised with closed-form tails") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  double z = 3.0 - std::ldexp(1.0, -7);  // sum of 2^-|g| over |g| <= 8
  CHECK(full.identity_weight() == doctest::Approx(1.0 / z));
  CHECK(full.sum_weights(8) == doctest::Approx(1.0));
  CHECK(full.tail(8) == doctest::Approx(0.0));
  CHECK(full.tail(1) ==
        doctest::Approx((2.0 * (0.5 - std::ldexp(1.0, -8))) / z));
  // total mass at most one at every radius
  for (int r = 0; r <= 8; ++r) CHECK(full.sum_weights(r) <= 1.0 + 1e-12);
}

TEST_CASE("allowed pattern counts") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  GroupModel z = full.group();
  for (int n = 1; n <= 6; ++n) {
    CHECK(full.allowed_patterns(interval(z, 0, n - 1)).size() ==
          (std::size_t{1} << n));
  }

  ShiftSystem gm = ShiftSystem::builtin("golden-mean");
  // brute-force oracle over the 8 assignments on a 3-window
  std::size_t oracle = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        if (!(a == 1 && b == 1) && !(b == 1 && c == 1)) ++oracle;
  CHECK(oracle == 5);
  CHECK(gm.allowed_patterns(interval(z, 0, 2)).size() == oracle);
  CHECK(gm.allowed_patterns(interval(z, 0, 0)).size() == 2);
  for (const auto& p : gm.allowed_patterns(interval(z, 0, 2))) {
    CHECK(p.certified_extendable);
  }
}

TEST_CASE("pattern counts match the transfer-matrix oracle") {
  ShiftSystem gm = ShiftSystem::builtin("golden-mean");
  GroupModel z = gm.group();
  const TransferStructure& tr = gm.transfer();
  for (int n = 1; n <= 12; ++n) {
    std::uint64_t enumerated = gm.allowed_patterns(interval(z, 0, n - 1)).size();
    CHECK(enumerated == tr.count_words(n));
    CHECK(enumerated == golden_word_count(n));
  }
}

TEST_CASE("transfer matrix entropies") {
  CHECK(ShiftSystem::builtin("full-shift-2").transfer_matrix_entropy() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(ShiftSystem::builtin("full-shift-3").transfer_matrix_entropy() ==
        doctest::Approx(std::log(3.0)).epsilon(1e-10));
  double phi = 0.5 * (1.0 + std::sqrt(5.0));
  double tm = ShiftSystem::builtin("golden-mean").transfer_matrix_entropy();
  CHECK(std::abs(tm - std::log(phi)) <= 1e-8);

  // single fixed point: ban one of the two symbols outright
  GroupModel z = GroupModel::lattice(1);
  FiniteSubset cell(z, {GroupElement{0, 0}});
  ShiftSystem fixed = ShiftSystem::from_forbidden(
      z, {"0", "1"}, {ForbiddenPattern{cell, {1}}}, 4);
  CHECK(fixed.transfer_matrix_entropy() == doctest::Approx(0.0));
  CHECK(fixed.allowed_patterns(interval(z, 0, 3)).size() == 1);
}

TEST_CASE("rho intervals") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  GroupModel z = full.group();
  FiniteSubset w = ball(z, 2);
  auto pats = full.allowed_patterns(w);
  REQUIRE(pats.size() == 32);
  WindowPattern zero = pats[0];
  for (auto& p : pats) {
    bool all0 = true;
    for (auto s : p.symbols) all0 = all0 && s == 0;
    if (all0) zero = p;
  }
  Bracket same = rho_interval(full, zero, zero, 2);
  CHECK(same.lo.value() == doctest::Approx(0.0));
  CHECK(same.hi.value() == doctest::Approx(full.tail(2)));

  // differ only at the identity coordinate
  WindowPattern one_at_zero = zero;
  one_at_zero.symbols[w.index_of(GroupElement{0, 0})] = 1;
  Bracket d = rho_interval(full, zero, one_at_zero, 2);
  CHECK(d.lo.value() == doctest::Approx(full.identity_weight()));

  // differ everywhere on ball(1), evaluated at radius 1
  WindowPattern flip = zero;
  for (auto& s : flip.symbols) s = 1;
  Bracket e = rho_interval(full, zero, flip, 1);
  double expect = full.identity_weight() + 2.0 * full.weight(GroupElement{1, 0});
  CHECK(e.lo.value() == doctest::Approx(expect));

  CHECK_THROWS_AS(rho_interval(full, zero, one_at_zero, 5), WindowTooSmall);
}

TEST_CASE("rho is a pseudometric on patterns") {
  ShiftSystem gm = ShiftSystem::builtin("golden-mean");
  auto pats = gm.allowed_patterns(ball(gm.group(), 2));
  for (std::size_t i = 0; i < pats.size(); ++i) {
    CHECK(rho_interval(gm, pats[i], pats[i], 2).lo.value() == doctest::Approx(0.0));
    for (std::size_t j = 0; j < pats.size(); ++j) {
      Bracket ij = rho_interval(gm, pats[i], pats[j], 2);
      Bracket ji = rho_interval(gm, pats[j], pats[i], 2);
      CHECK(ij.lo.value() == doctest::Approx(ji.lo.value()));
      for (std::size_t k = 0; k < pats.size(); ++k) {
        Bracket ik = rho_interval(gm, pats[i], pats[k], 2);
        Bracket kj = rho_interval(gm, pats[k], pats[j], 2);
        CHECK(ij.lo.value() <= ik.lo.value() + kj.lo.value() + 1e-12);
      }
    }
  }
}

TEST_CASE("partitions") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  CHECK(full.standard_partition().member_count() == 2);
  ShiftSystem gm = ShiftSystem::builtin("golden-mean");
  CoverSpec std_gm = gm.standard_partition();
  CHECK(std_gm.member_count() == 2);
  for (const auto& m : std_gm.members) CHECK(!m.empty());
  CHECK(gm.window_partition(1).member_count() == 5);
}

TEST_CASE("cylinder probabilities") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  GroupModel z = full.group();
  InvariantMeasure half = InvariantMeasure::bernoulli({0.5, 0.5});
  FiniteSubset w3 = interval(z, 0, 2);
  CHECK(half.cylinder(full, w3, {0, 1, 0}) == doctest::Approx(0.125));

  InvariantMeasure skew = InvariantMeasure::bernoulli({0.25, 0.75});
  FiniteSubset w2 = interval(z, 0, 1);
  CHECK(skew.cylinder(full, w2, {1, 1}) == doctest::Approx(9.0 / 16.0));

  // max-entropy Markov chain of the golden-mean shift
  double phi = 0.5 * (1.0 + std::sqrt(5.0));
  InvariantMeasure parry = InvariantMeasure::markov(
      {{1.0 / phi, 1.0 / (phi * phi)}, {1.0, 0.0}});
  ShiftSystem gm = ShiftSystem::builtin("golden-mean");
  CHECK(parry.cylinder(gm, w2, {1, 1}) == doctest::Approx(0.0));
  CHECK(parry.stationary()[0] + parry.stationary()[1] == doctest::Approx(1.0));

  FiniteSubset gap(z, {GroupElement{0, 0}, GroupElement{2, 0}});
  CHECK_THROWS_AS(parry.cylinder(gm, gap, {0, 0}), UnsupportedWindow);
  CHECK(skew.cylinder(full, gap, {1, 1}) == doctest::Approx(9.0 / 16.0));
}

TEST_CASE("Bernoulli cylinder masses sum to one over a window") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  GroupModel z = full.group();
  InvariantMeasure skew = InvariantMeasure::bernoulli({0.3, 0.7});
  FiniteSubset w = interval(z, 0, 2);
  double total = 0.0;
  for (int code = 0; code < 8; ++code) {
    std::vector<std::uint8_t> sym = {static_cast<std::uint8_t>(code & 1),
                                     static_cast<std::uint8_t>((code >> 1) & 1),
                                     static_cast<std::uint8_t>((code >> 2) & 1)};
    total += skew.cylinder(full, w, sym);
  }
  CHECK(total == doctest::Approx(1.0));

  // Markov masses over allowed golden-mean words also sum to one
  double phi = 0.5 * (1.0 + std::sqrt(5.0));
  InvariantMeasure parry = InvariantMeasure::markov(
      {{1.0 / phi, 1.0 / (phi * phi)}, {1.0, 0.0}});
  ShiftSystem gm = ShiftSystem::builtin("golden-mean");
  double total_m = 0.0;
  for (const auto& p : gm.allowed_patterns(w)) {
    total_m += parry.cylinder(gm, w, p.symbols);
  }
  CHECK(total_m == doctest::Approx(1.0));
}

TEST_CASE("measure of joint constraints") {
  ShiftSystem full = ShiftSystem::builtin("full-shift-2");
  InvariantMeasure half = InvariantMeasure::bernoulli({0.5, 0.5});
  std::set<std::vector<std::uint8_t>> ones = {{1}};
  PatternConstraint c1{{GroupElement{0, 0}}, &ones};
  PatternConstraint c2{{GroupElement{1, 0}}, &ones};
  CHECK(measure_of_constraints(full, half, {c1, c2}) == doctest::Approx(0.25));
  CHECK(measure_of_constraints(full, half, {}) == doctest::Approx(1.0));
}

TEST_CASE("odometer points, action and metric") {
  SubgroupChain chain = SubgroupChain::parse("1,2,4");
  OdometerSystem o = odometer_system(chain, 2);
  CHECK(o.point_count() == 4);
  // the generator acts as a 4-cycle at depth 2
  std::uint64_t x = 0;
  for (int k = 0; k < 4; ++k) x = o.act(1, x);
  CHECK(x == 0);
  CHECK(o.rho(1, 1) == doctest::Approx(0.0));
  // adding one to (0,0) first disagrees at level 1
  CHECK(o.rho(0, o.act(1, 0)) == doctest::Approx(0.5));
  CHECK(o.rho(0, 2) == doctest::Approx(0.25));  // agrees mod 2, differs mod 4
  CHECK(o.truncation_error() == doctest::Approx(0.25));
}

TEST_CASE("odometer action is equicontinuous and isometric") {
  SubgroupChain chain = SubgroupChain::parse("1,2,4,8,16");
  for (int depth = 1; depth <= 4; ++depth) {
    OdometerSystem o = odometer_system(chain, depth);
    std::uint64_t m = o.point_count();
    for (std::uint64_t x = 0; x < m; ++x) {
      for (std::uint64_t y = 0; y < m; ++y) {
        for (std::int64_t g = -5; g <= 5; ++g) {
          // eps = delta = 2^-k works for every k: the action preserves rho
          CHECK(o.rho(o.act(g, x), o.act(g, y)) == doctest::Approx(o.rho(x, y)));
        }
      }
    }
  }
}

TEST_CASE("odometer symbol view") {
  SubgroupChain chain = SubgroupChain::parse("1,2,4,8");
  OdometerSystem o = odometer_system(chain, 2);
  ShiftSystem view = o.as_shift_system();
  CHECK(view.alphabet_size() == 4);
  CHECK(view.is_odometer_view());
  CHECK(view.r_max() == 0);
  CHECK(view.identity_weight() == doctest::Approx(1.0));
  CHECK(view.transfer_matrix_entropy() == doctest::Approx(0.0));
  // orbit patterns only, at any window length
  GroupModel z = view.group();
  CHECK(view.allowed_patterns(interval(z, 0, 5)).size() == 4);
  // symbol metric mirrors the odometer metric
  const SymbolMetric& sym = view.symbol_metric();
  for (std::uint32_t a = 0; a < 4; ++a) {
    for (std::uint32_t b = 0; b < 4; ++b) {
      if (a != b) CHECK(sym.lo(a, b) == doctest::Approx(o.rho(a, b)));
    }
  }
  CHECK(sym.hi(1, 1) == doctest::Approx(o.truncation_error()));

  CoverSpec res = view.residue_partition(1);
  CHECK(res.member_count() == 2);
  CHECK_THROWS_AS(view.residue_partition(5), ConfigError);
}

TEST_CASE("system JSON and registry") {
  ShiftSystem gm = ShiftSystem::from_json(R"({
    "group": "Z",
    "alphabet": ["0", "1"],
    "forbidden": [{"shape": [0, 1], "pattern": ["1", "1"]}],
    "R_max": 8,
    "name": "golden-mean-file"
  })");
  CHECK(gm.alphabet_size() == 2);
  GroupModel z = gm.group();
  CHECK(gm.allowed_patterns(interval(z, 0, 2)).size() == 5);
  CHECK_THROWS_AS(ShiftSystem::builtin("nonesuch"), ConfigError);

  ShiftSystem z2full = ShiftSystem::from_json(R"({
    "group": "Z2",
    "alphabet": ["a", "b"],
    "R_max": 4
  })");
  CHECK(z2full.allowed_patterns(ball(z2full.group(), 1)).size() == 32);
}

TEST_CASE("rank-2 windows enumerate with forbidden rejection") {
  GroupModel z2 = GroupModel::lattice(2);
  FiniteSubset pair(z2, {GroupElement{0, 0}, GroupElement{1, 0}});
  ShiftSystem hard = ShiftSystem::from_forbidden(
      z2, {"0", "1"}, {ForbiddenPattern{pair, {1, 1}}}, 4);
  // 2x1 window: 3 of 4 assignments survive
  auto pats = hard.allowed_patterns(pair);
  CHECK(pats.size() == 3);
  for (const auto& p : pats) CHECK(!p.certified_extendable);
}

TEST_CASE("empty systems are reported") {
  GroupModel z = GroupModel::lattice(1);
  FiniteSubset cell(z, {GroupElement{0, 0}});
  ShiftSystem dead = ShiftSystem::from_forbidden(
      z, {"0", "1"}, {ForbiddenPattern{cell, {0}}, ForbiddenPattern{cell, {1}}}, 4);
  CHECK_THROWS_AS(dead.allowed_patterns(cell), EmptySystem);
}
