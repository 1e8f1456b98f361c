#include "sel/property_suite.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sel/amenable.hpp"
#include "sel/errors.hpp"
#include "sel/estimators.hpp"

namespace sel {

namespace {

using Rng = std::mt19937_64;

int pick(Rng& rng, int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  return d(rng);
}

double pick_real(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}

// Random rank-1 subshift with nearest-neighbour constraints, guaranteed
// non-degenerate.
ShiftSystem random_system(Rng& rng) {
  GroupModel z = GroupModel::lattice(1);
  FiniteSubset pair(z, {GroupElement{0, 0}, GroupElement{1, 0}});
  for (int attempt = 0; attempt < 64; ++attempt) {
    int k = pick(rng, 2, 3);
    std::vector<ForbiddenPattern> forbidden;
    int nf = pick(rng, 0, k);
    for (int i = 0; i < nf; ++i) {
      forbidden.push_back(ForbiddenPattern{
          pair,
          {static_cast<std::uint8_t>(pick(rng, 0, k - 1)),
           static_cast<std::uint8_t>(pick(rng, 0, k - 1))}});
    }
    std::vector<std::string> alphabet;
    for (int a = 0; a < k; ++a) alphabet.push_back(std::to_string(a));
    ShiftSystem sys = ShiftSystem::from_forbidden(z, alphabet, forbidden, 4);
    try {
      auto pats = sys.allowed_patterns(ball(z, 1));
      bool extendable = false;
      for (const auto& p : pats) extendable = extendable || p.certified_extendable;
      if (extendable) return sys;
    } catch (const EmptySystem&) {
    }
  }
  return ShiftSystem::full_shift(GroupModel::lattice(1), 2, 4);
}

SoficMap random_map(Rng& rng, int d) {
  if (pick(rng, 0, 1) == 0) return SoficMap::cyclic(d);
  Perm p(d);
  for (int i = 0; i < d; ++i) p[i] = i;
  std::shuffle(p.begin(), p.end(), rng);
  return SoficMap::custom(GroupModel::lattice(1), {p}, "random");
}

Microstate random_state(Rng& rng, int k, int d) {
  Microstate m;
  for (int i = 0; i < d; ++i) {
    m.omega.push_back(static_cast<std::uint8_t>(pick(rng, 0, k - 1)));
  }
  return m;
}

// Coarsen the symbol partition into a random partition of the alphabet.
CoverSpec random_coarse_partition(Rng& rng, const ShiftSystem& sys) {
  int k = sys.alphabet_size();
  int groups = pick(rng, 1, k);
  std::vector<int> assign(k);
  for (int a = 0; a < k; ++a) assign[a] = pick(rng, 0, groups - 1);
  CoverSpec c;
  c.window = FiniteSubset(sys.group(), {sys.group().identity()});
  c.kind = CoverKind::Partition;
  c.label = "coarse";
  c.members.assign(groups, {});
  for (int a = 0; a < k; ++a) {
    c.members[assign[a]].push_back({static_cast<std::uint8_t>(a)});
  }
  c.members.erase(std::remove_if(c.members.begin(), c.members.end(),
                                 [](const auto& m) { return m.empty(); }),
                  c.members.end());
  return c;
}

struct Failure {
  bool failed = false;
  std::string detail;
  void note(const std::string& d) {
    if (!failed) detail = d;
    failed = true;
  }
};

PropertyResult membership_monotone(std::uint64_t seed, std::uint64_t instances) {
  PropertyResult res{"membership-monotone", 0, 0, ""};
  Rng rng(seed ^ 0x11u);
  GroupModel z = GroupModel::lattice(1);
  for (std::uint64_t it = 0; it < instances; ++it) {
    ShiftSystem sys = random_system(rng);
    int d = pick(rng, 3, 5);
    SoficMap sigma = random_map(rng, d);
    MicrostateEngine narrow(sys, sigma, ball(z, 1), 3);
    MicrostateEngine wide(sys, sigma, ball(z, 2), 3);
    Microstate m = random_state(rng, sys.alphabet_size(), d);
    double delta = pick_real(rng, 0.05, 0.8);
    double larger = delta * pick_real(rng, 1.1, 2.0);
    Verdict at_small = narrow.membership(m, delta).status;
    Verdict at_large = narrow.membership(m, larger).status;
    Verdict wide_small = wide.membership(m, delta).status;
    bool ok = true;
    if (at_small == Verdict::In && at_large != Verdict::In) ok = false;
    if (at_large == Verdict::Out && at_small != Verdict::Out) ok = false;
    // growing the window shrinks the microstate set
    if (wide_small == Verdict::In && at_small != Verdict::In) ok = false;
    if (at_small == Verdict::Out && wide_small != Verdict::Out) ok = false;
    ++res.instances;
    if (!ok) {
      ++res.failures;
      if (res.detail.empty()) {
        res.detail = "violation at instance " + std::to_string(it);
      }
    }
  }
  return res;
}

PropertyResult nsep_monotone(std::uint64_t seed, std::uint64_t instances) {
  PropertyResult res{"nsep-monotone", 0, 0, ""};
  Rng rng(seed ^ 0x22u);
  GroupModel z = GroupModel::lattice(1);
  Caps caps;
  for (std::uint64_t it = 0; it < instances; ++it) {
    ShiftSystem sys = random_system(rng);
    int d = pick(rng, 3, 5);
    SoficMap sigma = random_map(rng, d);
    MicrostateEngine engine(sys, sigma, ball(z, 1), sys.r_max());
    ScanResult scan = engine.enumerate(0.6, caps);
    std::vector<const Microstate*> pts;
    for (const auto& e : scan.entries) pts.push_back(&e.state);
    double e1 = pick_real(rng, 0.05, 0.4);
    double e2 = e1 * pick_real(rng, 1.2, 2.2);
    CountBracket at1 = n_separated(engine, pts, e1, caps);
    CountBracket at2 = n_separated(engine, pts, e2, caps);
    ++res.instances;
    if (at2.lo > at1.hi) {
      ++res.failures;
      if (res.detail.empty()) {
        res.detail = "count grew with eps at instance " + std::to_string(it);
      }
    }
  }
  return res;
}

PropertyResult cover_composition(std::uint64_t seed, std::uint64_t instances) {
  PropertyResult res{"cover-composition", 0, 0, ""};
  Rng rng(seed ^ 0x33u);
  GroupModel z = GroupModel::lattice(1);
  Caps caps;
  for (std::uint64_t it = 0; it < instances; ++it) {
    ShiftSystem sys = random_system(rng);
    int d = pick(rng, 3, 5);
    SoficMap sigma = SoficMap::cyclic(d);
    MicrostateEngine engine(sys, sigma, ball(z, 1), sys.r_max());
    ScanResult scan = engine.enumerate(0.5, caps);
    std::vector<const Microstate*> pts;
    for (const auto& e : scan.entries) pts.push_back(&e.state);
    if (pts.empty()) {
      ++res.instances;  // vacuous
      continue;
    }
    CoverSpec v1 = sys.window_partition(1);
    CoverSpec v2 = random_coarse_partition(rng, sys);
    CountBracket n1 = n_cover(engine, v1, pts, caps);
    CountBracket n2 = n_cover(engine, v2, pts, caps);
    CoverProfiler profiler(engine, v2);
    std::map<std::vector<std::uint32_t>, std::vector<const Microstate*>> groups;
    for (const auto* pt : pts) groups[profiler.profile(*pt)].push_back(pt);
    std::uint64_t worst = 0;
    for (const auto& [profile, group] : groups) {
      worst = std::max(worst, n_cover(engine, v1, group, caps).hi);
    }
    ++res.instances;
    if (n1.lo > n2.hi * worst) {
      ++res.failures;
      if (res.detail.empty()) {
        res.detail = "composition failed at instance " + std::to_string(it);
      }
    }
  }
  return res;
}

PropertyResult chain_inequalities(std::uint64_t seed, std::uint64_t instances) {
  PropertyResult res{"chain-inequalities", 0, 0, ""};
  Rng rng(seed ^ 0x44u);
  for (std::uint64_t it = 0; it < instances; ++it) {
    ShiftSystem sys = random_system(rng);
    Schedule sched;
    sched.sigmas = {SoficMap::cyclic(pick(rng, 3, 5))};
    sched.f_radii = {1};
    sched.deltas = {pick_real(rng, 0.3, 0.6)};
    sched.epsilons = {};
    CoverSpec u1 = sys.window_partition(1);
    CoverSpec u2 = random_coarse_partition(rng, sys);
    EntropyReport h1 = h_cover(sys, u1, sched);
    EntropyReport h2 = h_cover(sys, u2, sched);
    EntropyReport cond = h_cover_conditional(sys, u1, u2, sched);
    bool ok = h1.headline.lo <= h2.headline.hi + cond.headline.hi + ExtReal(1e-9);
    // measure analogue with a random Bernoulli law
    std::vector<double> p(sys.alphabet_size());
    double total = 0.0;
    for (auto& v : p) {
      v = pick_real(rng, 0.1, 1.0);
      total += v;
    }
    for (auto& v : p) v /= total;
    InvariantMeasure mu = InvariantMeasure::bernoulli(p);
    auto tests = default_test_family(sys, 0);
    EntropyReport m1 = h_measure_cover(sys, mu, u1, tests, sched);
    EntropyReport m2 = h_measure_cover(sys, mu, u2, tests, sched);
    ok = ok && m1.headline.lo <= m2.headline.hi + cond.headline.hi + ExtReal(1e-9);
    ++res.instances;
    if (!ok) {
      ++res.failures;
      if (res.detail.empty()) {
        res.detail = "chain inequality failed at instance " + std::to_string(it);
      }
    }
  }
  return res;
}

PropertyResult m_subadditivity(std::uint64_t seed, std::uint64_t instances) {
  PropertyResult res{"m-subadditivity", 0, 0, ""};
  Rng rng(seed ^ 0x55u);
  GroupModel z = GroupModel::lattice(1);
  for (std::uint64_t it = 0; it < instances; ++it) {
    ShiftSystem sys = random_system(rng);
    CoverSpec w1 = sys.standard_partition();
    CoverSpec w2 = pick(rng, 0, 1) == 0 ? CoverSpec::whole_space()
                                        : random_coarse_partition(rng, sys);
    int la = pick(rng, 1, 3), lb = pick(rng, 1, 3);
    int a = pick(rng, -2, 2), b = pick(rng, -2, 2);
    FiniteSubset e = folner(z, la).base.translated(z, GroupElement{a, 0});
    FiniteSubset f = folner(z, lb).base.translated(z, GroupElement{b, 0});
    MValue me = m_value(sys, w1, w2, e);
    MValue mf = m_value(sys, w1, w2, f);
    MValue mu = m_value(sys, w1, w2, e.union_with(z, f));
    ++res.instances;
    if (mu.log_n > me.log_n + mf.log_n + 1e-9) {
      ++res.failures;
      if (res.detail.empty()) {
        res.detail = "subadditivity failed at instance " + std::to_string(it);
      }
    }
  }
  return res;
}

PropertyResult m_translation(std::uint64_t seed, std::uint64_t instances) {
  PropertyResult res{"m-translation", 0, 0, ""};
  Rng rng(seed ^ 0x66u);
  GroupModel z = GroupModel::lattice(1);
  for (std::uint64_t it = 0; it < instances; ++it) {
    ShiftSystem sys = random_system(rng);
    CoverSpec w1 = sys.standard_partition();
    CoverSpec w2 = CoverSpec::whole_space();
    FiniteSubset f = folner(z, pick(rng, 1, 5)).base;
    MValue base = m_value(sys, w1, w2, f);
    GroupElement g{pick(rng, -6, 6), 0};
    MValue moved = m_value(sys, w1, w2, f.translated(z, g));
    ++res.instances;
    if (base.count != moved.count) {  // exact equality required
      ++res.failures;
      if (res.detail.empty()) {
        res.detail = "translation changed the count at instance " + std::to_string(it);
      }
    }
  }
  return res;
}

PropertyResult conventions(std::uint64_t seed, std::uint64_t instances) {
  PropertyResult res{"conventions", 0, 0, ""};
  Rng rng(seed ^ 0x77u);
  for (std::uint64_t it = 0; it < instances; ++it) {
    bool ok = true;
    double x = pick_real(rng, -10.0, 10.0);
    ExtReal ninf = ExtReal::neg_inf();
    ExtReal pinf = ExtReal::pos_inf();
    ok = ok && (ninf + ExtReal(x)).is_neg_inf();
    ok = ok && (ExtReal(x) + ninf).is_neg_inf();
    ok = ok && (ninf + pinf).is_neg_inf();
    ok = ok && (pinf + ExtReal(x)).is_pos_inf();
    ok = ok && log_count(0).is_neg_inf();
    ok = ok && ninf.scaled(pick_real(rng, 0.01, 4.0)).is_neg_inf();
    Bracket b{ninf, ExtReal(x)};
    Bracket c{ExtReal(x), ExtReal(x + 1.0)};
    ok = ok && (b + c).lo.is_neg_inf();
    ok = ok && bracket_max(b, c).lo == c.lo;
    ok = ok && bracket_min(b, c).lo.is_neg_inf();

    // empty microstate sets push -inf through a whole estimator run
    if (it % 25 == 0) {
      GroupModel z = GroupModel::lattice(1);
      FiniteSubset pair(z, {GroupElement{0, 0}, GroupElement{1, 0}});
      ShiftSystem alt = ShiftSystem::from_forbidden(
          z, {"0", "1"},
          {ForbiddenPattern{pair, {0, 0}}, ForbiddenPattern{pair, {1, 1}}}, 6);
      Schedule sched;
      sched.sigmas = {SoficMap::cyclic(3 + 2 * pick(rng, 0, 2))};  // odd cycle
      sched.f_radii = {1};
      sched.deltas = {0.25};
      sched.epsilons = {0.3};
      EntropyReport top = h_topological(alt, sched);
      ok = ok && top.headline.lo.is_neg_inf() && top.headline.hi.is_neg_inf();
    }
    ++res.instances;
    if (!ok) {
      ++res.failures;
      if (res.detail.empty()) {
        res.detail = "convention violated at instance " + std::to_string(it);
      }
    }
  }
  return res;
}

}  // namespace

std::vector<std::string> property_block_names() {
  return {"membership-monotone", "nsep-monotone",  "cover-composition",
          "chain-inequalities",  "m-subadditivity", "m-translation",
          "conventions"};
}

PropertyResult run_property_block(const std::string& name, std::uint64_t seed,
                                  std::uint64_t instances) {
  if (name == "membership-monotone") return membership_monotone(seed, instances);
  if (name == "nsep-monotone") return nsep_monotone(seed, instances);
  if (name == "cover-composition") return cover_composition(seed, instances);
  if (name == "chain-inequalities") return chain_inequalities(seed, instances);
  if (name == "m-subadditivity") return m_subadditivity(seed, instances);
  if (name == "m-translation") return m_translation(seed, instances);
  if (name == "conventions") return conventions(seed, instances);
  throw ConfigError("unknown property block: " + name);
}

std::vector<PropertyResult> run_property_suites(std::uint64_t seed,
                                                std::uint64_t instances) {
  std::vector<PropertyResult> out;
  for (const auto& name : property_block_names()) {
    out.push_back(run_property_block(name, seed, instances));
  }
  return out;
}

}  // namespace sel
