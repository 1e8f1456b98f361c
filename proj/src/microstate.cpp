#include "sel/microstate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "sel/errors.hpp"

namespace sel {

namespace {

int max_word_length(const GroupModel& g, const FiniteSubset& f) {
  std::int64_t m = 0;
  for (const auto& e : f.elements()) m = std::max(m, g.word_length(e));
  return static_cast<int>(m);
}

}  // namespace

MicrostateEngine::MicrostateEngine(const ShiftSystem& sys, const SoficMap& sigma,
                                   const FiniteSubset& f, int radius)
    : sys_(&sys), sigma_(&sigma), f_(f), radius_(std::min(radius, sys.r_max())),
      d_(sigma.d()) {
  if (!(sigma.group() == sys.group())) {
    throw ConfigError("sofic map and system must share the group");
  }
  if (radius < 0) throw ConfigError("evaluation radius must be >= 0");
  const GroupModel& group = sys.group();
  pull_radius_ = radius_ + max_word_length(group, f_);

  FiniteSubset radius_ball = ball(group, radius_);
  for (const auto& g : radius_ball.elements()) {
    double w = sys.weight(g);
    if (w <= 0.0) continue;
    ball_coords_.push_back(g);
    ball_weights_.push_back(w);
    ball_perms_.push_back(&perm_of(g));
  }
  base_hi_ = sys.rho_tail(radius_);

  // Metric units: for s in F and g in ball(radius), compare the pullback at
  // sigma_{gs}(i) with the one at sigma_g(sigma_s(i)). Identical index pairs
  // contribute only the constant tail.
  const auto& f_elems = f_.elements();
  for (std::size_t si = 0; si < f_elems.size(); ++si) {
    const Perm ps = sigma.sigma(f_elems[si]);
    for (std::size_t gi = 0; gi < ball_coords_.size(); ++gi) {
      const GroupElement gs = group.add(ball_coords_[gi], f_elems[si]);
      const Perm& pgs = perm_of(gs);
      const Perm& pg = *ball_perms_[gi];
      for (int i = 0; i < d_; ++i) {
        int a = pgs[i];
        int b = pg[ps[i]];
        if (a != b) {
          units_.push_back(Unit{static_cast<int>(si), i, ball_weights_[gi], a, b});
        }
      }
    }
  }
  units_by_step_.assign(d_, {});
  for (std::size_t u = 0; u < units_.size(); ++u) {
    units_by_step_[std::max(units_[u].a, units_[u].b)].push_back(
        static_cast<int>(u));
  }

  // Forbidden placements inside each pullback window, deduplicated by the
  // induced index tuple.
  std::set<std::pair<const void*, std::vector<int>>> seen;
  FiniteSubset pull_ball = ball(group, pull_radius_);
  for (const auto& sg : sys.shape_groups()) {
    std::set<GroupElement> candidates;
    for (const auto& w : pull_ball.elements())
      for (const auto& u : sg.shape.elements())
        candidates.insert(group.add(w, group.inverse(u)));
    for (const auto& h : candidates) {
      bool inside = true;
      std::vector<const Perm*> perms;
      for (const auto& u : sg.shape.elements()) {
        GroupElement uh = group.add(u, h);
        if (group.word_length(uh) > pull_radius_) {
          inside = false;
          break;
        }
        perms.push_back(&perm_of(uh));
      }
      if (!inside) continue;
      for (int i = 0; i < d_; ++i) {
        std::vector<int> idx;
        idx.reserve(perms.size());
        for (const Perm* p : perms) idx.push_back((*p)[i]);
        auto key = std::make_pair(static_cast<const void*>(&sg.patterns), idx);
        if (seen.insert(key).second) {
          funits_.push_back(FUnit{std::move(idx), &sg.patterns});
        }
      }
    }
  }
  funits_by_step_.assign(d_, {});
  for (std::size_t u = 0; u < funits_.size(); ++u) {
    funits_by_step_[*std::max_element(funits_[u].idx.begin(),
                                      funits_[u].idx.end())]
        .push_back(static_cast<int>(u));
  }
}

const Perm& MicrostateEngine::perm_of(const GroupElement& g) const {
  GroupElement c = sys_->group().canonical(g);
  auto it = perm_cache_.find(c);
  if (it != perm_cache_.end()) return it->second;
  return perm_cache_.emplace(c, sigma_->sigma(c)).first->second;
}

std::uint8_t MicrostateEngine::pullback(const Microstate& m, int i,
                                        const GroupElement& g) const {
  return m.omega[perm_of(g)[i]];
}

std::vector<std::uint8_t> MicrostateEngine::pullback_window(
    const Microstate& m, int i, const FiniteSubset& window) const {
  std::vector<std::uint8_t> out;
  out.reserve(window.size());
  for (const auto& g : window.elements()) out.push_back(pullback(m, i, g));
  return out;
}

MembershipVerdict MicrostateEngine::membership(const Microstate& m,
                                               double delta) const {
  if (m.d() != d_) throw ConfigError("microstate degree does not match the map");
  if (delta <= 0.0) throw ConfigError("delta must be positive");
  const SymbolMetric& sym = sys_->symbol_metric();
  MembershipVerdict v;

  // Local allowedness of every pullback window; a hit certifies the tuple is
  // not made of system points.
  std::vector<std::uint8_t> key;
  for (const auto& fu : funits_) {
    key.clear();
    for (int idx : fu.idx) key.push_back(m.omega[idx]);
    if (fu.patterns->count(key)) {
      v.status = Verdict::Out;
      v.witness = sys_->group().identity();
      v.mean_square = Bracket{ExtReal(1.0), ExtReal(1.0)};
      return v;
    }
  }

  const auto& f_elems = f_.elements();
  double worst_lo = 0.0, worst_hi = 0.0;
  GroupElement worst_elem = f_elems.empty() ? sys_->group().identity() : f_elems[0];
  std::vector<double> lo(d_), hi(d_);
  for (std::size_t si = 0; si < f_elems.size(); ++si) {
    std::fill(lo.begin(), lo.end(), 0.0);
    std::fill(hi.begin(), hi.end(), base_hi_);
    for (const auto& u : units_) {
      if (u.s_idx != static_cast<int>(si)) continue;
      std::uint8_t a = m.omega[u.a], b = m.omega[u.b];
      lo[u.i] += u.w * sym.lo(a, b);
      hi[u.i] += u.w * (sym.hi(a, b) - sym.equal_tail);
    }
    double slo = 0.0, shi = 0.0;
    for (int i = 0; i < d_; ++i) {
      slo += lo[i] * lo[i];
      double h = std::min(hi[i], 1.0);
      shi += h * h;
    }
    slo = std::sqrt(slo / d_);
    shi = std::sqrt(shi / d_);
    if (shi > worst_hi) worst_hi = shi;
    if (slo > worst_lo) {
      worst_lo = slo;
      worst_elem = f_elems[si];
    }
  }
  v.mean_square = Bracket{ExtReal(worst_lo), ExtReal(worst_hi)};
  v.witness = worst_elem;
  if (worst_lo >= delta) {
    v.status = Verdict::Out;
  } else if (worst_hi < delta) {
    v.status = Verdict::In;
  } else {
    v.status = Verdict::Unknown;
  }
  return v;
}

ScanResult MicrostateEngine::enumerate(double delta_max, const Caps& caps) const {
  if (delta_max <= 0.0) throw ConfigError("delta must be positive");
  const SymbolMetric& sym = sys_->symbol_metric();
  const int k = sys_->alphabet_size();
  const int ns = static_cast<int>(f_.size());
  const double budget =
      static_cast<double>(d_) * delta_max * delta_max;

  ScanResult result;
  result.delta_max = delta_max;
  if (d_ == 0) return result;

  std::vector<std::uint8_t> omega(d_, 0);
  std::vector<double> lo(static_cast<std::size_t>(ns) * d_, 0.0);
  std::vector<double> hi(static_cast<std::size_t>(ns) * d_, base_hi_);
  std::vector<double> acc_lo(ns, 0.0);
  struct TrailEntry {
    int flat;
    double old_lo;
    double old_hi;
  };
  std::vector<std::vector<TrailEntry>> trail(d_);
  std::vector<std::uint8_t> key;

  std::function<void(int)> recurse = [&](int j) {
    if (j == d_) {
      double worst_lo = 0.0, worst_hi = 0.0;
      for (int s = 0; s < ns; ++s) {
        double shi = 0.0;
        for (int i = 0; i < d_; ++i) {
          double h = std::min(hi[static_cast<std::size_t>(s) * d_ + i], 1.0);
          shi += h * h;
        }
        worst_lo = std::max(worst_lo, acc_lo[s]);
        worst_hi = std::max(worst_hi, shi);
      }
      if (worst_lo >= budget) return;  // certified out at the scan threshold
      ScanEntry e;
      e.state = Microstate{omega};
      e.stat_lo = std::sqrt(std::max(0.0, worst_lo) / d_);
      e.stat_hi = std::sqrt(worst_hi / d_);
      result.entries.push_back(std::move(e));
      return;
    }
    for (int a = 0; a < k; ++a) {
      if (++result.nodes > caps.scan_nodes) {
        throw CapExceeded("microstate scan exceeded the node cap");
      }
      omega[j] = static_cast<std::uint8_t>(a);
      bool ok = true;
      for (int fu : funits_by_step_[j]) {
        key.clear();
        for (int idx : funits_[fu].idx) key.push_back(omega[idx]);
        if (funits_[fu].patterns->count(key)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        trail[j].clear();
        for (int ui : units_by_step_[j]) {
          const Unit& u = units_[ui];
          std::uint8_t sa = omega[u.a], sb = omega[u.b];
          double dlo = sym.lo(sa, sb);
          double dhi = sym.hi(sa, sb);
          int flat = u.s_idx * d_ + u.i;
          trail[j].push_back(TrailEntry{flat, lo[flat], hi[flat]});
          double nlo = lo[flat] + u.w * dlo;
          acc_lo[u.s_idx] += nlo * nlo - lo[flat] * lo[flat];
          lo[flat] = nlo;
          hi[flat] += u.w * (dhi - sym.equal_tail);
        }
        bool pruned = false;
        for (int s = 0; s < ns; ++s) {
          if (acc_lo[s] >= budget) {
            pruned = true;
            break;
          }
        }
        if (!pruned) recurse(j + 1);
        for (auto it = trail[j].rbegin(); it != trail[j].rend(); ++it) {
          int s = it->flat / d_;
          acc_lo[s] += it->old_lo * it->old_lo - lo[it->flat] * lo[it->flat];
          lo[it->flat] = it->old_lo;
          hi[it->flat] = it->old_hi;
        }
      }
    }
  };
  recurse(0);
  return result;
}

bool MicrostateEngine::empirical_check(const Microstate& m,
                                       const InvariantMeasure& mu,
                                       const std::vector<CylinderIndicator>& tests,
                                       double delta) const {
  for (const auto& t : tests) {
    std::vector<const Perm*> perms;
    perms.reserve(t.window.size());
    for (const auto& g : t.window.elements()) perms.push_back(&perm_of(g));
    std::uint64_t count = 0;
    for (int i = 0; i < d_; ++i) {
      bool match = true;
      for (std::size_t w = 0; w < perms.size(); ++w) {
        if (m.omega[(*perms[w])[i]] != t.symbols[w]) {
          match = false;
          break;
        }
      }
      if (match) ++count;
    }
    double freq = static_cast<double>(count) / static_cast<double>(d_);
    double expect = mu.cylinder(*sys_, t.window, t.symbols);
    if (std::abs(freq - expect) >= delta) return false;
  }
  return true;
}

Bracket MicrostateEngine::rho_d(const Microstate& a, const Microstate& b) const {
  const SymbolMetric& sym = sys_->symbol_metric();
  double tail = sys_->tail(radius_);
  double max_lo = 0.0, max_hi = 0.0;
  for (int i = 0; i < d_; ++i) {
    double lo = 0.0, hi = tail;
    for (std::size_t gi = 0; gi < ball_coords_.size(); ++gi) {
      std::uint8_t sa = a.omega[(*ball_perms_[gi])[i]];
      std::uint8_t sb = b.omega[(*ball_perms_[gi])[i]];
      lo += ball_weights_[gi] * sym.lo(sa, sb);
      hi += ball_weights_[gi] * sym.hi(sa, sb);
    }
    max_lo = std::max(max_lo, lo);
    max_hi = std::max(max_hi, std::min(hi, 1.0));
  }
  return Bracket{ExtReal(max_lo), ExtReal(max_hi)};
}

// ---------------------------------------------------------------------------
// Separated sets

namespace {

class BitMatrix {
 public:
  explicit BitMatrix(std::size_t n) : words_((n + 63) / 64), bits_(n * words_, 0) {}
  void set(std::size_t r, std::size_t c) {
    bits_[r * words_ + c / 64] |= std::uint64_t{1} << (c % 64);
  }
  bool get(std::size_t r, std::size_t c) const {
    return (bits_[r * words_ + c / 64] >> (c % 64)) & 1;
  }

 private:
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

// Exact maximum clique with a greedy colouring bound (branch and bound).
class MaxClique {
 public:
  MaxClique(const BitMatrix& adj, std::size_t n, std::uint64_t budget)
      : adj_(adj), n_(n), budget_(budget) {}

  bool solve(std::size_t greedy_lower, std::size_t& best) {
    best_ = greedy_lower;
    std::vector<int> p(n_);
    for (std::size_t i = 0; i < n_; ++i) p[i] = static_cast<int>(i);
    complete_ = true;
    expand(p, 0);
    best = best_;
    return complete_;
  }

 private:
  void expand(std::vector<int>& p, std::size_t rsize) {
    if (p.empty()) {
      best_ = std::max(best_, rsize);
      return;
    }
    // budget in work units: the greedy colouring below is quadratic in |p|
    nodes_ += 1 + p.size() * p.size();
    if (nodes_ > budget_) {
      complete_ = false;
      return;
    }
    // greedy colouring; colour classes bound the largest clique in p
    std::vector<int> order, colour;
    order.reserve(p.size());
    colour.reserve(p.size());
    {
      std::vector<char> used(p.size(), 0);
      std::size_t assigned = 0;
      int c = 0;
      while (assigned < p.size()) {
        ++c;
        for (std::size_t i = 0; i < p.size(); ++i) {
          if (used[i]) continue;
          bool clash = false;
          for (std::size_t j = 0; j < order.size(); ++j) {
            if (colour[j] == c && adj_.get(p[i], order[j])) {
              clash = true;
              break;
            }
          }
          if (!clash) {
            used[i] = 1;
            order.push_back(p[i]);
            colour.push_back(c);
            ++assigned;
          }
        }
      }
    }
    for (int i = static_cast<int>(order.size()) - 1; i >= 0; --i) {
      if (!complete_) return;
      if (rsize + static_cast<std::size_t>(colour[i]) <= best_) return;
      int v = order[i];
      std::vector<int> next;
      for (int j = 0; j < i; ++j) {
        if (adj_.get(v, order[j])) next.push_back(order[j]);
      }
      if (next.empty()) {
        best_ = std::max(best_, rsize + 1);
      } else {
        expand(next, rsize + 1);
      }
    }
  }

  const BitMatrix& adj_;
  std::size_t n_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  std::size_t best_ = 0;
  bool complete_ = true;
};

}  // namespace

CountBracket n_separated(const MicrostateEngine& engine,
                         const std::vector<const Microstate*>& points, double eps,
                         const Caps& caps) {
  const ShiftSystem& sys = engine.system();
  double margin = 2.0 * sys.rho_tail(engine.radius());
  if (eps <= margin) {
    throw MarginViolation("eps must exceed twice the metric tail");
  }
  std::size_t n = points.size();
  if (n == 0) return CountBracket{0, 0, CellMode::Exact};
  if (n == 1) return CountBracket{1, 1, CellMode::Exact};
  if (n > caps.exact_vertices) {
    throw CapExceeded("separated-set instance exceeds the vertex cap");
  }

  const SymbolMetric& sym = sys.symbol_metric();
  double tail = sys.tail(engine.radius());
  std::vector<const Perm*> perms;
  std::vector<double> weights;
  FiniteSubset radius_ball = ball(sys.group(), engine.radius());
  for (const auto& g : radius_ball.elements()) {
    double w = sys.weight(g);
    if (w <= 0.0) continue;
    weights.push_back(w);
    perms.push_back(&engine.perm_of(g));
  }

  const double w_e = sys.identity_weight();
  auto classify = [&](std::size_t u, std::size_t v, bool& certified, bool& possible) {
    const Microstate& a = *points[u];
    const Microstate& b = *points[v];
    // the identity coordinate alone often certifies separation
    for (int i = 0; i < engine.d(); ++i) {
      if (a.omega[i] != b.omega[i] && w_e * sym.lo(a.omega[i], b.omega[i]) >= eps) {
        certified = true;
        possible = true;
        return;
      }
    }
    double max_lo = 0.0, max_hi = 0.0;
    for (int i = 0; i < engine.d(); ++i) {
      double lo = 0.0, hi = tail;
      for (std::size_t gi = 0; gi < perms.size(); ++gi) {
        std::uint8_t sa = a.omega[(*perms[gi])[i]];
        std::uint8_t sb = b.omega[(*perms[gi])[i]];
        lo += weights[gi] * sym.lo(sa, sb);
        hi += weights[gi] * sym.hi(sa, sb);
        if (lo >= eps) {
          certified = true;
          possible = true;
          return;
        }
      }
      max_lo = std::max(max_lo, lo);
      max_hi = std::max(max_hi, std::min(hi, 1.0));
    }
    certified = max_lo >= eps;
    possible = max_hi >= eps;
  };

  BitMatrix certified(n), possible(n);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      bool c = false, p = false;
      classify(u, v, c, p);
      if (c) {
        certified.set(u, v);
        certified.set(v, u);
      }
      if (p) {
        possible.set(u, v);
        possible.set(v, u);
      }
    }
  }

  // greedy maximal certified-separated subset (lower endpoint)
  std::vector<std::size_t> kept;
  for (std::size_t u = 0; u < n; ++u) {
    bool ok = true;
    for (std::size_t v : kept) {
      if (!certified.get(u, v)) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(u);
  }
  std::uint64_t lo_count = kept.size();
  // every pair certified separated: nothing can beat taking all points
  if (lo_count == n) return CountBracket{n, n, CellMode::Exact};

  MaxClique solver(possible, n, caps.bnb_nodes);
  std::size_t best = 0;
  if (solver.solve(kept.size(), best)) {
    return CountBracket{lo_count, best, CellMode::Exact};
  }
  // covering fallback: pairwise definitely-close groups hold at most one
  // separated point each
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t u = 0; u < n; ++u) {
    bool placed = false;
    for (auto& g : groups) {
      bool close = true;
      for (std::size_t v : g) {
        if (possible.get(u, v)) {
          close = false;
          break;
        }
      }
      if (close) {
        g.push_back(u);
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back({u});
  }
  return CountBracket{lo_count, groups.size(), CellMode::Greedy};
}

// ---------------------------------------------------------------------------
// Cover counts

namespace {

struct CoverIndex {
  std::vector<const Perm*> window_perms;
  std::map<std::vector<std::uint8_t>, int> first_member;
  std::map<std::vector<std::uint8_t>, std::uint64_t> masks;

  CoverIndex(const MicrostateEngine& engine, const CoverSpec& cover,
             bool masks_needed) {
    for (const auto& g : cover.window.elements())
      window_perms.push_back(&engine.perm_of(g));
    for (std::size_t m = 0; m < cover.members.size(); ++m) {
      for (const auto& pat : cover.members[m]) {
        auto it = first_member.find(pat);
        if (it == first_member.end()) first_member[pat] = static_cast<int>(m);
        if (masks_needed) masks[pat] |= std::uint64_t{1} << m;
      }
    }
  }

  std::vector<std::uint8_t> key_of(const Microstate& m, int i) const {
    std::vector<std::uint8_t> key;
    key.reserve(window_perms.size());
    for (const Perm* p : window_perms) key.push_back(m.omega[(*p)[i]]);
    return key;
  }
};

}  // namespace

std::vector<std::uint32_t> cover_profile(const MicrostateEngine& engine,
                                         const CoverSpec& cover,
                                         const Microstate& point) {
  return CoverProfiler(engine, cover).profile(point);
}

CoverProfiler::CoverProfiler(const MicrostateEngine& engine, const CoverSpec& cover)
    : engine_(&engine), trivial_(cover.trivial) {
  if (trivial_) return;
  for (const auto& g : cover.window.elements())
    window_perms_.push_back(&engine.perm_of(g));
  for (std::size_t m = 0; m < cover.members.size(); ++m) {
    for (const auto& pat : cover.members[m]) {
      first_member_.emplace(pat, static_cast<int>(m));
    }
  }
}

std::vector<std::uint32_t> CoverProfiler::profile(const Microstate& point) const {
  std::vector<std::uint32_t> out(engine_->d(), 0);
  if (trivial_) return out;
  std::vector<std::uint8_t> key(window_perms_.size());
  for (int i = 0; i < engine_->d(); ++i) {
    for (std::size_t w = 0; w < window_perms_.size(); ++w) {
      key[w] = point.omega[(*window_perms_[w])[i]];
    }
    auto it = first_member_.find(key);
    if (it == first_member_.end()) {
      throw NotCovered("pullback point outside every cover member");
    }
    out[i] = static_cast<std::uint32_t>(it->second);
  }
  return out;
}

CountBracket n_cover(const MicrostateEngine& engine, const CoverSpec& cover,
                     const std::vector<const Microstate*>& points,
                     const Caps& caps) {
  std::size_t n = points.size();
  if (n == 0) return CountBracket{0, 0, CellMode::Exact};
  if (cover.trivial) return CountBracket{1, 1, CellMode::Exact};

  if (cover.kind == CoverKind::Partition) {
    CoverIndex index(engine, cover, false);
    std::set<std::vector<std::uint32_t>> cells;
    for (const auto* pt : points) {
      std::vector<std::uint32_t> profile(engine.d());
      for (int i = 0; i < engine.d(); ++i) {
        auto it = index.first_member.find(index.key_of(*pt, i));
        if (it == index.first_member.end()) {
          throw NotCovered("pullback point outside every cover member");
        }
        profile[i] = static_cast<std::uint32_t>(it->second);
      }
      cells.insert(std::move(profile));
    }
    std::uint64_t c = cells.size();
    return CountBracket{c, c, CellMode::Exact};
  }

  // General covers: delegate to the shared mask-based counter.
  if (cover.member_count() > 64) {
    throw ConfigError("general covers support at most 64 members");
  }
  CoverIndex index(engine, cover, true);
  std::vector<std::vector<std::uint64_t>> mask(n);
  for (std::size_t p = 0; p < n; ++p) {
    mask[p].resize(engine.d());
    for (int i = 0; i < engine.d(); ++i) {
      auto it = index.masks.find(index.key_of(*points[p], i));
      if (it == index.masks.end() || it->second == 0) {
        throw NotCovered("pullback point outside every cover member");
      }
      mask[p][i] = it->second;
    }
  }
  return product_cover_count(mask, cover.member_count(), caps);
}

CountBracket product_cover_count(const std::vector<std::vector<std::uint64_t>>& masks,
                                 std::size_t member_count, const Caps& caps) {
  std::size_t n = masks.size();
  if (n == 0) return CountBracket{0, 0, CellMode::Exact};
  std::size_t ncoord = masks.front().size();
  auto compatible = [&](const std::vector<std::uint64_t>& group,
                        const std::vector<std::uint64_t>& pt) {
    for (std::size_t i = 0; i < group.size(); ++i) {
      if ((group[i] & pt[i]) == 0) return false;
    }
    return true;
  };

  std::vector<std::vector<std::uint64_t>> groups;
  for (std::size_t p = 0; p < n; ++p) {
    bool placed = false;
    for (auto& g : groups) {
      if (compatible(g, masks[p])) {
        for (std::size_t i = 0; i < g.size(); ++i) g[i] &= masks[p][i];
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back(masks[p]);
  }
  std::uint64_t greedy = groups.size();

  if (n <= 64) {
    std::uint64_t best = greedy;
    std::vector<std::vector<std::uint64_t>> open;
    std::uint64_t nodes = 0;
    bool complete = true;
    std::function<void(std::size_t)> recurse = [&](std::size_t p) {
      if (!complete) return;
      if (open.size() >= best) return;
      if (p == n) {
        best = std::min<std::uint64_t>(best, open.size());
        return;
      }
      if (++nodes > caps.bnb_nodes) {
        complete = false;
        return;
      }
      for (std::size_t g = 0; g < open.size(); ++g) {
        if (compatible(open[g], masks[p])) {
          std::vector<std::uint64_t> saved = open[g];
          for (std::size_t i = 0; i < open[g].size(); ++i) open[g][i] &= masks[p][i];
          recurse(p + 1);
          open[g] = saved;
        }
      }
      open.push_back(masks[p]);
      recurse(p + 1);
      open.pop_back();
    };
    recurse(0);
    if (complete) return CountBracket{best, best, CellMode::Exact};
  }

  std::uint64_t maxcov = 1;
  for (std::size_t i = 0; i < ncoord; ++i) {
    std::uint64_t best_member = 0;
    for (std::size_t m = 0; m < member_count; ++m) {
      std::uint64_t c = 0;
      for (std::size_t p = 0; p < n; ++p) {
        if (masks[p][i] & (std::uint64_t{1} << m)) ++c;
      }
      best_member = std::max(best_member, c);
    }
    maxcov = i == 0 ? best_member : std::min(maxcov, best_member);
  }
  maxcov = std::max<std::uint64_t>(maxcov, 1);
  std::uint64_t lb1 = (n + maxcov - 1) / maxcov;
  double ratio = 1.0 + std::log(static_cast<double>(n));
  std::uint64_t lb2 =
      static_cast<std::uint64_t>(std::ceil(static_cast<double>(greedy) / ratio));
  return CountBracket{std::max(lb1, lb2), greedy, CellMode::Greedy};
}

// ---------------------------------------------------------------------------
// Labeled-partition counts

ApCount bowen_ap_count(const ShiftSystem& sys, const SoficMap& sigma,
                       const CoverSpec& alpha, const FiniteSubset& f, double eps,
                       const InvariantMeasure& mu, const Caps& caps,
                       std::uint64_t seed) {
  if (alpha.trivial || alpha.kind != CoverKind::Partition) {
    throw ConfigError("AP counts need a genuine partition");
  }
  const int k = static_cast<int>(alpha.member_count());
  const int d = sigma.d();
  const std::size_t nf = f.size();

  double m_size = std::pow(static_cast<double>(k), static_cast<double>(nf));
  if (m_size > static_cast<double>(1u << 20)) {
    throw CapExceeded("map(F,k) table too large");
  }
  const std::size_t m = static_cast<std::size_t>(m_size + 0.5);

  std::vector<std::set<std::vector<std::uint8_t>>> member_sets(k);
  for (int j = 0; j < k; ++j) {
    for (const auto& pat : alpha.members[j]) member_sets[j].insert(pat);
  }
  // mu(A_phi) with A_phi the intersection of the translated member events
  std::vector<double> mu_phi(m, 0.0);
  const auto& f_elems = f.elements();
  for (std::size_t code = 0; code < m; ++code) {
    std::vector<PatternConstraint> constraints;
    std::size_t rest = code;
    for (std::size_t pos = 0; pos < nf; ++pos) {
      int j = static_cast<int>(rest % k);
      rest /= k;
      PatternConstraint c;
      for (const auto& w : alpha.window.elements()) {
        c.coords.push_back(sys.group().add(w, f_elems[pos]));
      }
      c.allowed = &member_sets[j];
      constraints.push_back(std::move(c));
    }
    mu_phi[code] = measure_of_constraints(sys, mu, constraints, caps.pattern_cap);
  }

  std::vector<Perm> f_perms;
  for (const auto& s : f_elems) f_perms.push_back(sigma.sigma(s));

  std::vector<std::uint32_t> counts(m);
  auto d_f = [&](const std::vector<std::uint8_t>& beta) {
    std::fill(counts.begin(), counts.end(), 0);
    for (int a = 0; a < d; ++a) {
      std::size_t code = 0, base = 1;
      for (std::size_t pos = 0; pos < nf; ++pos) {
        code += static_cast<std::size_t>(beta[f_perms[pos][a]]) * base;
        base *= k;
      }
      ++counts[code];
    }
    double total = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      total += std::abs(mu_phi[c] - static_cast<double>(counts[c]) / d);
    }
    return total;
  };

  double log_total = static_cast<double>(d) * std::log(static_cast<double>(k));
  double space = std::pow(static_cast<double>(k), static_cast<double>(d));
  if (space <= static_cast<double>(caps.scan_nodes)) {
    std::vector<std::uint8_t> beta(d, 0);
    std::uint64_t ap = 0;
    bool done = false;
    while (!done) {
      if (d_f(beta) <= eps) ++ap;
      int pos = 0;
      while (pos < d) {
        if (++beta[pos] < k) break;
        beta[pos] = 0;
        ++pos;
      }
      done = pos == d;
    }
    ApCount out;
    out.exact_count = ap;
    out.mode = CellMode::Exact;
    out.log_count = Bracket::point(log_count(ap));
    return out;
  }

  // seeded uniform sampling with a Wilson 95% interval on |AP| / k^d
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, k - 1);
  std::uint64_t hits = 0;
  const std::uint64_t samples = caps.mc_samples;
  std::vector<std::uint8_t> beta(d);
  for (std::uint64_t it = 0; it < samples; ++it) {
    for (int i = 0; i < d; ++i) beta[i] = static_cast<std::uint8_t>(pick(rng));
    if (d_f(beta) <= eps) ++hits;
  }
  double ns = static_cast<double>(samples);
  double qhat = static_cast<double>(hits) / ns;
  double z = 1.959963984540054;
  double denom = 1.0 + z * z / ns;
  double centre = (qhat + z * z / (2.0 * ns)) / denom;
  double half =
      z * std::sqrt(qhat * (1.0 - qhat) / ns + z * z / (4.0 * ns * ns)) / denom;
  double ql = std::max(0.0, centre - half);
  double qh = std::min(1.0, centre + half);
  ApCount out;
  out.mode = CellMode::Sampled;
  out.log_count = Bracket{
      ql > 0.0 ? ExtReal(log_total + std::log(ql)) : ExtReal::neg_inf(),
      qh > 0.0 ? ExtReal(log_total + std::log(qh)) : ExtReal::neg_inf()};
  return out;
}

}  // namespace sel
