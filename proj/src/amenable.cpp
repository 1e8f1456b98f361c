#include "sel/amenable.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "sel/errors.hpp"

namespace sel {

namespace {

// Lookup tables for testing the restriction of a joined-window pattern
// against a cover, per translate g in F.
struct JoinIndex {
  bool trivial = false;
  CoverKind kind = CoverKind::Partition;
  std::size_t member_count = 1;
  std::vector<std::vector<int>> positions;  // per g: window positions in W
  bool single_coord = false;
  bool packable = false;  // window size <= 8
  std::vector<int> member_by_symbol;
  std::unordered_map<std::uint64_t, int> member_packed;
  std::unordered_map<std::uint64_t, std::uint64_t> mask_packed;
  std::map<std::vector<std::uint8_t>, int> member_plain;
  std::map<std::vector<std::uint8_t>, std::uint64_t> mask_plain;

  JoinIndex(const ShiftSystem& sys, const CoverSpec& cover, const FiniteSubset& f,
            const FiniteSubset& joined) {
    trivial = cover.trivial;
    if (trivial) return;
    kind = cover.kind;
    member_count = cover.member_count();
    if (member_count > 64 && kind != CoverKind::Partition) {
      throw ConfigError("general covers support at most 64 members");
    }
    single_coord = cover.window.size() == 1 && kind == CoverKind::Partition;
    packable = cover.window.size() <= 8;
    for (const auto& g : f.elements()) {
      std::vector<int> pos;
      for (const auto& w : cover.window.elements()) {
        int idx = joined.index_of(sys.group().add(w, g));
        if (idx < 0) throw ConfigError("joined window misses a cover coordinate");
        pos.push_back(idx);
      }
      positions.push_back(std::move(pos));
    }
    if (single_coord) member_by_symbol.assign(256, -1);
    for (std::size_t m = 0; m < cover.members.size(); ++m) {
      for (const auto& pat : cover.members[m]) {
        if (single_coord && member_by_symbol[pat[0]] < 0) {
          member_by_symbol[pat[0]] = static_cast<int>(m);
        }
        if (packable) {
          std::uint64_t key = 0;
          for (auto s : pat) key = (key << 8) | s;
          member_packed.emplace(key, static_cast<int>(m));
          if (kind != CoverKind::Partition) {
            mask_packed[key] |= std::uint64_t{1} << m;
          }
        } else {
          member_plain.emplace(pat, static_cast<int>(m));
          if (kind != CoverKind::Partition) {
            mask_plain[pat] |= std::uint64_t{1} << m;
          }
        }
      }
    }
  }

  int member_at(const std::vector<std::uint8_t>& sym, std::size_t gi) const {
    if (trivial) return 0;
    if (single_coord) {
      int m = member_by_symbol[sym[positions[gi][0]]];
      if (m < 0) throw NotCovered("pattern restriction outside every cover member");
      return m;
    }
    if (packable) {
      std::uint64_t key = 0;
      for (int p : positions[gi]) key = (key << 8) | sym[p];
      auto it = member_packed.find(key);
      if (it == member_packed.end()) {
        throw NotCovered("pattern restriction outside every cover member");
      }
      return it->second;
    }
    std::vector<std::uint8_t> key;
    key.reserve(positions[gi].size());
    for (int p : positions[gi]) key.push_back(sym[p]);
    auto it = member_plain.find(key);
    if (it == member_plain.end()) {
      throw NotCovered("pattern restriction outside every cover member");
    }
    return it->second;
  }

  std::uint64_t mask_at(const std::vector<std::uint8_t>& sym, std::size_t gi) const {
    if (trivial) return 1;
    if (packable) {
      std::uint64_t key = 0;
      for (int p : positions[gi]) key = (key << 8) | sym[p];
      auto it = mask_packed.find(key);
      if (it == mask_packed.end() || it->second == 0) {
        throw NotCovered("pattern restriction outside every cover member");
      }
      return it->second;
    }
    std::vector<std::uint8_t> key;
    key.reserve(positions[gi].size());
    for (int p : positions[gi]) key.push_back(sym[p]);
    auto it = mask_plain.find(key);
    if (it == mask_plain.end() || it->second == 0) {
      throw NotCovered("pattern restriction outside every cover member");
    }
    return it->second;
  }
};

struct PackedKey {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  friend bool operator==(const PackedKey&, const PackedKey&) = default;
  friend auto operator<=>(const PackedKey&, const PackedKey&) = default;
};

FiniteSubset joined_window(const ShiftSystem& sys, const CoverSpec& w1,
                           const CoverSpec& w2, const FiniteSubset& f) {
  std::vector<GroupElement> coords;
  for (const auto& g : f.elements()) {
    if (!w1.trivial) {
      for (const auto& w : w1.window.elements())
        coords.push_back(sys.group().add(w, g));
    }
    if (!w2.trivial) {
      for (const auto& w : w2.window.elements())
        coords.push_back(sys.group().add(w, g));
    }
  }
  if (coords.empty()) coords.push_back(sys.group().identity());
  return FiniteSubset(sys.group(), coords);
}

}  // namespace

CoverSpec join_cover(const ShiftSystem& sys, const CoverSpec& base,
                     const FiniteSubset& f, const Caps& caps) {
  if (base.trivial) return CoverSpec::whole_space();
  FiniteSubset w = joined_window(sys, base, CoverSpec::whole_space(), f);
  JoinIndex index(sys, base, f, w);
  // occupied members only: group the allowed joined patterns by profile
  std::map<std::vector<int>, std::vector<std::vector<std::uint8_t>>> members;
  sys.enumerate_allowed(w, caps.pattern_cap,
                        [&](const std::vector<std::uint8_t>& sym, bool) {
                          std::vector<int> profile(f.size());
                          for (std::size_t gi = 0; gi < f.size(); ++gi) {
                            profile[gi] = index.member_at(sym, gi);
                          }
                          members[profile].push_back(sym);
                        });
  CoverSpec out;
  out.window = w;
  out.kind = base.kind;
  out.label = base.label + "-joined";
  for (auto& [profile, pats] : members) out.members.push_back(std::move(pats));
  return out;
}

MValue m_value(const ShiftSystem& sys, const CoverSpec& w1, const CoverSpec& w2,
               const FiniteSubset& f, const Caps& caps) {
  FiniteSubset w = joined_window(sys, w1, w2, f);
  JoinIndex i1(sys, w1, f, w);
  JoinIndex i2(sys, w2, f, w);
  const std::size_t nf = f.size();

  // Partition path: count distinct joined w1-profiles per w2-cell.
  bool w1_partition = w1.trivial || w1.kind == CoverKind::Partition;
  auto bits_for = [](std::size_t members) {
    int b = 1;
    while ((std::size_t{1} << b) < std::max<std::size_t>(members, 2)) ++b;
    return b;
  };
  int bits1 = bits_for(i1.member_count);
  int bits2 = bits_for(i2.member_count);
  bool fits = static_cast<std::size_t>(bits1) * nf <= 128 &&
              static_cast<std::size_t>(bits2) * nf <= 128;

  MValue out;
  if (w1_partition) {
    if (fits) {
      // collect (cell, profile) pairs, then sort once and count distinct
      // profiles per cell in a single pass
      std::vector<std::pair<PackedKey, PackedKey>> entries;
      sys.enumerate_allowed(
          w, caps.pattern_cap, [&](const std::vector<std::uint8_t>& sym, bool) {
            PackedKey k1, k2;
            for (std::size_t gi = 0; gi < nf; ++gi) {
              std::uint64_t m1 = static_cast<std::uint64_t>(i1.member_at(sym, gi));
              std::uint64_t m2 = static_cast<std::uint64_t>(i2.member_at(sym, gi));
              k1.b = (k1.b << bits1) | (k1.a >> (64 - bits1));
              k1.a = (k1.a << bits1) | m1;
              k2.b = (k2.b << bits2) | (k2.a >> (64 - bits2));
              k2.a = (k2.a << bits2) | m2;
            }
            entries.push_back({k2, k1});
          });
      std::sort(entries.begin(), entries.end());
      std::uint64_t best = 0, run = 0;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i == 0 || entries[i].first != entries[i - 1].first) {
          run = 1;
        } else if (entries[i].second != entries[i - 1].second) {
          ++run;
        }
        best = std::max(best, run);
      }
      out.count = best;
      out.count_lo = out.count_hi = best;
      out.exact = true;
      out.log_n = std::log(static_cast<double>(best));
      return out;
    }
    // wide profiles: plain vector keys
    std::map<std::vector<int>, std::set<std::vector<int>>> groups;
    sys.enumerate_allowed(w, caps.pattern_cap,
                          [&](const std::vector<std::uint8_t>& sym, bool) {
                            std::vector<int> p1(nf), p2(nf);
                            for (std::size_t gi = 0; gi < nf; ++gi) {
                              p1[gi] = i1.member_at(sym, gi);
                              p2[gi] = i2.member_at(sym, gi);
                            }
                            groups[p2].insert(p1);
                          });
    std::uint64_t best = 0;
    for (const auto& [cell, profiles] : groups) {
      best = std::max<std::uint64_t>(best, profiles.size());
    }
    out.count = best;
    out.count_lo = out.count_hi = best;
    out.exact = true;
    out.log_n = std::log(static_cast<double>(best));
    return out;
  }

  // General base covers: per conditioning cell, collect mask vectors and run
  // the shared product-cover counter.
  std::map<std::vector<int>, std::vector<std::vector<std::uint64_t>>> cells;
  sys.enumerate_allowed(w, caps.pattern_cap,
                        [&](const std::vector<std::uint8_t>& sym, bool) {
                          std::vector<int> cell(nf);
                          std::vector<std::uint64_t> masks(nf);
                          for (std::size_t gi = 0; gi < nf; ++gi) {
                            cell[gi] = i2.member_at(sym, gi);
                            masks[gi] = i1.mask_at(sym, gi);
                          }
                          cells[cell].push_back(std::move(masks));
                        });
  std::uint64_t best_lo = 0, best_hi = 0;
  bool exact = true;
  for (auto& [cell, masks] : cells) {
    CountBracket cb = product_cover_count(masks, i1.member_count, caps);
    best_lo = std::max(best_lo, cb.lo);
    best_hi = std::max(best_hi, cb.hi);
    if (cb.mode != CellMode::Exact) exact = false;
  }
  out.count_lo = best_lo;
  out.count_hi = best_hi;
  out.count = best_hi;
  out.exact = exact;
  out.log_n = std::log(static_cast<double>(best_hi));
  return out;
}

bool SubadditiveTrace::eventually_nonincreasing(double tol) const {
  for (std::size_t i = 1; i < normalized.size(); ++i) {
    if (normalized[i] > normalized[i - 1] + tol) return false;
  }
  return true;
}

std::vector<int> default_folner_indices(const ShiftSystem& sys) {
  if (sys.is_odometer_view()) return {25, 50, 100};
  if (sys.group().rank() == 2) return {2, 3, 4};
  return {5, 10, 20};
}

AmenableReport h_a_conditional(const ShiftSystem& sys, const CoverSpec& w1,
                               const CoverSpec& w2,
                               const std::vector<int>& folner_indices,
                               const Caps& caps) {
  if (folner_indices.empty()) throw ConfigError("need at least one Folner index");
  AmenableReport rep;
  rep.quantity = "h_a_conditional";
  rep.system = sys.name();
  bool exact = true;
  double best_upper = 0.0;
  bool have = false;
  for (int n : folner_indices) {
    FolnerSet fs = folner(sys.group(), n);
    MValue mv = m_value(sys, w1, w2, fs.base, caps);
    double normalized = mv.log_n / static_cast<double>(fs.base.size());
    rep.trace.indices.push_back(n);
    rep.trace.folner_sizes.push_back(fs.base.size());
    rep.trace.m_values.push_back(mv.log_n);
    rep.trace.normalized.push_back(normalized);
    if (!mv.exact) exact = false;
    // box subadditivity: every term is an upper bound for the limit
    best_upper = have ? std::min(best_upper, normalized) : normalized;
    have = true;
    ReportCell c;
    c.d = static_cast<int>(fs.base.size());
    c.f_radius = n;
    c.value = Bracket::point(ExtReal(normalized));
    c.mode = mv.exact ? CellMode::Exact : CellMode::Greedy;
    rep.cells.push_back(c);
  }
  rep.value = rep.trace.normalized.back();
  rep.headline = Bracket{ExtReal(0.0), ExtReal(best_upper)};
  rep.mode = exact ? "exact" : "greedy";
  if (!rep.trace.eventually_nonincreasing(1e-9)) {
    rep.notes = "normalized series not monotone within 1e-9 over the computed range";
  }
  return rep;
}

AmenableReport h_a_topological(const ShiftSystem& sys,
                               const std::vector<CoverSpec>& cover_family,
                               const std::vector<int>& folner_indices,
                               const Caps& caps) {
  if (cover_family.empty()) throw ConfigError("cover family must be non-empty");
  AmenableReport rep;
  rep.quantity = "h_a_topological";
  rep.system = sys.name();
  rep.cylinder_restricted = true;
  CoverSpec trivial = CoverSpec::whole_space();
  bool have = false;
  CellMode mode = CellMode::Exact;
  for (std::size_t fi = 0; fi < cover_family.size(); ++fi) {
    AmenableReport sub =
        h_a_conditional(sys, cover_family[fi], trivial, folner_indices, caps);
    for (auto c : sub.cells) {
      c.aux = static_cast<int>(fi);
      rep.cells.push_back(c);
    }
    if (!have || sub.value > rep.value) {
      rep.value = sub.value;
      rep.trace = sub.trace;
    }
    rep.headline = have ? bracket_max(rep.headline, sub.headline) : sub.headline;
    if (sub.mode != "exact") mode = CellMode::Greedy;
    have = true;
  }
  rep.mode = cell_mode_name(mode);
  return rep;
}

AmenableReport h_a_tail(const ShiftSystem& sys,
                        const std::vector<CoverSpec>& v_family,
                        const std::vector<CoverSpec>& cover_family,
                        const std::vector<int>& folner_indices, const Caps& caps) {
  if (v_family.empty() || cover_family.empty()) {
    throw ConfigError("families must be non-empty");
  }
  AmenableReport rep;
  rep.quantity = "h_a_tail";
  rep.system = sys.name();
  rep.cylinder_restricted = true;
  bool have = false;
  CellMode mode = CellMode::Exact;
  for (std::size_t vi = 0; vi < v_family.size(); ++vi) {
    // sup over the base family, conditioned on this cover
    double value = 0.0;
    Bracket headline;
    bool inner = false;
    for (std::size_t fi = 0; fi < cover_family.size(); ++fi) {
      AmenableReport sub = h_a_conditional(sys, cover_family[fi], v_family[vi],
                                           folner_indices, caps);
      for (auto c : sub.cells) {
        c.aux = static_cast<int>(vi) * 100 + static_cast<int>(fi);
        rep.cells.push_back(c);
      }
      value = inner ? std::max(value, sub.value) : sub.value;
      headline = inner ? bracket_max(headline, sub.headline) : sub.headline;
      if (sub.mode != "exact") mode = CellMode::Greedy;
      inner = true;
    }
    if (!have || value < rep.value) rep.value = value;
    rep.headline = have ? bracket_min(rep.headline, headline) : headline;
    have = true;
  }
  rep.mode = cell_mode_name(mode);
  // cylinder cells are clopen in these systems, so closures add nothing
  rep.notes = "closed-cover variant coincides for cylinder partitions";
  return rep;
}

CrossCheckReport cross_check_sofic_amenable(const ShiftSystem& sys,
                                            const Schedule& sched,
                                            const std::vector<int>& folner_indices,
                                            double tol) {
  CrossCheckReport rep;
  rep.tol = tol;
  rep.sofic = h_topological(sys, sched);
  std::vector<CoverSpec> family;
  if (sys.is_odometer_view()) {
    family.push_back(sys.residue_partition(sys.odometer_depth()));
  } else {
    family.push_back(sys.window_partition(0, sched.caps.pattern_cap));
  }
  rep.amenable = h_a_topological(sys, family, folner_indices, sched.caps);
  rep.midpoint_diff = std::abs(rep.sofic.headline.midpoint() - rep.amenable.value);
  rep.overlap = brackets_overlap(rep.sofic.headline, rep.amenable.headline, tol);
  return rep;
}

}  // namespace sel
