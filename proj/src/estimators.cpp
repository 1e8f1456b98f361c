#include "sel/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "sel/errors.hpp"
#include "sel/parallel.hpp"

namespace sel {

namespace {

struct PointSets {
  std::vector<const Microstate*> in;
  std::vector<const Microstate*> opt;  // in + unknown
};

PointSets split_points(const ScanResult& scan, double delta) {
  PointSets ps;
  for (const auto& e : scan.entries) {
    Verdict v = scan.verdict_at(e, delta);
    if (v == Verdict::Out) continue;
    ps.opt.push_back(&e.state);
    if (v == Verdict::In) ps.in.push_back(&e.state);
  }
  return ps;
}

int mode_rank(CellMode m) {
  switch (m) {
    case CellMode::Exact: return 0;
    case CellMode::Greedy: return 1;
    case CellMode::Sampled: return 2;
    case CellMode::Capped: return 3;
  }
  return 3;
}

CellMode worse(CellMode a, CellMode b) { return mode_rank(a) >= mode_rank(b) ? a : b; }

CellMode mode_from_name(const std::string& name) {
  if (name == "exact") return CellMode::Exact;
  if (name == "greedy") return CellMode::Greedy;
  if (name == "sampled") return CellMode::Sampled;
  return CellMode::Capped;
}

struct Task {
  std::size_t sigma_idx;
  std::size_t f_idx;
  std::size_t delta_idx;
};

struct TaskOutput {
  std::vector<ReportCell> cells;
  bool capped = false;
};

// Runs fn over every (sigma, F, delta) triple with a fresh engine and scan.
// CapExceeded inside a task marks its cells capped instead of failing the run.
std::vector<TaskOutput> run_tasks(
    const ShiftSystem& sys, const Schedule& sched, int radius,
    const std::function<std::vector<ReportCell>(MicrostateEngine&, const PointSets&,
                                                const Task&)>& fn) {
  std::vector<Task> tasks;
  for (std::size_t si = 0; si < sched.sigmas.size(); ++si)
    for (std::size_t fi = 0; fi < sched.f_radii.size(); ++fi)
      for (std::size_t di = 0; di < sched.deltas.size(); ++di)
        tasks.push_back(Task{si, fi, di});
  std::vector<TaskOutput> out(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t t) {
    const Task& task = tasks[t];
    const SoficMap& sigma = sched.sigmas[task.sigma_idx];
    double delta = sched.deltas[task.delta_idx];
    try {
      MicrostateEngine engine(sys, sigma,
                              ball(sys.group(), sched.f_radii[task.f_idx]), radius);
      ScanResult scan = engine.enumerate(delta, sched.caps);
      PointSets ps = split_points(scan, delta);
      out[t].cells = fn(engine, ps, task);
    } catch (const CapExceeded&) {
      out[t].capped = true;
      ReportCell marker;
      marker.d = sigma.d();
      marker.f_radius = sched.f_radii[task.f_idx];
      marker.delta = delta;
      marker.value = Bracket{ExtReal::neg_inf(), ExtReal::pos_inf()};
      marker.mode = CellMode::Capped;
      out[t].cells = {marker};
    }
  });
  return out;
}

// max over sigma within one (f, delta, aux) column.
struct ColumnAgg {
  std::map<std::array<int, 3>, std::pair<Bracket, CellMode>> columns;

  void add(int fi, int di, int aux, const Bracket& b, CellMode m) {
    std::array<int, 3> key{fi, di, aux};
    auto it = columns.find(key);
    if (it == columns.end()) {
      columns.emplace(key, std::make_pair(b, m));
    } else {
      it->second.first = bracket_max(it->second.first, b);
      it->second.second = worse(it->second.second, m);
    }
  }
};

void check_cover_window(const ShiftSystem& sys, const CoverSpec& cover,
                        int pull_radius) {
  if (cover.trivial) return;
  for (const auto& g : cover.window.elements()) {
    if (sys.group().word_length(g) > pull_radius) {
      throw ConfigError(
          "cover window exceeds the certified pullback radius; raise R or F");
    }
  }
}

std::string note_for_caps(const std::vector<TaskOutput>& outs) {
  std::size_t capped = 0;
  for (const auto& o : outs)
    if (o.capped) ++capped;
  if (capped == 0) return "";
  std::ostringstream os;
  os << capped << " schedule cell(s) hit a cap and were excluded from the headline";
  return os.str();
}

Bracket log_bracket(const CountBracket& lo_cb, const CountBracket& hi_cb, int d) {
  return Bracket{log_count(lo_cb.lo).scaled(1.0 / d),
                 log_count(hi_cb.hi).scaled(1.0 / d)};
}

int index_in(const std::vector<int>& v, int x) {
  return static_cast<int>(std::find(v.begin(), v.end(), x) - v.begin());
}

int index_in(const std::vector<double>& v, double x) {
  return static_cast<int>(std::find(v.begin(), v.end(), x) - v.begin());
}

// Shared assembly for the cover-style quantities: per (F, delta, aux) column
// takes the max over sigma, the headline is the inf over columns.
EntropyReport assemble_inf(const ShiftSystem& sys, const Schedule& sched,
                           const std::vector<TaskOutput>& outs,
                           const std::string& quantity) {
  EntropyReport rep;
  rep.quantity = quantity;
  rep.system = sys.name();
  rep.directionality = "bracket";
  ColumnAgg agg;
  for (const auto& o : outs) {
    for (const auto& c : o.cells) {
      rep.cells.push_back(c);
      if (c.mode == CellMode::Capped) continue;
      agg.add(index_in(sched.f_radii, c.f_radius), index_in(sched.deltas, c.delta),
              c.aux, c.value, c.mode);
    }
  }
  bool have = false;
  Bracket headline;
  CellMode mode = CellMode::Exact;
  for (const auto& [key, val] : agg.columns) {
    headline = have ? bracket_min(headline, val.first) : val.first;
    mode = worse(mode, val.second);
    have = true;
  }
  if (!have) throw CapExceeded("every schedule cell hit a cap");
  rep.headline = headline;
  rep.mode = cell_mode_name(mode);
  rep.notes = note_for_caps(outs);
  return rep;
}

}  // namespace

const char* cell_mode_name(CellMode m) {
  switch (m) {
    case CellMode::Exact: return "exact";
    case CellMode::Greedy: return "greedy";
    case CellMode::Sampled: return "sampled";
    case CellMode::Capped: return "capped";
  }
  return "capped";
}

int Schedule::effective_radius(const ShiftSystem& sys) const {
  return radius < 0 ? sys.r_max() : std::min(radius, sys.r_max());
}

void Schedule::validate(const ShiftSystem& sys) const {
  if (sigmas.empty()) throw ConfigError("schedule needs at least one sofic map");
  for (const auto& s : sigmas) {
    if (!(s.group() == sys.group())) {
      throw ConfigError("schedule map group does not match the system");
    }
  }
  if (f_radii.empty()) throw ConfigError("schedule needs window radii");
  for (std::size_t i = 1; i < f_radii.size(); ++i) {
    if (f_radii[i] <= f_radii[i - 1]) {
      throw ConfigError("window radii must be strictly increasing");
    }
  }
  if (deltas.empty()) throw ConfigError("schedule needs delta values");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (deltas[i] <= 0.0) throw ConfigError("delta values must be positive");
    if (i > 0 && deltas[i] >= deltas[i - 1]) {
      throw ConfigError("delta values must be strictly decreasing");
    }
  }
  int r = effective_radius(sys);
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (epsilons[i] <= 2.0 * sys.rho_tail(r)) {
      throw MarginViolation("every eps must exceed twice the metric tail");
    }
    if (i > 0 && epsilons[i] >= epsilons[i - 1]) {
      throw ConfigError("eps values must be strictly decreasing");
    }
  }
}

Schedule default_schedule(const ShiftSystem& sys, const std::vector<int>& d_list) {
  Schedule s;
  const GroupModel& g = sys.group();
  if (sys.is_odometer_view()) {
    int m = sys.alphabet_size();
    std::vector<int> ds = d_list.empty() ? std::vector<int>{2 * m, 4 * m} : d_list;
    for (int d : ds) s.sigmas.push_back(SoficMap::cyclic(d));
    s.f_radii = {1};
    int dmax = *std::max_element(ds.begin(), ds.end());
    double base = sys.symbol_metric().equal_tail / std::sqrt(static_cast<double>(dmax));
    s.deltas = {0.9 * base, 0.45 * base};
    s.epsilons = {2.05 * sys.symbol_metric().equal_tail};
  } else if (g.kind() == GroupKind::Cyclic) {
    for (int c : {1, 2}) s.sigmas.push_back(SoficMap::regular_blocks(g, c));
    s.f_radii = {1};
    s.deltas = {0.5, 0.25};
    s.epsilons = {0.9 * sys.identity_weight()};
  } else if (g.rank() == 1) {
    std::vector<int> ds = d_list.empty() ? std::vector<int>{4, 8, 12} : d_list;
    for (int d : ds) s.sigmas.push_back(SoficMap::cyclic(d));
    s.f_radii = {1, 2};
    s.deltas = {0.5, 0.25};
    double w0 = sys.identity_weight();
    s.epsilons = {0.9 * w0, 0.45 * w0};
  } else {
    std::vector<int> sides = d_list.empty() ? std::vector<int>{2, 3} : d_list;
    for (int side : sides) s.sigmas.push_back(SoficMap::torus(side, side));
    s.f_radii = {1};
    s.deltas = {0.5, 0.25};
    s.epsilons = {0.9 * sys.identity_weight()};
  }
  return s;
}

std::vector<CoverSpec> default_cover_family(const ShiftSystem& sys, int max_radius,
                                            std::uint64_t cap) {
  std::vector<CoverSpec> family;
  if (sys.is_odometer_view()) {
    int depth = sys.odometer_depth();
    std::vector<int> levels = {1, std::min(2, depth), depth};
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (int level : levels) family.push_back(sys.residue_partition(level));
    return family;
  }
  for (int r = 0; r <= max_radius; ++r) {
    family.push_back(sys.window_partition(r, cap));
  }
  return family;
}

CoverSpec default_conditioning_cover(const ShiftSystem& sys) {
  if (sys.is_odometer_view()) {
    return sys.residue_partition(std::min(2, sys.odometer_depth()));
  }
  return sys.standard_partition();
}

std::vector<std::vector<CylinderIndicator>> default_test_family(const ShiftSystem& sys,
                                                                int max_radius) {
  std::vector<std::vector<CylinderIndicator>> family;
  std::vector<CylinderIndicator> acc;
  for (int r = 0; r <= max_radius; ++r) {
    FiniteSubset w = ball(sys.group(), r);
    for (const auto& p : sys.allowed_patterns(w)) {
      acc.push_back(CylinderIndicator{w, p.symbols});
    }
    family.push_back(acc);
  }
  return family;
}

// ---------------------------------------------------------------------------
// separated counts

EntropyReport h_topological(const ShiftSystem& sys, const Schedule& sched) {
  sched.validate(sys);
  if (sched.epsilons.empty()) throw ConfigError("h_topological needs eps values");
  int radius = sched.effective_radius(sys);

  auto outs = run_tasks(
      sys, sched, radius,
      [&](MicrostateEngine& engine, const PointSets& ps, const Task& task) {
        std::vector<ReportCell> cells;
        for (std::size_t ei = 0; ei < sched.epsilons.size(); ++ei) {
          double eps = sched.epsilons[ei];
          CountBracket lo_cb{0, 0, CellMode::Exact};
          CountBracket hi_cb{0, 0, CellMode::Exact};
          bool same = ps.in.size() == ps.opt.size();
          if (!ps.opt.empty()) hi_cb = n_separated(engine, ps.opt, eps, sched.caps);
          if (!ps.in.empty()) {
            lo_cb = same ? hi_cb : n_separated(engine, ps.in, eps, sched.caps);
          }
          ReportCell c;
          c.d = engine.d();
          c.f_radius = sched.f_radii[task.f_idx];
          c.delta = sched.deltas[task.delta_idx];
          c.eps = eps;
          c.aux = static_cast<int>(ei);
          c.value = log_bracket(lo_cb, hi_cb, engine.d());
          c.mode = worse(lo_cb.mode, hi_cb.mode);
          cells.push_back(c);
        }
        return cells;
      });

  EntropyReport rep;
  rep.quantity = "h_topological";
  rep.system = sys.name();
  rep.directionality = "bracket";
  ColumnAgg agg;
  for (const auto& o : outs) {
    for (const auto& c : o.cells) {
      rep.cells.push_back(c);
      if (c.mode == CellMode::Capped) continue;
      agg.add(index_in(sched.f_radii, c.f_radius), index_in(sched.deltas, c.delta),
              c.aux, c.value, c.mode);
    }
  }
  // per eps: inf over (F, delta) columns; headline: sup over eps
  bool have = false;
  Bracket headline;
  CellMode mode = CellMode::Exact;
  for (std::size_t ei = 0; ei < sched.epsilons.size(); ++ei) {
    bool have_eps = false;
    Bracket per_eps;
    for (const auto& [key, val] : agg.columns) {
      if (key[2] != static_cast<int>(ei)) continue;
      per_eps = have_eps ? bracket_min(per_eps, val.first) : val.first;
      mode = worse(mode, val.second);
      have_eps = true;
    }
    if (!have_eps) continue;
    headline = have ? bracket_max(headline, per_eps) : per_eps;
    have = true;
  }
  if (!have) throw CapExceeded("every schedule cell hit a cap");
  rep.headline = headline;
  rep.mode = cell_mode_name(mode);
  rep.notes = note_for_caps(outs);
  return rep;
}

// ---------------------------------------------------------------------------
// cover counts

EntropyReport h_cover(const ShiftSystem& sys, const CoverSpec& cover,
                      const Schedule& sched) {
  sched.validate(sys);
  int radius = sched.effective_radius(sys);
  auto outs = run_tasks(
      sys, sched, radius,
      [&](MicrostateEngine& engine, const PointSets& ps, const Task& task) {
        check_cover_window(sys, cover, engine.pullback_radius());
        CountBracket lo_cb = n_cover(engine, cover, ps.in, sched.caps);
        CountBracket hi_cb = n_cover(engine, cover, ps.opt, sched.caps);
        ReportCell c;
        c.d = engine.d();
        c.f_radius = sched.f_radii[task.f_idx];
        c.delta = sched.deltas[task.delta_idx];
        c.value = log_bracket(lo_cb, hi_cb, engine.d());
        c.mode = worse(lo_cb.mode, hi_cb.mode);
        return std::vector<ReportCell>{c};
      });
  return assemble_inf(sys, sched, outs, "h_cover");
}

namespace {

// max over conditioning cells of the inner cover count, on both endpoints.
std::pair<CountBracket, CountBracket> conditional_counts(
    MicrostateEngine& engine, const CoverSpec& u1, const CoverSpec& u2,
    const PointSets& ps, const Caps& caps) {
  CoverProfiler profiler(engine, u2);
  std::map<std::vector<std::uint32_t>, PointSets> groups;
  for (const auto* pt : ps.opt) groups[profiler.profile(*pt)].opt.push_back(pt);
  for (const auto* pt : ps.in) groups[profiler.profile(*pt)].in.push_back(pt);
  CountBracket lo_cb{0, 0, CellMode::Exact};
  CountBracket hi_cb{0, 0, CellMode::Exact};
  for (const auto& [profile, group] : groups) {
    CountBracket glo = n_cover(engine, u1, group.in, caps);
    CountBracket ghi = n_cover(engine, u1, group.opt, caps);
    lo_cb.lo = std::max(lo_cb.lo, glo.lo);
    lo_cb.mode = worse(lo_cb.mode, glo.mode);
    hi_cb.hi = std::max(hi_cb.hi, ghi.hi);
    hi_cb.mode = worse(hi_cb.mode, ghi.mode);
  }
  return {lo_cb, hi_cb};
}

}  // namespace

EntropyReport h_cover_conditional(const ShiftSystem& sys, const CoverSpec& u1,
                                  const CoverSpec& u2, const Schedule& sched) {
  sched.validate(sys);
  int radius = sched.effective_radius(sys);
  auto outs = run_tasks(
      sys, sched, radius,
      [&](MicrostateEngine& engine, const PointSets& ps, const Task& task) {
        check_cover_window(sys, u1, engine.pullback_radius());
        check_cover_window(sys, u2, engine.pullback_radius());
        auto [lo_cb, hi_cb] = conditional_counts(engine, u1, u2, ps, sched.caps);
        ReportCell c;
        c.d = engine.d();
        c.f_radius = sched.f_radii[task.f_idx];
        c.delta = sched.deltas[task.delta_idx];
        c.value = log_bracket(lo_cb, hi_cb, engine.d());
        c.mode = worse(lo_cb.mode, hi_cb.mode);
        return std::vector<ReportCell>{c};
      });
  EntropyReport rep = assemble_inf(sys, sched, outs, "h_cover_conditional");
  if (u2.kind != CoverKind::Partition && !u2.trivial) {
    rep.notes += rep.notes.empty() ? "" : "; ";
    rep.notes += "non-partition conditioning grouped by first containing member";
  }
  return rep;
}

EntropyReport h_space_conditional(const ShiftSystem& sys, const CoverSpec& u2,
                                  const std::vector<CoverSpec>& family,
                                  const Schedule& sched) {
  if (family.empty()) throw ConfigError("cover family must be non-empty");
  EntropyReport rep;
  rep.quantity = "h_space_conditional";
  rep.system = sys.name();
  rep.cylinder_restricted = true;
  rep.directionality = "certified-upper";
  bool have = false;
  CellMode mode = CellMode::Exact;
  std::string notes;
  for (std::size_t vi = 0; vi < family.size(); ++vi) {
    EntropyReport sub;
    try {
      sub = h_cover_conditional(sys, family[vi], u2, sched);
    } catch (const CapExceeded&) {
      notes += notes.empty() ? "" : "; ";
      notes += "family cover " + std::to_string(vi) + " capped out";
      continue;
    }
    for (auto c : sub.cells) {
      c.aux = static_cast<int>(vi);
      rep.cells.push_back(c);
    }
    rep.headline = have ? bracket_max(rep.headline, sub.headline) : sub.headline;
    mode = worse(mode, mode_from_name(sub.mode));
    have = true;
  }
  if (!have) throw CapExceeded("every family member hit a cap");
  rep.mode = cell_mode_name(mode);
  rep.notes = notes;
  return rep;
}

EntropyReport h_star(const ShiftSystem& sys, const std::vector<CoverSpec>& v_family,
                     const std::vector<CoverSpec>& cover_family,
                     const Schedule& sched) {
  if (v_family.empty()) throw ConfigError("conditioning family must be non-empty");
  EntropyReport rep;
  rep.quantity = "h_star";
  rep.system = sys.name();
  rep.cylinder_restricted = true;
  rep.directionality = "certified-upper";
  bool have = false;
  CellMode mode = CellMode::Exact;
  for (std::size_t vi = 0; vi < v_family.size(); ++vi) {
    EntropyReport sub;
    try {
      sub = h_space_conditional(sys, v_family[vi], cover_family, sched);
    } catch (const CapExceeded&) {
      continue;
    }
    for (auto c : sub.cells) {
      c.aux = static_cast<int>(vi) * 100 + (c.aux >= 0 ? c.aux : 0);
      rep.cells.push_back(c);
    }
    rep.headline = have ? bracket_min(rep.headline, sub.headline) : sub.headline;
    mode = worse(mode, mode_from_name(sub.mode));
    have = true;
  }
  if (!have) throw CapExceeded("every conditioning cover hit a cap");
  rep.mode = cell_mode_name(mode);
  return rep;
}

EntropyReport h_measure_cover(
    const ShiftSystem& sys, const InvariantMeasure& mu, const CoverSpec& cover,
    const std::vector<std::vector<CylinderIndicator>>& l_family,
    const Schedule& sched) {
  sched.validate(sys);
  if (l_family.empty()) throw ConfigError("test family must be non-empty");
  int radius = sched.effective_radius(sys);
  auto outs = run_tasks(
      sys, sched, radius,
      [&](MicrostateEngine& engine, const PointSets& ps, const Task& task) {
        check_cover_window(sys, cover, engine.pullback_radius());
        std::vector<ReportCell> cells;
        double delta = sched.deltas[task.delta_idx];
        for (std::size_t li = 0; li < l_family.size(); ++li) {
          PointSets filtered;
          for (const auto* pt : ps.in)
            if (engine.empirical_check(*pt, mu, l_family[li], delta))
              filtered.in.push_back(pt);
          for (const auto* pt : ps.opt)
            if (engine.empirical_check(*pt, mu, l_family[li], delta))
              filtered.opt.push_back(pt);
          CountBracket lo_cb = n_cover(engine, cover, filtered.in, sched.caps);
          CountBracket hi_cb = n_cover(engine, cover, filtered.opt, sched.caps);
          ReportCell c;
          c.d = engine.d();
          c.f_radius = sched.f_radii[task.f_idx];
          c.delta = delta;
          c.aux = static_cast<int>(li);
          c.value = log_bracket(lo_cb, hi_cb, engine.d());
          c.mode = worse(lo_cb.mode, hi_cb.mode);
          cells.push_back(c);
        }
        return cells;
      });
  return assemble_inf(sys, sched, outs, "h_measure_cover");
}

// ---------------------------------------------------------------------------
// partition counting

EntropyReport bowen_measure_entropy(const ShiftSystem& sys, const InvariantMeasure& mu,
                                    const CoverSpec& alpha, const Schedule& sched) {
  sched.validate(sys);
  if (sched.epsilons.empty()) throw ConfigError("partition counting needs eps values");
  if (alpha.trivial || alpha.kind != CoverKind::Partition) {
    throw ConfigError("partition counting needs a partition");
  }
  double log_k = std::log(static_cast<double>(alpha.member_count()));

  struct BTask {
    std::size_t si, fi, ei;
  };
  std::vector<BTask> tasks;
  for (std::size_t si = 0; si < sched.sigmas.size(); ++si)
    for (std::size_t fi = 0; fi < sched.f_radii.size(); ++fi)
      for (std::size_t ei = 0; ei < sched.epsilons.size(); ++ei)
        tasks.push_back(BTask{si, fi, ei});
  std::vector<ReportCell> cells(tasks.size());
  std::vector<char> capped(tasks.size(), 0);
  parallel_for(tasks.size(), [&](std::size_t t) {
    const BTask& task = tasks[t];
    const SoficMap& sigma = sched.sigmas[task.si];
    ReportCell c;
    c.d = sigma.d();
    c.f_radius = sched.f_radii[task.fi];
    c.eps = sched.epsilons[task.ei];
    c.aux = static_cast<int>(task.ei);
    std::uint64_t cell_seed = sched.seed * 0x9e3779b97f4a7c15ull +
                              (task.si * 1009 + task.fi * 9176 + task.ei * 31 + 1);
    try {
      ApCount ap = bowen_ap_count(sys, sigma, alpha,
                                  ball(sys.group(), sched.f_radii[task.fi]),
                                  sched.epsilons[task.ei], mu, sched.caps, cell_seed);
      c.value = ap.log_count.scaled(1.0 / sigma.d());
      c.mode = ap.mode;
    } catch (const CapExceeded&) {
      c.value = Bracket{ExtReal::neg_inf(), ExtReal::pos_inf()};
      c.mode = CellMode::Capped;
      capped[t] = 1;
    }
    cells[t] = c;
  });

  EntropyReport rep;
  rep.quantity = "bowen_measure_entropy";
  rep.system = sys.name();
  rep.cells = cells;
  std::map<std::pair<int, int>, std::pair<Bracket, CellMode>> columns;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (capped[t]) continue;
    auto key = std::make_pair(static_cast<int>(tasks[t].fi),
                              static_cast<int>(tasks[t].ei));
    auto it = columns.find(key);
    if (it == columns.end()) {
      columns.emplace(key, std::make_pair(cells[t].value, cells[t].mode));
    } else {
      it->second.first = bracket_max(it->second.first, cells[t].value);
      it->second.second = worse(it->second.second, cells[t].mode);
    }
  }
  if (columns.empty()) throw CapExceeded("every schedule cell hit a cap");
  bool have = false;
  Bracket agg;
  CellMode mode = CellMode::Exact;
  for (const auto& [key, val] : columns) {
    agg = have ? bracket_min(agg, val.first) : val.first;
    mode = worse(mode, val.second);
    have = true;
  }
  // Universal |AP| <= k^d bound caps the upper endpoint; certified-empty
  // tables propagate their -inf instead.
  if (agg.hi.is_neg_inf()) {
    rep.headline = Bracket{ExtReal::neg_inf(), ExtReal::neg_inf()};
  } else {
    rep.headline = Bracket{agg.lo, ExtReal(log_k)};
  }
  rep.directionality = "lo: finite-sigma table; hi: universal partition bound";
  rep.mode = cell_mode_name(mode);
  std::size_t ncapped =
      static_cast<std::size_t>(std::count(capped.begin(), capped.end(), 1));
  if (ncapped > 0) rep.notes = std::to_string(ncapped) + " cell(s) capped";
  return rep;
}

// ---------------------------------------------------------------------------
// separated-count conditional at a fixed scale

EntropyReport h_eps_conditional(const ShiftSystem& sys, double eps,
                                const CoverSpec& u, const Schedule& sched) {
  sched.validate(sys);
  int radius = sched.effective_radius(sys);
  if (eps <= 2.0 * sys.rho_tail(radius)) {
    throw MarginViolation("eps must exceed twice the metric tail");
  }
  auto outs = run_tasks(
      sys, sched, radius,
      [&](MicrostateEngine& engine, const PointSets& ps, const Task& task) {
        check_cover_window(sys, u, engine.pullback_radius());
        CoverProfiler profiler(engine, u);
        std::map<std::vector<std::uint32_t>, PointSets> groups;
        for (const auto* pt : ps.opt) groups[profiler.profile(*pt)].opt.push_back(pt);
        for (const auto* pt : ps.in) groups[profiler.profile(*pt)].in.push_back(pt);
        CountBracket lo_cb{0, 0, CellMode::Exact};
        CountBracket hi_cb{0, 0, CellMode::Exact};
        for (const auto& [profile, group] : groups) {
          CountBracket glo{0, 0, CellMode::Exact};
          CountBracket ghi{0, 0, CellMode::Exact};
          bool same = group.in.size() == group.opt.size();
          if (!group.opt.empty()) ghi = n_separated(engine, group.opt, eps, sched.caps);
          if (!group.in.empty()) {
            glo = same ? ghi : n_separated(engine, group.in, eps, sched.caps);
          }
          lo_cb.lo = std::max(lo_cb.lo, glo.lo);
          lo_cb.mode = worse(lo_cb.mode, glo.mode);
          hi_cb.hi = std::max(hi_cb.hi, ghi.hi);
          hi_cb.mode = worse(hi_cb.mode, ghi.mode);
        }
        ReportCell c;
        c.d = engine.d();
        c.f_radius = sched.f_radii[task.f_idx];
        c.delta = sched.deltas[task.delta_idx];
        c.eps = eps;
        c.value = log_bracket(lo_cb, hi_cb, engine.d());
        c.mode = worse(lo_cb.mode, hi_cb.mode);
        return std::vector<ReportCell>{c};
      });
  return assemble_inf(sys, sched, outs, "h_eps_conditional");
}

// ---------------------------------------------------------------------------
// classification

ClassifyReport classify(const ShiftSystem& sys, const Schedule& sched) {
  ClassifyReport rep;
  rep.tolerance = sched.tolerance;

  // Expansiveness by window search: any two allowed patterns differing on
  // the search window must be moved a definite amount apart at the identity
  // coordinate by some translate in the window.
  int rc = sys.is_odometer_view() ? 1 : std::min(2, sys.r_max());
  FiniteSubset window = ball(sys.group(), rc);
  auto patterns = sys.allowed_patterns(window, sched.caps.pattern_cap);
  double kappa = 1.0;
  const double w_e = sys.identity_weight();
  const SymbolMetric& sym = sys.symbol_metric();
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    for (std::size_t j = i + 1; j < patterns.size(); ++j) {
      double best = 0.0;
      for (const auto& g : window.elements()) {
        best = std::max(best, w_e * sym.lo(patterns[i].at(g), patterns[j].at(g)));
      }
      kappa = std::min(kappa, best);
    }
  }
  // A separation below the truncation resolution certifies nothing.
  double resolution = sym.equal_tail * w_e;
  rep.expansive = kappa > resolution;
  rep.expansive_constant = rep.expansive ? Bracket{ExtReal(kappa), ExtReal(1.0)}
                                         : Bracket{ExtReal(0.0), ExtReal(kappa)};

  CoverSpec u2 = default_conditioning_cover(sys);
  std::vector<CoverSpec> family = default_cover_family(sys, 2);
  rep.evidence_cover = u2.label;
  rep.conditional = h_space_conditional(sys, u2, family, sched);
  rep.h_expansive_evidence = rep.conditional.headline.hi <= ExtReal(sched.tolerance);
  rep.star = h_star(sys, family, family, sched);
  rep.asympt_h_expansive_evidence = rep.star.headline.hi <= ExtReal(sched.tolerance);
  return rep;
}

}  // namespace sel
