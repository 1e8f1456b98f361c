#include "sel/shift.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <unordered_map>

#include "json.hpp"
#include "sel/errors.hpp"

namespace sel {

namespace {

// One decidable check during an assignment scan: the symbols at `positions`
// (in the key order of `patterns`) must lie in / avoid the pattern set.
struct SetCheck {
  std::vector<int> positions;
  const std::set<std::vector<std::uint8_t>>* patterns = nullptr;
  bool require = false;  // true: must match some pattern; false: must avoid all
  int ready = 0;         // max position index
};

// Depth-first scan over symbol assignments with incremental checks. Returns
// the number of completed assignments; throws CapExceeded when the visited
// node budget runs out.
std::uint64_t enumerate_assignments(
    int alphabet, int ncoords, const std::vector<SetCheck>& checks,
    std::uint64_t cap,
    const std::function<void(const std::vector<std::uint8_t>&)>& visit) {
  std::vector<std::vector<const SetCheck*>> by_step(ncoords);
  for (const auto& c : checks) by_step[c.ready].push_back(&c);

  std::vector<std::uint8_t> sym(ncoords, 0);
  std::vector<std::uint8_t> key;
  std::uint64_t nodes = 0, leaves = 0;

  auto recurse = [&](auto&& self, int j) -> void {
    if (j == ncoords) {
      ++leaves;
      visit(sym);
      return;
    }
    for (int a = 0; a < alphabet; ++a) {
      if (++nodes > cap) throw CapExceeded("assignment scan exceeded node cap");
      sym[j] = static_cast<std::uint8_t>(a);
      bool ok = true;
      for (const SetCheck* c : by_step[j]) {
        key.clear();
        for (int p : c->positions) key.push_back(sym[p]);
        bool in = c->patterns->count(key) > 0;
        if (in != c->require) {
          ok = false;
          break;
        }
      }
      if (ok) self(self, j + 1);
    }
  };
  if (ncoords == 0) {
    visit(sym);
    return 1;
  }
  recurse(recurse, 0);
  return leaves;
}

// Placement checks for the forbidden patterns of `sys`, restricted to
// translates lying fully inside `coords`.
std::vector<SetCheck> forbidden_checks(const ShiftSystem& sys,
                                       const std::vector<GroupElement>& coords) {
  const GroupModel& group = sys.group();
  std::map<GroupElement, int> where;
  for (std::size_t i = 0; i < coords.size(); ++i)
    where[coords[i]] = static_cast<int>(i);

  std::vector<SetCheck> checks;
  for (const auto& sg : sys.shape_groups()) {
    std::set<GroupElement> candidates;
    for (const auto& w : coords)
      for (const auto& u : sg.shape.elements())
        candidates.insert(group.add(w, group.inverse(u)));
    for (const auto& h : candidates) {
      SetCheck c;
      c.patterns = &sg.patterns;
      c.require = false;
      bool inside = true;
      for (const auto& u : sg.shape.elements()) {
        auto it = where.find(group.add(u, h));
        if (it == where.end()) {
          inside = false;
          break;
        }
        c.positions.push_back(it->second);
      }
      if (!inside) continue;
      c.ready = *std::max_element(c.positions.begin(), c.positions.end());
      checks.push_back(std::move(c));
    }
  }
  // Drop duplicate placements (different translates can induce the same
  // position tuple, e.g. on cyclic groups).
  std::sort(checks.begin(), checks.end(), [](const SetCheck& a, const SetCheck& b) {
    if (a.patterns != b.patterns) return a.patterns < b.patterns;
    return a.positions < b.positions;
  });
  checks.erase(std::unique(checks.begin(), checks.end(),
                           [](const SetCheck& a, const SetCheck& b) {
                             return a.patterns == b.patterns &&
                                    a.positions == b.positions;
                           }),
               checks.end());
  return checks;
}

}  // namespace

std::uint8_t WindowPattern::at(const GroupElement& g) const {
  int idx = window.index_of(g);
  if (idx < 0) throw WindowTooSmall("coordinate outside the pattern window");
  return symbols[idx];
}

CoverSpec CoverSpec::whole_space() {
  CoverSpec c;
  c.trivial = true;
  c.kind = CoverKind::Open;
  c.label = "{X}";
  return c;
}

int CoverSpec::member_containing(const std::vector<std::uint8_t>& symbols) const {
  if (trivial) return 0;
  for (std::size_t m = 0; m < members.size(); ++m) {
    for (const auto& pat : members[m])
      if (pat == symbols) return static_cast<int>(m);
  }
  return -1;
}

std::uint64_t CoverSpec::members_containing(
    const std::vector<std::uint8_t>& symbols) const {
  if (trivial) return 1;
  if (members.size() > 64) throw ConfigError("cover mask supports at most 64 members");
  std::uint64_t mask = 0;
  for (std::size_t m = 0; m < members.size(); ++m) {
    for (const auto& pat : members[m]) {
      if (pat == symbols) {
        mask |= std::uint64_t{1} << m;
        break;
      }
    }
  }
  return mask;
}

double SymbolMetric::lo(std::uint32_t a, std::uint32_t b) const {
  if (a == b) return 0.0;
  if (kind == Kind::Discrete) return 1.0;
  for (std::size_t k = 0; k < moduli.size(); ++k) {
    if (a % moduli[k] != b % moduli[k]) return std::ldexp(1.0, -static_cast<int>(k + 1));
  }
  return 0.0;  // equal at every stored level
}

double SymbolMetric::hi(std::uint32_t a, std::uint32_t b) const {
  if (a == b) return equal_tail;
  double d = lo(a, b);
  return d > 0.0 ? d : equal_tail;
}

// ---------------------------------------------------------------------------
// TransferStructure

double TransferStructure::log_spectral_radius() const {
  std::vector<int> live;
  for (std::size_t s = 0; s < states.size(); ++s)
    if (biextendable[s]) live.push_back(static_cast<int>(s));
  if (live.empty()) throw EmptySystem("no bi-extendable states");
  std::unordered_map<int, int> pos;
  for (std::size_t i = 0; i < live.size(); ++i) pos[live[i]] = static_cast<int>(i);

  // Power iteration on A + I; the shift removes periodicity.
  std::vector<double> v(live.size(), 1.0), w(live.size());
  double lambda = 1.0;
  for (int it = 0; it < 200000; ++it) {
    double norm = 0.0;
    for (std::size_t i = 0; i < live.size(); ++i) {
      double acc = v[i];
      for (int t : out_edges[live[i]]) {
        auto p = pos.find(t);
        if (p != pos.end()) acc += v[p->second];
      }
      w[i] = acc;
      norm += acc;
    }
    double scale = 0.0;
    for (double x : v) scale += x;
    double next = norm / scale;
    for (std::size_t i = 0; i < live.size(); ++i) v[i] = w[i] / norm;
    if (it > 4 && std::abs(next - lambda) <= 1e-13 * std::max(1.0, lambda)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::log(lambda - 1.0);
}

std::uint64_t TransferStructure::count_words(int n) const {
  if (n < block) throw ConfigError("word length below the recoding block");
  std::vector<std::uint64_t> cnt(states.size(), 0);
  for (std::size_t s = 0; s < states.size(); ++s)
    if (left_extendable[s]) cnt[s] = 1;
  for (int step = 0; step < n - block; ++step) {
    std::vector<std::uint64_t> next(states.size(), 0);
    for (std::size_t s = 0; s < states.size(); ++s) {
      if (cnt[s] == 0) continue;
      for (int t : out_edges[s]) {
        std::uint64_t sum;
        if (__builtin_add_overflow(next[t], cnt[s], &sum))
          throw CapExceeded("word count overflow");
        next[t] = sum;
      }
    }
    cnt.swap(next);
  }
  std::uint64_t total = 0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (!right_extendable[s]) continue;
    std::uint64_t sum;
    if (__builtin_add_overflow(total, cnt[s], &sum))
      throw CapExceeded("word count overflow");
    total = sum;
  }
  return total;
}

// ---------------------------------------------------------------------------
// ShiftSystem

void ShiftSystem::finish_setup() {
  if (alphabet_.empty() || alphabet_.size() > 256) {
    throw ConfigError("alphabet must have between 1 and 256 symbols");
  }
  // Group forbidden patterns by shape.
  shape_groups_.clear();
  max_forbidden_span_ = 1;
  for (const auto& fp : forbidden_) {
    if (fp.symbols.size() != fp.shape.size()) {
      throw ConfigError("forbidden pattern symbols must align with its shape");
    }
    const auto& es = fp.shape.elements();
    std::int64_t span = 1;
    if (group_.kind() == GroupKind::IntegerLattice) {
      std::int64_t lox = es.front().x, hix = es.front().x, loy = 0, hiy = 0;
      for (const auto& e : es) {
        lox = std::min(lox, e.x);
        hix = std::max(hix, e.x);
        loy = std::min(loy, e.y);
        hiy = std::max(hiy, e.y);
      }
      span = std::max(hix - lox, hiy - loy) + 1;
    } else {
      span = static_cast<std::int64_t>(group_.modulus());
    }
    max_forbidden_span_ = std::max<int>(max_forbidden_span_, static_cast<int>(span));
    auto it = std::find_if(shape_groups_.begin(), shape_groups_.end(),
                           [&](const ShapeGroup& g) { return g.shape == fp.shape; });
    if (it == shape_groups_.end()) {
      shape_groups_.push_back(ShapeGroup{fp.shape, {}});
      it = shape_groups_.end() - 1;
    }
    it->patterns.insert(fp.symbols);
  }
  // Metric weights 2^{-|g|}, normalised over the stored ball.
  weights_.clear();
  double z = 0.0;
  FiniteSubset weight_ball = ball(group_, r_max_);
  for (const auto& g : weight_ball.elements()) {
    double w = std::ldexp(1.0, -static_cast<int>(group_.word_length(g)));
    weights_.push_back({g, w});
    z += w;
  }
  for (auto& [g, w] : weights_) w /= z;
  weight_prefix_.assign(r_max_ + 1, 0.0);
  for (const auto& [g, w] : weights_) {
    int r = static_cast<int>(group_.word_length(g));
    for (int i = r; i <= r_max_; ++i) weight_prefix_[i] += w;
  }
}

ShiftSystem ShiftSystem::full_shift(const GroupModel& group, int k, int r_max) {
  std::vector<std::string> alphabet;
  for (int a = 0; a < k; ++a) alphabet.push_back(std::to_string(a));
  ShiftSystem s = from_forbidden(group, std::move(alphabet), {}, r_max);
  s.name_ = "full-shift-" + std::to_string(k);
  return s;
}

ShiftSystem ShiftSystem::from_forbidden(const GroupModel& group,
                                        std::vector<std::string> alphabet,
                                        std::vector<ForbiddenPattern> forbidden,
                                        int r_max) {
  if (r_max < 0) throw ConfigError("R_max must be >= 0");
  ShiftSystem s;
  s.group_ = group;
  s.alphabet_ = std::move(alphabet);
  s.forbidden_ = std::move(forbidden);
  s.r_max_ = r_max;
  s.name_ = "custom";
  s.sym_ = SymbolMetric{};
  s.finish_setup();
  return s;
}

double ShiftSystem::weight(const GroupElement& g) const {
  GroupElement c = group_.canonical(g);
  for (const auto& [e, w] : weights_)
    if (e == c) return w;
  return 0.0;
}

double ShiftSystem::identity_weight() const { return weight(group_.identity()); }

double ShiftSystem::sum_weights(int radius) const {
  if (radius < 0) return 0.0;
  return weight_prefix_[std::min(radius, r_max_)];
}

double ShiftSystem::tail(int radius) const {
  if (radius >= r_max_) return 0.0;
  return weight_prefix_[r_max_] - sum_weights(radius);
}

double ShiftSystem::rho_tail(int radius) const {
  return sym_.equal_tail * sum_weights(radius) + tail(radius);
}

bool ShiftSystem::pattern_locally_allowed(
    const FiniteSubset& window, const std::vector<std::uint8_t>& symbols) const {
  const auto& coords = window.elements();
  for (const auto& sg : shape_groups_) {
    std::set<GroupElement> candidates;
    for (const auto& w : coords)
      for (const auto& u : sg.shape.elements())
        candidates.insert(group_.add(w, group_.inverse(u)));
    std::vector<std::uint8_t> key;
    for (const auto& h : candidates) {
      key.clear();
      bool inside = true;
      for (const auto& u : sg.shape.elements()) {
        int idx = window.index_of(group_.add(u, h));
        if (idx < 0) {
          inside = false;
          break;
        }
        key.push_back(symbols[idx]);
      }
      if (inside && sg.patterns.count(key)) return false;
    }
  }
  return true;
}

std::uint64_t ShiftSystem::enumerate_allowed(
    const FiniteSubset& window, std::uint64_t cap,
    const std::function<void(const std::vector<std::uint8_t>&, bool)>& visit) const {
  const GroupModel& group = group_;
  std::vector<GroupElement> enum_coords;
  bool z_line = group.kind() == GroupKind::IntegerLattice && group.rank() == 1;

  const TransferStructure* tr = nullptr;
  if (z_line) {
    try {
      tr = &transfer();
    } catch (const NotRecodable&) {
      tr = nullptr;
    }
    std::int64_t lo = window.elements().front().x;
    std::int64_t hi = window.elements().back().x;
    std::int64_t len = hi - lo + 1;
    if (tr != nullptr) len = std::max<std::int64_t>(len, tr->block);
    for (std::int64_t x = lo; x < lo + len; ++x) enum_coords.push_back({x, 0});
  } else if (group.kind() == GroupKind::Cyclic) {
    for (std::int64_t x = 0; x < group.modulus(); ++x) enum_coords.push_back({x, 0});
  } else {
    enum_coords = window.elements();
  }
  FiniteSubset enum_window(group, enum_coords);
  auto checks = forbidden_checks(*this, enum_window.elements());

  std::map<std::vector<std::uint8_t>, int> state_lookup;
  if (tr != nullptr) {
    for (std::size_t s = 0; s < tr->states.size(); ++s)
      state_lookup[tr->states[s]] = static_cast<int>(s);
  }

  // Projection of the enumeration window onto the requested one.
  std::vector<int> proj;
  for (const auto& g : window.elements()) proj.push_back(enum_window.index_of(g));
  bool identity_proj = enum_window.elements() == window.elements();

  std::map<std::vector<std::uint8_t>, bool> dedup;
  std::uint64_t emitted = 0;
  auto emit = [&](const std::vector<std::uint8_t>& sym) {
    bool ext = false;
    if (z_line && tr != nullptr) {
      auto state_of = [&](int offset) {
        std::vector<std::uint8_t> blockw(sym.begin() + offset,
                                         sym.begin() + offset + tr->block);
        auto it = state_lookup.find(blockw);
        return it == state_lookup.end() ? -1 : it->second;
      };
      int first = state_of(0);
      int last = state_of(static_cast<int>(sym.size()) - tr->block);
      ext = first >= 0 && last >= 0 && tr->left_extendable[first] &&
            tr->right_extendable[last];
    } else if (group.kind() == GroupKind::Cyclic) {
      ext = true;  // enumerated over the whole group
    } else {
      ext = forbidden_.empty();
    }
    if (identity_proj) {
      ++emitted;
      visit(sym, ext);
    } else {
      std::vector<std::uint8_t> restricted;
      restricted.reserve(proj.size());
      for (int p : proj) restricted.push_back(sym[p]);
      auto [it, inserted] = dedup.emplace(std::move(restricted), ext);
      if (!inserted) it->second = it->second || ext;
    }
  };
  enumerate_assignments(alphabet_size(), static_cast<int>(enum_coords.size()),
                        checks, cap, emit);
  if (!identity_proj) {
    for (auto& [sym, ext] : dedup) {
      ++emitted;
      visit(sym, ext);
    }
  }
  if (emitted == 0) throw EmptySystem("no allowed pattern on the requested window");
  return emitted;
}

std::vector<WindowPattern> ShiftSystem::allowed_patterns(const FiniteSubset& window,
                                                         std::uint64_t cap) const {
  std::vector<WindowPattern> out;
  enumerate_allowed(window, cap, [&](const std::vector<std::uint8_t>& sym, bool ext) {
    out.push_back(WindowPattern{window, sym, ext});
  });
  return out;
}

const TransferStructure& ShiftSystem::transfer() const {
  if (transfer_) return *transfer_;
  if (group_.kind() != GroupKind::IntegerLattice || group_.rank() != 1) {
    throw NotRecodable("transfer recoding applies to rank-1 lattice systems");
  }
  auto tr = std::make_shared<TransferStructure>();
  tr->block = std::max(1, max_forbidden_span_ - 1);
  double state_count = std::pow(static_cast<double>(alphabet_size()), tr->block);
  if (state_count > static_cast<double>(1u << 16)) {
    throw NotRecodable("recoding window exceeds the state cap");
  }

  // States: locally allowed block-words on [0, block).
  std::vector<GroupElement> coords;
  for (int x = 0; x < tr->block; ++x) coords.push_back({x, 0});
  FiniteSubset state_window(group_, coords);
  auto state_checks = forbidden_checks(*this, state_window.elements());
  std::map<std::vector<std::uint8_t>, int> state_id;
  enumerate_assignments(alphabet_size(), tr->block, state_checks, 1u << 22,
                        [&](const std::vector<std::uint8_t>& sym) {
                          int id = static_cast<int>(tr->states.size());
                          tr->states.push_back(sym);
                          state_id[sym] = id;
                        });
  if (tr->states.empty()) throw EmptySystem("no locally allowed block word");

  // Edges: allowed (block+1)-words.
  std::vector<GroupElement> ecoords = coords;
  ecoords.push_back({tr->block, 0});
  FiniteSubset edge_window(group_, ecoords);
  auto edge_checks = forbidden_checks(*this, edge_window.elements());
  tr->out_edges.assign(tr->states.size(), {});
  for (std::size_t s = 0; s < tr->states.size(); ++s) {
    std::vector<std::uint8_t> word = tr->states[s];
    word.push_back(0);
    for (int a = 0; a < alphabet_size(); ++a) {
      word.back() = static_cast<std::uint8_t>(a);
      bool ok = true;
      std::vector<std::uint8_t> key;
      for (const auto& c : edge_checks) {
        key.clear();
        for (int p : c.positions) key.push_back(word[p]);
        if (c.patterns->count(key)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      std::vector<std::uint8_t> suffix(word.begin() + 1, word.end());
      auto it = state_id.find(suffix);
      if (it != state_id.end()) tr->out_edges[s].push_back(it->second);
    }
  }

  // Cyclic states via Tarjan SCC (iterative).
  int n = static_cast<int>(tr->states.size());
  std::vector<int> comp(n, -1), low(n), num(n, -1), stk;
  std::vector<char> on_stack(n, 0);
  int counter = 0, ncomp = 0;
  std::vector<int> comp_size;
  for (int root = 0; root < n; ++root) {
    if (num[root] >= 0) continue;
    std::vector<std::pair<int, std::size_t>> call;
    call.push_back({root, 0});
    num[root] = low[root] = counter++;
    stk.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, ei] = call.back();
      if (ei < tr->out_edges[v].size()) {
        int w = tr->out_edges[v][ei++];
        if (num[w] < 0) {
          num[w] = low[w] = counter++;
          stk.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], num[w]);
        }
      } else {
        if (low[v] == num[v]) {
          int size = 0;
          while (true) {
            int w = stk.back();
            stk.pop_back();
            on_stack[w] = 0;
            comp[w] = ncomp;
            ++size;
            if (w == v) break;
          }
          comp_size.push_back(size);
          ++ncomp;
        }
        int v_done = v;
        call.pop_back();
        if (!call.empty()) {
          low[call.back().first] = std::min(low[call.back().first], low[v_done]);
        }
      }
    }
  }
  std::vector<char> cyclic(n, 0);
  for (int v = 0; v < n; ++v) {
    if (comp_size[comp[v]] > 1) {
      cyclic[v] = 1;
    } else {
      for (int w : tr->out_edges[v])
        if (w == v) cyclic[v] = 1;
    }
  }
  // left_extendable: reachable from a cyclic state (forward closure).
  // right_extendable: reaches a cyclic state (reverse closure).
  std::vector<std::vector<int>> in_edges(n);
  for (int v = 0; v < n; ++v)
    for (int w : tr->out_edges[v]) in_edges[w].push_back(v);
  auto closure = [&](const std::vector<std::vector<int>>& adj) {
    std::vector<char> mark(n, 0);
    std::vector<int> queue;
    for (int v = 0; v < n; ++v)
      if (cyclic[v]) {
        mark[v] = 1;
        queue.push_back(v);
      }
    while (!queue.empty()) {
      int v = queue.back();
      queue.pop_back();
      for (int w : adj[v])
        if (!mark[w]) {
          mark[w] = 1;
          queue.push_back(w);
        }
    }
    return mark;
  };
  tr->left_extendable = closure(tr->out_edges);
  tr->right_extendable = closure(in_edges);
  tr->biextendable.assign(n, 0);
  for (int v = 0; v < n; ++v)
    tr->biextendable[v] = tr->left_extendable[v] && tr->right_extendable[v];

  transfer_ = tr;
  return *transfer_;
}

double ShiftSystem::transfer_matrix_entropy() const {
  return transfer().log_spectral_radius();
}

CoverSpec ShiftSystem::standard_partition() const {
  FiniteSubset w(group_, {group_.identity()});
  auto pats = allowed_patterns(w);
  CoverSpec c;
  c.window = w;
  c.kind = CoverKind::Partition;
  c.label = "standard";
  for (const auto& p : pats) c.members.push_back({p.symbols});
  return c;
}

CoverSpec ShiftSystem::window_partition(int radius, std::uint64_t cap) const {
  FiniteSubset w = ball(group_, radius);
  auto pats = allowed_patterns(w, cap);
  CoverSpec c;
  c.window = w;
  c.kind = CoverKind::Partition;
  c.label = "window:" + std::to_string(radius);
  for (const auto& p : pats) c.members.push_back({p.symbols});
  return c;
}

CoverSpec ShiftSystem::residue_partition(int level) const {
  if (!is_odometer_view()) {
    throw ConfigError("residue partitions require an odometer view");
  }
  if (level < 1 || level > odometer_depth()) {
    throw ConfigError("residue level out of range");
  }
  std::uint64_t m = sym_.moduli[level - 1];
  CoverSpec c;
  c.window = FiniteSubset(group_, {group_.identity()});
  c.kind = CoverKind::Partition;
  c.label = "residue:" + std::to_string(level);
  c.members.assign(m, {});
  for (int a = 0; a < alphabet_size(); ++a) {
    c.members[static_cast<std::uint64_t>(a) % m].push_back(
        {static_cast<std::uint8_t>(a)});
  }
  return c;
}

Bracket rho_interval(const ShiftSystem& sys, const WindowPattern& x,
                     const WindowPattern& y, int radius) {
  int r = std::min(radius, sys.r_max());
  double lo = 0.0, hi = 0.0;
  FiniteSubset radius_ball = ball(sys.group(), r);
  for (const auto& g : radius_ball.elements()) {
    double w = sys.weight(g);
    if (w == 0.0) continue;
    std::uint8_t a = x.at(g);  // throws WindowTooSmall when undefined
    std::uint8_t b = y.at(g);
    lo += w * sys.symbol_metric().lo(a, b);
    hi += w * sys.symbol_metric().hi(a, b);
  }
  hi += sys.tail(r);
  return Bracket{ExtReal(lo), ExtReal(std::min(hi, 1.0))};
}

// ---------------------------------------------------------------------------
// Measures

InvariantMeasure InvariantMeasure::bernoulli(std::vector<double> p) {
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0) throw ConfigError("Bernoulli weights must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("Bernoulli weights must sum to 1");
  InvariantMeasure m;
  m.kind_ = Kind::Bernoulli;
  m.pi_ = std::move(p);
  return m;
}

InvariantMeasure InvariantMeasure::markov(std::vector<std::vector<double>> transition) {
  std::size_t k = transition.size();
  for (const auto& row : transition) {
    if (row.size() != k) throw ConfigError("Markov matrix must be square");
    double sum = 0.0;
    for (double v : row) {
      if (v < 0.0) throw ConfigError("Markov entries must be non-negative");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("Markov rows must sum to 1");
  }
  InvariantMeasure m;
  m.kind_ = Kind::Markov;
  m.p_ = std::move(transition);
  // stationary distribution by iteration
  std::vector<double> pi(k, 1.0 / static_cast<double>(k)), next(k);
  for (int it = 0; it < 100000; ++it) {
    double diff = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) acc += pi[i] * m.p_[i][j];
      next[j] = acc;
    }
    for (std::size_t j = 0; j < k; ++j) diff = std::max(diff, std::abs(next[j] - pi[j]));
    pi.swap(next);
    if (diff < 1e-15) break;
  }
  m.pi_ = std::move(pi);
  return m;
}

double InvariantMeasure::cylinder(const ShiftSystem& sys, const FiniteSubset& window,
                                  const std::vector<std::uint8_t>& symbols) const {
  if (symbols.size() != window.size()) {
    throw ConfigError("cylinder symbols must align with the window");
  }
  if (kind_ == Kind::Bernoulli) {
    double p = 1.0;
    for (auto s : symbols) p *= pi_[s];
    return p;
  }
  if (sys.group().kind() != GroupKind::IntegerLattice || sys.group().rank() != 1) {
    throw UnsupportedWindow("Markov measures apply to rank-1 lattice systems");
  }
  const auto& coords = window.elements();
  for (std::size_t i = 1; i < coords.size(); ++i) {
    if (coords[i].x != coords[i - 1].x + 1) {
      throw UnsupportedWindow("Markov cylinder windows must be intervals");
    }
  }
  double p = pi_[symbols.front()];
  for (std::size_t i = 1; i < symbols.size(); ++i) {
    p *= p_[symbols[i - 1]][symbols[i]];
  }
  return p;
}

double measure_of_constraints(const ShiftSystem& sys, const InvariantMeasure& mu,
                              const std::vector<PatternConstraint>& constraints,
                              std::uint64_t cap) {
  std::vector<GroupElement> coords;
  for (const auto& c : constraints)
    for (const auto& g : c.coords) coords.push_back(sys.group().canonical(g));
  if (coords.empty()) return 1.0;
  FiniteSubset base(sys.group(), coords);
  std::vector<GroupElement> full = base.elements();
  if (mu.kind() == InvariantMeasure::Kind::Markov) {
    // fill the hull so the cylinder is an interval
    full.clear();
    for (std::int64_t x = base.elements().front().x; x <= base.elements().back().x; ++x)
      full.push_back({x, 0});
  }
  FiniteSubset window(sys.group(), full);

  std::vector<SetCheck> checks;
  for (const auto& c : constraints) {
    SetCheck sc;
    sc.require = true;
    sc.patterns = c.allowed;
    for (const auto& g : c.coords)
      sc.positions.push_back(window.index_of(sys.group().canonical(g)));
    sc.ready = *std::max_element(sc.positions.begin(), sc.positions.end());
    checks.push_back(std::move(sc));
  }
  double total = 0.0;
  enumerate_assignments(sys.alphabet_size(), static_cast<int>(window.size()), checks,
                        cap, [&](const std::vector<std::uint8_t>& sym) {
                          total += mu.cylinder(sys, window, sym);
                        });
  return total;
}

// ---------------------------------------------------------------------------
// Odometer

OdometerSystem::OdometerSystem(SubgroupChain chain, int depth)
    : chain_(std::move(chain)), depth_(depth) {
  if (depth_ < 1 || depth_ >= chain_.levels()) {
    throw ConfigError("odometer depth must satisfy 1 <= depth < chain levels");
  }
}

std::uint64_t OdometerSystem::point_count() const { return chain_.index_at(depth_); }

std::uint64_t OdometerSystem::residue(std::uint64_t x, int level) const {
  return x % chain_.index_at(level);
}

std::uint64_t OdometerSystem::act(std::int64_t g, std::uint64_t x) const {
  std::int64_t m = static_cast<std::int64_t>(point_count());
  std::int64_t r = ((g % m) + m + static_cast<std::int64_t>(x)) % m;
  return static_cast<std::uint64_t>(r);
}

double OdometerSystem::rho(std::uint64_t x, std::uint64_t y) const {
  for (int k = 1; k <= depth_; ++k) {
    if (x % chain_.index_at(k) != y % chain_.index_at(k)) return std::ldexp(1.0, -k);
  }
  return 0.0;
}

double OdometerSystem::truncation_error() const { return std::ldexp(1.0, -depth_); }

ShiftSystem OdometerSystem::as_shift_system() const {
  std::uint64_t m = point_count();
  if (m > 256) throw ConfigError("odometer symbol view supports at most 256 points");
  std::vector<std::string> alphabet;
  for (std::uint64_t a = 0; a < m; ++a) alphabet.push_back(std::to_string(a));
  // successor constraint: the symbol at g+1 is the symbol at g, plus one
  std::vector<ForbiddenPattern> forbidden;
  GroupModel z = GroupModel::lattice(1);
  FiniteSubset pair_shape(z, {GroupElement{0, 0}, GroupElement{1, 0}});
  for (std::uint64_t a = 0; a < m; ++a) {
    for (std::uint64_t b = 0; b < m; ++b) {
      if (b == (a + 1) % m) continue;
      forbidden.push_back(ForbiddenPattern{
          pair_shape,
          {static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)}});
    }
  }
  ShiftSystem s = ShiftSystem::from_forbidden(z, std::move(alphabet),
                                              std::move(forbidden), /*r_max=*/0);
  SymbolMetric sym;
  sym.kind = SymbolMetric::Kind::Level;
  for (int k = 1; k <= depth_; ++k) sym.moduli.push_back(chain_.index_at(k));
  sym.equal_tail = truncation_error();
  s.sym_ = sym;
  s.name_ = "odometer-depth-" + std::to_string(depth_);
  return s;
}

OdometerSystem odometer_system(const SubgroupChain& chain, int depth) {
  return OdometerSystem(chain, depth);
}

// ---------------------------------------------------------------------------
// Registry / JSON

ShiftSystem ShiftSystem::builtin(const std::string& name) {
  if (name.rfind("full-shift-", 0) == 0) {
    int k = std::atoi(name.c_str() + 11);
    if (k < 1) throw ConfigError("bad full shift name: " + name);
    return full_shift(GroupModel::lattice(1), k);
  }
  if (name == "golden-mean") {
    GroupModel z = GroupModel::lattice(1);
    FiniteSubset shape(z, {GroupElement{0, 0}, GroupElement{1, 0}});
    ShiftSystem s = from_forbidden(z, {"0", "1"},
                                   {ForbiddenPattern{shape, {1, 1}}}, 8);
    s.name_ = "golden-mean";
    return s;
  }
  if (name.rfind("odometer-2adic", 0) == 0) {
    int depth = 6;
    auto colon = name.find(':');
    if (colon != std::string::npos) depth = std::atoi(name.c_str() + colon + 1);
    if (depth < 1 || depth > 8) throw ConfigError("odometer depth must be in [1, 8]");
    std::vector<std::uint64_t> indices;
    for (int k = 0; k <= depth + 2; ++k) indices.push_back(std::uint64_t{1} << k);
    SubgroupChain chain(GroupModel::lattice(1), indices);
    ShiftSystem s = OdometerSystem(chain, depth).as_shift_system();
    s.name_ = name;
    return s;
  }
  throw ConfigError("unknown builtin system: " + name);
}

ShiftSystem ShiftSystem::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad system JSON: ") + e.what());
  }
  GroupModel group = GroupModel::parse(j.at("group").get<std::string>());
  std::vector<std::string> alphabet = j.at("alphabet").get<std::vector<std::string>>();
  auto symbol_index = [&](const std::string& s) -> std::uint8_t {
    for (std::size_t i = 0; i < alphabet.size(); ++i)
      if (alphabet[i] == s) return static_cast<std::uint8_t>(i);
    throw ConfigError("forbidden pattern uses unknown symbol: " + s);
  };
  std::vector<ForbiddenPattern> forbidden;
  if (j.contains("forbidden")) {
    for (const auto& fp : j["forbidden"]) {
      std::vector<GroupElement> raw;
      for (const auto& c : fp.at("shape")) {
        if (c.is_array()) {
          raw.push_back({c[0].get<std::int64_t>(), c[1].get<std::int64_t>()});
        } else {
          raw.push_back({c.get<std::int64_t>(), 0});
        }
      }
      std::vector<std::string> pat = fp.at("pattern").get<std::vector<std::string>>();
      if (pat.size() != raw.size()) {
        throw ConfigError("forbidden pattern length must match its shape");
      }
      // align symbols with the sorted shape order
      std::vector<std::pair<GroupElement, std::uint8_t>> tagged;
      for (std::size_t i = 0; i < raw.size(); ++i) {
        tagged.push_back({group.canonical(raw[i]), symbol_index(pat[i])});
      }
      std::sort(tagged.begin(), tagged.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::vector<GroupElement> coords;
      std::vector<std::uint8_t> syms;
      for (const auto& [g, s] : tagged) {
        coords.push_back(g);
        syms.push_back(s);
      }
      forbidden.push_back(ForbiddenPattern{FiniteSubset(group, coords), syms});
    }
  }
  int r_max = j.value("R_max", 8);
  ShiftSystem s = from_forbidden(group, std::move(alphabet), std::move(forbidden), r_max);
  s.name_ = j.value("name", std::string("custom"));
  return s;
}

}  // namespace sel
