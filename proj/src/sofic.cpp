#include "sel/sofic.hpp"

#include <algorithm>

#include "json.hpp"
#include "sel/errors.hpp"

namespace sel {

Perm identity_perm(int d) {
  Perm p(d);
  for (int i = 0; i < d; ++i) p[i] = i;
  return p;
}

Perm compose(const Perm& outer, const Perm& inner) {
  Perm p(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) p[i] = outer[inner[i]];
  return p;
}

Perm inverse_perm(const Perm& p) {
  Perm q(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) q[p[i]] = static_cast<std::int32_t>(i);
  return q;
}

bool is_permutation(const Perm& p) {
  std::vector<bool> seen(p.size(), false);
  for (auto v : p) {
    if (v < 0 || v >= static_cast<std::int32_t>(p.size()) || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

SoficMap SoficMap::cyclic(int d) {
  if (d < 1) throw ConfigError("cyclic map needs d >= 1");
  Perm shift(d);
  for (int i = 0; i < d; ++i) shift[i] = (i + 1) % d;
  SoficMap m;
  m.group_ = GroupModel::lattice(1);
  m.d_ = d;
  m.gen_perms_ = {shift};
  m.gen_inverses_ = {inverse_perm(shift)};
  m.quotient_ = true;
  m.label_ = "cyclic-" + std::to_string(d);
  return m;
}

SoficMap SoficMap::torus(int d1, int d2) {
  if (d1 < 1 || d2 < 1) throw ConfigError("torus map needs d1, d2 >= 1");
  int d = d1 * d2;
  // index = a1 * d2 + a2
  Perm s1(d), s2(d);
  for (int a1 = 0; a1 < d1; ++a1) {
    for (int a2 = 0; a2 < d2; ++a2) {
      int idx = a1 * d2 + a2;
      s1[idx] = ((a1 + 1) % d1) * d2 + a2;
      s2[idx] = a1 * d2 + (a2 + 1) % d2;
    }
  }
  SoficMap m;
  m.group_ = GroupModel::lattice(2);
  m.d_ = d;
  m.gen_perms_ = {s1, s2};
  m.gen_inverses_ = {inverse_perm(s1), inverse_perm(s2)};
  m.quotient_ = true;
  m.label_ = "torus-" + std::to_string(d1) + "x" + std::to_string(d2);
  return m;
}

SoficMap SoficMap::from_chain(const SubgroupChain& chain, int level) {
  CosetSpace cs = coset_space(chain, level);
  SoficMap m = cyclic(static_cast<int>(cs.modulus));
  m.label_ = "chain-level-" + std::to_string(level);
  return m;
}

SoficMap SoficMap::regular_blocks(const GroupModel& cyclic_group, int copies) {
  if (cyclic_group.kind() != GroupKind::Cyclic) {
    throw ConfigError("regular_blocks needs a cyclic group");
  }
  if (copies < 1) throw ConfigError("regular_blocks needs copies >= 1");
  int mm = static_cast<int>(cyclic_group.modulus());
  int d = mm * copies;
  Perm shift(d);
  for (int b = 0; b < copies; ++b) {
    for (int j = 0; j < mm; ++j) shift[b * mm + j] = b * mm + (j + 1) % mm;
  }
  SoficMap m;
  m.group_ = cyclic_group;
  m.d_ = d;
  m.gen_perms_ = {shift};
  m.gen_inverses_ = {inverse_perm(shift)};
  m.quotient_ = true;
  m.label_ = "regular-blocks-" + std::to_string(copies);
  return m;
}

SoficMap SoficMap::custom(const GroupModel& group, std::vector<Perm> gen_perms,
                          std::string label) {
  auto gens = group.generators();
  if (gen_perms.size() != gens.size()) {
    throw ConfigError("custom sofic map needs one permutation per generator");
  }
  std::size_t d = gen_perms.front().size();
  for (const auto& p : gen_perms) {
    if (p.size() != d || !is_permutation(p)) {
      throw ConfigError("custom sofic map tables must be permutations of equal degree");
    }
  }
  SoficMap m;
  m.group_ = group;
  m.d_ = static_cast<int>(d);
  m.gen_perms_ = std::move(gen_perms);
  for (const auto& p : m.gen_perms_) m.gen_inverses_.push_back(inverse_perm(p));
  m.quotient_ = false;
  m.label_ = std::move(label);
  return m;
}

Perm SoficMap::power(int gen_index, std::int64_t e) const {
  // Quotient maps act through Z/d, so exponents reduce mod d.
  if (quotient_) {
    std::int64_t m = d_;
    e = ((e % m) + m) % m;
  }
  const Perm& base = e >= 0 ? gen_perms_[gen_index] : gen_inverses_[gen_index];
  std::int64_t reps = e >= 0 ? e : -e;
  Perm acc = identity_perm(d_);
  for (std::int64_t k = 0; k < reps; ++k) acc = compose(base, acc);
  return acc;
}

Perm SoficMap::sigma(const GroupElement& g) const {
  GroupElement c = group_.canonical(g);
  Perm acc = power(0, c.x);
  if (group_.rank() == 2) acc = compose(power(1, c.y), acc);
  return acc;
}

std::int32_t SoficMap::apply(const GroupElement& g, std::int32_t a) const {
  return sigma(g)[a];
}

std::string SoficMap::to_json() const {
  nlohmann::ordered_json j;
  j["d"] = d_;
  nlohmann::ordered_json gens = nlohmann::ordered_json::object();
  auto gen_elems = group_.generators();
  for (std::size_t k = 0; k < gen_elems.size(); ++k) {
    std::string key = group_.rank() == 2
                          ? "(" + std::to_string(gen_elems[k].x) + "," +
                                std::to_string(gen_elems[k].y) + ")"
                          : std::to_string(gen_elems[k].x);
    std::vector<int> images;  // 1-based on the wire
    for (auto v : gen_perms_[k]) images.push_back(v + 1);
    gens[key] = images;
  }
  j["gens"] = gens;
  return j.dump();
}

SoficMap SoficMap::from_json(const GroupModel& group, const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad sofic map JSON: ") + e.what());
  }
  if (!j.contains("d") || !j.contains("gens")) {
    throw ConfigError("sofic map JSON needs fields d and gens");
  }
  int d = j["d"].get<int>();
  auto gens = group.generators();
  std::vector<Perm> perms;
  for (const auto& gen : gens) {
    std::string key = group.rank() == 2 ? "(" + std::to_string(gen.x) + "," +
                                              std::to_string(gen.y) + ")"
                                        : std::to_string(gen.x);
    if (!j["gens"].contains(key)) {
      throw ConfigError("sofic map JSON missing generator " + key);
    }
    Perm p;
    for (const auto& v : j["gens"][key]) {
      p.push_back(v.get<std::int32_t>() - 1);  // wire format is 1-based
    }
    if (static_cast<int>(p.size()) != d || !is_permutation(p)) {
      throw ConfigError("generator table for " + key + " is not a permutation of size d");
    }
    perms.push_back(std::move(p));
  }
  return custom(group, std::move(perms), "imported");
}

double GoodnessReport::mult_fraction(const GroupElement& s, const GroupElement& t) const {
  for (const auto& e : mult)
    if (e.s == s && e.t == t) return e.fraction();
  throw ConfigError("pair not present in goodness report");
}

double GoodnessReport::free_fraction(const GroupElement& s, const GroupElement& t) const {
  for (const auto& e : free_)
    if (e.s == s && e.t == t) return e.fraction();
  throw ConfigError("pair not present in goodness report");
}

double GoodnessReport::min_mult_fraction() const {
  double m = 1.0;
  for (const auto& e : mult) m = std::min(m, e.fraction());
  return m;
}

double GoodnessReport::min_free_fraction() const {
  double m = 1.0;
  for (const auto& e : free_) m = std::min(m, e.fraction());
  return m;
}

GoodnessReport goodness(const SoficMap& sigma, const FiniteSubset& f) {
  GoodnessReport rep;
  const auto& group = sigma.group();
  int d = sigma.d();
  for (const auto& s : f.elements()) {
    Perm ps = sigma.sigma(s);
    for (const auto& t : f.elements()) {
      Perm pt = sigma.sigma(t);
      Perm pst = sigma.sigma(group.add(s, t));
      std::uint64_t match = 0;
      for (int a = 0; a < d; ++a)
        if (ps[pt[a]] == pst[a]) ++match;
      rep.mult.push_back({s, t, match, static_cast<std::uint64_t>(d)});
      if (s != t) {
        std::uint64_t distinct = 0;
        for (int a = 0; a < d; ++a)
          if (ps[a] != pt[a]) ++distinct;
        rep.free_.push_back({s, t, distinct, static_cast<std::uint64_t>(d)});
      }
    }
  }
  return rep;
}

}  // namespace sel
