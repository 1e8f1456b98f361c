#include "sel/group.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <set>

#include "sel/errors.hpp"

namespace sel {

namespace {

std::int64_t mod_floor(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

GroupModel GroupModel::lattice(int rank) {
  if (rank != 1 && rank != 2) throw ConfigError("lattice rank must be 1 or 2");
  GroupModel g;
  g.kind_ = GroupKind::IntegerLattice;
  g.rank_ = rank;
  return g;
}

GroupModel GroupModel::cyclic(std::int64_t m) {
  if (m < 1) throw ConfigError("cyclic modulus must be >= 1");
  GroupModel g;
  g.kind_ = GroupKind::Cyclic;
  g.rank_ = 1;
  g.modulus_ = m;
  return g;
}

GroupModel GroupModel::parse(const std::string& text) {
  if (text == "Z") return lattice(1);
  if (text == "Z2") return lattice(2);
  if (text.rfind("Z/", 0) == 0) {
    char* end = nullptr;
    long long m = std::strtoll(text.c_str() + 2, &end, 10);
    if (end == nullptr || *end != '\0' || m < 1) {
      throw ConfigError("bad cyclic group spec: " + text);
    }
    return cyclic(m);
  }
  throw ConfigError("unknown group spec: " + text + " (expected Z, Z2 or Z/m)");
}

std::string GroupModel::name() const {
  if (kind_ == GroupKind::Cyclic) return "Z/" + std::to_string(modulus_);
  return rank_ == 1 ? "Z" : "Z2";
}

GroupElement GroupModel::canonical(GroupElement g) const {
  if (kind_ == GroupKind::Cyclic) {
    g.x = mod_floor(g.x, modulus_);
    g.y = 0;
  } else if (rank_ == 1) {
    g.y = 0;
  }
  return g;
}

GroupElement GroupModel::add(GroupElement a, GroupElement b) const {
  return canonical(GroupElement{a.x + b.x, a.y + b.y});
}

GroupElement GroupModel::inverse(GroupElement g) const {
  return canonical(GroupElement{-g.x, -g.y});
}

std::int64_t GroupModel::word_length(GroupElement g) const {
  g = canonical(g);
  if (kind_ == GroupKind::Cyclic) {
    return std::min(g.x, modulus_ - g.x);
  }
  return std::llabs(g.x) + std::llabs(g.y);
}

std::vector<GroupElement> GroupModel::generators() const {
  if (kind_ == GroupKind::Cyclic || rank_ == 1) return {GroupElement{1, 0}};
  return {GroupElement{1, 0}, GroupElement{0, 1}};
}

FiniteSubset::FiniteSubset(const GroupModel& group, std::vector<GroupElement> elems) {
  if (elems.empty()) throw ConfigError("finite subset must be non-empty");
  for (auto& e : elems) e = group.canonical(e);
  std::sort(elems.begin(), elems.end());
  elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  elems_ = std::move(elems);
}

bool FiniteSubset::contains(const GroupElement& g) const {
  return std::binary_search(elems_.begin(), elems_.end(), g);
}

int FiniteSubset::index_of(const GroupElement& g) const {
  auto it = std::lower_bound(elems_.begin(), elems_.end(), g);
  if (it == elems_.end() || *it != g) return -1;
  return static_cast<int>(it - elems_.begin());
}

bool FiniteSubset::subset_of(const FiniteSubset& other) const {
  return std::includes(other.elems_.begin(), other.elems_.end(), elems_.begin(),
                       elems_.end());
}

FiniteSubset FiniteSubset::union_with(const GroupModel& group,
                                      const FiniteSubset& other) const {
  std::vector<GroupElement> all = elems_;
  all.insert(all.end(), other.elems_.begin(), other.elems_.end());
  return FiniteSubset(group, std::move(all));
}

FiniteSubset FiniteSubset::translated(const GroupModel& group,
                                      const GroupElement& g) const {
  std::vector<GroupElement> out;
  out.reserve(elems_.size());
  for (const auto& e : elems_) out.push_back(group.add(e, g));
  return FiniteSubset(group, std::move(out));
}

FiniteSubset ball(const GroupModel& group, int radius) {
  if (radius < 0) throw ConfigError("ball radius must be >= 0");
  std::vector<GroupElement> elems;
  if (group.kind() == GroupKind::Cyclic) {
    for (std::int64_t a = 0; a < group.modulus(); ++a) {
      GroupElement g{a, 0};
      if (group.word_length(g) <= radius) elems.push_back(g);
    }
  } else if (group.rank() == 1) {
    for (std::int64_t x = -radius; x <= radius; ++x) elems.push_back({x, 0});
  } else {
    for (std::int64_t x = -radius; x <= radius; ++x) {
      std::int64_t rest = radius - std::llabs(x);
      for (std::int64_t y = -rest; y <= rest; ++y) elems.push_back({x, y});
    }
  }
  return FiniteSubset(group, std::move(elems));
}

Rational FolnerSet::defect(const GroupElement& g) const {
  for (const auto& [gen, r] : defects) {
    if (gen == g) return r;
  }
  throw ConfigError("no defect recorded for the requested generator");
}

FolnerSet folner(const GroupModel& group, int n) {
  if (n < 1) throw ConfigError("Folner index must be >= 1");
  std::vector<GroupElement> elems;
  if (group.kind() == GroupKind::Cyclic) {
    std::int64_t upto = std::min<std::int64_t>(n, group.modulus());
    for (std::int64_t a = 0; a < upto; ++a) elems.push_back({a, 0});
  } else if (group.rank() == 1) {
    for (std::int64_t x = 0; x < n; ++x) elems.push_back({x, 0});
  } else {
    for (std::int64_t x = 0; x < n; ++x)
      for (std::int64_t y = 0; y < n; ++y) elems.push_back({x, y});
  }
  FolnerSet f;
  f.base = FiniteSubset(group, std::move(elems));
  f.n = n;
  const auto& base = f.base.elements();
  std::set<GroupElement> base_set(base.begin(), base.end());
  for (const auto& gen : group.generators()) {
    // |gF \Delta F| counted exactly.
    std::int64_t sym_diff = 0;
    std::set<GroupElement> shifted;
    for (const auto& e : base) shifted.insert(group.add(gen, e));
    for (const auto& e : shifted)
      if (base_set.find(e) == base_set.end()) ++sym_diff;
    for (const auto& e : base_set)
      if (shifted.find(e) == shifted.end()) ++sym_diff;
    std::int64_t den = static_cast<std::int64_t>(base.size());
    std::int64_t g = std::gcd(sym_diff, den);
    f.defects.push_back({gen, Rational{sym_diff / g, den / g}});
  }
  return f;
}

SubgroupChain::SubgroupChain(GroupModel group, std::vector<std::uint64_t> indices)
    : group_(group), indices_(std::move(indices)) {
  if (group_.kind() != GroupKind::IntegerLattice || group_.rank() != 1) {
    throw ConfigError("subgroup chains are supported for the rank-1 lattice only");
  }
  if (indices_.empty() || indices_[0] != 1) {
    throw ConfigError("chain indices must start at 1");
  }
  for (std::size_t i = 1; i < indices_.size(); ++i) {
    if (indices_[i] <= indices_[i - 1] || indices_[i] % indices_[i - 1] != 0) {
      throw ConfigError("chain indices must be strictly increasing and divisible");
    }
  }
}

SubgroupChain SubgroupChain::parse(const std::string& comma_list) {
  std::vector<std::uint64_t> indices;
  std::size_t pos = 0;
  while (pos < comma_list.size()) {
    std::size_t next = comma_list.find(',', pos);
    if (next == std::string::npos) next = comma_list.size();
    std::string tok = comma_list.substr(pos, next - pos);
    if (!tok.empty()) indices.push_back(std::strtoull(tok.c_str(), nullptr, 10));
    pos = next + 1;
  }
  return SubgroupChain(GroupModel::lattice(1), std::move(indices));
}

std::uint64_t CosetSpace::act(std::int64_t g, std::uint64_t a) const {
  std::int64_t m = static_cast<std::int64_t>(modulus);
  std::int64_t r = (g % m + m + static_cast<std::int64_t>(a % modulus)) % m;
  return static_cast<std::uint64_t>(r);
}

CosetSpace coset_space(const SubgroupChain& chain, int level) {
  if (level < 0 || level >= chain.levels()) {
    throw ConfigError("chain level out of range");
  }
  return CosetSpace{chain.index_at(level)};
}

}  // namespace sel
