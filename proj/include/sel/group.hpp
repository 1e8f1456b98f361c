#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sel {

enum class GroupKind { IntegerLattice, Cyclic };

// Element in normal form: (x) for rank-1 lattices and cyclic groups
// (0 <= x < m for cyclic), (x, y) for the rank-2 lattice.
struct GroupElement {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend auto operator<=>(const GroupElement&, const GroupElement&) = default;
};

struct GroupElementHash {
  std::size_t operator()(const GroupElement& g) const {
    std::uint64_t h = static_cast<std::uint64_t>(g.x) * 0x9e3779b97f4a7c15ull;
    h ^= static_cast<std::uint64_t>(g.y) + 0x7f4a7c15u + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

// One of the supported groups: Z, Z^2 or Z/m, with word metric in the
// standard generators (l^1 for the rank-2 lattice).
class GroupModel {
 public:
  static GroupModel lattice(int rank);
  static GroupModel cyclic(std::int64_t m);
  // "Z", "Z2", "Z/6"
  static GroupModel parse(const std::string& text);

  GroupKind kind() const { return kind_; }
  int rank() const { return rank_; }
  std::int64_t modulus() const { return modulus_; }
  bool is_finite() const { return kind_ == GroupKind::Cyclic; }
  std::string name() const;

  GroupElement identity() const { return GroupElement{}; }
  GroupElement canonical(GroupElement g) const;
  GroupElement add(GroupElement a, GroupElement b) const;
  GroupElement inverse(GroupElement g) const;
  std::int64_t word_length(GroupElement g) const;
  std::vector<GroupElement> generators() const;

  friend bool operator==(const GroupModel&, const GroupModel&) = default;

 private:
  GroupKind kind_ = GroupKind::IntegerLattice;
  int rank_ = 1;
  std::int64_t modulus_ = 0;  // cyclic only
};

// Non-empty finite set of group elements, deduplicated and sorted.
class FiniteSubset {
 public:
  FiniteSubset() = default;
  FiniteSubset(const GroupModel& group, std::vector<GroupElement> elems);

  const std::vector<GroupElement>& elements() const { return elems_; }
  std::size_t size() const { return elems_.size(); }
  bool contains(const GroupElement& g) const;
  // Index in the sorted order, -1 if absent.
  int index_of(const GroupElement& g) const;
  bool subset_of(const FiniteSubset& other) const;

  FiniteSubset union_with(const GroupModel& group, const FiniteSubset& other) const;
  FiniteSubset translated(const GroupModel& group, const GroupElement& g) const;

  friend bool operator==(const FiniteSubset&, const FiniteSubset&) = default;

 private:
  std::vector<GroupElement> elems_;
};

FiniteSubset ball(const GroupModel& group, int radius);

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

struct FolnerSet {
  FiniteSubset base;
  int n = 1;
  // Exact |gF \Delta F| / |F| per generator.
  std::vector<std::pair<GroupElement, Rational>> defects;

  Rational defect(const GroupElement& g) const;
};

FolnerSet folner(const GroupModel& group, int n);

// Finite-index subgroup chain of Z: indices 1 = m_0 | m_1 | m_2 | ...
class SubgroupChain {
 public:
  SubgroupChain(GroupModel group, std::vector<std::uint64_t> indices);
  static SubgroupChain parse(const std::string& comma_list);

  const GroupModel& group() const { return group_; }
  const std::vector<std::uint64_t>& indices() const { return indices_; }
  int levels() const { return static_cast<int>(indices_.size()); }
  std::uint64_t index_at(int level) const { return indices_.at(level); }

 private:
  GroupModel group_;
  std::vector<std::uint64_t> indices_;
};

// Z/m with the left translation action.
struct CosetSpace {
  std::uint64_t modulus = 1;
  std::uint64_t size() const { return modulus; }
  std::uint64_t act(std::int64_t g, std::uint64_t a) const;
};

CosetSpace coset_space(const SubgroupChain& chain, int level);

}  // namespace sel
