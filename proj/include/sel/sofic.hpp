#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sel/group.hpp"

namespace sel {

// Permutation of {0, ..., d-1} stored as its image table.
using Perm = std::vector<std::int32_t>;

Perm identity_perm(int d);
Perm compose(const Perm& outer, const Perm& inner);  // outer(inner(a))
Perm inverse_perm(const Perm& p);
bool is_permutation(const Perm& p);

// A map sigma: G -> Sym(d) given on the generators and extended to arbitrary
// elements along the additive normal form (e1-powers first, then e2-powers).
class SoficMap {
 public:
  static SoficMap cyclic(int d);                 // Z -> Sym(d), 1 |-> d-cycle
  static SoficMap torus(int d1, int d2);         // Z^2 on the d1 x d2 torus
  static SoficMap from_chain(const SubgroupChain& chain, int level);
  // Z/m acting on `copies` disjoint translation blocks (d = m * copies).
  static SoficMap regular_blocks(const GroupModel& cyclic_group, int copies);
  // User-supplied generator table; gen_perms holds one permutation per
  // generator of the group, in generator order.
  static SoficMap custom(const GroupModel& group, std::vector<Perm> gen_perms,
                         std::string label = "custom");

  const GroupModel& group() const { return group_; }
  int d() const { return d_; }
  // Quotient maps are exact homomorphisms; their word extension reduces
  // exponents first.
  bool is_quotient() const { return quotient_; }
  const std::string& label() const { return label_; }

  Perm sigma(const GroupElement& g) const;
  std::int32_t apply(const GroupElement& g, std::int32_t a) const;

  std::string to_json() const;
  static SoficMap from_json(const GroupModel& group, const std::string& text);

 private:
  GroupModel group_;
  int d_ = 1;
  std::vector<Perm> gen_perms_;      // aligned with group_.generators()
  std::vector<Perm> gen_inverses_;
  bool quotient_ = false;
  std::string label_;

  Perm power(int gen_index, std::int64_t e) const;
};

// Fractions of {0,...,d-1} witnessing approximate multiplicativity and
// approximate freeness over a finite window F x F.
struct GoodnessEntry {
  GroupElement s;
  GroupElement t;
  std::uint64_t count = 0;  // matching indices
  std::uint64_t d = 1;
  double fraction() const { return static_cast<double>(count) / static_cast<double>(d); }
};

struct GoodnessReport {
  std::vector<GoodnessEntry> mult;   // sigma_s sigma_t(a) == sigma_{st}(a)
  std::vector<GoodnessEntry> free_;  // sigma_s(a) != sigma_t(a), distinct s,t
  double mult_fraction(const GroupElement& s, const GroupElement& t) const;
  double free_fraction(const GroupElement& s, const GroupElement& t) const;
  double min_mult_fraction() const;
  double min_free_fraction() const;
};

GoodnessReport goodness(const SoficMap& sigma, const FiniteSubset& f);

}  // namespace sel
