#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "sel/ext_real.hpp"
#include "sel/group.hpp"

namespace sel {

// Finite configuration: symbols on a finite window, with a flag recording
// whether extension to a full point of the system has been certified.
struct WindowPattern {
  FiniteSubset window;
  std::vector<std::uint8_t> symbols;  // aligned with window.elements()
  bool certified_extendable = false;

  std::uint8_t at(const GroupElement& g) const;
};

struct ForbiddenPattern {
  FiniteSubset shape;
  std::vector<std::uint8_t> symbols;
};

enum class CoverKind { Open, Closed, Partition };

// Cover of the system by cylinder unions over a common window. The trivial
// cover {X} is the flag, with no window at all.
struct CoverSpec {
  bool trivial = false;
  FiniteSubset window;
  // member -> list of window patterns (symbol vectors aligned with window)
  std::vector<std::vector<std::vector<std::uint8_t>>> members;
  CoverKind kind = CoverKind::Partition;
  std::string label;

  static CoverSpec whole_space();
  std::size_t member_count() const { return trivial ? 1 : members.size(); }
  // First member containing the given window symbols, -1 if none.
  int member_containing(const std::vector<std::uint8_t>& symbols) const;
  // Bitmask over members (member_count() <= 64 required for non-partitions).
  std::uint64_t members_containing(const std::vector<std::uint8_t>& symbols) const;
};

// Per-coordinate symbol distance, as an interval to absorb truncation error.
struct SymbolMetric {
  enum class Kind { Discrete, Level };
  Kind kind = Kind::Discrete;
  std::vector<std::uint64_t> moduli;  // Level metric: m_1 <= m_2 <= ...
  double equal_tail = 0.0;            // hi-slack when the symbols agree

  double lo(std::uint32_t a, std::uint32_t b) const;
  double hi(std::uint32_t a, std::uint32_t b) const;
};

// Nearest-neighbour recoding of a rank-1 system: states are allowed
// (block)-words, edges are allowed (block+1)-words restricted to the
// bi-extendable part.
struct TransferStructure {
  int block = 1;
  std::vector<std::vector<std::uint8_t>> states;
  std::vector<std::vector<std::int32_t>> out_edges;
  std::vector<char> biextendable;
  std::vector<char> left_extendable;
  std::vector<char> right_extendable;

  double log_spectral_radius() const;           // power iteration
  std::uint64_t count_words(int n) const;       // extendable words of length n
};

class ShiftSystem {
 public:
  static ShiftSystem full_shift(const GroupModel& group, int k, int r_max = 8);
  static ShiftSystem from_forbidden(const GroupModel& group,
                                    std::vector<std::string> alphabet,
                                    std::vector<ForbiddenPattern> forbidden,
                                    int r_max = 8);
  // Registered names: full-shift-<k>, golden-mean, odometer-2adic[:depth]
  static ShiftSystem builtin(const std::string& name);
  static ShiftSystem from_json(const std::string& text);

  const GroupModel& group() const { return group_; }
  int alphabet_size() const { return static_cast<int>(alphabet_.size()); }
  const std::vector<std::string>& alphabet() const { return alphabet_; }
  const std::vector<ForbiddenPattern>& forbidden() const { return forbidden_; }
  int r_max() const { return r_max_; }
  const std::string& name() const { return name_; }
  const SymbolMetric& symbol_metric() const { return sym_; }

  // Metric data. Weights are 2^{-|g|} normalised over the ball of radius
  // r_max; tail(R) is the stored mass beyond radius R.
  double weight(const GroupElement& g) const;
  double identity_weight() const;
  double sum_weights(int radius) const;
  double tail(int radius) const;
  // Max distance slack between patterns agreeing on ball(R): symbol tail on
  // the stored window plus the weight tail.
  double rho_tail(int radius) const;

  bool pattern_locally_allowed(const FiniteSubset& window,
                               const std::vector<std::uint8_t>& symbols) const;
  std::vector<WindowPattern> allowed_patterns(const FiniteSubset& window,
                                              std::uint64_t cap = 1u << 22) const;
  // Streaming form: the visitor receives symbols aligned with the sorted
  // window plus the extendability flag. Returns the number of patterns.
  std::uint64_t enumerate_allowed(
      const FiniteSubset& window, std::uint64_t cap,
      const std::function<void(const std::vector<std::uint8_t>&, bool)>& visit) const;

  double transfer_matrix_entropy() const;  // rank-1 only
  const TransferStructure& transfer() const;

  CoverSpec standard_partition() const;
  CoverSpec window_partition(int radius, std::uint64_t cap = 1u << 22) const;
  // Groups alphabet symbols by residue at the given chain level; odometer
  // views only.
  CoverSpec residue_partition(int level) const;

  bool is_odometer_view() const { return sym_.kind == SymbolMetric::Kind::Level; }
  int odometer_depth() const { return static_cast<int>(sym_.moduli.size()); }

  // Forbidden patterns grouped by shape for O(1) placement tests.
  struct ShapeGroup {
    FiniteSubset shape;
    std::set<std::vector<std::uint8_t>> patterns;
  };
  const std::vector<ShapeGroup>& shape_groups() const { return shape_groups_; }
  int max_forbidden_span() const { return max_forbidden_span_; }

 private:
  friend class OdometerSystem;

  GroupModel group_ = GroupModel::lattice(1);
  std::string name_;
  std::vector<std::string> alphabet_;
  std::vector<ForbiddenPattern> forbidden_;
  std::vector<ShapeGroup> shape_groups_;
  int max_forbidden_span_ = 1;  // hull width of the longest constraint
  int r_max_ = 8;
  SymbolMetric sym_;
  std::vector<std::pair<GroupElement, double>> weights_;
  std::vector<double> weight_prefix_;  // cumulative mass per radius 0..r_max
  mutable std::shared_ptr<const TransferStructure> transfer_;

  void finish_setup();
};

Bracket rho_interval(const ShiftSystem& sys, const WindowPattern& x,
                     const WindowPattern& y, int radius);

// Bernoulli or (rank-1) Markov measure with exact cylinder evaluation.
class InvariantMeasure {
 public:
  enum class Kind { Bernoulli, Markov };

  static InvariantMeasure bernoulli(std::vector<double> p);
  static InvariantMeasure markov(std::vector<std::vector<double>> transition);

  Kind kind() const { return kind_; }
  const std::vector<double>& stationary() const { return pi_; }

  double cylinder(const ShiftSystem& sys, const FiniteSubset& window,
                  const std::vector<std::uint8_t>& symbols) const;

 private:
  Kind kind_ = Kind::Bernoulli;
  std::vector<double> pi_;
  std::vector<std::vector<double>> p_;  // Markov transitions
};

// Probability of the event "for every listed constraint, the configuration
// restricted to the constraint coordinates lies in the given pattern set".
// Evaluated exactly by enumeration over the joint window (Markov: its hull).
struct PatternConstraint {
  std::vector<GroupElement> coords;
  const std::set<std::vector<std::uint8_t>>* allowed = nullptr;
};
double measure_of_constraints(const ShiftSystem& sys, const InvariantMeasure& mu,
                              const std::vector<PatternConstraint>& constraints,
                              std::uint64_t cap = 1u << 22);

// Truncated profinite boundary of a subgroup chain: points are compatible
// coset sequences down to the given depth, indexed by the deepest residue.
class OdometerSystem {
 public:
  OdometerSystem(SubgroupChain chain, int depth);

  const SubgroupChain& chain() const { return chain_; }
  int depth() const { return depth_; }
  std::uint64_t point_count() const;
  std::uint64_t residue(std::uint64_t x, int level) const;
  std::uint64_t act(std::int64_t g, std::uint64_t x) const;
  double rho(std::uint64_t x, std::uint64_t y) const;
  double truncation_error() const;

  ShiftSystem as_shift_system() const;

 private:
  SubgroupChain chain_;
  int depth_;
};

OdometerSystem odometer_system(const SubgroupChain& chain, int depth);

}  // namespace sel
