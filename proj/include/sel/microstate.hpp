#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "sel/ext_real.hpp"
#include "sel/group.hpp"
#include "sel/shift.hpp"
#include "sel/sofic.hpp"

namespace sel {

struct Caps {
  std::uint64_t scan_nodes = std::uint64_t{1} << 24;  // labeling-scan node budget
  std::uint32_t exact_vertices = 1u << 16;            // exact solver size gate
  std::uint64_t bnb_nodes = 4'000'000;                // branch-and-bound budget
  std::uint64_t mc_samples = 10'000;
  std::uint64_t pattern_cap = std::uint64_t{1} << 22;
};

enum class CellMode { Exact, Greedy, Sampled, Capped };

// Labeling of {0,...,d-1} by alphabet symbols; candidate tuple of pullback
// points.
struct Microstate {
  std::vector<std::uint8_t> omega;
  int d() const { return static_cast<int>(omega.size()); }
};

enum class Verdict { In, Out, Unknown };

struct MembershipVerdict {
  Verdict status = Verdict::Unknown;
  GroupElement witness;   // offending group element
  Bracket mean_square;    // interval for max_s sqrt((1/d) sum_i rho^2)
};

// Labeled partition of {0,...,d-1} into k blocks; empty blocks allowed.
struct PartitionOfIndices {
  std::vector<std::uint8_t> block;
  int k = 1;
};

struct CylinderIndicator {
  FiniteSubset window;
  std::vector<std::uint8_t> symbols;
};

// A labeling surviving the scan, with the endpoints of its membership
// statistic; verdicts at any delta below the scan threshold derive from
// these.
struct ScanEntry {
  Microstate state;
  double stat_lo = 0.0;  // certified lower endpoint of max_s sqrt(...)
  double stat_hi = 0.0;  // certified upper endpoint
};

struct ScanResult {
  std::vector<ScanEntry> entries;
  double delta_max = 0.0;
  std::uint64_t nodes = 0;

  Verdict verdict_at(const ScanEntry& e, double delta) const {
    if (e.stat_lo >= delta) return Verdict::Out;
    if (e.stat_hi < delta) return Verdict::In;
    return Verdict::Unknown;
  }
};

// Binds a system, a sofic map, a window F and an evaluation radius;
// precomputes the index tables every per-labeling evaluation needs.
// Not thread-safe: each worker builds its own engine.
class MicrostateEngine {
 public:
  MicrostateEngine(const ShiftSystem& sys, const SoficMap& sigma,
                   const FiniteSubset& f, int radius);

  const ShiftSystem& system() const { return *sys_; }
  const SoficMap& sigma_map() const { return *sigma_; }
  const FiniteSubset& window_f() const { return f_; }
  int d() const { return d_; }
  int radius() const { return radius_; }
  int pullback_radius() const { return pull_radius_; }

  MembershipVerdict membership(const Microstate& m, double delta) const;
  // All labelings not certified out at delta_max, via a pruned depth-first
  // scan; plain exhaustion is the worst case.
  ScanResult enumerate(double delta_max, const Caps& caps) const;

  bool empirical_check(const Microstate& m, const InvariantMeasure& mu,
                       const std::vector<CylinderIndicator>& tests,
                       double delta) const;

  Bracket rho_d(const Microstate& a, const Microstate& b) const;

  std::uint8_t pullback(const Microstate& m, int i, const GroupElement& g) const;
  std::vector<std::uint8_t> pullback_window(const Microstate& m, int i,
                                            const FiniteSubset& window) const;

  const Perm& perm_of(const GroupElement& g) const;

 private:
  const ShiftSystem* sys_;
  const SoficMap* sigma_;
  FiniteSubset f_;
  int radius_;
  int pull_radius_;
  int d_;
  double base_hi_;  // per-(s,i) distance hi for all-equal symbols

  // Metric comparison units (pullback index pairs that can differ).
  struct Unit {
    int s_idx;
    int i;
    double w;
    int a;
    int b;
  };
  std::vector<Unit> units_;
  std::vector<std::vector<int>> units_by_step_;
  // Forbidden-placement units, deduplicated across indices.
  struct FUnit {
    std::vector<int> idx;
    const std::set<std::vector<std::uint8_t>>* patterns;
  };
  std::vector<FUnit> funits_;
  std::vector<std::vector<int>> funits_by_step_;

  std::vector<GroupElement> ball_coords_;  // ball(radius), weight > 0
  std::vector<double> ball_weights_;
  std::vector<const Perm*> ball_perms_;

  mutable std::map<GroupElement, Perm> perm_cache_;
};

// Bracket on the maximal cardinality of an eps-separated subset of `points`.
// Lower endpoint: greedy maximal subset whose pairs are certified separated.
// Upper endpoint: exact maximum over the possibly-separated graph when it
// fits the caps, otherwise a pairwise-close covering bound.
struct CountBracket {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  CellMode mode = CellMode::Exact;
};

CountBracket n_separated(const MicrostateEngine& engine,
                         const std::vector<const Microstate*>& points, double eps,
                         const Caps& caps);

// Bracket on the minimal number of cover^d members needed to cover `points`.
// Exact for partitions (and for small general instances); greedy plus an
// LP-style lower bound beyond the caps.
CountBracket n_cover(const MicrostateEngine& engine, const CoverSpec& cover,
                     const std::vector<const Microstate*>& points,
                     const Caps& caps);

// Minimal number of product sets covering points given per-point
// per-coordinate member masks. Shared by the microstate and the pattern
// pipelines: a point set fits one product member exactly when the masks
// intersect at every coordinate.
CountBracket product_cover_count(const std::vector<std::vector<std::uint64_t>>& masks,
                                 std::size_t member_count, const Caps& caps);

// Per-point product-cell profile under a partition cover (member id per
// coordinate); used to group points by the conditioning cover.
std::vector<std::uint32_t> cover_profile(const MicrostateEngine& engine,
                                         const CoverSpec& cover,
                                         const Microstate& point);

// Reusable profile computer: builds the pattern-to-member index once.
class CoverProfiler {
 public:
  CoverProfiler(const MicrostateEngine& engine, const CoverSpec& cover);
  std::vector<std::uint32_t> profile(const Microstate& point) const;

 private:
  const MicrostateEngine* engine_;
  bool trivial_;
  std::vector<const Perm*> window_perms_;
  std::map<std::vector<std::uint8_t>, int> first_member_;
};

// Bracket on log |AP(sigma, alpha : F, eps)| for a labeled-partition count:
// exhaustive when k^d fits the scan cap, otherwise a seeded uniform sample
// with a Wilson 95% interval.
struct ApCount {
  Bracket log_count;
  CellMode mode = CellMode::Exact;
  std::uint64_t exact_count = 0;  // valid when mode == Exact
};

ApCount bowen_ap_count(const ShiftSystem& sys, const SoficMap& sigma,
                       const CoverSpec& alpha, const FiniteSubset& f, double eps,
                       const InvariantMeasure& mu, const Caps& caps,
                       std::uint64_t seed);

}  // namespace sel
