#pragma once

#include <string>
#include <vector>

#include "sel/estimators.hpp"

namespace sel {

// Join of a cover over a finite window: members indexed by functions
// F -> members, realised as cylinder unions on the joined window.
CoverSpec join_cover(const ShiftSystem& sys, const CoverSpec& base,
                     const FiniteSubset& f, const Caps& caps = Caps{});

struct MValue {
  double log_n = 0.0;          // max over conditioning cells of log N
  std::uint64_t count = 0;     // the max cover count itself (exact mode)
  std::uint64_t count_lo = 0;  // bounds when the count is not exact
  std::uint64_t count_hi = 0;
  bool exact = true;
};

// m(F) = max over cells K of the joined conditioning cover of the minimal
// number of joined base-cover members needed to cover K, on the allowed
// patterns of the joined window.
MValue m_value(const ShiftSystem& sys, const CoverSpec& w1, const CoverSpec& w2,
               const FiniteSubset& f, const Caps& caps = Caps{});

struct SubadditiveTrace {
  std::vector<int> indices;
  std::vector<std::uint64_t> folner_sizes;
  std::vector<double> m_values;    // log N values
  std::vector<double> normalized;  // m / |F_n|

  bool eventually_nonincreasing(double tol) const;
};

struct AmenableReport {
  std::string quantity;
  std::string system;
  std::string pipeline = "amenable";
  double value = 0.0;  // last-term estimate
  Bracket headline;    // [0, best certified upper bound for the limit]
  std::string directionality = "certified-upper";
  bool cylinder_restricted = false;
  std::string mode = "exact";
  SubadditiveTrace trace;
  std::vector<ReportCell> cells;
  std::string notes;
};

AmenableReport h_a_conditional(const ShiftSystem& sys, const CoverSpec& w1,
                               const CoverSpec& w2,
                               const std::vector<int>& folner_indices,
                               const Caps& caps = Caps{});

AmenableReport h_a_topological(const ShiftSystem& sys,
                               const std::vector<CoverSpec>& cover_family,
                               const std::vector<int>& folner_indices,
                               const Caps& caps = Caps{});

AmenableReport h_a_tail(const ShiftSystem& sys,
                        const std::vector<CoverSpec>& v_family,
                        const std::vector<CoverSpec>& cover_family,
                        const std::vector<int>& folner_indices,
                        const Caps& caps = Caps{});

std::vector<int> default_folner_indices(const ShiftSystem& sys);

struct CrossCheckReport {
  EntropyReport sofic;
  AmenableReport amenable;
  double midpoint_diff = 0.0;
  bool overlap = false;
  double tol = 0.1;
};

CrossCheckReport cross_check_sofic_amenable(const ShiftSystem& sys,
                                            const Schedule& sched,
                                            const std::vector<int>& folner_indices,
                                            double tol = 0.1);

}  // namespace sel
