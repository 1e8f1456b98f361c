#pragma once

#include <string>
#include <vector>

#include "sel/microstate.hpp"

namespace sel {

// Finite stand-in for the limit data: a list of maps, window radii and
// threshold lists. Headline columns certify bounds only relative to this
// truncation; the per-d table shows the trend.
struct Schedule {
  std::vector<SoficMap> sigmas;
  std::vector<int> f_radii;      // strictly increasing ball radii
  std::vector<double> deltas;    // strictly decreasing
  std::vector<double> epsilons;  // strictly decreasing, each > 2 * tail
  int radius = -1;               // evaluation radius; -1 means the system R_max
  Caps caps;
  std::uint64_t seed = 0;
  double tolerance = 0.05;  // nats, for <= 0 style verdicts

  int effective_radius(const ShiftSystem& sys) const;
  void validate(const ShiftSystem& sys) const;
};

Schedule default_schedule(const ShiftSystem& sys,
                          const std::vector<int>& d_list = {});
std::vector<CoverSpec> default_cover_family(const ShiftSystem& sys, int max_radius,
                                            std::uint64_t cap = 1u << 20);
CoverSpec default_conditioning_cover(const ShiftSystem& sys);

struct ReportCell {
  int d = 0;
  int f_radius = 0;
  double delta = 0.0;
  double eps = 0.0;  // 0 when not applicable
  int aux = -1;      // cover-family index or |L| stage, -1 when n/a
  Bracket value;
  CellMode mode = CellMode::Exact;
};

struct EntropyReport {
  std::string quantity;
  std::string system;
  std::string pipeline = "sofic";
  Bracket headline;
  std::string directionality;
  std::string mode = "exact";
  bool cylinder_restricted = false;
  std::vector<ReportCell> cells;
  std::string notes;
};

const char* cell_mode_name(CellMode m);

// sup_eps inf_{F,delta} max_sigma (1/d) log N_eps over the microstate sets.
EntropyReport h_topological(const ShiftSystem& sys, const Schedule& sched);

// inf_{F,delta} max_sigma (1/d) log N(cover^d, microstates).
EntropyReport h_cover(const ShiftSystem& sys, const CoverSpec& cover,
                      const Schedule& sched);

// Conditional version: worst cover count within one product cell of the
// conditioning cover.
EntropyReport h_cover_conditional(const ShiftSystem& sys, const CoverSpec& u1,
                                  const CoverSpec& u2, const Schedule& sched);

// sup over the cover family of the conditional count (cylinder-restricted).
EntropyReport h_space_conditional(const ShiftSystem& sys, const CoverSpec& u2,
                                  const std::vector<CoverSpec>& family,
                                  const Schedule& sched);

// inf over conditioning covers of h_space_conditional.
EntropyReport h_star(const ShiftSystem& sys, const std::vector<CoverSpec>& v_family,
                     const std::vector<CoverSpec>& cover_family,
                     const Schedule& sched);

// Measure version of the cover count, filtered by empirical tests.
EntropyReport h_measure_cover(const ShiftSystem& sys, const InvariantMeasure& mu,
                              const CoverSpec& cover,
                              const std::vector<std::vector<CylinderIndicator>>& l_family,
                              const Schedule& sched);

// Partition-counting entropy: inf_F inf_eps max_sigma (1/d) log |AP|, with
// the universal log k upper endpoint.
EntropyReport bowen_measure_entropy(const ShiftSystem& sys, const InvariantMeasure& mu,
                                    const CoverSpec& alpha, const Schedule& sched);

// Separated-count conditional at a fixed scale eps.
EntropyReport h_eps_conditional(const ShiftSystem& sys, double eps,
                                const CoverSpec& u, const Schedule& sched);

struct ClassifyReport {
  bool expansive = false;
  Bracket expansive_constant;
  bool h_expansive_evidence = false;
  bool asympt_h_expansive_evidence = false;
  double tolerance = 0.05;
  std::string evidence_cover;  // conditioning cover used for the evidence
  EntropyReport conditional;
  EntropyReport star;
};

ClassifyReport classify(const ShiftSystem& sys, const Schedule& sched);

// Default increasing lists of cylinder indicator tests for measure filters.
std::vector<std::vector<CylinderIndicator>> default_test_family(const ShiftSystem& sys,
                                                                int max_radius);

}  // namespace sel
