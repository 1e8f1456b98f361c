#pragma once

#include <string>
#include <vector>

#include "sel/amenable.hpp"
#include "sel/estimators.hpp"

namespace sel {

// Deterministic serialisation: fixed key order, floats with 12 significant
// digits, unbounded endpoints as "-inf" / "inf". Identical inputs produce
// byte-identical output.
std::string format_double(double v);
std::string json_ext(const ExtReal& v);

std::string report_json(const EntropyReport& rep);
std::string report_csv(const EntropyReport& rep);
std::string amenable_json(const AmenableReport& rep);
std::string amenable_csv(const AmenableReport& rep);
std::string classify_json(const ClassifyReport& rep, const std::string& system);
std::string crosscheck_json(const CrossCheckReport& rep, const std::string& system);

void write_file(const std::string& path, const std::string& content);

// Experiment front-end configuration. Omitted fields fall back to the
// system's defaults; the normalised echo round-trips stably.
struct ExperimentConfig {
  std::string system = "full-shift-2";
  std::string quantity = "h_topological";
  std::vector<int> d_list;
  std::vector<int> f_radii;
  std::vector<double> deltas;
  std::vector<double> epsilons;
  int radius = -1;
  std::vector<int> folner;
  Caps caps;
  std::uint64_t seed = 0;
  double tolerance = 0.05;
  std::string cover = "standard";
  std::string cover2 = "whole";
  std::string measure = "uniform";
  int l_radius = 0;
  double eps_fixed = -1.0;
  std::string out_dir = ".";

  static ExperimentConfig from_json(const std::string& text);
  std::string to_json() const;
};

ShiftSystem load_system(const std::string& ref);  // builtin name or @path
CoverSpec parse_cover(const ShiftSystem& sys, const std::string& spec);
InvariantMeasure parse_measure(const ShiftSystem& sys, const std::string& spec);
Schedule schedule_from_config(const ShiftSystem& sys, const ExperimentConfig& cfg);

}  // namespace sel
