#include "sel/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sel/errors.hpp"

namespace sel {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  out.push_back('"');
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
  return out;
}

std::string cells_json(const std::vector<ReportCell>& cells) {
  std::string out = "[";
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ",";
    first = false;
    out += "{\"d\":" + std::to_string(c.d);
    out += ",\"F_radius\":" + std::to_string(c.f_radius);
    out += ",\"delta\":" + format_double(c.delta);
    out += ",\"eps\":" + format_double(c.eps);
    out += ",\"aux\":" + std::to_string(c.aux);
    out += ",\"lo\":" + json_ext(c.value.lo);
    out += ",\"hi\":" + json_ext(c.value.hi);
    out += std::string(",\"mode\":") + escape(cell_mode_name(c.mode));
    out += "}";
  }
  out += "]";
  return out;
}

std::string cells_csv(const std::vector<ReportCell>& cells) {
  std::string out = "d,F_radius,delta,eps,aux,lo,hi,mode\n";
  for (const auto& c : cells) {
    out += std::to_string(c.d) + "," + std::to_string(c.f_radius) + ",";
    out += format_double(c.delta) + "," + format_double(c.eps) + ",";
    out += std::to_string(c.aux) + ",";
    out += (c.value.lo.is_finite() ? format_double(c.value.lo.value())
            : c.value.lo.is_neg_inf() ? std::string("-inf")
                                      : std::string("inf")) +
           ",";
    out += (c.value.hi.is_finite() ? format_double(c.value.hi.value())
            : c.value.hi.is_neg_inf() ? std::string("-inf")
                                      : std::string("inf")) +
           ",";
    out += cell_mode_name(c.mode);
    out += "\n";
  }
  return out;
}

std::string headline_json(const Bracket& b) {
  return "{\"lo\":" + json_ext(b.lo) + ",\"hi\":" + json_ext(b.hi) + "}";
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string json_ext(const ExtReal& v) {
  if (v.is_neg_inf()) return "\"-inf\"";
  if (v.is_pos_inf()) return "\"inf\"";
  return format_double(v.value());
}

std::string report_json(const EntropyReport& rep) {
  std::string out = "{";
  out += "\"quantity\":" + escape(rep.quantity);
  out += ",\"system\":" + escape(rep.system);
  out += ",\"pipeline\":" + escape(rep.pipeline);
  out += ",\"headline\":" + headline_json(rep.headline);
  out += ",\"directionality\":" + escape(rep.directionality);
  out += ",\"mode\":" + escape(rep.mode);
  out += std::string(",\"cylinder_restricted\":") +
         (rep.cylinder_restricted ? "true" : "false");
  out += ",\"notes\":" + escape(rep.notes);
  out += ",\"cells\":" + cells_json(rep.cells);
  out += "}";
  return out;
}

std::string report_csv(const EntropyReport& rep) { return cells_csv(rep.cells); }

std::string amenable_json(const AmenableReport& rep) {
  std::string out = "{";
  out += "\"quantity\":" + escape(rep.quantity);
  out += ",\"system\":" + escape(rep.system);
  out += ",\"pipeline\":" + escape(rep.pipeline);
  out += ",\"value\":" + format_double(rep.value);
  out += ",\"headline\":" + headline_json(rep.headline);
  out += ",\"directionality\":" + escape(rep.directionality);
  out += ",\"mode\":" + escape(rep.mode);
  out += std::string(",\"cylinder_restricted\":") +
         (rep.cylinder_restricted ? "true" : "false");
  out += ",\"notes\":" + escape(rep.notes);
  out += ",\"trace\":{\"indices\":[";
  for (std::size_t i = 0; i < rep.trace.indices.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(rep.trace.indices[i]);
  }
  out += "],\"normalized\":[";
  for (std::size_t i = 0; i < rep.trace.normalized.size(); ++i) {
    if (i) out += ",";
    out += format_double(rep.trace.normalized[i]);
  }
  out += "]}";
  out += ",\"cells\":" + cells_json(rep.cells);
  out += "}";
  return out;
}

std::string amenable_csv(const AmenableReport& rep) { return cells_csv(rep.cells); }

std::string classify_json(const ClassifyReport& rep, const std::string& system) {
  std::string out = "{";
  out += "\"system\":" + escape(system);
  out += std::string(",\"expansive\":") + (rep.expansive ? "true" : "false");
  out += ",\"expansive_constant\":" + headline_json(rep.expansive_constant);
  out += std::string(",\"h_expansive_evidence\":") +
         (rep.h_expansive_evidence ? "true" : "false");
  out += std::string(",\"asympt_h_expansive_evidence\":") +
         (rep.asympt_h_expansive_evidence ? "true" : "false");
  out += ",\"tolerance\":" + format_double(rep.tolerance);
  out += ",\"evidence_cover\":" + escape(rep.evidence_cover);
  out += ",\"conditional\":" + report_json(rep.conditional);
  out += ",\"star\":" + report_json(rep.star);
  out += "}";
  return out;
}

std::string crosscheck_json(const CrossCheckReport& rep, const std::string& system) {
  std::string out = "{";
  out += "\"system\":" + escape(system);
  out += ",\"pipeline\":\"compare\"";
  out += ",\"midpoint_diff\":" + format_double(rep.midpoint_diff);
  out += std::string(",\"overlap\":") + (rep.overlap ? "true" : "false");
  out += ",\"tol\":" + format_double(rep.tol);
  out += ",\"sofic\":" + report_json(rep.sofic);
  out += ",\"amenable\":" + amenable_json(rep.amenable);
  out += "}";
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << content;
}

// ---------------------------------------------------------------------------
// config

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad config JSON: ") + e.what());
  }
  ExperimentConfig c;
  c.system = j.value("system", c.system);
  c.quantity = j.value("quantity", c.quantity);
  if (j.contains("d")) c.d_list = j["d"].get<std::vector<int>>();
  if (j.contains("f_radii")) c.f_radii = j["f_radii"].get<std::vector<int>>();
  if (j.contains("deltas")) c.deltas = j["deltas"].get<std::vector<double>>();
  if (j.contains("eps")) c.epsilons = j["eps"].get<std::vector<double>>();
  c.radius = j.value("R", c.radius);
  if (j.contains("folner")) c.folner = j["folner"].get<std::vector<int>>();
  if (j.contains("caps")) {
    const auto& k = j["caps"];
    c.caps.scan_nodes = k.value("scan_nodes", c.caps.scan_nodes);
    c.caps.exact_vertices = k.value("exact_vertices", c.caps.exact_vertices);
    c.caps.bnb_nodes = k.value("bnb_nodes", c.caps.bnb_nodes);
    c.caps.mc_samples = k.value("mc_samples", c.caps.mc_samples);
    c.caps.pattern_cap = k.value("pattern_cap", c.caps.pattern_cap);
  }
  c.seed = j.value("seed", c.seed);
  c.tolerance = j.value("tolerance", c.tolerance);
  c.cover = j.value("cover", c.cover);
  c.cover2 = j.value("cover2", c.cover2);
  c.measure = j.value("measure", c.measure);
  c.l_radius = j.value("l_radius", c.l_radius);
  c.eps_fixed = j.value("eps_fixed", c.eps_fixed);
  c.out_dir = j.value("out", c.out_dir);
  return c;
}

std::string ExperimentConfig::to_json() const {
  std::string out = "{";
  out += "\"system\":" + escape(system);
  out += ",\"quantity\":" + escape(quantity);
  auto int_list = [](const std::vector<int>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(v[i]);
    }
    return s + "]";
  };
  auto dbl_list = [](const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += format_double(v[i]);
    }
    return s + "]";
  };
  out += ",\"d\":" + int_list(d_list);
  out += ",\"f_radii\":" + int_list(f_radii);
  out += ",\"deltas\":" + dbl_list(deltas);
  out += ",\"eps\":" + dbl_list(epsilons);
  out += ",\"R\":" + std::to_string(radius);
  out += ",\"folner\":" + int_list(folner);
  out += ",\"caps\":{\"scan_nodes\":" + std::to_string(caps.scan_nodes);
  out += ",\"exact_vertices\":" + std::to_string(caps.exact_vertices);
  out += ",\"bnb_nodes\":" + std::to_string(caps.bnb_nodes);
  out += ",\"mc_samples\":" + std::to_string(caps.mc_samples);
  out += ",\"pattern_cap\":" + std::to_string(caps.pattern_cap) + "}";
  out += ",\"seed\":" + std::to_string(seed);
  out += ",\"tolerance\":" + format_double(tolerance);
  out += ",\"cover\":" + escape(cover);
  out += ",\"cover2\":" + escape(cover2);
  out += ",\"measure\":" + escape(measure);
  out += ",\"l_radius\":" + std::to_string(l_radius);
  out += ",\"eps_fixed\":" + format_double(eps_fixed);
  out += ",\"out\":" + escape(out_dir);
  out += "}";
  return out;
}

ShiftSystem load_system(const std::string& ref) {
  if (!ref.empty() && ref[0] == '@') {
    std::ifstream f(ref.substr(1));
    if (!f) throw ConfigError("cannot read system file " + ref.substr(1));
    std::ostringstream os;
    os << f.rdbuf();
    return ShiftSystem::from_json(os.str());
  }
  return ShiftSystem::builtin(ref);
}

CoverSpec parse_cover(const ShiftSystem& sys, const std::string& spec) {
  if (spec == "whole" || spec == "{X}") return CoverSpec::whole_space();
  if (spec == "standard") return sys.standard_partition();
  if (spec.rfind("window:", 0) == 0) {
    return sys.window_partition(std::atoi(spec.c_str() + 7));
  }
  if (spec.rfind("residue:", 0) == 0) {
    return sys.residue_partition(std::atoi(spec.c_str() + 8));
  }
  throw ConfigError("unknown cover spec: " + spec);
}

InvariantMeasure parse_measure(const ShiftSystem& sys, const std::string& spec) {
  if (spec == "uniform") {
    std::vector<double> p(sys.alphabet_size(),
                          1.0 / static_cast<double>(sys.alphabet_size()));
    return InvariantMeasure::bernoulli(p);
  }
  auto parse_numbers = [](const std::string& body) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < body.size()) {
      std::size_t next = body.find(',', pos);
      if (next == std::string::npos) next = body.size();
      out.push_back(std::atof(body.substr(pos, next - pos).c_str()));
      pos = next + 1;
    }
    return out;
  };
  if (spec.rfind("bernoulli:", 0) == 0) {
    return InvariantMeasure::bernoulli(parse_numbers(spec.substr(10)));
  }
  if (spec.rfind("markov:", 0) == 0) {
    std::string body = spec.substr(7);
    std::vector<std::vector<double>> rows;
    std::size_t pos = 0;
    while (pos < body.size()) {
      std::size_t next = body.find(';', pos);
      if (next == std::string::npos) next = body.size();
      rows.push_back(parse_numbers(body.substr(pos, next - pos)));
      pos = next + 1;
    }
    return InvariantMeasure::markov(rows);
  }
  throw ConfigError("unknown measure spec: " + spec);
}

Schedule schedule_from_config(const ShiftSystem& sys, const ExperimentConfig& cfg) {
  Schedule s = default_schedule(sys, cfg.d_list);
  if (!cfg.f_radii.empty()) s.f_radii = cfg.f_radii;
  if (!cfg.deltas.empty()) s.deltas = cfg.deltas;
  if (!cfg.epsilons.empty()) s.epsilons = cfg.epsilons;
  s.radius = cfg.radius;
  s.caps = cfg.caps;
  s.seed = cfg.seed;
  s.tolerance = cfg.tolerance;
  return s;
}

}  // namespace sel
