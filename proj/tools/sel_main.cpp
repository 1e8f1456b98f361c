// sel: desk-scale entropy estimators for symbolic group actions.
//
// Subcommands: estimate | classify | compare | acceptance | dump-microstates.
// Reports are deterministic for a fixed seed; SEL_THREADS caps parallelism.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sel/acceptance.hpp"
#include "sel/amenable.hpp"
#include "sel/errors.hpp"
#include "sel/estimators.hpp"
#include "sel/microstate.hpp"
#include "sel/report_io.hpp"

namespace {

using namespace sel;

struct CommonOpts {
  std::string config_path;
  ExperimentConfig cfg;
};

void add_schedule_options(CLI::App* cmd, ExperimentConfig& cfg) {
  cmd->add_option("--system", cfg.system, "builtin name or @file.json");
  cmd->add_option("--d", cfg.d_list, "map degrees (comma separated)")
      ->delimiter(',');
  cmd->add_option("--f-radii", cfg.f_radii, "window ball radii")->delimiter(',');
  cmd->add_option("--deltas", cfg.deltas, "membership thresholds")->delimiter(',');
  cmd->add_option("--eps", cfg.epsilons, "separation scales")->delimiter(',');
  cmd->add_option("--R", cfg.radius, "metric evaluation radius");
  cmd->add_option("--folner", cfg.folner, "Folner box indices")->delimiter(',');
  cmd->add_option("--seed", cfg.seed, "random seed");
  cmd->add_option("--tolerance", cfg.tolerance, "verdict tolerance in nats");
  cmd->add_option("--cover", cfg.cover,
                  "cover spec: standard | window:R | residue:L | whole");
  cmd->add_option("--cover2", cfg.cover2, "conditioning cover spec");
  cmd->add_option("--measure", cfg.measure,
                  "uniform | bernoulli:p0,p1,... | markov:row;row;...");
  cmd->add_option("--l-radius", cfg.l_radius, "test-function window radius");
  cmd->add_option("--eps-fixed", cfg.eps_fixed, "fixed separation scale");
  cmd->add_option("--scan-cap", cfg.caps.scan_nodes, "labeling scan node cap");
  cmd->add_option("--mc-samples", cfg.caps.mc_samples, "sample count");
  cmd->add_option("--out", cfg.out_dir, "output directory");
}

ExperimentConfig load_config(const CommonOpts& opts) {
  ExperimentConfig cfg = opts.cfg;
  if (!opts.config_path.empty()) {
    std::ifstream f(opts.config_path);
    if (!f) throw ConfigError("cannot read config " + opts.config_path);
    std::ostringstream os;
    os << f.rdbuf();
    ExperimentConfig file_cfg = ExperimentConfig::from_json(os.str());
    // command-line values were parsed into cfg already; the file provides the
    // base and explicit flags win
    ExperimentConfig merged = file_cfg;
    if (cfg.system != ExperimentConfig{}.system) merged.system = cfg.system;
    if (cfg.quantity != ExperimentConfig{}.quantity) merged.quantity = cfg.quantity;
    if (!cfg.d_list.empty()) merged.d_list = cfg.d_list;
    if (!cfg.f_radii.empty()) merged.f_radii = cfg.f_radii;
    if (!cfg.deltas.empty()) merged.deltas = cfg.deltas;
    if (!cfg.epsilons.empty()) merged.epsilons = cfg.epsilons;
    if (cfg.radius != -1) merged.radius = cfg.radius;
    if (!cfg.folner.empty()) merged.folner = cfg.folner;
    if (cfg.seed != 0) merged.seed = cfg.seed;
    return merged;
  }
  return cfg;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
}

int run_estimate(const CommonOpts& opts, bool dump) {
  ExperimentConfig cfg = load_config(opts);
  ShiftSystem sys = load_system(cfg.system);
  Schedule sched = schedule_from_config(sys, cfg);
  std::vector<int> folner_idx =
      cfg.folner.empty() ? default_folner_indices(sys) : cfg.folner;
  ensure_dir(cfg.out_dir);

  std::string json, csv;
  const std::string& q = cfg.quantity;
  if (q == "h_topological") {
    EntropyReport rep = h_topological(sys, sched);
    json = report_json(rep);
    csv = report_csv(rep);
  } else if (q == "h_cover") {
    EntropyReport rep = h_cover(sys, parse_cover(sys, cfg.cover), sched);
    json = report_json(rep);
    csv = report_csv(rep);
  } else if (q == "h_cover_conditional") {
    EntropyReport rep = h_cover_conditional(sys, parse_cover(sys, cfg.cover),
                                            parse_cover(sys, cfg.cover2), sched);
    json = report_json(rep);
    csv = report_csv(rep);
  } else if (q == "h_space_conditional") {
    EntropyReport rep = h_space_conditional(sys, parse_cover(sys, cfg.cover2),
                                            default_cover_family(sys, 2), sched);
    json = report_json(rep);
    csv = report_csv(rep);
  } else if (q == "h_star") {
    auto family = default_cover_family(sys, 2);
    EntropyReport rep = h_star(sys, family, family, sched);
    json = report_json(rep);
    csv = report_csv(rep);
  } else if (q == "h_measure_cover") {
    EntropyReport rep = h_measure_cover(
        sys, parse_measure(sys, cfg.measure), parse_cover(sys, cfg.cover),
        default_test_family(sys, cfg.l_radius), sched);
    json = report_json(rep);
    csv = report_csv(rep);
  } else if (q == "bowen_measure_entropy") {
    EntropyReport rep = bowen_measure_entropy(sys, parse_measure(sys, cfg.measure),
                                              parse_cover(sys, cfg.cover), sched);
    json = report_json(rep);
    csv = report_csv(rep);
  } else if (q == "h_eps_conditional") {
    double eps = cfg.eps_fixed > 0 ? cfg.eps_fixed : sched.epsilons.front();
    EntropyReport rep =
        h_eps_conditional(sys, eps, parse_cover(sys, cfg.cover2), sched);
    json = report_json(rep);
    csv = report_csv(rep);
  } else if (q == "h_a_conditional") {
    AmenableReport rep =
        h_a_conditional(sys, parse_cover(sys, cfg.cover),
                        parse_cover(sys, cfg.cover2), folner_idx, sched.caps);
    json = amenable_json(rep);
    csv = amenable_csv(rep);
  } else if (q == "h_a_topological") {
    AmenableReport rep = h_a_topological(sys, {parse_cover(sys, cfg.cover)},
                                         folner_idx, sched.caps);
    json = amenable_json(rep);
    csv = amenable_csv(rep);
  } else if (q == "h_a_tail") {
    auto family = default_cover_family(sys, 1);
    AmenableReport rep = h_a_tail(sys, family, family, folner_idx, sched.caps);
    json = amenable_json(rep);
    csv = amenable_csv(rep);
  } else {
    throw ConfigError("unknown quantity: " + q);
  }

  write_file(cfg.out_dir + "/report.json", json);
  write_file(cfg.out_dir + "/cells.csv", csv);
  write_file(cfg.out_dir + "/config.json", cfg.to_json());
  std::cout << json << "\n";

  if (dump) {
    // line-oriented dump of the surviving labelings of the first map
    MicrostateEngine engine(sys, sched.sigmas.front(),
                            ball(sys.group(), sched.f_radii.front()),
                            sched.effective_radius(sys));
    ScanResult scan = engine.enumerate(sched.deltas.front(), sched.caps);
    std::ostringstream os;
    os << engine.d() << "\n";
    bool wide = false;
    for (const auto& name : sys.alphabet()) wide = wide || name.size() > 1;
    for (const auto& e : scan.entries) {
      for (std::size_t i = 0; i < e.state.omega.size(); ++i) {
        if (wide && i) os << ",";
        os << sys.alphabet()[e.state.omega[i]];
      }
      os << "\n";
    }
    write_file(cfg.out_dir + "/microstates.txt", os.str());
  }
  return 0;
}

int run_classify(const CommonOpts& opts) {
  ExperimentConfig cfg = load_config(opts);
  ShiftSystem sys = load_system(cfg.system);
  Schedule sched = schedule_from_config(sys, cfg);
  ClassifyReport rep = classify(sys, sched);
  ensure_dir(cfg.out_dir);
  std::string json = classify_json(rep, sys.name());
  write_file(cfg.out_dir + "/classification.json", json);
  std::cout << "{\"expansive\": " << (rep.expansive ? "true" : "false")
            << ", \"h_expansive_evidence\": "
            << (rep.h_expansive_evidence ? "true" : "false")
            << ", \"asympt_h_expansive_evidence\": "
            << (rep.asympt_h_expansive_evidence ? "true" : "false") << "}\n";
  return 0;
}

int run_compare(const CommonOpts& opts) {
  ExperimentConfig cfg = load_config(opts);
  ShiftSystem sys = load_system(cfg.system);
  Schedule sched = schedule_from_config(sys, cfg);
  std::vector<int> folner_idx =
      cfg.folner.empty() ? default_folner_indices(sys) : cfg.folner;
  CrossCheckReport rep = cross_check_sofic_amenable(sys, sched, folner_idx, 0.1);
  ensure_dir(cfg.out_dir);
  std::string json = crosscheck_json(rep, sys.name());
  write_file(cfg.out_dir + "/compare.json", json);
  std::cout << "{\"midpoint_diff\": " << format_double(rep.midpoint_diff)
            << ", \"overlap\": " << (rep.overlap ? "true" : "false") << "}\n";
  return 0;
}

int run_acceptance_cmd(const std::string& only, std::uint64_t seed,
                       const std::string& out_dir) {
  AcceptanceOutcome outcome = run_acceptance(only, seed);
  ensure_dir(out_dir);
  std::printf("%-24s %-6s %8s  %s\n", "criterion", "status", "time", "detail");
  std::string summary = "[";
  for (std::size_t i = 0; i < outcome.results.size(); ++i) {
    const auto& r = outcome.results[i];
    std::printf("%-24s %-6s %7.2fs  %s\n", r.name.c_str(),
                r.pass ? "PASS" : "FAIL", r.seconds, r.detail.c_str());
    if (i) summary += ",";
    summary += "{\"name\":\"" + r.name + "\",\"pass\":" +
               (r.pass ? "true" : "false") + "}";
  }
  summary += "]";
  write_file(out_dir + "/acceptance.json", summary);
  for (const auto& [name, content] : outcome.artifacts) {
    write_file(out_dir + "/" + name, content);
  }
  return outcome.all_pass ? 0 : 1;
}

int run_dump(const CommonOpts& opts) { return run_estimate(opts, true); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sel: entropy estimators for symbolic group actions"};
  app.require_subcommand(1);

  CommonOpts est_opts, cls_opts, cmp_opts, dump_opts;
  std::string only, acc_out = ".";
  std::uint64_t acc_seed = 0;

  CLI::App* est = app.add_subcommand("estimate", "run one entropy estimator");
  est->add_option("--quantity", est_opts.cfg.quantity, "quantity to estimate");
  est->add_option("--config", est_opts.config_path, "config JSON file");
  add_schedule_options(est, est_opts.cfg);

  CLI::App* cls = app.add_subcommand("classify", "expansiveness classification");
  cls->add_option("--config", cls_opts.config_path, "config JSON file");
  add_schedule_options(cls, cls_opts.cfg);

  CLI::App* cmp = app.add_subcommand("compare", "sofic vs amenable cross-check");
  cmp->add_option("--config", cmp_opts.config_path, "config JSON file");
  add_schedule_options(cmp, cmp_opts.cfg);

  CLI::App* acc = app.add_subcommand("acceptance", "run the acceptance suite");
  acc->add_option("--only", only, "single criterion or property block");
  acc->add_option("--seed", acc_seed, "random seed");
  acc->add_option("--out", acc_out, "output directory");

  CLI::App* dmp =
      app.add_subcommand("dump-microstates", "write surviving labelings");
  dmp->add_option("--config", dump_opts.config_path, "config JSON file");
  add_schedule_options(dmp, dump_opts.cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (est->parsed()) return run_estimate(est_opts, false);
    if (cls->parsed()) return run_classify(cls_opts);
    if (cmp->parsed()) return run_compare(cmp_opts);
    if (acc->parsed()) return run_acceptance_cmd(only, acc_seed, acc_out);
    if (dmp->parsed()) return run_dump(dump_opts);
  } catch (const CapExceeded& e) {
    std::cerr << "cap exceeded: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
