// Copyright 2026 The hllrt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// hllrt command line: attack, verify, detect, experiment, analyze.
//
// Exit codes: 0 success, 1 usage or input error, 2 target/connection error,
// 3 detection alarm.

#pragma once

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hllrt/analysis.hpp"
#include "hllrt/attack.hpp"
#include "hllrt/attack_io.hpp"
#include "hllrt/defense.hpp"
#include "hllrt/experiment.hpp"
#include "hllrt/oracle.hpp"
#include "hllrt/remote.hpp"

namespace hllrt::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kTarget = 2, kAlarm = 3 };

struct TargetOptions {
  std::string target = "inproc";
  std::uint32_t registers = 4096;
  int width = 6;
  bool no_pipeline = false;

  HllParams params() const {
    HllParams p;
    p.register_count = registers;
    p.register_width = static_cast<std::uint8_t>(width);
    p.validate();
    return p;
  }

  OracleFactory factory() const {
    if (target == "inproc") return inprocess_factory(params());
    RemoteOptions opts;
    opts.pipelined = !no_pipeline;
    return remote_factory(parse_endpoint(target), opts);
  }
};

inline void add_target_options(CLI::App* cmd, TargetOptions& t) {
  cmd->add_option("--target", t.target, "inproc or redis://host:port/key")
      ->envname("HLLRT_TARGET")
      ->capture_default_str();
  cmd->add_option("--registers", t.registers, "register count R of the in-process sketch")->capture_default_str();
  cmd->add_option("--width", t.width, "register width in bits (4-8)")->capture_default_str();
  cmd->add_flag("--no-pipeline", t.no_pipeline, "one round trip per command against a remote target");
}

inline nlohmann::json report_json(const PhaseReport& r) {
  nlohmann::json j{{"phase", r.phase},
                   {"set_size", r.set_size},
                   {"oracle_estimate", r.oracle_estimate},
                   {"insertions_performed", r.insertions_performed},
                   {"estimate_queries", r.estimate_queries},
                   {"wall_time_ms", r.wall_time_ms}};
  j["estimate"] = r.estimate ? nlohmann::json(*r.estimate) : nlohmann::json(nullptr);
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
}

struct AttackArgs {
  TargetOptions target;
  std::uint64_t cardinality = 0;
  std::uint64_t seed = 1;
  std::string out = "attack_set.txt";
  std::string report;
  std::string resume;
};

inline int cmd_attack(const AttackArgs& a, std::ostream& out, std::ostream& err) {
  const auto factory = a.target.factory();
  AttackResult result;
  try {
    if (!a.resume.empty()) {
      result = resume_attack(load_attack_set(a.resume), factory);
    } else {
      if (a.cardinality < 1) {
        err << "attack: --cardinality must be at least 1\n";
        return kUsage;
      }
      result = generate_attack_set(a.cardinality, factory, a.seed);
    }
    auto oracle = factory();
    oracle->reset();
    const auto verified = verify(*oracle, result.v);
    result.v.achieved_estimate = verified;
    result.reports[2].estimate = verified;
  } catch (const AttackAborted& e) {
    err << e.what() << '\n';
    if (e.checkpoint()) {
      const auto path = a.out + ".checkpoint";
      save_attack_set(path, *e.checkpoint());
      err << "checkpoint (phase " << e.checkpoint()->phase << ") written to " << path
          << "; rerun with --resume " << path << '\n';
    }
    return kTarget;
  }

  save_attack_set(a.out, result.v);
  nlohmann::json j;
  j["target"] = a.target.target;
  if (a.target.target == "inproc") j["registers"] = a.target.registers;
  j["target_cardinality"] = result.v.target_cardinality;
  j["seed"] = result.v.source_seed;
  j["phases"] = nlohmann::json::array();
  for (const auto& r : result.reports) j["phases"].push_back(report_json(r));
  j["verify_estimate"] = result.v.achieved_estimate;
  j["set_size"] = result.v.size();
  j["inflation_factor"] = result.v.size() == 0 ? 0.0
                                               : static_cast<double>(result.v.achieved_estimate) /
                                                     static_cast<double>(result.v.size());
  j["total_insertions"] = result.total_insertions();
  j["set_file"] = a.out;
  const auto text = j.dump(2) + "\n";
  if (a.report.empty()) {
    out << text;
  } else {
    write_text_file(a.report, text);
  }
  return kOk;
}

struct VerifyArgs {
  TargetOptions target;
  std::string set_file;
  std::string format = "text";
};

inline int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream&) {
  const auto set = load_attack_set(a.set_file);
  auto oracle = a.target.factory()();
  oracle->reset();
  const auto est = verify(*oracle, set);
  const double factor = set.size() == 0 ? 0.0 : static_cast<double>(est) / static_cast<double>(set.size());
  if (a.format == "json") {
    out << nlohmann::json{{"estimate", est}, {"set_size", set.size()}, {"inflation_factor", factor}}.dump(2)
        << '\n';
  } else {
    out << "estimate " << est << '\n' << "set_size " << set.size() << '\n' << "inflation_factor " << factor << '\n';
  }
  return kOk;
}

struct DetectArgs {
  TargetOptions target;
  std::string input;
  std::string mode;
  std::optional<std::uint64_t> shadow_salt;
  std::optional<double> theta;
  std::size_t window = 0;
  double fraction_threshold = 0.5;
  double increment_threshold = 4.0;
};

inline int cmd_detect(const DetectArgs& a, std::ostream& out, std::ostream&) {
  const auto input = load_attack_set(a.input);
  const auto params = a.target.params();
  DetectionReport report;
  if (a.mode == "sns") {
    auto guard = a.shadow_salt ? SnsGuard(params, *a.shadow_salt, a.theta) : SnsGuard::with_random_salt(params, a.theta);
    for (const auto& e : input.elements) guard.insert(e);
    report = guard.check();
  } else {
    StatsMonitor monitor({a.window, a.fraction_threshold, a.increment_threshold});
    HllSketch sketch(params);
    report.detector = Detector::kStats;
    for (const auto& e : input.elements) report = monitor.insert(sketch, e);
  }
  out << to_json(report).dump(2) << '\n';
  return report.alarm ? kAlarm : kOk;
}

struct ExperimentArgs {
  TargetOptions target;
  std::vector<std::uint64_t> cardinalities;
  std::vector<std::uint64_t> seeds{1};
  std::string out;
  std::string plot_data;
  std::string format = "csv";
  unsigned threads = 0;
};

inline void write_records(std::ostream& o, const std::vector<ExperimentRecord>& records, const std::string& format) {
  if (format == "json") {
    auto arr = nlohmann::json::array();
    for (const auto& r : records) {
      arr.push_back({{"R", r.registers},
                     {"C", r.cardinality},
                     {"seed", r.seed},
                     {"phase", r.phase},
                     {"set_size", r.set_size},
                     {"estimate", r.estimate},
                     {"insertions", r.insertions},
                     {"wall_time_ms", r.wall_time_ms}});
    }
    o << arr.dump(2) << '\n';
    return;
  }
  o << kExperimentCsvHeader << '\n';
  for (const auto& r : records) write_csv_row(o, r);
}

inline int cmd_experiment(const ExperimentArgs& a, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  cfg.registers = a.target.registers;
  cfg.width = static_cast<std::uint8_t>(a.target.width);
  cfg.cardinalities = a.cardinalities;
  cfg.seeds = a.seeds;
  cfg.target = a.target.target;
  cfg.threads = a.threads;

  std::vector<ExperimentRecord> records;
  int code = kOk;
  try {
    records = run_experiment(cfg);
  } catch (const ExperimentAborted& e) {
    err << "experiment aborted: " << e.what() << " (" << e.partial().size() << " rows kept)\n";
    records = e.partial();
    code = e.target_failure() ? kTarget : kUsage;
  }

  std::ostream& table_out = a.out.empty() ? err : out;
  if (a.out.empty()) {
    write_records(out, records, a.format);
  } else {
    std::ofstream f(a.out, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + a.out + " for writing");
    write_records(f, records, a.format);
  }
  const auto rows = aggregate(records);
  print_aggregate_tables(table_out, rows);
  if (!a.plot_data.empty()) {
    std::ofstream f(a.plot_data, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + a.plot_data + " for writing");
    write_plot_data(f, rows);
  }
  return code;
}

struct AnalyzeArgs {
  std::string name;
  std::uint64_t registers = 4096;
  std::optional<std::uint64_t> n;
  std::optional<std::uint64_t> estimate;
  std::optional<int> c_old;
  std::optional<int> c_new;
  std::optional<double> delta;
  std::optional<double> z;
  std::optional<double> alpha;
  std::optional<std::uint64_t> cardinality;
  std::optional<double> z_full;
};

inline const std::vector<std::string>& analyze_formulas() {
  static const std::vector<std::string> names{"missed", "zdelta", "increment", "threshold", "misscond", "ratio"};
  return names;
}

inline int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  auto need = [&](const auto& opt, const char* flag) {
    if (!opt) throw CLI::ValidationError(std::string("analyze ") + a.name + " requires " + flag);
    return *opt;
  };
  const double alpha = a.alpha.value_or(alpha_for(static_cast<std::uint32_t>(a.registers)));
  nlohmann::json j{{"formula", a.name}};

  if (a.name == "missed") {
    const auto n = need(a.n, "--n");
    j.update({{"R", a.registers}, {"N", n}, {"value", analysis::expected_missed_lpca(a.registers, n)}});
  } else if (a.name == "zdelta") {
    const auto lo = need(a.c_old, "--old");
    const auto hi = need(a.c_new, "--new");
    j.update({{"c_old", lo}, {"c_new", hi}, {"value", analysis::z_delta(lo, hi)}});
  } else if (a.name == "increment") {
    const auto c_est = need(a.estimate, "--estimate");
    const double delta = a.delta ? *a.delta : analysis::z_delta(need(a.c_old, "--old"), need(a.c_new, "--new"));
    const double z = a.z.value_or(analysis::typical_z(a.registers, c_est));
    const auto inc = analysis::estimate_increment(delta, c_est, a.registers, alpha, z);
    j.update({{"R", a.registers}, {"C_est", c_est}, {"alpha", alpha}, {"delta", delta}, {"Z", z},
              {"exact", inc.exact}, {"approx", inc.approx}, {"value", inc.exact}});
  } else if (a.name == "threshold") {
    const auto c_est = need(a.estimate, "--estimate");
    j.update({{"R", a.registers}, {"C_est", c_est}, {"alpha", alpha},
              {"value", analysis::undetectable_delta_threshold(a.registers, c_est, alpha)}});
  } else if (a.name == "misscond") {
    const auto c_est = need(a.estimate, "--estimate");
    j.update({{"R", a.registers}, {"C_est", c_est}, {"alpha", alpha},
              {"value", analysis::miss_condition_register_value(a.registers, c_est, alpha)},
              {"expected_register_value", analysis::expected_register_value(a.registers, c_est)}});
  } else if (a.name == "ratio") {
    const auto c = need(a.cardinality, "--cardinality");
    const double z_full = a.z_full.value_or(analysis::typical_z(a.registers, c));
    j.update({{"R", a.registers}, {"C", c}, {"Z_full", z_full},
              {"value", analysis::predicted_phase1_ratio(a.registers, c, z_full)}});
  } else {
    err << "unknown formula '" << a.name << "'; available:";
    for (const auto& n : analyze_formulas()) err << ' ' << n;
    err << '\n';
    return kUsage;
  }
  out << j.dump(2) << '\n';
  return kOk;
}

// Parses `args` (args[0] is the program name) and runs the chosen command.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"HyperLogLog estimate-inflation attack and detection toolkit", "hllrt"};
  app.require_subcommand(1);

  AttackArgs attack;
  auto* c_attack = app.add_subcommand("attack", "build an attack set for a target cardinality");
  add_target_options(c_attack, attack.target);
  c_attack->add_option("--cardinality", attack.cardinality, "target cardinality C");
  c_attack->add_option("--seed", attack.seed, "seed of the source stream")->capture_default_str();
  c_attack->add_option("--out", attack.out, "attack set output file")->capture_default_str();
  c_attack->add_option("--report", attack.report, "write the JSON phase report here instead of stdout");
  c_attack->add_option("--resume", attack.resume, "continue from a phase checkpoint file");

  VerifyArgs verify_args;
  auto* c_verify = app.add_subcommand("verify", "insert an attack set into a fresh sketch and report the estimate");
  add_target_options(c_verify, verify_args.target);
  c_verify->add_option("set_file", verify_args.set_file, "attack set file")->required();
  c_verify->add_option("--format", verify_args.format)->check(CLI::IsMember({"text", "json"}))->capture_default_str();

  DetectArgs detect;
  std::uint64_t shadow_salt = 0;
  double theta = 0.0;
  auto* c_detect = app.add_subcommand("detect", "replay a stream or attack set through a detector");
  add_target_options(c_detect, detect.target);
  c_detect->add_option("input", detect.input, "stream or attack set file")->required();
  c_detect->add_option("--mode", detect.mode)->required()->check(CLI::IsMember({"sns", "stats"}));
  auto* o_salt = c_detect->add_option("--shadow-salt", shadow_salt, "fixed shadow salt (default: random)");
  auto* o_theta = c_detect->add_option("--theta", theta, "SNS divergence threshold (default 5*1.04/sqrt(R))");
  c_detect->add_option("--window", detect.window, "stats window (default 4R)");
  c_detect->add_option("--fraction-threshold", detect.fraction_threshold)->capture_default_str();
  c_detect->add_option("--increment-threshold", detect.increment_threshold)->capture_default_str();

  ExperimentArgs exp;
  auto* c_exp = app.add_subcommand("experiment", "run the attack over a grid of cardinalities and seeds");
  add_target_options(c_exp, exp.target);
  c_exp->add_option("--cardinalities,--cardinality", exp.cardinalities)->required()->delimiter(',');
  c_exp->add_option("--seeds,--seed", exp.seeds)->delimiter(',')->capture_default_str();
  c_exp->add_option("--out", exp.out, "CSV/JSON output (default stdout)");
  c_exp->add_option("--plot-data", exp.plot_data, "write (C, phase, mean size, mean estimate) rows here");
  c_exp->add_option("--format", exp.format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  c_exp->add_option("--threads", exp.threads, "worker threads for in-process runs (0 = all cores)");

  AnalyzeArgs an;
  std::uint64_t n = 0, estimate = 0, cardinality = 0;
  int c_old = 0, c_new = 0;
  double delta = 0, z = 0, alpha = 0, z_full = 0;
  auto* c_an = app.add_subcommand("analyze", "evaluate a closed-form prediction");
  c_an->add_option("name", an.name, "missed | zdelta | increment | threshold | misscond | ratio")->required();
  c_an->add_option("--registers", an.registers)->capture_default_str();
  auto* o_n = c_an->add_option("--n", n, "distinct items N");
  auto* o_est = c_an->add_option("--estimate", estimate, "current estimate C_est");
  auto* o_old = c_an->add_option("--old", c_old, "register value before");
  auto* o_new = c_an->add_option("--new", c_new, "register value after");
  auto* o_delta = c_an->add_option("--delta", delta);
  auto* o_z = c_an->add_option("--z", z, "current Z");
  auto* o_alpha = c_an->add_option("--alpha", alpha, "override alpha_R");
  auto* o_card = c_an->add_option("--cardinality", cardinality, "stream cardinality C");
  auto* o_zfull = c_an->add_option("--zfull", z_full, "Z of the full-stream sketch");

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << "run with --help for usage\n";
    return kUsage;
  }

  try {
    if (c_attack->parsed()) return cmd_attack(attack, out, err);
    if (c_verify->parsed()) return cmd_verify(verify_args, out, err);
    if (c_detect->parsed()) {
      if (o_salt->count() > 0) detect.shadow_salt = shadow_salt;
      if (o_theta->count() > 0) detect.theta = theta;
      return cmd_detect(detect, out, err);
    }
    if (c_exp->parsed()) return cmd_experiment(exp, out, err);
    if (c_an->parsed()) {
      if (o_n->count() > 0) an.n = n;
      if (o_est->count() > 0) an.estimate = estimate;
      if (o_old->count() > 0) an.c_old = c_old;
      if (o_new->count() > 0) an.c_new = c_new;
      if (o_delta->count() > 0) an.delta = delta;
      if (o_z->count() > 0) an.z = z;
      if (o_alpha->count() > 0) an.alpha = alpha;
      if (o_card->count() > 0) an.cardinality = cardinality;
      if (o_zfull->count() > 0) an.z_full = z_full;
      return cmd_analyze(an, out, err);
    }
  } catch (const OracleError& e) {
    err << "target error: " << e.what() << '\n';
    return kTarget;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace hllrt::cli
