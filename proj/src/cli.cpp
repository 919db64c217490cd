#include "laps/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "laps/run.hpp"
#include "laps/trace_io.hpp"

namespace laps::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

struct RunConfig {
  std::string target;
  int dim = 100;
  double condition = 1e5;
  int chains = 1024;
  std::uint64_t seed = 0;
  int maxiter = 1000;
  std::string integrator;  // adjusted-phase override; empty = auto
  std::string equipartition = "diag";
  double alpha = 2.0;
  double C = 0.025;
  double acc_target = -1.0;  // < 0: scheme default
  std::string out = "laps_trace.csv";
  int workers = 0;
};

void apply_json_config(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open config file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw CLI::ValidationError("--config", std::string("invalid JSON: ") + e.what());
  }
  if (j.contains("target")) cfg.target = j["target"].get<std::string>();
  if (j.contains("dim")) cfg.dim = j["dim"].get<int>();
  if (j.contains("condition")) cfg.condition = j["condition"].get<double>();
  if (j.contains("chains")) cfg.chains = j["chains"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("maxiter")) cfg.maxiter = j["maxiter"].get<int>();
  if (j.contains("integrator")) cfg.integrator = j["integrator"].get<std::string>();
  if (j.contains("equipartition")) cfg.equipartition = j["equipartition"].get<std::string>();
  if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
  if (j.contains("C")) cfg.C = j["C"].get<double>();
  if (j.contains("acc-target")) cfg.acc_target = j["acc-target"].get<double>();
  if (j.contains("out")) cfg.out = j["out"].get<std::string>();
  if (j.contains("workers")) cfg.workers = j["workers"].get<int>();
}

RunOptions to_run_options(const RunConfig& cfg) {
  RunOptions opt;
  opt.C = cfg.C;
  opt.alpha = cfg.alpha;
  opt.maxiter = cfg.maxiter;
  opt.workers = cfg.workers;
  if (cfg.acc_target > 0.0) opt.acceptance_target = cfg.acc_target;
  if (!cfg.integrator.empty()) opt.adjusted_scheme = IntegratorScheme::parse(cfg.integrator);
  if (cfg.equipartition == "diag") {
    opt.equipartition = EquipartitionMode::diagonal;
  } else if (cfg.equipartition == "full") {
    opt.equipartition = EquipartitionMode::full_rank;
  } else {
    throw CLI::ValidationError("--equipartition", "expected 'diag' or 'full'");
  }
  return opt;
}

TargetOptions to_target_options(const RunConfig& cfg) {
  TargetOptions topt;
  topt.dim = cfg.dim;
  topt.seed = cfg.seed;
  topt.condition = cfg.condition;
  return topt;
}

ordered_json resolved_manifest(const RunConfig& cfg, const RunOptions& opt,
                               const TargetBundle& bundle, const std::string& command) {
  const SchemeKind adjusted =
      opt.adjusted_scheme.value_or(bundle.target.dim > 200 ? SchemeKind::mn4 : SchemeKind::mn2);
  const double acc =
      opt.acceptance_target.value_or(adjusted == SchemeKind::mn4 ? 0.9 : 0.7);
  ordered_json j;
  j["schema_version"] = 1;
  j["tool"] = "laps";
  j["version"] = kVersion;
  j["command"] = command;
  j["trace_schema"] = kTraceSchemaVersion;
  j["seed"] = cfg.seed;
  j["target"] = {{"name", cfg.target},
                 {"dim", bundle.target.dim},
                 {"condition", cfg.condition},
                 {"seed", cfg.seed}};
  j["chains"] = cfg.chains;
  j["maxiter"] = opt.maxiter;
  j["integrator"] = {{"unadjusted", IntegratorScheme::get(opt.unadjusted_scheme).name},
                     {"adjusted", IntegratorScheme::get(adjusted).name}};
  j["equipartition"] = cfg.equipartition;
  j["alpha"] = opt.alpha;
  j["C"] = opt.C;
  j["acceptance_target"] = acc;
  j["acceptance_tolerance"] = opt.acceptance_tolerance;
  j["fluctuation_threshold"] = opt.fluctuation_threshold;
  j["window_fraction"] = opt.window_fraction;
  j["hutchinson_probes"] = opt.hutchinson_probes;
  j["steps_per_proposal"] = opt.steps_per_proposal;
  j["partial_refresh_factor"] = opt.partial_refresh_factor;
  j["step_clamp"] = {opt.step_clamp_low, opt.step_clamp_high};
  j["workers"] = resolve_workers(opt.workers);
  j["out"] = cfg.out;
  return j;
}

int cmd_run(const RunConfig& cfg) {
  const RunOptions opt = to_run_options(cfg);
  const TargetBundle bundle = make_target(cfg.target, to_target_options(cfg));

  std::ofstream trace_out(cfg.out, std::ios::binary);
  if (!trace_out) {
    std::cerr << "error: cannot open output path: " << cfg.out << "\n";
    return 2;
  }
  const std::string manifest_path = cfg.out + ".manifest.json";
  std::ofstream manifest_out(manifest_path, std::ios::binary);
  if (!manifest_out) {
    std::cerr << "error: cannot open output path: " << manifest_path << "\n";
    return 2;
  }

  const RunResult result = laps_run(bundle, cfg.chains, opt, cfg.seed);
  write_trace_csv(trace_out, result.records);
  manifest_out << resolved_manifest(cfg, opt, bundle, "run").dump(2) << "\n";

  for (const std::string& w : result.warnings) std::cerr << "warning: " << w << "\n";
  if (!result.records.empty() && result.records.back().bias) {
    const auto& b = *result.records.back().bias;
    std::cout << "final b2_max=" << format_double(b.b2_max)
              << " b2_avg=" << format_double(b.b2_avg)
              << " grads/chain=" << result.records.back().gradient_calls_per_chain << "\n";
  }
  if (result.switch_iteration) {
    std::cout << "phase switch at iteration " << *result.switch_iteration << "\n";
  }
  std::cout << "wrote " << cfg.out << " and " << manifest_path << "\n";
  return 0;
}

struct BenchCellSpec {
  std::string name;
  int dim = 100;
  double condition = 1e5;
};

struct BenchSuite {
  std::vector<BenchCellSpec> targets = {{"banana", 2, 1e5}, {"gaussian", 50, 1e5},
                                        {"icg", 100, 1e5}};
  std::vector<int> chains = {256, 4096};
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  double threshold = 0.01;
  int maxiter = 400;
  int workers = 0;
};

BenchSuite load_suite(const std::string& path) {
  BenchSuite suite;
  if (path.empty()) return suite;
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--suite", "cannot open suite file: " + path);
  ordered_json j;
  in >> j;
  if (j.contains("targets")) {
    suite.targets.clear();
    for (const auto& t : j["targets"]) {
      BenchCellSpec spec;
      spec.name = t.at("name").get<std::string>();
      if (t.contains("dim")) spec.dim = t["dim"].get<int>();
      if (t.contains("condition")) spec.condition = t["condition"].get<double>();
      suite.targets.push_back(spec);
    }
  }
  if (j.contains("chains")) suite.chains = j["chains"].get<std::vector<int>>();
  if (j.contains("seeds")) suite.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("threshold")) suite.threshold = j["threshold"].get<double>();
  if (j.contains("maxiter")) suite.maxiter = j["maxiter"].get<int>();
  if (j.contains("workers")) suite.workers = j["workers"].get<int>();
  return suite;
}

std::string threshold_tag(double threshold) {
  std::string s = format_double(threshold);
  return s;
}

int cmd_bench(const BenchSuite& suite, const std::string& out_path) {
  std::ofstream csv(out_path, std::ios::binary);
  if (!csv) {
    std::cerr << "error: cannot open output path: " << out_path << "\n";
    return 2;
  }
  const std::string tag = threshold_tag(suite.threshold);
  csv << "target,dim,chains,seed,grads_to_bmax_" << tag << ",grads_to_bavg_" << tag
      << ",status\n";

  std::ostringstream table;
  table << "target      dim   chains  seed  grads(bmax<" << tag << ")  grads(bavg<" << tag
        << ")  status\n";

  bool any_failed = false;
  for (const auto& spec : suite.targets) {
    for (int chains : suite.chains) {
      for (std::uint64_t seed : suite.seeds) {
        std::string bmax = "n/a", bavg = "n/a", status = "ok";
        try {
          TargetOptions topt;
          topt.dim = spec.dim;
          topt.seed = seed;
          topt.condition = spec.condition;
          const TargetBundle bundle = make_target(spec.name, topt);
          RunOptions opt;
          opt.maxiter = suite.maxiter;
          opt.workers = suite.workers;
          const RunResult result = laps_run(bundle, chains, opt, seed);
          if (auto g = grads_to_threshold(result.records, suite.threshold, BiasMetric::max)) {
            bmax = std::to_string(*g);
          }
          if (auto g = grads_to_threshold(result.records, suite.threshold, BiasMetric::avg)) {
            bavg = std::to_string(*g);
          }
        } catch (const std::exception& e) {
          status = std::string("error: ") + e.what();
          any_failed = true;
        }
        csv << spec.name << ',' << spec.dim << ',' << chains << ',' << seed << ',' << bmax << ','
            << bavg << ',' << status << "\n";
        char row[256];
        std::snprintf(row, sizeof(row), "%-10s %5d %8d %5llu %17s %17s  %s\n", spec.name.c_str(),
                      spec.dim, chains, static_cast<unsigned long long>(seed), bmax.c_str(),
                      bavg.c_str(), status.c_str());
        table << row;
        std::cout << row << std::flush;
      }
    }
  }
  std::cout << "wrote " << out_path << "\n";
  return any_failed ? 1 : 0;
}

int cmd_plotdata(const std::string& trace_path, const std::string& out_path) {
  std::ifstream in(trace_path);
  if (!in) {
    std::cerr << "error: cannot open trace: " << trace_path << "\n";
    return 2;
  }
  std::vector<RunRecord> records;
  try {
    records = read_trace_csv(in);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::ofstream file_out;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file_out.open(out_path, std::ios::binary);
    if (!file_out) {
      std::cerr << "error: cannot open output path: " << out_path << "\n";
      return 2;
    }
    out = &file_out;
  }

  const auto emit_value = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
  *out << "# laps-plotdata schema=1\n";
  *out << "series,grads_per_chain,value\n";

  using Getter = std::function<double(const RunRecord&)>;
  const std::vector<std::pair<std::string, Getter>> series = {
      {"b2_max", [](const RunRecord& r) { return r.bias ? r.bias->b2_max : NAN; }},
      {"b2_avg", [](const RunRecord& r) { return r.bias ? r.bias->b2_avg : NAN; }},
      {"equipartition", [](const RunRecord& r) { return r.equipartition_loss; }},
      {"eevpd", [](const RunRecord& r) { return r.eevpd; }},
      {"eevpd_wanted", [](const RunRecord& r) { return r.eevpd_wanted; }},
      {"step_size", [](const RunRecord& r) { return r.step_size; }},
      {"decoherence_L", [](const RunRecord& r) { return r.decoherence_length; }},
      {"acceptance", [](const RunRecord& r) { return r.acceptance; }},
      {"max_fluctuation", [](const RunRecord& r) { return r.max_fluctuation; }},
  };
  for (const auto& [name, get] : series) {
    for (const RunRecord& r : records) {
      *out << name << ',' << r.gradient_calls_per_chain << ',' << emit_value(get(r)) << "\n";
    }
  }
  for (const RunRecord& r : records) {
    if (r.phase == Phase::adjusted) {
      *out << "phase_switch," << r.gradient_calls_per_chain << ',' << r.iteration << "\n";
      break;
    }
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"laps: late-adjusted parallel ensemble sampler"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  CLI::App* run_cmd = app.add_subcommand("run", "run the sampler on a named target");
  run_cmd->add_option("--config", config_path, "JSON config file (flags take precedence)");
  auto* opt_target = run_cmd->add_option("--target", cfg.target, "target name");
  auto* opt_dim = run_cmd->add_option("--dim", cfg.dim, "target dimension");
  auto* opt_cond = run_cmd->add_option("--condition", cfg.condition, "icg condition number");
  auto* opt_chains = run_cmd->add_option("--chains", cfg.chains, "number of chains");
  auto* opt_seed = run_cmd->add_option("--seed", cfg.seed, "run seed");
  auto* opt_maxiter = run_cmd->add_option("--maxiter", cfg.maxiter, "total iteration budget");
  auto* opt_integrator =
      run_cmd->add_option("--integrator", cfg.integrator, "adjusted-phase scheme (lf|mn2|mn4)");
  auto* opt_equip =
      run_cmd->add_option("--equipartition", cfg.equipartition, "equipartition mode (diag|full)");
  auto* opt_alpha = run_cmd->add_option("--alpha", cfg.alpha, "decoherence scale factor");
  auto* opt_C = run_cmd->add_option("--C", cfg.C, "asymptotic-to-total bias ratio");
  auto* opt_acc = run_cmd->add_option("--acc-target", cfg.acc_target, "target acceptance rate");
  auto* opt_out = run_cmd->add_option("--out", cfg.out, "trace output path");
  auto* opt_workers = run_cmd->add_option("--workers", cfg.workers, "worker threads (0 = auto)");

  std::string suite_path;
  std::string bench_out = "laps_bench.csv";
  CLI::App* bench_cmd = app.add_subcommand("bench", "run the benchmark suite");
  bench_cmd->add_option("--suite", suite_path, "suite JSON (targets, chains, seeds, threshold)");
  bench_cmd->add_option("--out", bench_out, "summary CSV path");

  std::string trace_path;
  std::string plot_out;
  CLI::App* plot_cmd = app.add_subcommand("plotdata", "emit tidy plot series from a trace");
  plot_cmd->add_option("trace", trace_path, "trace CSV path")->required();
  plot_cmd->add_option("--out", plot_out, "output path (default: stdout)");

  std::vector<const char*> argv;
  argv.push_back("laps");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());

    if (run_cmd->parsed()) {
      if (!config_path.empty()) {
        RunConfig from_file = cfg;
        apply_json_config(config_path, from_file);
        // flags win over the file
        if (!*opt_target) cfg.target = from_file.target;
        if (!*opt_dim) cfg.dim = from_file.dim;
        if (!*opt_cond) cfg.condition = from_file.condition;
        if (!*opt_chains) cfg.chains = from_file.chains;
        if (!*opt_seed) cfg.seed = from_file.seed;
        if (!*opt_maxiter) cfg.maxiter = from_file.maxiter;
        if (!*opt_integrator) cfg.integrator = from_file.integrator;
        if (!*opt_equip) cfg.equipartition = from_file.equipartition;
        if (!*opt_alpha) cfg.alpha = from_file.alpha;
        if (!*opt_C) cfg.C = from_file.C;
        if (!*opt_acc) cfg.acc_target = from_file.acc_target;
        if (!*opt_out) cfg.out = from_file.out;
        if (!*opt_workers) cfg.workers = from_file.workers;
      }
      if (cfg.target.empty()) {
        std::cerr << "error: --target is required (or provide it in --config)\n";
        return 2;
      }
      return cmd_run(cfg);
    }
    if (bench_cmd->parsed()) {
      return cmd_bench(load_suite(suite_path), bench_out);
    }
    if (plot_cmd->parsed()) {
      return cmd_plotdata(trace_path, plot_out);
    }
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const BisectionBracketError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace laps::cli
