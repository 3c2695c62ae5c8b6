// sflow: command-line driver for the stencilflow toolkit.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "sf/exec/bandwidth.hpp"
#include "sf/exec/timing.hpp"
#include "sf/frontend/ast_json.hpp"
#include "sf/frontend/parser.hpp"
#include "sf/frontend/validate.hpp"
#include "sf/perf/model.hpp"
#include "sf/pipeline/config.hpp"
#include "sf/pipeline/corpus.hpp"
#include "sf/pipeline/io.hpp"
#include "sf/tune/tuner.hpp"

using namespace sf;
namespace fs = std::filesystem;

namespace {

// Bandwidth assumed in model-cost mode when the config does not set one.
constexpr double kModelBandwidth = 10e9;
// Probe spread above which timings are reported as unstable.
constexpr double kUnstableSpread = 0.10;

std::string g_file = "sflow";  // file named in diagnostics

struct UserFailure {};  // diagnostics already printed

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string domain;
  std::string out;
};

void add_common(CLI::App* app, Common& c, const std::string& cmd) {
  app->add_option("-c,--config", c.config, "key=value config file");
  app->add_option("--set", c.sets, "override a config key (key=value)");
  app->add_option("--domain", c.domain, "domain size ni,nj,nk");
  c.out = "sflow_out/" + cmd;
  app->add_option("-o,--out", c.out, "output directory")->capture_default_str();
}

PipelineConfig resolve_config(const Common& c) {
  PipelineConfig cfg;
  if (!c.config.empty()) {
    g_file = c.config;
    cfg = load_config(c.config);
  }
  g_file = "<override>";
  for (const auto& s : c.sets) apply_override(cfg, s);
  if (!c.domain.empty()) apply_override(cfg, "domain=[" + c.domain + "]");
  g_file = "sflow";
  return cfg;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

StencilProgram load_source(const std::string& input) {
  g_file = ends_with(input, ".stn") ? input : corpus_entry(input).file;
  StencilProgram p = parse_file(g_file);
  const auto diags = validate(p);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << d.format(g_file) << "\n";
    throw UserFailure{};
  }
  return p;
}

/// A graph JSON file, a .stn source or a corpus program name.
DataflowGraph load_graph(const std::string& input, const PipelineConfig& cfg) {
  if (ends_with(input, ".json")) {
    g_file = input;
    try {
      DataflowGraph g = graph_from_json(read_json(input));
      g_file = "sflow";
      return g;
    } catch (const nlohmann::json::exception& e) {
      throw Error("format error", std::string("not a graph: ") + e.what());
    }
  }
  const StencilProgram p = load_source(input);
  DataflowGraph g = compile_program(p, cfg.domain);
  g_file = "sflow";
  return g;
}

double resolve_bandwidth(const PipelineConfig& cfg, nlohmann::json& probe_info) {
  if (cfg.bandwidth > 0) {
    probe_info = {{"source", "config"}, {"bytes_per_second", cfg.bandwidth}};
    return cfg.bandwidth;
  }
  if (cfg.model_cost) {
    probe_info = {{"source", "model-cost default"}, {"bytes_per_second", kModelBandwidth}};
    return kModelBandwidth;
  }
  const std::int64_t bytes = std::clamp<std::int64_t>(4 * llc_bytes(), std::int64_t(256) << 20,
                                                      std::int64_t(2) << 30);
  const BandwidthProbe p = measure_bandwidth(bytes, 10);
  const double spread = (p.stats.max() - p.stats.min()) / p.stats.median();
  if (spread > kUnstableSpread)
    std::cerr << "sflow: warning: bandwidth probe varies by " << int(spread * 100) << "% between runs\n";
  probe_info = {{"source", "copy probe"},
                {"bytes_per_second", p.bytes_per_second},
                {"bytes", p.bytes},
                {"median_s", p.stats.median()},
                {"spread", spread}};
  return p.bytes_per_second;
}

void log_to(std::ofstream& out, const nlohmann::json& j) { out << j.dump() << "\n"; }

int cmd_compile(const Common& c, const std::string& source, bool ast_json, bool optimize) {
  const PipelineConfig cfg = resolve_config(c);
  const StencilProgram p = load_source(source);
  DataflowGraph g = compile_program(p, cfg.domain);
  int rewrites = 0;
  if (optimize) rewrites = run_driver_passes(g);
  g_file = "sflow";
  OutputDir out(c.out, "compile");
  out.set("config", config_to_json(cfg));
  out.set("source", source);
  if (ast_json) out.write("ast.json", program_to_json(p));
  out.write("graph.json", graph_to_json(g));
  out.finish();
  std::cout << "compiled " << source << ": " << g.states.size() << " states, " << g.node_count()
            << " stencil nodes";
  if (optimize) std::cout << ", " << rewrites << " driver rewrites";
  std::cout << "\n";
  return 0;
}

int cmd_model(const Common& c, const std::string& input) {
  const PipelineConfig cfg = resolve_config(c);
  const DataflowGraph g = load_graph(input, cfg);
  nlohmann::json probe;
  const double bw = resolve_bandwidth(cfg, probe);
  const PerfReport rep = build_report(g, BenchResult{}, bw);
  OutputDir out(c.out, "model");
  out.set("config", config_to_json(cfg));
  out.set("bandwidth", probe);
  nlohmann::json j = report_json(rep);
  j["modeled_total_s"] = model_graph(g, bw);
  out.write("model.json", j);
  out.finish();
  std::cout << report_table(rep);
  std::printf("modeled total %.6f s\n", model_graph(g, bw));
  return 0;
}

int cmd_bench(const Common& c, const std::string& input, const std::string& compare_with,
              const std::string& inputs_dir, bool dump_outputs) {
  const PipelineConfig cfg = resolve_config(c);
  const DataflowGraph g = load_graph(input, cfg);
  FieldSet fields = allocate_fields(g, cfg.alignment);
  fill_inputs(fields, g, cfg.seed);
  if (!inputs_dir.empty())
    for (const auto& a : g.arrays)
      if (!a.transient && fs::exists(inputs_dir + "/" + a.name + ".bin"))
        read_field(inputs_dir + "/" + a.name, fields.at(a.name), a, g.domain);
  const BenchResult r = benchmark(g, fields, cfg.reps, cfg.workers);
  OutputDir out(c.out, "bench");
  out.set("config", config_to_json(cfg));
  out.write("timings.csv", timings_csv(r));
  out.write("timings_raw.csv", timings_raw(r));
  nlohmann::json summary{{"reps", r.reps}, {"total_median_s", r.total.median()}, {"total_min_s", r.total.min()}};
  if (dump_outputs) {
    Executor ex(g, cfg.workers);
    FieldSet run = clone_fields(fields);
    ex.run(run);
    for (const auto& name : write_fields(out.file("outputs"), run, g)) {
      out.add("outputs/" + name + ".bin");
      out.add("outputs/" + name + ".json");
    }
  }
  std::cout << timings_csv(r);
  std::printf("total median %.6f s over %d reps\n", r.total.median(), r.reps);
  if (!compare_with.empty()) {
    const DataflowGraph h = load_graph(compare_with, cfg);
    FieldSet f2 = allocate_fields(h, cfg.alignment);
    fill_inputs(f2, h, cfg.seed);
    const BenchResult r2 = benchmark(h, f2, cfg.reps, cfg.workers);
    const double speedup = r2.total.median() > 0 ? r.total.median() / r2.total.median() : 0.0;
    std::printf("%-32s %14s %10s\n", "graph", "median_s", "speedup");
    std::printf("%-32s %14.6f %10.2f\n", input.c_str(), r.total.median(), 1.0);
    std::printf("%-32s %14.6f %10.2f\n", compare_with.c_str(), r2.total.median(), speedup);
    summary["compare"] = {{"graph", compare_with}, {"total_median_s", r2.total.median()}, {"speedup", speedup}};
  }
  out.write("bench.json", summary);
  out.finish();
  return 0;
}

void write_tuning_outputs(OutputDir& out, const TransferResult& tr, std::size_t phase1_evaluated,
                          double exhaustive, const std::vector<Pattern>& patterns, const TunerOptions& opts) {
  out.write("patterns.json", patterns_to_json(patterns, opts));
  out.write("tuned_graph.json", graph_to_json(tr.graph));
  nlohmann::json attempts = nlohmann::json::array();
  for (const auto& a : tr.attempts)
    attempts.push_back({{"pattern", a.pattern}, {"state", a.state}, {"first", a.first}, {"before_s", a.before},
                        {"after_s", a.after}, {"accepted", a.accepted}, {"reason", a.reason}});
  out.write("transfer.json", nlohmann::json{{"phase1_evaluated", phase1_evaluated},
                                            {"transfer_evaluated", tr.evaluated},
                                            {"exhaustive_space", exhaustive},
                                            {"matches", tr.matches},
                                            {"applied", tr.applied},
                                            {"attempts", attempts}});
}

int cmd_tune(const Common& c, const std::string& input, bool no_optimize) {
  const PipelineConfig cfg = resolve_config(c);
  DataflowGraph g = load_graph(input, cfg);
  // Unrolled copies of a loop body are separate states, each a transfer target.
  if (!no_optimize) run_driver_passes(g);
  const DataflowGraph module = compile_corpus(cfg.tuning_module, g.domain);
  nlohmann::json probe;
  const double bw = resolve_bandwidth(cfg, probe);
  const TunerOptions opts = tuner_options(cfg, bw);

  OutputDir out(c.out, "tune");
  out.set("config", config_to_json(cfg));
  out.set("bandwidth", probe);
  std::ofstream session(out.file("session.jsonl"), std::ios::trunc);
  const TuneLog log = [&](const nlohmann::json& j) { log_to(session, j); };
  const Phase1Result p1 = tune_module(module, opts, log);
  const TransferResult tr = transfer(p1.patterns, g, opts, log);
  session.close();
  out.add("session.jsonl");
  const double space = exhaustive_space(g, opts.depth);
  write_tuning_outputs(out, tr, p1.evaluated, space, p1.patterns, opts);
  out.finish();
  std::printf("phase 1: %zu cutouts, %zu configurations, %zu patterns\n", p1.cutouts.size(), p1.evaluated,
              p1.patterns.size());
  std::printf("transfer: %zu matches, %zu applied, %zu evaluated (exhaustive space %.0f)\n", tr.matches,
              tr.applied, tr.evaluated, space);
  return 0;
}

int cmd_transfer(const Common& c, const std::string& patterns_file, const std::string& input) {
  const PipelineConfig cfg = resolve_config(c);
  g_file = patterns_file;
  std::vector<Pattern> patterns;
  try {
    patterns = patterns_from_json(read_json(patterns_file));
  } catch (const nlohmann::json::exception& e) {
    throw Error("format error", std::string("not a pattern database: ") + e.what());
  }
  g_file = "sflow";
  const DataflowGraph g = load_graph(input, cfg);
  nlohmann::json probe;
  const double bw = resolve_bandwidth(cfg, probe);
  const TunerOptions opts = tuner_options(cfg, bw);
  OutputDir out(c.out, "transfer");
  out.set("config", config_to_json(cfg));
  out.set("bandwidth", probe);
  std::ofstream session(out.file("session.jsonl"), std::ios::trunc);
  const TransferResult tr = transfer(patterns, g, opts, [&](const nlohmann::json& j) { log_to(session, j); });
  session.close();
  out.add("session.jsonl");
  write_tuning_outputs(out, tr, 0, exhaustive_space(g, opts.depth), patterns, opts);
  out.finish();
  std::printf("transfer: %zu matches, %zu applied, %zu evaluated\n", tr.matches, tr.applied, tr.evaluated);
  return 0;
}

int cmd_report(const Common& c, const std::string& input, const std::string& timings) {
  const PipelineConfig cfg = resolve_config(c);
  const DataflowGraph g = load_graph(input, cfg);
  BenchResult r;
  if (!timings.empty()) {
    g_file = timings;
    r = parse_timings_raw(read_text(timings));
    g_file = "sflow";
  } else {
    std::cerr << "sflow: warning: no timings given; the report only has modeled bounds\n";
  }
  nlohmann::json probe;
  const double bw = resolve_bandwidth(cfg, probe);
  const PerfReport rep = build_report(g, r, bw);
  OutputDir out(c.out, "report");
  out.set("config", config_to_json(cfg));
  out.set("bandwidth", probe);
  out.write("report.csv", report_csv(rep));
  nlohmann::json j = report_json(rep);
  j["partial"] = timings.empty();
  j["bandwidth_probe"] = probe;
  out.write("report.json", j);
  out.write("report.txt", report_table(rep));
  out.finish();
  std::cout << report_table(rep);
  std::cout << "hotspots:";
  for (const auto& h : hotspot_list(rep, 5)) std::cout << " " << h;
  std::cout << "\n";
  return 0;
}

int cmd_selftest(const Common& c) {
  Common cc = c;
  if (cc.domain.empty()) cc.domain = "16,16,8";
  const PipelineConfig cfg = resolve_config(cc);
  bool ok = true;
  nlohmann::json results = nlohmann::json::array();
  for (const auto& e : corpus_entries()) {
    const SelfTestResult r = self_test(e, cfg.domain, cfg.seed);
    ok = ok && r.ok;
    std::printf("%s %s", r.ok ? "PASS" : "FAIL", e.name.c_str());
    if (e.dense_solver) std::printf(" dense_rel=%.3g", r.dense_error);
    if (!r.detail.empty()) std::printf(" (%s)", r.detail.c_str());
    std::printf("\n");
    results.push_back({{"name", e.name}, {"ok", r.ok}, {"bitwise", r.bitwise}, {"dense_error", r.dense_error}});
  }
  OutputDir out(cc.out, "selftest");
  out.set("config", config_to_json(cfg));
  out.write("selftest.json", results);
  out.finish();
  if (!ok) throw InternalError("corpus self-test failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sflow: stencil compiler, tuner and performance model"};
  app.require_subcommand(1);

  Common c_compile, c_bench, c_model, c_tune, c_xfer, c_report, c_selftest;
  std::string input, other, inputs_dir, timings, patterns;
  bool ast_json = false, optimize = false, dump_outputs = false;

  auto* compile = app.add_subcommand("compile", "compile a .stn source or corpus program to a graph");
  add_common(compile, c_compile, "compile");
  compile->add_option("source", input, ".stn file or corpus name")->required();
  compile->add_flag("--ast-json", ast_json, "also write the AST as JSON");
  compile->add_flag("--optimize", optimize, "run the driver passes");

  auto* bench = app.add_subcommand("bench", "time every kernel of a graph");
  add_common(bench, c_bench, "bench");
  bench->add_option("graph", input, "graph JSON, .stn file or corpus name")->required();
  bench->add_option("--compare", other, "second graph to compare against");
  bench->add_option("--inputs", inputs_dir, "directory of raw input fields");
  bench->add_flag("--dump-outputs", dump_outputs, "write output fields after one run");

  auto* model = app.add_subcommand("model", "bandwidth-bound time per kernel");
  add_common(model, c_model, "model");
  model->add_option("graph", input, "graph JSON, .stn file or corpus name")->required();

  auto* tune = app.add_subcommand("tune", "tune the tuning module and transfer onto a graph");
  add_common(tune, c_tune, "tune");
  tune->add_option("graph", input, "graph JSON, .stn file or corpus name")->default_val("dycore");
  bool no_optimize = false;
  tune->add_flag("--no-optimize", no_optimize, "skip the driver passes before transfer");

  auto* xfer = app.add_subcommand("transfer", "apply a pattern database to a graph");
  add_common(xfer, c_xfer, "transfer");
  xfer->add_option("patterns", patterns, "patterns.json")->required();
  xfer->add_option("graph", input, "graph JSON, .stn file or corpus name")->required();

  auto* report = app.add_subcommand("report", "measured versus modeled kernel times");
  add_common(report, c_report, "report");
  report->add_option("graph", input, "graph JSON, .stn file or corpus name")->required();
  report->add_option("--timings", timings, "timings_raw.csv from bench");

  auto* selftest = app.add_subcommand("selftest", "check every corpus program against its oracles");
  add_common(selftest, c_selftest, "selftest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*compile) return cmd_compile(c_compile, input, ast_json, optimize);
    if (*bench) return cmd_bench(c_bench, input, other, inputs_dir, dump_outputs);
    if (*model) return cmd_model(c_model, input);
    if (*tune) return cmd_tune(c_tune, input, no_optimize);
    if (*xfer) return cmd_transfer(c_xfer, patterns, input);
    if (*report) return cmd_report(c_report, input, timings);
    if (*selftest) return cmd_selftest(c_selftest);
  } catch (const UserFailure&) {
    return 1;
  } catch (const Error& e) {
    std::cerr << e.diagnostic().format(g_file) << "\n";
    return 1;
  } catch (const InternalError& e) {
    std::cerr << g_file << ":0:0: internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << g_file << ":0:0: internal error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
