#include "taintrank/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "taintrank/analysis.hpp"
#include "taintrank/edgelist.hpp"
#include "taintrank/error.hpp"
#include "taintrank/ingest.hpp"
#include "taintrank/scenarios.hpp"
#include "taintrank/score_file.hpp"
#include "taintrank/taint.hpp"

namespace taintrank::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct IngestConfig {
  std::string input;
  std::string output;
  bool cluster = false;
  std::string pairing = "proportional";
  std::string unit = "satoshi";
  std::optional<std::int64_t> window_start;
  std::optional<std::int64_t> window_end;
  bool strict = false;
};

struct TaintConfig {
  std::string graph;
  std::string root;
  std::string method;
  std::string value_mode = "out";
  std::string combine = "avg";
  std::uint32_t iterations = 1;
  std::uint32_t sweeps = 1;
  std::string output;
};

struct ReportConfig {
  std::string graph;
  std::string scores;
  std::string root;
  std::string output;
  std::size_t top_k = 10;
  std::string bins = "log";
  std::size_t bin_count = 20;
};

struct ScenarioConfig {
  std::string config;
  std::vector<std::string> set;
  std::optional<std::uint64_t> seed;
  std::string output;
};

/// Bad command-line configuration (exit code 3).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void log(std::ostream& err, const std::string& message) { err << "taintrank: " << message << '\n'; }

fs::path with_suffix(const std::string& prefix, const std::string& suffix) {
  return fs::path(prefix + suffix);
}

void prepare_output(const std::string& prefix) {
  const auto parent = fs::path(prefix).parent_path();
  std::error_code ec;
  if (!parent.empty()) fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory " + parent.string() + ": " + ec.message());
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  writer(out);
  if (!out.flush()) throw IoError("write failed for " + path.string());
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  return in;
}

void write_manifest(const std::string& prefix, const std::string& command, ordered_json config,
                    const std::vector<std::string>& argv, const std::vector<std::string>& outputs) {
  ordered_json manifest;
  manifest["tool"] = "taintrank";
  manifest["command"] = command;
  manifest["config"] = std::move(config);
  manifest["argv"] = argv;
  manifest["outputs"] = outputs;
  write_file(with_suffix(prefix, ".manifest.json"),
             [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
}

TxGraph load_graph_input(const std::string& prefix) {
  try {
    return load_graph(prefix);
  } catch (const DomainError& e) {
    throw ParseError(0, prefix + ": " + e.what());
  }
}

void put_optional(ordered_json& j, const char* key, std::optional<double> v) {
  if (v)
    j[key] = *v;
  else
    j[key] = nullptr;
}

int run_ingest(const IngestConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto pairing = parse_pairing(cfg.pairing);
  if (!pairing) throw ConfigError("unknown pairing rule '" + cfg.pairing + "'");
  if (cfg.unit != "satoshi" && cfg.unit != "btc") throw ConfigError("unknown unit '" + cfg.unit + "'");
  if (cfg.window_start.has_value() != cfg.window_end.has_value())
    throw ConfigError("--window-start and --window-end must be given together");
  if (cfg.window_start && *cfg.window_start > *cfg.window_end)
    throw ConfigError("window start is after window end");

  auto in = open_input(cfg.input);
  ParseOptions popts;
  popts.unit = cfg.unit == "btc" ? ValueUnit::btc : ValueUnit::satoshi;
  popts.strict = cfg.strict;
  ParseResult parsed = parse_records(in, popts);
  for (std::size_t i = 0; i < parsed.errors.size() && i < 10; ++i)
    log(err, "skipped line " + std::to_string(parsed.errors[i].line) + ": " + parsed.errors[i].message);
  if (parsed.errors.size() > 10)
    log(err, std::to_string(parsed.errors.size() - 10) + " more malformed lines skipped");
  if (parsed.dropped.zero_value > 0)
    log(err, "dropped " + std::to_string(parsed.dropped.zero_value) + " zero-value entries");
  if (parsed.dropped.unaddressed > 0)
    log(err, "dropped " + std::to_string(parsed.dropped.unaddressed) + " entries without address");

  std::vector<TransactionRecord> records = std::move(parsed.records);
  const std::size_t records_read = records.size();
  if (cfg.window_start) records = filter_window(records, TimeWindow{*cfg.window_start, *cfg.window_end});

  std::optional<ClusterMap> clusters;
  if (cfg.cluster) clusters = cluster_inputs(records);
  BuildOptions bopts;
  bopts.pairing = *pairing;
  bopts.clusters = clusters ? &*clusters : nullptr;
  const BuildResult built = build_graph(records, bopts);

  prepare_output(cfg.output);
  save_graph(built.graph, cfg.output);

  ordered_json config;
  config["input"] = cfg.input;
  config["output"] = cfg.output;
  config["cluster"] = cfg.cluster;
  config["pairing"] = cfg.pairing;
  config["unit"] = cfg.unit;
  config["strict"] = cfg.strict;
  config["window_start"] = cfg.window_start ? json(*cfg.window_start) : json(nullptr);
  config["window_end"] = cfg.window_end ? json(*cfg.window_end) : json(nullptr);
  std::vector<std::string> argv = {"ingest",    "--input", cfg.input, "--output", cfg.output,
                                   "--pairing", cfg.pairing, "--unit", cfg.unit};
  if (cfg.cluster) argv.push_back("--cluster");
  if (cfg.strict) argv.push_back("--strict");
  if (cfg.window_start) {
    argv.insert(argv.end(), {"--window-start", std::to_string(*cfg.window_start), "--window-end",
                             std::to_string(*cfg.window_end)});
  }
  write_manifest(cfg.output, "ingest", config, argv,
                 {edges_path(cfg.output).string(), labels_path(cfg.output).string()});

  ordered_json summary;
  summary["command"] = "ingest";
  summary["records"] = records_read;
  summary["malformed"] = parsed.errors.size();
  summary["used"] = built.stats.transactions_used;
  summary["nodes"] = built.graph.node_count();
  summary["links"] = built.graph.edge_count();
  put_optional(summary, "avg_degree", built.graph.average_degree());
  if (clusters) summary["clusters"] = clusters->cluster_count();
  out << summary.dump() << '\n';
  return kOk;
}

std::vector<TaintMethod> resolve_methods(const TaintConfig& cfg) {
  if (cfg.value_mode != "in" && cfg.value_mode != "out")
    throw ConfigError("unknown value mode '" + cfg.value_mode + "'");
  if (cfg.combine != "avg" && cfg.combine != "max")
    throw ConfigError("unknown combine mode '" + cfg.combine + "'");
  if (cfg.method == "all") return {kAllMethods.begin(), kAllMethods.end()};
  if (cfg.method == "weight")
    return {cfg.value_mode == "in" ? TaintMethod::weight_in : TaintMethod::weight_out};
  if (cfg.method == "combined")
    return {cfg.combine == "max" ? TaintMethod::combined_max : TaintMethod::combined_avg};
  if (cfg.method == "pagerank") return {TaintMethod::pagerank_like};
  if (auto m = parse_method(cfg.method)) return {*m};
  throw ConfigError("unknown method '" + cfg.method + "'");
}

std::string graph_pairing(const std::string& graph_prefix) {
  std::ifstream in(with_suffix(graph_prefix, ".manifest.json"));
  if (!in) return "unknown";
  json manifest = json::parse(in, nullptr, false);
  if (manifest.is_discarded()) return "unknown";
  auto config = manifest.find("config");
  if (config == manifest.end() || !config->is_object()) return "unknown";
  auto pairing = config->find("pairing");
  if (pairing == config->end() || !pairing->is_string()) return "unknown";
  return pairing->get<std::string>();
}

int run_taint(const TaintConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto methods = resolve_methods(cfg);
  if (cfg.sweeps == 0) throw ConfigError("--sweeps must be positive");

  const TxGraph graph = load_graph_input(cfg.graph);
  const auto root = graph.find(cfg.root);
  if (!root) throw ConfigError("unknown root label: " + cfg.root);
  const std::string pairing = graph_pairing(cfg.graph);
  const DistanceMap dist(graph, *root);
  log(err, "root " + cfg.root + " reaches " + std::to_string(dist.sweep_order().size()) +
               " nodes, max distance " + std::to_string(dist.max_distance()));

  prepare_output(cfg.output);
  TaintOptions opts;
  opts.sweeps = cfg.sweeps;
  opts.iterations = cfg.iterations;
  std::vector<std::string> files;
  for (TaintMethod m : methods) {
    const TaintScores scores = compute_taint(graph, *root, m, opts);
    const auto path = with_suffix(cfg.output, "." + std::string(to_string(m)) + ".tsv");
    write_file(path, [&](std::ostream& o) { write_scores(o, graph, scores, pairing); });
    files.push_back(path.string());
  }

  ordered_json config;
  config["graph"] = cfg.graph;
  config["root"] = cfg.root;
  config["method"] = cfg.method;
  config["value_mode"] = cfg.value_mode;
  config["combine"] = cfg.combine;
  config["iterations"] = cfg.iterations;
  config["sweeps"] = cfg.sweeps;
  config["output"] = cfg.output;
  config["pairing"] = pairing;
  write_manifest(cfg.output, "taint", config,
                 {"taint", "--graph", cfg.graph, "--root", cfg.root, "--method", cfg.method,
                  "--value-mode", cfg.value_mode, "--combine", cfg.combine, "--iterations",
                  std::to_string(cfg.iterations), "--sweeps", std::to_string(cfg.sweeps),
                  "--output", cfg.output},
                 files);

  ordered_json summary;
  summary["command"] = "taint";
  summary["root"] = cfg.root;
  summary["reachable"] = dist.sweep_order().size();
  summary["max_distance"] = dist.max_distance();
  summary["files"] = files;
  out << summary.dump() << '\n';
  return kOk;
}

int run_report(const ReportConfig& cfg, std::ostream& out, std::ostream&) {
  if (cfg.graph.empty() && cfg.scores.empty())
    throw ConfigError("report needs --graph and/or --scores");
  if (!cfg.root.empty() && cfg.graph.empty()) throw ConfigError("--root needs --graph");
  if (cfg.top_k == 0) throw ConfigError("--top-k must be positive");
  if (cfg.bin_count == 0) throw ConfigError("--bin-count must be positive");
  const auto scale = parse_bin_scale(cfg.bins);
  if (!scale) throw ConfigError("unknown bin scale '" + cfg.bins + "'");

  prepare_output(cfg.output);
  std::vector<std::string> files;
  ordered_json summary;
  summary["command"] = "report";

  if (!cfg.graph.empty()) {
    const TxGraph graph = load_graph_input(cfg.graph);
    const DegreeStats stats = degree_distribution(graph);
    const auto path = with_suffix(cfg.output, ".degree.csv");
    write_file(path, [&](std::ostream& o) { write_degree_csv(o, stats); });
    files.push_back(path.string());
    summary["nodes"] = stats.nodes;
    summary["links"] = stats.links;
    put_optional(summary, "avg_degree", stats.average_degree);

    if (!cfg.root.empty()) {
      const auto root = graph.find(cfg.root);
      if (!root) throw ConfigError("unknown root label: " + cfg.root);
      const ReachableSubgraph sub = reachable_subgraph(graph, *root);
      const DegreeStats sub_stats = degree_distribution(sub.graph);
      const auto sub_path = with_suffix(cfg.output, ".subgraph.degree.csv");
      write_file(sub_path, [&](std::ostream& o) { write_degree_csv(o, sub_stats); });
      files.push_back(sub_path.string());
      summary["subgraph_nodes"] = sub_stats.nodes;
      summary["subgraph_links"] = sub_stats.links;
      put_optional(summary, "subgraph_avg_degree", sub_stats.average_degree);
      summary["max_distance"] = DistanceMap(graph, *root).max_distance();
    }
  }

  if (!cfg.scores.empty()) {
    auto in = open_input(cfg.scores);
    const ScoreFile file = read_scores(in);
    const auto scores = file.dense_scores();
    const auto labels = file.dense_labels();
    const Histogram hist = score_histogram(scores, *scale, cfg.bin_count);
    const auto ranked = top_k(scores, labels, cfg.top_k);
    const auto hist_path = with_suffix(cfg.output, ".histogram.csv");
    const auto topk_path = with_suffix(cfg.output, ".topk.csv");
    write_file(hist_path, [&](std::ostream& o) { write_histogram_csv(o, hist); });
    write_file(topk_path, [&](std::ostream& o) { write_topk_csv(o, ranked); });
    files.push_back(hist_path.string());
    files.push_back(topk_path.string());
    summary["scored_nodes"] = scores.size();
    if (auto knee = knee_rank(scores))
      summary["knee_rank"] = *knee;
    else
      summary["knee_rank"] = nullptr;
  }

  ordered_json config;
  config["graph"] = cfg.graph;
  config["scores"] = cfg.scores;
  config["root"] = cfg.root;
  config["output"] = cfg.output;
  config["top_k"] = cfg.top_k;
  config["bins"] = cfg.bins;
  config["bin_count"] = cfg.bin_count;
  std::vector<std::string> argv = {"report", "--output", cfg.output, "--top-k", std::to_string(cfg.top_k),
                                   "--bins", cfg.bins, "--bin-count", std::to_string(cfg.bin_count)};
  if (!cfg.graph.empty()) argv.insert(argv.end(), {"--graph", cfg.graph});
  if (!cfg.scores.empty()) argv.insert(argv.end(), {"--scores", cfg.scores});
  if (!cfg.root.empty()) argv.insert(argv.end(), {"--root", cfg.root});
  write_manifest(cfg.output, "report", config, argv, files);

  summary["files"] = files;
  out << summary.dump() << '\n';
  return kOk;
}

std::vector<std::pair<std::string, std::string>> spec_fields(const ScenarioSpec& s) {
  return {{"kind", std::string(to_string(s.kind))},
          {"length", std::to_string(s.length)},
          {"splits", std::to_string(s.splits)},
          {"rejoin", std::to_string(s.rejoin)},
          {"hops", std::to_string(s.hops)},
          {"victims", std::to_string(s.victims)},
          {"amount", std::to_string(s.amount)},
          {"peel", std::to_string(s.peel)},
          {"dust", std::to_string(s.dust)},
          {"clean", std::to_string(s.clean)},
          {"nodes", std::to_string(s.nodes)},
          {"edges", std::to_string(s.edges)},
          {"max_weight", std::to_string(s.max_weight)},
          {"seed", std::to_string(s.seed)}};
}

int run_scenario(const ScenarioConfig& cfg, std::ostream& out, std::ostream&) {
  std::string text;
  if (!cfg.config.empty()) {
    auto in = open_input(cfg.config);
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str() + "\n";
  }
  for (const auto& kv : cfg.set) text += kv + "\n";
  if (cfg.seed) text += "seed = " + std::to_string(*cfg.seed) + "\n";
  std::istringstream spec_in(text);
  ScenarioSpec spec;
  try {
    spec = parse_scenario_config(spec_in);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  Scenario scenario;
  try {
    scenario = generate(spec);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }

  prepare_output(cfg.output);
  save_graph(scenario.graph, cfg.output);
  const auto truth_path = with_suffix(cfg.output, ".truth.tsv");
  write_file(truth_path, [&](std::ostream& o) {
    for (NodeId n : scenario.ground_truth)
      o << n << '\t' << scenario.graph.label(n) << '\t' << format_double(scenario.stolen_value[n]) << '\n';
  });

  ordered_json config;
  std::vector<std::string> argv = {"scenario", "--output", cfg.output};
  for (const auto& [key, value] : spec_fields(spec)) {
    config[key] = value;
    argv.insert(argv.end(), {"--set", key + "=" + value});
  }
  config["output"] = cfg.output;
  write_manifest(cfg.output, "scenario", config, argv,
                 {edges_path(cfg.output).string(), labels_path(cfg.output).string(), truth_path.string()});

  ordered_json summary;
  summary["command"] = "scenario";
  summary["kind"] = to_string(spec.kind);
  summary["root"] = scenario.graph.label(scenario.root);
  summary["nodes"] = scenario.graph.node_count();
  summary["links"] = scenario.graph.edge_count();
  summary["ground_truth"] = scenario.ground_truth.size();
  out << summary.dump() << '\n';
  return kOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Taint propagation over Bitcoin-style transaction graphs", "taintrank"};
  app.require_subcommand(1);

  IngestConfig ingest_cfg;
  auto* ingest = app.add_subcommand("ingest", "Build an edgelist graph from transaction records");
  ingest->add_option("--input", ingest_cfg.input, "Line-delimited JSON transaction records")->required();
  ingest->add_option("--output", ingest_cfg.output, "Output prefix for .edges.tsv/.labels.tsv")->required();
  ingest->add_flag("--cluster", ingest_cfg.cluster, "Merge co-spent input addresses");
  ingest->add_option("--pairing", ingest_cfg.pairing, "proportional | full-mesh-equal");
  ingest->add_option("--unit", ingest_cfg.unit, "satoshi | btc");
  ingest->add_option("--window-start", ingest_cfg.window_start, "Inclusive unix time");
  ingest->add_option("--window-end", ingest_cfg.window_end, "Inclusive unix time");
  ingest->add_flag("--strict", ingest_cfg.strict, "Abort on the first malformed line");

  TaintConfig taint_cfg;
  auto* taint = app.add_subcommand("taint", "Compute taint scores from a root node");
  taint->add_option("--graph", taint_cfg.graph, "Graph prefix")->required();
  taint->add_option("--root", taint_cfg.root, "Root node label")->required();
  taint->add_option("--method", taint_cfg.method,
                    "fixed | weight | weight_in | weight_out | distance | combined | combined_avg | "
                    "combined_max | pagerank | pagerank_like | all")
      ->required();
  taint->add_option("--value-mode", taint_cfg.value_mode, "Node value for weight: in | out");
  taint->add_option("--combine", taint_cfg.combine, "Combination for combined: avg | max");
  taint->add_option("--iterations", taint_cfg.iterations, "PageRank-like iterations");
  taint->add_option("--sweeps", taint_cfg.sweeps, "Passes of the sweep-based methods");
  taint->add_option("--output", taint_cfg.output, "Output prefix")->required();

  ReportConfig report_cfg;
  auto* report = app.add_subcommand("report", "Degree, histogram and top-k reports");
  report->add_option("--graph", report_cfg.graph, "Graph prefix");
  report->add_option("--scores", report_cfg.scores, "Score file");
  report->add_option("--root", report_cfg.root, "Also report the subgraph reachable from this label");
  report->add_option("--top-k", report_cfg.top_k, "Rows in the top-k report");
  report->add_option("--bins", report_cfg.bins, "log | linear");
  report->add_option("--bin-count", report_cfg.bin_count, "Histogram bins");
  report->add_option("--output", report_cfg.output, "Output prefix")->required();

  ScenarioConfig scenario_cfg;
  auto* scenario = app.add_subcommand("scenario", "Generate a synthetic scenario graph");
  scenario->add_option("--config", scenario_cfg.config, "key = value scenario file");
  scenario->add_option("--set", scenario_cfg.set, "key=value override (repeatable)");
  scenario->add_option("--seed", scenario_cfg.seed, "Random seed (overrides the config)");
  scenario->add_option("--output", scenario_cfg.output, "Output prefix")->required();

  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("taintrank");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    log(err, e.what());
    return kBadConfig;
  }

  try {
    if (*ingest) return run_ingest(ingest_cfg, out, err);
    if (*taint) return run_taint(taint_cfg, out, err);
    if (*report) return run_report(report_cfg, out, err);
    if (*scenario) return run_scenario(scenario_cfg, out, err);
  } catch (const IoError& e) {
    log(err, e.what());
    return kIoError;
  } catch (const ParseError& e) {
    log(err, e.what());
    return kMalformedInput;
  } catch (const ConfigError& e) {
    log(err, e.what());
    return kBadConfig;
  } catch (const DomainError& e) {
    log(err, e.what());
    return kBadConfig;
  }
  return kBadConfig;
}

}  // namespace taintrank::cli
