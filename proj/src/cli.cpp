#include "argbench/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "argbench/dataset.hpp"
#include "argbench/error.hpp"
#include "argbench/evaluation.hpp"
#include "argbench/gateway.hpp"
#include "argbench/metrics.hpp"
#include "argbench/puzzle.hpp"
#include "argbench/report.hpp"
#include "argbench/semantics.hpp"

namespace argbench::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string percent(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << v << "%";
  return ss.str();
}

void require_file(const fs::path& p, const std::string& flag) {
  if (!fs::is_regular_file(p)) throw IoError(flag + ": no such file " + p.string());
}

void require_parent_dir(const fs::path& p, const std::string& flag) {
  const auto parent = p.has_parent_path() ? p.parent_path() : fs::path(".");
  if (!fs::is_directory(parent)) throw IoError(flag + ": directory " + parent.string() + " does not exist");
}

void ensure_dir(const fs::path& dir, const std::string& flag) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError(flag + ": cannot create directory " + dir.string());
}

// --- generate -------------------------------------------------------------

struct GenerateArgs {
  std::string family = "linear";
  std::size_t n_min = 1;
  std::size_t n_max = 25;
  std::size_t variations = 100;
  std::uint64_t seed = 0;
  bool shuffled = false;
  fs::path names = default_names_path();
  fs::path statements = default_statements_path();
  fs::path out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  DatasetSpec spec;
  spec.family = parse_family(a.family);
  spec.n_min = a.n_min;
  spec.n_max = a.n_max;
  spec.variations = a.variations;
  spec.master_seed = a.seed;
  spec.shuffled = a.shuffled;
  try {
    spec.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("--") + e.what());
  }
  require_file(a.names, "--names");
  require_file(a.statements, "--statements");
  require_parent_dir(a.out, "--out");
  const auto ontology = load_ontology(a.names, a.statements);
  const auto instances = generate_dataset(spec, ontology);
  write_dataset(a.out, instances);

  const auto yes = std::count_if(instances.begin(), instances.end(), [](const auto& i) { return i.label; });
  out << "wrote " << instances.size() << " instances to " << a.out.string() << "\n";
  out << "yes fraction " << percent(100.0 * static_cast<double>(yes) / static_cast<double>(instances.size())) << " ("
      << yes << "/" << instances.size() << ")\n";
  return kOk;
}

// --- evaluate -------------------------------------------------------------

struct EvaluateArgs {
  fs::path dataset;
  fs::path model;
  fs::path run;
};

void write_manifest(const EvaluateArgs& a, const ModelConfig& config, std::size_t instances) {
  const auto path = a.run / kManifestFile;
  json manifest;
  if (fs::exists(path)) {
    std::ifstream in(path);
    manifest = json::parse(in, nullptr, false);
    if (manifest.is_discarded() || !manifest.is_object()) manifest = json::object();
  }
  const auto now = utc_now();
  if (!manifest.contains("created_at")) manifest["created_at"] = now;
  manifest["updated_at"] = now;
  manifest["tool_version"] = kToolVersion;
  manifest["dataset_schema_version"] = kDatasetSchemaVersion;
  manifest["dataset"] = fs::absolute(a.dataset).string();
  manifest["dataset_instances"] = instances;
  manifest["model_config_path"] = fs::absolute(a.model).string();
  manifest["model_config"] = model_config_to_json(config);
  manifest["run_path"] = fs::absolute(a.run).string();
  write_file_atomically(path, manifest.dump(2) + "\n");
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  require_file(a.dataset, "--dataset");
  require_file(a.model, "--model");
  const auto config = load_model_config(a.model);
  const auto dataset = read_dataset(a.dataset);
  if (dataset.empty()) throw ValidationError("--dataset: dataset is empty");
  if (config.provider == Provider::HttpChat) {
    const char* key = std::getenv(config.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw IoError("--model: environment variable " + config.api_key_env + " is not set");
    }
  }
  auto client = make_client(config);

  std::error_code ec;
  fs::create_directories(a.run, ec);
  if (ec || !fs::is_directory(a.run)) throw IoError("--run: cannot create run directory " + a.run.string());
  {
    const auto probe = a.run / ".write-probe";
    std::ofstream p(probe);
    if (!p) throw IoError("--run: directory " + a.run.string() + " is not writable");
    p.close();
    fs::remove(probe, ec);
  }
  write_manifest(a, config, dataset.size());

  const auto outcome = run_evaluation(dataset, *client, a.run);
  const auto m = tally(outcome.records);
  out << outcome.new_requests << " new requests\n";
  out << "records " << outcome.records.size() << ": parsed " << m.parsed() << ", unparsed " << m.unparsed
      << ", failed " << m.failed << "\n";
  return kOk;
}

// --- score ----------------------------------------------------------------

struct ScoreArgs {
  fs::path results;
  fs::path dataset;
  std::vector<std::string> breakdowns{"n_args", "num_paths", "label"};
  fs::path out_dir;
};

void check_join(const std::vector<EvalRecord>& records, const std::vector<PuzzleInstance>& dataset) {
  std::set<std::string> dataset_ids;
  for (const auto& i : dataset) dataset_ids.insert(i.id);
  std::set<std::string> record_ids;
  std::vector<std::string> unknown;
  for (const auto& r : records) {
    if (!record_ids.insert(r.instance_id).second) throw IntegrityError("duplicate record for " + r.instance_id);
    if (!dataset_ids.count(r.instance_id)) unknown.push_back(r.instance_id);
  }
  if (!unknown.empty()) {
    std::string msg = "results name instances absent from the dataset:";
    for (std::size_t i = 0; i < std::min<std::size_t>(unknown.size(), 10); ++i) msg += " " + unknown[i];
    if (unknown.size() > 10) msg += " ...";
    throw IntegrityError(msg);
  }
  if (record_ids.size() != dataset_ids.size()) {
    std::vector<std::string> missing;
    std::set_difference(dataset_ids.begin(), dataset_ids.end(), record_ids.begin(), record_ids.end(),
                        std::back_inserter(missing));
    std::string msg = std::to_string(missing.size()) + " dataset instances have no result, e.g. " + missing.front();
    throw IntegrityError(msg);
  }
}

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  std::vector<BreakdownKey> keys;
  for (const auto& k : a.breakdowns) {
    try {
      keys.push_back(parse_breakdown_key(k));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("--breakdown: ") + e.what());
    }
  }
  if (!fs::exists(a.results)) throw IoError("--results: no such file or directory " + a.results.string());
  require_file(a.dataset, "--dataset");
  const auto records = read_records(a.results);
  const auto dataset = read_dataset(a.dataset);
  check_join(records, dataset);
  const auto report = compute_metrics(records);
  const bool nonlinear = std::any_of(dataset.begin(), dataset.end(),
                                     [](const auto& i) { return i.family() == Family::Nonlinear; });

  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back(metrics_file_name(), metrics_csv_header() + "\n" + metrics_csv_row(report) + "\n");
  for (auto key : keys) {
    files.emplace_back(breakdown_file_name(key), breakdown_csv(breakdown(records, dataset, key)));
    if (key == BreakdownKey::NArgs && nonlinear) {
      for (bool yes : {false, true}) {
        files.emplace_back(split_breakdown_file_name(key, yes), breakdown_csv(breakdown(records, dataset, key, yes)));
      }
    }
  }
  ensure_dir(a.out_dir, "--out");
  for (const auto& [name, contents] : files) write_file_atomically(a.out_dir / name, contents);

  out << metrics_csv_header() << "\n" << metrics_csv_row(report) << "\n";
  return kOk;
}

// --- report ---------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> runs;
  fs::path out_dir;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  std::vector<ScoredRun> runs;
  std::set<std::string> names;
  for (const auto& spec : a.runs) {
    const auto eq = spec.find('=');
    fs::path dir = eq == std::string::npos ? spec : spec.substr(eq + 1);
    std::string name = eq == std::string::npos ? fs::path(spec).lexically_normal().filename().string() : spec.substr(0, eq);
    if (name.empty()) name = dir.lexically_normal().parent_path().filename().string();
    if (name.empty() || name.find_first_of(",/\\") != std::string::npos) {
      throw ValidationError("--run: cannot use '" + name + "' as a run name");
    }
    if (!names.insert(name).second) throw ValidationError("--run: duplicate run name '" + name + "'");
    if (!fs::is_directory(dir)) throw IoError("--run: no such directory " + dir.string());
    runs.push_back(load_scored_run(dir, name));
  }

  std::vector<std::pair<std::string, std::string>> files;
  std::set<BreakdownKey> keys;
  for (const auto& run : runs) {
    for (const auto& [key, rows] : run.breakdowns) {
      keys.insert(key);
      std::vector<ChartSeries> series;
      auto split = run.label_splits.find(key);
      if (split != run.label_splits.end()) {
        series.push_back({"answer yes", split->second[1]});
        series.push_back({"answer no", split->second[0]});
      } else {
        series.push_back({run.name, rows});
      }
      files.emplace_back(run.name + "_" + to_string(key) + ".svg",
                         render_chart_svg(run.name + ": % correct by " + to_string(key), to_string(key), series));
    }
  }
  for (auto key : keys) files.emplace_back("combined_" + to_string(key) + ".csv", merged_breakdown_csv(runs, key));
  files.emplace_back("combined_metrics.csv", merged_metrics_csv(runs));

  ensure_dir(a.out_dir, "--out");
  for (const auto& [name, contents] : files) write_file_atomically(a.out_dir / name, contents);
  out << "wrote " << files.size() << " files to " << a.out_dir.string() << "\n";
  return kOk;
}

// --- hard-subset ----------------------------------------------------------

struct HardSubsetArgs {
  fs::path results_a;
  fs::path results_b;
  fs::path dataset;
  fs::path out;
};

int cmd_hard_subset(const HardSubsetArgs& a, std::ostream& out, std::ostream& err) {
  for (const auto& [p, flag] : {std::pair{a.results_a, "--results-a"}, std::pair{a.results_b, "--results-b"}}) {
    if (!fs::exists(p)) throw IoError(std::string(flag) + ": no such file or directory " + p.string());
  }
  require_file(a.dataset, "--dataset");
  require_parent_dir(a.out, "--out");
  const auto records_a = read_records(a.results_a);
  const auto records_b = read_records(a.results_b);
  const auto dataset = read_dataset(a.dataset);
  check_join(records_a, dataset);
  const auto hard = select_hard_subset(records_a, records_b);

  std::vector<PuzzleInstance> subset;
  for (const auto& instance : dataset) {
    if (hard.count(instance.id)) subset.push_back(instance);
  }
  write_dataset(a.out, subset);
  if (subset.empty()) err << "warning: both runs answered every instance correctly; subset is empty\n";
  out << "hard subset: " << subset.size() << " instances written to " << a.out.string() << "\n";
  return kOk;
}

// --- label ----------------------------------------------------------------

int cmd_label(const std::string& topology, std::ostream& out) {
  std::optional<Topology> t;
  try {
    t = Topology::parse(topology);
  } catch (const ParseError& e) {
    throw ValidationError(std::string("--topology: ") + e.what());
  }
  const auto labelling = grounded_labelling(make_graph(*t));
  for (std::uint32_t i = 0; i < labelling.size(); ++i) out << i << ":" << to_string(labelling[ArgumentId{i}]) << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Argument-attack-graph reasoning benchmarks: generate, evaluate, score, report", "argbench"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate a labelled puzzle dataset (JSON Lines)");
  generate->add_option("--family", gen.family, "linear or nonlinear")->capture_default_str();
  generate->add_option("--n-min", gen.n_min, "Smallest argument count")->capture_default_str();
  generate->add_option("--n-max", gen.n_max, "Largest argument count")->capture_default_str();
  generate->add_option("--variations", gen.variations, "Instances per topology")->capture_default_str();
  generate->add_option("--seed", gen.seed, "Master seed")->capture_default_str();
  generate->add_flag("--shuffled", gen.shuffled, "Shuffle the order of fact lines");
  generate->add_option("--names", gen.names, "Names file, one per line")->capture_default_str();
  generate->add_option("--statements", gen.statements, "Statements file, one per line")->capture_default_str();
  generate->add_option("--out", gen.out, "Output dataset path")->required();

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Query a model for every dataset instance (resumable)");
  evaluate->add_option("--dataset", ev.dataset, "Dataset file")->required();
  evaluate->add_option("--model", ev.model, "Model config file (JSON)")->required();
  evaluate->add_option("--run", ev.run, "Run directory")->required();

  ScoreArgs sc;
  auto* score = app.add_subcommand("score", "Compute metrics and breakdown CSVs for a run");
  score->add_option("--results", sc.results, "Results file or run directory")->required();
  score->add_option("--dataset", sc.dataset, "Dataset file")->required();
  score->add_option("--breakdown", sc.breakdowns, "Breakdown keys: n_args, num_paths, label")
      ->capture_default_str();
  score->add_option("--out", sc.out_dir, "Output directory")->required();

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "Render SVG charts and merged CSVs from scored runs");
  report->add_option("--run", rep.runs, "Scored directory, optionally as name=dir (repeatable)")->required();
  report->add_option("--out", rep.out_dir, "Output directory")->required();

  HardSubsetArgs hs;
  auto* hard = app.add_subcommand("hard-subset", "Restrict a dataset to instances missed by either of two runs");
  hard->add_option("--results-a", hs.results_a, "First results file or run directory")->required();
  hard->add_option("--results-b", hs.results_b, "Second results file or run directory")->required();
  hard->add_option("--dataset", hs.dataset, "Dataset both runs were evaluated on")->required();
  hard->add_option("--out", hs.out, "Output dataset path")->required();

  std::string topology;
  auto* label = app.add_subcommand("label", "Print the grounded labelling of a topology (id:IN|OUT|UNDEC)");
  label->add_option("--topology", topology, "linear:<n> or star:<l1>+<l2>+...")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen, out);
    if (evaluate->parsed()) return cmd_evaluate(ev, out);
    if (score->parsed()) return cmd_score(sc, out);
    if (report->parsed()) return cmd_report(rep, out);
    if (hard->parsed()) return cmd_hard_subset(hs, out, err);
    if (label->parsed()) return cmd_label(topology, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kEnvironment;
  } catch (const Error& e) {
    // ParseError, IntegrityError, NoDataError: inputs do not fit together.
    err << "error: " << e.what() << "\n";
    return kIntegrity;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kEnvironment;
  }
  return kUsage;
}

}  // namespace argbench::cli
