#include "embedgeom/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

#include "embedgeom/embedding_store.hpp"
#include "embedgeom/error.hpp"
#include "embedgeom/parallel.hpp"
#include "embedgeom/pca.hpp"
#include "embedgeom/report_io.hpp"
#include "embedgeom/retrieval.hpp"
#include "embedgeom/sequential.hpp"
#include "embedgeom/sweep.hpp"

namespace embedgeom {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kToolName = "embedgeom";
constexpr const char* kSeedEnv = "EMBEDGEOM_SEED";

struct OptionSpec {
  const char* name;  // without leading dashes; also the config-file key
  const char* help;
};

// Every value option is accepted by every subcommand so that one flag set or
// config file can drive a whole matrix of runs.
constexpr OptionSpec kValueOptions[] = {
    {"items", "Item embeddings (EVEC or TSV)"},
    {"queries", "Query embeddings (EVEC or TSV)"},
    {"relevance", "query_id<TAB>item_id ground truth"},
    {"sessions", "user_id<TAB>item,item,... sessions"},
    {"pca-model", "EPCA model file"},
    {"components", "Project onto the top-k principal components"},
    {"measure", "cosine | dot | neg-euclidean (default cosine)"},
    {"pool-size", "Sampled distractors per query (default 50)"},
    {"cutoffs", "Comma list of k for R@k / N@k"},
    {"epsilon", "Comma list of variance fractions (default 0.80,0.95,1.00)"},
    {"sample-size", "Rows sampled for PCA fitting (default 100000)"},
    {"seed", "Global seed (default 42, or $EMBEDGEOM_SEED)"},
    {"resamples", "Sign-flip resamples for compare (default 10000)"},
    {"workers", "Worker threads (results do not depend on this)"},
    {"out", "Output directory (default ./out)"},
    {"aggregator", "Session aggregator: last | mean | exp-decay (default last)"},
    {"lambda", "Decay factor for exp-decay (default 0.8)"},
    {"scope", "Sequential candidates: full | pool (default full)"},
    {"grid", "Sweep grid: auto or comma list of k"},
    {"metric", "Metric name, e.g. N@100"},
    {"to", "convert: output format evec | tsv"},
};

constexpr OptionSpec kFlagOptions[] = {
    {"center-only", "Evaluate on item-mean-centered embeddings without projection"},
    {"include-history", "Keep history items as full-catalog candidates"},
};

// Raw string values, before typing.
using RawValues = std::map<std::string, std::string>;

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

std::string json_scalar_to_string(const std::string& key, const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  if (value.is_number()) return value.dump();
  if (value.is_array()) {
    std::vector<std::string> parts;
    for (const auto& v : value) parts.push_back(json_scalar_to_string(key, v));
    return join(parts, ',');
  }
  throw InputError("config: unsupported value for '" + key + "'");
}

RawValues load_config_file(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config: " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw InputError("config: " + path + ": top level must be an object");
  RawValues values;
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const auto& opt : kValueOptions) known = known || key == opt.name;
    for (const auto& opt : kFlagOptions) known = known || key == opt.name;
    if (!known) throw InputError("config: unknown key '" + key + "'");
    values[key] = json_scalar_to_string(key, value);
  }
  return values;
}

template <class T>
T parse_number(const std::string& field, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (first == last || ec != std::errc() || ptr != last) {
    throw InputError(field + ": invalid value '" + text + "'");
  }
  return value;
}

template <class T>
std::vector<T> parse_list(const std::string& field, const std::string& text) {
  std::vector<T> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string part = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    out.push_back(parse_number<T>(field, part));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

bool parse_bool(const std::string& field, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw InputError(field + ": expected true or false, got '" + text + "'");
}

void apply_values(RunConfig& config, const RawValues& raw) {
  auto get = [&](const char* key) -> const std::string* {
    const auto it = raw.find(key);
    return it == raw.end() ? nullptr : &it->second;
  };
  if (auto v = get("items")) config.items = *v;
  if (auto v = get("queries")) config.queries = *v;
  if (auto v = get("relevance")) config.relevance = *v;
  if (auto v = get("sessions")) config.sessions = *v;
  if (auto v = get("pca-model")) config.pca_model = *v;
  if (auto v = get("components")) config.components = parse_number<std::size_t>("components", *v);
  if (auto v = get("measure")) config.measure = *v;
  if (auto v = get("pool-size")) config.pool_size = parse_number<std::size_t>("pool-size", *v);
  if (auto v = get("cutoffs")) config.cutoffs = parse_list<std::size_t>("cutoffs", *v);
  if (auto v = get("epsilon")) config.epsilon = parse_list<double>("epsilon", *v);
  if (auto v = get("sample-size")) config.sample_size = parse_number<std::uint64_t>("sample-size", *v);
  if (auto v = get("seed")) config.seed = parse_number<std::uint64_t>("seed", *v);
  if (auto v = get("resamples")) config.resamples = parse_number<std::size_t>("resamples", *v);
  if (auto v = get("workers")) config.workers = parse_number<std::size_t>("workers", *v);
  if (auto v = get("out")) config.out = *v;
  if (auto v = get("aggregator")) config.aggregator = *v;
  if (auto v = get("lambda")) config.lambda = parse_number<double>("lambda", *v);
  if (auto v = get("scope")) config.scope = *v;
  if (auto v = get("grid")) {
    if (*v == "auto") {
      config.grid.reset();
    } else {
      config.grid = parse_list<std::size_t>("grid", *v);
    }
  }
  if (auto v = get("metric")) config.metric = *v;
  if (auto v = get("to")) config.format = *v;
  if (auto v = get("center-only")) config.center_only = parse_bool("center-only", *v);
  if (auto v = get("include-history")) config.include_history = parse_bool("include-history", *v);
}

void validate(RunConfig& config) {
  parse_measure(config.measure);
  parse_aggregator(config.aggregator);
  if (config.scope != "full" && config.scope != "pool") {
    throw InputError("scope: expected full or pool, got '" + config.scope + "'");
  }
  if (config.pool_size < 1) throw InputError("pool-size: must be >= 1");
  if (config.workers < 1) throw InputError("workers: must be >= 1");
  if (config.sample_size < 2) throw InputError("sample-size: must be >= 2");
  if (!(config.lambda > 0.0 && config.lambda <= 1.0)) throw InputError("lambda: must lie in (0, 1]");
  for (std::size_t k : config.cutoffs) {
    if (k < 1) throw InputError("cutoffs: every cutoff must be >= 1");
  }
  if (config.epsilon.empty()) throw InputError("epsilon: at least one value required");
  for (double e : config.epsilon) {
    if (!(e > 0.0 && e <= 1.0)) throw InputError("epsilon: values must lie in (0, 1]");
  }
  if (config.components && *config.components < 1) throw InputError("components: must be >= 1");
  if (config.components && config.center_only) {
    throw InputError("components: cannot be combined with --center-only");
  }
  if (config.components && !config.pca_model) {
    throw InputError("pca-model: required with --components");
  }

  auto require = [&](const std::optional<std::string>& path, const char* field) {
    if (!path) throw InputError(std::string(field) + ": path required");
  };
  const std::string& cmd = config.command;
  if (cmd == "analyze") {
    require(config.items, "items");
  } else if (cmd == "eval-search") {
    require(config.items, "items");
    require(config.queries, "queries");
    require(config.relevance, "relevance");
  } else if (cmd == "eval-seq") {
    require(config.items, "items");
    require(config.sessions, "sessions");
  } else if (cmd == "sweep") {
    require(config.items, "items");
    if (!config.sessions) {
      require(config.queries, "queries");
      require(config.relevance, "relevance");
    }
  } else if (cmd == "compare") {
    if (config.inputs.size() != 2) throw InputError("compare: expected two per-unit report CSVs");
    if (config.resamples < 1000) throw InputError("resamples: must be >= 1000");
  } else if (cmd == "convert") {
    if (config.inputs.size() != 2) throw InputError("convert: expected input and output paths");
    if (config.format.empty()) {
      const auto ext = fs::path(config.inputs[1]).extension().string();
      config.format = (ext == ".tsv" || ext == ".txt") ? "tsv" : "evec";
    }
    if (config.format != "evec" && config.format != "tsv") {
      throw InputError("to: expected evec or tsv, got '" + config.format + "'");
    }
  }
  if (config.cutoffs.empty()) {
    const bool sequential = cmd == "eval-seq" || (cmd == "sweep" && config.sessions);
    config.cutoffs = sequential ? std::vector<std::size_t>{10, 50} : std::vector<std::size_t>{100};
  }

  // Every referenced input must exist before any computation starts.
  auto check = [](const std::optional<std::string>& path, const char* field) {
    if (path && !fs::is_regular_file(*path)) {
      throw InputError(std::string(field) + ": no such file " + *path);
    }
  };
  check(config.items, "items");
  check(config.queries, "queries");
  check(config.relevance, "relevance");
  check(config.sessions, "sessions");
  check(config.pca_model, "pca-model");
  const std::size_t positional_inputs = cmd == "convert" ? 1 : config.inputs.size();
  for (std::size_t i = 0; i < positional_inputs && i < config.inputs.size(); ++i) {
    check(config.inputs[i], cmd == "compare" ? (i == 0 ? "report_a" : "report_b") : "input");
  }
}

ordered_json provenance(const RunConfig& config) {
  ordered_json p;
  p["tool"] = kToolName;
  p["version"] = EMBEDGEOM_VERSION;
  p["seed"] = config.seed;
  p["config"] = config_echo(config);
  return p;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// Applies --pca-model/--components/--center-only to an embedding matrix.
struct EmbeddingTransform {
  std::optional<PcaModel> model;
  std::optional<std::vector<float>> mean;  // center-only without a model
  std::optional<std::size_t> components;
  bool center_only = false;

  EmbeddingMatrix operator()(const EmbeddingMatrix& m) const {
    if (components) return project(*model, m, *components);
    if (center_only) return model ? center(*model, m) : center(*mean, m);
    return m;
  }
};

EmbeddingTransform make_transform(const RunConfig& config, const EmbeddingMatrix& items) {
  EmbeddingTransform t;
  t.components = config.components;
  t.center_only = config.center_only;
  if (config.pca_model) t.model = load_pca(*config.pca_model);
  if (t.model && t.model->source_dim() != items.dim()) {
    throw InputError("pca-model: model expects d=" + std::to_string(t.model->source_dim()) +
                     ", items have d=" + std::to_string(items.dim()));
  }
  if (t.components && *t.components > t.model->rank()) {
    throw InputError("components: k=" + std::to_string(*t.components) + " exceeds model rank " +
                     std::to_string(t.model->rank()));
  }
  if (t.center_only && !t.model) t.mean = column_mean(items);
  return t;
}

void print_aggregates(std::ostream& out, const MetricReport& report) {
  for (const auto& name : ordered_metric_names(report)) {
    out << "  " << name << " = " << format_double(report.aggregates.at(name)) << "\n";
  }
}

int cmd_analyze(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const EmbeddingMatrix items = load_embeddings(*config.items, MatrixKind::Item);
  const PcaModel model = fit_pca(items, config.sample_size, config.seed);

  ordered_json warnings = ordered_json::array();
  const std::uint64_t used = model.sample_size();
  if (used < 10 * items.dim()) {
    const std::string w = "sample size n=" + std::to_string(used) + " is below 10*d=" +
                          std::to_string(10 * items.dim()) + "; principal directions may be noisy";
    warnings.push_back(w);
    err << "warning: " << w << "\n";
  }

  std::string csv = csv_preamble(provenance(config));
  csv += "component,eigenvalue,cumulative_ratio\n";
  for (std::size_t i = 0; i < model.rank(); ++i) {
    csv += std::to_string(i + 1) + "," + format_double(model.spectrum()[i]) + "," +
           format_double(model.cumulative_ratio()[i]) + "\n";
  }
  ordered_json report = provenance(config);
  report["rows"] = items.rows();
  report["source_dim"] = items.dim();
  report["sample_size"] = used;
  report["rank"] = model.rank();
  ordered_json dims = ordered_json::array();
  for (double eps : config.epsilon) {
    dims.push_back({{"epsilon", eps}, {"components", effective_dimension(model, eps)}});
  }
  report["effective_dimensions"] = dims;
  report["warnings"] = warnings;

  const fs::path dir = config.out;
  write_file_atomic(dir / "spectrum.csv", csv);
  write_file_atomic(dir / "analysis.json", dump(report));
  save_pca(dir / "model.epca", model);

  out << "rows=" << items.rows() << " d=" << items.dim() << " sample=" << used
      << " rank=" << model.rank() << "\n";
  for (const auto& entry : dims) {
    out << "  d(" << entry["epsilon"].dump() << ") = " << entry["components"].dump() << "\n";
  }
  return 0;
}

SearchConfig search_config(const RunConfig& config) {
  SearchConfig sc;
  sc.pool_size = config.pool_size;
  sc.measure = parse_measure(config.measure);
  sc.seed = config.seed;
  sc.cutoffs = config.cutoffs;
  sc.workers = config.workers;
  return sc;
}

SequentialConfig sequential_config(const RunConfig& config) {
  SequentialConfig sc;
  sc.aggregator.kind = parse_aggregator(config.aggregator);
  sc.aggregator.lambda = config.lambda;
  sc.measure = parse_measure(config.measure);
  sc.cutoffs = config.cutoffs;
  sc.scope = config.scope == "pool" ? CandidateScope::SampledPool : CandidateScope::FullCatalog;
  sc.pool_size = config.pool_size;
  sc.include_history = config.include_history;
  sc.seed = config.seed;
  sc.workers = config.workers;
  return sc;
}

void write_report(const RunConfig& config, const MetricReport& report, const char* unit_column,
                  const char* csv_name) {
  const ordered_json prov = provenance(config);
  ordered_json doc = prov;
  doc["report"] = report_json(report);
  const std::string csv = report_csv(report, unit_column, prov);
  const fs::path dir = config.out;
  write_file_atomic(dir / csv_name, csv);
  write_file_atomic(dir / "metrics.json", dump(doc));
}

int cmd_eval_search(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const EmbeddingMatrix items = load_embeddings(*config.items, MatrixKind::Item);
  const EmbeddingMatrix queries = load_embeddings(*config.queries, MatrixKind::Query);
  const RelevanceSet relevance = load_relevance(*config.relevance, items, queries);
  const EmbeddingTransform transform = make_transform(config, items);
  MetricReport report = evaluate_search(relevance, transform(queries), transform(items), search_config(config));
  report.system_label = fs::path(*config.items).stem().string();
  if (report.degenerate_scores) {
    err << "warning: " << report.degenerate_scores << " cosine scores involved a zero vector (scored 0)\n";
  }
  write_report(config, report, "query_id", "per_query.csv");
  out << "queries=" << report.unit_count() << "\n";
  print_aggregates(out, report);
  return 0;
}

int cmd_eval_seq(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const EmbeddingMatrix items = load_embeddings(*config.items, MatrixKind::Item);
  const SessionLog log = load_sessions(*config.sessions, items);
  const EmbeddingTransform transform = make_transform(config, items);
  MetricReport report = evaluate_sequential(log, transform(items), sequential_config(config));
  report.system_label = fs::path(*config.items).stem().string();
  if (report.degenerate_scores) {
    err << "warning: " << report.degenerate_scores << " cosine scores involved a zero vector (scored 0)\n";
  }
  write_report(config, report, "session_id", "per_session.csv");
  out << "sessions=" << report.unit_count() << "\n";
  print_aggregates(out, report);
  return 0;
}

int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream&) {
  const EmbeddingMatrix items = load_embeddings(*config.items, MatrixKind::Item);
  const PcaModel model =
      config.pca_model ? load_pca(*config.pca_model) : fit_pca(items, config.sample_size, config.seed);
  if (model.source_dim() != items.dim()) {
    throw InputError("pca-model: model expects d=" + std::to_string(model.source_dim()) +
                     ", items have d=" + std::to_string(items.dim()));
  }
  SweepSpec spec;
  spec.grid = config.grid;
  spec.epsilons = config.epsilon;
  spec.metric = config.metric;

  SweepCurve curve;
  if (config.sessions) {
    const SessionLog log = load_sessions(*config.sessions, items);
    curve = run_sequential_sweep(items, log, model, spec, sequential_config(config));
  } else {
    const EmbeddingMatrix queries = load_embeddings(*config.queries, MatrixKind::Query);
    const RelevanceSet relevance = load_relevance(*config.relevance, items, queries);
    curve = run_sweep(items, queries, relevance, model, spec, search_config(config));
  }
  const ordered_json prov = provenance(config);
  ordered_json doc = prov;
  doc["sweep"] = sweep_json(curve);
  const fs::path dir = config.out;
  write_file_atomic(dir / "sweep.csv", sweep_csv(curve, prov));
  write_file_atomic(dir / "sweep.json", dump(doc));

  out << "metric=" << curve.metric_name << " rank=" << curve.rank
      << " baseline=" << format_double(curve.baseline_metric) << " shape=" << to_string(curve.shape)
      << "\n";
  for (std::size_t i = 0; i < curve.component_grid.size(); ++i) {
    out << "  k=" << curve.component_grid[i] << " " << format_double(curve.metric_at_k[i]) << "\n";
  }
  return 0;
}

int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream&) {
  const MetricReport a = parse_report_csv(read_file(config.inputs[0]), config.inputs[0]);
  const MetricReport b = parse_report_csv(read_file(config.inputs[1]), config.inputs[1]);
  std::vector<std::string> metrics;
  if (!config.metric.empty()) {
    metrics.push_back(config.metric);
  } else {
    for (const auto& name : ordered_metric_names(a)) {
      if (b.aggregates.count(name)) metrics.push_back(name);
    }
    if (metrics.empty()) throw InputError("compare: reports share no metric columns");
  }
  ordered_json doc = provenance(config);
  doc["report_a"] = config.inputs[0];
  doc["report_b"] = config.inputs[1];
  ordered_json results = ordered_json::array();
  for (const auto& metric : metrics) {
    const SignificanceResult r = paired_significance(a, b, metric, config.resamples, config.seed);
    results.push_back(significance_json(r));
    out << metric << ": delta=" << format_double(r.mean_delta) << " p=" << format_double(r.p_value)
        << (r.p_value < 0.001 ? " *" : "") << "\n";
  }
  doc["results"] = results;
  write_file_atomic(fs::path(config.out) / "significance.json", dump(doc));
  return 0;
}

int cmd_convert(const RunConfig& config, std::ostream& out, std::ostream&) {
  const EmbeddingMatrix m = load_embeddings(config.inputs[0], MatrixKind::Item);
  write_embeddings(config.inputs[1], m,
                   config.format == "tsv" ? EmbeddingFormat::Tsv : EmbeddingFormat::Evec);
  out << "wrote " << m.rows() << " x " << m.dim() << " to " << config.inputs[1] << "\n";
  return 0;
}

}  // namespace

ordered_json config_echo(const RunConfig& config) {
  auto opt = [](const std::optional<std::string>& v) { return v ? ordered_json(*v) : ordered_json(); };
  ordered_json c;
  c["command"] = config.command;
  c["items"] = opt(config.items);
  c["queries"] = opt(config.queries);
  c["relevance"] = opt(config.relevance);
  c["sessions"] = opt(config.sessions);
  c["pca_model"] = opt(config.pca_model);
  c["components"] = config.components ? ordered_json(*config.components) : ordered_json();
  c["center_only"] = config.center_only;
  c["measure"] = config.measure;
  c["pool_size"] = config.pool_size;
  c["cutoffs"] = config.cutoffs;
  c["epsilon"] = config.epsilon;
  c["sample_size"] = config.sample_size;
  c["seed"] = config.seed;
  c["resamples"] = config.resamples;
  c["aggregator"] = config.aggregator;
  c["lambda"] = config.lambda;
  c["scope"] = config.scope;
  c["include_history"] = config.include_history;
  c["grid"] = config.grid ? ordered_json(*config.grid) : ordered_json("auto");
  c["metric"] = config.metric;
  if (!config.format.empty()) c["format"] = config.format;
  if (!config.inputs.empty()) c["inputs"] = config.inputs;
  return c;
}

RunConfig parse_run_config(const std::vector<std::string>& args) {
  CLI::App app{"Embedding geometry analysis and zero-shot retrieval evaluation", kToolName};
  app.require_subcommand(1);
  app.set_version_flag("--version", EMBEDGEOM_VERSION);

  const std::pair<const char*, const char*> commands[] = {
      {"analyze", "Fit PCA; write spectrum, effective dimensions and the EPCA model"},
      {"eval-search", "Evaluate product search against sampled candidate pools"},
      {"eval-seq", "Evaluate next-item recommendation with training-free aggregators"},
      {"sweep", "Evaluate across retained PCA component counts"},
      {"compare", "Paired sign-flip significance test between two per-unit CSVs"},
      {"convert", "Convert embeddings between TSV and EVEC"},
  };
  RawValues flag_values;
  std::map<std::string, bool> switch_values;
  std::string config_path;
  std::vector<std::string> positional;
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    subs.push_back(sub);
    for (const auto& opt : kValueOptions) {
      sub->add_option(std::string("--") + opt.name, flag_values[opt.name], opt.help);
    }
    for (const auto& opt : kFlagOptions) {
      sub->add_flag(std::string("--") + opt.name, switch_values[opt.name], opt.help);
    }
    sub->add_option("--config", config_path, "JSON config file; flags override its values");
    if (std::string_view(name) == "compare") {
      sub->add_option("reports", positional, "report_a.csv report_b.csv")->expected(2);
    } else if (std::string_view(name) == "convert") {
      sub->add_option("paths", positional, "input output")->expected(2);
    }
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::CallForVersion&) {
    throw HelpRequested{std::string(kToolName) + " " + EMBEDGEOM_VERSION + "\n"};
  } catch (const CLI::ParseError& e) {
    throw InputError(e.what());
  }

  CLI::App* chosen = nullptr;
  for (CLI::App* sub : subs) {
    if (sub->parsed()) chosen = sub;
  }
  RunConfig config;
  config.command = chosen->get_name();
  config.workers = default_workers();

  RawValues from_file;
  if (!config_path.empty()) {
    if (!fs::is_regular_file(config_path)) throw InputError("config: no such file " + config_path);
    from_file = load_config_file(config_path);
  }
  apply_values(config, from_file);
  if (!from_file.count("seed")) {
    if (const char* env = std::getenv(kSeedEnv); env && *env) {
      config.seed = parse_number<std::uint64_t>(kSeedEnv, env);
    }
  }
  RawValues from_flags;
  for (const auto& opt : kValueOptions) {
    if (chosen->count(std::string("--") + opt.name) > 0) from_flags[opt.name] = flag_values[opt.name];
  }
  for (const auto& opt : kFlagOptions) {
    if (chosen->count(std::string("--") + opt.name) > 0) {
      from_flags[opt.name] = switch_values[opt.name] ? "true" : "false";
    }
  }
  apply_values(config, from_flags);
  config.inputs = positional;
  validate(config);
  return config;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const std::string& cmd = config.command;
  if (cmd == "analyze") return cmd_analyze(config, out, err);
  if (cmd == "eval-search") return cmd_eval_search(config, out, err);
  if (cmd == "eval-seq") return cmd_eval_seq(config, out, err);
  if (cmd == "sweep") return cmd_sweep(config, out, err);
  if (cmd == "compare") return cmd_compare(config, out, err);
  if (cmd == "convert") return cmd_convert(config, out, err);
  throw InputError("unknown command " + cmd);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run(parse_run_config(args), out, err);
  } catch (const HelpRequested& help) {
    out << help.text;
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace embedgeom
