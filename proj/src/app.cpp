#include "omnibench/app.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "omnibench/corpus.hpp"
#include "omnibench/embedding.hpp"
#include "omnibench/error.hpp"
#include "omnibench/grader.hpp"
#include "omnibench/metrics.hpp"
#include "omnibench/profiler.hpp"
#include "omnibench/provider.hpp"
#include "omnibench/report.hpp"
#include "omnibench/runner.hpp"
#include "omnibench/testgen.hpp"

namespace omnibench::app {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

constexpr const char* kHashFingerprintPrefix = "hash-fnv1a64-signed/v1/dim=";
constexpr const char* kRemoteFingerprintPrefix = "remote/v1/model=";

ojson endpoint_defaults() {
  return {{"model", ""}, {"api_base", ""}, {"api_key", ""}, {"timeout_s", 120.0}};
}

ojson with(ojson base, const ojson& extra) {
  for (const auto& [k, v] : extra.items()) base[k] = v;
  return base;
}

// Overlays `user` on `defaults`. Keys absent from the defaults are rejected;
// nested objects merge recursively unless the default is an empty object
// (a free-form map such as caps).
void merge_into(ojson& target, const nlohmann::json& user, const std::string& path) {
  if (!user.is_object()) fail(ErrorKind::Config, (path.empty() ? "config" : path) + " must be a JSON object");
  for (const auto& [key, value] : user.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!target.contains(key)) fail(ErrorKind::Config, "unknown config key '" + where + "'");
    auto& slot = target[key];
    if (slot.is_object() && !slot.empty()) {
      merge_into(slot, value, where);
    } else {
      slot = value;
    }
  }
}

ojson effective(const std::string& stage, const nlohmann::json& user) {
  ojson cfg = defaults(stage);
  merge_into(cfg, user.is_null() ? nlohmann::json::object() : user, "");
  return cfg;
}

template <typename T>
T get(const ojson& cfg, const std::string& key) {
  const auto it = cfg.find(key);
  if (it == cfg.end() || it->is_null()) fail(ErrorKind::Config, "missing required config key '" + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::Config, "config key '" + key + "' has the wrong type");
  }
}

std::string required_path(const ojson& cfg, const std::string& key) {
  auto value = get<std::string>(cfg, key);
  if (value.empty()) fail(ErrorKind::Config, "config key '" + key + "' must not be empty");
  return value;
}

ojson redacted(ojson cfg) {
  for (auto& [key, value] : cfg.items()) {
    if (value.is_object()) {
      value = redacted(value);
    } else if (key == "api_key" && value.is_string() && !value.get<std::string>().empty()) {
      value = "<redacted>";
    }
  }
  return cfg;
}

std::string env_or(const char* name, const std::string& fallback) {
  if (!fallback.empty()) return fallback;
  const char* v = std::getenv(name);
  return v ? v : "";
}

http::Endpoint endpoint_from(const ojson& section) {
  http::Endpoint e;
  e.base_url = env_or("OMNIBENCH_API_BASE", get<std::string>(section, "api_base"));
  e.api_key = env_or("OMNIBENCH_API_KEY", get<std::string>(section, "api_key"));
  e.timeout_s = get<double>(section, "timeout_s");
  if (!(e.timeout_s > 0)) fail(ErrorKind::Config, "timeout_s must be positive");
  return e;
}

std::unique_ptr<embedding::Embedder> make_embedder(const ojson& section, const std::string& kb_fingerprint = {}) {
  std::string kind = get<std::string>(section, "kind");
  auto dim = get<std::size_t>(section, "dim");
  std::string model = get<std::string>(section, "model");
  if (kind == "auto") {
    if (kb_fingerprint.rfind(kHashFingerprintPrefix, 0) == 0) {
      kind = "hash";
      dim = std::stoul(kb_fingerprint.substr(std::string(kHashFingerprintPrefix).size()));
    } else if (kb_fingerprint.rfind(kRemoteFingerprintPrefix, 0) == 0) {
      kind = "remote";
      if (model.empty()) model = kb_fingerprint.substr(std::string(kRemoteFingerprintPrefix).size());
    } else {
      fail(ErrorKind::Config, "cannot infer an embedder from knowledge base fingerprint '" + kb_fingerprint + "'");
    }
  }
  if (kind == "hash") return std::make_unique<embedding::HashEmbedder>(dim == 0 ? 256 : dim);
  if (kind == "remote") return std::make_unique<embedding::RemoteEmbedder>(endpoint_from(section), model, dim);
  fail(ErrorKind::Config, "embedder.kind must be 'hash', 'remote' or 'auto', got '" + kind + "'");
}

std::string read_text(const std::string& path, ErrorKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(kind, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

metrics::Weights weights_from(const ojson& cfg, std::vector<std::string>& notices) {
  const auto& w = cfg.at("weights");
  metrics::Weights out{get<double>(w, "w_time"), get<double>(w, "w_gpu"), get<double>(w, "w_mem")};
  try {
    if (auto warning = out.validate()) notices.push_back(*warning);
  } catch (const Error& e) {
    fail(ErrorKind::Config, e.what());
  }
  return out;
}

runner::RatioMode ratio_mode_from(const ojson& cfg) {
  const auto mode = get<std::string>(cfg, "ratio_mode");
  if (mode == "ratio-of-means") return runner::RatioMode::RatioOfMeans;
  if (mode == "mean-of-ratios") return runner::RatioMode::MeanOfRatios;
  fail(ErrorKind::Config, "ratio_mode must be 'ratio-of-means' or 'mean-of-ratios'");
}

report::Row to_row(const runner::ScopeResult& s) { return {s.scope, s.base, s.rag, s.report}; }

ojson weights_json(const metrics::Weights& w) {
  return {{"w_time", w.w_time}, {"w_gpu", w.w_gpu}, {"w_mem", w.w_mem}};
}

// Writes report.csv/json and radar.json/svg; returns the file list and notices.
ojson write_reports(const fs::path& dir, const runner::SuiteResult& result, ojson report_meta) {
  report::ReportBundle bundle;
  for (const auto& d : result.domains) bundle.rows.push_back(to_row(d));
  if (result.overall) bundle.overall = to_row(*result.overall);
  report_meta["notices"] = result.notices;
  bundle.meta = std::move(report_meta);

  ojson files = ojson::array();
  write_text(dir / "report.csv", report::emit_table(bundle));
  write_text(dir / "report.json", report::emit_json(bundle));
  files.push_back("report.csv");
  files.push_back("report.json");
  const auto radar = report::emit_radar(bundle);
  write_text(dir / "radar.json", radar.json);
  files.push_back("radar.json");
  std::error_code ec;
  fs::remove(dir / "radar.svg", ec);
  if (radar.svg) {
    write_text(dir / "radar.svg", *radar.svg);
    files.push_back("radar.svg");
  }

  ojson summary;
  summary["out_dir"] = dir.string();
  summary["files"] = files;
  summary["domains"] = result.domains.size();
  if (result.overall) {
    const auto& o = *result.overall;
    summary["overall"] = {{"S_base", o.base.S},
                          {"S_rag", o.rag.S},
                          {"improvements", o.report.improvements},
                          {"transformation", o.report.transformation ? ojson(*o.report.transformation) : ojson()},
                          {"n", o.base.n}};
  } else {
    summary["overall"] = nullptr;
  }
  ojson notices = result.notices;
  for (const auto& n : radar.notices) notices.push_back(n);
  summary["notices"] = notices;
  summary["table"] = report::emit_table(bundle);
  return summary;
}

}  // namespace

ojson defaults(const std::string& stage) {
  if (stage == "kb") {
    return {{"manifest", nullptr},
            {"out", nullptr},
            {"chunk_size", 256},
            {"chunk_overlap", 32},
            {"embedder", with({{"kind", "hash"}, {"dim", 256}}, endpoint_defaults())}};
  }
  if (stage == "gen") {
    return {{"triples", nullptr},
            {"relations", nullptr},
            {"out", nullptr},
            {"domain", "Geography"},
            {"patterns", {"direct", "negation", "inverse", "symmetric", "transitive", "composite"}},
            {"caps", ojson::object()},
            {"cap", nullptr},
            {"seed", 42},
            {"max_depth", 8},
            {"rules", {"symmetric", "inverse", "transitive", "composite"}},
            {"inverse_relations", ojson::array()}};
  }
  if (stage == "eval") {
    const runner::PromptTemplates templates;
    return {{"dataset", nullptr},
            {"kb", nullptr},
            {"out_dir", nullptr},
            {"top_k", 5},
            {"seed", 42},
            {"shuffle", false},
            {"order", "base-first"},
            {"ratio_mode", "ratio-of-means"},
            {"skip_failures", false},
            {"weights", {{"w_time", 0.4}, {"w_gpu", 0.3}, {"w_mem", 0.3}}},
            {"templates", {{"system", templates.system}, {"base", templates.base}, {"rag", templates.rag}}},
            {"provider", with({{"kind", "remote"},
                               {"mock_script", ""},
                               {"max_tokens", 256},
                               {"temperature", 0.0}},
                              endpoint_defaults())},
            {"embedder", with({{"kind", "auto"}, {"dim", 0}}, endpoint_defaults())},
            {"grader", with({{"kind", "lexical"}, {"lexicon", ""}}, endpoint_defaults())},
            {"profiler", {{"sample_ms", 50}, {"gpu_command", "auto"}, {"clock", "steady"},
                          {"memory_probe", "rss"}, {"fixed_mem_mb", 0.0}}}};
  }
  if (stage == "report") {
    return {{"run_dir", nullptr},
            {"out_dir", ""},
            {"weights", {{"w_time", 0.4}, {"w_gpu", 0.3}, {"w_mem", 0.3}}},
            {"ratio_mode", "ratio-of-means"},
            {"skip_failures", false}};
  }
  fail(ErrorKind::Argument, "unknown stage '" + stage + "'");
}

vindex::KnowledgeBase build_kb(const nlohmann::json& config, ojson& summary) {
  const ojson cfg = effective("kb", config);
  corpus::ChunkConfig chunking{get<std::size_t>(cfg, "chunk_size"), get<std::size_t>(cfg, "chunk_overlap")};
  corpus::validate(chunking);
  const auto embedder = make_embedder(cfg.at("embedder"));

  const auto docs = corpus::load_manifest(required_path(cfg, "manifest"));
  if (docs.empty()) fail(ErrorKind::Ingestion, "corpus manifest lists no documents");
  std::vector<corpus::Chunk> chunks;
  std::map<std::string, std::size_t> per_domain;
  for (const auto& doc : docs) {
    auto doc_chunks = corpus::chunk(doc, chunking);
    per_domain[std::string(corpus::to_string(doc.domain))] += doc_chunks.size();
    chunks.insert(chunks.end(), std::make_move_iterator(doc_chunks.begin()), std::make_move_iterator(doc_chunks.end()));
  }
  auto kb = vindex::build(chunks, *embedder);

  summary = ojson::object();
  summary["documents"] = docs.size();
  summary["chunks"] = kb.size();
  summary["dim"] = kb.dim();
  summary["fingerprint"] = kb.fingerprint();
  summary["chunks_per_domain"] = per_domain;
  summary["config"] = redacted(cfg);
  return kb;
}

ojson generate(const nlohmann::json& config) {
  const ojson cfg = effective("gen", config);

  testgen::GenerateOptions options;
  options.patterns.clear();
  for (const auto& name : get<std::vector<std::string>>(cfg, "patterns")) {
    const auto p = testgen::parse_pattern(name);
    if (!p) {
      fail(ErrorKind::Config, "unknown pattern '" + name +
                                  "' (valid: direct, negation, inverse, symmetric, transitive, composite)");
    }
    options.patterns.insert(*p);
  }
  if (!cfg.at("cap").is_null()) {
    const auto cap = get<std::size_t>(cfg, "cap");
    for (auto p : options.patterns) options.caps[p] = cap;
  }
  for (const auto& [name, value] : cfg.at("caps").items()) {
    const auto p = testgen::parse_pattern(name);
    if (!p) fail(ErrorKind::Config, "caps: unknown pattern '" + name + "'");
    if (!value.is_number_integer() || value.get<long long>() < 0) {
      fail(ErrorKind::Config, "caps." + name + " must be a nonnegative integer");
    }
    options.caps[*p] = value.get<std::size_t>();
  }
  options.seed = get<std::uint64_t>(cfg, "seed");
  options.domain = corpus::parse_domain_or_throw(get<std::string>(cfg, "domain"));

  testgen::DeriveOptions derive;
  derive.max_depth = get<std::size_t>(cfg, "max_depth");
  derive.rules.clear();
  for (const auto& name : get<std::vector<std::string>>(cfg, "rules")) {
    bool found = false;
    for (auto r : {testgen::Rule::Symmetric, testgen::Rule::Inverse, testgen::Rule::Transitive, testgen::Rule::Composite}) {
      if (testgen::to_string(r) == name) {
        derive.rules.insert(r);
        found = true;
      }
    }
    if (!found) fail(ErrorKind::Config, "unknown rule '" + name + "' (valid: symmetric, inverse, transitive, composite)");
  }
  derive.inverse_relations = get<std::vector<std::string>>(cfg, "inverse_relations");

  const std::string out = required_path(cfg, "out");
  const auto rules = testgen::load_rules(required_path(cfg, "relations"));
  const auto loaded = testgen::load_triples(required_path(cfg, "triples"), rules);
  const auto closure = testgen::derive(loaded.triples, rules, derive);
  const auto items = testgen::generate_qa(closure, rules, options);
  write_text(out, testgen::dump_dataset(items));

  ojson counts = ojson::object();
  for (auto p : testgen::kAllPatterns) {
    if (!options.patterns.contains(p)) continue;
    std::size_t n = 0;
    for (const auto& item : items) n += item.pattern == p ? 1 : 0;
    counts[std::string(testgen::to_string(p))] = n;
  }
  ojson summary;
  summary["out"] = out;
  summary["seed_facts"] = loaded.triples.size();
  summary["duplicates_dropped"] = loaded.duplicates_dropped;
  summary["closure_facts"] = closure.size();
  summary["derived_facts"] = closure.size() - loaded.triples.size();
  summary["items"] = items.size();
  summary["per_pattern"] = counts;
  summary["config"] = cfg;
  return summary;
}

ojson evaluate(const nlohmann::json& config) {
  const ojson cfg = effective("eval", config);
  const std::string started = utc_now();

  const auto top_k = get<std::size_t>(cfg, "top_k");
  if (top_k == 0) fail(ErrorKind::Config, "top_k must be at least 1");
  runner::RunOptions options;
  options.top_k = top_k;
  options.seed = get<std::uint64_t>(cfg, "seed");
  options.shuffle = get<bool>(cfg, "shuffle");
  const auto order = get<std::string>(cfg, "order");
  if (order != "base-first" && order != "rag-first") fail(ErrorKind::Config, "order must be 'base-first' or 'rag-first'");
  options.order = order == "base-first" ? runner::Order::BaseFirst : runner::Order::RagFirst;
  options.ratio_mode = ratio_mode_from(cfg);
  options.skip_failures = get<bool>(cfg, "skip_failures");
  std::vector<std::string> setup_notices;
  options.weights = weights_from(cfg, setup_notices);
  const auto& tmpl = cfg.at("templates");
  options.templates = {get<std::string>(tmpl, "system"), get<std::string>(tmpl, "base"), get<std::string>(tmpl, "rag")};
  options.templates.validate();
  const auto& prov = cfg.at("provider");
  options.max_tokens = get<int>(prov, "max_tokens");
  if (options.max_tokens <= 0) fail(ErrorKind::Config, "provider.max_tokens must be positive");
  options.temperature = get<double>(prov, "temperature");
  if (options.temperature < 0) fail(ErrorKind::Config, "provider.temperature must be nonnegative");
  options.model_id = get<std::string>(prov, "model");

  const auto& prof = cfg.at("profiler");
  const auto clock_kind = get<std::string>(prof, "clock");
  if (clock_kind != "steady" && clock_kind != "virtual") fail(ErrorKind::Config, "profiler.clock must be 'steady' or 'virtual'");
  const auto memory_kind = get<std::string>(prof, "memory_probe");
  if (memory_kind != "rss" && memory_kind != "fixed") fail(ErrorKind::Config, "profiler.memory_probe must be 'rss' or 'fixed'");
  const auto provider_kind = get<std::string>(prov, "kind");
  if (provider_kind != "mock" && provider_kind != "remote") fail(ErrorKind::Config, "provider.kind must be 'mock' or 'remote'");
  if (clock_kind == "virtual" && provider_kind != "mock") {
    fail(ErrorKind::Config, "the virtual clock only makes sense with the mock provider");
  }

  const fs::path out_dir = required_path(cfg, "out_dir");
  const std::string kb_path = required_path(cfg, "kb");
  const std::string dataset_path = required_path(cfg, "dataset");
  if (!fs::exists(kb_path)) fail(ErrorKind::Config, "knowledge base not found: " + kb_path);

  const auto kb = vindex::load(kb_path);
  const auto items = testgen::load_dataset(dataset_path);
  if (items.empty()) fail(ErrorKind::Ingestion, "dataset " + dataset_path + " has no items");
  const auto embedder = make_embedder(cfg.at("embedder"), kb.fingerprint());

  std::shared_ptr<Clock> clock;
  if (clock_kind == "virtual") {
    clock = std::make_shared<ManualClock>();
  } else {
    clock = std::make_shared<SteadyClock>();
  }

  std::unique_ptr<provider::Provider> provider;
  if (provider_kind == "mock") {
    const auto script = get<std::string>(prov, "mock_script");
    if (script.empty()) fail(ErrorKind::Config, "provider.mock_script is required for the mock provider");
    provider = provider::MockProvider::from_file(script, clock);
  } else {
    provider = std::make_unique<provider::RemoteProvider>(endpoint_from(prov), get<std::string>(prov, "model"));
  }

  const auto& grad = cfg.at("grader");
  grader::Lexicon lexicon;
  if (const auto path = get<std::string>(grad, "lexicon"); !path.empty()) {
    lexicon = grader::Lexicon::from_json(read_text(path, ErrorKind::Config));
  }
  std::unique_ptr<grader::Grader> grader;
  const auto grader_kind = get<std::string>(grad, "kind");
  if (grader_kind == "lexical") {
    grader = std::make_unique<grader::LexicalGrader>(lexicon);
  } else if (grader_kind == "remote") {
    auto classifier = std::make_shared<provider::RemoteProvider>(endpoint_from(grad), get<std::string>(grad, "model"));
    grader = std::make_unique<grader::RemoteGrader>(classifier, lexicon);
  } else {
    fail(ErrorKind::Config, "grader.kind must be 'lexical' or 'remote'");
  }

  std::unique_ptr<profiler::MemoryProbe> memory;
  if (memory_kind == "fixed") {
    const double mb = get<double>(prof, "fixed_mem_mb");
    if (!(mb > 0)) fail(ErrorKind::Config, "profiler.fixed_mem_mb must be positive");
    memory = std::make_unique<profiler::FixedMemoryProbe>(mb);
  } else {
    memory = std::make_unique<profiler::ProcessRssProbe>();
  }
  std::string gpu_command = get<std::string>(prof, "gpu_command");
  if (gpu_command == "auto") {
    gpu_command = std::system("command -v nvidia-smi >/dev/null 2>&1") == 0 ? profiler::kDefaultGpuCommand : "";
    if (gpu_command.empty()) setup_notices.push_back("no GPU probe available; GPU ratio falls back to 1 (flagged)");
  }
  std::unique_ptr<profiler::GpuProbe> gpu;
  if (!gpu_command.empty()) gpu = std::make_unique<profiler::CommandGpuProbe>(gpu_command);
  const double interval_s = clock_kind == "virtual" ? 0.0 : get<double>(prof, "sample_ms") / 1000.0;
  profiler::Profiler profiler(clock, std::move(memory), std::move(gpu), interval_s);

  runner::Runner runner(*provider, *grader, profiler, embedder.get(), &kb, options);
  auto result = runner.run_suite(items);
  std::sort(result.notices.begin(), result.notices.end());
  result.notices.erase(std::unique(result.notices.begin(), result.notices.end()), result.notices.end());
  result.notices.insert(result.notices.begin(), setup_notices.begin(), setup_notices.end());

  fs::create_directories(out_dir);
  std::string log;
  for (const auto& run : result.runs) log += runner::to_json(run).dump() + "\n";
  write_text(out_dir / "questions.jsonl", log);

  ojson report_meta;
  report_meta["tool_version"] = kVersion;
  report_meta["dataset"] = dataset_path;
  report_meta["questions"] = items.size();
  report_meta["kb"] = kb_path;
  report_meta["kb_entries"] = kb.size();
  report_meta["embedder"] = embedder->fingerprint();
  report_meta["provider"] = provider->id();
  report_meta["grader"] = grader->id();
  report_meta["top_k"] = options.top_k;
  report_meta["seed"] = options.seed;
  report_meta["weights"] = weights_json(options.weights);
  report_meta["aggregation"] = options.ratio_mode == runner::RatioMode::RatioOfMeans ? "ratio-of-means" : "mean-of-ratios";
  report_meta["skip_failures"] = options.skip_failures;
  report_meta["order"] = order;
  report_meta["clock"] = clock_kind;
  report_meta["gpu_probe"] = gpu_command.empty() ? ojson(nullptr) : ojson(gpu_command);
  report_meta["rag_latency_scope"] = "embed+search+generate";

  ojson run_meta;
  run_meta["tool_version"] = kVersion;
  run_meta["started_at"] = started;
  run_meta["finished_at"] = utc_now();
  run_meta["config"] = redacted(cfg);
  run_meta["report_meta"] = report_meta;
  write_text(out_dir / "run_meta.json", run_meta.dump(2) + "\n");

  auto summary = write_reports(out_dir, result, report_meta);
  summary["files"].insert(summary["files"].begin(), {"questions.jsonl", "run_meta.json"});
  return summary;
}

ojson rerender(const nlohmann::json& config) {
  const ojson cfg = effective("report", config);
  const fs::path run_dir = required_path(cfg, "run_dir");
  fs::path out_dir = get<std::string>(cfg, "out_dir");
  if (out_dir.empty()) out_dir = run_dir;

  runner::RunOptions options;
  std::vector<std::string> setup_notices;
  options.weights = weights_from(cfg, setup_notices);
  options.ratio_mode = ratio_mode_from(cfg);
  options.skip_failures = get<bool>(cfg, "skip_failures");

  const auto log_path = run_dir / "questions.jsonl";
  if (!fs::exists(log_path)) fail(ErrorKind::Config, "no questions.jsonl in " + run_dir.string());
  std::vector<runner::QuestionRun> runs;
  std::istringstream lines(read_text(log_path.string(), ErrorKind::Ingestion));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      runs.push_back(runner::question_run_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Ingestion, log_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      fail(ErrorKind::Ingestion, log_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (runs.empty()) fail(ErrorKind::Ingestion, log_path.string() + " is empty");

  ojson report_meta = ojson::object();
  if (fs::exists(run_dir / "run_meta.json")) {
    try {
      const auto meta = ojson::parse(read_text((run_dir / "run_meta.json").string(), ErrorKind::Ingestion));
      if (meta.contains("report_meta")) report_meta = meta["report_meta"];
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Ingestion, "run_meta.json: " + std::string(e.what()));
    }
  }
  report_meta["weights"] = weights_json(options.weights);
  report_meta["aggregation"] = options.ratio_mode == runner::RatioMode::RatioOfMeans ? "ratio-of-means" : "mean-of-ratios";
  report_meta["skip_failures"] = options.skip_failures;

  auto result = runner::aggregate(std::move(runs), options);
  result.notices.insert(result.notices.begin(), setup_notices.begin(), setup_notices.end());
  fs::create_directories(out_dir);
  return write_reports(out_dir, result, report_meta);
}

}  // namespace omnibench::app
