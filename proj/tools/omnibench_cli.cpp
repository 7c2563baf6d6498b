// omnibench command-line driver. Links only the C API.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "omnibench/omnibench.h"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitGate = 5;

struct Failure {
  int code;
  std::string message;
};

std::string take(char* s) {
  std::string out = s ? s : "";
  ob_free_string(s);
  return out;
}

void check(ob_status st) {
  if (st != OB_OK) {
    throw Failure{ob_exit_code(st), std::string("error (") + ob_status_name(st) + "): " + ob_last_error()};
  }
}

json load_section(const std::string& path, const std::string& section) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw Failure{2, "error (config): cannot open config file " + path};
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Failure{2, "error (config): " + path + ": " + e.what()};
  }
  if (!doc.is_object()) throw Failure{2, "error (config): " + path + " must hold a JSON object"};
  for (const auto& [key, value] : doc.items()) {
    if (key != "kb" && key != "gen" && key != "eval" && key != "report") {
      throw Failure{2, "error (config): unknown config section '" + key + "' (valid: kb, gen, eval, report)"};
    }
  }
  return doc.contains(section) ? doc[section] : json::object();
}

void set_path(json& cfg, const std::string& dotted, json value) {
  json* node = &cfg;
  std::size_t start = 0;
  for (;;) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

void apply_env(json& cfg, const std::vector<std::string>& sections) {
  for (const auto& [var, key] : {std::pair{"OMNIBENCH_API_BASE", "api_base"}, std::pair{"OMNIBENCH_API_KEY", "api_key"}}) {
    const char* v = std::getenv(var);
    if (!v || !*v) continue;
    for (const auto& s : sections) set_path(cfg, s + "." + key, v);
  }
}

// Flag values collected during parsing; applied on top of file and env.
class Overrides {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto holder = std::make_shared<T>();
    auto* opt = app->add_option(flag, *holder, help);
    entries_.push_back({opt, [holder, key](json& cfg) { set_path(cfg, key, *holder); }});
    return opt;
  }

  CLI::Option* add_flag(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto holder = std::make_shared<bool>(false);
    auto* opt = app->add_flag(flag, *holder, help);
    entries_.push_back({opt, [holder, key](json& cfg) { set_path(cfg, key, *holder); }});
    return opt;
  }

  CLI::Option* add_custom(CLI::Option* opt, std::function<void(json&)> apply) {
    entries_.push_back({opt, std::move(apply)});
    return opt;
  }

  void apply(json& cfg) const {
    for (const auto& e : entries_) {
      if (e.option->count() > 0) e.apply(cfg);
    }
  }

 private:
  struct Entry {
    CLI::Option* option;
    std::function<void(json&)> apply;
  };
  std::vector<Entry> entries_;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void add_weight_flags(CLI::App* cmd, Overrides& o) {
  o.add<double>(cmd, "--w-time", "weights.w_time", "Transformation weight on the latency ratio (default 0.4)");
  o.add<double>(cmd, "--w-gpu", "weights.w_gpu", "Transformation weight on the GPU memory ratio (default 0.3)");
  o.add<double>(cmd, "--w-mem", "weights.w_mem", "Transformation weight on the RAM ratio (default 0.3)");
  o.add<std::string>(cmd, "--ratio-mode", "ratio_mode", "ratio-of-means | mean-of-ratios")
      ->check(CLI::IsMember({"ratio-of-means", "mean-of-ratios"}));
  o.add_flag(cmd, "--skip-failures", "skip_failures", "Drop failed runs instead of counting them incorrect");
}

void print_notices(const json& summary) {
  if (!summary.contains("notices")) return;
  for (const auto& n : summary["notices"]) std::fprintf(stderr, "notice: %s\n", n.get<std::string>().c_str());
}

int cmd_kb_build(const std::string& config_path, const Overrides& o) {
  json cfg = load_section(config_path, "kb");
  apply_env(cfg, {"embedder"});
  o.apply(cfg);
  if (!cfg.contains("out") || !cfg["out"].is_string() || cfg["out"].get<std::string>().empty()) {
    throw Failure{2, "error (config): an output path is required (--out)"};
  }
  const std::string out = cfg["out"];

  ob_kb* kb = nullptr;
  char* summary_text = nullptr;
  check(ob_kb_build(cfg.dump().c_str(), &kb, &summary_text));
  const json summary = json::parse(take(summary_text));
  const ob_status st = ob_kb_save(kb, out.c_str());
  ob_kb_destroy(kb);
  check(st);
  std::printf("documents: %zu\nchunks: %zu\ndim: %zu\nfingerprint: %s\nwrote: %s\n",
              summary["documents"].get<std::size_t>(), summary["chunks"].get<std::size_t>(),
              summary["dim"].get<std::size_t>(), summary["fingerprint"].get<std::string>().c_str(), out.c_str());
  return 0;
}

int cmd_generate(const std::string& config_path, const Overrides& o) {
  json cfg = load_section(config_path, "gen");
  o.apply(cfg);
  char* summary_text = nullptr;
  check(ob_generate(cfg.dump().c_str(), &summary_text));
  const json summary = json::parse(take(summary_text));
  std::printf("seed facts: %zu (duplicates dropped: %zu)\nclosure facts: %zu\nitems: %zu\n",
              summary["seed_facts"].get<std::size_t>(), summary["duplicates_dropped"].get<std::size_t>(),
              summary["closure_facts"].get<std::size_t>(), summary["items"].get<std::size_t>());
  for (const auto& [pattern, n] : summary["per_pattern"].items()) {
    std::printf("  %s: %zu\n", pattern.c_str(), n.get<std::size_t>());
  }
  std::printf("wrote: %s\n", summary["out"].get<std::string>().c_str());
  return 0;
}

int print_report_summary(const json& summary, std::optional<double> fail_below) {
  print_notices(summary);
  std::printf("%s", summary["table"].get<std::string>().c_str());
  std::printf("wrote:");
  for (const auto& f : summary["files"]) std::printf(" %s", f.get<std::string>().c_str());
  std::printf(" (in %s)\n", summary["out_dir"].get<std::string>().c_str());
  if (fail_below) {
    const auto& overall = summary["overall"];
    const double s_rag = overall.is_null() ? 0.0 : overall["S_rag"].get<double>();
    if (s_rag < *fail_below) {
      std::fprintf(stderr, "gate: overall S_rag %.4f is below %.4f\n", s_rag, *fail_below);
      return kExitGate;
    }
  }
  return 0;
}

int cmd_eval(const std::string& config_path, const Overrides& o, std::optional<double> fail_below) {
  json cfg = load_section(config_path, "eval");
  apply_env(cfg, {"provider", "embedder", "grader"});
  o.apply(cfg);
  char* summary_text = nullptr;
  check(ob_eval(cfg.dump().c_str(), &summary_text));
  return print_report_summary(json::parse(take(summary_text)), fail_below);
}

int cmd_report(const std::string& config_path, const Overrides& o, std::optional<double> fail_below) {
  json cfg = load_section(config_path, "report");
  o.apply(cfg);
  char* summary_text = nullptr;
  check(ob_report(cfg.dump().c_str(), &summary_text));
  return print_report_summary(json::parse(take(summary_text)), fail_below);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-track (base vs retrieval-augmented) LLM benchmark harness"};
  app.set_version_flag("--version", ob_version());
  app.require_subcommand(1);

  std::string config_path;
  const auto config_help = "JSON config file with kb/gen/eval/report sections";

  // kb build
  Overrides kb_o;
  auto* kb = app.add_subcommand("kb", "Knowledge base operations");
  kb->require_subcommand(1);
  auto* kb_build = kb->add_subcommand("build", "Chunk and embed a corpus into a knowledge base file");
  kb_build->add_option("--config", config_path, config_help);
  kb_o.add<std::string>(kb_build, "--manifest", "manifest", "Corpus manifest JSON");
  kb_o.add<std::string>(kb_build, "--out", "out", "Output KB path (sidecar written next to it)");
  kb_o.add<std::size_t>(kb_build, "--chunk-size", "chunk_size", "Tokens per chunk (default 256)");
  kb_o.add<std::size_t>(kb_build, "--chunk-overlap", "chunk_overlap", "Tokens shared by neighbouring chunks (default 32)");
  kb_o.add<std::string>(kb_build, "--embedder", "embedder.kind", "hash | remote")
      ->check(CLI::IsMember({"hash", "remote"}));
  kb_o.add<std::size_t>(kb_build, "--dim", "embedder.dim", "Embedding dimension (hash default 256)");
  kb_o.add<std::string>(kb_build, "--embed-model", "embedder.model", "Remote embedding model");
  kb_o.add<std::string>(kb_build, "--api-base", "embedder.api_base", "Remote API base URL");
  kb_o.add<double>(kb_build, "--timeout", "embedder.timeout_s", "Remote request timeout, seconds");

  // gen
  Overrides gen_o;
  auto* gen = app.add_subcommand("gen", "Derive facts and generate a Yes/No QA dataset");
  gen->add_option("--config", config_path, config_help);
  gen_o.add<std::string>(gen, "--triples", "triples", "Seed triples TSV");
  gen_o.add<std::string>(gen, "--relations", "relations", "Relation metadata JSON");
  gen_o.add<std::string>(gen, "--out", "out", "Output dataset JSON");
  gen_o.add<std::string>(gen, "--domain", "domain", "Domain tag for generated items");
  gen_o.add<std::uint64_t>(gen, "--seed", "seed", "Sampling seed (default 42)");
  gen_o.add<std::size_t>(gen, "--max-depth", "max_depth", "Derivation rounds (default 8)");
  gen_o.add<std::size_t>(gen, "--cap", "cap", "Maximum items per pattern");
  {
    auto patterns = std::make_shared<std::string>();
    gen_o.add_custom(gen->add_option("--patterns", *patterns, "Comma-separated patterns"),
                     [patterns](json& cfg) { cfg["patterns"] = split_list(*patterns); });
    auto rules = std::make_shared<std::string>();
    gen_o.add_custom(gen->add_option("--rules", *rules, "Comma-separated derivation rules"),
                     [rules](json& cfg) { cfg["rules"] = split_list(*rules); });
    auto inverse = std::make_shared<std::string>();
    gen_o.add_custom(gen->add_option("--inverse-relations", *inverse, "Relations the inverse rule applies to"),
                     [inverse](json& cfg) { cfg["inverse_relations"] = split_list(*inverse); });
    auto caps = std::make_shared<std::vector<std::string>>();
    gen_o.add_custom(gen->add_option("--pattern-cap", *caps, "Per-pattern cap as pattern=N (repeatable)"),
                     [caps](json& cfg) {
                       for (const auto& c : *caps) {
                         const auto eq = c.find('=');
                         if (eq == std::string::npos) throw Failure{2, "error (config): --pattern-cap expects pattern=N"};
                         try {
                           cfg["caps"][c.substr(0, eq)] = std::stoull(c.substr(eq + 1));
                         } catch (const std::logic_error&) {
                           throw Failure{2, "error (config): bad --pattern-cap '" + c + "'"};
                         }
                       }
                     });
  }

  // eval
  Overrides eval_o;
  std::optional<double> fail_below;
  auto* eval = app.add_subcommand("eval", "Run the base and retrieval-augmented tracks and write reports");
  eval->add_option("--config", config_path, config_help);
  eval_o.add<std::string>(eval, "--dataset", "dataset", "QA dataset JSON");
  eval_o.add<std::string>(eval, "--kb", "kb", "Knowledge base file");
  eval_o.add<std::string>(eval, "--out-dir", "out_dir", "Directory for logs and reports");
  eval_o.add<std::size_t>(eval, "--top-k", "top_k", "Chunks retrieved per question (default 5)");
  eval_o.add<std::uint64_t>(eval, "--seed", "seed", "Run seed (default 42)");
  eval_o.add_flag(eval, "--shuffle", "shuffle", "Execute items in a seed-shuffled order");
  eval_o.add<std::string>(eval, "--interleave-order", "order", "base-first | rag-first")
      ->check(CLI::IsMember({"base-first", "rag-first"}));
  add_weight_flags(eval, eval_o);
  eval_o.add<std::string>(eval, "--provider", "provider.kind", "mock | remote")
      ->check(CLI::IsMember({"mock", "remote"}));
  eval_o.add<std::string>(eval, "--mock-script", "provider.mock_script", "Mock provider script JSON");
  eval_o.add<std::string>(eval, "--model", "provider.model", "Model id sent to the provider");
  eval_o.add<std::string>(eval, "--api-base", "provider.api_base", "Remote API base URL");
  eval_o.add<double>(eval, "--timeout", "provider.timeout_s", "Remote request timeout, seconds");
  eval_o.add<int>(eval, "--max-tokens", "provider.max_tokens", "Generation limit (default 256)");
  eval_o.add<double>(eval, "--temperature", "provider.temperature", "Sampling temperature (default 0)");
  eval_o.add<std::string>(eval, "--grader", "grader.kind", "lexical | remote")
      ->check(CLI::IsMember({"lexical", "remote"}));
  eval_o.add<std::string>(eval, "--lexicon", "grader.lexicon", "Grader lexicon JSON");
  eval_o.add<std::string>(eval, "--grader-model", "grader.model", "Model for the remote grader");
  eval_o.add<double>(eval, "--sample-ms", "profiler.sample_ms", "Memory sampling interval, ms (default 50)");
  eval_o.add<std::string>(eval, "--gpu-command", "profiler.gpu_command",
                          "GPU memory probe command; 'auto' or '' to disable");
  eval_o.add<std::string>(eval, "--clock", "profiler.clock", "steady | virtual (virtual needs the mock provider)")
      ->check(CLI::IsMember({"steady", "virtual"}));
  {
    auto mb = std::make_shared<double>(0.0);
    eval_o.add_custom(eval->add_option("--fixed-mem-mb", *mb, "Report a constant RAM reading instead of RSS"),
                      [mb](json& cfg) {
                        cfg["profiler"]["memory_probe"] = "fixed";
                        cfg["profiler"]["fixed_mem_mb"] = *mb;
                      });
  }
  eval->add_option("--fail-below", fail_below, "Exit 5 when overall S_rag is below this fraction");

  // report
  Overrides report_o;
  auto* report = app.add_subcommand("report", "Re-aggregate a run log and rewrite the report files");
  report->add_option("--config", config_path, config_help);
  report_o.add<std::string>(report, "--run-dir", "run_dir", "Directory holding questions.jsonl");
  report_o.add<std::string>(report, "--out-dir", "out_dir", "Output directory (default: the run directory)");
  add_weight_flags(report, report_o);
  report->add_option("--fail-below", fail_below, "Exit 5 when overall S_rag is below this fraction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*kb_build) return cmd_kb_build(config_path, kb_o);
    if (*gen) return cmd_generate(config_path, gen_o);
    if (*eval) return cmd_eval(config_path, eval_o, fail_below);
    if (*report) return cmd_report(config_path, report_o, fail_below);
  } catch (const Failure& f) {
    std::fprintf(stderr, "omnibench: %s\n", f.message.c_str());
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "omnibench: error (internal): %s\n", e.what());
    return 1;
  }
  return 2;
}
