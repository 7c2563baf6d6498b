#include "omnibench/runner.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "omnibench/error.hpp"

namespace omnibench::runner {
namespace {

bool contains(std::string_view haystack, std::string_view needle) {
  return haystack.find(needle) != std::string_view::npos;
}

std::vector<metrics::PairedMeasurement> pair_runs(std::span<const QuestionRun> runs, bool skip_failures) {
  std::map<std::string, const QuestionRun*> base;
  std::map<std::string, const QuestionRun*> rag;
  for (const auto& r : runs) {
    if (skip_failures && r.failed) continue;
    (r.track == metrics::Track::Base ? base : rag)[r.qa_id] = &r;
  }
  std::vector<metrics::PairedMeasurement> pairs;
  for (const auto& [id, b] : base) {
    const auto it = rag.find(id);
    if (it == rag.end()) continue;
    const QuestionRun* g = it->second;
    pairs.push_back({b->resource.latency_s, g->resource.latency_s, b->resource.peak_mem_mb,
                     g->resource.peak_mem_mb, b->resource.peak_gpu_mb, g->resource.peak_gpu_mb});
  }
  return pairs;
}

std::optional<ScopeResult> scope_result(std::string scope, std::span<const QuestionRun> runs,
                                        const RunOptions& options, std::vector<std::string>& notices) {
  auto base = summarize(metrics::Track::Base, runs, options.skip_failures);
  auto rag = summarize(metrics::Track::Rag, runs, options.skip_failures);
  if (!base || !rag) {
    notices.push_back(scope + ": omitted from report, no countable runs on " +
                      (!base ? std::string("base") : std::string("rag")) + " track");
    return std::nullopt;
  }
  std::vector<metrics::PairedMeasurement> pairs;
  if (options.ratio_mode == RatioMode::MeanOfRatios) {
    pairs = pair_runs(runs, options.skip_failures);
    if (pairs.empty()) {
      notices.push_back(scope + ": no paired runs for per-question ratios");
      return std::nullopt;
    }
  }
  ScopeResult out{scope, *base, *rag,
                  metrics::enhance(scope, *base, *rag, options.weights,
                                   options.ratio_mode == RatioMode::MeanOfRatios ? &pairs : nullptr)};
  for (const auto& n : out.report.notices) notices.push_back(scope + ": " + n);
  return out;
}

}  // namespace

void PromptTemplates::validate() const {
  if (!contains(base, "{question}")) fail(ErrorKind::Config, "base prompt template lacks {question}");
  if (!contains(rag, "{question}")) fail(ErrorKind::Config, "rag prompt template lacks {question}");
  if (!contains(rag, "{context}")) fail(ErrorKind::Config, "rag prompt template lacks {context}");
}

std::string fill(std::string_view tmpl, std::string_view question, std::string_view context) {
  std::string out;
  out.reserve(tmpl.size() + question.size() + context.size());
  static constexpr std::string_view kQuestion = "{question}";
  static constexpr std::string_view kContext = "{context}";
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl.substr(i, kQuestion.size()) == kQuestion) {
      out.append(question);
      i += kQuestion.size();
    } else if (tmpl.substr(i, kContext.size()) == kContext) {
      out.append(context);
      i += kContext.size();
    } else {
      out.push_back(tmpl[i++]);
    }
  }
  return out;
}

std::string format_context(const std::vector<vindex::Hit>& hits, const vindex::KnowledgeBase& kb) {
  if (hits.empty()) return kNoContext;
  std::string out;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (i) out += "\n\n";
    out += "[" + std::to_string(i + 1) + "] " + kb.chunk(hits[i].chunk_id).text;
  }
  return out;
}

nlohmann::ordered_json to_json(const QuestionRun& run) {
  nlohmann::ordered_json j;
  j["qa_id"] = run.qa_id;
  j["domain"] = corpus::to_string(run.domain);
  j["track"] = metrics::to_string(run.track);
  j["expected"] = testgen::to_string(run.expected);
  j["prompt"] = run.prompt_rendered;
  j["answer"] = run.answer_text;
  j["judgment"] = {{"label", grader::to_string(run.judgment.label)},
                   {"evidence", run.judgment.matched_evidence}};
  j["correct"] = run.correct;
  j["failed"] = run.failed;
  j["error"] = run.error;
  j["resource"] = {{"latency_s", run.resource.latency_s},
                   {"peak_mem_mb", run.resource.peak_mem_mb},
                   {"peak_gpu_mb", run.resource.peak_gpu_mb ? nlohmann::ordered_json(*run.resource.peak_gpu_mb)
                                                            : nlohmann::ordered_json(nullptr)},
                   {"sample_count", run.resource.sample_count}};
  auto& hits = j["retrieved"] = nlohmann::ordered_json::array();
  for (const auto& h : run.retrieved) hits.push_back({{"chunk_id", h.chunk_id}, {"score", h.score}});
  j["timings"] = {{"embed_s", run.timings.embed_s},
                  {"search_s", run.timings.search_s},
                  {"generate_s", run.timings.generate_s}};
  return j;
}

QuestionRun question_run_from_json(const nlohmann::json& j) {
  try {
    QuestionRun run;
    run.qa_id = j.at("qa_id").get<std::string>();
    run.domain = corpus::parse_domain_or_throw(j.at("domain").get<std::string>());
    const auto track = j.at("track").get<std::string>();
    if (track != "base" && track != "rag") fail(ErrorKind::Format, "unknown track '" + track + "'");
    run.track = track == "base" ? metrics::Track::Base : metrics::Track::Rag;
    const auto expected = testgen::parse_answer(j.at("expected").get<std::string>());
    if (!expected) fail(ErrorKind::Format, "expected must be Yes or No");
    run.expected = *expected;
    run.prompt_rendered = j.value("prompt", "");
    run.answer_text = j.value("answer", "");
    const auto label = j.at("judgment").at("label").get<std::string>();
    run.judgment.label = label == "Yes" ? grader::Label::Yes : label == "No" ? grader::Label::No : grader::Label::Abstain;
    run.judgment.matched_evidence = j.at("judgment").value("evidence", "");
    run.correct = j.at("correct").get<bool>();
    run.failed = j.value("failed", false);
    run.error = j.value("error", "");
    const auto& res = j.at("resource");
    run.resource.latency_s = res.at("latency_s").get<double>();
    run.resource.peak_mem_mb = res.at("peak_mem_mb").get<double>();
    if (res.contains("peak_gpu_mb") && !res["peak_gpu_mb"].is_null()) {
      run.resource.peak_gpu_mb = res["peak_gpu_mb"].get<double>();
    }
    run.resource.sample_count = res.value("sample_count", std::size_t{0});
    if (j.contains("retrieved")) {
      for (const auto& h : j["retrieved"]) {
        run.retrieved.push_back({h.at("chunk_id").get<std::string>(), h.at("score").get<double>()});
      }
    }
    if (j.contains("timings")) {
      run.timings.embed_s = j["timings"].value("embed_s", 0.0);
      run.timings.search_s = j["timings"].value("search_s", 0.0);
      run.timings.generate_s = j["timings"].value("generate_s", 0.0);
    }
    return run;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("question run record: ") + e.what());
  }
}

std::optional<metrics::TrackSummary> summarize(metrics::Track track, std::span<const QuestionRun> runs,
                                               bool skip_failures) {
  metrics::TrackSummary s;
  s.track = track;
  std::size_t correct = 0;
  double latency = 0.0;
  double mem = 0.0;
  double gpu = 0.0;
  bool all_gpu = true;
  for (const auto& r : runs) {
    if (r.track != track || (skip_failures && r.failed)) continue;
    ++s.n;
    correct += r.correct ? 1 : 0;
    latency += r.resource.latency_s;
    mem += r.resource.peak_mem_mb;
    if (r.resource.peak_gpu_mb) {
      gpu += *r.resource.peak_gpu_mb;
    } else {
      all_gpu = false;
    }
  }
  if (s.n == 0) return std::nullopt;
  const auto n = static_cast<double>(s.n);
  s.S = static_cast<double>(correct) / n;
  s.T = latency / n;
  s.U_mem = mem / n;
  if (all_gpu) s.U_gpu = gpu / n;
  return s;
}

SuiteResult aggregate(std::vector<QuestionRun> runs, const RunOptions& options) {
  SuiteResult out;
  out.runs = std::move(runs);
  for (corpus::DomainTag tag : corpus::kAllDomains) {
    std::vector<QuestionRun> bucket;
    for (const auto& r : out.runs) {
      if (r.domain == tag) bucket.push_back(r);
    }
    if (bucket.empty()) continue;
    if (auto s = scope_result(std::string(corpus::to_string(tag)), bucket, options, out.notices)) {
      out.domains.push_back(std::move(*s));
    }
  }
  if (!out.runs.empty()) out.overall = scope_result("Overall", out.runs, options, out.notices);
  return out;
}

Runner::Runner(provider::Provider& provider, grader::Grader& grader, profiler::Profiler& profiler,
               const embedding::Embedder* embedder, const vindex::KnowledgeBase* kb, RunOptions options)
    : provider_(provider),
      grader_(grader),
      profiler_(profiler),
      embedder_(embedder),
      kb_(kb),
      options_(std::move(options)) {
  if (options_.top_k == 0) fail(ErrorKind::Config, "top_k must be at least 1");
  options_.templates.validate();
  options_.weights.validate();
  if (kb_ && embedder_) {
    if (kb_->fingerprint() != embedder_->fingerprint()) {
      fail(ErrorKind::Config, "knowledge base was built with embedder '" + kb_->fingerprint() +
                                  "' but the configured embedder is '" + embedder_->fingerprint() + "'");
    }
    if (!kb_->empty() && embedder_->dim() != 0 && embedder_->dim() != kb_->dim()) {
      fail(ErrorKind::Config, "embedder dim " + std::to_string(embedder_->dim()) +
                                  " differs from knowledge base dim " + std::to_string(kb_->dim()));
    }
  }
}

provider::GenerationRequest Runner::request(std::string prompt) const {
  provider::GenerationRequest req;
  req.system_prompt = options_.templates.system;
  req.user_prompt = std::move(prompt);
  req.max_tokens = options_.max_tokens;
  req.temperature = options_.temperature;
  req.model_id = options_.model_id;
  return req;
}

void Runner::finish(QuestionRun& run, const testgen::QAItem& item) {
  if (!run.failed) {
    try {
      run.judgment = grader_.judge(run.answer_text);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Provider && e.kind() != ErrorKind::Protocol) throw;
      run.failed = true;
      run.error = std::string("grader: ") + e.what();
    }
  }
  if (run.failed) run.judgment = {};
  run.correct = !run.failed && grader::score(run.judgment, item.expected);
}

QuestionRun Runner::run_base(const testgen::QAItem& item) {
  QuestionRun run;
  run.qa_id = item.id;
  run.domain = item.domain;
  run.expected = item.expected;
  run.track = metrics::Track::Base;

  Clock& clock = profiler_.clock();
  auto [answer, sample] = profiler_.measure([&]() -> std::optional<std::string> {
    run.prompt_rendered = runner::fill(options_.templates.base, item.question);
    const double t0 = clock.now();
    try {
      auto res = provider_.generate(request(run.prompt_rendered));
      run.timings.generate_s = clock.now() - t0;
      return std::move(res.text);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Provider && e.kind() != ErrorKind::Protocol) throw;
      run.timings.generate_s = clock.now() - t0;
      run.error = e.what();
      return std::nullopt;
    }
  });
  run.resource = sample;
  run.failed = !answer;
  if (answer) run.answer_text = std::move(*answer);
  finish(run, item);
  return run;
}

QuestionRun Runner::run_rag(const testgen::QAItem& item) {
  if (!kb_ || !embedder_) fail(ErrorKind::Config, "RAG track needs a knowledge base and an embedder");
  QuestionRun run;
  run.qa_id = item.id;
  run.domain = item.domain;
  run.expected = item.expected;
  run.track = metrics::Track::Rag;

  Clock& clock = profiler_.clock();
  auto [answer, sample] = profiler_.measure([&]() -> std::optional<std::string> {
    try {
      double t = clock.now();
      std::vector<vindex::Hit> hits;
      if (!kb_->empty()) {
        const auto query = embedder_->embed(item.question);
        run.timings.embed_s = clock.now() - t;
        t = clock.now();
        hits = kb_->search(query, options_.top_k);
        run.timings.search_s = clock.now() - t;
      }
      run.prompt_rendered = runner::fill(options_.templates.rag, item.question, format_context(hits, *kb_));
      run.retrieved = std::move(hits);
      t = clock.now();
      auto res = provider_.generate(request(run.prompt_rendered));
      run.timings.generate_s = clock.now() - t;
      return std::move(res.text);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Provider && e.kind() != ErrorKind::Protocol &&
          e.kind() != ErrorKind::Argument) {
        throw;
      }
      run.error = e.what();
      return std::nullopt;
    }
  });
  run.resource = sample;
  run.failed = !answer;
  if (answer) run.answer_text = std::move(*answer);
  finish(run, item);
  return run;
}

SuiteResult Runner::run_suite(const std::vector<testgen::QAItem>& items) {
  if (items.empty()) fail(ErrorKind::Argument, "dataset is empty");
  std::set<std::string> ids;
  for (const auto& item : items) {
    if (!ids.insert(item.id).second) fail(ErrorKind::Argument, "duplicate question id '" + item.id + "'");
  }
  if (!kb_ || !embedder_) fail(ErrorKind::Config, "RAG track needs a knowledge base and an embedder");

  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (options_.shuffle) {
    std::mt19937_64 rng(options_.seed);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
    }
  }

  std::vector<QuestionRun> base(items.size());
  std::vector<QuestionRun> rag(items.size());
  for (std::size_t idx : order) {
    if (options_.order == Order::BaseFirst) {
      base[idx] = run_base(items[idx]);
      rag[idx] = run_rag(items[idx]);
    } else {
      rag[idx] = run_rag(items[idx]);
      base[idx] = run_base(items[idx]);
    }
  }

  std::vector<QuestionRun> runs;
  runs.reserve(items.size() * 2);
  for (std::size_t i = 0; i < items.size(); ++i) {
    runs.push_back(std::move(base[i]));
    runs.push_back(std::move(rag[i]));
  }
  auto result = aggregate(std::move(runs), options_);
  for (auto& w : profiler_.take_warnings()) result.notices.push_back(std::move(w));
  return result;
}

}  // namespace omnibench::runner
