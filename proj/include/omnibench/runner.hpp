#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "omnibench/corpus.hpp"
#include "omnibench/embedding.hpp"
#include "omnibench/grader.hpp"
#include "omnibench/metrics.hpp"
#include "omnibench/profiler.hpp"
#include "omnibench/provider.hpp"
#include "omnibench/testgen.hpp"
#include "omnibench/vindex.hpp"

namespace omnibench::runner {

struct PromptTemplates {
  std::string system = "You are a careful assistant. Answer yes/no questions truthfully.";
  std::string base =
      "Answer the following question with Yes or No.\n"
      "Question: {question}\n"
      "Answer:";
  std::string rag =
      "Use the context below to answer the question with Yes or No.\n"
      "Context:\n{context}\n\n"
      "Question: {question}\n"
      "Answer:";

  /// base needs {question}; rag needs {question} and {context}. Throws Config.
  void validate() const;
};

inline constexpr const char* kNoContext = "(no context retrieved)";

enum class Order { BaseFirst, RagFirst };
enum class RatioMode { RatioOfMeans, MeanOfRatios };

struct RunOptions {
  std::size_t top_k = 5;
  std::uint64_t seed = 42;
  /// Execute items in a seed-shuffled order; logs stay in dataset order.
  bool shuffle = false;
  PromptTemplates templates;
  int max_tokens = 256;
  double temperature = 0.0;
  std::string model_id;
  bool skip_failures = false;
  Order order = Order::BaseFirst;
  RatioMode ratio_mode = RatioMode::RatioOfMeans;
  metrics::Weights weights;
};

struct SubTimings {
  double embed_s = 0.0;
  double search_s = 0.0;
  double generate_s = 0.0;
};

struct QuestionRun {
  std::string qa_id;
  corpus::DomainTag domain = corpus::DomainTag::Geography;
  testgen::Answer expected = testgen::Answer::Yes;
  metrics::Track track = metrics::Track::Base;
  std::string prompt_rendered;
  std::string answer_text;
  grader::Judgment judgment;
  bool correct = false;
  bool failed = false;
  std::string error;
  profiler::ResourceSample resource;
  std::vector<vindex::Hit> retrieved;
  SubTimings timings;
};

nlohmann::ordered_json to_json(const QuestionRun& run);
QuestionRun question_run_from_json(const nlohmann::json& j);

/// Context block: "[i] <chunk text>" per hit in hit order, separated by blank
/// lines; kNoContext when there are no hits.
std::string format_context(const std::vector<vindex::Hit>& hits, const vindex::KnowledgeBase& kb);

std::string fill(std::string_view tmpl, std::string_view question, std::string_view context = {});

struct ScopeResult {
  std::string scope;  // domain name or "Overall"
  metrics::TrackSummary base;
  metrics::TrackSummary rag;
  metrics::EnhancementReport report;
};

struct SuiteResult {
  std::vector<QuestionRun> runs;      // dataset order, base/rag pairs per item
  std::vector<ScopeResult> domains;   // canonical domain order, non-empty only
  std::optional<ScopeResult> overall;
  std::vector<std::string> notices;
};

/// S is correct/n; T and U are means over the runs. Failed runs count as
/// incorrect unless `skip_failures`, which drops them. GPU is present only
/// when every counted run has it.
std::optional<metrics::TrackSummary> summarize(metrics::Track track, std::span<const QuestionRun> runs,
                                               bool skip_failures);

/// Pure aggregation over a complete run log.
SuiteResult aggregate(std::vector<QuestionRun> runs, const RunOptions& options);

class Runner {
 public:
  /// `kb` and `embedder` may be null only if run_rag is never called.
  /// Throws Config when the embedder fingerprint or dim differs from the KB.
  Runner(provider::Provider& provider, grader::Grader& grader, profiler::Profiler& profiler,
         const embedding::Embedder* embedder, const vindex::KnowledgeBase* kb, RunOptions options);

  QuestionRun run_base(const testgen::QAItem& item);
  QuestionRun run_rag(const testgen::QAItem& item);

  /// Both tracks for every item, measurements strictly serialized.
  SuiteResult run_suite(const std::vector<testgen::QAItem>& items);

  const RunOptions& options() const noexcept { return options_; }

 private:
  provider::GenerationRequest request(std::string prompt) const;
  void finish(QuestionRun& run, const testgen::QAItem& item);

  provider::Provider& provider_;
  grader::Grader& grader_;
  profiler::Profiler& profiler_;
  const embedding::Embedder* embedder_;
  const vindex::KnowledgeBase* kb_;
  RunOptions options_;
};

}  // namespace omnibench::runner
