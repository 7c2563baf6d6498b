#pragma once

#include <string>

#include <json.hpp>

#include "omnibench/vindex.hpp"

// Stage-level operations behind the C API. Each takes the effective
// configuration for one subcommand as JSON, fills in defaults, rejects
// unknown keys (Config error) and returns a JSON summary.
namespace omnibench::app {

inline constexpr const char* kVersion = "0.1.0";

/// Config keys: manifest, chunk_size, chunk_overlap, embedder{kind, dim,
/// model, api_base, api_key, timeout_s}. Returns the built KB; `summary`
/// receives {documents, chunks, dim, fingerprint, per_domain, config}.
vindex::KnowledgeBase build_kb(const nlohmann::json& config, nlohmann::ordered_json& summary);

/// Config keys: triples, relations, out, domain, patterns, caps, seed,
/// max_depth, rules, inverse_relations. Writes the dataset JSON to `out`.
nlohmann::ordered_json generate(const nlohmann::json& config);

/// Config keys: dataset, kb, out_dir, top_k, seed, shuffle, order,
/// ratio_mode, skip_failures, weights, templates, provider, embedder,
/// grader, profiler. Runs both tracks and writes questions.jsonl,
/// run_meta.json, report.csv, report.json, radar.json and radar.svg.
nlohmann::ordered_json evaluate(const nlohmann::json& config);

/// Config keys: run_dir, out_dir, weights, ratio_mode, skip_failures.
/// Re-aggregates questions.jsonl and rewrites the report files.
nlohmann::ordered_json rerender(const nlohmann::json& config);

/// Default config for a stage ("kb", "gen", "eval", "report"), i.e. every
/// key the stage accepts with its default value.
nlohmann::ordered_json defaults(const std::string& stage);

}  // namespace omnibench::app
