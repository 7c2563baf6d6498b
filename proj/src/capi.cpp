#include "omnibench/omnibench.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include <json.hpp>

#include "omnibench/app.hpp"
#include "omnibench/embedding.hpp"
#include "omnibench/error.hpp"
#include "omnibench/metrics.hpp"
#include "omnibench/vindex.hpp"

struct ob_embedder {
  std::unique_ptr<omnibench::embedding::Embedder> impl;
};

struct ob_kb {
  omnibench::vindex::KnowledgeBase impl;
};

namespace {

using omnibench::ErrorKind;

thread_local std::string g_last_error;

ob_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Internal: return OB_ERR_INTERNAL;
    case ErrorKind::Config: return OB_ERR_CONFIG;
    case ErrorKind::Ingestion: return OB_ERR_INGESTION;
    case ErrorKind::Provider: return OB_ERR_PROVIDER;
    case ErrorKind::Argument: return OB_ERR_ARGUMENT;
    case ErrorKind::Io: return OB_ERR_IO;
    case ErrorKind::Protocol: return OB_ERR_PROTOCOL;
    case ErrorKind::DegenerateMeasurement: return OB_ERR_DEGENERATE;
    case ErrorKind::BadMagic: return OB_ERR_BAD_MAGIC;
    case ErrorKind::VersionMismatch: return OB_ERR_VERSION;
    case ErrorKind::Truncated: return OB_ERR_TRUNCATED;
    case ErrorKind::Checksum: return OB_ERR_CHECKSUM;
    case ErrorKind::Format: return OB_ERR_FORMAT;
  }
  return OB_ERR_INTERNAL;
}

char* dup(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

nlohmann::json parse_config(const char* text) {
  if (!text || !*text) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    omnibench::fail(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
}

template <typename F>
ob_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return OB_OK;
  } catch (const omnibench::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return OB_ERR_FORMAT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return OB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return OB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return OB_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) omnibench::fail(ErrorKind::Argument, std::string(what) + " must not be null");
}

std::string hits_json(const std::vector<omnibench::vindex::Hit>& hits) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& h : hits) j.push_back({{"chunk_id", h.chunk_id}, {"score", h.score}});
  return j.dump();
}

}  // namespace

extern "C" {

const char* ob_version(void) { return omnibench::app::kVersion; }

const char* ob_status_name(ob_status status) {
  switch (status) {
    case OB_OK: return "ok";
    case OB_ERR_INTERNAL: return "internal";
    case OB_ERR_CONFIG: return "config";
    case OB_ERR_INGESTION: return "ingestion";
    case OB_ERR_PROVIDER: return "provider";
    case OB_ERR_ARGUMENT: return "argument";
    case OB_ERR_IO: return "io";
    case OB_ERR_PROTOCOL: return "protocol";
    case OB_ERR_DEGENERATE: return "degenerate_measurement";
    case OB_ERR_BAD_MAGIC: return "bad_magic";
    case OB_ERR_VERSION: return "version_mismatch";
    case OB_ERR_TRUNCATED: return "truncated";
    case OB_ERR_CHECKSUM: return "checksum";
    case OB_ERR_FORMAT: return "format";
  }
  return "unknown";
}

int ob_exit_code(ob_status status) {
  switch (status) {
    case OB_OK: return 0;
    case OB_ERR_CONFIG:
    case OB_ERR_ARGUMENT: return 2;
    case OB_ERR_INGESTION:
    case OB_ERR_IO:
    case OB_ERR_FORMAT:
    case OB_ERR_BAD_MAGIC:
    case OB_ERR_VERSION:
    case OB_ERR_TRUNCATED:
    case OB_ERR_CHECKSUM: return 3;
    case OB_ERR_PROVIDER:
    case OB_ERR_PROTOCOL: return 4;
    default: return 1;
  }
}

const char* ob_last_error(void) { return g_last_error.c_str(); }

void ob_free_string(char* s) { std::free(s); }

ob_status ob_embedder_create(const char* config_json, ob_embedder** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    const auto cfg = parse_config(config_json);
    omnibench::embedding::EmbedderConfig ec;
    const auto kind = cfg.value("kind", std::string("hash"));
    if (kind == "hash") {
      ec.kind = omnibench::embedding::EmbedderKind::Hash;
    } else if (kind == "remote") {
      ec.kind = omnibench::embedding::EmbedderKind::Remote;
    } else {
      omnibench::fail(ErrorKind::Config, "embedder kind must be 'hash' or 'remote'");
    }
    ec.dim = cfg.value("dim", ec.kind == omnibench::embedding::EmbedderKind::Hash ? std::size_t{256} : 0);
    ec.model = cfg.value("model", std::string());
    ec.endpoint.base_url = cfg.value("api_base", std::string());
    ec.endpoint.api_key = cfg.value("api_key", std::string());
    ec.endpoint.timeout_s = cfg.value("timeout_s", ec.endpoint.timeout_s);
    *out = new ob_embedder{omnibench::embedding::make_embedder(ec)};
  });
}

void ob_embedder_destroy(ob_embedder* e) { delete e; }

size_t ob_embedder_dim(const ob_embedder* e) { return e ? e->impl->dim() : 0; }

ob_status ob_embedder_fingerprint(const ob_embedder* e, char** out) {
  return guarded([&] {
    require(e, "embedder");
    require(out, "out");
    *out = dup(e->impl->fingerprint());
  });
}

ob_status ob_embedder_embed(const ob_embedder* e, const char* text, float* out, size_t out_len) {
  return guarded([&] {
    require(e, "embedder");
    require(text, "text");
    require(out, "out");
    const auto v = e->impl->embed(text);
    if (out_len < v.size()) {
      omnibench::fail(ErrorKind::Argument, "output buffer holds " + std::to_string(out_len) + " floats, need " +
                                               std::to_string(v.size()));
    }
    std::copy(v.begin(), v.end(), out);
  });
}

ob_status ob_kb_build(const char* config_json, ob_kb** out, char** summary_json) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    nlohmann::ordered_json summary;
    auto kb = std::make_unique<ob_kb>(ob_kb{omnibench::app::build_kb(parse_config(config_json), summary)});
    if (summary_json) *summary_json = dup(summary.dump());
    *out = kb.release();
  });
}

ob_status ob_kb_save(const ob_kb* kb, const char* path) {
  return guarded([&] {
    require(kb, "kb");
    require(path, "path");
    omnibench::vindex::save(kb->impl, path);
  });
}

ob_status ob_kb_load(const char* path, ob_kb** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    *out = new ob_kb{omnibench::vindex::load(path)};
  });
}

void ob_kb_destroy(ob_kb* kb) { delete kb; }

size_t ob_kb_size(const ob_kb* kb) { return kb ? kb->impl.size() : 0; }

size_t ob_kb_dim(const ob_kb* kb) { return kb ? kb->impl.dim() : 0; }

ob_status ob_kb_fingerprint(const ob_kb* kb, char** out) {
  return guarded([&] {
    require(kb, "kb");
    require(out, "out");
    *out = dup(kb->impl.fingerprint());
  });
}

ob_status ob_kb_search(const ob_kb* kb, const float* query, size_t dim, size_t k, char** hits) {
  return guarded([&] {
    require(kb, "kb");
    require(query, "query");
    require(hits, "hits_json");
    *hits = dup(hits_json(kb->impl.search(std::span<const float>(query, dim), k)));
  });
}

ob_status ob_kb_search_text(const ob_kb* kb, const ob_embedder* e, const char* text, size_t k, char** hits) {
  return guarded([&] {
    require(kb, "kb");
    require(e, "embedder");
    require(text, "text");
    require(hits, "hits_json");
    if (e->impl->fingerprint() != kb->impl.fingerprint()) {
      omnibench::fail(ErrorKind::Config, "embedder fingerprint '" + e->impl->fingerprint() +
                                             "' does not match knowledge base fingerprint '" +
                                             kb->impl.fingerprint() + "'");
    }
    const auto q = e->impl->embed(text);
    *hits = dup(hits_json(kb->impl.search(q, k)));
  });
}

ob_status ob_generate(const char* config_json, char** summary_json) {
  return guarded([&] {
    const auto summary = omnibench::app::generate(parse_config(config_json));
    if (summary_json) *summary_json = dup(summary.dump());
  });
}

ob_status ob_eval(const char* config_json, char** summary_json) {
  return guarded([&] {
    const auto summary = omnibench::app::evaluate(parse_config(config_json));
    if (summary_json) *summary_json = dup(summary.dump());
  });
}

ob_status ob_report(const char* config_json, char** summary_json) {
  return guarded([&] {
    const auto summary = omnibench::app::rerender(parse_config(config_json));
    if (summary_json) *summary_json = dup(summary.dump());
  });
}

ob_status ob_defaults(const char* stage, char** config_json) {
  return guarded([&] {
    require(stage, "stage");
    require(config_json, "config_json");
    *config_json = dup(omnibench::app::defaults(stage).dump(2));
  });
}

ob_status ob_improvements(double s_rag, double s_base, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = omnibench::metrics::improvements(s_rag, s_base);
  });
}

ob_status ob_transformation(double r_time, double r_gpu, double r_mem, double w_time, double w_gpu, double w_mem,
                            double* out) {
  return guarded([&] {
    require(out, "out");
    omnibench::metrics::Ratios r;
    r.r_time = r_time;
    r.r_gpu = r_gpu;
    r.r_mem = r_mem;
    *out = omnibench::metrics::transformation(r, {w_time, w_gpu, w_mem});
  });
}

}  // extern "C"
