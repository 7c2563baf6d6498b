#include "omnibench/embedding.hpp"

#include <cctype>
#include <cmath>

#include "omnibench/corpus.hpp"
#include "omnibench/error.hpp"

namespace omnibench::embedding {

double dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    fail(ErrorKind::Argument, "dimension mismatch: " + std::to_string(a.size()) + " vs " +
                                  std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += static_cast<double>(a[i]) * b[i];
  return sum;
}

void normalize(std::vector<double>& values, Vector& out) {
  double norm2 = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) fail(ErrorKind::Argument, "vector has a non-finite entry");
    norm2 += v * v;
  }
  if (norm2 == 0.0) fail(ErrorKind::Argument, "cannot normalize a zero vector");
  const double norm = std::sqrt(norm2);
  out.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] /= norm;
    out[i] = static_cast<float>(values[i]);
  }
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string normalize_token(std::string_view token) {
  const auto is_punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  std::size_t begin = 0;
  std::size_t end = token.size();
  while (begin < end && is_punct(token[begin])) ++begin;
  while (end > begin && is_punct(token[end - 1])) --end;
  std::string out(token.substr(begin, end - begin));
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<Vector> Embedder::embed_batch(std::span<const std::string> texts) const {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    try {
      out.push_back(embed(texts[i]));
    } catch (const Error& e) {
      throw Error(e.kind(), "batch element " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

HashEmbedder::HashEmbedder(std::size_t dim) : dim_(dim) {
  if (dim < 2) fail(ErrorKind::Config, "embedding dim must be at least 2");
}

std::string HashEmbedder::fingerprint() const {
  return "hash-fnv1a64-signed/v1/dim=" + std::to_string(dim_);
}

std::vector<double> HashEmbedder::accumulate(std::string_view text) const {
  const std::string cleaned = corpus::clean(text);
  std::vector<double> acc(dim_, 0.0);
  for (const auto& tok : corpus::tokenize(cleaned)) {
    const std::string term = normalize_token(std::string_view(cleaned).substr(tok.begin, tok.end - tok.begin));
    if (term.empty()) continue;
    const std::uint64_t h = fnv1a64(term);
    acc[h % dim_] += (h >> 63) ? -1.0 : 1.0;
  }
  return acc;
}

Vector HashEmbedder::embed(std::string_view text) const {
  if (corpus::clean(text).empty()) fail(ErrorKind::Argument, "cannot embed empty text");
  auto acc = accumulate(text);
  Vector out;
  try {
    normalize(acc, out);
  } catch (const Error&) {
    fail(ErrorKind::Argument, "text hashes to a zero vector (no usable tokens or full cancellation)");
  }
  return out;
}

RemoteEmbedder::RemoteEmbedder(http::Endpoint endpoint, std::string model, std::size_t dim)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), dim_(dim) {
  if (endpoint_.base_url.empty()) fail(ErrorKind::Config, "remote embedder needs a base URL");
  if (model_.empty()) fail(ErrorKind::Config, "remote embedder needs a model name");
  if (dim_ == 1) fail(ErrorKind::Config, "embedding dim must be at least 2");
}

std::size_t RemoteEmbedder::dim() const {
  std::lock_guard lock(mutex_);
  return dim_;
}

std::string RemoteEmbedder::fingerprint() const { return "remote/v1/model=" + model_; }

Vector RemoteEmbedder::embed(std::string_view text) const {
  const std::string owned(text);
  return embed_batch(std::span<const std::string>(&owned, 1)).front();
}

std::vector<Vector> RemoteEmbedder::embed_batch(std::span<const std::string> texts) const {
  if (texts.empty()) return {};
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (corpus::clean(texts[i]).empty()) {
      fail(ErrorKind::Argument, "batch element " + std::to_string(i) + ": cannot embed empty text");
    }
  }
  nlohmann::json body{{"model", model_}, {"input", texts}};

  std::lock_guard lock(mutex_);
  const auto response = http::post_json(endpoint_, "/v1/embeddings", body);
  if (!response.contains("data") || !response["data"].is_array() ||
      response["data"].size() != texts.size()) {
    fail(ErrorKind::Protocol, "embeddings response must carry one 'data' entry per input");
  }
  std::vector<Vector> out(texts.size());
  std::vector<bool> filled(texts.size(), false);
  for (std::size_t pos = 0; pos < response["data"].size(); ++pos) {
    const auto& item = response["data"][pos];
    const std::size_t index = item.value("index", pos);
    if (index >= texts.size() || filled[index] || !item.contains("embedding") ||
        !item["embedding"].is_array()) {
      fail(ErrorKind::Protocol, "malformed embeddings entry at position " + std::to_string(pos));
    }
    auto raw = item["embedding"].get<std::vector<double>>();
    if (dim_ == 0) dim_ = raw.size();
    if (raw.size() != dim_) {
      fail(ErrorKind::Protocol, "embedding endpoint returned dim " + std::to_string(raw.size()) +
                                    ", expected " + std::to_string(dim_));
    }
    try {
      normalize(raw, out[index]);
    } catch (const Error& e) {
      fail(ErrorKind::Protocol, std::string("embedding endpoint returned an unusable vector: ") + e.what());
    }
    filled[index] = true;
  }
  return out;
}

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config) {
  if (config.kind == EmbedderKind::Hash) return std::make_unique<HashEmbedder>(config.dim);
  return std::make_unique<RemoteEmbedder>(config.endpoint, config.model, config.dim);
}

}  // namespace omnibench::embedding
