#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "omnibench/http.hpp"

namespace omnibench::embedding {

/// Unit-norm dense vector. Stored as float32 to match the on-disk index.
using Vector = std::vector<float>;

double dot(std::span<const float> a, std::span<const float> b);

/// L2-normalizes in place. Zero or non-finite input is an Argument error.
void normalize(std::vector<double>& values, Vector& out);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Lowercases ASCII and trims leading/trailing ASCII punctuation. Returns an
/// empty string for tokens that are pure punctuation.
std::string normalize_token(std::string_view token);

enum class EmbedderKind { Hash, Remote };

struct EmbedderConfig {
  EmbedderKind kind = EmbedderKind::Hash;
  std::size_t dim = 256;
  http::Endpoint endpoint;  // remote only
  std::string model;        // remote only
};

class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::size_t dim() const = 0;
  /// Identifies the exact configuration; a knowledge base is only searchable
  /// with an embedder whose fingerprint matches the one that built it.
  virtual std::string fingerprint() const = 0;
  virtual Vector embed(std::string_view text) const = 0;
  virtual std::vector<Vector> embed_batch(std::span<const std::string> texts) const;
};

/// Signed feature hashing: every token adds +1 or -1 to bucket
/// fnv1a64(token) mod dim, the sign taken from the hash's top bit.
class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dim = 256);

  std::size_t dim() const override { return dim_; }
  std::string fingerprint() const override;
  Vector embed(std::string_view text) const override;

  /// Pre-normalization accumulator, exposed for property tests.
  std::vector<double> accumulate(std::string_view text) const;

 private:
  std::size_t dim_;
};

/// Client for POST /v1/embeddings. The dimension is learned from the first
/// response when `dim` is 0 and enforced afterwards.
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(http::Endpoint endpoint, std::string model, std::size_t dim = 0);

  std::size_t dim() const override;
  std::string fingerprint() const override;
  Vector embed(std::string_view text) const override;
  std::vector<Vector> embed_batch(std::span<const std::string> texts) const override;

 private:
  http::Endpoint endpoint_;
  std::string model_;
  mutable std::mutex mutex_;
  mutable std::size_t dim_;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config);

}  // namespace omnibench::embedding
