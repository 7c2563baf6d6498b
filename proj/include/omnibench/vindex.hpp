#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "omnibench/corpus.hpp"
#include "omnibench/embedding.hpp"

namespace omnibench::vindex {

struct Hit {
  std::string chunk_id;
  double score = 0.0;

  bool operator==(const Hit&) const = default;
};

/// Exact flat inner-product index over unit vectors. Entries keep insertion
/// order; vectors are stored row-major in one contiguous buffer.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  KnowledgeBase(std::size_t dim, std::string fingerprint);

  /// Throws Argument on duplicate id, dim mismatch or missing metadata.
  void add(const corpus::Chunk& chunk, std::span<const float> vector);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  const std::string& fingerprint() const noexcept { return fingerprint_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::span<const float> vector(std::size_t i) const;
  const corpus::Chunk& chunk(const std::string& id) const;
  const std::map<std::string, corpus::Chunk>& meta() const noexcept { return meta_; }

  /// Top-k by score descending, ties by ascending chunk id.
  std::vector<Hit> search(std::span<const float> query, std::size_t k) const;

  bool operator==(const KnowledgeBase&) const = default;

 private:
  std::size_t dim_ = 0;
  std::string fingerprint_;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::map<std::string, corpus::Chunk> meta_;
};

KnowledgeBase build(std::span<const corpus::Chunk> chunks, const embedding::Embedder& embedder);

inline constexpr std::uint16_t kFormatVersion = 1;

/// Writes `<path>` (binary vectors + ids + CRC32) and `<path>.meta.json`
/// (fingerprint, chunk metadata, binary checksum). Empty KBs are rejected.
void save(const KnowledgeBase& kb, const std::string& path);

/// Errors: BadMagic, VersionMismatch, Truncated, Checksum, Io, Format.
KnowledgeBase load(const std::string& path);

std::string sidecar_path(const std::string& path);

/// Serialized binary image, as written by save().
std::vector<std::uint8_t> encode_binary(const KnowledgeBase& kb);

}  // namespace omnibench::vindex
