#include "omnibench/vindex.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>
#include <zlib.h>

#include "omnibench/error.hpp"

namespace omnibench::vindex {
namespace {

constexpr char kMagic[4] = {'O', 'B', 'K', 'B'};
constexpr std::size_t kHeaderSize = 4 + 2 + 4 + 8;
constexpr std::size_t kTrailerSize = 4;

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in bounded slices.
  constexpr std::size_t kSlice = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kSlice) {
    const auto len = static_cast<uInt>(std::min(kSlice, bytes.size() - off));
    crc = crc32(crc, bytes.data() + off, len);
  }
  return static_cast<std::uint32_t>(crc);
}

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i)));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(in[offset + i]) << (8 * i);
  return static_cast<T>(v);
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open knowledge base " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "short write to " + path);
}

}  // namespace

KnowledgeBase::KnowledgeBase(std::size_t dim, std::string fingerprint)
    : dim_(dim), fingerprint_(std::move(fingerprint)) {
  if (dim_ == 0) fail(ErrorKind::Argument, "knowledge base dim must be positive");
}

void KnowledgeBase::add(const corpus::Chunk& chunk, std::span<const float> vector) {
  if (vector.size() != dim_) {
    fail(ErrorKind::Argument, "chunk '" + chunk.id + "': vector dim " + std::to_string(vector.size()) +
                                  " does not match knowledge base dim " + std::to_string(dim_));
  }
  if (chunk.id.empty()) fail(ErrorKind::Argument, "chunk id must not be empty");
  if (meta_.contains(chunk.id)) fail(ErrorKind::Argument, "duplicate chunk id '" + chunk.id + "'");
  for (float v : vector) {
    if (!std::isfinite(v)) fail(ErrorKind::Argument, "chunk '" + chunk.id + "': non-finite vector entry");
  }
  ids_.push_back(chunk.id);
  data_.insert(data_.end(), vector.begin(), vector.end());
  meta_.emplace(chunk.id, chunk);
}

std::span<const float> KnowledgeBase::vector(std::size_t i) const {
  return std::span<const float>(data_).subspan(i * dim_, dim_);
}

const corpus::Chunk& KnowledgeBase::chunk(const std::string& id) const {
  const auto it = meta_.find(id);
  if (it == meta_.end()) fail(ErrorKind::Argument, "unknown chunk id '" + id + "'");
  return it->second;
}

std::vector<Hit> KnowledgeBase::search(std::span<const float> query, std::size_t k) const {
  if (k == 0) fail(ErrorKind::Argument, "k must be at least 1");
  if (empty()) return {};
  if (query.size() != dim_) {
    fail(ErrorKind::Argument, "query dim " + std::to_string(query.size()) +
                                  " does not match knowledge base dim " + std::to_string(dim_));
  }
  std::vector<double> scores(size());
  for (std::size_t i = 0; i < size(); ++i) scores[i] = embedding::dot(query, vector(i));

  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids_[a] < ids_[b];
  };
  const std::size_t n = std::min(k, size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(), better);

  std::vector<Hit> hits;
  hits.reserve(n);
  for (std::size_t i = 0; i < n; ++i) hits.push_back({ids_[order[i]], scores[order[i]]});
  return hits;
}

KnowledgeBase build(std::span<const corpus::Chunk> chunks, const embedding::Embedder& embedder) {
  if (chunks.empty()) fail(ErrorKind::Argument, "cannot build a knowledge base from zero chunks");
  std::set<std::string> seen;
  std::vector<std::string> texts;
  texts.reserve(chunks.size());
  for (const auto& c : chunks) {
    if (!seen.insert(c.id).second) fail(ErrorKind::Argument, "duplicate chunk id '" + c.id + "'");
    texts.push_back(c.text);
  }
  const auto vectors = embedder.embed_batch(texts);
  const std::size_t dim = vectors.front().size();
  if (embedder.dim() != 0 && dim != embedder.dim()) {
    fail(ErrorKind::Protocol, "embedder produced dim " + std::to_string(dim) + ", expected " +
                                  std::to_string(embedder.dim()));
  }
  KnowledgeBase kb(dim, embedder.fingerprint());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    if (vectors[i].size() != dim) fail(ErrorKind::Protocol, "embedder returned inconsistent dims");
    kb.add(chunks[i], vectors[i]);
  }
  return kb;
}

std::string sidecar_path(const std::string& path) {
  std::filesystem::path p(path);
  std::filesystem::path stem = p;
  stem.replace_extension();
  return stem.string() + ".meta.json";
}

std::vector<std::uint8_t> encode_binary(const KnowledgeBase& kb) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_le<std::uint16_t>(out, kFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(kb.dim()));
  put_le<std::uint64_t>(out, kb.size());
  for (std::size_t i = 0; i < kb.size(); ++i) {
    for (float v : kb.vector(i)) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  for (const auto& id : kb.ids()) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
    out.insert(out.end(), id.begin(), id.end());
  }
  put_le<std::uint32_t>(out, crc32_of(out));
  return out;
}

void save(const KnowledgeBase& kb, const std::string& path) {
  if (kb.empty()) fail(ErrorKind::Argument, "refusing to save an empty knowledge base");
  const auto bytes = encode_binary(kb);

  nlohmann::ordered_json meta;
  meta["format"] = "omnibench-kb-meta";
  meta["version"] = kFormatVersion;
  meta["dim"] = kb.dim();
  meta["count"] = kb.size();
  meta["fingerprint"] = kb.fingerprint();
  meta["crc32"] = get_le<std::uint32_t>(bytes, bytes.size() - kTrailerSize);
  auto& chunks = meta["chunks"] = nlohmann::ordered_json::array();
  for (const auto& id : kb.ids()) {
    const auto& c = kb.chunk(id);
    chunks.push_back({{"id", c.id},
                      {"doc_id", c.doc_id},
                      {"seq", c.seq},
                      {"char_span", {c.char_span.first, c.char_span.second}},
                      {"text", c.text}});
  }
  const std::string meta_text = meta.dump(1) + "\n";

  write_bytes(path, bytes);
  write_bytes(sidecar_path(path), std::span(reinterpret_cast<const std::uint8_t*>(meta_text.data()),
                                            meta_text.size()));
}

KnowledgeBase load(const std::string& path) {
  const auto bytes = read_bytes(path);
  const std::span<const std::uint8_t> in(bytes);

  const std::size_t magic_len = std::min<std::size_t>(4, in.size());
  if (!std::equal(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(magic_len), kMagic)) {
    fail(ErrorKind::BadMagic, path + ": not a knowledge base file (bad magic)");
  }
  if (in.size() < kHeaderSize + kTrailerSize) fail(ErrorKind::Truncated, path + ": truncated header");
  const auto version = get_le<std::uint16_t>(in, 4);
  if (version != kFormatVersion) {
    fail(ErrorKind::VersionMismatch, path + ": format version " + std::to_string(version) +
                                         ", this build reads " + std::to_string(kFormatVersion));
  }
  const auto dim = get_le<std::uint32_t>(in, 6);
  const auto count = get_le<std::uint64_t>(in, 10);
  // Minimal size with every id empty; anything shorter cannot be a complete file.
  const long double minimal = static_cast<long double>(kHeaderSize) + kTrailerSize +
                              static_cast<long double>(count) * (4.0L * dim + 4.0L);
  if (minimal > static_cast<long double>(in.size())) {
    fail(ErrorKind::Truncated, path + ": file shorter than its header declares");
  }
  const auto stored_crc = get_le<std::uint32_t>(in, in.size() - kTrailerSize);
  if (crc32_of(in.first(in.size() - kTrailerSize)) != stored_crc) {
    fail(ErrorKind::Checksum, path + ": checksum mismatch, file is corrupt");
  }
  if (dim == 0 || count == 0) fail(ErrorKind::Format, path + ": empty knowledge base");

  std::size_t off = kHeaderSize;
  std::vector<float> vectors(static_cast<std::size_t>(count) * dim);
  for (auto& v : vectors) {
    v = std::bit_cast<float>(get_le<std::uint32_t>(in, off));
    off += 4;
  }
  const std::size_t end = in.size() - kTrailerSize;
  std::vector<std::string> ids;
  ids.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    if (off + 4 > end) fail(ErrorKind::Truncated, path + ": id table truncated");
    const auto len = get_le<std::uint32_t>(in, off);
    off += 4;
    if (off + len > end) fail(ErrorKind::Truncated, path + ": id table truncated");
    ids.emplace_back(reinterpret_cast<const char*>(in.data() + off), len);
    off += len;
  }
  if (off != end) fail(ErrorKind::Format, path + ": trailing bytes after id table");

  const std::string meta_path = sidecar_path(path);
  std::ifstream meta_in(meta_path);
  if (!meta_in) fail(ErrorKind::Io, "missing metadata sidecar " + meta_path);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, meta_path + ": " + e.what());
  }
  try {
    if (meta.at("crc32").get<std::uint32_t>() != stored_crc) {
      fail(ErrorKind::Checksum, meta_path + ": sidecar does not belong to " + path);
    }
    const auto& chunks = meta.at("chunks");
    if (meta.at("dim").get<std::uint64_t>() != dim || chunks.size() != count) {
      fail(ErrorKind::Format, meta_path + ": sidecar disagrees with index header");
    }
    KnowledgeBase kb(dim, meta.at("fingerprint").get<std::string>());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto& m = chunks[i];
      corpus::Chunk c;
      c.id = m.at("id").get<std::string>();
      if (c.id != ids[i]) fail(ErrorKind::Format, meta_path + ": chunk order differs from index");
      c.doc_id = m.at("doc_id").get<std::string>();
      c.seq = m.at("seq").get<std::size_t>();
      c.char_span = {m.at("char_span").at(0).get<std::size_t>(), m.at("char_span").at(1).get<std::size_t>()};
      c.text = m.at("text").get<std::string>();
      kb.add(c, std::span<const float>(vectors).subspan(i * dim, dim));
    }
    return kb;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, meta_path + ": " + e.what());
  }
}

}  // namespace omnibench::vindex
