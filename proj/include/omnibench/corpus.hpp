#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace omnibench::corpus {

/// The nine knowledge fields, in canonical reporting order.
enum class DomainTag {
  Geography,
  History,
  Health,
  Mathematics,
  Nature,
  People,
  Society,
  Technology,
  Culture,
};

inline constexpr std::array<DomainTag, 9> kAllDomains = {
    DomainTag::Geography, DomainTag::History, DomainTag::Health,
    DomainTag::Mathematics, DomainTag::Nature, DomainTag::People,
    DomainTag::Society, DomainTag::Technology, DomainTag::Culture};

std::string_view to_string(DomainTag tag) noexcept;

/// Case-insensitive. Returns nullopt for anything outside the nine names.
std::optional<DomainTag> parse_domain(std::string_view name);

/// Like parse_domain but throws a Config error listing the valid names.
DomainTag parse_domain_or_throw(std::string_view name);

struct Document {
  std::string id;
  DomainTag domain = DomainTag::Geography;
  std::string title;
  std::string text;
  std::string source_uri;
};

struct Chunk {
  std::string id;
  std::string doc_id;
  std::size_t seq = 0;
  std::string text;
  /// Byte offsets [start, end) into the cleaned document text.
  std::pair<std::size_t, std::size_t> char_span{0, 0};

  bool operator==(const Chunk&) const = default;
};

struct ChunkConfig {
  std::size_t size = 256;
  std::size_t overlap = 32;
};

/// Normalizes line endings to LF, strips control characters, collapses
/// whitespace runs inside a line to one space, trims every line and drops
/// blank lines. Idempotent. `doc_id` is only used in the error message when
/// the input is not valid UTF-8.
std::string clean(std::string_view raw_text, std::string_view doc_id = {});

/// A whitespace-delimited token of cleaned text with its byte span.
struct Token {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Splits on Unicode whitespace. Input must be valid UTF-8.
std::vector<Token> tokenize(std::string_view text);

/// Fixed-size token windows with overlap over clean(doc.text).
std::vector<Chunk> chunk(const Document& doc, const ChunkConfig& config);

void validate(const ChunkConfig& config);

/// Reads a JSON manifest: [{"id","domain","title","path","source_uri"}].
/// Paths are resolved relative to the manifest's directory.
std::vector<Document> load_manifest(const std::string& manifest_path);

}  // namespace omnibench::corpus
