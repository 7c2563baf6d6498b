#include "omnibench/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "omnibench/error.hpp"
#include "utf8.hpp"

namespace omnibench::corpus {
namespace {

constexpr std::array<std::string_view, 9> kDomainNames = {
    "Geography", "History", "Health", "Mathematics", "Nature",
    "People", "Society", "Technology", "Culture"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Ingestion, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

std::string_view to_string(DomainTag tag) noexcept {
  return kDomainNames[static_cast<std::size_t>(tag)];
}

std::optional<DomainTag> parse_domain(std::string_view name) {
  for (std::size_t i = 0; i < kDomainNames.size(); ++i) {
    if (iequals(name, kDomainNames[i])) return kAllDomains[i];
  }
  return std::nullopt;
}

DomainTag parse_domain_or_throw(std::string_view name) {
  if (auto tag = parse_domain(name)) return *tag;
  std::string valid;
  for (auto n : kDomainNames) {
    if (!valid.empty()) valid += ", ";
    valid += n;
  }
  fail(ErrorKind::Config, "unknown domain '" + std::string(name) + "' (valid: " + valid + ")");
}

std::string clean(std::string_view raw_text, std::string_view doc_id) {
  std::string out;
  out.reserve(raw_text.size());
  std::string line;
  bool pending_space = false;

  const auto flush_line = [&] {
    if (!line.empty()) {
      if (!out.empty()) out.push_back('\n');
      out += line;
    }
    line.clear();
    pending_space = false;
  };

  for (std::size_t pos = 0; pos < raw_text.size();) {
    const auto d = utf8::decode(raw_text, pos);
    if (!d) {
      fail(ErrorKind::Ingestion, "document '" + std::string(doc_id) +
                                     "': invalid UTF-8 at byte " + std::to_string(pos));
    }
    const char32_t cp = d->code_point;
    if (cp == U'\r') {
      flush_line();
      if (pos + 1 < raw_text.size() && raw_text[pos + 1] == '\n') ++pos;
    } else if (cp == U'\n') {
      flush_line();
    } else if (utf8::is_space(cp)) {
      if (!line.empty()) pending_space = true;
    } else if (utf8::is_control(cp) || cp == 0xFEFF) {
      // stripped
    } else {
      if (pending_space) line.push_back(' ');
      pending_space = false;
      line.append(raw_text.substr(pos, d->length));
    }
    pos += d->length;
  }
  flush_line();
  return out;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::optional<std::size_t> start;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto d = utf8::decode(text, pos);
    if (!d) fail(ErrorKind::Argument, "tokenize: invalid UTF-8 at byte " + std::to_string(pos));
    if (utf8::is_space(d->code_point)) {
      if (start) tokens.push_back({*start, pos});
      start.reset();
    } else if (!start) {
      start = pos;
    }
    pos += d->length;
  }
  if (start) tokens.push_back({*start, pos});
  return tokens;
}

void validate(const ChunkConfig& config) {
  if (config.size == 0) fail(ErrorKind::Config, "chunk size must be positive");
  if (config.overlap >= config.size) {
    fail(ErrorKind::Config, "chunk overlap (" + std::to_string(config.overlap) +
                                ") must be smaller than chunk size (" +
                                std::to_string(config.size) + ")");
  }
}

std::vector<Chunk> chunk(const Document& doc, const ChunkConfig& config) {
  validate(config);
  const std::string text = clean(doc.text, doc.id);
  const auto tokens = tokenize(text);
  if (tokens.empty()) {
    fail(ErrorKind::Ingestion, "document '" + doc.id + "' is empty after cleaning");
  }

  const std::size_t stride = config.size - config.overlap;
  std::vector<Chunk> chunks;
  for (std::size_t first = 0;; first += stride) {
    const std::size_t last = std::min(first + config.size, tokens.size());
    Chunk c;
    c.seq = chunks.size();
    c.id = doc.id + "#" + std::to_string(c.seq);
    c.doc_id = doc.id;
    c.char_span = {tokens[first].begin, tokens[last - 1].end};
    c.text = text.substr(c.char_span.first, c.char_span.second - c.char_span.first);
    chunks.push_back(std::move(c));
    if (last == tokens.size()) break;
  }
  return chunks;
}

std::vector<Document> load_manifest(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  const fs::path manifest(manifest_path);
  if (!fs::exists(manifest)) fail(ErrorKind::Ingestion, "corpus manifest not found: " + manifest_path);

  nlohmann::json root;
  try {
    root = nlohmann::json::parse(read_file(manifest));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Ingestion, manifest_path + ": " + e.what());
  }
  if (!root.is_array()) fail(ErrorKind::Ingestion, manifest_path + ": manifest must be a JSON array");

  const fs::path base = manifest.parent_path();
  std::vector<Document> docs;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const auto& entry = root[i];
    const std::string where = manifest_path + " entry " + std::to_string(i);
    if (!entry.is_object()) fail(ErrorKind::Ingestion, where + ": expected an object");
    for (const char* key : {"id", "domain", "path"}) {
      if (!entry.contains(key) || !entry[key].is_string()) {
        fail(ErrorKind::Ingestion, where + ": missing string field '" + key + "'");
      }
    }
    Document doc;
    doc.id = entry["id"].get<std::string>();
    if (doc.id.empty()) fail(ErrorKind::Ingestion, where + ": empty id");
    if (!seen.insert(doc.id).second) fail(ErrorKind::Ingestion, where + ": duplicate id '" + doc.id + "'");
    const auto domain = parse_domain(entry["domain"].get<std::string>());
    if (!domain) {
      fail(ErrorKind::Ingestion, where + ": unknown domain '" + entry["domain"].get<std::string>() + "'");
    }
    doc.domain = *domain;
    doc.title = entry.value("title", "");
    const fs::path path = base / entry["path"].get<std::string>();
    doc.source_uri = entry.value("source_uri", path.string());
    doc.text = read_file(path);
    if (!utf8::is_valid(doc.text)) fail(ErrorKind::Ingestion, "document '" + doc.id + "': invalid UTF-8");
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace omnibench::corpus
