#include <doctest.h>

#include <functional>
#include <sstream>

#include "omnibench/corpus.hpp"
#include "omnibench/error.hpp"
#include "test_util.hpp"

using namespace omnibench;
using namespace omnibench::corpus;

namespace {

std::vector<std::string> words_of(const Chunk& c) {
  std::vector<std::string> out;
  std::istringstream in(c.text);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an omnibench::Error");
  return ErrorKind::Internal;
}

}  // namespace

TEST_CASE("clean normalizes line endings, blank lines and indentation") {
  CHECK(clean("a\r\n\r\n  b") == "a\nb");
  CHECK(clean("") == "");
  CHECK(clean("  lead  and   inner\t\ttabs  ") == "lead and inner tabs");
  CHECK(clean("x\ry") == "x\ny");
  CHECK(clean("\xEF\xBB\xBFhello\x07 world") == "hello world");
  CHECK(clean("caf\xC3\xA9\xC2\xA0" "au\xE2\x80\x83lait") == "caf\xC3\xA9 au lait");
}

TEST_CASE("clean is idempotent") {
  for (const char* raw : {"a\r\n\r\n  b", "one  two\n\n\nthree ", "\t\tx\n y \r\n z", "already clean\ntext"}) {
    const auto once = clean(raw);
    CHECK(clean(once) == once);
  }
  CHECK(clean("already clean\ntext") == "already clean\ntext");
}

TEST_CASE("clean rejects invalid UTF-8 with an ingestion error") {
  CHECK(kind_of([] { clean("ok \xC3\x28 bad", "doc7"); }) == ErrorKind::Ingestion);
  try {
    clean("\xFF", "doc7");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("doc7") != std::string::npos);
  }
}

TEST_CASE("chunk windows follow the stride rule") {
  Document doc{"d", DomainTag::Nature, "", "t0 t1 t2 t3 t4 t5 t6 t7 t8 t9", ""};
  const auto chunks = chunk(doc, {4, 1});
  REQUIRE(chunks.size() == 3);
  CHECK(chunks[0].text == "t0 t1 t2 t3");
  CHECK(chunks[1].text == "t3 t4 t5 t6");
  CHECK(chunks[2].text == "t6 t7 t8 t9");
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    CHECK(chunks[i].id == "d#" + std::to_string(i));
    CHECK(chunks[i].seq == i);
    CHECK(chunks[i].doc_id == "d");
    const std::string cleaned = clean(doc.text);
    CHECK(cleaned.substr(chunks[i].char_span.first, chunks[i].char_span.second - chunks[i].char_span.first) ==
          chunks[i].text);
  }
}

TEST_CASE("short documents give one chunk equal to the full text") {
  Document doc{"s", DomainTag::People, "", "  only   three\nwords ", ""};
  const auto chunks = chunk(doc, {256, 32});
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].text == clean(doc.text));
}

TEST_CASE("windows cover every token and overlap by exactly the configured amount") {
  std::string text;
  for (int i = 0; i < 97; ++i) text += "w" + std::to_string(i) + (i % 7 == 6 ? "\n" : " ");
  Document doc{"long", DomainTag::History, "", text, ""};
  for (const ChunkConfig cfg : {ChunkConfig{10, 3}, ChunkConfig{16, 0}, ChunkConfig{96, 95}, ChunkConfig{97, 5}}) {
    const auto chunks = chunk(doc, cfg);
    const std::size_t stride = cfg.size - cfg.overlap;
    const std::size_t expected = 97 <= cfg.size ? 1 : 1 + (97 - cfg.size + stride - 1) / stride;
    CHECK(chunks.size() == expected);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      const auto w = words_of(chunks[i]);
      CHECK(w.front() == "w" + std::to_string(i * stride));
      if (i + 1 < chunks.size()) CHECK(w.size() == cfg.size);
    }
    CHECK(words_of(chunks.back()).back() == "w96");
  }
}

TEST_CASE("chunk preconditions") {
  Document empty{"e", DomainTag::Health, "", " \n\t \r\n", ""};
  CHECK(kind_of([&] { chunk(empty, {}); }) == ErrorKind::Ingestion);
  Document doc{"d", DomainTag::Health, "", "a b c", ""};
  CHECK(kind_of([&] { chunk(doc, {4, 4}); }) == ErrorKind::Config);
  CHECK(kind_of([&] { chunk(doc, {4, 9}); }) == ErrorKind::Config);
  CHECK(kind_of([&] { chunk(doc, {0, 0}); }) == ErrorKind::Config);
}

TEST_CASE("domain tags parse case-insensitively in canonical order") {
  CHECK(parse_domain("mathematics") == DomainTag::Mathematics);
  CHECK(parse_domain("CULTURE") == DomainTag::Culture);
  CHECK_FALSE(parse_domain("Math").has_value());
  CHECK(kind_of([] { parse_domain_or_throw("Sports"); }) == ErrorKind::Config);
  const char* order[] = {"Geography", "History", "Health", "Mathematics", "Nature",
                         "People", "Society", "Technology", "Culture"};
  for (std::size_t i = 0; i < kAllDomains.size(); ++i) CHECK(to_string(kAllDomains[i]) == order[i]);
}

TEST_CASE("load_manifest resolves paths relative to the manifest") {
  const auto docs = load_manifest(testutil::fixture("corpus2/manifest.json"));
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "rivers");
  CHECK(docs[0].domain == DomainTag::Geography);
  CHECK(docs[1].domain == DomainTag::Mathematics);
  CHECK(docs[1].source_uri == "https://example.org/pi");
  CHECK(docs[0].text.find("Loire") != std::string::npos);
}

TEST_CASE("load_manifest errors name the offending path or entry") {
  testutil::TempDir dir;
  try {
    load_manifest(dir / "missing.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Ingestion);
    CHECK(std::string(e.what()).find("missing.json") != std::string::npos);
  }

  testutil::spit(dir.path() / "a.txt", "text");
  testutil::spit(dir.path() / "dup.json",
                 R"([{"id":"x","domain":"Nature","path":"a.txt"},{"id":"x","domain":"Nature","path":"a.txt"}])");
  CHECK(kind_of([&] { load_manifest(dir / "dup.json"); }) == ErrorKind::Ingestion);
  testutil::spit(dir.path() / "dom.json", R"([{"id":"x","domain":"Sports","path":"a.txt"}])");
  CHECK(kind_of([&] { load_manifest(dir / "dom.json"); }) == ErrorKind::Ingestion);
  testutil::spit(dir.path() / "nofile.json", R"([{"id":"x","domain":"Nature","path":"nope.txt"}])");
  CHECK(kind_of([&] { load_manifest(dir / "nofile.json"); }) == ErrorKind::Ingestion);
}
