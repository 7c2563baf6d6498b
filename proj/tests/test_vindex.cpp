#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "omnibench/error.hpp"
#include "omnibench/vindex.hpp"
#include "test_util.hpp"

using namespace omnibench;
using namespace omnibench::vindex;

namespace {

corpus::Chunk make_chunk(const std::string& id, const std::string& text = "text") {
  corpus::Chunk c;
  c.id = id;
  c.doc_id = id.substr(0, id.find('#'));
  c.text = text;
  c.char_span = {0, text.size()};
  return c;
}

std::vector<float> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g;
  std::vector<double> v(dim);
  double n2 = 0;
  for (auto& x : v) {
    x = g(rng);
    n2 += x * x;
  }
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / std::sqrt(n2));
  return out;
}

std::vector<Hit> scan_oracle(const KnowledgeBase& kb, std::span<const float> q, std::size_t k) {
  std::vector<Hit> all;
  for (std::size_t i = 0; i < kb.size(); ++i) {
    double s = 0;
    const auto v = kb.vector(i);
    for (std::size_t d = 0; d < q.size(); ++d) s += static_cast<double>(q[d]) * v[d];
    all.push_back({kb.ids()[i], s});
  }
  std::sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) {
    return a.score != b.score ? a.score > b.score : a.chunk_id < b.chunk_id;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

ErrorKind load_error(const std::string& path) {
  try {
    load(path);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

}  // namespace

TEST_CASE("build indexes every chunk with resolvable metadata") {
  embedding::HashEmbedder e(32);
  const std::vector<corpus::Chunk> chunks = {make_chunk("a#0", "rivers of france"), make_chunk("a#1", "loire and seine"),
                                             make_chunk("b#0", "prime numbers")};
  const auto kb = build(chunks, e);
  CHECK(kb.size() == 3);
  CHECK(kb.dim() == 32);
  CHECK(kb.fingerprint() == e.fingerprint());
  for (const auto& c : chunks) CHECK(kb.chunk(c.id) == c);
  CHECK_THROWS_AS(kb.chunk("zzz"), Error);
}

TEST_CASE("building twice gives byte-identical serializations") {
  embedding::HashEmbedder e(16);
  const std::vector<corpus::Chunk> chunks = {make_chunk("x#0", "one two"), make_chunk("x#1", "three four")};
  CHECK(encode_binary(build(chunks, e)) == encode_binary(build(chunks, e)));
}

TEST_CASE("100 random chunks: entry count and id set match a loop oracle") {
  std::mt19937_64 rng(100);
  embedding::HashEmbedder e(256);
  std::vector<corpus::Chunk> chunks;
  std::set<std::string> expected;
  for (int i = 0; i < 100; ++i) {
    const std::string id = "doc" + std::to_string(rng() % 1000) + "#" + std::to_string(i);
    chunks.push_back(make_chunk(id, "token" + std::to_string(rng() % 50) + " word" + std::to_string(i) + " river"));
    expected.insert(id);
  }
  const auto kb = build(chunks, e);
  CHECK(kb.size() == expected.size());
  CHECK(std::set<std::string>(kb.ids().begin(), kb.ids().end()) == expected);
}

TEST_CASE("add rejects duplicates, wrong dims and non-finite vectors") {
  KnowledgeBase kb(2, "fp");
  const std::vector<float> v = {1.0f, 0.0f};
  kb.add(make_chunk("a#0"), v);
  CHECK_THROWS_AS(kb.add(make_chunk("a#0"), v), Error);
  CHECK_THROWS_AS(kb.add(make_chunk("a#1"), std::vector<float>{1.0f}), Error);
  CHECK_THROWS_AS(kb.add(make_chunk("a#2"), std::vector<float>{NAN, 0.0f}), Error);
  CHECK_THROWS_AS(build({}, embedding::HashEmbedder(4)), Error);
}

TEST_CASE("orthogonal fixture orders hits by geometry") {
  KnowledgeBase kb(2, "fp");
  kb.add(make_chunk("b"), std::vector<float>{0.0f, 1.0f});
  kb.add(make_chunk("a"), std::vector<float>{1.0f, 0.0f});
  const auto hits = kb.search(std::vector<float>{1.0f, 0.0f}, 5);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0] == Hit{"a", 1.0});
  CHECK(hits[1] == Hit{"b", 0.0});
}

TEST_CASE("ties are broken by ascending chunk id") {
  KnowledgeBase kb(2, "fp");
  for (const char* id : {"m", "c", "x", "a"}) kb.add(make_chunk(id), std::vector<float>{0.6f, 0.8f});
  const auto hits = kb.search(std::vector<float>{1.0f, 0.0f}, 3);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].chunk_id == "a");
  CHECK(hits[1].chunk_id == "c");
  CHECK(hits[2].chunk_id == "m");
}

TEST_CASE("search edge cases") {
  KnowledgeBase empty(4, "fp");
  CHECK(empty.search(std::vector<float>(4, 0.5f), 3).empty());
  KnowledgeBase kb(2, "fp");
  kb.add(make_chunk("a"), std::vector<float>{1.0f, 0.0f});
  CHECK_THROWS_AS(kb.search(std::vector<float>{1.0f, 0.0f}, 0), Error);
  CHECK_THROWS_AS(kb.search(std::vector<float>{1.0f, 0.0f, 0.0f}, 1), Error);
}

TEST_CASE("1000 random unit vectors: top-k equals the linear-scan oracle") {
  std::mt19937_64 rng(64);
  KnowledgeBase kb(64, "fp");
  for (int i = 0; i < 1000; ++i) kb.add(make_chunk("c" + std::to_string(i)), random_unit(rng, 64));
  for (int trial = 0; trial < 10; ++trial) {
    const auto q = random_unit(rng, 64);
    for (std::size_t k : {1u, 5u, 50u, 2000u}) {
      const auto got = kb.search(q, k);
      const auto want = scan_oracle(kb, q, k);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].chunk_id == want[i].chunk_id);
    }
  }
}

TEST_CASE("save/load round trip preserves value equality") {
  testutil::TempDir dir;
  embedding::HashEmbedder e(8);
  const std::vector<corpus::Chunk> chunks = {make_chunk("d#0", "alpha beta"), make_chunk("d#1", "gamma delta"),
                                             make_chunk("e#0", "unicode caf\xC3\xA9")};
  const auto kb = build(chunks, e);
  save(kb, dir / "kb.obkb");
  CHECK(std::filesystem::exists(dir / "kb.meta.json"));
  CHECK(load(dir / "kb.obkb") == kb);
}

TEST_CASE("empty knowledge bases are rejected at save time") {
  testutil::TempDir dir;
  CHECK_THROWS_AS(save(KnowledgeBase(4, "fp"), dir / "kb.obkb"), Error);
}

TEST_CASE("every single-byte corruption is detected") {
  testutil::TempDir dir;
  embedding::HashEmbedder e(4);
  const auto kb = build(std::vector<corpus::Chunk>{make_chunk("d#0", "alpha"), make_chunk("d#1", "beta")}, e);
  save(kb, dir / "kb.obkb");
  const std::string good = testutil::slurp(dir / "kb.obkb");
  constexpr std::size_t kHeader = 18;
  for (std::size_t pos = 0; pos < good.size(); ++pos) {
    std::string bad = good;
    bad[pos] = static_cast<char>(bad[pos] ^ 0x5A);
    testutil::spit(dir.path() / "kb.obkb", bad);
    const auto kind = load_error(dir / "kb.obkb");
    CAPTURE(pos);
    CHECK(kind != ErrorKind::Internal);
    if (pos >= kHeader) CHECK(kind == ErrorKind::Checksum);
  }
}

TEST_CASE("load distinguishes bad magic, version and truncation") {
  testutil::TempDir dir;
  embedding::HashEmbedder e(4);
  save(build(std::vector<corpus::Chunk>{make_chunk("d#0", "alpha")}, e), dir / "kb.obkb");
  const std::string good = testutil::slurp(dir / "kb.obkb");

  testutil::spit(dir.path() / "kb.obkb", "NOPE" + good.substr(4));
  CHECK(load_error(dir / "kb.obkb") == ErrorKind::BadMagic);
  testutil::spit(dir.path() / "kb.obkb", "");
  CHECK(load_error(dir / "kb.obkb") == ErrorKind::Truncated);
  testutil::spit(dir.path() / "kb.obkb", good.substr(0, 10));
  CHECK(load_error(dir / "kb.obkb") == ErrorKind::Truncated);
  testutil::spit(dir.path() / "kb.obkb", good.substr(0, good.size() - 9));
  CHECK(load_error(dir / "kb.obkb") == ErrorKind::Truncated);
  std::string v2 = good;
  v2[4] = 2;
  testutil::spit(dir.path() / "kb.obkb", v2);
  CHECK(load_error(dir / "kb.obkb") == ErrorKind::VersionMismatch);
  CHECK(load_error(dir / "missing.obkb") == ErrorKind::Io);
}

TEST_CASE("a sidecar from another index is refused") {
  testutil::TempDir dir;
  embedding::HashEmbedder e(4);
  save(build(std::vector<corpus::Chunk>{make_chunk("d#0", "alpha")}, e), dir / "a.obkb");
  save(build(std::vector<corpus::Chunk>{make_chunk("d#0", "beta")}, e), dir / "b.obkb");
  std::filesystem::copy_file(dir / "b.meta.json", dir / "a.meta.json", std::filesystem::copy_options::overwrite_existing);
  CHECK(load_error(dir / "a.obkb") == ErrorKind::Checksum);
  std::filesystem::remove(dir / "a.meta.json");
  CHECK(load_error(dir / "a.obkb") == ErrorKind::Io);
}

TEST_CASE("sidecar path replaces the extension") {
  CHECK(sidecar_path("out/kb.obkb") == "out/kb.meta.json");
  CHECK(sidecar_path("kb") == "kb.meta.json");
}
