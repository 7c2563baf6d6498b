#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "omnibench/omnibench.h"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  ob_free_string(s);
  return out;
}

std::string fixture(const std::string& rel) { return std::string(OB_FIXTURES) + "/" + rel; }

struct TempPath {
  std::filesystem::path path;
  TempPath() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("omnibench-capi-" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempPath() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace

TEST_CASE("status names and exit codes") {
  CHECK(std::string(ob_version()) == "0.1.0");
  CHECK(std::string(ob_status_name(OB_ERR_CHECKSUM)) == "checksum");
  CHECK(ob_exit_code(OB_OK) == 0);
  CHECK(ob_exit_code(OB_ERR_INTERNAL) == 1);
  CHECK(ob_exit_code(OB_ERR_DEGENERATE) == 1);
  CHECK(ob_exit_code(OB_ERR_CONFIG) == 2);
  CHECK(ob_exit_code(OB_ERR_ARGUMENT) == 2);
  CHECK(ob_exit_code(OB_ERR_INGESTION) == 3);
  CHECK(ob_exit_code(OB_ERR_BAD_MAGIC) == 3);
  CHECK(ob_exit_code(OB_ERR_PROVIDER) == 4);
  CHECK(ob_exit_code(OB_ERR_PROTOCOL) == 4);
}

TEST_CASE("metric entry points") {
  double v = 0;
  REQUIRE(ob_improvements(0.682, 0.511, &v) == OB_OK);
  CHECK(v == doctest::Approx(0.171));
  CHECK(ob_improvements(1.2, 0.5, &v) == OB_ERR_ARGUMENT);
  CHECK(std::string(ob_last_error()).find("S_rag") != std::string::npos);
  REQUIRE(ob_transformation(1, 1, 1, 0.4, 0.3, 0.3, &v) == OB_OK);
  CHECK(v == doctest::Approx(1.0));
  REQUIRE(ob_transformation(2, 1, 1, 0.4, 0.3, 0.3, &v) == OB_OK);
  CHECK(v == doctest::Approx(0.8));
  CHECK(ob_transformation(0, 1, 1, 0.4, 0.3, 0.3, &v) == OB_ERR_ARGUMENT);
  CHECK(ob_transformation(1, 1, 1, 0, 0, 0, &v) == OB_ERR_ARGUMENT);
  CHECK(ob_improvements(0.5, 0.5, nullptr) == OB_ERR_ARGUMENT);
  REQUIRE(ob_improvements(0.5, 0.5, &v) == OB_OK);
  CHECK(std::string(ob_last_error()).empty());
}

TEST_CASE("embedder handle") {
  ob_embedder* e = nullptr;
  REQUIRE(ob_embedder_create(R"({"kind": "hash", "dim": 8})", &e) == OB_OK);
  CHECK(ob_embedder_dim(e) == 8);
  char* fp = nullptr;
  REQUIRE(ob_embedder_fingerprint(e, &fp) == OB_OK);
  CHECK(take(fp) == "hash-fnv1a64-signed/v1/dim=8");
  std::vector<float> v(8);
  REQUIRE(ob_embedder_embed(e, "The quick brown fox jumps over the lazy dog.", v.data(), v.size()) == OB_OK);
  CHECK(v[4] == doctest::Approx(0.832050294));
  CHECK(v[1] == doctest::Approx(-0.277350098));
  CHECK(ob_embedder_embed(e, "alpha", v.data(), 4) == OB_ERR_ARGUMENT);
  ob_embedder_destroy(e);

  CHECK(ob_embedder_create(R"({"kind": "magic"})", &e) == OB_ERR_CONFIG);
  CHECK(e == nullptr);
  CHECK(ob_embedder_create("{not json", &e) == OB_ERR_CONFIG);
  ob_embedder_destroy(nullptr);
}

TEST_CASE("knowledge base handle round trip and search") {
  TempPath tmp;
  ob_kb* kb = nullptr;
  char* summary = nullptr;
  const auto cfg = nlohmann::json{{"manifest", fixture("corpus2/manifest.json")},
                                  {"chunk_size", 16},
                                  {"chunk_overlap", 4}}.dump();
  REQUIRE(ob_kb_build(cfg.c_str(), &kb, &summary) == OB_OK);
  CHECK(nlohmann::json::parse(take(summary))["chunks"] == 14);
  CHECK(ob_kb_size(kb) == 14);
  CHECK(ob_kb_dim(kb) == 256);
  const auto path = (tmp.path / "kb.obkb").string();
  REQUIRE(ob_kb_save(kb, path.c_str()) == OB_OK);

  ob_kb* loaded = nullptr;
  REQUIRE(ob_kb_load(path.c_str(), &loaded) == OB_OK);
  CHECK(ob_kb_size(loaded) == 14);

  ob_embedder* e = nullptr;
  REQUIRE(ob_embedder_create(R"({"dim": 256})", &e) == OB_OK);
  char* hits = nullptr;
  REQUIRE(ob_kb_search_text(loaded, e, "digits of pi", 3, &hits) == OB_OK);
  const auto h = nlohmann::json::parse(take(hits));
  REQUIRE(h.size() == 3);
  CHECK(h[0]["chunk_id"].get<std::string>().rfind("pi#", 0) == 0);
  CHECK(h[0]["score"] >= h[1]["score"]);

  std::vector<float> q(256, 0.0f);
  q[0] = 1.0f;
  REQUIRE(ob_kb_search(loaded, q.data(), q.size(), 50, &hits) == OB_OK);
  CHECK(nlohmann::json::parse(take(hits)).size() == 14);
  CHECK(ob_kb_search(loaded, q.data(), 3, 1, &hits) == OB_ERR_ARGUMENT);

  ob_embedder* small = nullptr;
  REQUIRE(ob_embedder_create(R"({"dim": 16})", &small) == OB_OK);
  CHECK(ob_kb_search_text(loaded, small, "pi", 1, &hits) == OB_ERR_CONFIG);

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(40);
    char c = 0;
    f.read(&c, 1);
    f.seekp(40);
    c = static_cast<char>(c ^ 0x5a);
    f.write(&c, 1);
  }
  ob_kb* corrupt = nullptr;
  CHECK(ob_kb_load(path.c_str(), &corrupt) == OB_ERR_CHECKSUM);
  CHECK(corrupt == nullptr);
  CHECK(ob_kb_load((tmp.path / "none.obkb").string().c_str(), &corrupt) != OB_OK);

  ob_embedder_destroy(small);
  ob_embedder_destroy(e);
  ob_kb_destroy(loaded);
  ob_kb_destroy(kb);
}

TEST_CASE("stage entry points") {
  TempPath tmp;
  char* out = nullptr;
  const auto gen = nlohmann::json{{"triples", fixture("gen/triples.tsv")},
                                  {"relations", fixture("gen/relations.json")},
                                  {"out", (tmp.path / "ds.json").string()}}.dump();
  REQUIRE(ob_generate(gen.c_str(), &out) == OB_OK);
  CHECK(nlohmann::json::parse(take(out))["items"] == 64);

  CHECK(ob_generate(R"({"bogus": 1})", &out) == OB_ERR_CONFIG);
  CHECK(std::string(ob_last_error()).find("bogus") != std::string::npos);
  CHECK(ob_eval(R"({"dataset": "d", "kb": "/nonexistent.obkb", "out_dir": "o"})", &out) == OB_ERR_CONFIG);
  CHECK(ob_report(R"({"run_dir": "/nonexistent-run"})", &out) == OB_ERR_CONFIG);

  REQUIRE(ob_defaults("report", &out) == OB_OK);
  CHECK(nlohmann::json::parse(take(out))["ratio_mode"] == "ratio-of-means");
  CHECK(ob_defaults("other", &out) == OB_ERR_ARGUMENT);
}
