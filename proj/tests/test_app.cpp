#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "omnibench/app.hpp"
#include "omnibench/error.hpp"
#include "omnibench/vindex.hpp"
#include "stub_server.hpp"
#include "test_util.hpp"

using namespace omnibench;
using nlohmann::json;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an omnibench::Error");
  return ErrorKind::Internal;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

std::string build_kb9(const testutil::TempDir& dir) {
  nlohmann::ordered_json summary;
  const auto kb = app::build_kb(
      {{"manifest", testutil::fixture("corpus9/manifest.json")}, {"chunk_size", 16}, {"chunk_overlap", 4}}, summary);
  const auto path = dir / "kb.obkb";
  vindex::save(kb, path);
  return path;
}

json mock_eval(const testutil::TempDir& dir, const std::string& kb, const std::string& out) {
  return {{"dataset", testutil::fixture("e2e/dataset.json")},
          {"kb", kb},
          {"out_dir", dir / out},
          {"provider", {{"kind", "mock"}, {"mock_script", testutil::fixture("e2e/mock_identical.json")}}},
          {"profiler", {{"clock", "virtual"}, {"memory_probe", "fixed"}, {"fixed_mem_mb", 100.0}, {"gpu_command", ""}}}};
}

}  // namespace

TEST_CASE("defaults cover every stage") {
  for (const char* stage : {"kb", "gen", "eval", "report"}) CHECK(app::defaults(stage).is_object());
  CHECK(app::defaults("eval")["weights"]["w_time"] == 0.4);
  CHECK(app::defaults("eval")["provider"]["kind"] == "remote");
  CHECK(kind_of([] { app::defaults("nope"); }) == ErrorKind::Argument);
}

TEST_CASE("unknown keys are rejected at any depth") {
  nlohmann::ordered_json s;
  CHECK(message_of([&] { app::build_kb({{"manifets", "x"}}, s); }).find("'manifets'") != std::string::npos);
  CHECK(message_of([&] { app::build_kb({{"embedder", {{"dimm", 3}}}}, s); }).find("'embedder.dimm'") !=
        std::string::npos);
  CHECK(kind_of([&] { app::build_kb({{"chunk_size", "big"}, {"manifest", "m"}}, s); }) == ErrorKind::Config);
}

TEST_CASE("knowledge base build summary") {
  nlohmann::ordered_json s;
  const auto kb = app::build_kb({{"manifest", testutil::fixture("corpus2/manifest.json")},
                                 {"chunk_size", 16},
                                 {"chunk_overlap", 4},
                                 {"embedder", {{"api_key", "sk-secret"}}}},
                                s);
  CHECK(kb.size() == 14);
  CHECK(s["chunks"] == 14);
  CHECK(s["documents"] == 2);
  CHECK(s["chunks_per_domain"]["Geography"] == 8);
  CHECK(s["chunks_per_domain"]["Mathematics"] == 6);
  CHECK(s["fingerprint"] == "hash-fnv1a64-signed/v1/dim=256");
  CHECK(s["config"]["embedder"]["api_key"] == "<redacted>");
  CHECK(kind_of([&] { app::build_kb({{"manifest", testutil::fixture("corpus2/manifest.json")}, {"chunk_size", 8},
                                     {"chunk_overlap", 8}},
                                    s); }) == ErrorKind::Config);
  CHECK(kind_of([&] { app::build_kb({{"manifest", "/nonexistent/manifest.json"}}, s); }) == ErrorKind::Ingestion);
  CHECK(kind_of([&] { app::build_kb(json::object(), s); }) == ErrorKind::Config);
}

TEST_CASE("generation writes a deterministic dataset") {
  testutil::TempDir dir;
  const json cfg = {{"triples", testutil::fixture("gen/triples.tsv")},
                    {"relations", testutil::fixture("gen/relations.json")},
                    {"out", dir / "a.json"}};
  const auto s = app::generate(cfg);
  CHECK(s["closure_facts"] == 32);
  CHECK(s["items"] == 64);
  CHECK(s["duplicates_dropped"] == 1);
  CHECK(s["per_pattern"]["direct"] == 9);
  CHECK(s["per_pattern"]["negation"] == 32);
  auto again = cfg;
  again["out"] = dir / "b.json";
  app::generate(again);
  CHECK(testutil::slurp(dir / "a.json") == testutil::slurp(dir / "b.json"));

  auto capped = cfg;
  capped["caps"] = {{"negation", 5}};
  capped["patterns"] = {"direct", "negation"};
  const auto c = app::generate(capped);
  CHECK(c["per_pattern"]["negation"] == 5);
  CHECK(c["items"] == 14);

  auto bad = cfg;
  bad["patterns"] = {"direct", "sideways"};
  const auto msg = message_of([&] { app::generate(bad); });
  CHECK(msg.find("sideways") != std::string::npos);
  CHECK(msg.find("direct, negation, inverse, symmetric, transitive, composite") != std::string::npos);
  bad = cfg;
  bad["rules"] = {"reflexive"};
  CHECK(kind_of([&] { app::generate(bad); }) == ErrorKind::Config);
}

TEST_CASE("mock evaluation end to end") {
  testutil::TempDir dir;
  const auto kb = build_kb9(dir);
  const auto s = app::evaluate(mock_eval(dir, kb, "run"));
  CHECK(s["domains"] == 9);
  CHECK(s["overall"]["n"] == 18);
  CHECK(s["overall"]["improvements"] == 0.0);
  CHECK(s["overall"]["transformation"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  for (const char* f : {"questions.jsonl", "run_meta.json", "report.csv", "report.json", "radar.json", "radar.svg"}) {
    CHECK(std::filesystem::exists(dir.path() / "run" / f));
  }
  const auto csv = testutil::slurp(dir.path() / "run" / "report.csv");
  CHECK(csv.find("Mathematics,50.0%,50.0%,+0.0%,1.0000,gpu_unavailable\n") != std::string::npos);

  const auto meta = json::parse(testutil::slurp(dir.path() / "run" / "run_meta.json"));
  CHECK(meta.contains("started_at"));
  CHECK(meta["config"]["provider"]["kind"] == "mock");

  app::evaluate(mock_eval(dir, kb, "run2"));
  for (const char* f : {"report.csv", "report.json", "radar.json", "radar.svg", "questions.jsonl"}) {
    CHECK(testutil::slurp(dir.path() / "run" / f) == testutil::slurp(dir.path() / "run2" / f));
  }
}

TEST_CASE("rerender applies new weights to the logged runs") {
  testutil::TempDir dir;
  const auto kb = build_kb9(dir);
  app::evaluate(mock_eval(dir, kb, "run"));
  const auto s = app::rerender({{"run_dir", dir / "run"},
                                {"out_dir", dir / "re"},
                                {"weights", {{"w_time", 0.5}, {"w_gpu", 0.5}, {"w_mem", 0.5}}}});
  CHECK(s["overall"]["transformation"].get<double>() == doctest::Approx(1.5));
  CHECK(s["notices"].dump().find("weights sum to") != std::string::npos);
  const auto rep = json::parse(testutil::slurp(dir.path() / "re" / "report.json"));
  CHECK(rep["meta"]["weights"]["w_gpu"] == 0.5);
  CHECK(rep["meta"]["provider"] == "mock");

  const auto same = app::rerender({{"run_dir", dir / "run"}, {"out_dir", dir / "same"}});
  CHECK(testutil::slurp(dir.path() / "same" / "report.csv") == testutil::slurp(dir.path() / "run" / "report.csv"));
  CHECK(kind_of([&] { app::rerender({{"run_dir", dir / "run"}, {"weights", {{"w_time", -1.0}}}}); }) ==
        ErrorKind::Config);
}

TEST_CASE("rerender reports the offending log line") {
  testutil::TempDir dir;
  std::filesystem::create_directories(dir.path() / "bad");
  testutil::spit(dir.path() / "bad" / "questions.jsonl", "\n{\"qa_id\": 1}\n");
  const auto msg = message_of([&] { app::rerender({{"run_dir", dir / "bad"}}); });
  CHECK(msg.find("questions.jsonl:2") != std::string::npos);
  CHECK(kind_of([&] { app::rerender({{"run_dir", dir / "bad"}}); }) == ErrorKind::Ingestion);
  CHECK(kind_of([&] { app::rerender({{"run_dir", dir / "missing"}}); }) == ErrorKind::Config);
}

TEST_CASE("evaluation configuration errors") {
  testutil::TempDir dir;
  const auto kb = build_kb9(dir);
  CHECK(kind_of([&] { app::evaluate(mock_eval(dir, dir / "missing.obkb", "x")); }) == ErrorKind::Config);
  auto cfg = mock_eval(dir, kb, "x");
  cfg["provider"]["kind"] = "remote";
  CHECK(kind_of([&] { app::evaluate(cfg); }) == ErrorKind::Config);
  cfg = mock_eval(dir, kb, "x");
  cfg["top_k"] = 0;
  CHECK(kind_of([&] { app::evaluate(cfg); }) == ErrorKind::Config);
  cfg = mock_eval(dir, kb, "x");
  cfg["templates"] = {{"rag", "{question} only"}};
  CHECK(kind_of([&] { app::evaluate(cfg); }) == ErrorKind::Config);
  cfg = mock_eval(dir, kb, "x");
  cfg["embedder"] = {{"kind", "hash"}, {"dim", 64}};
  CHECK(kind_of([&] { app::evaluate(cfg); }) == ErrorKind::Config);
}

TEST_CASE("remote provider settings fall back to the environment") {
  testutil::TempDir dir;
  const auto kb = build_kb9(dir);
  testutil::StubServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices": [{"message": {"content": "Yes."}}]})", "application/json");
  });
  ::setenv("OMNIBENCH_API_BASE", server.url().c_str(), 1);
  ::setenv("OMNIBENCH_API_KEY", "env-key", 1);
  auto cfg = mock_eval(dir, kb, "remote");
  cfg["provider"] = {{"kind", "remote"}, {"model", "m1"}};
  cfg["profiler"] = {{"memory_probe", "fixed"}, {"fixed_mem_mb", 10.0}, {"gpu_command", ""}, {"sample_ms", 0}};
  const auto s = app::evaluate(cfg);
  ::unsetenv("OMNIBENCH_API_BASE");
  ::unsetenv("OMNIBENCH_API_KEY");
  CHECK(server.hits() == 36);
  CHECK(server.auth().front() == "Bearer env-key");
  CHECK(s["overall"]["S_base"].get<double>() == doctest::Approx(0.5));
  const auto meta = json::parse(testutil::slurp(dir.path() / "remote" / "run_meta.json"));
  CHECK(meta["report_meta"]["provider"] == "remote:m1");
}
