#include <doctest.h>

#include "omnibench/embedding.hpp"
#include "omnibench/error.hpp"
#include "omnibench/http.hpp"
#include "stub_server.hpp"

using namespace omnibench;
using namespace omnibench::http;

TEST_CASE("status classification") {
  CHECK(classify(200) == StatusClass::Ok);
  CHECK(classify(204) == StatusClass::Ok);
  for (int s : {0, 408, 429, 500, 502, 503}) CHECK(classify(s) == StatusClass::Retryable);
  for (int s : {400, 401, 403, 404, 422}) CHECK(classify(s) == StatusClass::Fatal);
}

TEST_CASE("backoff doubles from half a second and caps at eight") {
  RetryPolicy p;
  CHECK(p.backoff(1) == 0.5);
  CHECK(p.backoff(2) == 1.0);
  CHECK(p.backoff(3) == 2.0);
  CHECK(p.backoff(5) == 8.0);
  CHECK(p.backoff(9) == 8.0);
}

TEST_CASE("retryable failures are retried with backoff, then succeed") {
  int calls = 0;
  testutil::StubServer server([&](const httplib::Request&, httplib::Response& res) {
    if (++calls < 3) {
      res.status = 503;
      res.set_content("busy", "text/plain");
    } else {
      res.set_content(R"({"ok": true})", "application/json");
    }
  });
  std::vector<double> slept;
  const auto out = post_json({server.url(), "k", 5}, "/v1/x", {{"a", 1}}, {}, [&](double s) { slept.push_back(s); });
  CHECK(out["ok"] == true);
  CHECK(server.hits() == 3);
  CHECK(slept == std::vector<double>{0.5, 1.0});
  CHECK(server.auth().front() == "Bearer k");
}

TEST_CASE("retry budget is four attempts") {
  testutil::StubServer server([](const httplib::Request&, httplib::Response& res) { res.status = 429; });
  std::vector<double> slept;
  try {
    post_json({server.url(), "", 5}, "/v1/x", {}, {}, [&](double s) { slept.push_back(s); });
    FAIL("expected an error");
  } catch (const ProviderError& e) {
    CHECK(e.retryable());
    CHECK(e.http_status() == 429);
  }
  CHECK(server.hits() == 4);
  CHECK(slept.size() == 3);
}

TEST_CASE("fatal statuses fail at once with a key hint for auth errors") {
  testutil::StubServer server([](const httplib::Request&, httplib::Response& res) { res.status = 401; });
  try {
    post_json({server.url(), "bad", 5}, "/v1/x", {}, {}, [](double) {});
    FAIL("expected an error");
  } catch (const ProviderError& e) {
    CHECK_FALSE(e.retryable());
    CHECK(std::string(e.what()).find("OMNIBENCH_API_KEY") != std::string::npos);
  }
  CHECK(server.hits() == 1);
}

TEST_CASE("a non-JSON 2xx body is a protocol error") {
  testutil::StubServer server([](const httplib::Request&, httplib::Response& res) { res.set_content("<html>", "text/html"); });
  try {
    post_json({server.url(), "", 5}, "/v1/x", {}, {}, [](double) {});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Protocol);
  }
}

TEST_CASE("a trailing /v1 on the base URL is folded into the path") {
  testutil::StubServer server([](const httplib::Request&, httplib::Response& res) { res.set_content("{}", "application/json"); });
  post_json({server.url() + "/v1/", "", 5}, "/v1/chat/completions", {}, {}, [](double) {});
  post_json({server.url() + "/proxy", "", 5}, "/v1/chat/completions", {}, {}, [](double) {});
  CHECK(server.paths() == std::vector<std::string>{"/v1/chat/completions", "/proxy/v1/chat/completions"});
}

TEST_CASE("connection refused is retryable and ends as a provider error") {
  std::string url;
  {
    testutil::StubServer probe([](const httplib::Request&, httplib::Response&) {});
    url = probe.url();
  }
  int sleeps = 0;
  try {
    post_json({url, "", 1}, "/v1/x", {}, {}, [&](double) { ++sleeps; });
    FAIL("expected an error");
  } catch (const ProviderError& e) {
    CHECK(e.http_status() == 0);
  }
  CHECK(sleeps == 3);
  CHECK_THROWS_AS(post_json({"", "", 1}, "/v1/x", {}), Error);
}

TEST_CASE("remote embedder learns the dimension and validates responses") {
  testutil::StubServer server([](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json data = nlohmann::json::array();
    for (std::size_t i = 0; i < body["input"].size(); ++i) {
      data.push_back({{"index", i}, {"embedding", {3.0, 4.0, static_cast<double>(i)}}});
    }
    res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
  });
  embedding::RemoteEmbedder e({server.url(), "", 5}, "emb-model");
  CHECK(e.fingerprint() == "remote/v1/model=emb-model");
  const auto v = e.embed("hello");
  REQUIRE(v.size() == 3);
  CHECK(e.dim() == 3);
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(0.8));
  const std::vector<std::string> texts = {"a", "b"};
  CHECK(e.embed_batch(texts).size() == 2);
  const auto sent = nlohmann::json::parse(server.bodies().front());
  CHECK(sent["model"] == "emb-model");

  embedding::RemoteEmbedder wrong_dim({server.url(), "", 5}, "emb-model", 8);
  CHECK_THROWS_AS(wrong_dim.embed("hello"), Error);
}
