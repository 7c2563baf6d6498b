#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "omnibench/error.hpp"
#include "omnibench/metrics.hpp"
#include "test_util.hpp"

using namespace omnibench;
using namespace omnibench::metrics;

namespace {

bool rel_close(double a, double b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

TrackSummary track(Track t, double s, double lat, double mem, std::optional<double> gpu = std::nullopt) {
  TrackSummary x;
  x.track = t;
  x.S = s;
  x.T = lat;
  x.U_mem = mem;
  x.U_gpu = gpu;
  x.n = 10;
  return x;
}

}  // namespace

TEST_CASE("frozen oracle cases") {
  const auto cases = nlohmann::json::parse(testutil::slurp(testutil::fixture("metrics/oracle_cases.json")));
  REQUIRE(cases.size() >= 100);
  for (const auto& c : cases) {
    CHECK(rel_close(improvements(c["s_rag"], c["s_base"]), c["improvements"]));
    Ratios r;
    r.r_time = c["r_time"];
    r.r_gpu = c["r_gpu"];
    r.r_mem = c["r_mem"];
    const Weights w{c["w_time"], c["w_gpu"], c["w_mem"]};
    CHECK(rel_close(transformation(r, w), c["transformation"]));
  }
}

TEST_CASE("unit ratios give the weight sum") {
  CHECK(transformation(Ratios{}, Weights{}) == 0.4 + 0.3 + 0.3);
  CHECK(transformation(Ratios{}, Weights{0.5, 0.25, 0.5}) == 1.25);
}

TEST_CASE("improvements rejects values outside [0, 1]") {
  CHECK(improvements(0.75, 0.5) == 0.25);
  CHECK_THROWS_AS(improvements(1.5, 0.5), Error);
  CHECK_THROWS_AS(improvements(0.5, -0.1), Error);
  CHECK_THROWS_AS(improvements(std::nan(""), 0.5), Error);
}

TEST_CASE("weight validation") {
  CHECK_FALSE(Weights{}.validate());
  CHECK(Weights{1, 1, 1}.validate().has_value());
  CHECK_THROWS_AS(Weights({-0.1, 0.5, 0.6}).validate(), Error);
  CHECK_THROWS_AS(Weights({0, 0, 0}).validate(), Error);
  CHECK_THROWS_AS(Weights({INFINITY, 0, 0}).validate(), Error);
}

TEST_CASE("ratios of track means") {
  const auto base = track(Track::Base, 0.5, 2.0, 100.0, 400.0);
  const auto rag = track(Track::Rag, 0.7, 3.0, 150.0, 400.0);
  const auto r = ratios(rag, base);
  CHECK(r.r_time == 1.5);
  CHECK(r.r_mem == 1.5);
  CHECK(r.r_gpu == 1.0);
  CHECK(r.flags.empty());
}

TEST_CASE("missing GPU data falls back to 1 and is flagged") {
  const auto r = ratios(track(Track::Rag, 0.5, 1.0, 1.0), track(Track::Base, 0.5, 1.0, 1.0, 10.0));
  CHECK(r.r_gpu == 1.0);
  CHECK(r.flags.contains(kFlagGpuUnavailable));
  CHECK(transformation(r, {}) == doctest::Approx(1.0));
}

TEST_CASE("degenerate denominators name the field") {
  try {
    ratios(track(Track::Rag, 0.5, 1.0, 1.0), track(Track::Base, 0.5, 0.0, 1.0));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateMeasurement);
    CHECK(std::string(e.what()).find("T") != std::string::npos);
  }
  try {
    ratios(track(Track::Rag, 0.5, 1.0, 0.0), track(Track::Base, 0.5, 1.0, 1.0));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateMeasurement);
    CHECK(std::string(e.what()).find("U_mem") != std::string::npos);
  }
}

TEST_CASE("transformation rejects nonpositive ratios") {
  Ratios r;
  r.r_mem = 0;
  CHECK_THROWS_AS(transformation(r, {}), Error);
}

TEST_CASE("mean of ratios differs from ratio of means") {
  std::vector<PairedMeasurement> pairs(2);
  pairs[0].base_latency = 1.0;
  pairs[0].rag_latency = 2.0;
  pairs[1].base_latency = 3.0;
  pairs[1].rag_latency = 3.0;
  for (auto& p : pairs) p.base_mem = p.rag_mem = 10.0;
  const auto r = mean_of_ratios(pairs);
  CHECK(r.r_time == 1.5);
  CHECK(r.r_mem == 1.0);
  CHECK(r.flags.contains(kFlagGpuUnavailable));
  CHECK(ratios(track(Track::Rag, 0, 5.0, 20.0), track(Track::Base, 0, 4.0, 20.0)).r_time == 1.25);
  CHECK_THROWS_AS(mean_of_ratios({}), Error);
}

TEST_CASE("enhance reports degenerate transformation as unavailable") {
  const auto rep = enhance("History", track(Track::Base, 0.4, 0.0, 1.0), track(Track::Rag, 0.6, 1.0, 1.0), {});
  CHECK(rep.scope == "History");
  CHECK(rep.improvements == doctest::Approx(0.2));
  CHECK_FALSE(rep.transformation);
  CHECK(rep.flags.contains(kFlagTransformationUnavailable));
  CHECK(rep.notices.size() == 1);
}

TEST_CASE("enhance carries the weight warning") {
  const auto rep = enhance("x", track(Track::Base, 0.4, 1.0, 1.0), track(Track::Rag, 0.4, 2.0, 1.0), {1, 1, 1});
  REQUIRE(rep.transformation);
  CHECK(*rep.transformation == doctest::Approx(2.5));
  CHECK(rep.notices.size() == 1);
  CHECK(rep.improvements == 0.0);
}
