#include "omnibench/metrics.hpp"

#include <cmath>

#include "omnibench/error.hpp"

namespace omnibench::metrics {
namespace {

void check_fraction(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    fail(ErrorKind::Argument, std::string(name) + " must be within [0, 1], got " + std::to_string(v));
  }
}

double safe_ratio(double num, double den, const char* field) {
  if (!std::isfinite(den) || den < kDenominatorEpsilon) {
    fail(ErrorKind::DegenerateMeasurement,
         std::string("baseline ") + field + " is zero or negative; ratio undefined");
  }
  if (!std::isfinite(num) || num < kDenominatorEpsilon) {
    fail(ErrorKind::DegenerateMeasurement,
         std::string("RAG ") + field + " is zero or negative; ratio must be positive");
  }
  return num / den;
}

}  // namespace

std::string_view to_string(Track t) noexcept { return t == Track::Base ? "base" : "rag"; }

std::optional<std::string> Weights::validate() const {
  for (double w : {w_time, w_gpu, w_mem}) {
    if (!std::isfinite(w) || w < 0) fail(ErrorKind::Argument, "weights must be finite and nonnegative");
  }
  if (w_time == 0 && w_gpu == 0 && w_mem == 0) fail(ErrorKind::Argument, "at least one weight must be positive");
  const double sum = w_time + w_gpu + w_mem;
  if (std::abs(sum - 1.0) > 1e-9) {
    return "weights sum to " + std::to_string(sum) +
           ", not 1; Transformation > 1 no longer reads as 'more efficient'";
  }
  return std::nullopt;
}

double improvements(double s_rag, double s_base) {
  check_fraction(s_rag, "S_rag");
  check_fraction(s_base, "S_base");
  return s_rag - s_base;
}

Ratios ratios(const TrackSummary& rag, const TrackSummary& base) {
  Ratios r;
  r.r_time = safe_ratio(rag.T, base.T, "T");
  r.r_mem = safe_ratio(rag.U_mem, base.U_mem, "U_mem");
  if (rag.U_gpu && base.U_gpu) {
    r.r_gpu = safe_ratio(*rag.U_gpu, *base.U_gpu, "U_gpu");
  } else {
    r.r_gpu = 1.0;
    r.flags.insert(kFlagGpuUnavailable);
  }
  return r;
}

double transformation(const Ratios& r, const Weights& w) {
  w.validate();
  for (double v : {r.r_time, r.r_gpu, r.r_mem}) {
    if (!std::isfinite(v) || v <= 0) fail(ErrorKind::Argument, "ratios must be positive and finite");
  }
  return w.w_time / r.r_time + w.w_gpu / r.r_gpu + w.w_mem / r.r_mem;
}

Ratios mean_of_ratios(const std::vector<PairedMeasurement>& pairs) {
  if (pairs.empty()) fail(ErrorKind::Argument, "no paired measurements");
  Ratios r;
  double t = 0.0;
  double m = 0.0;
  double g = 0.0;
  bool gpu = true;
  for (const auto& p : pairs) {
    t += safe_ratio(p.rag_latency, p.base_latency, "T");
    m += safe_ratio(p.rag_mem, p.base_mem, "U_mem");
    if (p.base_gpu && p.rag_gpu) {
      g += safe_ratio(*p.rag_gpu, *p.base_gpu, "U_gpu");
    } else {
      gpu = false;
    }
  }
  const auto n = static_cast<double>(pairs.size());
  r.r_time = t / n;
  r.r_mem = m / n;
  if (gpu) {
    r.r_gpu = g / n;
  } else {
    r.r_gpu = 1.0;
    r.flags.insert(kFlagGpuUnavailable);
  }
  return r;
}

EnhancementReport enhance(std::string scope, const TrackSummary& base, const TrackSummary& rag,
                          const Weights& weights, const std::vector<PairedMeasurement>* per_question) {
  EnhancementReport out;
  out.scope = std::move(scope);
  out.weights = weights;
  if (auto warning = weights.validate()) out.notices.push_back(*warning);
  out.improvements = improvements(rag.S, base.S);
  try {
    out.ratios = per_question ? mean_of_ratios(*per_question) : ratios(rag, base);
    out.flags = out.ratios.flags;
    out.transformation = transformation(out.ratios, weights);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateMeasurement) throw;
    out.ratios = {};
    out.flags.insert(kFlagTransformationUnavailable);
    out.notices.push_back(e.what());
  }
  return out;
}

}  // namespace omnibench::metrics
