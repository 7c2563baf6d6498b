#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace omnibench::metrics {

enum class Track { Base, Rag };

std::string_view to_string(Track t) noexcept;

struct TrackSummary {
  Track track = Track::Base;
  double S = 0.0;                // accuracy fraction
  double T = 0.0;                // mean latency, seconds
  std::optional<double> U_gpu;   // mean per-question peak GPU MiB
  double U_mem = 0.0;            // mean per-question peak RAM MiB
  std::size_t n = 0;

  bool operator==(const TrackSummary&) const = default;
};

struct Weights {
  double w_time = 0.4;
  double w_gpu = 0.3;
  double w_mem = 0.3;

  /// Throws Argument on a negative or non-finite weight or when all are zero.
  /// Returns a warning when the weights do not sum to 1.
  std::optional<std::string> validate() const;

  bool operator==(const Weights&) const = default;
};

inline constexpr double kDenominatorEpsilon = 1e-9;
inline constexpr const char* kFlagGpuUnavailable = "gpu_unavailable";

struct Ratios {
  double r_time = 1.0;
  double r_gpu = 1.0;
  double r_mem = 1.0;
  std::set<std::string> flags;

  bool operator==(const Ratios&) const = default;
};

/// S_rag - S_base. Both must lie in [0, 1].
double improvements(double s_rag, double s_base);

/// Ratio of track means. r_gpu falls back to 1 (flagged gpu_unavailable)
/// when either side lacks GPU data. Denominators below kDenominatorEpsilon
/// raise DegenerateMeasurement naming the field.
Ratios ratios(const TrackSummary& rag, const TrackSummary& base);

/// w_time/r_time + w_gpu/r_gpu + w_mem/r_mem.
double transformation(const Ratios& r, const Weights& w);

/// Per-question measurements, paired by question across the two tracks.
struct PairedMeasurement {
  double base_latency = 0.0;
  double rag_latency = 0.0;
  double base_mem = 0.0;
  double rag_mem = 0.0;
  std::optional<double> base_gpu;
  std::optional<double> rag_gpu;
};

/// Mean of per-question ratios; the sensitivity-analysis alternative to
/// ratios().
Ratios mean_of_ratios(const std::vector<PairedMeasurement>& pairs);

inline constexpr const char* kFlagTransformationUnavailable = "transformation_unavailable";

/// Improvements and Transformation for one scope (a domain or the overall pool) with
/// the ratios and weights that produced them. `transformation` is absent,
/// and flagged, when a measurement was degenerate.
struct EnhancementReport {
  std::string scope;
  double improvements = 0.0;
  std::optional<double> transformation;
  Ratios ratios;
  Weights weights;
  std::set<std::string> flags;
  std::vector<std::string> notices;
};

/// Ratios come from the track means unless `per_question` is given, in which
/// case the mean of per-question ratios is used instead.
EnhancementReport enhance(std::string scope, const TrackSummary& base, const TrackSummary& rag,
                          const Weights& weights,
                          const std::vector<PairedMeasurement>* per_question = nullptr);

}  // namespace omnibench::metrics
