#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "omnibench/clock.hpp"

namespace omnibench::profiler {

struct ResourceSample {
  double latency_s = 0.0;
  double peak_mem_mb = 0.0;
  /// Absent when no GPU probe is configured or the probe failed.
  std::optional<double> peak_gpu_mb;
  std::size_t sample_count = 0;

  bool operator==(const ResourceSample&) const = default;
};

class MemoryProbe {
 public:
  virtual ~MemoryProbe() = default;
  /// Current resident set size in MiB.
  virtual double resident_mb() = 0;
};

/// Reads resident pages from /proc/self/statm.
class ProcessRssProbe final : public MemoryProbe {
 public:
  double resident_mb() override;
};

class FixedMemoryProbe final : public MemoryProbe {
 public:
  explicit FixedMemoryProbe(double mb) : mb_(mb) {}
  double resident_mb() override { return mb_; }

 private:
  double mb_;
};

class GpuProbe {
 public:
  virtual ~GpuProbe() = default;
  /// Used GPU memory in MiB, or nullopt when the probe fails.
  virtual std::optional<double> used_mb() = 0;
};

/// Runs a shell command and sums the integers it prints, one per line (one
/// line per device for the usual vendor query).
class CommandGpuProbe final : public GpuProbe {
 public:
  explicit CommandGpuProbe(std::string command) : command_(std::move(command)) {}
  std::optional<double> used_mb() override;
  const std::string& command() const noexcept { return command_; }

 private:
  std::string command_;
};

inline constexpr const char* kDefaultGpuCommand =
    "nvidia-smi --query-gpu=memory.used --format=csv,noheader,nounits";

/// Parses probe output; nullopt unless every non-blank line is an integer.
std::optional<double> parse_gpu_output(const std::string& output);

class Profiler {
 public:
  /// `interval_s` <= 0 disables the background sampler; only the samples
  /// before and after the operation are taken.
  Profiler(std::shared_ptr<Clock> clock, std::unique_ptr<MemoryProbe> memory,
           std::unique_ptr<GpuProbe> gpu = nullptr, double interval_s = 0.05);
  ~Profiler();

  Profiler(const Profiler&) = delete;
  Profiler& operator=(const Profiler&) = delete;

  /// Runs `op` once, timing it on the profiler's clock while a sampler
  /// thread tracks peak memory. Measurements on one profiler must not
  /// overlap; a nested or concurrent call throws.
  template <typename F>
  auto measure(F&& op) {
    using R = std::invoke_result_t<F&>;
    Session session(*this);
    if constexpr (std::is_void_v<R>) {
      op();
      return std::pair<std::monostate, ResourceSample>{std::monostate{}, session.finish()};
    } else {
      R result = op();
      return std::pair<R, ResourceSample>{std::move(result), session.finish()};
    }
  }

  Clock& clock() noexcept { return *clock_; }
  double interval_s() const noexcept { return interval_s_; }
  bool has_gpu_probe() const noexcept { return gpu_ != nullptr; }

  /// Warnings accumulated so far (GPU probe failures), drained on read.
  std::vector<std::string> take_warnings();

 private:
  class Session {
   public:
    explicit Session(Profiler& p);
    ~Session();
    ResourceSample finish();

   private:
    void sample();
    void stop();

    Profiler& p_;
    double start_ = 0.0;
    double peak_mem_ = 0.0;
    std::optional<double> peak_gpu_;
    bool gpu_failed_ = false;
    std::size_t count_ = 0;
    std::mutex mutex_;
    std::condition_variable cv_;
    bool stopping_ = false;
    std::thread sampler_;
  };

  std::shared_ptr<Clock> clock_;
  std::unique_ptr<MemoryProbe> memory_;
  std::unique_ptr<GpuProbe> gpu_;
  double interval_s_;
  std::atomic<bool> busy_{false};
  std::mutex warnings_mutex_;
  std::vector<std::string> warnings_;
};

}  // namespace omnibench::profiler
