#pragma once

#include <atomic>
#include <chrono>
#include <thread>

namespace omnibench {

/// Time source shared by the profiler and the mock provider. sleep_for on a
/// ManualClock advances virtual time instead of blocking.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() const = 0;
  virtual void sleep_for(double seconds) = 0;
};

class SteadyClock final : public Clock {
 public:
  double now() const override {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
  }
  void sleep_for(double seconds) override {
    if (seconds > 0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
  }
};

class ManualClock final : public Clock {
 public:
  explicit ManualClock(double start = 0.0) : now_(start) {}

  double now() const override { return now_.load(); }
  void sleep_for(double seconds) override { advance(seconds); }
  void advance(double seconds) {
    double cur = now_.load();
    while (!now_.compare_exchange_weak(cur, cur + seconds)) {
    }
  }

 private:
  std::atomic<double> now_;
};

}  // namespace omnibench
