#include "omnibench/profiler.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "omnibench/error.hpp"

namespace omnibench::profiler {

double ProcessRssProbe::resident_mb() {
  std::ifstream statm("/proc/self/statm");
  long pages_total = 0;
  long pages_resident = 0;
  if (!(statm >> pages_total >> pages_resident)) return 0.0;
  static const long page_size = sysconf(_SC_PAGESIZE);
  return static_cast<double>(pages_resident) * static_cast<double>(page_size) / (1024.0 * 1024.0);
}

std::optional<double> parse_gpu_output(const std::string& output) {
  std::istringstream lines(output);
  std::string line;
  double total = 0.0;
  bool any = false;
  while (std::getline(lines, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    const std::string field = line.substr(b, e - b + 1);
    if (!std::all_of(field.begin(), field.end(), [](unsigned char c) { return std::isdigit(c) != 0; })) {
      return std::nullopt;
    }
    total += std::stod(field);
    any = true;
  }
  if (!any) return std::nullopt;
  return total;
}

std::optional<double> CommandGpuProbe::used_mb() {
  FILE* pipe = ::popen((command_ + " 2>/dev/null").c_str(), "r");
  if (!pipe) return std::nullopt;
  std::string output;
  std::array<char, 256> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) output += buf.data();
  const int status = ::pclose(pipe);
  if (status != 0) return std::nullopt;
  return parse_gpu_output(output);
}

Profiler::Profiler(std::shared_ptr<Clock> clock, std::unique_ptr<MemoryProbe> memory,
                   std::unique_ptr<GpuProbe> gpu, double interval_s)
    : clock_(std::move(clock)), memory_(std::move(memory)), gpu_(std::move(gpu)), interval_s_(interval_s) {
  if (!clock_) fail(ErrorKind::Config, "profiler needs a clock");
  if (!memory_) fail(ErrorKind::Config, "profiler needs a memory probe");
}

Profiler::~Profiler() = default;

std::vector<std::string> Profiler::take_warnings() {
  std::lock_guard lock(warnings_mutex_);
  return std::exchange(warnings_, {});
}

Profiler::Session::Session(Profiler& p) : p_(p) {
  if (p_.busy_.exchange(true)) {
    fail(ErrorKind::Internal, "overlapping measurements on one profiler");
  }
  sample();
  start_ = p_.clock_->now();
  if (p_.interval_s_ > 0) {
    sampler_ = std::thread([this] {
      const auto interval = std::chrono::duration<double>(p_.interval_s_);
      std::unique_lock lock(mutex_);
      while (!cv_.wait_for(lock, interval, [this] { return stopping_; })) {
        lock.unlock();
        sample();
        lock.lock();
      }
    });
  }
}

Profiler::Session::~Session() {
  stop();
  p_.busy_ = false;
}

void Profiler::Session::stop() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (sampler_.joinable()) sampler_.join();
}

void Profiler::Session::sample() {
  const double mem = p_.memory_->resident_mb();
  std::optional<double> gpu;
  if (p_.gpu_) gpu = p_.gpu_->used_mb();

  std::lock_guard lock(mutex_);
  peak_mem_ = count_ == 0 ? mem : std::max(peak_mem_, mem);
  if (p_.gpu_) {
    if (!gpu) {
      gpu_failed_ = true;
    } else {
      peak_gpu_ = peak_gpu_ ? std::max(*peak_gpu_, *gpu) : *gpu;
    }
  }
  ++count_;
}

ResourceSample Profiler::Session::finish() {
  const double end = p_.clock_->now();
  stop();
  sample();

  ResourceSample out;
  out.latency_s = std::max(0.0, end - start_);
  out.peak_mem_mb = peak_mem_;
  out.sample_count = count_;
  if (p_.gpu_ && !gpu_failed_) out.peak_gpu_mb = peak_gpu_;
  if (gpu_failed_) {
    std::lock_guard lock(p_.warnings_mutex_);
    p_.warnings_.push_back("GPU probe failed during measurement; GPU peak omitted");
  }
  return out;
}

}  // namespace omnibench::profiler
