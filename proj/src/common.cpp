#include "htm/common.hpp"

#include <cstdio>
#include <cstdlib>
#include <thread>

namespace htm {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidDof: return "InvalidDof";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::NonSPD: return "NonSPD";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::SeparationUnsatisfiable: return "SeparationUnsatisfiable";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::BadCheckpoint: return "BadCheckpoint";
    case ErrorCode::EmptyTestSplit: return "EmptyTestSplit";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidDof:
      return 2;
    case ErrorCode::NonSPD:
    case ErrorCode::NotNormalized:
    case ErrorCode::NonFiniteGradient:
      return 4;
    default:
      return 3;
  }
}

void log_warn(const std::string& message) {
  std::fprintf(stderr, "warning: %s\n", message.c_str());
}

double SplitMix64::gamma(double shape) {
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a+1) * U^(1/a)
    const double u = uniform_pos();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform_pos();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

int worker_threads() {
  static const int cached = [] {
    if (const char* env = std::getenv("HTM_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v >= 1) return static_cast<int>(v);
      log_warn("ignoring invalid HTM_THREADS value");
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
  }();
  return cached;
}

void parallel_for(int n, const std::function<void(int)>& body) {
  const int threads = std::min(worker_threads(), n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    // Static contiguous partition: task->thread assignment is fixed, outputs
    // are disjoint, so the result does not depend on the thread count.
    const int lo = static_cast<int>(static_cast<long>(n) * t / threads);
    const int hi = static_cast<int>(static_cast<long>(n) * (t + 1) / threads);
    pool.emplace_back([lo, hi, &body] {
      for (int i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace htm
