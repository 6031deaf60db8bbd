#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace htm {

// ---------------------------------------------------------------------------
// Errors. Every failure carries a stable machine-readable code; the CLI maps
// codes onto process exit codes (2 usage, 3 data, 4 numeric).
// ---------------------------------------------------------------------------

enum class ErrorCode {
  InvalidConfig,
  InvalidDof,
  TooFewPoints,
  DegenerateData,
  NonSPD,
  NotNormalized,
  NonFiniteGradient,
  SeparationUnsatisfiable,
  UnknownLabel,
  DuplicateId,
  BadMagic,
  TruncatedFile,
  CountMismatch,
  MalformedLine,
  BadCheckpoint,
  EmptyTestSplit,
  IoError,
};

const char* error_name(ErrorCode code);

/// 2 = usage/validation, 3 = data, 4 = numeric failure.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

void log_warn(const std::string& message);

// ---------------------------------------------------------------------------
// Deterministic RNG. std::mt19937_64 would be portable but the standard
// distributions are not; everything here is pinned bit-for-bit so that a
// (seed, config) pair reproduces identical artifacts on any platform.
// ---------------------------------------------------------------------------

struct SplitMix64 {
  uint64_t state = 0;

  SplitMix64() = default;
  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller. Stateless (no cached spare) so that the
  /// stream position is a pure function of the draw count.
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Unbiased integer in [0, n) by rejection.
  uint64_t below(uint64_t n) {
    const uint64_t limit = n * (UINT64_MAX / n);
    uint64_t x = next();
    while (x >= limit) x = next();
    return x / (UINT64_MAX / n);
  }

  /// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 uses the boost identity.
  double gamma(double shape);

  /// Chi-squared with dof degrees of freedom.
  double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }
};

/// FNV-1a over raw bytes; used for token hashing and model identity.
uint64_t fnv1a64(std::string_view bytes);

/// Order-sensitive 64-bit hash combine for deriving sub-stream seeds.
inline uint64_t mix64(uint64_t a, uint64_t b) {
  SplitMix64 s(a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2)));
  return s.next();
}

// ---------------------------------------------------------------------------
// Worker pool. Tasks must write to disjoint state; any cross-task reduction
// happens serially afterwards, so results are identical at every thread
// count. HTM_THREADS caps the pool (default: hardware concurrency).
// ---------------------------------------------------------------------------

int worker_threads();
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace htm
