#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace tdet {

/// Precondition or invariant violation. Indicates a caller bug, not bad data.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Malformed file or wire data.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Impossible configuration: missing grids, inconsistent manifests, bad specs.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void contract(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

/// Deterministic RNG. Draws are derived from raw mt19937_64 output so the
/// same seed produces the same sequence on every standard library
/// (std distributions are implementation defined).
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  /// Uniform integer in [lo, hi] inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    contract(lo <= hi, "uniform_int: empty range");
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(engine_() % span);
  }

  bool coin() { return (engine_() & 1ull) != 0; }

 private:
  std::mt19937_64 engine_;
};

/// Stable seed mixing for per-scene and per-stage substreams.
inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t x = a + 0x9e3779b97f4a7c15ull * (b + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

}  // namespace tdet
