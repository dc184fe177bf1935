#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>

namespace vqssm {

// Error taxonomy. The C API maps these onto status codes.
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CoverageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numeric mode. f64 is the default (checked) mode: op outputs are validated
// finite and kept in double. f32 emulates single-precision storage by rounding
// every op result to float, with finite checks off.
enum class Precision { f64, f32 };

Precision precision_mode();
void set_precision_mode(Precision p);

inline double round_to_mode(double x) {
  return precision_mode() == Precision::f32 ? static_cast<double>(static_cast<float>(x)) : x;
}

// Deterministic, platform-independent RNG: splitmix64 stream with explicit
// sub-stream derivation so module inits never interleave.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; one value per call, spare cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
  }

  int64_t uniform_int(int64_t lo, int64_t hi_inclusive) {
    const uint64_t span = static_cast<uint64_t>(hi_inclusive - lo) + 1;
    return lo + static_cast<int64_t>(next_u64() % span);
  }

  // Derives an independent sub-stream; tag keeps module init order-free.
  static uint64_t derive(uint64_t seed, const std::string& tag) {
    uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    for (const char c : tag) {
      h ^= static_cast<uint8_t>(c);
      h *= 0x100000001b3ULL;
    }
    Rng mix(h);
    return mix.next_u64();
  }

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// FNV-1a over raw bytes; used for freeze contracts and report hashes.
inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const uint8_t*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_to_hex(uint64_t h);

}  // namespace vqssm
