#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace vlf {

// Deterministic splitmix64 stream. Trial streams are derived by hashing
// (seed, bits, trial), so results do not depend on worker scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  static Rng for_trial(std::uint64_t base_seed, std::uint64_t bits, std::uint64_t trial) {
    std::uint64_t key = mix(base_seed + 0x9e3779b97f4a7c15ULL);
    key = mix(key ^ (bits + 0xd1b54a32d192ed03ULL));
    key = mix(key ^ (trial + 0x8cb92ba72f3d8dd7ULL));
    return Rng(key);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller with a cached spare.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - next_unit();  // (0, 1]
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace vlf
