#pragma once

#include <cmath>
#include <cstdint>

namespace gols {

// SplitMix64 (Steele, Lea & Flood / java.util.SplittableRandom). Counter-based:
// one output per state increment, so a consumer that draws k values advances
// the stream by exactly k steps. Every seeded stream in this project goes
// through this engine, which keeps runs replayable from a single 64-bit seed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, m). Fixed-point multiply keeps it one stream step per call.
  std::size_t next_index(std::size_t m) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next()) * m) >> 64);
  }

  // Uniform in [0, 1).
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; pairs are cached, so the sequence is a
  // pure function of the seed.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_unit();
    double u2 = next_unit();
    while (u1 <= 0.0) u1 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Derives an independent stream seed from (base, lane). Used to hand each
// repeat / purpose its own generator without correlated streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t lane) {
  SplitMix64 mix(base ^ (0xA0761D6478BD642Full + lane * 0xE7037ED1A0B428DBull));
  return mix.next();
}

}  // namespace gols
