// Deterministic random number generation.  Hand-rolled generators (splitmix64
// for seeding, xoshiro256** for streams) so that identical run configurations
// produce byte-identical output on every platform; std:: distributions are
// implementation-defined and are not used anywhere.
#pragma once

#include <gmpxx.h>

#include <cstdint>

namespace liptree {

struct SplitMix64 {
  std::uint64_t s;
  explicit SplitMix64(std::uint64_t seed) : s(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

struct Rng {  // xoshiro256**
  std::uint64_t s[4];

  explicit Rng(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& w : s) w = sm.next();
  }

  // Independent per-task stream: reseed through splitmix with a stream index.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_index) {
    SplitMix64 sm(seed);
    std::uint64_t base = sm.next() ^ (0x632be59bd9b4e019ULL * (stream_index + 1));
    return Rng(base);
  }

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }

  // Uniform double in [0,1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Unbiased uniform integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % n;
  }

  // Unbiased uniform big integer in [0, n) by chunked rejection: draw
  // bitlen(n) random bits, reject values >= n.  Expected < 2 attempts.
  mpz_class below_mpz(const mpz_class& n) {
    if (n <= 0) return 0;
    const size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
    const size_t words = (bits + 63) / 64;
    const size_t top_bits = bits - (words - 1) * 64;
    const std::uint64_t top_mask =
        top_bits >= 64 ? UINT64_MAX : ((std::uint64_t{1} << top_bits) - 1);
    mpz_class v;
    while (true) {
      v = 0;
      for (size_t w = 0; w < words; ++w) {
        std::uint64_t chunk = next();
        if (w == 0) chunk &= top_mask;  // keep the draw tight: < 2^bits
        v <<= 64;
        v += mpz_class(static_cast<unsigned long>(chunk));
      }
      if (v < n) return v;
    }
  }
};

}  // namespace liptree
