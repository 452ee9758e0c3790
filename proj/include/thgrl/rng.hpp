#pragma once

#include <cstdint>

namespace thgrl {

// splitmix64 finalizer. Used both as the bit mixer for seed derivation and
// as the state transition of Rng below.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Derives an independent stream seed from a base seed and up to two stream
// labels. The same (seed, a, b) always yields the same stream, so work can be
// sharded across threads without changing results.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b = 0) {
  std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ULL);
  h = mix64(h ^ mix64(a + 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ mix64(b + 0x632be59bd9b4e019ULL));
  return h;
}

constexpr std::uint64_t hash_label(const char* s) {
  // FNV-1a, for deriving stage seeds from fixed string labels.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (; *s != '\0'; ++s) {
    h ^= static_cast<unsigned char>(*s);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Small deterministic generator (splitmix64 sequence). Cheap to construct,
// so every independent task owns one.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n). Lemire multiply-shift; bias is O(n / 2^64).
  std::uint64_t next_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

}  // namespace thgrl
