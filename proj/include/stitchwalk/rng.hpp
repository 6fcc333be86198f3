#pragma once

#include <cstdint>

namespace stitchwalk {

// Seeded randomness is organized as independent streams derived from one
// 64-bit experiment seed. A stream key is a mix of (seed, purpose, ids...);
// values within a stream come from a counter so any draw can be replayed
// without carrying generator state through the simulator.

constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a,
                                   std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t k = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  k = mix64(k ^ a);
  k = mix64(k ^ b);
  k = mix64(k ^ c);
  return k;
}

// Stream purposes. Values are part of the reproducibility contract: changing
// them changes every derived experiment.
namespace stream {
constexpr std::uint64_t generator = 1;
constexpr std::uint64_t short_walk_step = 2;
constexpr std::uint64_t short_walk_offset = 3;  // r_i draws
constexpr std::uint64_t request = 4;
constexpr std::uint64_t source_draw = 5;
constexpr std::uint64_t naive_walk = 6;
constexpr std::uint64_t sweep_cell = 7;
constexpr std::uint64_t epoch = 8;
}  // namespace stream

// Value i of stream `key`, addressable at random.
constexpr std::uint64_t stream_at(std::uint64_t key, std::uint64_t i) {
  return mix64(key + i * 0xd1342543de82ef95ULL);
}

// Maps a 64-bit draw onto [0, bound) by 128-bit multiply. The bias of
// bound/2^64 is far below anything the statistical gates can resolve.
constexpr std::uint32_t bounded(std::uint64_t draw, std::uint32_t bound) {
  return static_cast<std::uint32_t>(
      (static_cast<unsigned __int128>(draw) * bound) >> 64);
}

class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  std::uint64_t next() { return stream_at(key_, counter_++); }

  std::uint32_t below(std::uint32_t bound) { return bounded(next(), bound); }

  // [0, 1)
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace stitchwalk
