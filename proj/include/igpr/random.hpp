#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace igpr {

/// SplitMix64 bit generator. Cheap to seed, which matters because every
/// simulation call owns a fresh stream.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Tags naming the purpose of a child stream.
enum class StreamPurpose : std::uint64_t {
  draw = 1,
  simulate = 2,
  temper = 3,
  fit = 4,
  trial = 5,
  data = 6,
  abc = 7,
};

/// Derives a child seed from a root seed and an index path. The result depends
/// only on the path, never on the order in which children are requested.
inline std::uint64_t derive_seed(std::uint64_t root,
                                 std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = root ^ 0x6a09e667f3bcc909ULL;
  for (std::uint64_t tag : path) {
    SplitMix64 mix(h ^ (tag + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
    h = mix();
  }
  SplitMix64 fin(h);
  return fin();
}

inline std::uint64_t derive_seed(std::uint64_t root, StreamPurpose purpose,
                                 std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = derive_seed(root, {static_cast<std::uint64_t>(purpose)});
  return derive_seed(h, path);
}

}  // namespace igpr
