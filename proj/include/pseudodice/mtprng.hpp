#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

#include "pseudodice/bitseq.hpp"

namespace pseudodice {

/// MT19937 (Matsumoto & Nishimura), bit-exact with the mt19937ar reference
/// code. Also satisfies UniformRandomBitGenerator.
class Mt19937 {
 public:
  static constexpr std::size_t kStateSize = 624;
  static constexpr std::uint32_t kDefaultSeed = 5489u;

  using result_type = std::uint32_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  explicit Mt19937(std::uint32_t seed = kDefaultSeed);

  /// init_by_array seeding; only needed for the reference test vectors.
  static Mt19937 from_array(std::span<const std::uint32_t> key);

  std::uint32_t next_u32();
  /// (a * 2^26 + b) / 2^53 from two draws; lies in [0, 1).
  double next_real53();

  result_type operator()() { return next_u32(); }

  std::uint32_t seed() const noexcept { return seed_; }
  std::size_t index() const noexcept { return index_; }
  std::span<const std::uint32_t, kStateSize> state() const noexcept { return state_; }

  friend bool operator==(const Mt19937&, const Mt19937&) = default;

 private:
  void twist();

  std::array<std::uint32_t, kStateSize> state_{};
  std::size_t index_ = kStateSize;
  std::uint32_t seed_ = kDefaultSeed;
};

inline Mt19937 mt_seed(std::uint32_t seed) { return Mt19937(seed); }
inline std::uint32_t mt_next_u32(Mt19937& state) { return state.next_u32(); }
inline double mt_next_real53(Mt19937& state) { return state.next_real53(); }

/// bit_i = 1 when the i-th real53 draw is >= threshold.
BitSequence mt_binary_sequence(std::uint32_t seed, std::size_t count, double threshold = 0.5);

}  // namespace pseudodice
