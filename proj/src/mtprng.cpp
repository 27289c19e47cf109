#include "pseudodice/mtprng.hpp"

#include <algorithm>
#include <sstream>

namespace pseudodice {

namespace {

constexpr std::size_t kShift = 397;
constexpr std::uint32_t kMatrixA = 0x9908b0dfu;
constexpr std::uint32_t kUpperMask = 0x80000000u;
constexpr std::uint32_t kLowerMask = 0x7fffffffu;

}  // namespace

Mt19937::Mt19937(std::uint32_t seed) : seed_(seed) {
  state_[0] = seed;
  for (std::size_t i = 1; i < kStateSize; ++i) {
    state_[i] = 1812433253u * (state_[i - 1] ^ (state_[i - 1] >> 30)) + static_cast<std::uint32_t>(i);
  }
  index_ = kStateSize;
}

Mt19937 Mt19937::from_array(std::span<const std::uint32_t> key) {
  Mt19937 mt(19650218u);
  auto& s = mt.state_;
  std::size_t i = 1;
  std::size_t j = 0;
  for (std::size_t k = std::max(kStateSize, key.size()); k > 0; --k) {
    s[i] = (s[i] ^ ((s[i - 1] ^ (s[i - 1] >> 30)) * 1664525u)) + key[j] + static_cast<std::uint32_t>(j);
    ++i;
    ++j;
    if (i >= kStateSize) {
      s[0] = s[kStateSize - 1];
      i = 1;
    }
    if (j >= key.size()) j = 0;
  }
  for (std::size_t k = kStateSize - 1; k > 0; --k) {
    s[i] = (s[i] ^ ((s[i - 1] ^ (s[i - 1] >> 30)) * 1566083941u)) - static_cast<std::uint32_t>(i);
    ++i;
    if (i >= kStateSize) {
      s[0] = s[kStateSize - 1];
      i = 1;
    }
  }
  s[0] = 0x80000000u;
  mt.index_ = kStateSize;
  mt.seed_ = key.empty() ? 0 : key[0];
  return mt;
}

void Mt19937::twist() {
  for (std::size_t k = 0; k < kStateSize; ++k) {
    const std::uint32_t y = (state_[k] & kUpperMask) | (state_[(k + 1) % kStateSize] & kLowerMask);
    state_[k] = state_[(k + kShift) % kStateSize] ^ (y >> 1) ^ ((y & 1u) ? kMatrixA : 0u);
  }
  index_ = 0;
}

std::uint32_t Mt19937::next_u32() {
  if (index_ >= kStateSize) twist();
  std::uint32_t y = state_[index_++];
  y ^= y >> 11;
  y ^= (y << 7) & 0x9d2c5680u;
  y ^= (y << 15) & 0xefc60000u;
  y ^= y >> 18;
  return y;
}

double Mt19937::next_real53() {
  const std::uint32_t a = next_u32() >> 5;
  const std::uint32_t b = next_u32() >> 6;
  return (a * 67108864.0 + b) * (1.0 / 9007199254740992.0);
}

BitSequence mt_binary_sequence(std::uint32_t seed, std::size_t count, double threshold) {
  Mt19937 mt(seed);
  std::vector<std::uint8_t> bits(count);
  for (auto& bit : bits) bit = mt.next_real53() >= threshold ? 1 : 0;
  std::ostringstream label;
  label << "mt19937:seed=" << seed << ":ge" << threshold;
  return BitSequence(std::move(bits), {BitSource::Kind::Mt19937, label.str()});
}

}  // namespace pseudodice
