#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pseudodice/constdigits.hpp"

namespace pseudodice {

/// Where a bit sequence came from. `label` is a whitespace-free canonical
/// description that is also written to the bit-file header, e.g.
/// "digits:pi:ge5" or "mt19937:seed=5489:ge0.5".
struct BitSource {
  enum class Kind { Digits, Mt19937, Synthetic, File };
  Kind kind = Kind::File;
  std::string label = "file";

  friend bool operator==(const BitSource&, const BitSource&) = default;
};

class BitSequence {
 public:
  BitSequence() = default;
  /// Throws ValidationError if any element is not 0 or 1.
  BitSequence(std::vector<std::uint8_t> bits, BitSource source);

  std::size_t count() const noexcept { return bits_.size(); }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  /// 1-indexed access.
  std::uint8_t at(std::size_t position) const;
  const BitSource& source() const noexcept { return source_; }

  friend bool operator==(const BitSequence&, const BitSequence&) = default;

 private:
  std::vector<std::uint8_t> bits_;
  BitSource source_;
};

/// One training/testing instance: `input` holds input_len bits, the earliest
/// bit in the most significant position.
struct Instance {
  std::uint32_t input = 0;
  std::uint8_t label = 0;
};

inline constexpr int kMaxInputLen = 23;

/// Stride-1 windows over a bit sequence. Instance i (0-based) covers source
/// positions start+i .. start+i+input_len (1-indexed, inclusive); the last of
/// those bits is the label.
class WindowDataset {
 public:
  WindowDataset() = default;
  WindowDataset(int input_len, std::size_t start, BitSource source, std::vector<Instance> instances);

  std::size_t size() const noexcept { return instances_.size(); }
  bool empty() const noexcept { return instances_.empty(); }
  int input_len() const noexcept { return input_len_; }
  std::size_t start() const noexcept { return start_; }
  const BitSource& source() const noexcept { return source_; }
  std::span<const Instance> instances() const noexcept { return instances_; }
  const Instance& operator[](std::size_t i) const { return instances_[i]; }

  /// Input bits of instance i, earliest first.
  std::vector<std::uint8_t> input_bits(std::size_t i) const;

  /// Contiguous sub-range [offset, offset + count).
  WindowDataset slice(std::size_t offset, std::size_t count) const;

 private:
  int input_len_ = 6;
  std::size_t start_ = 1;
  BitSource source_;
  std::vector<Instance> instances_;
};

/// Overlapping occurrence counts of every length-L string over the first n
/// bits. counts[v] is indexed by the string's value, leftmost bit most
/// significant.
struct PatternCensus {
  int length = 0;
  std::size_t n = 0;
  std::size_t windows = 0;
  std::vector<std::uint64_t> counts;

  std::uint64_t count(std::string_view pattern) const;
};

inline constexpr int kMaxCensusLength = 24;

/// digit >= threshold -> 1 when inclusive, digit > threshold -> 1 otherwise.
BitSequence binarize_digits(const DigitStream& stream, int threshold = 5, bool inclusive = true);

/// Throws BoundsError (carrying the required sequence length) when
/// start + count + input_len - 1 exceeds the sequence length.
WindowDataset make_windows(const BitSequence& bits, std::size_t start, std::size_t count,
                           int input_len = 6);

PatternCensus pattern_census(const BitSequence& bits, std::size_t n, int length);
PatternCensus pattern_census(std::span<const std::uint8_t> bits, std::size_t n, int length);

/// Census of the (input, label) windows of a dataset, with length input_len + 1.
PatternCensus dataset_census(const WindowDataset& dataset);

double ones_frequency(const BitSequence& bits, std::size_t n);

/// "0110001" style rendering of a census index.
std::string pattern_string(std::uint64_t value, int length);
/// Inverse of pattern_string; throws DomainError on characters other than 0/1.
std::uint64_t pattern_value(std::string_view pattern);

// Bit-file format: "#pseudodice-bits source=<label> count=<n>" then 80 bits per line.
std::string format_bit_text(const BitSequence& bits);
BitSequence parse_bit_text(std::string_view text);
void save_bit_file(const BitSequence& bits, const std::filesystem::path& path);
BitSequence load_bit_file(const std::filesystem::path& path);

/// CSV with header "pattern,count,frequency" and one row per string.
std::string census_csv(const PatternCensus& census);

}  // namespace pseudodice
