#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pseudodice {

enum class Constant { Pi, E, Sqrt2 };

std::string_view constant_name(Constant c) noexcept;
/// Parses "pi", "e" or "sqrt2"; throws ConfigError otherwise.
Constant parse_constant(std::string_view name);

/// Fractional-part decimal digits of a constant. Position 1 is the first
/// digit after the decimal point (the leading 3, 2 or 1 is excluded).
class DigitStream {
 public:
  DigitStream() = default;
  /// Throws ValidationError if any element is outside 0..9.
  DigitStream(Constant constant, std::vector<std::uint8_t> digits);

  Constant constant() const noexcept { return constant_; }
  std::size_t count() const noexcept { return digits_.size(); }
  std::span<const std::uint8_t> digits() const noexcept { return digits_; }
  /// 1-indexed access.
  std::uint8_t at(std::size_t position) const;

  static constexpr std::string_view convention = "fractional";

  friend bool operator==(const DigitStream&, const DigitStream&) = default;

 private:
  Constant constant_ = Constant::Pi;
  std::vector<std::uint8_t> digits_;
};

inline constexpr std::size_t kDefaultMaxDigits = 20'000'000;
inline constexpr std::size_t kMaxAltDigits = 1'000'000;

/// Primary generator: Chudnovsky binary splitting for pi, factorial-series
/// binary splitting for e, integer Newton square root for sqrt(2).
/// Throws CapacityError when n exceeds max_digits.
DigitStream gen_digits(Constant constant, std::size_t n,
                       std::size_t max_digits = kDefaultMaxDigits);

/// Independent generator used for cross-checking: Machin arctangent formula
/// for pi, fixed-point term-by-term summation for e, digit-by-digit long
/// square root for sqrt(2). Limited to kMaxAltDigits.
DigitStream gen_digits_alt(Constant constant, std::size_t n);

void save_digit_file(const DigitStream& stream, const std::filesystem::path& path);
DigitStream load_digit_file(const std::filesystem::path& path);

/// Text form of the digit-cache format; the file functions wrap these.
std::string format_digit_text(const DigitStream& stream);
DigitStream parse_digit_text(std::string_view text);

/// Conventional cache file name inside a digit-cache directory.
std::filesystem::path digit_cache_path(const std::filesystem::path& dir, Constant c);

}  // namespace pseudodice
