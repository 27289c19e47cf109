#include "pseudodice/constdigits.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "pseudodice/error.hpp"
#include "sha256.hpp"

namespace pseudodice {

std::string_view constant_name(Constant c) noexcept {
  switch (c) {
    case Constant::Pi:
      return "pi";
    case Constant::E:
      return "e";
    case Constant::Sqrt2:
      return "sqrt2";
  }
  return "?";
}

Constant parse_constant(std::string_view name) {
  if (name == "pi") return Constant::Pi;
  if (name == "e") return Constant::E;
  if (name == "sqrt2") return Constant::Sqrt2;
  throw ConfigError("unknown constant '" + std::string(name) + "' (expected pi, e or sqrt2)");
}

DigitStream::DigitStream(Constant constant, std::vector<std::uint8_t> digits)
    : constant_(constant), digits_(std::move(digits)) {
  for (std::size_t i = 0; i < digits_.size(); ++i) {
    if (digits_[i] > 9) {
      throw ValidationError("digit at position " + std::to_string(i + 1) + " is out of range");
    }
  }
}

std::uint8_t DigitStream::at(std::size_t position) const {
  if (position == 0 || position > digits_.size()) {
    throw BoundsError("digit position " + std::to_string(position) + " outside 1.." +
                          std::to_string(digits_.size()),
                      position);
  }
  return digits_[position - 1];
}

namespace {

mpz_class pow10(std::size_t e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

// Floor square root by Newton iteration with precision doubling: the root of
// the top half of the bits seeds one Newton step at full size, which lands
// within a unit or two of the answer.
mpz_class isqrt(const mpz_class& value) {
  if (value < 0) throw DomainError("isqrt of a negative number");
  const std::size_t bits = mpz_sizeinbase(value.get_mpz_t(), 2);
  if (bits <= 52) {
    auto root = static_cast<unsigned long>(std::sqrt(value.get_d()));
    mpz_class r = root;
    while (r * r > value) --r;
    while ((r + 1) * (r + 1) <= value) ++r;
    return r;
  }
  const std::size_t shift = bits / 4;
  mpz_class high = value >> (2 * shift);
  mpz_class r = (isqrt(high) + 1) << shift;
  // r now overestimates; one Newton step from above stays above the root.
  r = (r + value / r) >> 1;
  while (r * r > value) {
    mpz_class next = (r + value / r) >> 1;
    if (next >= r) {
      --r;
    } else {
      r = next;
    }
  }
  while ((r + 1) * (r + 1) <= value) ++r;
  return r;
}

struct ChudnovskyTerm {
  mpz_class p, q, t;
};

constexpr unsigned long kChudA = 13591409;
constexpr unsigned long kChudB = 545140134;

ChudnovskyTerm chudnovsky_split(unsigned long a, unsigned long b) {
  ChudnovskyTerm out;
  if (b - a == 1) {
    if (a == 0) {
      out.p = 1;
      out.q = 1;
    } else {
      out.p = mpz_class(6 * a - 5) * (2 * a - 1) * (6 * a - 1);
      // 640320^3 / 24
      out.q = mpz_class("10939058860032000") * a * a * a;
    }
    out.t = out.p * (mpz_class(kChudA) + mpz_class(kChudB) * a);
    if (a & 1) out.t = -out.t;
    return out;
  }
  const unsigned long m = a + (b - a) / 2;
  ChudnovskyTerm left = chudnovsky_split(a, m);
  ChudnovskyTerm right = chudnovsky_split(m, b);
  out.p = left.p * right.p;
  out.q = left.q * right.q;
  out.t = right.q * left.t + left.p * right.t;
  return out;
}

// floor(pi * 10^scale)
mpz_class pi_fixed_chudnovsky(std::size_t scale) {
  // Each term contributes log10(640320^3 / 1728) ~ 14.18 digits.
  const auto terms = static_cast<unsigned long>(static_cast<double>(scale) / 14.181647 + 2);
  ChudnovskyTerm s = chudnovsky_split(0, terms);
  mpz_class root = isqrt(mpz_class(10005) * pow10(2 * scale));
  return mpz_class(426880) * root * s.q / s.t;
}

struct FactorialTerm {
  mpz_class p, q;
};

// sum_{k=a+1}^{b} 1 / ((a+1)(a+2)...k) == p / q
FactorialTerm factorial_split(unsigned long a, unsigned long b) {
  if (b - a == 1) return {1, b};
  const unsigned long m = a + (b - a) / 2;
  FactorialTerm left = factorial_split(a, m);
  FactorialTerm right = factorial_split(m, b);
  return {left.p * right.q + right.p, left.q * right.q};
}

// Smallest N with log10(N!) > digits.
unsigned long factorial_terms_for(std::size_t digits) {
  double acc = 0;
  unsigned long k = 1;
  while (acc <= static_cast<double>(digits)) {
    ++k;
    acc += std::log10(static_cast<double>(k));
  }
  return k;
}

mpz_class e_fixed_series(std::size_t scale) {
  const unsigned long terms = factorial_terms_for(scale + 2);
  FactorialTerm s = factorial_split(0, terms);
  return pow10(scale) * (s.q + s.p) / s.q;
}

mpz_class sqrt2_fixed_newton(std::size_t scale) { return isqrt(2 * pow10(2 * scale)); }

// arctan(1/x) * 10^scale, truncated term by term.
mpz_class arctan_inverse(unsigned long x, std::size_t scale) {
  mpz_class power = pow10(scale) / x;
  mpz_class sum = power;
  mpz_class term;
  const unsigned long x2 = x * x;
  for (unsigned long k = 1; power != 0; ++k) {
    mpz_tdiv_q_ui(power.get_mpz_t(), power.get_mpz_t(), x2);
    mpz_tdiv_q_ui(term.get_mpz_t(), power.get_mpz_t(), 2 * k + 1);
    if (k & 1) {
      sum -= term;
    } else {
      sum += term;
    }
  }
  return sum;
}

mpz_class pi_fixed_machin(std::size_t scale) {
  return 16 * arctan_inverse(5, scale) - 4 * arctan_inverse(239, scale);
}

mpz_class e_fixed_direct(std::size_t scale) {
  mpz_class term = pow10(scale);
  mpz_class sum = term;
  for (unsigned long k = 1; term != 0; ++k) {
    mpz_tdiv_q_ui(term.get_mpz_t(), term.get_mpz_t(), k);
    sum += term;
  }
  return sum;
}

// Schoolbook digit-by-digit square root of 2; exact, returns floor(sqrt2 * 10^scale).
mpz_class sqrt2_fixed_long_division(std::size_t scale) {
  mpz_class root = 1;
  mpz_class remainder = 1;  // 2 - 1^2
  mpz_class trial;
  mpz_class divisor;
  for (std::size_t i = 0; i < scale; ++i) {
    remainder *= 100;
    divisor = root * 20;
    unsigned long x = 9;
    if (divisor != 0) {
      mpz_class estimate = remainder / divisor;
      if (estimate < 9) x = estimate.get_ui();
    }
    for (;; --x) {
      trial = (divisor + x) * x;
      if (trial <= remainder) break;
    }
    remainder -= trial;
    root = root * 10 + x;
  }
  return root;
}

// Guard-digit policy: compute ceil(n/10) + 10 extra digits and accept the
// truncation unless the guard digits sit on a carry boundary (all nines or all
// zeros), in which case the guard is doubled.
template <typename Fixed>
DigitStream digits_with_guard(Constant constant, std::size_t n, Fixed fixed) {
  if (n == 0) return DigitStream(constant, {});
  std::size_t guard = (n + 9) / 10 + 10;
  for (;;) {
    const mpz_class value = fixed(n + guard);
    const std::string text = value.get_str(10);
    // One integer digit for each of pi, e and sqrt(2).
    if (text.size() != n + guard + 1) {
      throw ValidationError("unexpected digit count from fixed-point evaluation");
    }
    const std::string_view guard_digits =
        std::string_view(text).substr(n + 1, guard - 5);
    const bool ambiguous =
        std::all_of(guard_digits.begin(), guard_digits.end(), [](char c) { return c == '9'; }) ||
        std::all_of(guard_digits.begin(), guard_digits.end(), [](char c) { return c == '0'; });
    if (!ambiguous) {
      std::vector<std::uint8_t> digits(n);
      for (std::size_t i = 0; i < n; ++i) digits[i] = static_cast<std::uint8_t>(text[i + 1] - '0');
      return DigitStream(constant, std::move(digits));
    }
    guard *= 2;
  }
}

}  // namespace

DigitStream gen_digits(Constant constant, std::size_t n, std::size_t max_digits) {
  if (n > max_digits) {
    throw CapacityError("requested " + std::to_string(n) + " digits exceeds the maximum of " +
                            std::to_string(max_digits),
                        n);
  }
  switch (constant) {
    case Constant::Pi:
      return digits_with_guard(constant, n, pi_fixed_chudnovsky);
    case Constant::E:
      return digits_with_guard(constant, n, e_fixed_series);
    case Constant::Sqrt2:
      return digits_with_guard(constant, n, sqrt2_fixed_newton);
  }
  throw DomainError("unknown constant");
}

DigitStream gen_digits_alt(Constant constant, std::size_t n) {
  if (n > kMaxAltDigits) {
    throw CapacityError("alternate generator is limited to " + std::to_string(kMaxAltDigits) +
                            " digits, requested " + std::to_string(n),
                        n);
  }
  switch (constant) {
    case Constant::Pi:
      return digits_with_guard(constant, n, pi_fixed_machin);
    case Constant::E:
      return digits_with_guard(constant, n, e_fixed_direct);
    case Constant::Sqrt2:
      return digits_with_guard(constant, n, sqrt2_fixed_long_division);
  }
  throw DomainError("unknown constant");
}

// --- digit-cache file -------------------------------------------------------

namespace {

constexpr std::size_t kLineWidth = 80;
constexpr std::string_view kDigitMagic = "#pseudodice-digits";
constexpr std::string_view kShaPrefix = "#sha256=";

std::string_view next_line(std::string_view text, std::size_t& pos) {
  const std::size_t end = text.find('\n', pos);
  std::string_view line =
      text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
  pos = end == std::string_view::npos ? text.size() : end + 1;
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::string format_digit_text(const DigitStream& stream) {
  std::string out;
  const auto digits = stream.digits();
  out.reserve(digits.size() + digits.size() / kLineWidth + 160);
  out += kDigitMagic;
  out += " constant=";
  out += constant_name(stream.constant());
  out += " count=" + std::to_string(digits.size());
  out += " convention=fractional\n";
  std::string body(digits.size(), '0');
  for (std::size_t i = 0; i < digits.size(); ++i) body[i] = static_cast<char>('0' + digits[i]);
  for (std::size_t i = 0; i < body.size(); i += kLineWidth) {
    out.append(body, i, kLineWidth);
    out += '\n';
  }
  out += kShaPrefix;
  out += detail::sha256_hex(body);
  out += '\n';
  return out;
}

DigitStream parse_digit_text(std::string_view text) {
  std::size_t pos = 0;
  const std::string_view header = next_line(text, pos);
  std::istringstream fields{std::string(header)};
  std::string magic;
  fields >> magic;
  if (magic != kDigitMagic) throw FormatError("missing '#pseudodice-digits' header", 0);

  std::optional<Constant> constant;
  std::optional<std::size_t> count;
  bool convention_seen = false;
  std::string field;
  while (fields >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw FormatError("malformed header field '" + field + "'", 0);
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "constant") {
      try {
        constant = parse_constant(value);
      } catch (const ConfigError&) {
        throw FormatError("unknown constant '" + value + "' in header", 0);
      }
    } else if (key == "count") {
      if (value.empty() || !std::all_of(value.begin(), value.end(), ::isdigit)) {
        throw FormatError("malformed count '" + value + "' in header", 0);
      }
      count = std::stoull(value);
    } else if (key == "convention") {
      if (value != DigitStream::convention) {
        throw FormatError("unsupported convention '" + value + "'", 0);
      }
      convention_seen = true;
    } else {
      throw FormatError("unknown header field '" + key + "'", 0);
    }
  }
  if (!constant || !count || !convention_seen) {
    throw FormatError("header must declare constant, count and convention", 0);
  }

  std::vector<std::uint8_t> digits;
  digits.reserve(*count);
  std::string body;
  body.reserve(*count);
  std::optional<std::string> declared_sha;
  while (pos < text.size()) {
    const std::size_t line_start = pos;
    const std::string_view line = next_line(text, pos);
    if (declared_sha) throw FormatError("content after the checksum line", line_start);
    if (line.starts_with(kShaPrefix)) {
      declared_sha = std::string(line.substr(kShaPrefix.size()));
      continue;
    }
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (c < '0' || c > '9') {
        throw FormatError(std::string("non-digit character '") + c + "'", line_start + i);
      }
      digits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    body.append(line);
  }
  if (digits.size() != *count) {
    throw FormatError("declared count " + std::to_string(*count) + " but found " +
                          std::to_string(digits.size()) + " digits",
                      text.size());
  }
  if (declared_sha && *declared_sha != detail::sha256_hex(body)) {
    throw FormatError("sha256 checksum mismatch", text.size());
  }
  return DigitStream(*constant, std::move(digits));
}

void save_digit_file(const DigitStream& stream, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing", path.string());
  const std::string text = format_digit_text(stream);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed", path.string());
}

DigitStream load_digit_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_digit_text(buffer.str());
}

std::filesystem::path digit_cache_path(const std::filesystem::path& dir, Constant c) {
  return dir / (std::string(constant_name(c)) + ".digits");
}

}  // namespace pseudodice
