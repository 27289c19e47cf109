#include <array>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "pseudodice/constdigits.hpp"
#include "pseudodice/error.hpp"

using namespace pseudodice;

namespace {

std::string as_text(const DigitStream& s) {
  std::string out;
  for (auto d : s.digits()) out += static_cast<char>('0' + d);
  return out;
}

// First 50 fractional digits from published tables.
constexpr std::string_view kPi50 = "14159265358979323846264338327950288419716939937510";
constexpr std::string_view kE50 = "71828182845904523536028747135266249775724709369995";
constexpr std::string_view kSqrt250 = "41421356237309504880168872420969807856967187537694";

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("pseudodice_test_" + name);
}

}  // namespace

TEST_CASE("zero-length requests give empty streams") {
  CHECK(gen_digits(Constant::Pi, 0).count() == 0);
  CHECK(gen_digits_alt(Constant::E, 0).count() == 0);
}

TEST_CASE("first ten digits") {
  CHECK(as_text(gen_digits(Constant::Pi, 10)) == "1415926535");
  CHECK(as_text(gen_digits(Constant::E, 10)) == "7182818284");
  CHECK(as_text(gen_digits(Constant::Sqrt2, 10)) == "4142135623");
  CHECK(as_text(gen_digits_alt(Constant::Sqrt2, 1)) == "4");
  for (auto c : {Constant::Pi, Constant::E, Constant::Sqrt2}) {
    CHECK(gen_digits(c, 10) == gen_digits_alt(c, 10));
  }
}

TEST_CASE("published 50-digit prefixes from both algorithms") {
  CHECK(as_text(gen_digits(Constant::Pi, 50)) == kPi50);
  CHECK(as_text(gen_digits_alt(Constant::Pi, 50)) == kPi50);
  CHECK(as_text(gen_digits(Constant::E, 50)) == kE50);
  CHECK(as_text(gen_digits_alt(Constant::E, 50)) == kE50);
  CHECK(as_text(gen_digits(Constant::Sqrt2, 50)) == kSqrt250);
  CHECK(as_text(gen_digits_alt(Constant::Sqrt2, 50)) == kSqrt250);
}

TEST_CASE("six nines of pi at positions 762..767") {
  const auto pi = gen_digits(Constant::Pi, 800);
  for (std::size_t pos = 762; pos <= 767; ++pos) CHECK(pi.at(pos) == 9);
  CHECK(pi.at(761) != 9);
}

TEST_CASE("dual-algorithm agreement at 20000 digits") {
  for (auto c : {Constant::Pi, Constant::E, Constant::Sqrt2}) {
    CAPTURE(constant_name(c));
    CHECK(gen_digits(c, 20'000) == gen_digits_alt(c, 20'000));
  }
}

TEST_CASE("prefix stability") {
  for (auto c : {Constant::Pi, Constant::E, Constant::Sqrt2}) {
    const auto longer = gen_digits(c, 3001);
    for (std::size_t m : {1u, 17u, 999u, 3000u}) {
      const auto shorter = gen_digits(c, m);
      CHECK(std::equal(shorter.digits().begin(), shorter.digits().end(), longer.digits().begin()));
    }
  }
}

TEST_CASE("digit frequencies at one million digits stay within 0.1 +- 0.003") {
  for (auto c : {Constant::Pi, Constant::E, Constant::Sqrt2}) {
    const auto s = gen_digits(c, 1'000'000);
    std::array<std::size_t, 10> tally{};
    for (auto d : s.digits()) ++tally[d];
    for (std::size_t d = 0; d < 10; ++d) {
      CAPTURE(constant_name(c));
      CAPTURE(d);
      CHECK(std::abs(static_cast<double>(tally[d]) / 1e6 - 0.1) < 0.003);
    }
  }
}

TEST_CASE("capacity limits") {
  CHECK_THROWS_AS(gen_digits(Constant::Pi, 101, 100), CapacityError);
  CHECK_THROWS_AS(gen_digits_alt(Constant::Pi, kMaxAltDigits + 1), CapacityError);
  try {
    gen_digits(Constant::E, 500, 10);
  } catch (const CapacityError& e) {
    CHECK(e.required() == 500);
    CHECK(exit_code(e.kind()) == 3);
  }
}

TEST_CASE("DigitStream validates its digits") {
  CHECK_THROWS_AS(DigitStream(Constant::Pi, {1, 2, 10}), ValidationError);
  const DigitStream s(Constant::Pi, {1, 4});
  CHECK(s.at(2) == 4);
  CHECK_THROWS_AS(s.at(0), BoundsError);
  CHECK_THROWS_AS(s.at(3), BoundsError);
}

TEST_CASE("digit file round trip") {
  const auto path = temp_path("pi100.digits");
  const auto pi = gen_digits(Constant::Pi, 100);
  save_digit_file(pi, path);
  CHECK(load_digit_file(path) == pi);

  std::ifstream in(path);
  std::string header, line1, line2, sha;
  std::getline(in, header);
  std::getline(in, line1);
  std::getline(in, line2);
  std::getline(in, sha);
  CHECK(header == "#pseudodice-digits constant=pi count=100 convention=fractional");
  CHECK(line1.size() == 80);
  CHECK(line2.size() == 20);
  CHECK(sha.starts_with("#sha256="));
  std::filesystem::remove(path);

  const DigitStream empty(Constant::Sqrt2, {});
  CHECK(parse_digit_text(format_digit_text(empty)) == empty);
}

TEST_CASE("digit file errors") {
  const std::string header = "#pseudodice-digits constant=e count=10 convention=fractional\n";
  CHECK_NOTHROW(parse_digit_text(header + "7182818284\n"));

  SUBCASE("count mismatch") { CHECK_THROWS_AS(parse_digit_text(header + "718281828\n"), FormatError); }
  SUBCASE("non-digit reported at its offset") {
    try {
      parse_digit_text(header + "71828x8284\n");
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      CHECK(e.offset() == header.size() + 5);
    }
  }
  SUBCASE("malformed header") {
    CHECK_THROWS_AS(parse_digit_text("#digits constant=e count=1\n7\n"), FormatError);
    CHECK_THROWS_AS(parse_digit_text("#pseudodice-digits constant=tau count=1 convention=fractional\n7\n"),
                    FormatError);
    CHECK_THROWS_AS(parse_digit_text("#pseudodice-digits constant=e count=x convention=fractional\n7\n"),
                    FormatError);
  }
  SUBCASE("checksum is verified when present") {
    const DigitStream s(Constant::E, {7, 1, 8, 2, 8, 1, 8, 2, 8, 4});
    std::string text = format_digit_text(s);
    CHECK(parse_digit_text(text) == s);
    text[header.size() + 3] = '3';
    CHECK_THROWS_AS(parse_digit_text(text), FormatError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_digit_file(temp_path("does_not_exist")), IoError); }
}
