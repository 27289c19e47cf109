#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "pseudodice/error.hpp"
#include "pseudodice/mtprng.hpp"
#include "pseudodice/stats.hpp"

using namespace pseudodice;

namespace {

PatternCensus census_with(int length, std::vector<std::pair<std::string, std::uint64_t>> entries) {
  PatternCensus c;
  c.length = length;
  c.counts.assign(std::size_t{1} << length, 0);
  for (const auto& [pattern, count] : entries) {
    c.counts[pattern_value(pattern)] = count;
    c.windows += count;
  }
  c.n = c.windows + static_cast<std::size_t>(length) - 1;
  return c;
}

}  // namespace

TEST_CASE("null sigma") {
  CHECK(null_sigma(2, 900'000) == doctest::Approx(0.000527046).epsilon(1e-6));
  CHECK(null_sigma(2, 10'000) == doctest::Approx(0.005));
  CHECK(null_sigma(10, 100) == doctest::Approx(0.03));
  CHECK_THROWS_AS(null_sigma(1, 10), DomainError);
  CHECK_THROWS_AS(null_sigma(2, 0), DomainError);
}

TEST_CASE("sigma thresholds") {
  CHECK(sigma_exceeds(0.5019, 900'000, 2, 3));
  CHECK_FALSE(sigma_exceeds(0.5019, 900'000, 2, 5));
  CHECK(sigma_exceeds(0.5027, 900'000, 2, 5));
  // Exactly on the threshold is not an excess.
  CHECK_FALSE(sigma_exceeds(0.5 + 3 * null_sigma(2, 10'000), 10'000, 2, 3));
}

TEST_CASE("t quantiles against boost") {
  for (int df = 1; df <= 30; ++df) {
    const boost::math::students_t dist(df);
    CAPTURE(df);
    CHECK(student_t_quantile(0.99, df) == doctest::Approx(boost::math::quantile(dist, 0.99)).epsilon(2e-6));
    CHECK(student_t_quantile(0.95, df) == doctest::Approx(boost::math::quantile(dist, 0.95)).epsilon(2e-6));
  }
  CHECK(student_t_quantile(0.99, 8) == 2.896459);
  CHECK_THROWS_AS(student_t_quantile(0.99, 0), DomainError);
  CHECK_THROWS_AS(student_t_quantile(0.99, 31), DomainError);
  CHECK_THROWS_AS(student_t_quantile(0.9, 8), DomainError);
}

TEST_CASE("subgroup lower confidence limits") {
  const std::vector<double> e = {0.50079, 0.50075, 0.50003, 0.50130, 0.50164, 0.50255, 0.50163, 0.50098, 0.50086};
  CHECK(subgroup_lcl(e) == doctest::Approx(0.5004782776).epsilon(1e-9));
  const std::vector<double> r2 = {0.50016, 0.50097, 0.50096, 0.49996, 0.49938,
                                  0.50102, 0.50163, 0.50162, 0.50194};
  CHECK(subgroup_lcl(r2) == doctest::Approx(0.5000215869).epsilon(1e-8));

  const std::vector<double> flat(9, 0.6);
  CHECK(subgroup_lcl(flat) == doctest::Approx(0.6));
  CHECK_THROWS_AS(subgroup_lcl(std::vector<double>{0.5}), DomainError);

  // Direct formula with boost's quantile.
  Mt19937 mt(3);
  std::vector<double> rates(9);
  for (auto& r : rates) r = 0.5 + 0.01 * (mt.next_real53() - 0.5);
  double mean = 0;
  for (double r : rates) mean += r / 9;
  double ss = 0;
  for (double r : rates) ss += (r - mean) * (r - mean);
  const double s = std::sqrt(ss / 8);
  const double t = boost::math::quantile(boost::math::students_t(8), 0.99);
  CHECK(subgroup_lcl(rates) == doctest::Approx(mean - t * s / 3).epsilon(1e-8));
}

TEST_CASE("majority labels") {
  const auto c = census_with(7, {{"0110000", 78}, {"0110001", 88}, {"1111110", 78}, {"1111111", 65}});
  const auto m = majority_label(c, "011000");
  CHECK(m.label == 1);
  CHECK(m.count0 == 78);
  CHECK(m.count1 == 88);
  CHECK(majority_label(c, "111111").label == 0);

  const auto tie = census_with(7, {{"0000010", 5}, {"0000011", 5}});
  CHECK(majority_label(tie, "000001").label == 1);
  CHECK(majority_label(tie, pattern_value("000001")).count0 == 5);
  CHECK_THROWS_AS(majority_label(tie, "0001"), DomainError);
}

TEST_CASE("ideal predictor rate") {
  const auto c = census_with(7, {{"0110000", 78}, {"0110001", 88}, {"1111110", 78}, {"1111111", 65}});
  CHECK(ideal_predictor_rate(c) == doctest::Approx((88.0 + 78.0) / 309.0));
  for (std::uint32_t seed = 1; seed <= 5; ++seed) {
    const auto bits = mt_binary_sequence(seed, 20'000);
    for (int length : {2, 4, 7}) {
      CHECK(ideal_predictor_rate(pattern_census(bits, 20'000, length)) ==
            doctest::Approx(oracle::naive_ideal_rate(bits.bits(), 20'000, length)).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(ideal_predictor_rate(PatternCensus{}), DomainError);
}

TEST_CASE("normality bounds") {
  CHECK(normality_bound(10'000, 5) == doctest::Approx(0.525));
  CHECK(normality_bound(1'000'000, 5) == doctest::Approx(0.5025));
  CHECK(normality_bound(9'000'000, 5) == doctest::Approx(0.5 + 2.5 / 3000));
  for (std::size_t w = 10; w < 10'000'000; w *= 3) CHECK(normality_bound(w * 3, 5) < normality_bound(w, 5));
}

TEST_CASE("normality test") {
  const auto bits = mt_binary_sequence(77, 100'006);
  const auto r = normality_test(pattern_census(bits, 100'006, 7), 5);
  CHECK(r.windows == 100'000);
  CHECK(r.bound == doctest::Approx(0.5 + 2.5 / std::sqrt(100'000.0)));
  CHECK(r.statistic == doctest::Approx(oracle::naive_ideal_rate(bits.bits(), 100'006, 7)));
  CHECK(r.violated == (r.statistic > r.bound));
  CHECK(r.frequencies.size() == 128);
  double total = 0;
  for (double f : r.frequencies) total += f;
  CHECK(total == doctest::Approx(1.0));

  // An alternating sequence is perfectly predictable.
  std::vector<std::uint8_t> alt(10'006);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2;
  const auto p = normality_test(pattern_census(alt, alt.size(), 7), 5);
  CHECK(p.statistic == 1.0);
  CHECK(p.violated);
}

TEST_CASE("complementing every bit leaves the statistic unchanged") {
  for (std::uint32_t seed : {4u, 5u, 6u}) {
    const auto bits = mt_binary_sequence(seed, 30'000);
    std::vector<std::uint8_t> flipped(bits.bits().begin(), bits.bits().end());
    for (auto& b : flipped) b ^= 1;
    const auto a = normality_test(pattern_census(bits, 30'000, 7));
    const auto b = normality_test(pattern_census(flipped, 30'000, 7));
    CHECK(a.statistic == b.statistic);
  }
}

TEST_CASE("normality csv") {
  const auto r = normality_test(pattern_census(mt_binary_sequence(1, 1000), 1000, 7));
  const auto csv = normality_csv(r);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 130);
  CHECK(csv.find("\n#summary,n=1000,L=7,W=994,") != std::string::npos);
}
