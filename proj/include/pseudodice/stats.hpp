#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pseudodice/bitseq.hpp"

namespace pseudodice {

/// Standard deviation of a guess rate over n trials with alphabet size b:
/// sqrt(b - 1) / (b * sqrt(n)).
double null_sigma(int b, std::size_t n);

/// rate > 1/b + k * null_sigma(b, n), strictly.
bool sigma_exceeds(double rate, std::size_t n, int b, double k);

/// One-sided Student-t quantile from the embedded table.
/// Supports confidence 0.95 and 0.99 with df 1..30; throws DomainError otherwise.
double student_t_quantile(double confidence, int df);

/// mean - t(confidence, k - 1) * s / sqrt(k) for k rates.
/// Throws DomainError with fewer than 2 rates.
double subgroup_lcl(std::span<const double> rates, double confidence = 0.99);

/// Sum over prefixes of the larger successor count, divided by the window count.
double ideal_predictor_rate(const PatternCensus& census);

struct MajorityLabel {
  std::uint8_t label = 1;
  std::uint64_t count0 = 0;
  std::uint64_t count1 = 0;
};

/// Majority successor of `prefix` (length L - 1); ties go to 1.
MajorityLabel majority_label(const PatternCensus& census, std::uint64_t prefix);
MajorityLabel majority_label(const PatternCensus& census, std::string_view prefix);

struct NormalityReport {
  std::size_t n = 0;
  int length = 0;
  int alphabet = 2;
  std::size_t windows = 0;
  double k = 5;
  double statistic = 0;
  double bound = 0;
  bool violated = false;
  std::vector<std::uint64_t> counts;
  std::vector<double> frequencies;
};

/// Bound 1/b + k * sqrt(b - 1) / (b * sqrt(W)) with W the census window count.
double normality_bound(std::size_t windows, double k, int b = 2);

NormalityReport normality_test(const PatternCensus& census, double k = 5);

/// CSV "pattern,count,frequency" followed by a summary row
/// "#summary,n=...,L=...,W=...,statistic=...,bound=...,k=...,violated=..."
std::string normality_csv(const NormalityReport& report);

}  // namespace pseudodice
