#include "pseudodice/stats.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pseudodice/error.hpp"

namespace pseudodice {

namespace {

// One-sided upper quantiles of Student's t, df = 1..30.
constexpr std::array<double, 30> kT95 = {
    6.313752, 2.919986, 2.353363, 2.131847, 2.015048, 1.943180, 1.894579, 1.859548,
    1.833113, 1.812461, 1.795885, 1.782288, 1.770933, 1.761310, 1.753050, 1.745884,
    1.739607, 1.734064, 1.729133, 1.724718, 1.720743, 1.717144, 1.713872, 1.710882,
    1.708141, 1.705618, 1.703288, 1.701131, 1.699127, 1.697261};
constexpr std::array<double, 30> kT99 = {
    31.820516, 6.964557, 4.540703, 3.746947, 3.364930, 3.142668, 2.997952, 2.896459,
    2.821438, 2.763769, 2.718079, 2.680998, 2.650309, 2.624494, 2.602480, 2.583487,
    2.566934, 2.552380, 2.539483, 2.527977, 2.517648, 2.508325, 2.499867, 2.492159,
    2.485107, 2.478630, 2.472660, 2.467140, 2.462021, 2.457262};

}  // namespace

double null_sigma(int b, std::size_t n) {
  if (b < 2) throw DomainError("alphabet size must be >= 2");
  if (n < 1) throw DomainError("null_sigma needs n >= 1");
  return std::sqrt(static_cast<double>(b - 1)) / (b * std::sqrt(static_cast<double>(n)));
}

bool sigma_exceeds(double rate, std::size_t n, int b, double k) {
  if (!(rate >= 0 && rate <= 1)) throw DomainError("rate must lie in [0, 1]");
  return rate > 1.0 / b + k * null_sigma(b, n);
}

double student_t_quantile(double confidence, int df) {
  if (df < 1 || df > 30) throw DomainError("t table covers df 1..30, asked for " + std::to_string(df));
  if (confidence == 0.99) return kT99[static_cast<std::size_t>(df - 1)];
  if (confidence == 0.95) return kT95[static_cast<std::size_t>(df - 1)];
  throw DomainError("t table covers confidence 0.95 and 0.99 only");
}

double subgroup_lcl(std::span<const double> rates, double confidence) {
  if (rates.size() < 2) throw DomainError("subgroup_lcl needs at least 2 rates");
  const double k = static_cast<double>(rates.size());
  const double mean = std::accumulate(rates.begin(), rates.end(), 0.0) / k;
  double ss = 0;
  for (double r : rates) ss += (r - mean) * (r - mean);
  const double s = std::sqrt(ss / (k - 1));
  return mean - student_t_quantile(confidence, static_cast<int>(rates.size()) - 1) * s / std::sqrt(k);
}

double ideal_predictor_rate(const PatternCensus& census) {
  if (census.length < 2) throw DomainError("ideal predictor needs census length >= 2");
  if (census.windows == 0) throw DomainError("empty census");
  std::uint64_t best = 0;
  for (std::size_t prefix = 0; prefix < census.counts.size() / 2; ++prefix) {
    best += std::max(census.counts[2 * prefix], census.counts[2 * prefix + 1]);
  }
  return static_cast<double>(best) / static_cast<double>(census.windows);
}

MajorityLabel majority_label(const PatternCensus& census, std::uint64_t prefix) {
  if (census.length < 2 || prefix >= census.counts.size() / 2) {
    throw DomainError("prefix out of range for census length " + std::to_string(census.length));
  }
  MajorityLabel out;
  out.count0 = census.counts[2 * prefix];
  out.count1 = census.counts[2 * prefix + 1];
  out.label = out.count0 > out.count1 ? 0 : 1;
  return out;
}

MajorityLabel majority_label(const PatternCensus& census, std::string_view prefix) {
  if (static_cast<int>(prefix.size()) != census.length - 1) {
    throw DomainError("prefix must have length " + std::to_string(census.length - 1));
  }
  return majority_label(census, pattern_value(prefix));
}

double normality_bound(std::size_t windows, double k, int b) {
  return 1.0 / b + k * null_sigma(b, windows);
}

NormalityReport normality_test(const PatternCensus& census, double k) {
  NormalityReport report;
  report.n = census.n;
  report.length = census.length;
  report.windows = census.windows;
  report.k = k;
  report.statistic = ideal_predictor_rate(census);
  report.bound = normality_bound(census.windows, k, report.alphabet);
  report.violated = report.statistic > report.bound;
  report.counts = census.counts;
  report.frequencies.resize(census.counts.size());
  for (std::size_t v = 0; v < census.counts.size(); ++v) {
    report.frequencies[v] = static_cast<double>(census.counts[v]) / static_cast<double>(census.windows);
  }
  return report;
}

std::string normality_csv(const NormalityReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "pattern,count,frequency\n";
  for (std::size_t v = 0; v < report.counts.size(); ++v) {
    out << pattern_string(v, report.length) << ',' << report.counts[v] << ',' << report.frequencies[v]
        << '\n';
  }
  out << "#summary,n=" << report.n << ",L=" << report.length << ",W=" << report.windows
      << ",statistic=" << report.statistic << ",bound=" << report.bound << ",k=" << report.k
      << ",violated=" << (report.violated ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace pseudodice
