#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pseudodice/bitseq.hpp"
#include "pseudodice/constdigits.hpp"
#include "pseudodice/mlp.hpp"
#include "pseudodice/stats.hpp"

namespace pseudodice {

enum class ExperimentId { A, B, C };
std::string_view experiment_name(ExperimentId id) noexcept;
ExperimentId parse_experiment(std::string_view name);

/// Sequence fed to an experiment.
///  digits:      binarized constant (A, C)
///  mt:          MT19937 reals thresholded (A, B)
///  alternating: 0101... control (A)
///  biased:      MT bits with P(1 | bias_prefix) = bias_probability and the
///               test window forced to bias_prefix followed by 1 (B)
enum class SourceKind { Digits, Mt, Alternating, Biased };
std::string_view source_kind_name(SourceKind s) noexcept;

struct WindowRange {
  std::size_t start = 1;
  std::size_t count = 0;
  friend bool operator==(const WindowRange&, const WindowRange&) = default;
};

struct ExperimentConfig {
  ExperimentId experiment = ExperimentId::A;
  SourceKind source = SourceKind::Digits;

  Constant constant = Constant::Pi;                              // A
  std::vector<Constant> constants = {Constant::Pi, Constant::Sqrt2};  // C
  std::vector<std::uint32_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9};   // B

  WindowRange train{1, 40'000};
  WindowRange test1{100'000, 900'000};      // A: T1; B: the test window
  WindowRange test2{999'000, 9'000'000};    // A: T2
  std::size_t sequence_length = 10'007;     // B

  int input_len = 6;
  std::vector<std::size_t> hidden_layers = {30, 20};
  TrainConfig train_config;

  int trials = 100;
  int census_length = 7;
  double sigma_k = 5;
  std::vector<double> sigma_levels = {3, 5};
  int subgroups = 9;
  double subgroup_confidence = 0.99;
  std::vector<std::size_t> n_grid = {10'000, 100'000, 1'000'000, 9'000'000};

  int digit_threshold = 5;
  bool digit_threshold_inclusive = true;
  double mt_threshold = 0.5;
  double accuracy_yardstick = 0.515;

  bool mt_control = true;
  std::uint32_t mt_control_seed = 1;
  std::string bias_prefix = "011000";
  double bias_probability = 0.7;

  std::filesystem::path digit_cache_dir = "digits";
  bool generate_digits = true;  // A may fill a missing cache; C never does
  int threads = 1;

  /// Defaults for one experiment.
  static ExperimentConfig defaults(ExperimentId id);

  std::vector<std::size_t> layer_sizes() const;
  /// Throws ConfigError on inconsistent or out-of-range settings.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Flat key=value text; '#' starts a comment. Unknown keys and malformed
/// values raise ConfigError. Keys not present keep `base`'s values.
ExperimentConfig parse_config_text(std::string_view text, ExperimentConfig base);
ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base);
/// Canonical key -> value rendering; parse_config_text inverts it.
std::map<std::string, std::string> config_entries(const ExperimentConfig& config);
std::string format_config_text(const ExperimentConfig& config);

// --- reports -------------------------------------------------------------------

struct DatasetAccuracy {
  std::string name;
  WindowRange range;
  double accuracy = 0;
  double ideal_rate = 0;  // ideal predictor on this dataset's own census
  friend bool operator==(const DatasetAccuracy&, const DatasetAccuracy&) = default;
};

struct SigmaVerdict {
  std::string dataset;
  double rate = 0;
  std::size_t n = 0;
  double k = 0;
  double threshold = 0;  // 0.5 + k * sigma
  bool exceeds = false;
  friend bool operator==(const SigmaVerdict&, const SigmaVerdict&) = default;
};

struct ReportA {
  std::string source_label;
  std::vector<DatasetAccuracy> datasets;  // train, then T1 and T2 when non-empty
  std::size_t subgroup_size = 0;
  std::vector<double> subgroup_rates;
  std::optional<double> subgroup_lcl;
  bool lcl_above_chance = false;
  std::vector<SigmaVerdict> verdicts;
  bool accuracy_within_ideal = true;
  TrainLog train_log;
  friend bool operator==(const ReportA&, const ReportA&) = default;
};

struct TrialResult {
  int trial = 0;
  std::uint32_t init_seed = 0;
  double train_accuracy = 0;
  std::uint64_t test_correct = 0;
  int epochs = 0;
  friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

struct SeedResult {
  std::uint32_t seed = 0;
  std::string source_label;
  std::string test_prefix;
  int test_label = 0;
  std::uint64_t prefix_count0 = 0;
  std::uint64_t prefix_count1 = 0;
  int majority = 1;
  bool label_matches_majority = false;
  std::uint64_t successes = 0;
  std::uint64_t attempts = 0;  // trials x test instances
  double train_ideal_rate = 0;
  double fraction_above_yardstick = 0;
  bool accuracy_within_ideal = true;
  bool explained = false;
  std::vector<TrialResult> trials;
  friend bool operator==(const SeedResult&, const SeedResult&) = default;
};

struct ReportB {
  double yardstick = 0.515;
  std::vector<SeedResult> seeds;
  int explained_seeds = 0;
  friend bool operator==(const ReportB&, const ReportB&) = default;
};

struct NormalityRow {
  std::string sequence;  // bit-source label
  std::size_t n = 0;
  int length = 7;
  std::size_t windows = 0;
  double k = 5;
  double statistic = 0;
  double bound = 0;
  bool violated = false;
  double ones_frequency = 0;
  /// Per-string 5-sigma band 1/2^L +- k*sqrt(2^L - 1)/(2^L sqrt(W)).
  double frequency_band = 0;
  double max_frequency_deviation = 0;
  bool frequencies_within_band = false;
  /// Statistic under the opposite digit-threshold convention (digit sources only).
  std::optional<double> alt_statistic;
  std::optional<bool> alt_violated;
  std::vector<std::uint64_t> counts;
  friend bool operator==(const NormalityRow&, const NormalityRow&) = default;
};

struct ReportC {
  std::vector<NormalityRow> rows;
  friend bool operator==(const ReportC&, const ReportC&) = default;
};

/// Wall-clock information; kept apart so reports stay byte-reproducible.
struct ReportMetadata {
  std::string started_at;
  double wall_seconds = 0;
  int threads = 1;
};

struct ExperimentReport {
  ExperimentId experiment = ExperimentId::A;
  std::map<std::string, std::string> config;
  std::optional<ReportA> a;
  std::optional<ReportB> b;
  std::optional<ReportC> c;
  ReportMetadata metadata;

  /// Equality ignores metadata.
  friend bool operator==(const ExperimentReport& x, const ExperimentReport& y) {
    return x.experiment == y.experiment && x.config == y.config && x.a == y.a && x.b == y.b &&
           x.c == y.c;
  }
};

// --- sequences and experiments -----------------------------------------------------

/// Loads the cached digits for a constant; throws CapacityError when the cache
/// is missing or shorter than `required` and generation is not allowed.
DigitStream load_or_generate_digits(const std::filesystem::path& cache_dir, Constant constant,
                                    std::size_t required, bool allow_generate);

BitSequence alternating_sequence(std::size_t count);
/// MT19937-driven bits where the bit following `prefix` is 1 with probability
/// p1 and every other bit is fair. Positions force_start .. force_start+|prefix|
/// (1-indexed) are overwritten with prefix followed by 1 when force_start > 0.
BitSequence biased_sequence(std::uint32_t seed, std::size_t count, std::string_view prefix, double p1,
                            std::size_t force_start);

ExperimentReport run_experiment_a(const ExperimentConfig& config);
ExperimentReport run_experiment_b(const ExperimentConfig& config);
ExperimentReport run_experiment_c(const ExperimentConfig& config);
ExperimentReport run_experiment(const ExperimentConfig& config);

// --- emission ------------------------------------------------------------------------

enum class ReportFormat { Json, Csv };

/// Report JSON without metadata. Throws ValidationError on any non-finite number.
std::string report_json(const ExperimentReport& report);
ExperimentReport parse_report_json(std::string_view text);

/// CSV tables for a report, keyed by file name.
std::map<std::string, std::string> report_tables(const ExperimentReport& report);

/// Writes report.json + metadata.json (json) and/or the CSV tables (csv) into
/// `dir`, creating it if needed. Returns the files written.
std::vector<std::filesystem::path> emit_report(const ExperimentReport& report,
                                               const std::filesystem::path& dir,
                                               std::vector<ReportFormat> formats = {ReportFormat::Json,
                                                                                    ReportFormat::Csv});

/// Structured JSON for a single normality report: {n, L, W, statistic, bound, k, violated, ...}.
std::string normality_json(const std::vector<NormalityReport>& reports, const std::string& sequence);

}  // namespace pseudodice
