#include "pseudodice/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <mutex>
#include <thread>

#include "pseudodice/error.hpp"
#include "pseudodice/mtprng.hpp"

namespace pseudodice {

namespace {

// Runs body(i) for i in [0, count) on up to `threads` workers (0 = hardware
// concurrency). Callers write results into slot i, so the output does not
// depend on scheduling.
template <typename Body>
void parallel_for(std::size_t count, int threads, Body body) {
  std::size_t workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                     : static_cast<std::size_t>(threads);
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::map<std::string, std::string> config_echo(const ExperimentConfig& config) {
  auto entries = config_entries(config);
  entries.erase("threads");
  return entries;
}

std::size_t window_end(const WindowRange& r, int input_len) {
  return r.count == 0 ? 0 : r.start + r.count + static_cast<std::size_t>(input_len) - 1;
}

SigmaVerdict verdict(const std::string& name, double rate, std::size_t n, double k) {
  SigmaVerdict v;
  v.dataset = name;
  v.rate = rate;
  v.n = n;
  v.k = k;
  v.threshold = 0.5 + k * null_sigma(2, n);
  v.exceeds = sigma_exceeds(rate, n, 2, k);
  return v;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()), started_at_(utc_timestamp()) {}
  ReportMetadata finish(int threads) const {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    return {started_at_, std::chrono::duration<double>(elapsed).count(), threads};
  }

 private:
  std::chrono::steady_clock::time_point start_;
  std::string started_at_;
};

}  // namespace

DigitStream load_or_generate_digits(const std::filesystem::path& cache_dir, Constant constant,
                                    std::size_t required, bool allow_generate) {
  const auto path = digit_cache_path(cache_dir, constant);
  if (std::filesystem::exists(path)) {
    DigitStream stream = load_digit_file(path);
    if (stream.constant() != constant) {
      throw ValidationError("digit cache " + path.string() + " holds the wrong constant");
    }
    if (stream.count() >= required) return stream;
    if (!allow_generate) {
      throw CapacityError("digit cache " + path.string() + " has " + std::to_string(stream.count()) +
                              " digits; " + std::to_string(required) + " are required (run gen-digits)",
                          required);
    }
  } else if (!allow_generate) {
    throw CapacityError("digit cache " + path.string() + " is missing; " + std::to_string(required) +
                            " digits are required (run gen-digits)",
                        required);
  }
  DigitStream stream = gen_digits(constant, required);
  std::filesystem::create_directories(cache_dir);
  save_digit_file(stream, path);
  return stream;
}

BitSequence alternating_sequence(std::size_t count) {
  std::vector<std::uint8_t> bits(count);
  for (std::size_t i = 0; i < count; ++i) bits[i] = static_cast<std::uint8_t>(i & 1u);
  return BitSequence(std::move(bits), {BitSource::Kind::Synthetic, "synthetic:alternating"});
}

BitSequence biased_sequence(std::uint32_t seed, std::size_t count, std::string_view prefix, double p1,
                            std::size_t force_start) {
  const std::uint64_t target = pattern_value(prefix);
  const std::size_t len = prefix.size();
  const std::uint64_t mask = (std::uint64_t{1} << len) - 1;
  Mt19937 mt(seed);
  std::vector<std::uint8_t> bits(count);
  std::uint64_t recent = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double u = mt.next_real53();
    const bool after_prefix = i >= len && recent == target;
    bits[i] = after_prefix ? (u < p1 ? 1 : 0) : (u >= 0.5 ? 1 : 0);
    recent = ((recent << 1) | bits[i]) & mask;
  }
  if (force_start > 0) {
    const std::size_t end = force_start + len;  // 1-indexed position of the forced label
    if (end > count) throw BoundsError("forced test window lies past the sequence end", end);
    for (std::size_t k = 0; k < len; ++k) bits[force_start - 1 + k] = static_cast<std::uint8_t>(prefix[k] - '0');
    bits[end - 1] = 1;
  }
  std::string label = "synthetic:biased:seed=" + std::to_string(seed) + ":prefix=" + std::string(prefix) +
                      ":p1=" + std::to_string(p1);
  return BitSequence(std::move(bits), {BitSource::Kind::Synthetic, std::move(label)});
}

ExperimentReport run_experiment_a(const ExperimentConfig& config) {
  if (config.experiment != ExperimentId::A) throw ConfigError("config is not for experiment a");
  config.validate();
  Stopwatch clock;

  const std::size_t required = std::max({window_end(config.train, config.input_len),
                                         window_end(config.test1, config.input_len),
                                         window_end(config.test2, config.input_len)});
  BitSequence bits;
  switch (config.source) {
    case SourceKind::Digits: {
      const DigitStream digits =
          load_or_generate_digits(config.digit_cache_dir, config.constant, required, config.generate_digits);
      bits = binarize_digits(digits, config.digit_threshold, config.digit_threshold_inclusive);
      break;
    }
    case SourceKind::Mt:
      bits = mt_binary_sequence(config.seeds.empty() ? 1u : config.seeds.front(), required, config.mt_threshold);
      break;
    case SourceKind::Alternating:
      bits = alternating_sequence(required);
      break;
    case SourceKind::Biased:
      throw ConfigError("experiment a does not support the biased source");
  }

  ReportA out;
  out.source_label = bits.source().label;
  const WindowDataset train_set = make_windows(bits, config.train.start, config.train.count, config.input_len);
  MlpModel model = init_model(config.layer_sizes(), config.train_config.init_seed,
                              config.train_config.input_encoding);
  TrainResult trained = train(std::move(model), train_set, config.train_config);
  out.train_log = trained.log;

  auto evaluate = [&](const std::string& name, const WindowRange& range, const WindowDataset& ds) {
    DatasetAccuracy acc;
    acc.name = name;
    acc.range = range;
    acc.accuracy = accuracy(trained.model, ds);
    acc.ideal_rate = ideal_predictor_rate(dataset_census(ds));
    if (acc.accuracy > acc.ideal_rate) out.accuracy_within_ideal = false;
    for (double k : config.sigma_levels) out.verdicts.push_back(verdict(name, acc.accuracy, ds.size(), k));
    out.datasets.push_back(acc);
  };
  evaluate("train", config.train, train_set);
  if (config.test1.count > 0) {
    evaluate("test1", config.test1, make_windows(bits, config.test1.start, config.test1.count, config.input_len));
  }
  if (config.test2.count > 0) {
    const WindowDataset t2 = make_windows(bits, config.test2.start, config.test2.count, config.input_len);
    evaluate("test2", config.test2, t2);
    const auto groups = static_cast<std::size_t>(config.subgroups);
    out.subgroup_size = t2.size() / groups;
    for (std::size_t g = 0; g < groups; ++g) {
      out.subgroup_rates.push_back(accuracy(trained.model, t2.slice(g * out.subgroup_size, out.subgroup_size)));
    }
    out.subgroup_lcl = subgroup_lcl(out.subgroup_rates, config.subgroup_confidence);
    out.lcl_above_chance = *out.subgroup_lcl > 0.5;
  }

  ExperimentReport report;
  report.experiment = ExperimentId::A;
  report.config = config_echo(config);
  report.a = std::move(out);
  report.metadata = clock.finish(config.threads);
  return report;
}

ExperimentReport run_experiment_b(const ExperimentConfig& config) {
  if (config.experiment != ExperimentId::B) throw ConfigError("config is not for experiment b");
  config.validate();
  Stopwatch clock;

  ReportB out;
  out.yardstick = config.accuracy_yardstick;
  out.seeds.resize(config.seeds.size());

  struct Prepared {
    WindowDataset train_set;
    WindowDataset test_set;
  };
  std::vector<Prepared> prepared(config.seeds.size());
  for (std::size_t s = 0; s < config.seeds.size(); ++s) {
    const std::uint32_t seed = config.seeds[s];
    const BitSequence bits =
        config.source == SourceKind::Biased
            ? biased_sequence(seed, config.sequence_length, config.bias_prefix, config.bias_probability,
                              config.test1.start)
            : mt_binary_sequence(seed, config.sequence_length, config.mt_threshold);
    prepared[s].train_set = make_windows(bits, config.train.start, config.train.count, config.input_len);
    prepared[s].test_set = make_windows(bits, config.test1.start, config.test1.count, config.input_len);

    SeedResult& r = out.seeds[s];
    r.seed = seed;
    r.source_label = bits.source().label;
    const PatternCensus census = dataset_census(prepared[s].train_set);
    r.train_ideal_rate = ideal_predictor_rate(census);
    const Instance& probe = prepared[s].test_set[0];
    r.test_prefix = pattern_string(probe.input, config.input_len);
    r.test_label = probe.label;
    const MajorityLabel majority = majority_label(census, probe.input);
    r.prefix_count0 = majority.count0;
    r.prefix_count1 = majority.count1;
    r.majority = majority.label;
    r.label_matches_majority = majority.label == probe.label;
    r.trials.resize(static_cast<std::size_t>(config.trials));
  }

  // Every (seed, trial) pair owns its model; seeds are fixed before dispatch.
  const std::size_t trials = static_cast<std::size_t>(config.trials);
  parallel_for(config.seeds.size() * trials, config.threads, [&](std::size_t job) {
    const std::size_t s = job / trials;
    const std::size_t t = job % trials;
    TrialResult& tr = out.seeds[s].trials[t];
    tr.trial = static_cast<int>(t + 1);
    tr.init_seed = config.seeds[s] * 1000u + static_cast<std::uint32_t>(t + 1);
    TrainConfig tc = config.train_config;
    tc.init_seed = tr.init_seed;
    MlpModel model = init_model(config.layer_sizes(), tc.init_seed, tc.input_encoding);
    TrainResult trained = train(std::move(model), prepared[s].train_set, tc);
    tr.epochs = static_cast<int>(trained.log.epochs.size());
    tr.train_accuracy = accuracy(trained.model, prepared[s].train_set);
    for (const auto& inst : prepared[s].test_set.instances()) {
      if (predict_code(trained.model, inst.input) == inst.label) ++tr.test_correct;
    }
  });

  for (auto& r : out.seeds) {
    std::size_t above = 0;
    for (const auto& tr : r.trials) {
      r.successes += tr.test_correct;
      if (tr.train_accuracy > config.accuracy_yardstick) ++above;
      if (tr.train_accuracy > r.train_ideal_rate) r.accuracy_within_ideal = false;
    }
    const std::size_t tests = prepared.empty() ? 0 : prepared.front().test_set.size();
    r.attempts = r.trials.size() * tests;
    r.fraction_above_yardstick = r.trials.empty() ? 0.0 : static_cast<double>(above) / static_cast<double>(r.trials.size());
    // Twice the count against the attempts avoids rounding at odd trial counts.
    const bool majority_scores = 2 * r.successes > r.attempts;
    const bool minority_scores = 2 * r.successes < r.attempts;
    r.explained = r.label_matches_majority ? majority_scores : minority_scores;
    if (r.explained) ++out.explained_seeds;
  }

  ExperimentReport report;
  report.experiment = ExperimentId::B;
  report.config = config_echo(config);
  report.b = std::move(out);
  report.metadata = clock.finish(config.threads);
  return report;
}

namespace {

NormalityRow normality_row(const BitSequence& bits, const BitSequence* alternate, std::size_t n, int length,
                           double k) {
  const PatternCensus census = pattern_census(bits, n, length);
  const NormalityReport nr = normality_test(census, k);
  NormalityRow row;
  row.sequence = bits.source().label;
  row.n = n;
  row.length = length;
  row.windows = nr.windows;
  row.k = k;
  row.statistic = nr.statistic;
  row.bound = nr.bound;
  row.violated = nr.violated;
  row.ones_frequency = ones_frequency(bits, n);
  const double strings = std::ldexp(1.0, length);
  row.frequency_band = k * std::sqrt(strings - 1) / (strings * std::sqrt(static_cast<double>(nr.windows)));
  for (double f : nr.frequencies) {
    row.max_frequency_deviation = std::max(row.max_frequency_deviation, std::abs(f - 1.0 / strings));
  }
  row.frequencies_within_band = row.max_frequency_deviation <= row.frequency_band;
  if (alternate) {
    const NormalityReport alt = normality_test(pattern_census(*alternate, n, length), k);
    row.alt_statistic = alt.statistic;
    row.alt_violated = alt.violated;
  }
  row.counts = nr.counts;
  return row;
}

}  // namespace

ExperimentReport run_experiment_c(const ExperimentConfig& config) {
  if (config.experiment != ExperimentId::C) throw ConfigError("config is not for experiment c");
  config.validate();
  Stopwatch clock;
  const std::size_t largest = *std::max_element(config.n_grid.begin(), config.n_grid.end());

  ReportC out;
  for (Constant c : config.constants) {
    const DigitStream digits = load_or_generate_digits(config.digit_cache_dir, c, largest, config.generate_digits);
    const BitSequence bits = binarize_digits(digits, config.digit_threshold, config.digit_threshold_inclusive);
    const BitSequence alternate = binarize_digits(digits, config.digit_threshold, !config.digit_threshold_inclusive);
    for (std::size_t n : config.n_grid) {
      out.rows.push_back(normality_row(bits, &alternate, n, config.census_length, config.sigma_k));
    }
  }
  if (config.mt_control) {
    const BitSequence bits = mt_binary_sequence(config.mt_control_seed, largest, config.mt_threshold);
    for (std::size_t n : config.n_grid) {
      out.rows.push_back(normality_row(bits, nullptr, n, config.census_length, config.sigma_k));
    }
  }

  ExperimentReport report;
  report.experiment = ExperimentId::C;
  report.config = config_echo(config);
  report.c = std::move(out);
  report.metadata = clock.finish(config.threads);
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  switch (config.experiment) {
    case ExperimentId::A:
      return run_experiment_a(config);
    case ExperimentId::B:
      return run_experiment_b(config);
    case ExperimentId::C:
      return run_experiment_c(config);
  }
  throw ConfigError("unknown experiment");
}

}  // namespace pseudodice
