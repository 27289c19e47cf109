// pseudodice: command-line front end for digit generation, binarization,
// pattern census, normality testing and the three experiments.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pseudodice/bitseq.hpp"
#include "pseudodice/constdigits.hpp"
#include "pseudodice/error.hpp"
#include "pseudodice/harness.hpp"
#include "pseudodice/mtprng.hpp"
#include "pseudodice/stats.hpp"

namespace pd = pseudodice;

namespace {

constexpr std::size_t kVerifyLimit = 100'000;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw pd::IoError("cannot open for writing", path);
  out << text;
  if (!out) throw pd::IoError("write failed", path);
}

std::vector<std::size_t> parse_grid(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw pd::ConfigError("bad --n-grid entry '" + item + "'");
    }
  }
  if (out.empty()) throw pd::ConfigError("--n-grid is empty");
  return out;
}

int cmd_gen_digits(const std::string& constant, std::size_t count, const std::string& out, bool verify,
                   std::size_t max_digits) {
  const pd::Constant c = pd::parse_constant(constant);
  const pd::DigitStream stream = pd::gen_digits(c, count, max_digits);
  if (verify) {
    const std::size_t n = std::min(count, kVerifyLimit);
    const pd::DigitStream alt = pd::gen_digits_alt(c, n);
    const auto primary = stream.digits().first(n);
    const auto mismatch = std::mismatch(primary.begin(), primary.end(), alt.digits().begin());
    if (mismatch.first != primary.end()) {
      throw pd::ValidationError("primary and alternate generators disagree at position " +
                                std::to_string(mismatch.first - primary.begin() + 1));
    }
    std::cerr << "verified " << n << " digits against the alternate algorithm\n";
  }
  pd::save_digit_file(stream, out);
  std::cerr << "wrote " << count << " digits of " << constant << " to " << out << "\n";
  return 0;
}

int cmd_binarize(const std::string& in, int threshold, bool inclusive, const std::string& out) {
  const pd::DigitStream digits = pd::load_digit_file(in);
  pd::save_bit_file(pd::binarize_digits(digits, threshold, inclusive), out);
  return 0;
}

int cmd_census(const std::string& in, std::size_t n, int length, const std::string& out) {
  const pd::BitSequence bits = pd::load_bit_file(in);
  write_text(out, pd::census_csv(pd::pattern_census(bits, n == 0 ? bits.count() : n, length)));
  return 0;
}

int cmd_normality(const std::string& in, const std::string& grid, double k, int length, const std::string& out) {
  const pd::BitSequence bits = pd::load_bit_file(in);
  std::vector<pd::NormalityReport> reports;
  for (std::size_t n : parse_grid(grid)) {
    reports.push_back(pd::normality_test(pd::pattern_census(bits, n, length), k));
    const auto& r = reports.back();
    std::cout << "n=" << r.n << " W=" << r.windows << " statistic=" << r.statistic << " bound=" << r.bound
              << (r.violated ? " VIOLATED" : " ok") << "\n";
  }
  write_text(out, pd::normality_json(reports, bits.source().label));
  return 0;
}

int cmd_experiment(const std::string& which, const std::string& config_path, const std::string& out, int threads) {
  const pd::ExperimentId id = pd::parse_experiment(which);
  pd::ExperimentConfig config = pd::ExperimentConfig::defaults(id);
  if (!config_path.empty()) config = pd::load_config_file(config_path, config);
  if (config.experiment != id) {
    throw pd::ConfigError("config file declares experiment '" + std::string(pd::experiment_name(config.experiment)) +
                          "' but '" + which + "' was requested");
  }
  if (threads >= 0) config.threads = threads;
  const pd::ExperimentReport report = pd::run_experiment(config);
  for (const auto& path : pd::emit_report(report, out)) std::cerr << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_mt(std::uint32_t seed, std::size_t count, double threshold, const std::string& out) {
  pd::save_bit_file(pd::mt_binary_sequence(seed, count, threshold), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Next-bit predictability and normality tests for pseudo-random 0-1 sequences"};
  app.require_subcommand(1);

  std::string constant;
  std::size_t count = 0;
  std::string out;
  std::string in;
  bool verify = false;
  std::size_t max_digits = pd::kDefaultMaxDigits;
  auto* gen = app.add_subcommand("gen-digits", "Generate a digit cache file");
  gen->add_option("--constant", constant, "pi, e or sqrt2")->required();
  gen->add_option("--count", count, "Number of fractional digits")->required();
  gen->add_option("--out", out, "Output digit file")->required();
  gen->add_flag("--verify", verify, "Cross-check the first 100000 digits with the alternate algorithm");
  gen->add_option("--max-digits", max_digits, "Capacity limit")->capture_default_str();

  int threshold = 5;
  bool inclusive = true;
  auto* bin = app.add_subcommand("binarize", "Convert a digit file into a bit file");
  bin->add_option("--in", in, "Digit file")->required();
  bin->add_option("--threshold", threshold, "Digit threshold")->capture_default_str();
  bin->add_option("--digit-threshold-inclusive", inclusive, "digit >= threshold is 1 (else digit > threshold)")
      ->capture_default_str();
  bin->add_option("--out", out, "Output bit file")->required();

  std::size_t n = 0;
  int length = 7;
  auto* census = app.add_subcommand("census", "Pattern census of a bit file as CSV");
  census->add_option("--in", in, "Bit file")->required();
  census->add_option("--n", n, "Leading bits to scan (default: all)");
  census->add_option("--length", length, "String length L")->capture_default_str();
  census->add_option("--out", out, "Output CSV")->required();

  std::string grid = "10000,100000,1000000,9000000";
  double k = 5;
  auto* normality = app.add_subcommand("normality", "Ideal-predictor normality test over an n grid");
  normality->add_option("--in", in, "Bit file")->required();
  normality->add_option("--n-grid", grid, "Comma-separated n values")->capture_default_str();
  normality->add_option("--k", k, "Sigma multiplier")->capture_default_str();
  normality->add_option("--length", length, "String length L")->capture_default_str();
  normality->add_option("--out", out, "Output JSON")->required();

  std::string which;
  std::string config_path;
  int threads = -1;
  auto* experiment = app.add_subcommand("experiment", "Run experiment a, b or c");
  experiment->add_option("which", which, "a, b or c")->required();
  experiment->add_option("--config", config_path, "key=value config file");
  experiment->add_option("--out", out, "Output directory")->required();
  experiment->add_option("--threads", threads, "Worker threads (0 = all cores)");

  std::uint32_t seed = pd::Mt19937::kDefaultSeed;
  double mt_threshold = 0.5;
  auto* mt = app.add_subcommand("mt", "MT19937 binary sequence as a bit file");
  mt->add_option("--seed", seed, "32-bit seed")->capture_default_str();
  mt->add_option("--count", count, "Number of bits")->required();
  mt->add_option("--threshold", mt_threshold, "Real threshold")->capture_default_str();
  mt->add_option("--out", out, "Output bit file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_gen_digits(constant, count, out, verify, max_digits);
    if (*bin) return cmd_binarize(in, threshold, inclusive, out);
    if (*census) return cmd_census(in, n, length, out);
    if (*normality) return cmd_normality(in, grid, k, length, out);
    if (*experiment) return cmd_experiment(which, config_path, out, threads);
    if (*mt) return cmd_mt(seed, count, mt_threshold, out);
  } catch (const pd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pd::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
