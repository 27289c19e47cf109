#include "pseudodice/bitseq.hpp"

#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "pseudodice/error.hpp"

namespace pseudodice {

BitSequence::BitSequence(std::vector<std::uint8_t> bits, BitSource source)
    : bits_(std::move(bits)), source_(std::move(source)) {
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] > 1) {
      throw ValidationError("bit at position " + std::to_string(i + 1) + " is not 0 or 1");
    }
  }
}

std::uint8_t BitSequence::at(std::size_t position) const {
  if (position == 0 || position > bits_.size()) {
    throw BoundsError("bit position " + std::to_string(position) + " outside 1.." +
                          std::to_string(bits_.size()),
                      position);
  }
  return bits_[position - 1];
}

WindowDataset::WindowDataset(int input_len, std::size_t start, BitSource source,
                             std::vector<Instance> instances)
    : input_len_(input_len), start_(start), source_(std::move(source)), instances_(std::move(instances)) {
  if (input_len < 1 || input_len > kMaxInputLen) {
    throw DomainError("input length must be in 1.." + std::to_string(kMaxInputLen));
  }
  const std::uint32_t limit = 1u << input_len;
  for (const auto& inst : instances_) {
    if (inst.input >= limit || inst.label > 1) throw ValidationError("instance out of range");
  }
}

std::vector<std::uint8_t> WindowDataset::input_bits(std::size_t i) const {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(input_len_));
  const std::uint32_t code = instances_.at(i).input;
  for (int k = 0; k < input_len_; ++k) out[k] = (code >> (input_len_ - 1 - k)) & 1u;
  return out;
}

WindowDataset WindowDataset::slice(std::size_t offset, std::size_t count) const {
  if (offset + count > instances_.size()) {
    throw BoundsError("dataset slice exceeds " + std::to_string(instances_.size()) + " instances",
                      offset + count);
  }
  std::vector<Instance> part(instances_.begin() + static_cast<std::ptrdiff_t>(offset),
                             instances_.begin() + static_cast<std::ptrdiff_t>(offset + count));
  return WindowDataset(input_len_, start_ + offset, source_, std::move(part));
}

std::uint64_t PatternCensus::count(std::string_view pattern) const {
  if (static_cast<int>(pattern.size()) != length) {
    throw DomainError("pattern length " + std::to_string(pattern.size()) + " does not match census length " +
                      std::to_string(length));
  }
  return counts.at(pattern_value(pattern));
}

BitSequence binarize_digits(const DigitStream& stream, int threshold, bool inclusive) {
  const auto digits = stream.digits();
  std::vector<std::uint8_t> bits(digits.size());
  for (std::size_t i = 0; i < digits.size(); ++i) {
    bits[i] = (inclusive ? digits[i] >= threshold : digits[i] > threshold) ? 1 : 0;
  }
  std::string label = "digits:" + std::string(constant_name(stream.constant())) +
                      (inclusive ? ":ge" : ":gt") + std::to_string(threshold);
  return BitSequence(std::move(bits), {BitSource::Kind::Digits, std::move(label)});
}

WindowDataset make_windows(const BitSequence& bits, std::size_t start, std::size_t count, int input_len) {
  if (input_len < 1 || input_len > kMaxInputLen) {
    throw DomainError("input length must be in 1.." + std::to_string(kMaxInputLen));
  }
  if (start < 1) throw BoundsError("window start must be >= 1", 0);
  const std::size_t required = start + count + static_cast<std::size_t>(input_len) - 1;
  if (count > 0 && required > bits.count()) {
    throw BoundsError("windows " + std::to_string(start) + "+" + std::to_string(count) +
                          " with input length " + std::to_string(input_len) + " need a sequence of " +
                          std::to_string(required) + " bits, have " + std::to_string(bits.count()),
                      required);
  }
  std::vector<Instance> instances(count);
  if (count > 0) {
    const auto b = bits.bits();
    const std::uint32_t mask = (1u << input_len) - 1;
    std::uint32_t input = 0;
    std::size_t pos = start - 1;  // 0-based
    for (int k = 0; k < input_len; ++k) input = (input << 1) | b[pos + k];
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint8_t label = b[pos + i + input_len];
      instances[i] = {input, label};
      input = ((input << 1) | label) & mask;
    }
  }
  return WindowDataset(input_len, start, bits.source(), std::move(instances));
}

PatternCensus pattern_census(std::span<const std::uint8_t> bits, std::size_t n, int length) {
  if (length < 1 || length > kMaxCensusLength) {
    throw DomainError("census length must be in 1.." + std::to_string(kMaxCensusLength));
  }
  if (n > bits.size()) {
    throw BoundsError("census over " + std::to_string(n) + " bits but the sequence has " +
                          std::to_string(bits.size()),
                      n);
  }
  if (n < static_cast<std::size_t>(length)) {
    throw DomainError("census needs n >= L");
  }
  PatternCensus census;
  census.length = length;
  census.n = n;
  census.windows = n - static_cast<std::size_t>(length) + 1;
  census.counts.assign(std::size_t{1} << length, 0);
  const std::uint32_t mask = static_cast<std::uint32_t>((std::uint64_t{1} << length) - 1);
  std::uint32_t value = 0;
  for (int k = 0; k < length - 1; ++k) value = (value << 1) | bits[k];
  for (std::size_t i = static_cast<std::size_t>(length) - 1; i < n; ++i) {
    value = ((value << 1) | bits[i]) & mask;
    ++census.counts[value];
  }
  return census;
}

PatternCensus pattern_census(const BitSequence& bits, std::size_t n, int length) {
  return pattern_census(bits.bits(), n, length);
}

PatternCensus dataset_census(const WindowDataset& dataset) {
  PatternCensus census;
  census.length = dataset.input_len() + 1;
  census.n = dataset.size() + static_cast<std::size_t>(dataset.input_len());
  census.windows = dataset.size();
  census.counts.assign(std::size_t{1} << census.length, 0);
  for (const auto& inst : dataset.instances()) ++census.counts[(inst.input << 1) | inst.label];
  return census;
}

double ones_frequency(const BitSequence& bits, std::size_t n) {
  if (n < 1 || n > bits.count()) {
    throw BoundsError("ones_frequency needs 1 <= n <= " + std::to_string(bits.count()), n);
  }
  std::size_t ones = 0;
  for (std::size_t i = 0; i < n; ++i) ones += bits.bits()[i];
  return static_cast<double>(ones) / static_cast<double>(n);
}

std::string pattern_string(std::uint64_t value, int length) {
  std::string out(static_cast<std::size_t>(length), '0');
  for (int k = 0; k < length; ++k) {
    if ((value >> (length - 1 - k)) & 1u) out[k] = '1';
  }
  return out;
}

std::uint64_t pattern_value(std::string_view pattern) {
  std::uint64_t value = 0;
  for (char c : pattern) {
    if (c != '0' && c != '1') throw DomainError("pattern '" + std::string(pattern) + "' is not binary");
    value = (value << 1) | static_cast<std::uint64_t>(c - '0');
  }
  return value;
}

// --- bit file ---------------------------------------------------------------

namespace {

constexpr std::string_view kBitMagic = "#pseudodice-bits";
constexpr std::size_t kLineWidth = 80;

BitSource::Kind kind_from_label(std::string_view label) {
  if (label.starts_with("digits:")) return BitSource::Kind::Digits;
  if (label.starts_with("mt19937:")) return BitSource::Kind::Mt19937;
  if (label.starts_with("synthetic:")) return BitSource::Kind::Synthetic;
  return BitSource::Kind::File;
}

}  // namespace

std::string format_bit_text(const BitSequence& bits) {
  std::string out;
  out.reserve(bits.count() + bits.count() / kLineWidth + 128);
  out += kBitMagic;
  out += " source=" + bits.source().label + " count=" + std::to_string(bits.count()) + "\n";
  const auto b = bits.bits();
  for (std::size_t i = 0; i < b.size(); ++i) {
    out += static_cast<char>('0' + b[i]);
    if ((i + 1) % kLineWidth == 0 || i + 1 == b.size()) out += '\n';
  }
  return out;
}

BitSequence parse_bit_text(std::string_view text) {
  const std::size_t header_end = text.find('\n');
  std::string_view header = text.substr(0, header_end);
  if (!header.empty() && header.back() == '\r') header.remove_suffix(1);
  std::istringstream fields{std::string(header)};
  std::string magic;
  fields >> magic;
  if (magic != kBitMagic) throw FormatError("missing '#pseudodice-bits' header", 0);
  std::optional<std::string> source;
  std::optional<std::size_t> count;
  std::string field;
  while (fields >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw FormatError("malformed header field '" + field + "'", 0);
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "source") {
      source = value;
    } else if (key == "count") {
      if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
        throw FormatError("malformed count '" + value + "'", 0);
      }
      count = std::stoull(value);
    } else {
      throw FormatError("unknown header field '" + key + "'", 0);
    }
  }
  if (!source || !count) throw FormatError("header must declare source and count", 0);

  std::vector<std::uint8_t> bits;
  bits.reserve(*count);
  const std::size_t body = header_end == std::string_view::npos ? text.size() : header_end + 1;
  for (std::size_t i = body; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '0' || c == '1') {
      bits.push_back(static_cast<std::uint8_t>(c - '0'));
    } else if (c != '\n' && c != '\r') {
      throw FormatError(std::string("invalid character '") + c + "' in bit body", i);
    }
  }
  if (bits.size() != *count) {
    throw FormatError("declared count " + std::to_string(*count) + " but found " +
                          std::to_string(bits.size()) + " bits",
                      text.size());
  }
  return BitSequence(std::move(bits), {kind_from_label(*source), *source});
}

void save_bit_file(const BitSequence& bits, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing", path.string());
  const std::string text = format_bit_text(bits);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed", path.string());
}

BitSequence load_bit_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_bit_text(buffer.str());
}

std::string census_csv(const PatternCensus& census) {
  std::ostringstream out;
  out << "pattern,count,frequency\n";
  out << std::setprecision(17);
  for (std::size_t v = 0; v < census.counts.size(); ++v) {
    out << pattern_string(v, census.length) << ',' << census.counts[v] << ','
        << static_cast<double>(census.counts[v]) / static_cast<double>(census.windows) << '\n';
  }
  return out.str();
}

}  // namespace pseudodice
