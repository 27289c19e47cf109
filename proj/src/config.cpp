#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "pseudodice/error.hpp"
#include "pseudodice/harness.hpp"

namespace pseudodice {

std::string_view experiment_name(ExperimentId id) noexcept {
  switch (id) {
    case ExperimentId::A:
      return "a";
    case ExperimentId::B:
      return "b";
    case ExperimentId::C:
      return "c";
  }
  return "?";
}

ExperimentId parse_experiment(std::string_view name) {
  if (name == "a" || name == "A") return ExperimentId::A;
  if (name == "b" || name == "B") return ExperimentId::B;
  if (name == "c" || name == "C") return ExperimentId::C;
  throw ConfigError("unknown experiment '" + std::string(name) + "' (expected a, b or c)");
}

std::string_view source_kind_name(SourceKind s) noexcept {
  switch (s) {
    case SourceKind::Digits:
      return "digits";
    case SourceKind::Mt:
      return "mt";
    case SourceKind::Alternating:
      return "alternating";
    case SourceKind::Biased:
      return "biased";
  }
  return "?";
}

namespace {

SourceKind parse_source(std::string_view name) {
  for (auto s : {SourceKind::Digits, SourceKind::Mt, SourceKind::Alternating, SourceKind::Biased}) {
    if (source_kind_name(s) == name) return s;
  }
  throw ConfigError("unknown source '" + std::string(name) + "'");
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    const auto comma = value.find(',', pos);
    out.push_back(trim(value.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

template <typename T>
T parse_integer(const std::string& key, std::string_view value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ConfigError("key '" + key + "': '" + std::string(value) + "' is not a valid integer");
  }
  return out;
}

double parse_real(const std::string& key, std::string_view value) {
  if (value == "inf" || value == "infinity") return std::numeric_limits<double>::infinity();
  double out = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty() || std::isnan(out)) {
    throw ConfigError("key '" + key + "': '" + std::string(value) + "' is not a valid number");
  }
  return out;
}

bool parse_bool(const std::string& key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("key '" + key + "': '" + std::string(value) + "' is not a boolean");
}

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T, typename F>
std::string join(const std::vector<T>& values, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += fmt(values[i]);
  }
  return out;
}

std::string to_str(std::size_t v) { return std::to_string(v); }

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["experiment"] = [](auto& c, auto&, auto& v) { c.experiment = parse_experiment(v); };
    t["source"] = [](auto& c, auto&, auto& v) { c.source = parse_source(v); };
    t["constant"] = [](auto& c, auto&, auto& v) { c.constant = parse_constant(v); };
    t["constants"] = [](auto& c, auto&, auto& v) {
      c.constants.clear();
      for (const auto& item : split_list(v)) c.constants.push_back(parse_constant(item));
    };
    t["seeds"] = [](auto& c, auto& k, auto& v) {
      c.seeds.clear();
      for (const auto& item : split_list(v)) c.seeds.push_back(parse_integer<std::uint32_t>(k, item));
    };
    t["train_start"] = [](auto& c, auto& k, auto& v) { c.train.start = parse_integer<std::size_t>(k, v); };
    t["train_count"] = [](auto& c, auto& k, auto& v) { c.train.count = parse_integer<std::size_t>(k, v); };
    t["test1_start"] = [](auto& c, auto& k, auto& v) { c.test1.start = parse_integer<std::size_t>(k, v); };
    t["test1_count"] = [](auto& c, auto& k, auto& v) { c.test1.count = parse_integer<std::size_t>(k, v); };
    t["test2_start"] = [](auto& c, auto& k, auto& v) { c.test2.start = parse_integer<std::size_t>(k, v); };
    t["test2_count"] = [](auto& c, auto& k, auto& v) { c.test2.count = parse_integer<std::size_t>(k, v); };
    t["sequence_length"] = [](auto& c, auto& k, auto& v) { c.sequence_length = parse_integer<std::size_t>(k, v); };
    t["input_len"] = [](auto& c, auto& k, auto& v) { c.input_len = parse_integer<int>(k, v); };
    t["hidden_layers"] = [](auto& c, auto& k, auto& v) {
      c.hidden_layers.clear();
      for (const auto& item : split_list(v)) c.hidden_layers.push_back(parse_integer<std::size_t>(k, item));
    };
    t["learning_rate"] = [](auto& c, auto& k, auto& v) { c.train_config.learning_rate = parse_real(k, v); };
    t["momentum"] = [](auto& c, auto& k, auto& v) { c.train_config.momentum = parse_real(k, v); };
    t["max_epochs"] = [](auto& c, auto& k, auto& v) { c.train_config.max_epochs = parse_integer<int>(k, v); };
    t["min_gradient"] = [](auto& c, auto& k, auto& v) { c.train_config.min_gradient = parse_real(k, v); };
    t["init_seed"] = [](auto& c, auto& k, auto& v) {
      c.train_config.init_seed = parse_integer<std::uint32_t>(k, v);
    };
    t["input_encoding"] = [](auto& c, auto&, auto& v) { c.train_config.input_encoding = parse_encoding(v); };
    t["trials"] = [](auto& c, auto& k, auto& v) { c.trials = parse_integer<int>(k, v); };
    t["census_length"] = [](auto& c, auto& k, auto& v) { c.census_length = parse_integer<int>(k, v); };
    t["sigma_k"] = [](auto& c, auto& k, auto& v) { c.sigma_k = parse_real(k, v); };
    t["sigma_levels"] = [](auto& c, auto& k, auto& v) {
      c.sigma_levels.clear();
      for (const auto& item : split_list(v)) c.sigma_levels.push_back(parse_real(k, item));
    };
    t["subgroups"] = [](auto& c, auto& k, auto& v) { c.subgroups = parse_integer<int>(k, v); };
    t["subgroup_confidence"] = [](auto& c, auto& k, auto& v) { c.subgroup_confidence = parse_real(k, v); };
    t["n_grid"] = [](auto& c, auto& k, auto& v) {
      c.n_grid.clear();
      for (const auto& item : split_list(v)) c.n_grid.push_back(parse_integer<std::size_t>(k, item));
    };
    t["digit_threshold"] = [](auto& c, auto& k, auto& v) { c.digit_threshold = parse_integer<int>(k, v); };
    t["digit_threshold_inclusive"] = [](auto& c, auto& k, auto& v) {
      c.digit_threshold_inclusive = parse_bool(k, v);
    };
    t["mt_threshold"] = [](auto& c, auto& k, auto& v) { c.mt_threshold = parse_real(k, v); };
    t["accuracy_yardstick"] = [](auto& c, auto& k, auto& v) { c.accuracy_yardstick = parse_real(k, v); };
    t["mt_control"] = [](auto& c, auto& k, auto& v) { c.mt_control = parse_bool(k, v); };
    t["mt_control_seed"] = [](auto& c, auto& k, auto& v) {
      c.mt_control_seed = parse_integer<std::uint32_t>(k, v);
    };
    t["bias_prefix"] = [](auto& c, auto&, auto& v) { c.bias_prefix = v; };
    t["bias_probability"] = [](auto& c, auto& k, auto& v) { c.bias_probability = parse_real(k, v); };
    t["digit_cache_dir"] = [](auto& c, auto&, auto& v) { c.digit_cache_dir = v; };
    t["generate_digits"] = [](auto& c, auto& k, auto& v) { c.generate_digits = parse_bool(k, v); };
    t["threads"] = [](auto& c, auto& k, auto& v) { c.threads = parse_integer<int>(k, v); };
    return t;
  }();
  return table;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults(ExperimentId id) {
  ExperimentConfig c;
  c.experiment = id;
  switch (id) {
    case ExperimentId::A:
      c.source = SourceKind::Digits;
      break;
    case ExperimentId::B:
      c.source = SourceKind::Mt;
      c.train = {1, 10'000};
      c.test1 = {10'001, 1};
      c.test2 = {1, 0};
      c.sequence_length = 10'007;
      break;
    case ExperimentId::C:
      c.source = SourceKind::Digits;
      c.generate_digits = false;
      break;
  }
  return c;
}

std::vector<std::size_t> ExperimentConfig::layer_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.push_back(static_cast<std::size_t>(input_len));
  sizes.insert(sizes.end(), hidden_layers.begin(), hidden_layers.end());
  sizes.push_back(1);
  return sizes;
}

void ExperimentConfig::validate() const {
  train_config.validate();
  if (input_len < 1 || input_len > kMaxInputLen) throw ConfigError("input_len out of range");
  if (std::find(hidden_layers.begin(), hidden_layers.end(), std::size_t{0}) != hidden_layers.end()) {
    throw ConfigError("hidden layer sizes must be >= 1");
  }
  if (census_length < 2 || census_length > kMaxCensusLength) throw ConfigError("census_length out of range");
  if (trials < 0) throw ConfigError("trials must be >= 0");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  if (!(sigma_k >= 0)) throw ConfigError("sigma_k must be >= 0");
  if (digit_threshold < 0 || digit_threshold > 9) throw ConfigError("digit_threshold must be a digit");
  if (train.start < 1 || test1.start < 1 || test2.start < 1) {
    throw ConfigError("window ranges are 1-indexed; start must be >= 1");
  }
  switch (experiment) {
    case ExperimentId::A:
      if (train.count == 0) throw ConfigError("experiment a needs a non-empty training set");
      if (source == SourceKind::Biased) throw ConfigError("experiment a does not support the biased source");
      if (test2.count > 0 && (subgroups < 2 || test2.count < static_cast<std::size_t>(subgroups))) {
        throw ConfigError("subgroups must be >= 2 and no larger than test2_count");
      }
      break;
    case ExperimentId::B: {
      if (train.count == 0 || test1.count == 0) throw ConfigError("experiment b needs training and test windows");
      if (source != SourceKind::Mt && source != SourceKind::Biased) {
        throw ConfigError("experiment b uses the mt or biased source");
      }
      const std::size_t need = std::max(train.start + train.count, test1.start + test1.count) +
                               static_cast<std::size_t>(input_len) - 1;
      if (need > sequence_length) {
        throw ConfigError("windows need a sequence of " + std::to_string(need) + " bits but sequence_length is " +
                          std::to_string(sequence_length));
      }
      if (source == SourceKind::Biased &&
          (bias_prefix.size() != static_cast<std::size_t>(input_len) ||
           bias_prefix.find_first_not_of("01") != std::string::npos)) {
        throw ConfigError("bias_prefix must be a 0/1 string of length input_len");
      }
      if (!(bias_probability >= 0 && bias_probability <= 1)) throw ConfigError("bias_probability must be in [0,1]");
      break;
    }
    case ExperimentId::C:
      if (n_grid.empty()) throw ConfigError("n_grid must not be empty");
      for (auto n : n_grid) {
        if (n < static_cast<std::size_t>(census_length)) throw ConfigError("n_grid entries must be >= census_length");
      }
      if (source != SourceKind::Digits) throw ConfigError("experiment c analyses digit sources");
      break;
  }
}

ExperimentConfig parse_config_text(std::string_view text, ExperimentConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  const auto& table = setters();
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    try {
      it->second(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file", path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), std::move(base));
}

std::map<std::string, std::string> config_entries(const ExperimentConfig& c) {
  std::map<std::string, std::string> m;
  m["experiment"] = experiment_name(c.experiment);
  m["source"] = source_kind_name(c.source);
  m["constant"] = constant_name(c.constant);
  m["constants"] = join(c.constants, [](Constant k) { return std::string(constant_name(k)); });
  m["seeds"] = join(c.seeds, [](std::uint32_t s) { return std::to_string(s); });
  m["train_start"] = to_str(c.train.start);
  m["train_count"] = to_str(c.train.count);
  m["test1_start"] = to_str(c.test1.start);
  m["test1_count"] = to_str(c.test1.count);
  m["test2_start"] = to_str(c.test2.start);
  m["test2_count"] = to_str(c.test2.count);
  m["sequence_length"] = to_str(c.sequence_length);
  m["input_len"] = std::to_string(c.input_len);
  m["hidden_layers"] = join(c.hidden_layers, to_str);
  m["learning_rate"] = format_real(c.train_config.learning_rate);
  m["momentum"] = format_real(c.train_config.momentum);
  m["max_epochs"] = std::to_string(c.train_config.max_epochs);
  m["min_gradient"] = format_real(c.train_config.min_gradient);
  m["init_seed"] = std::to_string(c.train_config.init_seed);
  m["input_encoding"] = encoding_name(c.train_config.input_encoding);
  m["trials"] = std::to_string(c.trials);
  m["census_length"] = std::to_string(c.census_length);
  m["sigma_k"] = format_real(c.sigma_k);
  m["sigma_levels"] = join(c.sigma_levels, format_real);
  m["subgroups"] = std::to_string(c.subgroups);
  m["subgroup_confidence"] = format_real(c.subgroup_confidence);
  m["n_grid"] = join(c.n_grid, to_str);
  m["digit_threshold"] = std::to_string(c.digit_threshold);
  m["digit_threshold_inclusive"] = c.digit_threshold_inclusive ? "true" : "false";
  m["mt_threshold"] = format_real(c.mt_threshold);
  m["accuracy_yardstick"] = format_real(c.accuracy_yardstick);
  m["mt_control"] = c.mt_control ? "true" : "false";
  m["mt_control_seed"] = std::to_string(c.mt_control_seed);
  m["bias_prefix"] = c.bias_prefix;
  m["bias_probability"] = format_real(c.bias_probability);
  m["digit_cache_dir"] = c.digit_cache_dir.string();
  m["generate_digits"] = c.generate_digits ? "true" : "false";
  m["threads"] = std::to_string(c.threads);
  return m;
}

std::string format_config_text(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [key, value] : config_entries(config)) out += key + "=" + value + "\n";
  return out;
}

}  // namespace pseudodice
