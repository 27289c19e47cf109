#include "pseudodice/mlp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "pseudodice/error.hpp"
#include "pseudodice/mtprng.hpp"

namespace pseudodice {

std::string_view encoding_name(InputEncoding e) noexcept {
  return e == InputEncoding::PlusMinus ? "plusminus" : "zeroone";
}

InputEncoding parse_encoding(std::string_view name) {
  if (name == "plusminus") return InputEncoding::PlusMinus;
  if (name == "zeroone") return InputEncoding::ZeroOne;
  throw ConfigError("unknown input encoding '" + std::string(name) + "'");
}

std::string_view stop_reason_name(StopReason r) noexcept {
  return r == StopReason::MaxEpochs ? "max_epochs" : "min_gradient";
}

std::size_t parameter_count(const Parameters& p) {
  std::size_t n = 0;
  for (const auto& layer : p) n += layer.weights.size() + layer.biases.size();
  return n;
}

std::vector<double> flatten(const Parameters& p) {
  std::vector<double> out;
  out.reserve(parameter_count(p));
  for (const auto& layer : p) {
    out.insert(out.end(), layer.weights.begin(), layer.weights.end());
    out.insert(out.end(), layer.biases.begin(), layer.biases.end());
  }
  return out;
}

void unflatten(std::span<const double> flat, Parameters& p) {
  if (flat.size() != parameter_count(p)) throw DomainError("flat parameter vector has the wrong size");
  auto it = flat.begin();
  for (auto& layer : p) {
    std::copy_n(it, layer.weights.size(), layer.weights.begin());
    it += static_cast<std::ptrdiff_t>(layer.weights.size());
    std::copy_n(it, layer.biases.size(), layer.biases.begin());
    it += static_cast<std::ptrdiff_t>(layer.biases.size());
  }
}

double l2_norm(const Parameters& p) {
  double sum = 0;
  for (const auto& layer : p) {
    for (double w : layer.weights) sum += w * w;
    for (double b : layer.biases) sum += b * b;
  }
  return std::sqrt(sum);
}

MlpModel::MlpModel(std::vector<std::size_t> layer_sizes, InputEncoding encoding)
    : sizes_(std::move(layer_sizes)), encoding_(encoding) {
  if (sizes_.size() < 2) throw DomainError("a network needs at least an input and an output layer");
  if (std::find(sizes_.begin(), sizes_.end(), std::size_t{0}) != sizes_.end()) {
    throw DomainError("layer sizes must be >= 1");
  }
  if (sizes_.front() > static_cast<std::size_t>(kMaxInputLen)) {
    throw DomainError("input layer wider than " + std::to_string(kMaxInputLen) + " bits");
  }
  params_.resize(sizes_.size() - 1);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    auto& layer = params_[l];
    layer.inputs = sizes_[l];
    layer.outputs = sizes_[l + 1];
    layer.weights.assign(layer.inputs * layer.outputs, 0.0);
    layer.biases.assign(layer.outputs, 0.0);
  }
}

bool MlpModel::finite() const {
  for (const auto& layer : params_) {
    for (double w : layer.weights) {
      if (!std::isfinite(w)) return false;
    }
    for (double b : layer.biases) {
      if (!std::isfinite(b)) return false;
    }
  }
  return true;
}

MlpModel init_model(std::vector<std::size_t> layer_sizes, std::uint32_t seed, InputEncoding encoding) {
  MlpModel model(std::move(layer_sizes), encoding);
  Mt19937 rng(seed);
  for (auto& layer : model.params()) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer.inputs));
    for (double& w : layer.weights) w = (2.0 * rng.next_real53() - 1.0) * scale;
  }
  return model;
}

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double encode_bit(InputEncoding e, unsigned bit) {
  return e == InputEncoding::PlusMinus ? (bit ? 1.0 : -1.0) : static_cast<double>(bit);
}

// Per-layer activations of one forward pass; activations[0] is the encoded input.
struct Activations {
  std::vector<std::vector<double>> values;
};

void run_forward(const MlpModel& model, std::uint32_t code, Activations& act) {
  const auto& sizes = model.layer_sizes();
  act.values.resize(sizes.size());
  const std::size_t in = sizes.front();
  auto& x = act.values[0];
  x.resize(in);
  for (std::size_t k = 0; k < in; ++k) x[k] = encode_bit(model.encoding(), (code >> (in - 1 - k)) & 1u);
  const auto& params = model.params();
  for (std::size_t l = 0; l < params.size(); ++l) {
    const auto& layer = params[l];
    const auto& prev = act.values[l];
    auto& next = act.values[l + 1];
    next.resize(layer.outputs);
    const bool output_layer = l + 1 == params.size();
    for (std::size_t r = 0; r < layer.outputs; ++r) {
      double z = layer.biases[r];
      const double* row = &layer.weights[r * layer.inputs];
      for (std::size_t c = 0; c < layer.inputs; ++c) z += row[c] * prev[c];
      next[r] = output_layer ? logistic(z) : std::tanh(z);
    }
  }
}

std::uint32_t pack_bits(const MlpModel& model, std::span<const std::uint8_t> input) {
  if (input.size() != model.input_size()) {
    throw DomainError("input has " + std::to_string(input.size()) + " bits, network expects " +
                      std::to_string(model.input_size()));
  }
  std::uint32_t code = 0;
  for (std::uint8_t b : input) {
    if (b > 1) throw DomainError("input bits must be 0 or 1");
    code = (code << 1) | b;
  }
  return code;
}

void require_scalar_output(const MlpModel& model) {
  if (model.output_size() != 1) throw DomainError("bit prediction needs a single output unit");
}

// Instances grouped by input: for each distinct input, how many carry label 0 and 1.
struct InputGroup {
  std::uint32_t input;
  std::uint64_t zeros;
  std::uint64_t ones;
};

std::vector<InputGroup> group_by_input(const WindowDataset& dataset) {
  std::vector<InputGroup> groups;
  const std::size_t slots = std::size_t{1} << dataset.input_len();
  if (dataset.input_len() <= 16) {
    std::vector<std::uint64_t> tally(2 * slots, 0);
    for (const auto& inst : dataset.instances()) ++tally[2 * inst.input + inst.label];
    for (std::size_t v = 0; v < slots; ++v) {
      if (tally[2 * v] + tally[2 * v + 1] > 0) {
        groups.push_back({static_cast<std::uint32_t>(v), tally[2 * v], tally[2 * v + 1]});
      }
    }
  } else {
    std::vector<Instance> sorted(dataset.instances().begin(), dataset.instances().end());
    std::sort(sorted.begin(), sorted.end(),
              [](const Instance& a, const Instance& b) { return a.input < b.input; });
    for (const auto& inst : sorted) {
      if (groups.empty() || groups.back().input != inst.input) groups.push_back({inst.input, 0, 0});
      (inst.label ? groups.back().ones : groups.back().zeros) += 1;
    }
  }
  return groups;
}

Parameters zeros_like(const Parameters& p) {
  Parameters out = p;
  for (auto& layer : out) {
    std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
    std::fill(layer.biases.begin(), layer.biases.end(), 0.0);
  }
  return out;
}

LossAndGradient grouped_loss_and_gradient(const MlpModel& model, std::span<const InputGroup> groups,
                                          std::uint64_t total) {
  LossAndGradient out;
  out.gradient = zeros_like(model.params());
  const auto& params = model.params();
  const double inv_n = 1.0 / static_cast<double>(total);
  Activations act;
  std::vector<std::vector<double>> delta(params.size());
  for (const auto& g : groups) {
    run_forward(model, g.input, act);
    const double o = act.values.back()[0];
    const double c0 = static_cast<double>(g.zeros);
    const double c1 = static_cast<double>(g.ones);
    out.loss += (c0 * o * o + c1 * (o - 1.0) * (o - 1.0)) * inv_n;

    // dL/do summed over the group, then through the logistic.
    const double dl_do = 2.0 * inv_n * ((c0 + c1) * o - c1);
    const std::size_t last = params.size() - 1;
    delta[last].assign(1, dl_do * o * (1.0 - o));
    for (std::size_t l = last; l-- > 0;) {
      const auto& above = params[l + 1];
      const auto& h = act.values[l + 1];
      delta[l].assign(params[l].outputs, 0.0);
      for (std::size_t r = 0; r < above.outputs; ++r) {
        const double d = delta[l + 1][r];
        const double* row = &above.weights[r * above.inputs];
        for (std::size_t c = 0; c < above.inputs; ++c) delta[l][c] += row[c] * d;
      }
      for (std::size_t c = 0; c < params[l].outputs; ++c) delta[l][c] *= 1.0 - h[c] * h[c];
    }
    for (std::size_t l = 0; l < params.size(); ++l) {
      auto& grad = out.gradient[l];
      const auto& in = act.values[l];
      for (std::size_t r = 0; r < grad.outputs; ++r) {
        const double d = delta[l][r];
        grad.biases[r] += d;
        double* row = &grad.weights[r * grad.inputs];
        for (std::size_t c = 0; c < grad.inputs; ++c) row[c] += d * in[c];
      }
    }
  }
  return out;
}

void require_compatible(const MlpModel& model, const WindowDataset& dataset) {
  require_scalar_output(model);
  if (dataset.empty()) throw DomainError("dataset is empty");
  if (static_cast<std::size_t>(dataset.input_len()) != model.input_size()) {
    throw DomainError("dataset input length " + std::to_string(dataset.input_len()) +
                      " does not match network input size " + std::to_string(model.input_size()));
  }
}

}  // namespace

double forward_code(const MlpModel& model, std::uint32_t code) {
  Activations act;
  run_forward(model, code, act);
  return act.values.back()[0];
}

double forward(const MlpModel& model, std::span<const std::uint8_t> input) {
  return forward_code(model, pack_bits(model, input));
}

std::uint8_t predict_code(const MlpModel& model, std::uint32_t code) {
  require_scalar_output(model);
  return forward_code(model, code) >= 0.5 ? 1 : 0;
}

std::uint8_t predict_bit(const MlpModel& model, std::span<const std::uint8_t> input) {
  return predict_code(model, pack_bits(model, input));
}

LossAndGradient loss_and_gradient(const MlpModel& model, const WindowDataset& dataset) {
  require_compatible(model, dataset);
  const auto groups = group_by_input(dataset);
  return grouped_loss_and_gradient(model, groups, dataset.size());
}

double loss(const MlpModel& model, const WindowDataset& dataset) {
  return loss_and_gradient(model, dataset).loss;
}

Parameters gradient(const MlpModel& model, const WindowDataset& dataset) {
  return loss_and_gradient(model, dataset).gradient;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
  if (!(momentum >= 0 && momentum < 1)) throw ConfigError("momentum must be in [0, 1)");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (!(min_gradient >= 0)) throw ConfigError("min_gradient must be >= 0");
}

TrainResult train(MlpModel model, const WindowDataset& dataset, const TrainConfig& config) {
  config.validate();
  require_compatible(model, dataset);
  if (config.input_encoding != model.encoding()) {
    throw ConfigError("training config encoding differs from the model's input encoding");
  }
  const auto groups = group_by_input(dataset);
  TrainResult result;
  Parameters velocity = zeros_like(model.params());
  result.log.stop_reason = StopReason::MaxEpochs;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    LossAndGradient lg = grouped_loss_and_gradient(model, groups, dataset.size());
    const double norm = l2_norm(lg.gradient);
    if (!std::isfinite(lg.loss) || !std::isfinite(norm)) {
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch), epoch);
    }
    result.log.epochs.push_back({lg.loss, norm});
    if (norm < config.min_gradient) {
      result.log.stop_reason = StopReason::MinGradient;
      break;
    }
    auto& params = model.params();
    for (std::size_t l = 0; l < params.size(); ++l) {
      auto step = [&](std::vector<double>& theta, std::vector<double>& v, const std::vector<double>& g) {
        for (std::size_t i = 0; i < theta.size(); ++i) {
          v[i] = config.momentum * v[i] - config.learning_rate * g[i];
          theta[i] += v[i];
        }
      };
      step(params[l].weights, velocity[l].weights, lg.gradient[l].weights);
      step(params[l].biases, velocity[l].biases, lg.gradient[l].biases);
    }
  }
  if (!model.finite()) {
    throw DivergenceError("non-finite parameters after training",
                          static_cast<int>(result.log.epochs.size()));
  }
  result.model = std::move(model);
  return result;
}

double accuracy(const MlpModel& model, const WindowDataset& dataset) {
  require_compatible(model, dataset);
  std::uint64_t correct = 0;
  for (const auto& g : group_by_input(dataset)) {
    correct += predict_code(model, g.input) ? g.ones : g.zeros;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

// --- serialization ------------------------------------------------------------

namespace {
constexpr std::string_view kModelMagic = "#pseudodice-mlp";
}

std::string format_model_text(const MlpModel& model) {
  std::string out;
  out += kModelMagic;
  out += " encoding=";
  out += encoding_name(model.encoding());
  out += '\n';
  out += std::to_string(model.layer_sizes().size());
  for (auto s : model.layer_sizes()) out += ' ' + std::to_string(s);
  out += '\n';
  char buf[40];
  for (double v : flatten(model.params())) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out += buf;
  }
  return out;
}

MlpModel parse_model_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string magic;
  std::string enc_field;
  in >> magic >> enc_field;
  if (magic != kModelMagic || !enc_field.starts_with("encoding=")) {
    throw FormatError("missing '#pseudodice-mlp encoding=...' header", 0);
  }
  InputEncoding encoding;
  try {
    encoding = parse_encoding(enc_field.substr(9));
  } catch (const ConfigError& e) {
    throw FormatError(e.what(), 0);
  }
  std::size_t layers = 0;
  if (!(in >> layers) || layers < 2) throw FormatError("bad layer count", static_cast<std::size_t>(in.tellg()));
  std::vector<std::size_t> sizes(layers);
  for (auto& s : sizes) {
    if (!(in >> s)) throw FormatError("bad layer size", 0);
  }
  MlpModel model(sizes, encoding);
  std::vector<double> flat(parameter_count(model.params()));
  std::string token;
  for (auto& v : flat) {
    const auto offset = static_cast<std::size_t>(std::max<std::streamoff>(in.tellg(), 0));
    if (!(in >> token)) throw FormatError("truncated parameter list", offset);
    const char* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
      throw FormatError("bad parameter value '" + token + "'", offset);
    }
  }
  if (in >> token) throw FormatError("trailing content after parameters", 0);
  unflatten(flat, model.params());
  return model;
}

}  // namespace pseudodice
