#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pseudodice/bitseq.hpp"

namespace pseudodice {

/// How input bits are fed to the first layer.
enum class InputEncoding {
  PlusMinus,  // b -> 2b - 1
  ZeroOne,    // b -> b
};

std::string_view encoding_name(InputEncoding e) noexcept;
InputEncoding parse_encoding(std::string_view name);

/// Weights (row-major, outputs x inputs) and biases of one dense layer.
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  double& weight(std::size_t row, std::size_t col) { return weights[row * inputs + col]; }
  double weight(std::size_t row, std::size_t col) const { return weights[row * inputs + col]; }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Parameter-shaped container; also used for gradients and velocities.
using Parameters = std::vector<DenseLayer>;

std::size_t parameter_count(const Parameters& p);
std::vector<double> flatten(const Parameters& p);
void unflatten(std::span<const double> flat, Parameters& p);
double l2_norm(const Parameters& p);

/// Feed-forward network: tanh hidden layers, logistic output.
class MlpModel {
 public:
  MlpModel() = default;
  /// All-zero parameters. Throws DomainError on an empty size list or a zero size.
  explicit MlpModel(std::vector<std::size_t> layer_sizes,
                    InputEncoding encoding = InputEncoding::PlusMinus);

  const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
  std::size_t input_size() const noexcept { return sizes_.front(); }
  std::size_t output_size() const noexcept { return sizes_.back(); }
  InputEncoding encoding() const noexcept { return encoding_; }

  Parameters& params() noexcept { return params_; }
  const Parameters& params() const noexcept { return params_; }
  DenseLayer& layer(std::size_t i) { return params_.at(i); }
  const DenseLayer& layer(std::size_t i) const { return params_.at(i); }

  /// True when every parameter is finite.
  bool finite() const;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;

 private:
  std::vector<std::size_t> sizes_;
  InputEncoding encoding_ = InputEncoding::PlusMinus;
  Parameters params_;
};

inline const std::vector<std::size_t> kDefaultLayers = {6, 30, 20, 1};

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] drawn from an MT19937
/// stream seeded with `seed`, layer by layer in row-major order; zero biases.
MlpModel init_model(std::vector<std::size_t> layer_sizes, std::uint32_t seed,
                    InputEncoding encoding = InputEncoding::PlusMinus);

/// Network output in (0, 1) for a vector of 0/1 input bits.
double forward(const MlpModel& model, std::span<const std::uint8_t> input);
/// Same, with the bits packed earliest-first into the low input_size bits.
double forward_code(const MlpModel& model, std::uint32_t code);

/// 1 when forward >= 0.5.
std::uint8_t predict_bit(const MlpModel& model, std::span<const std::uint8_t> input);
std::uint8_t predict_code(const MlpModel& model, std::uint32_t code);

/// Mean over instances of (forward - label)^2. Throws DomainError on an empty dataset.
double loss(const MlpModel& model, const WindowDataset& dataset);
/// Exact full-batch back-propagation of `loss`.
Parameters gradient(const MlpModel& model, const WindowDataset& dataset);

struct LossAndGradient {
  double loss = 0;
  Parameters gradient;
};
LossAndGradient loss_and_gradient(const MlpModel& model, const WindowDataset& dataset);

struct TrainConfig {
  double learning_rate = 0.05;
  double momentum = 0.95;
  int max_epochs = 100;
  double min_gradient = 1e-10;
  std::uint32_t init_seed = 1;
  InputEncoding input_encoding = InputEncoding::PlusMinus;

  /// Throws ConfigError when a field is out of range.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

enum class StopReason { MaxEpochs, MinGradient };
std::string_view stop_reason_name(StopReason r) noexcept;

struct EpochRecord {
  double loss = 0;
  double gradient_norm = 0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  StopReason stop_reason = StopReason::MaxEpochs;
  friend bool operator==(const TrainLog&, const TrainLog&) = default;
};

struct TrainResult {
  MlpModel model;
  TrainLog log;
};

/// Full-batch gradient descent with classical momentum:
///   v <- momentum * v - learning_rate * grad;  theta <- theta + v
/// Each epoch records the loss and gradient norm at the current parameters,
/// then stops if the norm is below min_gradient or updates otherwise.
/// Throws DivergenceError if the loss or gradient stops being finite.
TrainResult train(MlpModel model, const WindowDataset& dataset, const TrainConfig& config);

/// Fraction of instances whose predicted bit equals the label.
double accuracy(const MlpModel& model, const WindowDataset& dataset);

/// Flat text serialization; values are written with 17 significant digits.
std::string format_model_text(const MlpModel& model);
MlpModel parse_model_text(std::string_view text);

}  // namespace pseudodice
