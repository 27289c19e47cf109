#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "pseudodice/error.hpp"
#include "pseudodice/harness.hpp"
#include "pseudodice/mlp.hpp"
#include "pseudodice/mtprng.hpp"

using namespace pseudodice;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

WindowDataset random_dataset(std::uint32_t seed, std::size_t count, int input_len = 6) {
  return make_windows(mt_binary_sequence(seed, count + static_cast<std::size_t>(input_len)), 1, count, input_len);
}

// Mean squared error re-derived one instance at a time through the bit-vector API.
double naive_loss(const MlpModel& model, const WindowDataset& ds) {
  double sum = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double y = forward(model, ds.input_bits(i));
    sum += (y - ds[i].label) * (y - ds[i].label);
  }
  return sum / static_cast<double>(ds.size());
}

MlpModel with_flat(MlpModel model, const std::vector<double>& flat) {
  unflatten(flat, model.params());
  return model;
}

WindowDataset flip_labels(const WindowDataset& ds) {
  std::vector<Instance> flipped(ds.instances().begin(), ds.instances().end());
  for (auto& inst : flipped) inst.label ^= 1;
  return WindowDataset(ds.input_len(), ds.start(), ds.source(), std::move(flipped));
}

}  // namespace

TEST_CASE("2-2-1 forward pass by hand") {
  MlpModel m({2, 2, 1});
  auto& h = m.layer(0);
  h.weight(0, 0) = 0.5;
  h.weight(0, 1) = -0.25;
  h.weight(1, 0) = 1.0;
  h.weight(1, 1) = 0.75;
  h.biases = {0.1, -0.2};
  auto& o = m.layer(1);
  o.weight(0, 0) = 1.5;
  o.weight(0, 1) = -2.0;
  o.biases = {0.3};

  // bits (1, 0) -> inputs (+1, -1)
  const double h0 = std::tanh(0.5 + 0.25 + 0.1);
  const double h1 = std::tanh(1.0 - 0.75 - 0.2);
  const std::vector<std::uint8_t> bits = {1, 0};
  CHECK(forward(m, bits) == doctest::Approx(sigmoid(1.5 * h0 - 2.0 * h1 + 0.3)).epsilon(1e-15));
  CHECK(forward_code(m, 0b10) == forward(m, bits));

  MlpModel z({2, 2, 1}, InputEncoding::ZeroOne);
  z.params() = m.params();
  const double z0 = std::tanh(0.5 + 0.1);
  const double z1 = std::tanh(1.0 - 0.2);
  CHECK(forward(z, bits) == doctest::Approx(sigmoid(1.5 * z0 - 2.0 * z1 + 0.3)).epsilon(1e-15));
}

TEST_CASE("input validation") {
  const MlpModel m({6, 3, 1});
  CHECK_THROWS_AS(forward(m, std::vector<std::uint8_t>{1, 0, 1}), DomainError);
  CHECK_THROWS_AS(forward(m, std::vector<std::uint8_t>{1, 0, 1, 2, 0, 0}), DomainError);
  CHECK_THROWS_AS(MlpModel({6}), DomainError);
  CHECK_THROWS_AS(MlpModel({6, 0, 1}), DomainError);
  CHECK_THROWS_AS(loss(m, WindowDataset()), DomainError);
  CHECK_THROWS_AS(loss(m, random_dataset(1, 10, 5)), DomainError);
}

TEST_CASE("exactly one half predicts 1") {
  const MlpModel zero(kDefaultLayers);
  for (std::uint32_t code = 0; code < 64; ++code) {
    REQUIRE(forward_code(zero, code) == 0.5);
    REQUIRE(predict_code(zero, code) == 1);
  }
  MlpModel up(kDefaultLayers);
  up.layer(2).biases[0] = 4;
  MlpModel down(kDefaultLayers);
  down.layer(2).biases[0] = -4;
  CHECK(predict_code(up, 17) == 1);
  CHECK(predict_code(down, 17) == 0);
  const auto ds = random_dataset(3, 500);
  double ones = 0;
  for (const auto& inst : ds.instances()) ones += inst.label;
  CHECK(accuracy(up, ds) == doctest::Approx(ones / 500));
  CHECK(accuracy(down, ds) == doctest::Approx(1 - ones / 500));
}

TEST_CASE("initialization") {
  const auto m = init_model(kDefaultLayers, 1);
  CHECK(parameter_count(m.params()) == 6 * 30 + 30 + 30 * 20 + 20 + 20 + 1);
  for (const auto& layer : m.params()) {
    const double limit = 1 / std::sqrt(static_cast<double>(layer.inputs));
    for (double w : layer.weights) REQUIRE(std::abs(w) <= limit);
    for (double b : layer.biases) REQUIRE(b == 0);
  }
  CHECK(init_model(kDefaultLayers, 1) == m);
  CHECK(!(init_model(kDefaultLayers, 2) == m));
  const double u = Mt19937(1).next_real53();
  CHECK(m.layer(0).weights[0] == doctest::Approx((2 * u - 1) / std::sqrt(6.0)));
}

TEST_CASE("flatten and unflatten") {
  const auto m = init_model({4, 3, 1}, 9);
  const auto flat = flatten(m.params());
  CHECK(flat.size() == parameter_count(m.params()));
  CHECK(with_flat(MlpModel({4, 3, 1}), flat) == m);
  double sq = 0;
  for (double v : flat) sq += v * v;
  CHECK(l2_norm(m.params()) == doctest::Approx(std::sqrt(sq)));
  Parameters p = m.params();
  CHECK_THROWS_AS(unflatten(std::vector<double>(3), p), DomainError);
}

TEST_CASE("loss matches the per-instance mean") {
  const auto m = init_model(kDefaultLayers, 4);
  const auto ds = random_dataset(44, 2000);
  CHECK(loss(m, ds) == doctest::Approx(naive_loss(m, ds)).epsilon(1e-12));
  const auto lg = loss_and_gradient(m, ds);
  CHECK(lg.loss == doctest::Approx(naive_loss(m, ds)).epsilon(1e-12));
  CHECK(flatten(lg.gradient) == flatten(gradient(m, ds)));
}

TEST_CASE("balanced labels at the zero model") {
  // 0101... gives equal label counts over an even number of windows.
  const auto ds = make_windows(alternating_sequence(206), 1, 200);
  const MlpModel zero(kDefaultLayers);
  CHECK(loss(zero, ds) == 0.25);
  CHECK(std::abs(gradient(zero, ds)[2].biases[0]) < 1e-15);
}

TEST_CASE("gradient agrees with central differences") {
  for (std::uint32_t seed : {17u, 18u}) {
    const auto ds = random_dataset(2024 + seed, 100);
    const auto model = init_model(kDefaultLayers, seed);
    const auto analytic = flatten(gradient(model, ds));
    REQUIRE(analytic.size() == 851);
    CHECK(oracle::max_relative_error(analytic, oracle::numeric_gradient(model, ds, 1e-5)) < 1e-5);
  }
}

TEST_CASE("gradient check on the 0/1 encoding") {
  const auto ds = random_dataset(7, 100);
  const auto model = init_model({6, 5, 3, 1}, 3, InputEncoding::ZeroOne);
  CHECK(oracle::max_relative_error(flatten(gradient(model, ds)), oracle::numeric_gradient(model, ds, 1e-5)) < 1e-5);
}

TEST_CASE("naive long double loss agrees with the library loss") {
  const auto ds = random_dataset(12, 300);
  const auto model = init_model(kDefaultLayers, 12);
  CHECK(static_cast<double>(oracle::naive_loss_ld(model, ds)) == doctest::Approx(loss(model, ds)).epsilon(1e-13));
}

TEST_CASE("one plain gradient step") {
  const auto ds = random_dataset(5, 300);
  const auto model = init_model(kDefaultLayers, 2);
  TrainConfig cfg;
  cfg.momentum = 0;
  cfg.learning_rate = 0.1;
  cfg.max_epochs = 1;
  const auto result = train(model, ds, cfg);
  REQUIRE(result.log.epochs.size() == 1);
  CHECK(result.log.epochs[0].loss == loss(model, ds));
  const auto g = flatten(gradient(model, ds));
  const auto before = flatten(model.params());
  const auto after = flatten(result.model.params());
  for (std::size_t i = 0; i < before.size(); ++i) REQUIRE(after[i] == doctest::Approx(before[i] - 0.1 * g[i]));
}

TEST_CASE("two momentum steps") {
  const auto ds = random_dataset(6, 300);
  const auto model = init_model(kDefaultLayers, 3);
  TrainConfig cfg;
  cfg.max_epochs = 2;
  const auto result = train(model, ds, cfg);
  REQUIRE(result.log.epochs.size() == 2);

  auto theta = flatten(model.params());
  const auto g0 = flatten(gradient(model, ds));
  std::vector<double> v(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    v[i] = -cfg.learning_rate * g0[i];
    theta[i] += v[i];
  }
  const auto g1 = flatten(gradient(with_flat(model, theta), ds));
  const double norm1 = l2_norm(gradient(with_flat(model, theta), ds));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    v[i] = cfg.momentum * v[i] - cfg.learning_rate * g1[i];
    theta[i] += v[i];
  }
  const auto after = flatten(result.model.params());
  for (std::size_t i = 0; i < theta.size(); ++i) REQUIRE(after[i] == doctest::Approx(theta[i]));
  CHECK(result.log.epochs[1].gradient_norm == doctest::Approx(norm1));
}

TEST_CASE("separable data is learned exactly") {
  const auto ds = make_windows(alternating_sequence(1006), 1, 1000);
  TrainConfig cfg;
  cfg.max_epochs = 300;
  const auto result = train(init_model(kDefaultLayers, 1), ds, cfg);
  CHECK(accuracy(result.model, ds) == 1.0);
  CHECK(result.log.epochs.back().loss < result.log.epochs.front().loss);
}

TEST_CASE("stopping on a small gradient") {
  const auto ds = make_windows(alternating_sequence(206), 1, 200);
  TrainConfig cfg;
  cfg.min_gradient = 1e-3;
  const auto result = train(MlpModel(kDefaultLayers), ds, cfg);
  // The zero model on balanced labels has a zero gradient.
  CHECK(result.log.stop_reason == StopReason::MinGradient);
  CHECK(result.log.epochs.size() == 1);
  CHECK(result.model == MlpModel(kDefaultLayers));
}

TEST_CASE("training is deterministic") {
  const auto ds = random_dataset(8, 1000);
  TrainConfig cfg;
  cfg.max_epochs = 30;
  const auto a = train(init_model(kDefaultLayers, 5), ds, cfg);
  const auto b = train(init_model(kDefaultLayers, 5), ds, cfg);
  CHECK(a.model == b.model);
  CHECK(a.log == b.log);
}

TEST_CASE("flipping every label mirrors accuracy") {
  const auto ds = random_dataset(10, 1000);
  const auto m = init_model(kDefaultLayers, 6);
  CHECK(accuracy(m, ds) + accuracy(m, flip_labels(ds)) == doctest::Approx(1.0));
  const MlpModel zero(kDefaultLayers);
  const auto balanced = make_windows(alternating_sequence(1006), 1, 1000);
  CHECK(accuracy(zero, balanced) == 0.5);
  CHECK(accuracy(zero, flip_labels(balanced)) == 0.5);
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.momentum = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.learning_rate = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.max_epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.input_encoding = InputEncoding::ZeroOne;
  CHECK_THROWS_AS(train(MlpModel(kDefaultLayers), random_dataset(1, 10), cfg), ConfigError);
}

TEST_CASE("non-finite parameters diverge") {
  MlpModel m = init_model(kDefaultLayers, 1);
  m.layer(1).weights[3] = std::nan("");
  CHECK_FALSE(m.finite());
  try {
    train(m, random_dataset(1, 100), TrainConfig{});
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.epoch() == 1);
    CHECK(exit_code(e.kind()) == 4);
  }
}

TEST_CASE("model text round trip") {
  const auto m = init_model(kDefaultLayers, 12);
  const auto text = format_model_text(m);
  CHECK(text.starts_with("#pseudodice-mlp encoding=plusminus"));
  CHECK(parse_model_text(text) == m);
  const auto z = init_model({3, 2, 1}, 1, InputEncoding::ZeroOne);
  CHECK(parse_model_text(format_model_text(z)) == z);
  CHECK_THROWS_AS(parse_model_text("#pseudodice-mlp encoding=pm\n3 6 30 1\n0.5\n"), FormatError);
}
