#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pseudodice/mlp.hpp"

namespace pseudodice::oracle {

// Census by re-reading every window from scratch: O(n * L).
inline std::vector<std::uint64_t> naive_census(std::span<const std::uint8_t> bits, std::size_t n, int length) {
  std::vector<std::uint64_t> counts(std::size_t{1} << length, 0);
  for (std::size_t i = 0; i + static_cast<std::size_t>(length) <= n; ++i) {
    std::uint64_t value = 0;
    for (int k = 0; k < length; ++k) value = value * 2 + bits[i + static_cast<std::size_t>(k)];
    ++counts[value];
  }
  return counts;
}

// Per-prefix majority vote tallied directly from the windows.
inline double naive_ideal_rate(std::span<const std::uint8_t> bits, std::size_t n, int length) {
  const std::size_t prefixes = std::size_t{1} << (length - 1);
  std::vector<std::uint64_t> zeros(prefixes, 0), ones(prefixes, 0);
  std::size_t windows = 0;
  for (std::size_t i = 0; i + static_cast<std::size_t>(length) <= n; ++i, ++windows) {
    std::size_t prefix = 0;
    for (int k = 0; k + 1 < length; ++k) prefix = prefix * 2 + bits[i + static_cast<std::size_t>(k)];
    if (bits[i + static_cast<std::size_t>(length) - 1]) {
      ++ones[prefix];
    } else {
      ++zeros[prefix];
    }
  }
  std::uint64_t best = 0;
  for (std::size_t p = 0; p < prefixes; ++p) best += zeros[p] > ones[p] ? zeros[p] : ones[p];
  return static_cast<double>(best) / static_cast<double>(windows);
}

// Mean squared error from a per-instance forward pass in long double, so
// central differences of it are not swamped by rounding.
inline long double naive_loss_ld(const MlpModel& model, const WindowDataset& ds) {
  long double sum = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::vector<long double> x;
    for (auto b : ds.input_bits(i)) {
      x.push_back(model.encoding() == InputEncoding::PlusMinus ? (b ? 1.0L : -1.0L) : static_cast<long double>(b));
    }
    const auto& layers = model.params();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& layer = layers[l];
      std::vector<long double> y(layer.outputs);
      for (std::size_t r = 0; r < layer.outputs; ++r) {
        long double z = layer.biases[r];
        for (std::size_t c = 0; c < layer.inputs; ++c) z += static_cast<long double>(layer.weight(r, c)) * x[c];
        y[r] = l + 1 < layers.size() ? std::tanh(z) : 1.0L / (1.0L + std::exp(-z));
      }
      x = std::move(y);
    }
    const long double d = x[0] - ds[i].label;
    sum += d * d;
  }
  return sum / static_cast<long double>(ds.size());
}

// Central-difference gradient of naive_loss_ld, step h.
inline std::vector<double> numeric_gradient(const MlpModel& model, const WindowDataset& ds, double h) {
  const auto theta = flatten(model.params());
  std::vector<double> out(theta.size());
  MlpModel probe = model;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    auto shifted = theta;
    shifted[i] = theta[i] + h;
    unflatten(shifted, probe.params());
    const long double up = naive_loss_ld(probe, ds);
    shifted[i] = theta[i] - h;
    unflatten(shifted, probe.params());
    const long double down = naive_loss_ld(probe, ds);
    out[i] = static_cast<double>((up - down) / (2.0L * h));
  }
  return out;
}

// max_i |a - n| / max(|a|, |n|, floor)
inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& n, double floor = 1e-8) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = std::abs(a[i] - n[i]);
    worst = std::max(worst, diff / std::max({std::abs(a[i]), std::abs(n[i]), floor}));
  }
  return worst;
}

}  // namespace pseudodice::oracle
