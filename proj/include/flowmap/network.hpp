#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "flowmap/errors.hpp"
#include "flowmap/rng.hpp"
#include "flowmap/vec.hpp"

namespace flowmap {

/// Row-major dense matrix, sized for widths in the tens-to-hundreds range.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  [[nodiscard]] double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  [[nodiscard]] double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Rectangular fully connected layout: all hidden layers share one width,
/// and the output dimension equals the input dimension (the network maps a
/// state to a state).
struct Architecture {
  std::size_t input_dim = 0;
  std::size_t hidden_layers = 0;
  std::size_t hidden_width = 0;
  std::size_t output_dim = 0;

  Architecture() = default;
  Architecture(std::size_t in_dim, std::size_t layers, std::size_t width)
      : input_dim(in_dim), hidden_layers(layers), hidden_width(width), output_dim(in_dim) {
    validate();
  }

  void validate() const {
    if (input_dim < 1 || hidden_layers < 1 || hidden_width < 1) {
      throw std::invalid_argument("Architecture: dims and layer counts must be positive");
    }
    if (output_dim != input_dim) {
      throw std::invalid_argument("Architecture: output_dim must equal input_dim");
    }
  }

  /// Number of affine maps (weight matrices).
  [[nodiscard]] std::size_t affine_count() const { return hidden_layers + 1; }

  /// Neuron counts per layer: input, hidden..., output.
  [[nodiscard]] std::vector<std::size_t> layer_dims() const {
    std::vector<std::size_t> dims(hidden_layers + 2, hidden_width);
    dims.front() = input_dim;
    dims.back() = output_dim;
    return dims;
  }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Weights and biases of the core network N(.; theta). Treated as an
/// immutable value between SGD updates.
struct NetParams {
  Architecture arch;
  std::vector<Matrix> weights;
  std::vector<Vec> biases;

  friend bool operator==(const NetParams&, const NetParams&) = default;
};

/// Per-layer pre-activations and activations retained by the forward pass;
/// activations[0] is the input, activations.back() the network output.
struct ForwardCache {
  std::vector<Vec> pre;          // z_l, one per affine map
  std::vector<Vec> activations;  // a_0 .. a_L

  [[nodiscard]] const Vec& output() const { return activations.back(); }
};

/// Gradient of the squared loss w.r.t. every parameter, plus the gradient
/// w.r.t. the ResNet input (skip connection included).
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vec> biases;
  Vec input;
};

namespace detail {

inline void validate_params(const NetParams& params) {
  params.arch.validate();
  const auto dims = params.arch.layer_dims();
  const std::size_t affines = params.arch.affine_count();
  if (params.weights.size() != affines || params.biases.size() != affines) {
    throw std::invalid_argument("NetParams: wrong number of layers");
  }
  for (std::size_t l = 0; l < affines; ++l) {
    if (params.weights[l].rows != dims[l + 1] || params.weights[l].cols != dims[l] ||
        params.weights[l].data.size() != dims[l + 1] * dims[l] ||
        params.biases[l].size() != dims[l + 1]) {
      throw std::invalid_argument("NetParams: shape chain broken at layer " + std::to_string(l));
    }
  }
}

inline void validate_cache(const NetParams& params, const ForwardCache& cache) {
  const std::size_t affines = params.arch.affine_count();
  if (cache.pre.size() != affines || cache.activations.size() != affines + 1) {
    throw std::invalid_argument("ForwardCache: layer count mismatch");
  }
  const auto dims = params.arch.layer_dims();
  for (std::size_t l = 0; l <= affines; ++l) {
    if (cache.activations[l].size() != dims[l]) {
      throw std::invalid_argument("ForwardCache: activation shape mismatch");
    }
  }
}

}  // namespace detail

/// Weights ~ N(0, 1/sqrt(fan_in)), biases ~ N(0, 0.01); deterministic in
/// the seed. The scaling keeps pre-activation magnitudes O(1) at the depths
/// studied here.
[[nodiscard]] inline NetParams init_params(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  NetParams params;
  params.arch = arch;
  const auto dims = arch.layer_dims();

  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t fan_in = dims[l];
    const std::size_t fan_out = dims[l + 1];
    const double weight_std = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Matrix w(fan_out, fan_in);
    for (double& v : w.data) v = rng.normal(0.0, weight_std);
    Vec b(fan_out);
    for (double& v : b) v = rng.normal(0.0, 0.01);
    params.weights.push_back(std::move(w));
    params.biases.push_back(std::move(b));
  }
  return params;
}

/// Affine maps with ReLU between hidden layers and identity at the output;
/// fills `cache` in place (no allocation when shapes already match).
inline void forward_into(const NetParams& params, std::span<const double> x, ForwardCache& cache) {
  detail::validate_params(params);
  if (x.size() != params.arch.input_dim) {
    throw std::invalid_argument("forward: input dimension mismatch");
  }

  const std::size_t affines = params.arch.affine_count();
  cache.pre.resize(affines);
  cache.activations.resize(affines + 1);
  cache.activations[0].assign(x.begin(), x.end());

  for (std::size_t l = 0; l < affines; ++l) {
    const Matrix& w = params.weights[l];
    const Vec& b = params.biases[l];
    const Vec& a = cache.activations[l];
    Vec& z = cache.pre[l];
    z.resize(w.rows);
    for (std::size_t r = 0; r < w.rows; ++r) {
      double acc = b[r];
      const double* row = &w.data[r * w.cols];
      for (std::size_t c = 0; c < w.cols; ++c) acc += row[c] * a[c];
      z[r] = acc;
    }
    Vec& out = cache.activations[l + 1];
    out.resize(w.rows);
    if (l + 1 < affines) {
      for (std::size_t r = 0; r < w.rows; ++r) out[r] = z[r] > 0.0 ? z[r] : 0.0;
    } else {
      out = z;
    }
  }
}

[[nodiscard]] inline std::pair<Vec, ForwardCache> forward(const NetParams& params,
                                                          std::span<const double> x) {
  ForwardCache cache;
  forward_into(params, x, cache);
  return {cache.output(), std::move(cache)};
}

/// The ResNet map p -> p + N(p; theta).
[[nodiscard]] inline Vec resnet_forward(const NetParams& params, std::span<const double> x) {
  ForwardCache cache;
  forward_into(params, x, cache);
  Vec out = cache.output();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += x[i];
  return out;
}

/// Backpropagation through the cached forward pass. `output_residual` is the
/// loss gradient at the ResNet output, i.e. 2 * (p_out - y2) for the squared
/// loss. The ReLU subgradient at exactly zero is taken as zero.
inline void backward_into(const NetParams& params, const ForwardCache& cache,
                          std::span<const double> output_residual, Gradients& grads) {
  detail::validate_params(params);
  detail::validate_cache(params, cache);
  if (output_residual.size() != params.arch.output_dim) {
    throw std::invalid_argument("backward: residual dimension mismatch");
  }

  const std::size_t affines = params.arch.affine_count();
  grads.weights.resize(affines);
  grads.biases.resize(affines);

  Vec delta(output_residual.begin(), output_residual.end());
  Vec delta_prev;
  for (std::size_t l = affines; l-- > 0;) {
    const Matrix& w = params.weights[l];
    const Vec& a = cache.activations[l];

    Matrix& dw = grads.weights[l];
    if (dw.rows != w.rows || dw.cols != w.cols) dw = Matrix(w.rows, w.cols);
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double d = delta[r];
      double* row = &dw.data[r * w.cols];
      for (std::size_t c = 0; c < w.cols; ++c) row[c] = d * a[c];
    }
    grads.biases[l] = delta;

    // Propagate delta to the previous layer; gated by ReLU' except at the
    // input, where the raw W^T delta is the core network's input gradient.
    delta_prev.assign(w.cols, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double d = delta[r];
      const double* row = &w.data[r * w.cols];
      for (std::size_t c = 0; c < w.cols; ++c) delta_prev[c] += row[c] * d;
    }
    if (l > 0) {
      const Vec& z = cache.pre[l - 1];
      for (std::size_t c = 0; c < delta_prev.size(); ++c) {
        if (!(z[c] > 0.0)) delta_prev[c] = 0.0;
      }
    }
    delta.swap(delta_prev);
  }

  // d(x + N(x))/dx includes the identity: the skip connection passes the
  // output residual through untouched.
  grads.input = delta;
  for (std::size_t i = 0; i < grads.input.size(); ++i) grads.input[i] += output_residual[i];
}

[[nodiscard]] inline Gradients backward(const NetParams& params, const ForwardCache& cache,
                                        std::span<const double> output_residual) {
  Gradients grads;
  backward_into(params, cache, output_residual, grads);
  return grads;
}

/// One plain SGD step: params - learning_rate * grads, elementwise.
inline void sgd_update_in_place(NetParams& params, const Gradients& grads, double learning_rate) {
  if (learning_rate < 0.0) throw std::invalid_argument("sgd_update: negative learning rate");
  if (grads.weights.size() != params.weights.size() ||
      grads.biases.size() != params.biases.size()) {
    throw std::invalid_argument("sgd_update: gradient/parameter shape mismatch");
  }
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    if (grads.weights[l].rows != params.weights[l].rows ||
        grads.weights[l].cols != params.weights[l].cols ||
        grads.biases[l].size() != params.biases[l].size()) {
      throw std::invalid_argument("sgd_update: gradient/parameter shape mismatch");
    }
    if (!all_finite(grads.weights[l].data) || !all_finite(grads.biases[l])) {
      throw NonFiniteStateError("sgd_update: non-finite gradient at layer " + std::to_string(l), l);
    }
  }
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    auto& wd = params.weights[l].data;
    const auto& gd = grads.weights[l].data;
    for (std::size_t i = 0; i < wd.size(); ++i) wd[i] -= learning_rate * gd[i];
    auto& bd = params.biases[l];
    const auto& gb = grads.biases[l];
    for (std::size_t i = 0; i < bd.size(); ++i) bd[i] -= learning_rate * gb[i];
  }
}

[[nodiscard]] inline NetParams sgd_update(const NetParams& params, const Gradients& grads,
                                          double learning_rate) {
  NetParams updated = params;
  sgd_update_in_place(updated, grads, learning_rate);
  return updated;
}

/// Zero the final affine map; the ResNet then reduces to the identity.
inline void zero_final_layer(NetParams& params) {
  detail::validate_params(params);
  auto& w = params.weights.back();
  std::fill(w.data.begin(), w.data.end(), 0.0);
  auto& b = params.biases.back();
  std::fill(b.begin(), b.end(), 0.0);
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

inline constexpr int kNetParamsFormatVersion = 1;

[[nodiscard]] inline nlohmann::json net_params_to_json(const NetParams& params) {
  detail::validate_params(params);
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    layers.push_back({{"rows", params.weights[l].rows},
                      {"cols", params.weights[l].cols},
                      {"weights", params.weights[l].data},
                      {"bias", params.biases[l]}});
  }
  return nlohmann::json{{"format_version", kNetParamsFormatVersion},
                        {"architecture",
                         {{"input_dim", params.arch.input_dim},
                          {"hidden_layers", params.arch.hidden_layers},
                          {"hidden_width", params.arch.hidden_width},
                          {"output_dim", params.arch.output_dim}}},
                        {"layers", layers}};
}

[[nodiscard]] inline NetParams net_params_from_json(const nlohmann::json& j) {
  if (j.at("format_version").get<int>() != kNetParamsFormatVersion) {
    throw std::invalid_argument("net params: unsupported format version");
  }
  const auto& arch_j = j.at("architecture");
  NetParams params;
  params.arch.input_dim = arch_j.at("input_dim").get<std::size_t>();
  params.arch.hidden_layers = arch_j.at("hidden_layers").get<std::size_t>();
  params.arch.hidden_width = arch_j.at("hidden_width").get<std::size_t>();
  params.arch.output_dim = arch_j.at("output_dim").get<std::size_t>();
  for (const auto& layer : j.at("layers")) {
    Matrix w(layer.at("rows").get<std::size_t>(), layer.at("cols").get<std::size_t>());
    w.data = layer.at("weights").get<std::vector<double>>();
    params.weights.push_back(std::move(w));
    params.biases.push_back(layer.at("bias").get<Vec>());
  }
  detail::validate_params(params);
  return params;
}

}  // namespace flowmap
