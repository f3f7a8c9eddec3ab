#include "llpdew/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "llpdew/rng.hpp"

namespace llpdew {
namespace {

std::atomic<std::uint64_t> next_params_id{1};

std::uint64_t fresh_params_id() {
  return next_params_id.fetch_add(1, std::memory_order_relaxed);
}

void check_layer_chain(const std::vector<LayerParams>& layers) {
  if (layers.empty()) throw std::invalid_argument("model has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerParams& layer = layers[l];
    if (layer.weights.rows() == 0 || layer.weights.cols() == 0) {
      throw std::invalid_argument("layer has an empty weight matrix");
    }
    if (layer.bias.size() != layer.weights.cols()) {
      throw std::invalid_argument("bias length does not match layer width");
    }
    if (l > 0 && layers[l - 1].weights.cols() != layer.weights.rows()) {
      throw std::invalid_argument("layer shape chain is inconsistent");
    }
  }
}

// z = x * W + b for one layer.
Matrix affine(const Matrix& x, const LayerParams& layer) {
  const std::size_t n = x.rows();
  const std::size_t fan_in = layer.weights.rows();
  const std::size_t fan_out = layer.weights.cols();
  if (x.cols() != fan_in) {
    throw std::invalid_argument("batch width does not match layer fan-in");
  }
  Matrix z(n, fan_out);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < fan_out; ++c) z(r, c) = layer.bias[c];
    for (std::size_t k = 0; k < fan_in; ++k) {
      const double xv = x(r, k);
      if (xv == 0.0) continue;
      for (std::size_t c = 0; c < fan_out; ++c) {
        z(r, c) += xv * layer.weights(k, c);
      }
    }
  }
  return z;
}

void require_fresh_trace(const ModelParams& params, const ForwardTrace& trace) {
  if (trace.params_id != params.params_id) {
    throw std::logic_error(
        "forward trace is stale: it was produced by different model params");
  }
}

// Shared tail of both backward entry points: given dZ for the final layer,
// walk the hidden layers backwards.
ModelGrads backprop_from_final_dz(const ModelParams& params,
                                  const ForwardTrace& trace, Matrix dz) {
  const std::size_t layer_count = params.layers.size();
  ModelGrads grads = zero_grads_like(params);
  for (std::size_t li = layer_count; li-- > 0;) {
    const LayerParams& layer = params.layers[li];
    const Matrix& layer_input =
        li == 0 ? trace.input : trace.activations[li - 1];
    LayerParams& g = grads.layers[li];
    const std::size_t n = dz.rows();
    const std::size_t fan_in = layer.weights.rows();
    const std::size_t fan_out = layer.weights.cols();
    // dW = input^T dz, db = column sums of dz.
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < fan_out; ++c) {
        const double d = dz(r, c);
        if (d == 0.0) continue;
        g.bias[c] += d;
        for (std::size_t k = 0; k < fan_in; ++k) {
          g.weights(k, c) += layer_input(r, k) * d;
        }
      }
    }
    if (li == 0) break;
    // dA = dz W^T, masked by ReLU'(pre-activation of the previous layer).
    Matrix da(n, fan_in);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < fan_out; ++c) {
        const double d = dz(r, c);
        if (d == 0.0) continue;
        for (std::size_t k = 0; k < fan_in; ++k) {
          da(r, k) += d * layer.weights(k, c);
        }
      }
    }
    const Matrix& prev_z = trace.pre_activations[li - 1];
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t k = 0; k < fan_in; ++k) {
        if (prev_z(r, k) <= 0.0) da(r, k) = 0.0;
      }
    }
    dz = std::move(da);
  }
  return grads;
}

}  // namespace

std::size_t ModelParams::input_dim() const {
  return layers.empty() ? 0 : layers.front().weights.rows();
}

std::size_t ModelParams::output_dim() const {
  return layers.empty() ? 0 : layers.back().weights.cols();
}

ModelParams init_model(std::uint64_t seed, int input_dim,
                       const std::vector<int>& hidden_sizes, int class_count) {
  if (input_dim <= 0) throw std::invalid_argument("input_dim must be positive");
  if (class_count < 2) {
    throw std::invalid_argument("class_count must be at least 2");
  }
  for (int h : hidden_sizes) {
    if (h <= 0) throw std::invalid_argument("hidden sizes must be positive");
  }

  std::vector<std::size_t> widths;
  widths.push_back(static_cast<std::size_t>(input_dim));
  for (int h : hidden_sizes) widths.push_back(static_cast<std::size_t>(h));
  widths.push_back(static_cast<std::size_t>(class_count));

  RngEngine rng = make_stream(seed, RngStream::model_init);
  ModelParams params;
  params.params_id = fresh_params_id();
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t fan_in = widths[l];
    const std::size_t fan_out = widths[l + 1];
    const double bound =
        std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> unif(-bound, bound);
    LayerParams layer;
    layer.weights = Matrix(fan_in, fan_out);
    for (double& w : layer.weights.flat()) w = unif(rng);
    layer.bias.assign(fan_out, 0.0);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

ForwardTrace forward(const ModelParams& params, const Matrix& batch) {
  check_layer_chain(params.layers);
  if (batch.cols() != params.input_dim()) {
    throw std::invalid_argument("batch width does not match model input dim");
  }
  ForwardTrace trace;
  trace.params_id = params.params_id;
  trace.input = batch;

  const std::size_t layer_count = params.layers.size();
  Matrix current = batch;
  for (std::size_t l = 0; l < layer_count; ++l) {
    Matrix z = affine(current, params.layers[l]);
    trace.pre_activations.push_back(z);
    if (l + 1 < layer_count) {
      for (double& v : z.flat()) v = std::max(v, 0.0);
      trace.activations.push_back(z);
      current = std::move(z);
    } else {
      // Stable softmax: shift each row by its max before exponentiating.
      for (std::size_t r = 0; r < z.rows(); ++r) {
        double row_max = z(r, 0);
        for (std::size_t c = 1; c < z.cols(); ++c) {
          row_max = std::max(row_max, z(r, c));
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < z.cols(); ++c) {
          z(r, c) = std::exp(z(r, c) - row_max);
          sum += z(r, c);
        }
        for (std::size_t c = 0; c < z.cols(); ++c) z(r, c) /= sum;
      }
      trace.probs = std::move(z);
    }
  }
  return trace;
}

ModelGrads backward_from_logits(const ModelParams& params,
                                const ForwardTrace& trace,
                                const Matrix& dloss_dlogits) {
  require_fresh_trace(params, trace);
  if (!dloss_dlogits.same_shape(trace.probs)) {
    throw std::invalid_argument("upstream gradient shape mismatch");
  }
  return backprop_from_final_dz(params, trace, dloss_dlogits);
}

ModelGrads backward_from_probs(const ModelParams& params,
                               const ForwardTrace& trace,
                               const Matrix& dloss_dprobs) {
  require_fresh_trace(params, trace);
  if (!dloss_dprobs.same_shape(trace.probs)) {
    throw std::invalid_argument("upstream gradient shape mismatch");
  }
  // Softmax Jacobian rowwise: dz_c = p_c (g_c - sum_k g_k p_k).
  const Matrix& p = trace.probs;
  Matrix dz(p.rows(), p.cols());
  for (std::size_t r = 0; r < p.rows(); ++r) {
    double dot = 0.0;
    for (std::size_t c = 0; c < p.cols(); ++c) {
      dot += dloss_dprobs(r, c) * p(r, c);
    }
    for (std::size_t c = 0; c < p.cols(); ++c) {
      dz(r, c) = p(r, c) * (dloss_dprobs(r, c) - dot);
    }
  }
  return backprop_from_final_dz(params, trace, dz);
}

ModelGrads zero_grads_like(const ModelParams& params) {
  ModelGrads grads;
  grads.layers.reserve(params.layers.size());
  for (const LayerParams& layer : params.layers) {
    LayerParams g;
    g.weights = Matrix(layer.weights.rows(), layer.weights.cols());
    g.bias.assign(layer.bias.size(), 0.0);
    grads.layers.push_back(std::move(g));
  }
  return grads;
}

void mark_params_updated(ModelParams& params) {
  params.params_id = fresh_params_id();
}

void accumulate_grads(ModelGrads& into, const ModelGrads& from) {
  if (into.layers.size() != from.layers.size()) {
    throw std::invalid_argument("grad layer count mismatch");
  }
  for (std::size_t l = 0; l < into.layers.size(); ++l) {
    LayerParams& a = into.layers[l];
    const LayerParams& b = from.layers[l];
    if (!a.weights.same_shape(b.weights) || a.bias.size() != b.bias.size()) {
      throw std::invalid_argument("grad shape mismatch");
    }
    auto aw = a.weights.flat();
    const auto bw = b.weights.flat();
    for (std::size_t i = 0; i < aw.size(); ++i) aw[i] += bw[i];
    for (std::size_t i = 0; i < a.bias.size(); ++i) a.bias[i] += b.bias[i];
  }
}

Matrix penultimate_activations(const ModelParams& params, const Matrix& batch) {
  check_layer_chain(params.layers);
  if (params.layers.size() == 1) return batch;
  ForwardTrace trace = forward(params, batch);
  return trace.activations.back();
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
  check_layer_chain(params.layers);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "#llp-model v1 layers=" << params.layers.size() << "\n";
  char buf[64];
  for (const LayerParams& layer : params.layers) {
    out << layer.weights.rows() << " " << layer.weights.cols() << "\n";
    for (std::size_t r = 0; r < layer.weights.rows(); ++r) {
      for (std::size_t c = 0; c < layer.weights.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", layer.weights(r, c));
        out << (c ? " " : "") << buf;
      }
      out << "\n";
    }
    for (std::size_t c = 0; c < layer.bias.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", layer.bias[c]);
      out << (c ? " " : "") << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error(path + ":1: missing header");
  }
  std::size_t layer_count = 0;
  {
    std::istringstream hs(header);
    std::string magic, version, layers_field;
    hs >> magic >> version >> layers_field;
    if (magic != "#llp-model" || version != "v1" ||
        layers_field.rfind("layers=", 0) != 0) {
      throw std::runtime_error(path + ":1: bad header '" + header + "'");
    }
    try {
      layer_count = std::stoul(layers_field.substr(7));
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":1: bad layer count in header");
    }
  }
  if (layer_count == 0) {
    throw std::runtime_error(path + ": checkpoint declares zero layers");
  }

  ModelParams params;
  params.params_id = fresh_params_id();
  for (std::size_t l = 0; l < layer_count; ++l) {
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
    if (!(in >> fan_in >> fan_out) || fan_in == 0 || fan_out == 0) {
      throw std::runtime_error(path + ": bad shape line for layer " +
                               std::to_string(l));
    }
    LayerParams layer;
    layer.weights = Matrix(fan_in, fan_out);
    for (double& w : layer.weights.flat()) {
      if (!(in >> w)) {
        throw std::runtime_error(path + ": truncated weights in layer " +
                                 std::to_string(l));
      }
    }
    layer.bias.resize(fan_out);
    for (double& b : layer.bias) {
      if (!(in >> b)) {
        throw std::runtime_error(path + ": truncated bias in layer " +
                                 std::to_string(l));
      }
    }
    params.layers.push_back(std::move(layer));
  }
  double extra = 0.0;
  if (in >> extra) {
    throw std::runtime_error(path + ": trailing values after last layer");
  }
  check_layer_chain(params.layers);
  return params;
}

}  // namespace llpdew
