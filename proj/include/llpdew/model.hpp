#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "llpdew/matrix.hpp"

namespace llpdew {

struct LayerParams {
  Matrix weights;             // fan_in x fan_out
  std::vector<double> bias;   // fan_out
};

/// Feed-forward classifier D -> hidden_sizes... -> C with ReLU hidden units
/// and a softmax head.  params_id is a process-unique stamp used to detect
/// traces taken against a different (e.g. already-updated) parameter set.
struct ModelParams {
  std::vector<LayerParams> layers;
  std::uint64_t params_id = 0;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
};

/// Per-batch cache from forward(): inputs, pre-activations, post-ReLU
/// activations, and output probabilities, for use by the backward pass.
struct ForwardTrace {
  Matrix input;
  std::vector<Matrix> pre_activations;  // one per layer
  std::vector<Matrix> activations;      // post-ReLU, hidden layers only
  Matrix probs;
  std::uint64_t params_id = 0;
};

/// Same layout as ModelParams, holds d(loss)/d(parameter) sums over a batch.
struct ModelGrads {
  std::vector<LayerParams> layers;
};

/// Scaled-uniform weight init with bound sqrt(6/(fan_in+fan_out)), zero
/// biases.  hidden_sizes may be empty (plain softmax regression).
ModelParams init_model(std::uint64_t seed, int input_dim,
                       const std::vector<int>& hidden_sizes, int class_count);

/// Hidden layers: ReLU.  Output: softmax with the row max subtracted before
/// exponentiation, so huge logits cannot overflow.  Rows of probs sum to 1.
ForwardTrace forward(const ModelParams& params, const Matrix& batch);

/// Backprop entry points.  Gradients are summed over batch rows; any 1/N
/// averaging belongs to the upstream loss gradient.  Both throw if the trace
/// was produced by different params (stale-trace guard).
ModelGrads backward_from_probs(const ModelParams& params,
                               const ForwardTrace& trace,
                               const Matrix& dloss_dprobs);
ModelGrads backward_from_logits(const ModelParams& params,
                                const ForwardTrace& trace,
                                const Matrix& dloss_dlogits);

ModelGrads zero_grads_like(const ModelParams& params);
void accumulate_grads(ModelGrads& into, const ModelGrads& from);

/// Stamps a fresh params_id.  Every in-place parameter mutation (an
/// optimizer update, a manual edit in a test) must call this so earlier
/// traces are rejected instead of silently backpropagated through.
void mark_params_updated(ModelParams& params);

/// Activations feeding the final linear layer (the input itself when there
/// are no hidden layers).  Used by the feature exporter.
Matrix penultimate_activations(const ModelParams& params, const Matrix& batch);

/// Text checkpoint: layer shapes plus row-major values rendered with 17
/// significant digits, so save -> load reproduces every double bit-exactly.
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace llpdew
