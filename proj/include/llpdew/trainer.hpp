#pragma once

#include <functional>
#include <span>
#include <vector>

#include "llpdew/config.hpp"
#include "llpdew/losses.hpp"
#include "llpdew/metrics.hpp"
#include "llpdew/model.hpp"
#include "llpdew/rng.hpp"
#include "llpdew/types.hpp"

namespace llpdew {

/// Cosine decay η₀·cos(7πk/16K) over the run's K steps: starts at η₀,
/// ends near 0.195·η₀, strictly decreasing in between.
double lr_schedule(long long k, long long total_steps, double lr0);

struct OptimizerState {
  std::vector<LayerParams> buffers;  // momentum, same shapes as the params
  long long step = 0;
  double learning_rate = 0.0;
};

OptimizerState init_optimizer(const ModelParams& params, double lr0);

/// Momentum SGD with decoupled-from-nothing classic L2: g' = g + wd·θ;
/// buf = momentum·buf + g'; θ -= η·buf.  Reads η from state, bumps the step
/// counter and the params_id (outstanding forward traces become stale).
void sgd_step(ModelParams& params, const ModelGrads& grads,
              OptimizerState& state, double weight_decay, double momentum);

/// TrainConfig with every "auto" field resolved against the actual data:
/// batch sizing, step budget, augmentation scales, seed.
struct RunPlan {
  TrainConfig config;  // resolved copy; no optional left unset
  int bags_per_step = 1;
  long long steps_per_epoch = 0;
  long long total_steps = 0;
  std::uint64_t seed = 1;
  double weak_sigma = 0.0;
  double strong_sigma = 0.0;
};

RunPlan resolve_plan(const TrainConfig& config, const Dataset& train_set,
                     const BagCollection& bags);

/// Everything that evolves across steps.  The three engines are independent
/// streams split from the one run seed; the augment streams are consumed one
/// sub-seed per bag per step, so per-bag noise is reproducible regardless of
/// execution order.
struct RunState {
  ModelParams params;
  OptimizerState optimizer;
  int epoch = 0;
  RngEngine bag_order_rng;
  RngEngine weak_rng;
  RngEngine strong_rng;
};

RunState init_run_state(const RunPlan& plan, const Dataset& train_set);

struct TrainOptions {
  bool deterministic = true;  // single worker, ordered reduction
  int threads = 0;            // parallel mode; 0 = hardware concurrency
};

/// Per-step aggregates fed into the epoch metrics.
struct StepStats {
  LossReport report;
  std::size_t instance_count = 0;
  std::size_t pseudo_correct = 0;
  double sum_normalized_entropy = 0.0;
  double sum_weight = 0.0;
  double sum_bag_weight = 0.0;
  double sum_instance_weight = 0.0;
};

/// One optimization step over a batch of bags: weak views → predictions →
/// pseudo-labels + confidence weights (held constant), strong views →
/// weighted instance loss, combined objective → backprop → SGD update.
/// Per-bag gradients are reduced in bag order in both execution modes, so
/// deterministic and parallel runs produce identical numbers.
StepStats train_step(RunState& state, const Dataset& train_set,
                     std::span<const Bag* const> batch, const RunPlan& plan,
                     const TrainOptions& options);

struct TrainResult {
  ModelParams params;
  std::vector<EpochMetrics> series;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Full run: every epoch visits all bags once in a freshly shuffled order,
/// chunked into bags_per_step batches (last one may be short and averages
/// over the bags present).  Emits one EpochMetrics per epoch; epochs=0
/// returns the untouched initial params and an empty series.
TrainResult train(const Dataset& train_set, const Dataset& test_set,
                  const BagCollection& bags, const TrainConfig& config,
                  const TrainOptions& options = {},
                  const EpochCallback& on_epoch = {});

}  // namespace llpdew
