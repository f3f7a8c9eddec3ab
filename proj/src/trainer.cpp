#include "llpdew/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "llpdew/augment.hpp"
#include "llpdew/dew.hpp"

namespace llpdew {
namespace {

constexpr int kTargetBatchInstances = 1024;

// Per-bag share of one step: gradients plus the scalar diagnostics.
struct BagWork {
  ModelGrads grads;
  double bag_loss = 0.0;
  double instance_loss = 0.0;
  double per_bag_ce = 0.0;
  std::size_t pseudo_correct = 0;
  double sum_normalized_entropy = 0.0;
  double sum_weight = 0.0;
  double sum_bag_weight = 0.0;
  double sum_instance_weight = 0.0;
};

Matrix gather_rows(const Matrix& features,
                   std::span<const std::size_t> indices) {
  Matrix out(indices.size(), features.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out.set_row(r, features.row(indices[r]));
  }
  return out;
}

// Forward/backward for a single bag against read-only params.  The two
// sub-seeds replay this bag's weak and strong noise no matter which worker
// runs it.
BagWork process_bag(const ModelParams& params, const Dataset& train_set,
                    const Bag& bag, const RunPlan& plan,
                    std::uint64_t weak_seed, std::uint64_t strong_seed) {
  const std::size_t m = bag.size();
  const AugmentPolicy weak = weak_policy(plan.weak_sigma);
  const AugmentPolicy strong =
      strong_policy(plan.strong_sigma, plan.config.strong_dropout_rate);

  RngEngine weak_rng(weak_seed);
  RngEngine strong_rng(strong_seed);
  Matrix weak_view =
      apply_rows(weak, train_set.features, bag.instance_indices, weak_rng);
  Matrix strong_view =
      apply_rows(strong, train_set.features, bag.instance_indices, strong_rng);

  ForwardTrace weak_trace = forward(params, weak_view);
  ForwardTrace strong_trace = forward(params, strong_view);

  std::vector<PseudoLabel> pseudo = harden_all(weak_trace.probs);
  DewSettings dew{plan.config.beta_b, plan.config.beta_i,
                  plan.config.ablation_use_bag_weight,
                  plan.config.ablation_use_instance_weight};
  std::vector<DewWeights> weights =
      combined_weights(bag, weak_trace.probs, dew);

  const Bag* bag_ptr = &bag;
  TotalLossResult loss =
      total_loss_fixed({&bag_ptr, 1}, weak_trace.probs, strong_trace.probs,
                       pseudo, weights, plan.config.lambda);

  BagWork work;
  work.grads = backward_from_probs(params, weak_trace, loss.dweak);
  if (plan.config.lambda > 0) {
    accumulate_grads(work.grads,
                     backward_from_probs(params, strong_trace, loss.dstrong));
  }
  work.bag_loss = loss.report.bag_loss;
  work.instance_loss = loss.report.instance_loss;
  work.per_bag_ce = loss.report.per_bag.front();

  const double log_c = std::log(static_cast<double>(train_set.class_count));
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t idx = bag.instance_indices[j];
    if (pseudo[j].class_index == train_set.labels[idx]) ++work.pseudo_correct;
    work.sum_normalized_entropy +=
        entropy(weak_trace.probs.row(j)) / log_c;
    work.sum_weight += weights[j].combined;
    work.sum_bag_weight += weights[j].bag_weight;
    work.sum_instance_weight += weights[j].instance_weight;
  }
  return work;
}

void scale_grads(ModelGrads& grads, double factor) {
  for (LayerParams& layer : grads.layers) {
    for (double& w : layer.weights.flat()) w *= factor;
    for (double& b : layer.bias) b *= factor;
  }
}

}  // namespace

double lr_schedule(long long k, long long total_steps, double lr0) {
  if (total_steps <= 0) {
    throw std::invalid_argument("total_steps must be positive");
  }
  if (k < 0 || k > total_steps) {
    throw std::invalid_argument("step outside [0, total_steps]");
  }
  const double progress =
      static_cast<double>(k) / static_cast<double>(total_steps);
  constexpr double kPi = 3.14159265358979323846;
  return lr0 * std::cos(7.0 * kPi * progress / 16.0);
}

OptimizerState init_optimizer(const ModelParams& params, double lr0) {
  OptimizerState state;
  state.buffers.reserve(params.layers.size());
  for (const LayerParams& layer : params.layers) {
    LayerParams buf;
    buf.weights = Matrix(layer.weights.rows(), layer.weights.cols());
    buf.bias.assign(layer.bias.size(), 0.0);
    state.buffers.push_back(std::move(buf));
  }
  state.step = 0;
  state.learning_rate = lr0;
  return state;
}

void sgd_step(ModelParams& params, const ModelGrads& grads,
              OptimizerState& state, double weight_decay, double momentum) {
  if (grads.layers.size() != params.layers.size() ||
      state.buffers.size() != params.layers.size()) {
    throw std::invalid_argument("optimizer shapes do not match params");
  }
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    LayerParams& layer = params.layers[l];
    const LayerParams& g = grads.layers[l];
    LayerParams& buf = state.buffers[l];
    auto w = layer.weights.flat();
    const auto gw = g.weights.flat();
    auto bw = buf.weights.flat();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double force = gw[i] + weight_decay * w[i];
      bw[i] = momentum * bw[i] + force;
      w[i] -= state.learning_rate * bw[i];
    }
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      const double force = g.bias[i] + weight_decay * layer.bias[i];
      buf.bias[i] = momentum * buf.bias[i] + force;
      layer.bias[i] -= state.learning_rate * buf.bias[i];
    }
  }
  state.step += 1;
  mark_params_updated(params);
}

RunPlan resolve_plan(const TrainConfig& config, const Dataset& train_set,
                     const BagCollection& bags) {
  std::vector<std::string> problems = validate_config(config);
  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "invalid config:";
    for (const std::string& p : problems) msg << "\n  - " << p;
    throw std::invalid_argument(msg.str());
  }
  check_dataset(train_set);
  if (bags.bags.empty()) throw std::invalid_argument("no bags to train on");
  for (const Bag& bag : bags.bags) {
    if (bag.size() != static_cast<std::size_t>(config.bag_size)) {
      throw std::invalid_argument(
          "bag collection does not match config bag_size");
    }
  }

  RunPlan plan;
  plan.config = config;
  plan.seed = config.seed.value_or(1);
  plan.config.seed = plan.seed;

  const long long bag_count = static_cast<long long>(bags.bags.size());
  if (config.bags_per_step) {
    plan.bags_per_step = *config.bags_per_step;
  } else {
    long long target = kTargetBatchInstances / config.bag_size;
    target = std::clamp<long long>(target, 1, bag_count);
    plan.bags_per_step = static_cast<int>(target);
  }
  plan.config.bags_per_step = plan.bags_per_step;
  plan.steps_per_epoch =
      (bag_count + plan.bags_per_step - 1) / plan.bags_per_step;

  const long long planned = plan.steps_per_epoch * config.epochs;
  plan.total_steps = config.total_steps.value_or(planned);
  if (plan.total_steps < planned) {
    throw std::invalid_argument(
        "total_steps is smaller than epochs x steps_per_epoch");
  }
  plan.config.total_steps = plan.total_steps;

  // Auto noise scales: fractions of the mean per-feature standard deviation
  // of the training features (population convention).
  double mean_sd = 0.0;
  {
    const Matrix& x = train_set.features;
    const double n = static_cast<double>(x.rows());
    for (std::size_t c = 0; c < x.cols(); ++c) {
      double mean = 0.0;
      for (std::size_t r = 0; r < x.rows(); ++r) mean += x(r, c);
      mean /= n;
      double var = 0.0;
      for (std::size_t r = 0; r < x.rows(); ++r) {
        const double d = x(r, c) - mean;
        var += d * d;
      }
      mean_sd += std::sqrt(var / n);
    }
    mean_sd /= static_cast<double>(x.cols());
  }
  plan.weak_sigma = config.weak_noise_sigma.value_or(0.05 * mean_sd);
  plan.strong_sigma = config.strong_noise_sigma.value_or(0.15 * mean_sd);
  plan.config.weak_noise_sigma = plan.weak_sigma;
  plan.config.strong_noise_sigma = plan.strong_sigma;
  return plan;
}

RunState init_run_state(const RunPlan& plan, const Dataset& train_set) {
  RunState state;
  state.params = init_model(plan.seed,
                            static_cast<int>(train_set.feature_dim()),
                            plan.config.hidden_sizes, train_set.class_count);
  state.optimizer = init_optimizer(state.params, plan.config.lr0);
  state.epoch = 0;
  state.bag_order_rng = make_stream(plan.seed, RngStream::bag_order);
  state.weak_rng = make_stream(plan.seed, RngStream::weak_augment);
  state.strong_rng = make_stream(plan.seed, RngStream::strong_augment);
  return state;
}

StepStats train_step(RunState& state, const Dataset& train_set,
                     std::span<const Bag* const> batch, const RunPlan& plan,
                     const TrainOptions& options) {
  if (batch.empty()) throw std::invalid_argument("empty step batch");

  // Sub-seeds are drawn in bag order before any work starts, so the noise
  // each bag sees is independent of which worker processes it.
  std::vector<std::uint64_t> weak_seeds(batch.size());
  std::vector<std::uint64_t> strong_seeds(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    weak_seeds[b] = state.weak_rng();
    strong_seeds[b] = state.strong_rng();
  }

  std::vector<BagWork> work(batch.size());
  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      work[b] = process_bag(state.params, train_set, *batch[b], plan,
                            weak_seeds[b], strong_seeds[b]);
    }
  };
  if (options.deterministic || batch.size() == 1) {
    run_range(0, batch.size());
  } else {
    unsigned hw = options.threads > 0
                      ? static_cast<unsigned>(options.threads)
                      : std::max(1u, std::thread::hardware_concurrency());
    const std::size_t worker_count =
        std::min<std::size_t>(hw, batch.size());
    std::vector<std::thread> workers;
    workers.reserve(worker_count);
    const std::size_t chunk =
        (batch.size() + worker_count - 1) / worker_count;
    for (std::size_t w = 0; w < worker_count; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(batch.size(), begin + chunk);
      if (begin >= end) break;
      workers.emplace_back(run_range, begin, end);
    }
    for (std::thread& t : workers) t.join();
  }

  // Ordered reduction over bags — identical in both execution modes.
  const double bag_count = static_cast<double>(batch.size());
  StepStats stats;
  ModelGrads grads = std::move(work.front().grads);
  for (std::size_t b = 1; b < batch.size(); ++b) {
    accumulate_grads(grads, work[b].grads);
  }
  scale_grads(grads, 1.0 / bag_count);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const BagWork& w = work[b];
    stats.report.bag_loss += w.bag_loss;
    stats.report.instance_loss += w.instance_loss;
    stats.report.per_bag.push_back(w.per_bag_ce);
    stats.pseudo_correct += w.pseudo_correct;
    stats.sum_normalized_entropy += w.sum_normalized_entropy;
    stats.sum_weight += w.sum_weight;
    stats.sum_bag_weight += w.sum_bag_weight;
    stats.sum_instance_weight += w.sum_instance_weight;
    stats.instance_count += batch[b]->size();
  }
  stats.report.bag_loss /= bag_count;
  stats.report.instance_loss /= bag_count;
  stats.report.lambda = plan.config.lambda;
  stats.report.total =
      stats.report.bag_loss + plan.config.lambda * stats.report.instance_loss;
  stats.report.mean_combined_weight =
      stats.sum_weight / static_cast<double>(stats.instance_count);

  state.optimizer.learning_rate =
      lr_schedule(state.optimizer.step, plan.total_steps, plan.config.lr0);
  sgd_step(state.params, grads, state.optimizer, plan.config.weight_decay,
           plan.config.momentum);
  return stats;
}

TrainResult train(const Dataset& train_set, const Dataset& test_set,
                  const BagCollection& bags, const TrainConfig& config,
                  const TrainOptions& options, const EpochCallback& on_epoch) {
  RunPlan plan = resolve_plan(config, train_set, bags);
  check_dataset(test_set);
  if (test_set.feature_dim() != train_set.feature_dim() ||
      test_set.class_count != train_set.class_count) {
    throw std::invalid_argument("train/test datasets disagree on shape");
  }
  ValidationReport report = validate_collection(bags, train_set);
  if (!report.ok()) {
    throw std::invalid_argument("bag collection invalid:\n" +
                                report.to_string());
  }

  RunState state = init_run_state(plan, train_set);
  TrainResult result;
  result.series.reserve(static_cast<std::size_t>(plan.config.epochs));

  std::vector<std::size_t> order(bags.bags.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < plan.config.epochs; ++epoch) {
    state.epoch = epoch;
    std::shuffle(order.begin(), order.end(), state.bag_order_rng);

    double epoch_bag_loss = 0.0;
    double epoch_instance_loss = 0.0;
    long long step_count = 0;
    std::size_t instances = 0;
    std::size_t pseudo_correct = 0;
    double sum_norm_entropy = 0.0;
    double sum_w = 0.0, sum_wb = 0.0, sum_wi = 0.0;

    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(plan.bags_per_step)) {
      const std::size_t end = std::min(
          order.size(), begin + static_cast<std::size_t>(plan.bags_per_step));
      std::vector<const Bag*> batch;
      batch.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        batch.push_back(&bags.bags[order[i]]);
      }
      StepStats stats = train_step(state, train_set, batch, plan, options);
      epoch_bag_loss += stats.report.bag_loss;
      epoch_instance_loss += stats.report.instance_loss;
      ++step_count;
      instances += stats.instance_count;
      pseudo_correct += stats.pseudo_correct;
      sum_norm_entropy += stats.sum_normalized_entropy;
      sum_w += stats.sum_weight;
      sum_wb += stats.sum_bag_weight;
      sum_wi += stats.sum_instance_weight;
    }

    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.bag_loss = epoch_bag_loss / static_cast<double>(step_count);
    metrics.instance_loss =
        epoch_instance_loss / static_cast<double>(step_count);
    const double denom = static_cast<double>(instances);
    metrics.pseudo_label_accuracy =
        static_cast<double>(pseudo_correct) / denom;
    metrics.mean_normalized_entropy = sum_norm_entropy / denom;
    metrics.mean_weight = sum_w / denom;
    metrics.mean_bag_weight = sum_wb / denom;
    metrics.mean_instance_weight = sum_wi / denom;
    metrics.test_accuracy = test_accuracy(state.params, test_set);
    result.series.push_back(metrics);
    if (on_epoch) on_epoch(metrics);
  }

  result.params = std::move(state.params);
  return result;
}

}  // namespace llpdew
