#include "llpdew/oracles/suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "llpdew/dew.hpp"
#include "llpdew/losses.hpp"
#include "llpdew/model.hpp"
#include "llpdew/oracles/dew_reference.hpp"
#include "llpdew/rng.hpp"
#include "llpdew/types.hpp"

namespace llpdew::oracle {
namespace {

// Random bag + predictions covering the interesting corners: soft rows,
// hardened rows, absent classes, and (occasionally) an all-zero column.
DewCase random_dew_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> m_dist(1, 16);
  std::uniform_int_distribution<int> c_dist(2, 10);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  DewCase dew_case;
  const int m = m_dist(rng);
  const int c = c_dist(rng);
  std::uniform_real_distribution<double> beta_dist(0.25, 4.0);
  dew_case.beta_b = beta_dist(rng);
  dew_case.beta_i = beta_dist(rng);
  dew_case.use_bag_weight = unif(rng) < 0.85;
  dew_case.use_instance_weight = unif(rng) < 0.85;

  // Labels drawn uniformly: some classes will have count zero.
  dew_case.counts.assign(static_cast<std::size_t>(c), 0);
  std::uniform_int_distribution<int> label_dist(0, c - 1);
  for (int j = 0; j < m; ++j) {
    dew_case.counts[static_cast<std::size_t>(label_dist(rng))]++;
  }

  dew_case.predictions.resize(static_cast<std::size_t>(m));
  for (auto& row : dew_case.predictions) {
    row.resize(static_cast<std::size_t>(c));
    double sum = 0.0;
    for (double& p : row) {
      p = unif(rng) + 1e-6;
      sum += p;
    }
    for (double& p : row) p /= sum;
    if (unif(rng) < 0.15) {
      // Hardened row: probability 1 on the current argmax.
      std::size_t best = 0;
      for (std::size_t k = 1; k < row.size(); ++k) {
        if (row[k] > row[best]) best = k;
      }
      std::fill(row.begin(), row.end(), 0.0);
      row[best] = 1.0;
    }
  }

  if (c > 2 && unif(rng) < 0.05) {
    // Zero out one whole class column (degenerate path), then re-normalize
    // each still-positive row.
    std::uniform_int_distribution<int> col_dist(0, c - 1);
    const std::size_t dead = static_cast<std::size_t>(col_dist(rng));
    for (auto& row : dew_case.predictions) {
      row[dead] = 0.0;
      double sum = 0.0;
      for (double p : row) sum += p;
      if (sum > 0.0) {
        for (double& p : row) p /= sum;
      } else {
        row[(dead + 1) % row.size()] = 1.0;  // row was one-hot on `dead`
      }
    }
  }
  return dew_case;
}

std::string describe_dew_case(const DewCase& dew_case, std::size_t instance,
                              const char* field, double got, double want) {
  std::ostringstream out;
  out << "instance " << instance << " field " << field << ": impl " << got
      << " vs oracle " << want << "\ncounts:";
  for (int v : dew_case.counts) out << " " << v;
  out << "\nbeta_b=" << dew_case.beta_b << " beta_i=" << dew_case.beta_i
      << " use_bag=" << dew_case.use_bag_weight
      << " use_instance=" << dew_case.use_instance_weight << "\npredictions:";
  char buf[32];
  for (const auto& row : dew_case.predictions) {
    out << "\n ";
    for (double p : row) {
      std::snprintf(buf, sizeof buf, " %.17g", p);
      out << buf;
    }
  }
  return out.str();
}

// The composite objective as a plain function of the parameters, with
// pseudo-labels and weights frozen — the quantity the analytic gradient
// claims to differentiate.
double fd_loss_value(const ModelParams& params, const Bag& bag,
                     const Matrix& weak_view, const Matrix& strong_view,
                     std::span<const PseudoLabel> pseudo,
                     std::span<const DewWeights> weights, double lambda) {
  ForwardTrace weak_trace = forward(params, weak_view);
  ForwardTrace strong_trace = forward(params, strong_view);
  const Bag* ptr = &bag;
  return total_loss_fixed({&ptr, 1}, weak_trace.probs, strong_trace.probs,
                          pseudo, weights, lambda)
      .report.total;
}

struct FdCase {
  ModelParams params;
  Bag bag;
  Matrix weak_view;
  Matrix strong_view;
  std::vector<PseudoLabel> pseudo;
  std::vector<DewWeights> weights;
  double lambda = 0.5;
  std::string summary;
  bool near_kink = false;
};

FdCase random_fd_case(std::uint64_t case_seed, std::mt19937_64& rng,
                      double step) {
  std::uniform_int_distribution<int> d_dist(2, 5);
  std::uniform_int_distribution<int> c_dist(2, 5);
  std::uniform_int_distribution<int> h_dist(1, 8);
  std::uniform_int_distribution<int> m_dist(1, 8);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  FdCase fd_case;
  const int d = d_dist(rng);
  const int c = c_dist(rng);
  const int h = h_dist(rng);
  const int m = m_dist(rng);
  const double lambda_choices[] = {0.0, 0.5, 1.0};
  fd_case.lambda = lambda_choices[static_cast<std::size_t>(
      std::uniform_int_distribution<int>(0, 2)(rng))];

  fd_case.params = init_model(case_seed, d, {h}, c);

  std::vector<std::size_t> indices(static_cast<std::size_t>(m));
  std::vector<int> counts(static_cast<std::size_t>(c), 0);
  std::uniform_int_distribution<int> label_dist(0, c - 1);
  for (int j = 0; j < m; ++j) {
    indices[static_cast<std::size_t>(j)] = static_cast<std::size_t>(j);
    counts[static_cast<std::size_t>(label_dist(rng))]++;
  }
  fd_case.bag = make_bag(std::move(indices), std::move(counts));

  fd_case.weak_view = Matrix(static_cast<std::size_t>(m),
                             static_cast<std::size_t>(d));
  fd_case.strong_view = Matrix(static_cast<std::size_t>(m),
                               static_cast<std::size_t>(d));
  for (double& v : fd_case.weak_view.flat()) v = normal(rng);
  for (double& v : fd_case.strong_view.flat()) v = normal(rng);

  ForwardTrace weak_trace = forward(fd_case.params, fd_case.weak_view);
  ForwardTrace strong_trace = forward(fd_case.params, fd_case.strong_view);

  // Finite differences are meaningless across a ReLU kink; reject cases
  // where any hidden pre-activation sits within a few steps of zero.
  const double kink_margin = 10.0 * step;
  for (const Matrix& z : weak_trace.pre_activations) {
    if (&z == &weak_trace.pre_activations.back()) break;
    for (double v : z.flat()) {
      if (std::fabs(v) < kink_margin) fd_case.near_kink = true;
    }
  }
  for (const Matrix& z : strong_trace.pre_activations) {
    if (&z == &strong_trace.pre_activations.back()) break;
    for (double v : z.flat()) {
      if (std::fabs(v) < kink_margin) fd_case.near_kink = true;
    }
  }

  fd_case.pseudo = harden_all(weak_trace.probs);
  DewSettings dew{1.0, 1.0, true, true};
  fd_case.weights = combined_weights(fd_case.bag, weak_trace.probs, dew);

  std::ostringstream summary;
  summary << "case_seed=" << case_seed << " D=" << d << " C=" << c
          << " H=" << h << " M=" << m << " lambda=" << fd_case.lambda;
  fd_case.summary = summary.str();
  return fd_case;
}

}  // namespace

DewSuiteReport run_dew_oracle_suite(std::uint64_t seed, int cases,
                                    double tolerance) {
  DewSuiteReport report;
  report.cases = cases;
  report.tolerance = tolerance;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < cases; ++i) {
    DewCase dew_case = random_dew_case(rng);
    std::vector<DewTriple> expected = reference_combined_weights(dew_case);

    const std::size_t m = dew_case.predictions.size();
    const std::size_t c = dew_case.counts.size();
    std::vector<std::size_t> indices(m);
    for (std::size_t j = 0; j < m; ++j) indices[j] = j;
    Bag bag = make_bag(indices, dew_case.counts);
    Matrix probs(m, c);
    for (std::size_t j = 0; j < m; ++j) probs.set_row(j, dew_case.predictions[j]);
    DewSettings settings{dew_case.beta_b, dew_case.beta_i,
                         dew_case.use_bag_weight, dew_case.use_instance_weight};
    std::vector<DewWeights> got = combined_weights(bag, probs, settings);

    for (std::size_t j = 0; j < m; ++j) {
      struct {
        const char* name;
        double got;
        double want;
      } fields[] = {
          {"bag_weight", got[j].bag_weight, expected[j].bag_weight},
          {"instance_weight", got[j].instance_weight,
           expected[j].instance_weight},
          {"combined", got[j].combined, expected[j].combined},
      };
      for (const auto& f : fields) {
        const double err = std::fabs(f.got - f.want);
        if (err > report.max_abs_error) {
          report.max_abs_error = err;
          if (err > tolerance) {
            report.worst_case =
                describe_dew_case(dew_case, j, f.name, f.got, f.want);
          }
        }
      }
    }
  }
  report.pass = report.max_abs_error <= tolerance;
  return report;
}

FdSuiteReport run_fd_suite(std::uint64_t seed, int cases, double step,
                           double tolerance) {
  FdSuiteReport report;
  report.cases = cases;
  report.tolerance = tolerance;
  std::mt19937_64 rng(seed);
  std::uint64_t case_seed = seed;

  for (int i = 0; i < cases; ++i) {
    FdCase fd_case;
    do {
      fd_case = random_fd_case(++case_seed, rng, step);
    } while (fd_case.near_kink);

    // Analytic gradient with pseudo-labels/weights frozen.
    ForwardTrace weak_trace = forward(fd_case.params, fd_case.weak_view);
    ForwardTrace strong_trace = forward(fd_case.params, fd_case.strong_view);
    const Bag* ptr = &fd_case.bag;
    TotalLossResult loss = total_loss_fixed(
        {&ptr, 1}, weak_trace.probs, strong_trace.probs, fd_case.pseudo,
        fd_case.weights, fd_case.lambda);
    ModelGrads analytic =
        backward_from_probs(fd_case.params, weak_trace, loss.dweak);
    accumulate_grads(analytic, backward_from_probs(fd_case.params,
                                                   strong_trace,
                                                   loss.dstrong));

    for (std::size_t l = 0; l < fd_case.params.layers.size(); ++l) {
      const std::size_t weight_count =
          fd_case.params.layers[l].weights.flat().size();
      const std::size_t bias_count = fd_case.params.layers[l].bias.size();
      for (std::size_t p = 0; p < weight_count + bias_count; ++p) {
        auto value_at = [&](double delta) {
          ModelParams perturbed = fd_case.params;
          mark_params_updated(perturbed);
          double& slot = p < weight_count
                             ? perturbed.layers[l].weights.flat()[p]
                             : perturbed.layers[l].bias[p - weight_count];
          slot += delta;
          return fd_loss_value(perturbed, fd_case.bag, fd_case.weak_view,
                               fd_case.strong_view, fd_case.pseudo,
                               fd_case.weights, fd_case.lambda);
        };
        const double numeric = (value_at(step) - value_at(-step)) / (2 * step);
        const double exact =
            p < weight_count ? analytic.layers[l].weights.flat()[p]
                             : analytic.layers[l].bias[p - weight_count];
        const double denom =
            std::max({std::fabs(exact), std::fabs(numeric), 1e-3});
        const double rel = std::fabs(exact - numeric) / denom;
        if (rel > report.max_rel_error) {
          report.max_rel_error = rel;
          if (rel > tolerance) {
            std::ostringstream msg;
            msg << fd_case.summary << " layer=" << l << " param=" << p
                << " analytic=" << exact << " numeric=" << numeric;
            report.worst_case = msg.str();
          }
        }
      }
    }
  }
  report.pass = report.max_rel_error <= tolerance;
  return report;
}

}  // namespace llpdew::oracle
