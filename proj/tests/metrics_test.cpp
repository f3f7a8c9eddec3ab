#include "llpdew/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

#include "llpdew/synth.hpp"

namespace {

llpdew::Matrix probs_of(std::initializer_list<std::initializer_list<double>> rows) {
  llpdew::Matrix m(rows.size(), rows.begin()->size());
  std::size_t i = 0;
  for (const auto& row : rows) {
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

std::filesystem::path temp_file(const char* stem) {
  return std::filesystem::temp_directory_path() /
         (std::string(stem) + "-" + std::to_string(::getpid()) + ".csv");
}

}  // namespace

TEST_CASE("pseudo-label accuracy counts argmax matches") {
  auto probs = probs_of({{1.0, 0.0}, {0.0, 1.0}, {0.9, 0.1}, {0.2, 0.8}});

  const std::vector<int> all_right = {0, 1, 0, 1};
  CHECK(llpdew::pseudo_label_accuracy(probs, all_right) == 1.0);

  const std::vector<int> all_wrong = {1, 0, 1, 0};
  CHECK(llpdew::pseudo_label_accuracy(probs, all_wrong) == 0.0);

  const std::vector<int> three_of_four = {0, 1, 0, 0};
  CHECK(llpdew::pseudo_label_accuracy(probs, three_of_four) == 0.75);
}

TEST_CASE("mean normalized entropy closed-form values") {
  auto onehot = probs_of({{1.0, 0.0}, {0.0, 1.0}});
  CHECK(llpdew::mean_normalized_entropy(onehot, 2) == 0.0);

  auto uniform = probs_of({{0.25, 0.25, 0.25, 0.25}});
  CHECK(llpdew::mean_normalized_entropy(uniform, 4) ==
        doctest::Approx(1.0).epsilon(1e-14));

  auto skew = probs_of({{0.9, 0.1}});
  CHECK(llpdew::mean_normalized_entropy(skew, 2) ==
        doctest::Approx(0.468995593589281221).epsilon(1e-14));
}

TEST_CASE("normalized entropy ignores class relabeling") {
  auto probs = probs_of({{0.6, 0.1, 0.3}, {0.2, 0.5, 0.3}});
  auto swapped = probs_of({{0.3, 0.1, 0.6}, {0.3, 0.5, 0.2}});  // cols 0<->2
  CHECK(llpdew::mean_normalized_entropy(probs, 3) ==
        doctest::Approx(llpdew::mean_normalized_entropy(swapped, 3))
            .epsilon(1e-14));
}

TEST_CASE("accuracy and error rate are complementary") {
  auto probs = probs_of({{0.7, 0.3}, {0.4, 0.6}, {0.55, 0.45}});
  const std::vector<int> labels = {0, 0, 1};
  double acc = llpdew::pseudo_label_accuracy(probs, labels);
  const std::vector<int> flipped = {1, 1, 0};
  double err = llpdew::pseudo_label_accuracy(probs, flipped);
  CHECK(acc + err == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("random params score near chance on label-free data") {
  // Features carry no label information, so any fixed classifier hits
  // Binomial(n, 1/C) accuracy; check within three standard errors.
  const int C = 4;
  const std::size_t n = 2000;
  llpdew::Dataset noise;
  noise.features = llpdew::Matrix(n, 5);
  noise.labels.resize(n);
  noise.class_count = C;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 5; ++j) noise.features(i, j) = gauss(rng);
    noise.labels[i] = static_cast<int>(i % C);
  }
  auto params = llpdew::init_model(23, 5, {8}, C);
  double acc = llpdew::test_accuracy(params, noise);
  const double p = 1.0 / C;
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
  CHECK(std::abs(acc - p) <= 3.0 * se);
}

TEST_CASE("a nearest-center classifier memorizes noiseless blobs") {
  // sigma = 0 puts every sample on its class center; a linear layer with
  // weights 2*center and bias -||center||^2 ranks classes by negative
  // squared distance, so every point classifies to its own center.
  llpdew::BlobSpec spec;
  spec.class_count = 3;
  spec.feature_dim = 4;
  spec.samples_per_class = 10;
  spec.within_class_sigma = 0.0;
  spec.seed = 9;
  auto blobs = llpdew::generate_blobs(spec);

  auto params = llpdew::init_model(1, spec.feature_dim, {}, spec.class_count);
  for (int c = 0; c < spec.class_count; ++c) {
    double norm_sq = 0.0;
    for (int j = 0; j < spec.feature_dim; ++j) {
      params.layers[0].weights(j, c) = 2.0 * blobs.centers(c, j);
      norm_sq += blobs.centers(c, j) * blobs.centers(c, j);
    }
    params.layers[0].bias[c] = -norm_sq;
  }
  llpdew::mark_params_updated(params);
  CHECK(llpdew::test_accuracy(params, blobs.train) == 1.0);
  CHECK(llpdew::test_accuracy(params, blobs.test) == 1.0);
}

TEST_CASE("empty test set is an error") {
  llpdew::Dataset empty;
  empty.features = llpdew::Matrix(0, 3);
  empty.class_count = 2;
  auto params = llpdew::init_model(1, 3, {}, 2);
  CHECK_THROWS_AS(llpdew::test_accuracy(params, empty), std::invalid_argument);
}

TEST_CASE("feature export writes one row per instance plus the label") {
  llpdew::Dataset d;
  d.features = probs_of({{0.1, 0.2}, {0.3, 0.4}, {-0.5, 0.6}});
  d.labels = {0, 1, 2};
  d.class_count = 3;
  auto params = llpdew::init_model(4, 2, {4}, 3);
  auto path = temp_file("llp-features");
  llpdew::export_features(params, d, path.string());

  std::ifstream in(path);
  std::string line;
  std::size_t rows = 0;
  auto expected = llpdew::penultimate_activations(params, d.features);
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    REQUIRE(values.size() == 5);  // 4 hidden activations + label
    for (std::size_t j = 0; j < 4; ++j) {
      double reference = expected(rows, j);
      double scale = std::max(std::abs(reference), 1e-12);
      CHECK(std::abs(values[j] - reference) / scale < 1e-12);
    }
    CHECK(values[4] == static_cast<double>(d.labels[rows]));
    ++rows;
  }
  CHECK(rows == 3);
  std::filesystem::remove(path);
}

TEST_CASE("epoch metrics serialize deterministically with sorted keys") {
  llpdew::EpochMetrics m;
  m.epoch = 3;
  m.bag_loss = 0.25;
  m.instance_loss = 0.125;
  m.pseudo_label_accuracy = 0.5;
  m.mean_normalized_entropy = 0.75;
  m.mean_weight = 0.3;
  m.mean_bag_weight = 0.4;
  m.mean_instance_weight = 0.6;
  m.test_accuracy = 0.9;

  auto a = llpdew::epoch_metrics_json_line(m);
  auto b = llpdew::epoch_metrics_json_line(m);
  CHECK(a == b);
  // Keys appear in sorted order, so identical metrics give identical bytes.
  CHECK(a.find("\"bag_loss\"") < a.find("\"epoch\""));
  CHECK(a.find("\"epoch\"") < a.find("\"instance_loss\""));
  CHECK(a.find("\"mean_weight\"") < a.find("\"pseudo_label_accuracy\""));
  CHECK(a.find("\"test_accuracy\"") != std::string::npos);
}

TEST_CASE("summary csv round-trips through the pinned header") {
  CHECK(std::string(llpdew::kSummaryHeader) ==
        "mode,bag_size,seed,test_accuracy,pseudo_label_accuracy,"
        "mean_normalized_entropy,mean_weight");

  std::vector<llpdew::SummaryRow> rows(2);
  rows[0] = {"dew", 64, 7, 0.9875, 0.971, 0.125, 0.88};
  rows[1] = {"dllp", 128, 8, 0.75, 0.6, 0.5, 0.0};
  auto path = temp_file("llp-summary");
  llpdew::write_summary_csv(rows, path.string());
  auto loaded = llpdew::read_summary_csv(path.string());
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].mode == "dew");
  CHECK(loaded[0].bag_size == 64);
  CHECK(loaded[0].seed == 7);
  CHECK(loaded[0].test_accuracy == 0.9875);
  CHECK(loaded[1].mode == "dllp");
  CHECK(loaded[1].mean_weight == 0.0);
  std::filesystem::remove(path);
}
