#include "llpdew/losses.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

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

constexpr double kLn2 = 0.693147180559945309;

std::vector<llpdew::DewWeights> unit_weights(std::size_t n) {
  return std::vector<llpdew::DewWeights>(n, llpdew::DewWeights{1.0, 1.0, 1.0});
}

}  // namespace

TEST_CASE("predicted proportion is the column mean") {
  auto single = probs_of({{0.2, 0.5, 0.3}});
  auto est = llpdew::predicted_proportion(single);
  CHECK(est.values[0] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(est.values[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(est.values[2] == doctest::Approx(0.3).epsilon(1e-14));

  auto pair = probs_of({{1.0, 0.0}, {0.0, 1.0}});
  est = llpdew::predicted_proportion(pair);
  CHECK(est.values[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(est.values[1] == doctest::Approx(0.5).epsilon(1e-14));

  auto triple = probs_of({{0.2, 0.8}, {0.3, 0.7}, {0.5, 0.5}});
  est = llpdew::predicted_proportion(triple);
  CHECK(est.values[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("bag loss closed-form values") {
  SUBCASE("perfect point mass costs nothing") {
    auto probs = probs_of({{1.0, 0.0}});
    auto bag = llpdew::make_bag({0}, {1, 0});
    const llpdew::Bag* bags[] = {&bag};
    auto result = llpdew::bag_loss(bags, probs);
    CHECK(result.loss == doctest::Approx(0.0).epsilon(1e-14));
  }

  SUBCASE("matching non-degenerate proportions cost their entropy") {
    auto probs = probs_of({{0.5, 0.5}, {0.5, 0.5}});
    auto bag = llpdew::make_bag({0, 1}, {1, 1});
    const llpdew::Bag* bags[] = {&bag};
    auto result = llpdew::bag_loss(bags, probs);
    CHECK(result.loss == doctest::Approx(kLn2).epsilon(1e-14));
  }

  SUBCASE("skewed mean against even proportions") {
    // -0.5 ln 0.25 - 0.5 ln 0.75 with the mean prediction [0.25, 0.75].
    auto probs = probs_of({{0.25, 0.75}, {0.25, 0.75}});
    auto bag = llpdew::make_bag({0, 1}, {1, 1});
    const llpdew::Bag* bags[] = {&bag};
    auto result = llpdew::bag_loss(bags, probs);
    CHECK(result.loss ==
          doctest::Approx(0.836988216785835773).epsilon(1e-14));
  }
}

TEST_CASE("bag loss gradient is -p_c / (N*M*mean_c)") {
  auto probs = probs_of({{0.5, 0.5}, {0.1, 0.9}});  // mean [0.3, 0.7]
  auto bag = llpdew::make_bag({0, 1}, {1, 1});
  const llpdew::Bag* bags[] = {&bag};
  auto result = llpdew::bag_loss(bags, probs);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(result.dprobs(j, 0) ==
          doctest::Approx(-0.5 / (2.0 * 0.3)).epsilon(1e-13));
    CHECK(result.dprobs(j, 1) ==
          doctest::Approx(-0.5 / (2.0 * 0.7)).epsilon(1e-13));
  }
}

TEST_CASE("bag loss clamps empty predicted mass instead of diverging") {
  // All predicted mass on class 1 while half the bag is class 0: the class-0
  // term hits the 1e-12 clamp — large finite loss, zero gradient there.
  auto probs = probs_of({{0.0, 1.0}, {0.0, 1.0}});
  auto bag = llpdew::make_bag({0, 1}, {1, 1});
  const llpdew::Bag* bags[] = {&bag};
  auto result = llpdew::bag_loss(bags, probs);
  CHECK(std::isfinite(result.loss));
  CHECK(result.loss ==
        doctest::Approx(-0.5 * std::log(1e-12)).epsilon(1e-13));
  CHECK(result.dprobs(0, 0) == 0.0);
  CHECK(result.dprobs(0, 1) == doctest::Approx(-0.25).epsilon(1e-13));
}

TEST_CASE("bag loss dominates the proportion entropy (Gibbs)") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int M = 2 + static_cast<int>(u(rng) * 6);
    const int C = 2 + static_cast<int>(u(rng) * 4);
    llpdew::Matrix probs(M, C);
    std::vector<int> labels(M);
    std::vector<int> counts(C, 0);
    std::vector<std::size_t> indices(M);
    for (int j = 0; j < M; ++j) {
      double sum = 0.0;
      for (int c = 0; c < C; ++c) sum += (probs(j, c) = u(rng) + 1e-6);
      for (int c = 0; c < C; ++c) probs(j, c) /= sum;
      labels[j] = static_cast<int>(u(rng) * C);
      ++counts[labels[j]];
      indices[j] = static_cast<std::size_t>(j);
    }
    if (counts[0] == 0) {  // keep proportions well-defined everywhere
      --counts[labels[0]];
      labels[0] = 0;
      ++counts[0];
    }
    auto bag = llpdew::make_bag(indices, counts);
    const llpdew::Bag* bags[] = {&bag};
    auto result = llpdew::bag_loss(bags, probs);

    double proportion_entropy = 0.0;
    for (int c = 0; c < C; ++c) {
      double p = bag.proportions[c];
      if (p > 0.0) proportion_entropy -= p * std::log(p);
    }
    CHECK(result.loss >= proportion_entropy - 1e-12);
  }
}

TEST_CASE("harden breaks ties toward the smallest class") {
  const std::vector<double> clear = {0.2, 0.5, 0.3};
  CHECK(llpdew::harden(clear).class_index == 1);
  const std::vector<double> pair_tie = {0.5, 0.5};
  CHECK(llpdew::harden(pair_tie).class_index == 0);
  const std::vector<double> three_tie = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  CHECK(llpdew::harden(three_tie).class_index == 0);

  auto label = llpdew::harden(clear);
  REQUIRE(label.onehot.size() == 3);
  CHECK(label.onehot[0] == 0.0);
  CHECK(label.onehot[1] == 1.0);
  CHECK(label.onehot[2] == 0.0);
}

TEST_CASE("instance loss basics") {
  SUBCASE("exactly-confident correct prediction costs nothing") {
    auto strong = probs_of({{0.0, 1.0}});
    auto pseudo = llpdew::harden_all(strong);
    auto result = llpdew::instance_loss(pseudo, strong, unit_weights(1));
    CHECK(result.loss == doctest::Approx(0.0).epsilon(1e-14));
  }

  SUBCASE("zero weight silences an instance completely") {
    auto strong = probs_of({{0.5, 0.5}, {0.01, 0.99}});
    std::vector<llpdew::PseudoLabel> pseudo = {llpdew::harden(strong.row(0)),
                                               llpdew::harden(strong.row(1))};
    auto weights = unit_weights(2);
    weights[1] = {0.0, 1.0, 0.0};
    auto result = llpdew::instance_loss(pseudo, strong, weights);
    // Only row 0 contributes: ln 2 averaged over the 2 rows.
    CHECK(result.loss == doctest::Approx(kLn2 / 2.0).epsilon(1e-13));
    CHECK(result.dprobs(1, 0) == 0.0);
    CHECK(result.dprobs(1, 1) == 0.0);
  }

  SUBCASE("half-confident prediction costs ln 2 over the row count") {
    auto strong = probs_of({{0.5, 0.5}});
    std::vector<llpdew::PseudoLabel> pseudo = {llpdew::harden(strong.row(0))};
    auto result = llpdew::instance_loss(pseudo, strong, unit_weights(1));
    CHECK(result.loss == doctest::Approx(kLn2).epsilon(1e-13));
    // d/dp of -log p at the pseudo class: -1/(n*p) = -2.
    CHECK(result.dprobs(0, 0) == doctest::Approx(-2.0).epsilon(1e-13));
    CHECK(result.dprobs(0, 1) == 0.0);
  }
}

TEST_CASE("instance loss is linear in the weights") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  llpdew::Matrix strong(5, 3);
  std::vector<llpdew::DewWeights> weights(5);
  for (std::size_t j = 0; j < 5; ++j) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) sum += (strong(j, c) = u(rng) + 0.01);
    for (std::size_t c = 0; c < 3; ++c) strong(j, c) /= sum;
    double w = u(rng);
    weights[j] = {w, 1.0, w};
  }
  auto pseudo = llpdew::harden_all(strong);
  auto base = llpdew::instance_loss(pseudo, strong, weights);

  auto doubled = weights;
  for (auto& w : doubled) {
    w.bag_weight *= 2.0;
    w.combined *= 2.0;
  }
  auto twice = llpdew::instance_loss(pseudo, strong, doubled);
  CHECK(twice.loss == doctest::Approx(2.0 * base.loss).epsilon(1e-12));
}

TEST_CASE("total loss composes its parts") {
  auto weak = probs_of({{0.6, 0.4}, {0.3, 0.7}, {0.8, 0.2}, {0.4, 0.6}});
  auto strong = probs_of({{0.5, 0.5}, {0.2, 0.8}, {0.9, 0.1}, {0.3, 0.7}});
  auto bag_a = llpdew::make_bag({0, 1}, {1, 1});
  auto bag_b = llpdew::make_bag({2, 3}, {1, 1});
  const llpdew::Bag* bags[] = {&bag_a, &bag_b};

  SUBCASE("total = bag + lambda * instance") {
    llpdew::LossConfig config;
    config.lambda = 0.5;
    auto result = llpdew::total_loss(bags, weak, strong, config);
    CHECK(result.report.total ==
          doctest::Approx(result.report.bag_loss +
                          0.5 * result.report.instance_loss)
              .epsilon(1e-12));
    CHECK(result.report.lambda == 0.5);
  }

  SUBCASE("lambda zero reduces to the bag loss alone") {
    llpdew::LossConfig config;
    config.lambda = 0.0;
    auto result = llpdew::total_loss(bags, weak, strong, config);
    auto bare = llpdew::bag_loss(bags, weak);
    CHECK(result.report.total == bare.loss);
    for (double g : result.dstrong.flat()) CHECK(g == 0.0);
  }

  SUBCASE("all-zero weights behave exactly like lambda zero") {
    auto pseudo = llpdew::harden_all(weak);
    std::vector<llpdew::DewWeights> silenced(4, {0.0, 0.0, 0.0});
    auto zero_w =
        llpdew::total_loss_fixed(bags, weak, strong, pseudo, silenced, 0.5);
    llpdew::LossConfig config;
    config.lambda = 0.0;
    auto zero_l = llpdew::total_loss(bags, weak, strong, config);
    CHECK(zero_w.report.total ==
          doctest::Approx(zero_l.report.total).epsilon(1e-14));
  }
}
