// Release gate for the library: nine checks covering oracle equivalence,
// gradient correctness, frozen closed-form values, weight semantics, the
// qualitative training trends, determinism, and the sensitivity harness.
// Prints one [PASS]/[FAIL] line per criterion; exits nonzero on any failure.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "llpdew/bagging.hpp"
#include "llpdew/cli.hpp"
#include "llpdew/config.hpp"
#include "llpdew/dew.hpp"
#include "llpdew/losses.hpp"
#include "llpdew/metrics.hpp"
#include "llpdew/oracles/suites.hpp"
#include "llpdew/synth.hpp"
#include "llpdew/trainer.hpp"
#include "llpdew/types.hpp"

namespace fs = std::filesystem;
using namespace llpdew;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("[%s] %d. %s — %s\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

fs::path work_dir() {
  static fs::path dir = [] {
    std::ostringstream name;
    name << "llpdew-acceptance-" << ::getpid();
    fs::path d = fs::temp_directory_path() / name.str();
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

/// One library-driven run on freshly drawn blobs (data seed = run seed).
EpochMetrics run_on_blobs(const BlobSpec& base_spec, int bag_size,
                          std::uint64_t seed, int epochs,
                          const std::string& mode) {
  BlobSpec spec = base_spec;
  spec.seed = seed;
  BlobData blobs = generate_blobs(spec);

  TrainConfig config;
  config.bag_size = bag_size;
  config.epochs = epochs;
  config.seed = seed;
  if (mode == "unweighted") {
    config.ablation_use_bag_weight = false;
    config.ablation_use_instance_weight = false;
  } else if (mode == "dllp") {
    config.lambda = 0.0;
  }  // "dew" keeps the defaults: both weights on, lambda 0.5.

  BagCollection bags = generate_bags(blobs.train, bag_size, seed);
  TrainResult result = train(blobs.train, blobs.test, bags, config);
  return result.series.back();
}

double mean(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

const std::vector<std::uint64_t> kSeeds = {1, 2, 3, 4, 5};

// --- criteria ---------------------------------------------------------------

void criterion_1_weight_oracle() {
  Stopwatch timer;
  oracle::DewSuiteReport rep = oracle::run_dew_oracle_suite(2024, 10000);
  const double secs = timer.seconds();
  const bool pass = rep.pass && secs < 10.0;
  report(1, "confidence weights match the brute-force reference", pass,
         fmt("cases=%d max_abs_error=%.3g (tol %.0e), %.2fs (limit 10s)",
             rep.cases, rep.max_abs_error, rep.tolerance, secs));
  if (!rep.pass) std::fprintf(stderr, "worst case:\n%s\n", rep.worst_case.c_str());
}

void criterion_2_gradient_oracle() {
  Stopwatch timer;
  oracle::FdSuiteReport rep = oracle::run_fd_suite(2024, 100);
  const double secs = timer.seconds();
  const bool pass = rep.pass && secs < 60.0;
  report(2, "end-to-end gradients match central finite differences", pass,
         fmt("cases=%d max_rel_error=%.3g (tol %.0e), %.2fs (limit 60s)",
             rep.cases, rep.max_rel_error, rep.tolerance, secs));
  if (!rep.pass) std::fprintf(stderr, "worst case:\n%s\n", rep.worst_case.c_str());
}

void criterion_3_closed_forms() {
  const double half[] = {0.5, 0.5};
  const double ln2 = std::numbers::ln2;
  const double e1 = std::fabs(entropy(half) - ln2);

  const double e2 = std::fabs(mapping_sigma(ln2, 1.0) - std::exp(-ln2 * ln2));

  Bag bag = make_bag({0, 1}, {1, 1});
  Matrix probs(2, 2);
  const double row[] = {0.25, 0.75};
  probs.set_row(0, row);
  probs.set_row(1, row);
  const Bag* bag_ptr = &bag;
  BagLossResult bl = bag_loss({&bag_ptr, 1}, probs);
  const double e3 = std::fabs(bl.loss - 0.836988216785835773);

  const double e4 =
      std::fabs(lr_schedule(1000, 1000, 0.03) -
                0.03 * std::cos(7.0 * std::numbers::pi / 16.0));

  const bool pass = e1 <= 1e-12 && e2 <= 1e-12 && e3 <= 1e-6 && e4 <= 1e-12;
  report(3, "closed-form unit values", pass,
         fmt("entropy err=%.2g, sigma err=%.2g, bag-loss err=%.2g, "
             "lr err=%.2g",
             e1, e2, e3, e4));
}

void criterion_4_weight_semantics() {
  bool exact_ok = true;

  // One-hot predictions carry full instance confidence, bit-exactly.
  for (int c = 2; c <= 6 && exact_ok; ++c) {
    for (int hot = 0; hot < c; ++hot) {
      std::vector<double> one_hot(c, 0.0);
      one_hot[hot] = 1.0;
      if (instance_weight(one_hot, 1.0) != 1.0) exact_ok = false;
    }
  }

  // A class column spread evenly over exactly m instances carries full bag
  // confidence.  Power-of-two masses keep the normalization exact.
  for (int m : {1, 2, 4}) {
    Matrix probs(8, 2);
    for (int j = 0; j < m; ++j) probs(j, 0) = 0.25;
    BagClassDistribution dist = bag_class_distribution(probs, 0, m);
    if (bag_weight(dist, 1.0) != 1.0) exact_ok = false;
  }

  // Property: across random prediction pairs, higher instance entropy never
  // yields a larger weight.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> dim(2, 10);
  int violations = 0;
  const int cases = 1000;
  auto random_dist = [&rng, &unit](int c) {
    std::vector<double> v(c);
    double sum = 0.0;
    for (double& x : v) {
      x = -std::log(std::max(unit(rng), 1e-300));
      sum += x;
    }
    for (double& x : v) x /= sum;
    return v;
  };
  for (int i = 0; i < cases; ++i) {
    const int c = dim(rng);
    std::vector<double> a = random_dist(c);
    std::vector<double> b = random_dist(c);
    if (entropy(a) > entropy(b)) std::swap(a, b);
    if (instance_weight(a, 1.0) < instance_weight(b, 1.0)) ++violations;
  }

  const bool pass = exact_ok && violations == 0;
  report(4, "weight semantics: exact anchors and entropy monotonicity", pass,
         fmt("one-hot/uniform-column exactness %s, %d/%d monotonicity "
             "violations",
             exact_ok ? "ok" : "BROKEN", violations, cases));
}

void criterion_5_smoothing_trend() {
  Stopwatch timer;
  const BlobSpec spec;  // default synthetic blobs
  const std::vector<int> bag_sizes = {8, 32, 128};
  const int epochs = 15;

  std::vector<double> entropy_by_m;
  std::vector<double> pacc_by_m;
  for (int m : bag_sizes) {
    std::vector<double> ent, pacc;
    for (std::uint64_t seed : kSeeds) {
      EpochMetrics last = run_on_blobs(spec, m, seed, epochs, "unweighted");
      ent.push_back(last.mean_normalized_entropy);
      pacc.push_back(last.pseudo_label_accuracy);
    }
    entropy_by_m.push_back(mean(ent));
    pacc_by_m.push_back(mean(pacc));
  }
  const double secs = timer.seconds();

  const bool entropy_up = entropy_by_m[0] <= entropy_by_m[1] &&
                          entropy_by_m[1] <= entropy_by_m[2];
  const bool pacc_down =
      pacc_by_m[0] >= pacc_by_m[1] && pacc_by_m[1] >= pacc_by_m[2];
  const bool pass = entropy_up && pacc_down && secs < 900.0;
  report(5, "larger bags smooth unweighted self-training", pass,
         fmt("entropy M8/32/128 = %.4f/%.4f/%.4f (want nondecreasing), "
             "pseudo-label acc = %.4f/%.4f/%.4f (want nonincreasing), "
             "%.0fs (limit 900s)",
             entropy_by_m[0], entropy_by_m[1], entropy_by_m[2], pacc_by_m[0],
             pacc_by_m[1], pacc_by_m[2], secs));
}

void criterion_6_ablation_direction() {
  Stopwatch timer;
  const fs::path out = work_dir() / "ablation";
  cli::CommonArgs common;
  common.out_dir = out.string();
  common.overwrite = true;
  common.deterministic = true;

  const int rc = cli::cmd_ablate(common, cli::DataArgs{}, {128}, kSeeds);
  std::map<std::string, double> by_mode;
  for (const auto& row : read_csv_rows(out / "ablation_table.csv")) {
    if (row.size() >= 3 && row[0] != "mode") {
      by_mode[row[0]] = std::strtod(row[2].c_str(), nullptr);
    }
  }
  const double secs = timer.seconds();

  const bool have_all = by_mode.count("dew") && by_mode.count("bag-only") &&
                        by_mode.count("instance-only") &&
                        by_mode.count("unweighted");
  bool ordered = false;
  double gap = 0.0;
  if (have_all) {
    const double dew = by_mode["dew"];
    const double bag_only = by_mode["bag-only"];
    const double inst_only = by_mode["instance-only"];
    const double unweighted = by_mode["unweighted"];
    gap = dew - unweighted;
    ordered = dew >= bag_only && dew >= inst_only && bag_only >= unweighted &&
              inst_only >= unweighted && gap >= 0.03;
  }
  const bool pass = rc == cli::kExitOk && have_all && ordered && secs < 1800.0;
  report(6, "both confidence factors help at M=128", pass,
         have_all
             ? fmt("mean acc: dew=%.4f bag-only=%.4f instance-only=%.4f "
                   "unweighted=%.4f (dew-unweighted=%.1f pts, need >= 3), "
                   "%.0fs (limit 1800s)",
                   by_mode["dew"], by_mode["bag-only"],
                   by_mode["instance-only"], by_mode["unweighted"], gap * 100,
                   secs)
             : fmt("ablation grid failed, exit=%d", rc));
}

void criterion_7_dllp_gap() {
  Stopwatch timer;
  // Harder task than the default blobs: more classes at tighter spacing,
  // where proportion matching alone plateaus but confidence-weighted
  // self-training keeps sharpening.
  BlobSpec spec;
  spec.class_count = 10;
  spec.within_class_sigma = 1.5;

  std::vector<double> dew_acc, dllp_acc;
  for (std::uint64_t seed : kSeeds) {
    dew_acc.push_back(run_on_blobs(spec, 128, seed, 200, "dew").test_accuracy);
    dllp_acc.push_back(
        run_on_blobs(spec, 128, seed, 200, "dllp").test_accuracy);
  }
  const double dew_mean = mean(dew_acc);
  const double dllp_mean = mean(dllp_acc);
  const double gap = dew_mean - dllp_mean;
  const double secs = timer.seconds();
  report(7, "proportion-only training trails full weighting at M=128",
         gap >= 0.03,
         fmt("mean acc over 5 seeds: dew=%.4f dllp=%.4f (gap %.1f pts, "
             "need >= 3), %.0fs",
             dew_mean, dllp_mean, gap * 100, secs));
}

void criterion_8_determinism() {
  const fs::path out_a = work_dir() / "det-a";
  const fs::path out_b = work_dir() / "det-b";
  cli::CommonArgs common;
  common.overrides = {"epochs=50", "seed=2024"};
  common.overwrite = true;
  common.deterministic = true;

  common.out_dir = out_a.string();
  const int rc_a = cli::cmd_train(common, cli::DataArgs{}, "dew");
  common.out_dir = out_b.string();
  const int rc_b = cli::cmd_train(common, cli::DataArgs{}, "dew");

  const std::string metrics_a = slurp(out_a / "metrics.jsonl");
  const std::string metrics_b = slurp(out_b / "metrics.jsonl");
  const bool pass = rc_a == cli::kExitOk && rc_b == cli::kExitOk &&
                    !metrics_a.empty() && metrics_a == metrics_b;
  report(8, "repeated deterministic runs are byte-identical", pass,
         fmt("metrics.jsonl %zu bytes, %s", metrics_a.size(),
             metrics_a == metrics_b ? "identical" : "DIFFER"));
}

void criterion_9_beta_sensitivity() {
  Stopwatch timer;
  const fs::path out = work_dir() / "sweep";
  cli::CommonArgs common;
  common.out_dir = out.string();
  common.overrides = {"seed=1"};
  common.overwrite = true;
  common.deterministic = true;

  const std::vector<double> grid = {0.25, 1.0, 4.0};
  const int rc = cli::cmd_sweep_beta(common, cli::DataArgs{}, grid, grid);

  std::map<std::pair<double, double>, double> weight_by_cell;
  const auto rows = read_csv_rows(out / "sweep.csv");
  for (const auto& row : rows) {
    if (row.size() == 4 && row[0] != "beta_b") {
      weight_by_cell[{std::strtod(row[0].c_str(), nullptr),
                      std::strtod(row[1].c_str(), nullptr)}] =
          std::strtod(row[3].c_str(), nullptr);
    }
  }
  const double secs = timer.seconds();

  const bool nine_rows = weight_by_cell.size() == 9;
  bool directional = false;
  double w_small = 0.0, w_default = 0.0;
  if (weight_by_cell.count({0.25, 0.25}) && weight_by_cell.count({1.0, 1.0})) {
    w_small = weight_by_cell[{0.25, 0.25}];
    w_default = weight_by_cell[{1.0, 1.0}];
    directional = w_small < w_default;
  }
  const bool pass = rc == cli::kExitOk && nine_rows && directional;
  report(9, "beta sweep completes and small beta suppresses weights", pass,
         fmt("%zu grid rows, mean weight beta=0.25 cell %.5f vs default cell "
             "%.5f, %.0fs",
             weight_by_cell.size(), w_small, w_default, secs));
}

}  // namespace

int main() {
  std::printf("acceptance checks (work dir: %s)\n", work_dir().c_str());
  Stopwatch total;

  criterion_1_weight_oracle();
  criterion_2_gradient_oracle();
  criterion_3_closed_forms();
  criterion_4_weight_semantics();
  criterion_5_smoothing_trend();
  criterion_6_ablation_direction();
  criterion_7_dllp_gap();
  criterion_8_determinism();
  criterion_9_beta_sensitivity();

  std::printf("%d/9 criteria passed in %.0fs\n", 9 - g_failures,
              total.seconds());
  if (g_failures == 0) {
    fs::remove_all(work_dir());
    return 0;
  }
  std::printf("artifacts for failing runs kept under %s\n",
              work_dir().c_str());
  return 1;
}
