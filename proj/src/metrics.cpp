#include "llpdew/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "llpdew/dew.hpp"

namespace llpdew {

const char* const kSummaryHeader =
    "mode,bag_size,seed,test_accuracy,pseudo_label_accuracy,"
    "mean_normalized_entropy,mean_weight";

double pseudo_label_accuracy(const Matrix& weak_probs,
                             std::span<const int> true_labels) {
  if (weak_probs.rows() != true_labels.size()) {
    throw std::invalid_argument("predictions and labels are misaligned");
  }
  if (weak_probs.rows() == 0) {
    throw std::invalid_argument("no predictions to score");
  }
  std::size_t correct = 0;
  for (std::size_t j = 0; j < weak_probs.rows(); ++j) {
    if (argmax_tie_smallest(weak_probs.row(j)) ==
        static_cast<std::size_t>(true_labels[j])) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(weak_probs.rows());
}

double mean_normalized_entropy(const Matrix& weak_probs, int class_count) {
  if (class_count < 2) throw std::invalid_argument("class_count must be >= 2");
  if (weak_probs.rows() == 0) {
    throw std::invalid_argument("no predictions to score");
  }
  const double log_c = std::log(static_cast<double>(class_count));
  double sum = 0.0;
  for (std::size_t j = 0; j < weak_probs.rows(); ++j) {
    sum += entropy(weak_probs.row(j)) / log_c;
  }
  return sum / static_cast<double>(weak_probs.rows());
}

double test_accuracy(const ModelParams& params, const Dataset& test_set) {
  if (test_set.size() == 0) throw std::invalid_argument("empty test set");
  ForwardTrace trace = forward(params, test_set.features);
  std::size_t correct = 0;
  for (std::size_t j = 0; j < trace.probs.rows(); ++j) {
    if (argmax_tie_smallest(trace.probs.row(j)) ==
        static_cast<std::size_t>(test_set.labels[j])) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(test_set.size());
}

void export_features(const ModelParams& params, const Dataset& dataset,
                     const std::string& path) {
  Matrix features = penultimate_activations(params, dataset.features);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  char buf[64];
  for (std::size_t r = 0; r < features.rows(); ++r) {
    for (std::size_t c = 0; c < features.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", features(r, c));
      out << buf << ",";
    }
    out << dataset.labels[r] << "\n";
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::string epoch_metrics_json_line(const EpochMetrics& metrics) {
  nlohmann::json line;
  line["epoch"] = metrics.epoch;
  line["bag_loss"] = metrics.bag_loss;
  line["instance_loss"] = metrics.instance_loss;
  line["pseudo_label_accuracy"] = metrics.pseudo_label_accuracy;
  line["mean_normalized_entropy"] = metrics.mean_normalized_entropy;
  line["mean_weight"] = metrics.mean_weight;
  line["mean_bag_weight"] = metrics.mean_bag_weight;
  line["mean_instance_weight"] = metrics.mean_instance_weight;
  line["test_accuracy"] = metrics.test_accuracy;
  return line.dump();  // nlohmann objects keep keys sorted
}

std::string format_summary_row(const SummaryRow& row) {
  char buf[64];
  auto real = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << row.mode << "," << row.bag_size << "," << row.seed << ","
      << real(row.test_accuracy) << "," << real(row.pseudo_label_accuracy)
      << "," << real(row.mean_normalized_entropy) << ","
      << real(row.mean_weight);
  return out.str();
}

void write_summary_csv(std::span<const SummaryRow> rows,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << kSummaryHeader << "\n";
  for (const SummaryRow& row : rows) out << format_summary_row(row) << "\n";
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<SummaryRow> read_summary_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kSummaryHeader) {
    throw std::runtime_error(path + ": missing or wrong summary header");
  }
  std::vector<SummaryRow> rows;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::istringstream fields(line);
    SummaryRow row;
    std::string cell;
    auto next = [&]() {
      if (!std::getline(fields, cell, ',')) {
        std::ostringstream msg;
        msg << path << ":" << line_number << ": short summary row";
        throw std::runtime_error(msg.str());
      }
      return cell;
    };
    row.mode = next();
    row.bag_size = std::stoi(next());
    row.seed = std::stoull(next());
    row.test_accuracy = std::stod(next());
    row.pseudo_label_accuracy = std::stod(next());
    row.mean_normalized_entropy = std::stod(next());
    row.mean_weight = std::stod(next());
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace llpdew
