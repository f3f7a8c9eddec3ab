#include "llpdew/synth.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "llpdew/rng.hpp"

namespace llpdew {

namespace {

Dataset assemble(const Matrix& samples, const std::vector<int>& labels,
                 const std::vector<std::size_t>& order, int class_count,
                 SplitTag tag) {
  Dataset out;
  out.class_count = class_count;
  out.split_tag = tag;
  out.features = Matrix(order.size(), samples.cols());
  out.labels.resize(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.features.set_row(i, samples.row(order[i]));
    out.labels[i] = labels[order[i]];
  }
  return out;
}

}  // namespace

BlobData generate_blobs(const BlobSpec& spec) {
  if (spec.class_count < 2) throw std::invalid_argument("blobs: class_count must be >= 2");
  if (spec.feature_dim < 1) throw std::invalid_argument("blobs: feature_dim must be >= 1");
  if (spec.samples_per_class < 1)
    throw std::invalid_argument("blobs: samples_per_class must be >= 1");
  if (spec.center_scale <= 0) throw std::invalid_argument("blobs: center_scale must be > 0");
  if (spec.within_class_sigma < 0)
    throw std::invalid_argument("blobs: within_class_sigma must be >= 0");

  RngEngine rng = make_stream(spec.seed, RngStream::data_gen);
  const std::size_t C = static_cast<std::size_t>(spec.class_count);
  const std::size_t D = static_cast<std::size_t>(spec.feature_dim);
  const std::size_t per_class = static_cast<std::size_t>(spec.samples_per_class);

  Matrix centers(C, D);
  std::uniform_real_distribution<double> center_dist(-spec.center_scale,
                                                     spec.center_scale);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t d = 0; d < D; ++d) centers(c, d) = center_dist(rng);

  Matrix samples(C * per_class, D);
  std::vector<int> labels(C * per_class);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t s = 0; s < per_class; ++s) {
      const std::size_t row = c * per_class + s;
      labels[row] = static_cast<int>(c);
      for (std::size_t d = 0; d < D; ++d) {
        double eps = spec.within_class_sigma > 0
                         ? spec.within_class_sigma * noise(rng)
                         : 0.0;
        samples(row, d) = centers(c, d) + eps;
      }
    }
  }

  // 80/20 split drawn per class so both splits stay exactly balanced.
  const std::size_t train_per_class = per_class * 4 / 5;
  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t c = 0; c < C; ++c) {
    std::vector<std::size_t> rows(per_class);
    std::iota(rows.begin(), rows.end(), c * per_class);
    std::shuffle(rows.begin(), rows.end(), rng);
    train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + train_per_class);
    test_rows.insert(test_rows.end(), rows.begin() + train_per_class, rows.end());
  }
  std::shuffle(train_rows.begin(), train_rows.end(), rng);
  std::shuffle(test_rows.begin(), test_rows.end(), rng);

  BlobData out;
  out.centers = centers;
  out.train = assemble(samples, labels, train_rows, spec.class_count, SplitTag::train);
  out.test = assemble(samples, labels, test_rows, spec.class_count, SplitTag::test);
  check_dataset(out.train);
  check_dataset(out.test);
  return out;
}

namespace {

std::runtime_error parse_error(const std::string& path, std::size_t row,
                               const std::string& what) {
  std::ostringstream msg;
  msg << path << ": row " << row << ": " << what;
  return std::runtime_error(msg.str());
}

}  // namespace

Dataset read_csv_dataset(const std::string& path, int class_count) {
  if (class_count < 2) throw std::invalid_argument("read_csv_dataset: class_count must be >= 2");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  std::size_t row_number = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++row_number;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (cells.size() < 2) throw parse_error(path, row_number, "expected features plus label");
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      std::ostringstream what;
      what << "expected " << width << " columns, found " << cells.size();
      throw parse_error(path, row_number, what.str());
    }
    std::vector<double> features(width - 1);
    for (std::size_t j = 0; j + 1 < width; ++j) {
      const std::string& text = cells[j];
      char* end = nullptr;
      features[j] = std::strtod(text.c_str(), &end);
      if (end == text.c_str() || (end && *end != '\0'))
        throw parse_error(path, row_number, "non-numeric cell '" + text + "'");
    }
    const std::string& label_text = cells.back();
    int label = 0;
    auto [ptr, ec] = std::from_chars(label_text.data(),
                                     label_text.data() + label_text.size(), label);
    if (ec != std::errc() || ptr != label_text.data() + label_text.size())
      throw parse_error(path, row_number, "label is not an integer: '" + label_text + "'");
    if (label < 0 || label >= class_count) {
      std::ostringstream what;
      what << "label " << label << " outside [0, " << class_count << ")";
      throw parse_error(path, row_number, what.str());
    }
    rows.push_back(std::move(features));
    labels.push_back(label);
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");

  Dataset out;
  out.class_count = class_count;
  out.features = Matrix(rows.size(), width - 1);
  for (std::size_t i = 0; i < rows.size(); ++i) out.features.set_row(i, rows[i]);
  out.labels = std::move(labels);
  check_dataset(out);
  return out;
}

void write_csv_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  char buf[40];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t j = 0; j < dataset.feature_dim(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", dataset.features(i, j));
      out << buf << ',';
    }
    out << dataset.labels[i] << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace llpdew
