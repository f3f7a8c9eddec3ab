#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "llpdew/types.hpp"

namespace llpdew {

/// Gaussian-blob generator spec for desk-scale experiments.
struct BlobSpec {
  int class_count = 4;
  int feature_dim = 10;
  int samples_per_class = 500;
  double center_scale = 3.0;
  double within_class_sigma = 1.0;
  std::uint64_t seed = 1;
};

struct BlobData {
  Dataset train;
  Dataset test;
  Matrix centers;  // class_count x feature_dim
};

/// Class centers uniform in [-center_scale, center_scale]^D, Gaussian
/// samples around them, seeded 80/20 split per class. Classes stay exactly
/// balanced in both splits.
BlobData generate_blobs(const BlobSpec& spec);

/// Comma-separated, no header, last column the integer label.
Dataset read_csv_dataset(const std::string& path, int class_count);
void write_csv_dataset(const Dataset& dataset, const std::string& path);

}  // namespace llpdew
