#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relpatch/tensor.hpp"

namespace relpatch {

/// One labeled image: pixels are {C,H,W} in [0,1].
struct ImageRecord {
  TensorF pixels;
  int label = 0;
};

using Dataset = std::vector<ImageRecord>;

struct Cifar10 {
  Dataset train;  // 50,000 records
  Dataset test;   // 10,000 records
};

/// Parses CIFAR-10 binary records: 1 label byte then 3072 pixel bytes
/// (R, G, B planes of a 32x32 image), scaled to [0,1]. `origin` names the
/// source in errors. The byte count must be an exact multiple of 3073.
Dataset parse_cifar_batch(const std::vector<unsigned char>& bytes, const std::string& origin);

/// Inverse of parse_cifar_batch for one record; reproduces the source bytes.
std::vector<unsigned char> serialize_cifar_record(const ImageRecord& rec);

/// Loads the standard binary batches (data_batch_1..5.bin, test_batch.bin)
/// from `dir` or `dir`/cifar-10-batches-bin.
Cifar10 load_cifar10(const std::string& dir);

/// Synthetic dataset recipe. Generators:
///   gradient-fields  - smooth directional gradient; class encoded in the
///                      gradient orientation sector.
///   colored-shapes   - one filled rectangle on a gradient background; class
///                      encoded in the shape color.
struct SyntheticSpec {
  std::uint64_t seed = 0;
  int count = 128;
  int resolution = 32;
  int num_classes = 2;
  std::string generator = "gradient-fields";
};

Dataset make_synthetic(const SyntheticSpec& spec);

}  // namespace relpatch
