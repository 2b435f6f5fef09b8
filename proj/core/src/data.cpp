#include "relpatch/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "relpatch/errors.hpp"
#include "relpatch/rng.hpp"

namespace relpatch {

namespace {

constexpr size_t kCifarRecordBytes = 3073;  // 1 label + 3 * 32 * 32
constexpr size_t kCifarBatchRecords = 10000;

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("missing file: " + path);
  f.seekg(0, std::ios::end);
  const auto size = static_cast<size_t>(f.tellg());
  f.seekg(0);
  std::vector<unsigned char> bytes(size);
  if (size > 0) f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!f) throw IoError("failed reading " + path);
  return bytes;
}

void hue_to_rgb(double hue01, double value, float out[3]) {
  const double h = std::fmod(hue01, 1.0) * 6.0;
  const int sector = static_cast<int>(h);
  const double f = h - sector;
  const double p = 0.0, q = value * (1.0 - f), t = value * f;
  double r, g, b;
  switch (sector) {
    case 0: r = value, g = t, b = p; break;
    case 1: r = q, g = value, b = p; break;
    case 2: r = p, g = value, b = t; break;
    case 3: r = p, g = q, b = value; break;
    case 4: r = t, g = p, b = value; break;
    default: r = value, g = p, b = q; break;
  }
  out[0] = static_cast<float>(r);
  out[1] = static_cast<float>(g);
  out[2] = static_cast<float>(b);
}

ImageRecord gradient_field_image(int label, int num_classes, int res, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> wobble(-0.35, 0.35);
  std::uniform_real_distribution<double> noise(-0.04, 0.04);
  const double sector = 2.0 * 3.14159265358979323846 / num_classes;
  const double theta = sector * (label + 0.5 + wobble(rng));
  const double nx = std::cos(theta), ny = std::sin(theta);
  const double norm = std::abs(nx) + std::abs(ny);

  const size_t plane = static_cast<size_t>(res) * res;
  std::vector<float> v(3 * plane);
  for (int y = 0; y < res; ++y)
    for (int x = 0; x < res; ++x) {
      const double u = res > 1 ? 2.0 * x / (res - 1) - 1.0 : 0.0;
      const double w = res > 1 ? 2.0 * y / (res - 1) - 1.0 : 0.0;
      const double g = ((nx * u + ny * w) / norm + 1.0) / 2.0;
      const double phase = 0.5 + 0.5 * std::sin(3.14159265358979323846 * (u * ny - w * nx));
      const size_t i = static_cast<size_t>(y) * res + x;
      v[i] = static_cast<float>(std::clamp(g + noise(rng), 0.0, 1.0));
      v[plane + i] = static_cast<float>(std::clamp(1.0 - g + noise(rng), 0.0, 1.0));
      v[2 * plane + i] = static_cast<float>(std::clamp(phase + noise(rng), 0.0, 1.0));
    }
  return {TensorF::from_values({3, res, res}, std::move(v)), label};
}

ImageRecord colored_shape_image(int label, int num_classes, int res, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> noise(-0.03, 0.03);
  const size_t plane = static_cast<size_t>(res) * res;
  std::vector<float> v(3 * plane);
  for (int y = 0; y < res; ++y) {
    const double bg = 0.2 + (res > 1 ? 0.3 * y / (res - 1) : 0.0);
    for (int x = 0; x < res; ++x) {
      const size_t i = static_cast<size_t>(y) * res + x;
      for (int c = 0; c < 3; ++c)
        v[c * plane + i] = static_cast<float>(std::clamp(bg + noise(rng), 0.0, 1.0));
    }
  }

  float color[3];
  hue_to_rgb(static_cast<double>(label) / num_classes, 0.9, color);
  const int lo = std::max(1, res / 3), hi = std::max(lo, 2 * res / 3);
  std::uniform_int_distribution<int> side(lo, hi);
  const int sw = side(rng), sh = side(rng);
  std::uniform_int_distribution<int> oy(0, res - sh), ox(0, res - sw);
  const int y0 = oy(rng), x0 = ox(rng);
  for (int y = y0; y < y0 + sh; ++y)
    for (int x = x0; x < x0 + sw; ++x) {
      const size_t i = static_cast<size_t>(y) * res + x;
      for (int c = 0; c < 3; ++c)
        v[c * plane + i] = static_cast<float>(std::clamp(color[c] + noise(rng), 0.0, 1.0));
    }
  return {TensorF::from_values({3, res, res}, std::move(v)), label};
}

}  // namespace

Dataset parse_cifar_batch(const std::vector<unsigned char>& bytes, const std::string& origin) {
  if (bytes.empty() || bytes.size() % kCifarRecordBytes != 0)
    throw IoError(origin + ": truncated at byte offset " +
                  std::to_string(bytes.size() - bytes.size() % kCifarRecordBytes) + " (" +
                  std::to_string(bytes.size()) + " bytes is not a whole number of 3073-byte records)");
  Dataset out;
  out.reserve(bytes.size() / kCifarRecordBytes);
  for (size_t off = 0; off < bytes.size(); off += kCifarRecordBytes) {
    const int label = bytes[off];
    if (label > 9)
      throw IoError(origin + ": invalid label " + std::to_string(label) + " at byte offset " +
                    std::to_string(off));
    std::vector<float> v(3072);
    for (size_t i = 0; i < 3072; ++i) v[i] = static_cast<float>(bytes[off + 1 + i]) / 255.0f;
    out.push_back({TensorF::from_values({3, 32, 32}, std::move(v)), label});
  }
  return out;
}

std::vector<unsigned char> serialize_cifar_record(const ImageRecord& rec) {
  if (rec.pixels.shape() != std::vector<int>{3, 32, 32})
    throw DimError("serialize_cifar_record: pixels must be {3,32,32}");
  std::vector<unsigned char> bytes(kCifarRecordBytes);
  bytes[0] = static_cast<unsigned char>(rec.label);
  auto v = rec.pixels.values();
  for (size_t i = 0; i < 3072; ++i)
    bytes[1 + i] = static_cast<unsigned char>(std::lround(v[i] * 255.0f));
  return bytes;
}

Cifar10 load_cifar10(const std::string& dir) {
  namespace fs = std::filesystem;
  std::string root = dir;
  if (fs::exists(fs::path(dir) / "cifar-10-batches-bin" / "data_batch_1.bin"))
    root = (fs::path(dir) / "cifar-10-batches-bin").string();

  auto load_batch = [&](const std::string& name) {
    const std::string path = (fs::path(root) / name).string();
    auto bytes = read_file(path);
    if (bytes.size() != kCifarRecordBytes * kCifarBatchRecords)
      throw IoError(path + ": truncated at byte offset " + std::to_string(bytes.size()) +
                    " (expected " + std::to_string(kCifarRecordBytes * kCifarBatchRecords) +
                    " bytes)");
    return parse_cifar_batch(bytes, path);
  };

  Cifar10 out;
  for (int b = 1; b <= 5; ++b) {
    auto batch = load_batch("data_batch_" + std::to_string(b) + ".bin");
    out.train.insert(out.train.end(), std::make_move_iterator(batch.begin()),
                     std::make_move_iterator(batch.end()));
  }
  out.test = load_batch("test_batch.bin");
  return out;
}

Dataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.count < 1) throw ArgError("make_synthetic: count must be >= 1");
  if (spec.resolution < 2) throw ArgError("make_synthetic: resolution must be >= 2");
  if (spec.num_classes < 1) throw ArgError("make_synthetic: num_classes must be >= 1");

  ImageRecord (*gen)(int, int, int, std::mt19937_64&) = nullptr;
  if (spec.generator == "gradient-fields")
    gen = gradient_field_image;
  else if (spec.generator == "colored-shapes")
    gen = colored_shape_image;
  else
    throw ConfigError("make_synthetic: unknown generator '" + spec.generator + "'");

  Dataset out;
  out.reserve(static_cast<size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    auto rng = make_rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
    out.push_back(gen(i % spec.num_classes, spec.num_classes, spec.resolution, rng));
  }
  return out;
}

}  // namespace relpatch
