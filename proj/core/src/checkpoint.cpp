#include "relpatch/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace relpatch {

namespace {

constexpr char kMagic[4] = {'R', 'L', 'V', 'T'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_i32(std::string& out, std::int32_t v) { put_u32(out, static_cast<std::uint32_t>(v)); }

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

struct Reader {
  std::string data;
  size_t at = 0;

  void need(size_t n, const char* what) {
    if (at + n > data.size())
      throw IoError("checkpoint truncated at byte " + std::to_string(at) + " reading " + what);
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint8_t>(data[at]) |
                      (static_cast<std::uint16_t>(static_cast<std::uint8_t>(data[at + 1])) << 8);
    at += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(data[at + i])) << (8 * i);
    at += 4;
    return v;
  }
  std::int32_t i32(const char* what) { return static_cast<std::int32_t>(u32(what)); }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return static_cast<std::uint8_t>(data[at++]);
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::string bytes(size_t n, const char* what) {
    need(n, what);
    std::string s = data.substr(at, n);
    at += n;
    return s;
  }
};

}  // namespace

const NamedTensor<float>* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

template <typename S>
void save_checkpoint(const std::string& path, const ModelConfig& cfg,
                     const std::vector<NamedTensor<S>>& params) {
  std::string out;
  out.append(kMagic, 4);
  put_u16(out, kVersion);
  put_i32(out, cfg.img_h);
  put_i32(out, cfg.img_w);
  put_i32(out, cfg.patch_size);
  put_i32(out, cfg.channels);
  put_i32(out, cfg.depth);
  put_i32(out, cfg.heads);
  put_i32(out, cfg.dim);
  put_i32(out, cfg.mlp_ratio);
  put_i32(out, cfg.num_classes);
  out.push_back(cfg.use_pos_embed ? 1 : 0);
  out.push_back(cfg.use_class_token ? 1 : 0);

  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    put_u32(out, static_cast<std::uint32_t>(p.name.size()));
    out.append(p.name);
    put_u32(out, static_cast<std::uint32_t>(p.tensor.rank()));
    for (int d : p.tensor.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    for (S v : p.tensor.values()) put_f32(out, static_cast<float>(v));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("short write to '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint '" + path + "'");
  Reader r;
  r.data.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());

  if (r.bytes(4, "magic") != std::string(kMagic, 4))
    throw IoError("'" + path + "' is not a checkpoint (bad magic)");
  const auto version = r.u16("version");
  if (version != kVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));

  Checkpoint ckpt;
  ckpt.config.img_h = r.i32("img_h");
  ckpt.config.img_w = r.i32("img_w");
  ckpt.config.patch_size = r.i32("patch_size");
  ckpt.config.channels = r.i32("channels");
  ckpt.config.depth = r.i32("depth");
  ckpt.config.heads = r.i32("heads");
  ckpt.config.dim = r.i32("dim");
  ckpt.config.mlp_ratio = r.i32("mlp_ratio");
  ckpt.config.num_classes = r.i32("num_classes");
  ckpt.config.use_pos_embed = r.u8("use_pos_embed") != 0;
  ckpt.config.use_class_token = r.u8("use_class_token") != 0;
  ckpt.config.validate();

  const auto count = r.u32("tensor count");
  for (std::uint32_t t = 0; t < count; ++t) {
    const auto name_len = r.u32("name length");
    std::string name = r.bytes(name_len, "name");
    const auto rank = r.u32("rank");
    std::vector<int> shape;
    std::int64_t n = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape.push_back(static_cast<int>(r.u32("dim")));
      n *= shape.back();
    }
    std::vector<float> vals(static_cast<size_t>(n));
    for (auto& v : vals) v = r.f32("values");
    ckpt.tensors.push_back({std::move(name), TensorF::from_values(std::move(shape), std::move(vals))});
  }
  if (r.at != r.data.size())
    throw IoError("checkpoint has " + std::to_string(r.data.size() - r.at) +
                  " trailing bytes at offset " + std::to_string(r.at));
  return ckpt;
}

template <typename S>
size_t load_into(const Checkpoint& ckpt, std::vector<NamedTensor<S>> params, bool require_all) {
  size_t loaded = 0;
  for (auto& p : params) {
    const auto* src = ckpt.find(p.name);
    if (!src) {
      if (require_all) throw IoError("checkpoint is missing tensor '" + p.name + "'");
      continue;
    }
    if (src->tensor.shape() != p.tensor.shape())
      throw IoError("checkpoint tensor '" + p.name + "' has mismatched shape");
    auto dst = p.tensor.values();
    auto sv = src->tensor.values();
    for (std::int64_t i = 0; i < src->tensor.size(); ++i) dst[i] = static_cast<S>(sv[i]);
    ++loaded;
  }
  return loaded;
}

bool same_architecture(const ModelConfig& a, const ModelConfig& b) {
  return a.img_h == b.img_h && a.img_w == b.img_w && a.patch_size == b.patch_size &&
         a.channels == b.channels && a.depth == b.depth && a.heads == b.heads && a.dim == b.dim &&
         a.mlp_ratio == b.mlp_ratio && a.num_classes == b.num_classes &&
         a.use_class_token == b.use_class_token;
}

template void save_checkpoint<float>(const std::string&, const ModelConfig&,
                                     const std::vector<NamedTensor<float>>&);
template void save_checkpoint<double>(const std::string&, const ModelConfig&,
                                      const std::vector<NamedTensor<double>>&);
template size_t load_into<float>(const Checkpoint&, std::vector<NamedTensor<float>>, bool);
template size_t load_into<double>(const Checkpoint&, std::vector<NamedTensor<double>>, bool);

}  // namespace relpatch
