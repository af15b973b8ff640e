#include "intonation/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace intonation::model {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are little-endian");

namespace {

constexpr char kMagic[8] = {'I', 'N', 'T', 'O', 'N', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_str(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
double read_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
std::string read_str(std::istream& in) {
  const std::uint64_t len = read_u64(in);
  if (len > (1ull << 20)) throw FormatError("checkpoint: oversized string");
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const ProsodyModel& model,
                     const f0::NormStats& stats) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileMissing("cannot write checkpoint: " + path);
  const ModelConfig& cfg = model.config();

  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kVersion);
  write_u32(out, cfg.kind == ModelKind::Ae ? 0u : 1u);
  write_u64(out, cfg.feat_dim);
  write_u64(out, cfg.ff_units);
  write_u64(out, cfg.gru_units);
  write_u64(out, cfg.gru_layers);
  write_u64(out, cfg.latent_dim);
  write_f64(out, stats.mean);
  write_f64(out, stats.std);
  write_f64(out, stats.global_std_static);
  write_f64(out, stats.global_std_delta);
  write_f64(out, stats.global_std_deltadelta);
  write_u64(out, cfg.phones.size());
  for (const auto& phone : cfg.phones) write_str(out, phone);
  write_u64(out, cfg.pseudo_lengths.size());
  for (std::size_t len : cfg.pseudo_lengths) write_u64(out, len);

  const nn::ParamStore& store = model.params();
  write_u64(out, store.count());
  for (std::size_t i = 0; i < store.count(); ++i) {
    const nn::ParamTensor& p = store[i];
    write_str(out, p.name);
    write_u64(out, p.shape.size());
    for (std::size_t d : p.shape) write_u64(out, d);
    out.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(double)));
  }
  if (!out) throw FileMissing("checkpoint write failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileMissing("cannot open checkpoint: " + path);

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw FormatError("not a checkpoint file: " + path);
  const std::uint32_t version = read_u32(in);
  if (version != kVersion)
    throw FormatError("unsupported checkpoint version " +
                      std::to_string(version));

  ModelConfig cfg;
  cfg.kind = read_u32(in) == 0 ? ModelKind::Ae : ModelKind::VaeVamp;
  cfg.feat_dim = read_u64(in);
  cfg.ff_units = read_u64(in);
  cfg.gru_units = read_u64(in);
  cfg.gru_layers = read_u64(in);
  cfg.latent_dim = read_u64(in);
  LoadedCheckpoint loaded;
  loaded.stats.mean = read_f64(in);
  loaded.stats.std = read_f64(in);
  loaded.stats.global_std_static = read_f64(in);
  loaded.stats.global_std_delta = read_f64(in);
  loaded.stats.global_std_deltadelta = read_f64(in);
  const std::uint64_t n_phones = read_u64(in);
  for (std::uint64_t i = 0; i < n_phones; ++i)
    cfg.phones.push_back(read_str(in));
  const std::uint64_t n_pseudo = read_u64(in);
  for (std::uint64_t i = 0; i < n_pseudo; ++i)
    cfg.pseudo_lengths.push_back(read_u64(in));
  if (!in) throw FormatError("truncated checkpoint header: " + path);

  loaded.model = std::make_unique<ProsodyModel>(cfg, /*init_seed=*/0);
  nn::ParamStore& store = loaded.model->params();
  const std::uint64_t n_params = read_u64(in);
  if (n_params != store.count())
    throw FormatError("checkpoint parameter count mismatch");
  for (std::uint64_t i = 0; i < n_params; ++i) {
    const std::string name = read_str(in);
    nn::ParamTensor* p = store.find(name);
    if (!p) throw FormatError("unknown parameter in checkpoint: " + name);
    const std::uint64_t ndim = read_u64(in);
    std::vector<std::size_t> shape(ndim);
    for (auto& d : shape) d = read_u64(in);
    if (shape != p->shape)
      throw FormatError("shape mismatch for parameter " + name);
    in.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!in) throw FormatError("truncated checkpoint payload: " + path);
  return loaded;
}

}  // namespace intonation::model
