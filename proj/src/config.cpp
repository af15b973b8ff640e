#include "intonation/config.h"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace intonation::pipeline {

void Config::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("config: ") + what);
  };
  require(latent_dim > 0, "latent_dim must be > 0");
  require(k_codes > 0, "k_codes must be > 0");
  require(ff_units > 0 && gru_units > 0 && gru_layers > 0,
          "layer sizes must be > 0");
  require(batch_size > 0, "batch_size must be > 0");
  require(total_epochs > 0, "total_epochs must be > 0");
  require(warmup_epochs > 0, "warmup_epochs must be > 0");
  require(warmup_epochs < total_epochs, "warmup_epochs must be < total_epochs");
  require(peak_lr > 0, "peak_lr must be > 0");
  require(lr_decay_exponent > 0, "lr_decay_exponent must be > 0");
  require(kl_zero_epochs >= 0 && kl_ramp_epochs > 0, "bad KL schedule");
  require(kl_max >= 0, "kl_max must be >= 0");
  require(pseudo_len_min > 0 && pseudo_len_step > 0 && pseudo_repeats > 0,
          "bad pseudo-input ladder");
  require(save_every_epochs >= 0, "save_every_epochs must be >= 0");
}

nn::TrainSchedule Config::schedule() const {
  nn::TrainSchedule sched;
  sched.peak_lr = peak_lr;
  sched.warmup_epochs = warmup_epochs;
  sched.kl_zero_epochs = kl_zero_epochs;
  sched.kl_ramp_epochs = kl_ramp_epochs;
  sched.kl_max = kl_max;
  sched.total_epochs = total_epochs;
  sched.batch_size = batch_size;
  sched.decay_exponent = lr_decay_exponent;
  return sched;
}

model::ModelConfig Config::model_config(model::ModelKind kind,
                                        std::vector<std::string> phones) const {
  model::ModelConfig cfg;
  cfg.kind = kind;
  cfg.ff_units = ff_units;
  cfg.gru_units = gru_units;
  cfg.gru_layers = gru_layers;
  cfg.latent_dim = latent_dim;
  cfg.phones = std::move(phones);
  if (kind == model::ModelKind::VaeVamp) {
    cfg.pseudo_lengths = model::ModelConfig::length_ladder(
        pseudo_len_min, pseudo_len_step, pseudo_repeats, k_codes);
  }
  return cfg;
}

std::string Config::canonical_text() const {
  char buf[2048];
  std::snprintf(
      buf, sizeof(buf),
      "seed = %llu\n"
      "latent_dim = %zu\n"
      "k_codes = %zu\n"
      "ff_units = %zu\n"
      "gru_units = %zu\n"
      "gru_layers = %zu\n"
      "batch_size = %d\n"
      "total_epochs = %d\n"
      "warmup_epochs = %d\n"
      "peak_lr = %.17g\n"
      "lr_decay_exponent = %.17g\n"
      "kl_zero_epochs = %d\n"
      "kl_ramp_epochs = %d\n"
      "kl_max = %.17g\n"
      "pseudo_len_min = %zu\n"
      "pseudo_len_step = %zu\n"
      "pseudo_repeats = %zu\n"
      "save_every_epochs = %d\n",
      static_cast<unsigned long long>(seed), latent_dim, k_codes, ff_units,
      gru_units, gru_layers, batch_size, total_epochs, warmup_epochs, peak_lr,
      lr_decay_exponent, kl_zero_epochs, kl_ramp_epochs, kl_max,
      pseudo_len_min, pseudo_len_step, pseudo_repeats, save_every_epochs);
  return buf;
}

void Config::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FileMissing("cannot write config: " + path);
  out << canonical_text();
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileMissing("cannot open config: " + path);
  Config cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError("config line is not 'key = value'", line_no);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw FormatError("empty config key or value", line_no);
    try {
      if (key == "seed")
        cfg.seed = std::stoull(value);
      else if (key == "latent_dim")
        cfg.latent_dim = std::stoul(value);
      else if (key == "k_codes")
        cfg.k_codes = std::stoul(value);
      else if (key == "ff_units")
        cfg.ff_units = std::stoul(value);
      else if (key == "gru_units")
        cfg.gru_units = std::stoul(value);
      else if (key == "gru_layers")
        cfg.gru_layers = std::stoul(value);
      else if (key == "batch_size")
        cfg.batch_size = std::stoi(value);
      else if (key == "total_epochs")
        cfg.total_epochs = std::stoi(value);
      else if (key == "warmup_epochs")
        cfg.warmup_epochs = std::stoi(value);
      else if (key == "peak_lr")
        cfg.peak_lr = std::stod(value);
      else if (key == "lr_decay_exponent")
        cfg.lr_decay_exponent = std::stod(value);
      else if (key == "kl_zero_epochs")
        cfg.kl_zero_epochs = std::stoi(value);
      else if (key == "kl_ramp_epochs")
        cfg.kl_ramp_epochs = std::stoi(value);
      else if (key == "kl_max")
        cfg.kl_max = std::stod(value);
      else if (key == "pseudo_len_min")
        cfg.pseudo_len_min = std::stoul(value);
      else if (key == "pseudo_len_step")
        cfg.pseudo_len_step = std::stoul(value);
      else if (key == "pseudo_repeats")
        cfg.pseudo_repeats = std::stoul(value);
      else if (key == "save_every_epochs")
        cfg.save_every_epochs = std::stoi(value);
      else
        throw ConfigError("unknown config key: " + key);
    } catch (const std::invalid_argument&) {
      throw FormatError("bad value for config key " + key, line_no);
    } catch (const std::out_of_range&) {
      throw FormatError("value out of range for config key " + key, line_no);
    }
  }
  cfg.validate();
  return cfg;
}

std::string config_hash(const Config& config) {
  const std::string text = config.canonical_text();
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace intonation::pipeline
