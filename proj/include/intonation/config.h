#ifndef INTONATION_CONFIG_H
#define INTONATION_CONFIG_H

#include <cstdint>
#include <string>
#include <vector>

#include "intonation/neural_core.h"
#include "intonation/prosody_models.h"

namespace intonation::pipeline {

/// Every tunable of the pipeline, persisted as `key = value` text. Unknown
/// keys are rejected on load.
struct Config {
  std::uint64_t seed = 1;
  std::size_t latent_dim = 16;
  std::size_t k_codes = 20;
  std::size_t ff_units = 256;
  std::size_t gru_units = 64;
  std::size_t gru_layers = 3;
  int batch_size = 32;
  int total_epochs = 100;
  int warmup_epochs = 8;
  double peak_lr = 0.005;
  double lr_decay_exponent = 0.5;
  int kl_zero_epochs = 5;
  int kl_ramp_epochs = 20;
  double kl_max = 0.001;
  std::size_t pseudo_len_min = 50;
  std::size_t pseudo_len_step = 50;
  std::size_t pseudo_repeats = 2;
  int save_every_epochs = 0;  // 0 = final checkpoint only

  void validate() const;

  nn::TrainSchedule schedule() const;
  model::ModelConfig model_config(model::ModelKind kind,
                                  std::vector<std::string> phones) const;

  static Config load(const std::string& path);
  void save(const std::string& path) const;

  /// Canonical serialization (the save format) for hashing and comparison.
  std::string canonical_text() const;

  bool operator==(const Config& other) const = default;
};

/// FNV-1a hash of the canonical config text, as fixed-width hex.
std::string config_hash(const Config& config);

}  // namespace intonation::pipeline

#endif  // INTONATION_CONFIG_H
