#ifndef INTONATION_CHECKPOINT_H
#define INTONATION_CHECKPOINT_H

#include <memory>
#include <string>

#include "intonation/f0_features.h"
#include "intonation/prosody_models.h"

namespace intonation::model {

/// Versioned binary container: architecture hyperparameters, phone
/// inventory, normalization stats and every named parameter as a
/// little-endian float64 payload. Byte-stable for identical models.
void save_checkpoint(const std::string& path, const ProsodyModel& model,
                     const f0::NormStats& stats);

struct LoadedCheckpoint {
  std::unique_ptr<ProsodyModel> model;
  f0::NormStats stats;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace intonation::model

#endif  // INTONATION_CHECKPOINT_H
