#ifndef INTONATION_INTONATION_CODES_H
#define INTONATION_INTONATION_CODES_H

#include <cstdint>
#include <string>
#include <vector>

#include "intonation/prosody_models.h"

namespace intonation::codes {

enum class CodeSource { KMeansCentroid, VampMode };

/// One discrete intonation code: a point in latent space with provenance.
struct IntonationCode {
  int id = 0;
  std::vector<double> vector;
  CodeSource source = CodeSource::KMeansCentroid;
  int pseudo_length = -1;  // VampMode only
};

struct Codebook {
  std::vector<IntonationCode> codes;
  std::size_t latent_dim = 0;

  std::size_t size() const { return codes.size(); }
  const IntonationCode& at(int id) const;
};

/// k-means over phrase embeddings: k-means++ seeding, Lloyd iterations until
/// the largest centroid shift drops below 1e-6 (or 300 iterations). Empty
/// clusters are reseeded to the point farthest from its centroid. The
/// within-cluster objective is checked to be nonincreasing across plain
/// Lloyd iterations.
Codebook kmeans_fit(const std::vector<std::vector<double>>& embeddings,
                    std::size_t k, std::uint64_t seed);

/// Nearest code by Euclidean distance; ties break toward the lowest id.
int assign(const std::vector<double>& embedding, const Codebook& codebook);

/// Intonation codes of a VAE-VAMP model: the posterior mean of each
/// pseudo-input, tagged with its sequence length.
Codebook extract_vamp_codes(const model::ProsodyModel& model);

/// Structured-text codebook format; round-trips bit-exactly.
void save_codebook(const std::string& path, const Codebook& codebook);
Codebook load_codebook(const std::string& path);

}  // namespace intonation::codes

#endif  // INTONATION_INTONATION_CODES_H
