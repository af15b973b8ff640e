#ifndef INTONATION_SYNTHETIC_CORPUS_H
#define INTONATION_SYNTHETIC_CORPUS_H

#include <cstdint>
#include <string>
#include <vector>

namespace intonation::pipeline {

/// Desk-scale corpus generator: every utterance is a single-phrase sentence
/// whose F0 follows one of up to 8 intonation templates (rise, fall,
/// rise-fall, fall-rise, high-flat, low-flat, early-peak, late-peak) with
/// smooth noise and random unvoiced gaps.
struct SyntheticParams {
  int n_utterances = 200;
  int templates = 4;  // M, at most 8
  std::uint64_t seed = 1;
  int min_frames = 50;
  int max_frames = 500;
};

extern const char* const kTemplateNames[8];

/// Writes manifest.tsv, per-utterance f0/align/text/word files, a run
/// metadata file, and the hidden template-label ground truth
/// (.template_labels.tsv). Byte-identical for identical params.
void generate_synthetic_corpus(const std::string& out_dir,
                               const SyntheticParams& params);

/// Template labels written by the generator, keyed by utterance id.
std::vector<std::pair<std::string, int>> read_template_labels(
    const std::string& path);

/// Fraction of points whose cluster's majority label matches their own.
double cluster_purity(const std::vector<int>& cluster_ids,
                      const std::vector<int>& labels);

}  // namespace intonation::pipeline

#endif  // INTONATION_SYNTHETIC_CORPUS_H
