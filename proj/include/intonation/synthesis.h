#ifndef INTONATION_SYNTHESIS_H
#define INTONATION_SYNTHESIS_H

#include <string>
#include <vector>

#include "intonation/corpus.h"
#include "intonation/f0_features.h"
#include "intonation/intonation_codes.h"
#include "intonation/prosody_models.h"

namespace intonation::synth {

/// Everything needed to render one sentence: phones with durations, the
/// token sequence, and the phrase segmentation in frames.
struct SentenceSpec {
  std::string id;
  std::vector<phrase::Token> tokens;
  std::vector<pipeline::PhoneSpan> phones;  // tile [0, T)
  std::vector<std::pair<int, int>> phrase_ranges;
  int total_frames = 0;
};

/// Sectioned text format: [id] (optional), [text], [phones], then either
/// [words] (phrase ranges derived via the parser) or explicit [phrases].
SentenceSpec load_sentence_spec(const std::string& path,
                                const phrase::Lexicon& lexicon);

struct SynthesisOptions {
  /// Re-apply unvoiced frames wherever the alignment carries a silence
  /// phone. Off by default: generation is fully voiced.
  bool silence_unvoiced = false;
  std::vector<std::string> silence_phones = {"sil", "pau", "sp"};
};

/// Renders one F0 contour for a sentence: one intonation code per phrase,
/// decoded to feature means and smoothed with the trajectory solve.
/// Deterministic: codes are used directly, nothing is sampled.
f0::F0Contour synthesize_f0(const SentenceSpec& spec,
                            const std::vector<int>& code_ids,
                            const model::ProsodyModel& model,
                            const codes::Codebook& codebook,
                            const f0::NormStats& stats,
                            const SynthesisOptions& options = {});

struct RenderResult {
  std::vector<int> code_ids;
  std::vector<std::string> contour_paths;
  std::string manifest_path;
  std::string plot_data_path;
};

/// One rendition per codebook entry (single-phrase sentences: the same code
/// drives every phrase). Writes contour files, a manifest, and a
/// tab-separated plot-data file (frame, Hz per code). Nothing is written if
/// any rendition fails.
RenderResult render_all_codes(const SentenceSpec& spec,
                              const model::ProsodyModel& model,
                              const codes::Codebook& codebook,
                              const f0::NormStats& stats,
                              const std::string& out_dir,
                              const SynthesisOptions& options = {});

/// Symmetric matrix of RMSE (Hz) between renditions over frames voiced in
/// both; zero diagonal.
nn::Mat pairwise_distinctness(const std::vector<f0::F0Contour>& renditions);

}  // namespace intonation::synth

#endif  // INTONATION_SYNTHESIS_H
