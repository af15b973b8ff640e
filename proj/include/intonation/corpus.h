#ifndef INTONATION_CORPUS_H
#define INTONATION_CORPUS_H

#include <string>
#include <vector>

#include "intonation/f0_features.h"
#include "intonation/phrase_parser.h"
#include "intonation/prosody_models.h"

namespace intonation::pipeline {

/// One phone interval from a forced-alignment file, [start, end) in frames.
struct PhoneSpan {
  int start = 0;
  int end = 0;
  std::string phone;
};

/// A corpus utterance with everything the models need.
struct Utterance {
  std::string id;
  std::vector<phrase::Token> tokens;
  f0::F0Contour contour;
  std::vector<PhoneSpan> phones;         // tile [0, T)
  std::vector<phrase::WordSpan> words;   // one per token, tile [0, T)
  std::vector<std::pair<int, int>> phrase_ranges;
  bool words_approximate = false;  // spans came from the heuristic mapper

  int total_frames() const { return static_cast<int>(contour.size()); }
};

/// Alignment file: one `start_frame end_frame phone` line per phone,
/// contiguous from frame 0.
std::vector<PhoneSpan> read_alignment(const std::string& path);
void write_alignment(const std::string& path,
                     const std::vector<PhoneSpan>& spans);

/// Word-span file: one `start_frame end_frame` line per word, token order.
std::vector<phrase::WordSpan> read_word_spans(const std::string& path);
void write_word_spans(const std::string& path,
                      const std::vector<phrase::WordSpan>& spans);

/// Distributes an utterance's phone spans over its words when no word
/// alignment exists: cut points proportional to word letter counts.
/// Approximate by construction.
std::vector<phrase::WordSpan> heuristic_word_spans(
    const std::vector<phrase::Token>& tokens,
    const std::vector<PhoneSpan>& phones);

/// Loads a manifest (`id  f0  align  text [words]`, tab-separated, paths
/// relative to the manifest) and validates every utterance invariant.
std::vector<Utterance> load_corpus(const std::string& manifest_path,
                                   const phrase::Lexicon& lexicon);

/// Sorted unique phone symbols across the corpus.
std::vector<std::string> collect_phone_inventory(
    const std::vector<Utterance>& utterances);

f0::NormStats corpus_norm_stats(const std::vector<Utterance>& utterances);

/// Normalized features + phrase ranges + frame-level phone ids for training.
model::TrainItem utterance_to_item(const Utterance& utterance,
                                   const f0::NormStats& stats,
                                   const std::vector<std::string>& phones);

/// Per-frame phone ids from spans, using the inventory order.
std::vector<int> frame_phone_ids(const std::vector<PhoneSpan>& spans,
                                 const std::vector<std::string>& phones);

/// Norm-stats text file (key value lines, full precision).
void write_norm_stats(const std::string& path, const f0::NormStats& stats);
f0::NormStats read_norm_stats(const std::string& path);

}  // namespace intonation::pipeline

#endif  // INTONATION_CORPUS_H
