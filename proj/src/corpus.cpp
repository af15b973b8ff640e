#include "intonation/corpus.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace intonation::pipeline {

namespace fs = std::filesystem;

std::vector<PhoneSpan> read_alignment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileMissing("cannot open alignment file: " + path);
  std::vector<PhoneSpan> spans;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    PhoneSpan span;
    ss >> span.start >> span.end >> span.phone;
    if (ss.fail() || span.phone.empty())
      throw FormatError("alignment line needs 'start end phone'", line_no);
    spans.push_back(std::move(span));
  }
  int cursor = 0;
  for (const auto& span : spans) {
    if (span.start != cursor || span.end <= span.start)
      throw AlignmentGap("alignment not contiguous at frame " +
                         std::to_string(cursor) + " in " + path);
    cursor = span.end;
  }
  if (spans.empty()) throw FormatError("empty alignment file: " + path);
  return spans;
}

void write_alignment(const std::string& path,
                     const std::vector<PhoneSpan>& spans) {
  std::ofstream out(path);
  if (!out) throw FileMissing("cannot write alignment file: " + path);
  for (const auto& span : spans)
    out << span.start << ' ' << span.end << ' ' << span.phone << '\n';
}

std::vector<phrase::WordSpan> read_word_spans(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileMissing("cannot open word-span file: " + path);
  std::vector<phrase::WordSpan> spans;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    phrase::WordSpan span;
    ss >> span.start >> span.end;
    if (ss.fail())
      throw FormatError("word-span line needs 'start end'", line_no);
    spans.push_back(span);
  }
  return spans;
}

void write_word_spans(const std::string& path,
                      const std::vector<phrase::WordSpan>& spans) {
  std::ofstream out(path);
  if (!out) throw FileMissing("cannot write word-span file: " + path);
  for (const auto& span : spans) out << span.start << ' ' << span.end << '\n';
}

std::vector<phrase::WordSpan> heuristic_word_spans(
    const std::vector<phrase::Token>& tokens,
    const std::vector<PhoneSpan>& phones) {
  const std::size_t n_words = tokens.size();
  const std::size_t n_phones = phones.size();
  if (n_words == 0) throw InvalidParams("heuristic_word_spans: no tokens");
  if (n_phones < n_words)
    throw MissingAlignment("heuristic_word_spans: fewer phones than words");

  std::vector<double> weights(n_words);
  double total_weight = 0.0;
  for (std::size_t w = 0; w < n_words; ++w) {
    std::size_t letters = 0;
    for (char c : tokens[w].text) {
      if (std::isalnum(static_cast<unsigned char>(c))) ++letters;
    }
    weights[w] = static_cast<double>(std::max<std::size_t>(1, letters));
    total_weight += weights[w];
  }

  // Cut the phone sequence at cumulative-weight boundaries, at least one
  // phone per word.
  std::vector<std::size_t> cuts(n_words + 1, 0);
  double acc = 0.0;
  for (std::size_t w = 0; w < n_words; ++w) {
    acc += weights[w];
    std::size_t cut = static_cast<std::size_t>(
        static_cast<double>(n_phones) * acc / total_weight);
    cut = std::max(cut, cuts[w] + 1);
    cut = std::min(cut, n_phones - (n_words - 1 - w));
    cuts[w + 1] = cut;
  }
  cuts[n_words] = n_phones;

  std::vector<phrase::WordSpan> spans(n_words);
  for (std::size_t w = 0; w < n_words; ++w) {
    spans[w].start = phones[cuts[w]].start;
    spans[w].end = phones[cuts[w + 1] - 1].end;
  }
  return spans;
}

namespace {

std::string resolve(const fs::path& base, const std::string& rel) {
  fs::path p(rel);
  if (p.is_absolute()) return p.string();
  return (base / p).string();
}

}  // namespace

std::vector<Utterance> load_corpus(const std::string& manifest_path,
                                   const phrase::Lexicon& lexicon) {
  std::ifstream in(manifest_path);
  if (!in) throw FileMissing("cannot open manifest: " + manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();

  std::vector<Utterance> utterances;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() != 4 && fields.size() != 5)
      throw FormatError("manifest line needs 4 or 5 tab-separated fields",
                        line_no);

    Utterance utt;
    utt.id = fields[0];
    utt.contour = f0::read_f0_file(resolve(base, fields[1]));
    utt.phones = read_alignment(resolve(base, fields[2]));

    const std::string text_path = resolve(base, fields[3]);
    std::ifstream text_in(text_path);
    if (!text_in) throw FileMissing("cannot open text file: " + text_path);
    std::string text_line;
    std::getline(text_in, text_line);
    utt.tokens = phrase::tokenize_line(text_line, lexicon);
    if (utt.tokens.empty())
      throw FormatError("utterance " + utt.id + " has no tokens", line_no);

    const int total = utt.total_frames();
    if (utt.phones.back().end != total)
      throw AlignmentGap("utterance " + utt.id + ": alignment ends at frame " +
                         std::to_string(utt.phones.back().end) + " but F0 has " +
                         std::to_string(total) + " frames");

    if (fields.size() == 5) {
      utt.words = read_word_spans(resolve(base, fields[4]));
      if (utt.words.size() != utt.tokens.size())
        throw MissingAlignment("utterance " + utt.id + ": " +
                               std::to_string(utt.words.size()) +
                               " word spans for " +
                               std::to_string(utt.tokens.size()) + " tokens");
    } else {
      utt.words = heuristic_word_spans(utt.tokens, utt.phones);
      utt.words_approximate = true;
    }
    if (utt.words.front().start != 0 || utt.words.back().end != total)
      throw AlignmentGap("utterance " + utt.id +
                         ": word spans do not cover all frames");

    utt.phrase_ranges =
        phrase::phrase_frame_ranges(phrase::parse_phrases(utt.tokens),
                                    utt.words);
    utterances.push_back(std::move(utt));
  }
  if (utterances.empty())
    throw FormatError("manifest lists no utterances: " + manifest_path);
  return utterances;
}

std::vector<std::string> collect_phone_inventory(
    const std::vector<Utterance>& utterances) {
  std::set<std::string> symbols;
  for (const auto& utt : utterances) {
    for (const auto& span : utt.phones) symbols.insert(span.phone);
  }
  return {symbols.begin(), symbols.end()};
}

f0::NormStats corpus_norm_stats(const std::vector<Utterance>& utterances) {
  std::vector<f0::F0Contour> contours;
  contours.reserve(utterances.size());
  for (const auto& utt : utterances) contours.push_back(utt.contour);
  return f0::compute_norm_stats(contours);
}

std::vector<int> frame_phone_ids(const std::vector<PhoneSpan>& spans,
                                 const std::vector<std::string>& phones) {
  std::vector<int> ids;
  for (const auto& span : spans) {
    int idx = -1;
    for (std::size_t i = 0; i < phones.size(); ++i) {
      if (phones[i] == span.phone) {
        idx = static_cast<int>(i);
        break;
      }
    }
    if (idx < 0) throw UnknownPhone("phone not in inventory: " + span.phone);
    for (int t = span.start; t < span.end; ++t) ids.push_back(idx);
  }
  return ids;
}

model::TrainItem utterance_to_item(const Utterance& utterance,
                                   const f0::NormStats& stats,
                                   const std::vector<std::string>& phones) {
  const auto interpolated = f0::interpolate_unvoiced(utterance.contour);
  const auto feats = f0::contour_to_features(interpolated, stats);
  model::TrainItem item;
  item.features = nn::Mat(feats.frames, 3);
  item.features.data = feats.data;
  item.phrase_ranges = utterance.phrase_ranges;
  item.frame_phones = frame_phone_ids(utterance.phones, phones);
  return item;
}

void write_norm_stats(const std::string& path, const f0::NormStats& stats) {
  std::ofstream out(path);
  if (!out) throw FileMissing("cannot write norm stats: " + path);
  char buf[64];
  auto emit = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%s %.17g\n", key, v);
    out << buf;
  };
  emit("mean_log_hz", stats.mean);
  emit("std_log_hz", stats.std);
  emit("global_std_static", stats.global_std_static);
  emit("global_std_delta", stats.global_std_delta);
  emit("global_std_deltadelta", stats.global_std_deltadelta);
}

f0::NormStats read_norm_stats(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileMissing("cannot open norm stats: " + path);
  f0::NormStats stats;
  std::string key;
  double value;
  int seen = 0;
  while (in >> key >> value) {
    if (key == "mean_log_hz")
      stats.mean = value;
    else if (key == "std_log_hz")
      stats.std = value;
    else if (key == "global_std_static")
      stats.global_std_static = value;
    else if (key == "global_std_delta")
      stats.global_std_delta = value;
    else if (key == "global_std_deltadelta")
      stats.global_std_deltadelta = value;
    else
      throw FormatError("unknown norm-stats key: " + key);
    ++seen;
  }
  if (seen != 5) throw FormatError("norm-stats file needs 5 entries: " + path);
  return stats;
}

}  // namespace intonation::pipeline
