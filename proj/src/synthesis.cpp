#include "intonation/synthesis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace intonation::synth {

namespace fs = std::filesystem;

SentenceSpec load_sentence_spec(const std::string& path,
                                const phrase::Lexicon& lexicon) {
  std::ifstream in(path);
  if (!in) throw FileMissing("cannot open sentence spec: " + path);

  SentenceSpec spec;
  spec.id = fs::path(path).stem().string();
  std::vector<phrase::WordSpan> words;
  std::vector<std::pair<int, int>> explicit_phrases;
  std::string section, line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == '[') {
      section = line;
      continue;
    }
    if (section == "[id]") {
      spec.id = line;
    } else if (section == "[text]") {
      spec.tokens = phrase::tokenize_line(line, lexicon);
    } else if (section == "[phones]") {
      std::istringstream ss(line);
      pipeline::PhoneSpan span;
      ss >> span.start >> span.end >> span.phone;
      if (ss.fail())
        throw FormatError("sentence spec: bad phone line", line_no);
      spec.phones.push_back(std::move(span));
    } else if (section == "[words]") {
      std::istringstream ss(line);
      phrase::WordSpan span;
      ss >> span.start >> span.end;
      if (ss.fail()) throw FormatError("sentence spec: bad word line", line_no);
      words.push_back(span);
    } else if (section == "[phrases]") {
      std::istringstream ss(line);
      int start = 0, end = 0;
      ss >> start >> end;
      if (ss.fail())
        throw FormatError("sentence spec: bad phrase line", line_no);
      explicit_phrases.emplace_back(start, end);
    } else {
      throw FormatError("sentence spec: line outside a known section",
                        line_no);
    }
  }

  if (spec.phones.empty())
    throw FormatError("sentence spec has no [phones] section: " + path);
  int cursor = 0;
  for (const auto& span : spec.phones) {
    if (span.start != cursor || span.end <= span.start)
      throw AlignmentGap("sentence spec: phones not contiguous at frame " +
                         std::to_string(cursor));
    cursor = span.end;
  }
  spec.total_frames = cursor;

  if (!explicit_phrases.empty()) {
    spec.phrase_ranges = explicit_phrases;
  } else {
    if (spec.tokens.empty())
      throw FormatError("sentence spec needs [text] (or [phrases]): " + path);
    if (words.empty())
      words = pipeline::heuristic_word_spans(spec.tokens, spec.phones);
    spec.phrase_ranges =
        phrase::phrase_frame_ranges(phrase::parse_phrases(spec.tokens), words);
  }
  return spec;
}

f0::F0Contour synthesize_f0(const SentenceSpec& spec,
                            const std::vector<int>& code_ids,
                            const model::ProsodyModel& model,
                            const codes::Codebook& codebook,
                            const f0::NormStats& stats,
                            const SynthesisOptions& options) {
  if (spec.phrase_ranges.empty() || spec.total_frames <= 0)
    throw InvalidParams("synthesize_f0: empty sentence spec");
  if (code_ids.size() != spec.phrase_ranges.size())
    throw PhraseCountMismatch("synthesize_f0: " +
                              std::to_string(code_ids.size()) + " codes for " +
                              std::to_string(spec.phrase_ranges.size()) +
                              " phrases");
  if (codebook.latent_dim != model.config().latent_dim)
    throw DimMismatch("synthesize_f0: codebook dim != model latent dim");

  std::vector<std::vector<double>> code_vectors;
  code_vectors.reserve(code_ids.size());
  for (int id : code_ids) code_vectors.push_back(codebook.at(id).vector);

  const auto frame_phones =
      pipeline::frame_phone_ids(spec.phones, model.config().phones);

  model::DecoderCache cache;
  const nn::Mat means =
      model.decode(code_vectors, spec.phrase_ranges, frame_phones, cache);

  f0::FeatureSequence seq;
  seq.frames = means.rows;
  seq.data = means.data;
  const auto statics = f0::mlpg(seq, stats);
  f0::F0Contour contour = f0::features_to_hz(statics, stats);

  if (options.silence_unvoiced) {
    for (const auto& span : spec.phones) {
      const bool silent =
          std::find(options.silence_phones.begin(),
                    options.silence_phones.end(),
                    span.phone) != options.silence_phones.end();
      if (!silent) continue;
      for (int t = span.start; t < span.end; ++t)
        contour.f0_hz[static_cast<std::size_t>(t)] = 0.0;
    }
  }
  return contour;
}

RenderResult render_all_codes(const SentenceSpec& spec,
                              const model::ProsodyModel& model,
                              const codes::Codebook& codebook,
                              const f0::NormStats& stats,
                              const std::string& out_dir,
                              const SynthesisOptions& options) {
  if (codebook.codes.empty())
    throw InvalidParams("render_all_codes: empty codebook");

  // Render everything first; nothing is written if any rendition fails.
  std::vector<f0::F0Contour> contours;
  RenderResult result;
  for (const auto& code : codebook.codes) {
    const std::vector<int> ids(spec.phrase_ranges.size(), code.id);
    contours.push_back(
        synthesize_f0(spec, ids, model, codebook, stats, options));
    result.code_ids.push_back(code.id);
  }

  fs::create_directories(out_dir);
  char name[128];
  for (std::size_t i = 0; i < contours.size(); ++i) {
    std::snprintf(name, sizeof(name), "%s_code%02d.f0", spec.id.c_str(),
                  result.code_ids[i]);
    const std::string path = (fs::path(out_dir) / name).string();
    f0::write_f0_file(path, contours[i]);
    result.contour_paths.push_back(path);
  }

  result.manifest_path = (fs::path(out_dir) / "renditions.tsv").string();
  {
    std::ofstream manifest(result.manifest_path);
    if (!manifest)
      throw FileMissing("cannot write manifest: " + result.manifest_path);
    manifest << "sentence_id\tcode_id\tpath\n";
    for (std::size_t i = 0; i < contours.size(); ++i) {
      manifest << spec.id << '\t' << result.code_ids[i] << '\t'
               << fs::path(result.contour_paths[i]).filename().string()
               << '\n';
    }
  }

  result.plot_data_path = (fs::path(out_dir) / "plot_data.tsv").string();
  {
    std::ofstream plot(result.plot_data_path);
    if (!plot)
      throw FileMissing("cannot write plot data: " + result.plot_data_path);
    plot << "frame";
    for (int id : result.code_ids) plot << "\tcode_" << id;
    plot << '\n';
    char buf[40];
    for (int t = 0; t < spec.total_frames; ++t) {
      plot << t;
      for (const auto& contour : contours) {
        std::snprintf(buf, sizeof(buf), "%.17g",
                      contour.f0_hz[static_cast<std::size_t>(t)]);
        plot << '\t' << buf;
      }
      plot << '\n';
    }
  }
  return result;
}

nn::Mat pairwise_distinctness(const std::vector<f0::F0Contour>& renditions) {
  const std::size_t n = renditions.size();
  for (const auto& r : renditions) {
    if (r.size() != renditions.front().size())
      throw LengthMismatch("pairwise_distinctness: contour lengths differ");
  }
  nn::Mat matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = 0.0;
      std::size_t voiced = 0;
      for (std::size_t t = 0; t < renditions[i].size(); ++t) {
        if (!renditions[i].voiced(t) || !renditions[j].voiced(t)) continue;
        const double d = renditions[i].f0_hz[t] - renditions[j].f0_hz[t];
        acc += d * d;
        ++voiced;
      }
      const double rmse =
          voiced > 0 ? std::sqrt(acc / static_cast<double>(voiced)) : 0.0;
      matrix.at(i, j) = rmse;
      matrix.at(j, i) = rmse;
    }
  }
  return matrix;
}

}  // namespace intonation::synth
