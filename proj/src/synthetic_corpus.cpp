#include "intonation/synthetic_corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "intonation/corpus.h"
#include "intonation/errors.h"
#include "intonation/rng.h"

namespace intonation::pipeline {

namespace fs = std::filesystem;

const char* const kTemplateNames[8] = {"rise",      "fall",      "rise_fall",
                                       "fall_rise", "high_flat", "low_flat",
                                       "early_peak", "late_peak"};

namespace {

const char* kChinkWords[] = {"the", "a",  "his", "their", "on",
                             "in",  "to", "for", "with",  "and"};
const char* kContentWords[] = {"turnip", "cat",    "stairs", "wolf",
                               "bear",   "answer", "matter", "boy",
                               "story",  "garden", "door",   "night",
                               "voice",  "river",  "bread",  "stone"};
const char* kPhones[] = {"aa", "ae", "ah", "ao", "b", "ch", "d",
                         "eh", "f",  "g",  "iy", "k", "l",  "m",
                         "n",  "p",  "r",  "s",  "t"};  // + sil = 20

double template_hz(int id, double u) {
  switch (id) {
    case 0: return 130.0 + 110.0 * u;
    case 1: return 240.0 - 110.0 * u;
    case 2: return 130.0 + 110.0 * std::sin(M_PI * u);
    case 3: return 240.0 - 110.0 * std::sin(M_PI * u);
    case 4: return 225.0;
    case 5: return 135.0;
    case 6: return 140.0 + 100.0 * std::exp(-std::pow((u - 0.2) / 0.18, 2.0));
    case 7: return 140.0 + 100.0 * std::exp(-std::pow((u - 0.8) / 0.18, 2.0));
    default: throw InvalidParams("template id out of range");
  }
}

}  // namespace

void generate_synthetic_corpus(const std::string& out_dir,
                               const SyntheticParams& params) {
  if (params.templates < 1 || params.templates > 8)
    throw InvalidParams("generate_synthetic_corpus: templates must be 1..8");
  if (params.n_utterances < 1)
    throw InvalidParams("generate_synthetic_corpus: need >= 1 utterance");
  if (params.min_frames < 40 || params.max_frames < params.min_frames)
    throw InvalidParams("generate_synthetic_corpus: bad frame range");

  fs::create_directories(out_dir);
  for (const char* sub : {"f0", "align", "text", "words"})
    fs::create_directories(fs::path(out_dir) / sub);

  Rng rng(params.seed);
  std::ofstream manifest((fs::path(out_dir) / "manifest.tsv").string());
  std::ofstream labels((fs::path(out_dir) / ".template_labels.tsv").string());
  if (!manifest || !labels)
    throw FileMissing("cannot write corpus files under " + out_dir);

  for (int utt = 0; utt < params.n_utterances; ++utt) {
    char id[32];
    std::snprintf(id, sizeof(id), "utt%04d", utt);
    const int template_id = static_cast<int>(rng.uniform_int(
        static_cast<std::uint64_t>(params.templates)));
    const int total = params.min_frames +
                      static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(
                          params.max_frames - params.min_frames + 1)));

    // single-phrase sentence: chinks followed by content words
    const int n_chinks = 1 + static_cast<int>(rng.uniform_int(2));
    const int n_content = 1 + static_cast<int>(rng.uniform_int(3));
    std::vector<std::string> words;
    for (int i = 0; i < n_chinks; ++i)
      words.push_back(kChinkWords[rng.uniform_int(std::size(kChinkWords))]);
    for (int i = 0; i < n_content; ++i)
      words.push_back(kContentWords[rng.uniform_int(std::size(kContentWords))]);

    // phones: leading sil + 2..4 per word + trailing sil
    std::vector<std::string> phone_symbols;
    std::vector<int> phone_word;  // word index owning each phone
    phone_symbols.push_back("sil");
    phone_word.push_back(0);
    for (std::size_t w = 0; w < words.size(); ++w) {
      const int n_phones = 2 + static_cast<int>(rng.uniform_int(3));
      for (int i = 0; i < n_phones; ++i) {
        phone_symbols.push_back(kPhones[rng.uniform_int(std::size(kPhones))]);
        phone_word.push_back(static_cast<int>(w));
      }
    }
    phone_symbols.push_back("sil");
    phone_word.push_back(static_cast<int>(words.size()) - 1);

    // distribute frames over phones, at least 2 each
    const std::size_t n_phones = phone_symbols.size();
    std::vector<double> weight(n_phones);
    double weight_sum = 0.0;
    for (auto& w : weight) {
      w = 1.0 + static_cast<double>(rng.uniform_int(5));
      weight_sum += w;
    }
    std::vector<int> durations(n_phones, 2);
    int assigned = static_cast<int>(2 * n_phones);
    double acc = 0.0;
    std::vector<std::pair<double, std::size_t>> remainders;
    const int spare = total - assigned;
    if (spare < 0)
      throw InternalError("synthetic corpus: frame budget too small");
    for (std::size_t i = 0; i < n_phones; ++i) {
      acc += weight[i];
      const double share = spare * weight[i] / weight_sum;
      durations[i] += static_cast<int>(share);
      remainders.emplace_back(share - std::floor(share), i);
    }
    int used = 0;
    for (int d : durations) used += d;
    std::sort(remainders.begin(), remainders.end(),
              [](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first > b.first;
                return a.second < b.second;
              });
    for (std::size_t i = 0; used < total; ++i) {
      durations[remainders[i % remainders.size()].second] += 1;
      ++used;
    }

    std::vector<PhoneSpan> spans(n_phones);
    int cursor = 0;
    for (std::size_t i = 0; i < n_phones; ++i) {
      spans[i].start = cursor;
      cursor += durations[i];
      spans[i].end = cursor;
      spans[i].phone = phone_symbols[i];
    }

    std::vector<phrase::WordSpan> word_spans(words.size());
    for (std::size_t w = 0; w < words.size(); ++w) {
      word_spans[w].start = -1;
      word_spans[w].end = -1;
    }
    for (std::size_t i = 0; i < n_phones; ++i) {
      auto& ws = word_spans[static_cast<std::size_t>(phone_word[i])];
      if (ws.start < 0) ws.start = spans[i].start;
      ws.end = spans[i].end;
    }

    // F0: template curve + smooth sinusoidal noise (sigma ~ 5 Hz)
    const double amp = 5.0 * std::sqrt(2.0 / 3.0);
    double freq[3], phase[3];
    for (int j = 0; j < 3; ++j) {
      freq[j] = 1.0 + 3.0 * rng.uniform();
      phase[j] = 2.0 * M_PI * rng.uniform();
    }
    std::vector<double> hz(static_cast<std::size_t>(total));
    for (int t = 0; t < total; ++t) {
      const double u = total > 1 ? static_cast<double>(t) / (total - 1) : 0.0;
      double v = template_hz(template_id, u);
      for (int j = 0; j < 3; ++j)
        v += amp * std::sin(2.0 * M_PI * freq[j] * u + phase[j]);
      hz[static_cast<std::size_t>(t)] = std::max(60.0, v);
    }
    // silence spans and random gaps are unvoiced
    for (const auto& span : spans) {
      if (span.phone != "sil") continue;
      for (int t = span.start; t < span.end; ++t)
        hz[static_cast<std::size_t>(t)] = 0.0;
    }
    const int n_gaps = 2 + static_cast<int>(rng.uniform_int(3));
    for (int g = 0; g < n_gaps; ++g) {
      const int len = 3 + static_cast<int>(rng.uniform_int(6));
      const int start =
          static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(
              std::max(1, total - len))));
      for (int t = start; t < std::min(total, start + len); ++t)
        hz[static_cast<std::size_t>(t)] = 0.0;
    }
    bool any_voiced = false;
    for (double v : hz) any_voiced = any_voiced || v > 0.0;
    if (!any_voiced) hz[static_cast<std::size_t>(total / 2)] = 150.0;

    // write the utterance
    f0::F0Contour contour;
    contour.f0_hz = hz;
    const std::string f0_rel = std::string("f0/") + id + ".f0";
    const std::string ali_rel = std::string("align/") + id + ".ali";
    const std::string txt_rel = std::string("text/") + id + ".txt";
    const std::string wrd_rel = std::string("words/") + id + ".wrd";
    f0::write_f0_file((fs::path(out_dir) / f0_rel).string(), contour);
    write_alignment((fs::path(out_dir) / ali_rel).string(), spans);
    {
      std::ofstream text((fs::path(out_dir) / txt_rel).string());
      for (std::size_t w = 0; w < words.size(); ++w) {
        if (w) text << ' ';
        text << words[w];
      }
      text << " .\n";
    }
    write_word_spans((fs::path(out_dir) / wrd_rel).string(), word_spans);

    manifest << id << '\t' << f0_rel << '\t' << ali_rel << '\t' << txt_rel
             << '\t' << wrd_rel << '\n';
    labels << id << '\t' << template_id << '\t' << kTemplateNames[template_id]
           << '\n';
  }

  std::ofstream meta((fs::path(out_dir) / "run_meta.txt").string());
  meta << "tool intonation 1.0.0\n"
       << "command gen-data\n"
       << "seed " << params.seed << '\n'
       << "n_utterances " << params.n_utterances << '\n'
       << "templates " << params.templates << '\n'
       << "min_frames " << params.min_frames << '\n'
       << "max_frames " << params.max_frames << '\n';
}

std::vector<std::pair<std::string, int>> read_template_labels(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileMissing("cannot open template labels: " + path);
  std::vector<std::pair<std::string, int>> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string id;
    int label = -1;
    ss >> id >> label;
    if (ss.fail()) throw FormatError("bad template-label line", line_no);
    labels.emplace_back(id, label);
  }
  return labels;
}

double cluster_purity(const std::vector<int>& cluster_ids,
                      const std::vector<int>& labels) {
  if (cluster_ids.size() != labels.size() || cluster_ids.empty())
    throw InvalidParams("cluster_purity: id/label size mismatch");
  std::map<int, std::map<int, int>> counts;
  for (std::size_t i = 0; i < cluster_ids.size(); ++i) {
    counts[cluster_ids[i]][labels[i]] += 1;
  }
  int matched = 0;
  for (const auto& [cluster, label_counts] : counts) {
    int best = 0;
    for (const auto& [label, count] : label_counts) best = std::max(best, count);
    matched += best;
  }
  return static_cast<double>(matched) / static_cast<double>(cluster_ids.size());
}

}  // namespace intonation::pipeline
