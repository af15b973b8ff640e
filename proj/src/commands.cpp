#include "intonation/commands.h"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "intonation/checkpoint.h"
#include "intonation/config.h"
#include "intonation/corpus.h"
#include "intonation/eval_stats.h"
#include "intonation/intonation_codes.h"
#include "intonation/synthesis.h"
#include "intonation/synthetic_corpus.h"

namespace intonation::pipeline {

namespace fs = std::filesystem;

namespace {

phrase::Lexicon lexicon_or_bundled(const std::string& path) {
  return path.empty() ? phrase::Lexicon::bundled() : phrase::Lexicon::load(path);
}

void write_run_meta(const std::string& dir,
                    const std::vector<std::pair<std::string, std::string>>&
                        fields) {
  std::ofstream meta((fs::path(dir) / "run_meta.txt").string());
  meta << "tool intonation " << kToolVersion << '\n';
  for (const auto& [key, value] : fields) meta << key << ' ' << value << '\n';
}

struct CorpusData {
  std::vector<Utterance> utterances;
  std::vector<std::string> phones;
  std::vector<model::TrainItem> items;
};

CorpusData prepare_corpus(const std::string& manifest,
                          const phrase::Lexicon& lexicon,
                          const f0::NormStats& stats) {
  CorpusData data;
  data.utterances = load_corpus(manifest, lexicon);
  data.phones = collect_phone_inventory(data.utterances);
  data.items.reserve(data.utterances.size());
  for (const auto& utt : data.utterances)
    data.items.push_back(utterance_to_item(utt, stats, data.phones));
  return data;
}

void write_metrics(const std::string& path,
                   const std::vector<model::EpochMetrics>& metrics,
                   const Config& config) {
  std::ofstream out(path);
  if (!out) throw FileMissing("cannot write metrics: " + path);
  out << "# seed " << config.seed << " config " << config_hash(config) << '\n';
  out << "epoch\tlr\tbeta\trecon\tkl\twall_ms\n";
  char buf[160];
  for (const auto& row : metrics) {
    std::snprintf(buf, sizeof(buf), "%d\t%.17g\t%.17g\t%.17g\t%.17g\t%.3f\n",
                  row.epoch, row.lr, row.beta, row.recon, row.kl, row.wall_ms);
    out << buf;
  }
}

int cmd_parse(const std::string& input, const std::string& lexicon_path) {
  const phrase::Lexicon lexicon = lexicon_or_bundled(lexicon_path);
  std::ifstream in(input);
  if (!in) throw FileMissing("cannot open text file: " + input);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tokens = phrase::tokenize_line(line, lexicon);
    const auto phrases = phrase::parse_phrases(tokens);
    std::string out;
    for (const auto& p : phrases) {
      out += '[';
      for (std::size_t i = 0; i < p.tokens.size(); ++i) {
        if (i) out += ' ';
        out += p.tokens[i].text;
      }
      out += "] ";
    }
    if (!out.empty()) out.pop_back();
    std::cout << out << '\n';
  }
  return 0;
}

int cmd_features(const std::string& manifest, const std::string& stats_out,
                 const std::string& features_out,
                 const std::string& lexicon_path) {
  const phrase::Lexicon lexicon = lexicon_or_bundled(lexicon_path);
  auto utterances = load_corpus(manifest, lexicon);
  const f0::NormStats stats = corpus_norm_stats(utterances);
  write_norm_stats(stats_out, stats);
  if (!features_out.empty()) {
    fs::create_directories(features_out);
    char buf[40];
    for (const auto& utt : utterances) {
      const auto interpolated = f0::interpolate_unvoiced(utt.contour);
      const auto feats = f0::contour_to_features(interpolated, stats);
      std::ofstream out((fs::path(features_out) / (utt.id + ".feat")).string());
      for (std::size_t t = 0; t < feats.frames; ++t) {
        for (int c = 0; c < 3; ++c) {
          std::snprintf(buf, sizeof(buf), "%.17g", feats.at(t, c));
          out << buf << (c == 2 ? '\n' : '\t');
        }
      }
    }
  }
  std::cout << "wrote stats for " << utterances.size() << " utterances\n";
  return 0;
}

int cmd_train(const std::string& model_name, const std::string& manifest,
              const std::string& stats_path, const std::string& out_path,
              const std::string& metrics_path, const std::string& config_path,
              const std::string& lexicon_path, std::int64_t seed_override) {
  Config config = config_path.empty() ? Config() : Config::load(config_path);
  if (seed_override >= 0)
    config.seed = static_cast<std::uint64_t>(seed_override);
  config.validate();

  const model::ModelKind kind = model::parse_kind(model_name);
  const f0::NormStats stats = read_norm_stats(stats_path);
  const phrase::Lexicon lexicon = lexicon_or_bundled(lexicon_path);
  CorpusData data = prepare_corpus(manifest, lexicon, stats);

  const model::ModelConfig model_cfg = config.model_config(kind, data.phones);
  std::vector<model::EpochMetrics> metrics;
  std::function<void(const model::ProsodyModel&, int)> hook;
  if (config.save_every_epochs > 0) {
    hook = [&](const model::ProsodyModel& m, int epoch) {
      if ((epoch + 1) % config.save_every_epochs != 0) return;
      char suffix[32];
      std::snprintf(suffix, sizeof(suffix), ".epoch%03d", epoch);
      model::save_checkpoint(out_path + suffix, m, stats);
    };
  }
  const model::ProsodyModel trained = model::train(
      model_cfg, data.items, config.schedule(), config.seed, &metrics, hook);
  model::save_checkpoint(out_path, trained, stats);
  if (!metrics_path.empty()) write_metrics(metrics_path, metrics, config);
  std::cout << "trained " << model_name << " for " << config.total_epochs
            << " epochs, final recon " << metrics.back().recon << '\n';
  return 0;
}

int cmd_cluster(const std::string& checkpoint_path, const std::string& manifest,
                std::size_t k, std::int64_t seed, const std::string& out_path,
                const std::string& lexicon_path) {
  auto loaded = model::load_checkpoint(checkpoint_path);
  if (loaded.model->kind() != model::ModelKind::Ae)
    throw WrongModelKind("cluster: checkpoint is not an AE model");
  const phrase::Lexicon lexicon = lexicon_or_bundled(lexicon_path);
  CorpusData data = prepare_corpus(manifest, lexicon, loaded.stats);

  std::vector<std::vector<double>> embeddings;
  for (const auto& item : data.items) {
    model::EncoderCache cache;
    auto encodings =
        loaded.model->encode_phrases(item.features, item.phrase_ranges, cache);
    for (auto& enc : encodings) embeddings.push_back(std::move(enc.z));
  }
  const auto book = codes::kmeans_fit(embeddings, k,
                                      static_cast<std::uint64_t>(seed));
  codes::save_codebook(out_path, book);
  std::cout << "clustered " << embeddings.size() << " phrase embeddings into "
            << k << " codes\n";
  return 0;
}

int cmd_codes(const std::string& checkpoint_path, const std::string& out_path) {
  auto loaded = model::load_checkpoint(checkpoint_path);
  const auto book = codes::extract_vamp_codes(*loaded.model);
  codes::save_codebook(out_path, book);
  std::cout << "extracted " << book.codes.size() << " codes\n";
  return 0;
}

int cmd_synth(const std::string& checkpoint_path,
              const std::string& codebook_path, const std::string& sentence,
              const std::string& out_dir, const std::string& code_list,
              bool silence_unvoiced, const std::string& lexicon_path) {
  auto loaded = model::load_checkpoint(checkpoint_path);
  const auto book = codes::load_codebook(codebook_path);
  const phrase::Lexicon lexicon = lexicon_or_bundled(lexicon_path);
  const auto spec = synth::load_sentence_spec(sentence, lexicon);
  synth::SynthesisOptions options;
  options.silence_unvoiced = silence_unvoiced;

  if (code_list.empty()) {
    auto result = synth::render_all_codes(spec, *loaded.model, book,
                                          loaded.stats, out_dir, options);
    write_run_meta(out_dir,
                   {{"command", "synth"},
                    {"sentence", spec.id},
                    {"codes", "all"},
                    {"silence_unvoiced", silence_unvoiced ? "1" : "0"}});
    std::cout << "rendered " << result.contour_paths.size() << " codes for "
              << spec.id << '\n';
  } else {
    std::vector<int> ids;
    std::stringstream ss(code_list);
    std::string field;
    while (std::getline(ss, field, ',')) ids.push_back(std::stoi(field));
    const auto contour = synth::synthesize_f0(spec, ids, *loaded.model, book,
                                              loaded.stats, options);
    fs::create_directories(out_dir);
    const std::string path =
        (fs::path(out_dir) / (spec.id + "_custom.f0")).string();
    f0::write_f0_file(path, contour);
    write_run_meta(out_dir,
                   {{"command", "synth"},
                    {"sentence", spec.id},
                    {"codes", code_list},
                    {"silence_unvoiced", silence_unvoiced ? "1" : "0"}});
    std::cout << "rendered " << path << '\n';
  }
  return 0;
}

int cmd_stats(const std::string& judgments, const std::string& out_path,
              double alpha, bool two_sided, double confidence) {
  const auto records = stats::read_judgments(judgments);
  const auto report =
      stats::per_pair_report(records, alpha, two_sided, confidence);
  stats::write_report(out_path, report);
  int significant = 0;
  for (const auto& row : report.pairs) significant += row.significant ? 1 : 0;
  std::cout << report.pairs.size() << " pairs, " << significant
            << " significant after correction\n";
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"phrase-level intonation codes: parsing, features, models, "
               "synthesis and evaluation"};
  app.require_subcommand(1);

  // parse
  std::string parse_input, parse_lexicon;
  auto* parse_cmd =
      app.add_subcommand("parse", "segment text into prosodic phrases");
  parse_cmd->add_option("--input", parse_input, "text file, one sentence per line")
      ->required();
  parse_cmd->add_option("--lexicon", parse_lexicon, "lexicon override file");

  // gen-data
  SyntheticParams gen;
  std::string gen_out;
  auto* gen_cmd =
      app.add_subcommand("gen-data", "generate a synthetic corpus");
  gen_cmd->add_option("--out", gen_out, "output directory")->required();
  gen_cmd->add_option("--n", gen.n_utterances, "number of utterances");
  gen_cmd->add_option("--templates", gen.templates, "intonation templates (1-8)");
  gen_cmd->add_option("--seed", gen.seed, "random seed");
  gen_cmd->add_option("--min-frames", gen.min_frames, "minimum length");
  gen_cmd->add_option("--max-frames", gen.max_frames, "maximum length");

  // features
  std::string feat_manifest, feat_stats_out, feat_features_out, feat_lexicon;
  auto* feat_cmd = app.add_subcommand(
      "features", "compute normalization stats (and optional feature files)");
  feat_cmd->add_option("--manifest", feat_manifest, "corpus manifest")
      ->required();
  feat_cmd->add_option("--stats-out", feat_stats_out, "norm-stats output file")
      ->required();
  feat_cmd->add_option("--features-out", feat_features_out,
                       "directory for per-utterance feature files");
  feat_cmd->add_option("--lexicon", feat_lexicon, "lexicon override file");

  // train
  std::string train_model, train_manifest, train_stats, train_out,
      train_metrics, train_config, train_lexicon;
  std::int64_t train_seed = -1;
  auto* train_cmd = app.add_subcommand("train", "train a prosody model");
  train_cmd->add_option("--model", train_model, "ae or vamp")->required();
  train_cmd->add_option("--manifest", train_manifest, "corpus manifest")
      ->required();
  train_cmd->add_option("--stats", train_stats, "norm-stats file")->required();
  train_cmd->add_option("--out", train_out, "checkpoint output path")
      ->required();
  train_cmd->add_option("--metrics", train_metrics, "per-epoch metrics file");
  train_cmd->add_option("--config", train_config, "config file");
  train_cmd->add_option("--seed", train_seed, "seed override");
  train_cmd->add_option("--lexicon", train_lexicon, "lexicon override file");

  // cluster
  std::string cluster_ckpt, cluster_manifest, cluster_out, cluster_lexicon;
  std::size_t cluster_k = 20;
  std::int64_t cluster_seed = 1;
  auto* cluster_cmd = app.add_subcommand(
      "cluster", "k-means codebook from AE phrase embeddings");
  cluster_cmd->add_option("--checkpoint", cluster_ckpt, "AE checkpoint")
      ->required();
  cluster_cmd->add_option("--manifest", cluster_manifest, "corpus manifest")
      ->required();
  cluster_cmd->add_option("--out", cluster_out, "codebook output path")
      ->required();
  cluster_cmd->add_option("--k", cluster_k, "number of clusters");
  cluster_cmd->add_option("--seed", cluster_seed, "k-means seed");
  cluster_cmd->add_option("--lexicon", cluster_lexicon, "lexicon override");

  // codes
  std::string codes_ckpt, codes_out;
  auto* codes_cmd = app.add_subcommand(
      "codes", "codebook from VAE-VAMP pseudo-input posteriors");
  codes_cmd->add_option("--checkpoint", codes_ckpt, "VAE-VAMP checkpoint")
      ->required();
  codes_cmd->add_option("--out", codes_out, "codebook output path")->required();

  // synth
  std::string synth_ckpt, synth_book, synth_sentence, synth_out, synth_codes,
      synth_lexicon;
  bool synth_silence = false;
  auto* synth_cmd =
      app.add_subcommand("synth", "render F0 contours for a sentence");
  synth_cmd->add_option("--checkpoint", synth_ckpt, "model checkpoint")
      ->required();
  synth_cmd->add_option("--codebook", synth_book, "codebook file")->required();
  synth_cmd->add_option("--sentence", synth_sentence, "sentence spec file")
      ->required();
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--codes", synth_codes,
                        "comma-separated code ids, one per phrase "
                        "(default: render every code)");
  synth_cmd->add_flag("--silence-unvoiced", synth_silence,
                      "zero F0 over silence phones");
  synth_cmd->add_option("--lexicon", synth_lexicon, "lexicon override");

  // stats
  std::string stats_judgments, stats_out;
  double stats_alpha = 0.05, stats_confidence = 0.95;
  bool stats_two_sided = false;
  auto* stats_cmd = app.add_subcommand(
      "stats", "binomial tests with Holm-Bonferroni correction");
  stats_cmd->add_option("--judgments", stats_judgments, "judgment records")
      ->required();
  stats_cmd->add_option("--out", stats_out, "report output path")->required();
  stats_cmd->add_option("--alpha", stats_alpha, "family-wise alpha");
  stats_cmd->add_option("--confidence", stats_confidence,
                        "confidence level for intervals");
  stats_cmd->add_flag("--two-sided", stats_two_sided, "two-sided tests");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (app.got_subcommand(parse_cmd)) {
      return cmd_parse(parse_input, parse_lexicon);
    }
    if (app.got_subcommand(gen_cmd)) {
      generate_synthetic_corpus(gen_out, gen);
      std::cout << "generated " << gen.n_utterances << " utterances in "
                << gen_out << '\n';
      return 0;
    }
    if (app.got_subcommand(feat_cmd)) {
      return cmd_features(feat_manifest, feat_stats_out, feat_features_out,
                          feat_lexicon);
    }
    if (app.got_subcommand(train_cmd)) {
      return cmd_train(train_model, train_manifest, train_stats, train_out,
                       train_metrics, train_config, train_lexicon, train_seed);
    }
    if (app.got_subcommand(cluster_cmd)) {
      return cmd_cluster(cluster_ckpt, cluster_manifest, cluster_k,
                         cluster_seed, cluster_out, cluster_lexicon);
    }
    if (app.got_subcommand(codes_cmd)) {
      return cmd_codes(codes_ckpt, codes_out);
    }
    if (app.got_subcommand(synth_cmd)) {
      return cmd_synth(synth_ckpt, synth_book, synth_sentence, synth_out,
                       synth_codes, synth_silence, synth_lexicon);
    }
    if (app.got_subcommand(stats_cmd)) {
      return cmd_stats(stats_judgments, stats_out, stats_alpha,
                       stats_two_sided, stats_confidence);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace intonation::pipeline
