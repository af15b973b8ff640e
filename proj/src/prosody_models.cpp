#include "intonation/prosody_models.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>

namespace intonation::model {

std::string kind_name(ModelKind kind) {
  return kind == ModelKind::Ae ? "ae" : "vamp";
}

ModelKind parse_kind(const std::string& name) {
  if (name == "ae") return ModelKind::Ae;
  if (name == "vamp" || name == "vae_vamp") return ModelKind::VaeVamp;
  throw InvalidParams("unknown model kind: " + name);
}

std::vector<std::size_t> ModelConfig::length_ladder(std::size_t lo,
                                                    std::size_t step,
                                                    std::size_t repeats,
                                                    std::size_t count) {
  if (repeats == 0) throw InvalidParams("length_ladder: repeats must be > 0");
  std::vector<std::size_t> lengths(count);
  for (std::size_t i = 0; i < count; ++i) lengths[i] = lo + step * (i / repeats);
  return lengths;
}

// ---- LayerStack ---------------------------------------------------------------

LayerStack::LayerStack(nn::ParamStore& store, const std::string& prefix,
                       std::size_t in_dim, std::size_t ff_units,
                       std::size_t gru_units, std::size_t gru_layers,
                       std::size_t out_dim, Rng& rng) {
  ff_ = std::make_unique<nn::Dense>(store, prefix + ".ff", in_dim, ff_units,
                                    nn::Activation::Tanh, rng);
  std::size_t width = ff_units;
  for (std::size_t i = 0; i < gru_layers; ++i) {
    grus_.push_back(std::make_unique<nn::GruLayer>(
        store, prefix + ".gru" + std::to_string(i), width, gru_units, rng));
    width = gru_units;
  }
  head_ = std::make_unique<nn::Dense>(store, prefix + ".head", width, out_dim,
                                      nn::Activation::Identity, rng);
}

nn::Mat LayerStack::forward(const nn::Mat& x, StackCache& cache) const {
  cache.grus.resize(grus_.size());
  nn::Mat h = ff_->forward(x, cache.ff);
  for (std::size_t i = 0; i < grus_.size(); ++i) {
    h = grus_[i]->forward(h, cache.grus[i]);
  }
  return head_->forward(h, cache.head);
}

nn::Mat LayerStack::backward(const StackCache& cache, const nn::Mat& dy) const {
  nn::Mat d = head_->backward(cache.head, dy);
  for (std::size_t i = grus_.size(); i-- > 0;) {
    d = grus_[i]->backward(cache.grus[i], d);
  }
  return ff_->backward(cache.ff, d);
}

// ---- ProsodyModel ----------------------------------------------------------------

ProsodyModel::ProsodyModel(ModelConfig config, std::uint64_t init_seed)
    : config_(std::move(config)) {
  if (config_.latent_dim == 0 || config_.feat_dim == 0)
    throw InvalidParams("ProsodyModel: zero-sized dimensions");
  if (config_.kind == ModelKind::VaeVamp && config_.pseudo_lengths.empty())
    throw InvalidParams("ProsodyModel: VAE-VAMP needs pseudo-input lengths");
  if (config_.kind == ModelKind::Ae && !config_.pseudo_lengths.empty())
    throw InvalidParams("ProsodyModel: AE must not have pseudo-inputs");
  if (config_.phones.empty())
    throw InvalidParams("ProsodyModel: empty phone inventory");

  Rng rng(init_seed);
  const std::size_t enc_out = config_.kind == ModelKind::Ae
                                  ? config_.latent_dim
                                  : 2 * config_.latent_dim;
  encoder_ = std::make_unique<LayerStack>(
      store_, "enc", config_.feat_dim, config_.ff_units, config_.gru_units,
      config_.gru_layers, enc_out, rng);
  const std::size_t dec_in = config_.latent_dim + config_.phones.size();
  decoder_ = std::make_unique<LayerStack>(
      store_, "dec", dec_in, config_.ff_units, config_.gru_units,
      config_.gru_layers, config_.feat_dim, rng);
  for (std::size_t k = 0; k < config_.pseudo_lengths.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "pseudo.%02zu", k);
    auto* p = store_.add(name, {config_.pseudo_lengths[k], config_.feat_dim});
    for (double& v : p->value) v = 0.1 * rng.normal();
    pseudo_.push_back(p);
  }
}

namespace {

void check_ranges(const std::vector<std::pair<int, int>>& ranges,
                  std::size_t total, bool must_tile) {
  int prev_end = 0;
  for (const auto& [start, end] : ranges) {
    if (start < 0 || end > static_cast<int>(total) || start >= end)
      throw RangeOutOfBounds("phrase range [" + std::to_string(start) + ", " +
                             std::to_string(end) + ") outside 0.." +
                             std::to_string(total));
    if (start < prev_end)
      throw RangeOutOfBounds("phrase ranges overlap or are unordered");
    if (must_tile && start != prev_end)
      throw DurationMismatch("phrase ranges leave a gap at frame " +
                             std::to_string(prev_end));
    prev_end = end;
  }
  if (must_tile && prev_end != static_cast<int>(total))
    throw DurationMismatch("phrase ranges cover " + std::to_string(prev_end) +
                           " of " + std::to_string(total) + " frames");
}

}  // namespace

std::vector<PhraseEncoding> ProsodyModel::encode_phrases(
    const nn::Mat& features, const std::vector<std::pair<int, int>>& ranges,
    EncoderCache& cache) const {
  if (features.cols != config_.feat_dim)
    throw ShapeMismatch("encode_phrases: bad feature width");
  check_ranges(ranges, features.rows, /*must_tile=*/false);
  cache.ranges = ranges;
  const nn::Mat out = encoder_->forward(features, cache.stack);
  const std::size_t latent = config_.latent_dim;

  std::vector<PhraseEncoding> encodings;
  encodings.reserve(ranges.size());
  for (const auto& [start, end] : ranges) {
    const double* row = out.row(static_cast<std::size_t>(end) - 1);
    PhraseEncoding enc;
    if (config_.kind == ModelKind::Ae) {
      enc.z.assign(row, row + latent);
    } else {
      enc.post.mu.assign(row, row + latent);
      enc.post.sigma.resize(latent);
      for (std::size_t i = 0; i < latent; ++i) {
        enc.post.sigma[i] = std::exp(0.5 * row[latent + i]);
      }
    }
    encodings.push_back(std::move(enc));
  }
  return encodings;
}

nn::Mat ProsodyModel::encoder_backward(
    const EncoderCache& cache, const std::vector<std::vector<double>>& d_z,
    const std::vector<LatentPosterior>& d_post) const {
  const std::size_t latent = config_.latent_dim;
  const nn::Mat& out = cache.stack.head.output;
  nn::Mat d_head(out.rows, out.cols);
  for (std::size_t p = 0; p < cache.ranges.size(); ++p) {
    double* row = d_head.row(static_cast<std::size_t>(cache.ranges[p].second) - 1);
    if (config_.kind == ModelKind::Ae) {
      if (p >= d_z.size() || d_z[p].size() != latent)
        throw ShapeMismatch("encoder_backward: bad d_z");
      for (std::size_t i = 0; i < latent; ++i) row[i] += d_z[p][i];
    } else {
      if (p >= d_post.size() || d_post[p].mu.size() != latent)
        throw ShapeMismatch("encoder_backward: bad d_post");
      const double* head_row =
          out.row(static_cast<std::size_t>(cache.ranges[p].second) - 1);
      for (std::size_t i = 0; i < latent; ++i) {
        row[i] += d_post[p].mu[i];
        // sigma = exp(0.5 logvar) => d logvar = 0.5 sigma d sigma
        const double sigma = std::exp(0.5 * head_row[latent + i]);
        row[latent + i] += 0.5 * sigma * d_post[p].sigma[i];
      }
    }
  }
  return encoder_->backward(cache.stack, d_head);
}

nn::Mat ProsodyModel::decode(const std::vector<std::vector<double>>& codes,
                             const std::vector<std::pair<int, int>>& ranges,
                             const std::vector<int>& frame_phones,
                             DecoderCache& cache) const {
  if (codes.size() != ranges.size())
    throw PhraseCountMismatch("decode: " + std::to_string(codes.size()) +
                              " codes for " + std::to_string(ranges.size()) +
                              " phrases");
  const std::size_t total = frame_phones.size();
  check_ranges(ranges, total, /*must_tile=*/true);
  const std::size_t latent = config_.latent_dim;
  const std::size_t n_phones = config_.phones.size();

  nn::Mat input(total, latent + n_phones);
  for (std::size_t p = 0; p < ranges.size(); ++p) {
    if (codes[p].size() != latent)
      throw ShapeMismatch("decode: code dim != latent dim");
    for (int t = ranges[p].first; t < ranges[p].second; ++t) {
      double* row = input.row(static_cast<std::size_t>(t));
      std::memcpy(row, codes[p].data(), latent * sizeof(double));
      const int phone = frame_phones[static_cast<std::size_t>(t)];
      if (phone < 0 || phone >= static_cast<int>(n_phones))
        throw UnknownPhone("decode: phone id " + std::to_string(phone) +
                           " outside inventory");
      row[latent + static_cast<std::size_t>(phone)] = 1.0;
    }
  }
  cache.ranges = ranges;
  return decoder_->forward(input, cache.stack);
}

std::vector<std::vector<double>> ProsodyModel::decoder_backward(
    const DecoderCache& cache, const nn::Mat& dy) const {
  const nn::Mat dx = decoder_->backward(cache.stack, dy);
  const std::size_t latent = config_.latent_dim;
  std::vector<std::vector<double>> d_codes(cache.ranges.size(),
                                           std::vector<double>(latent, 0.0));
  for (std::size_t p = 0; p < cache.ranges.size(); ++p) {
    for (int t = cache.ranges[p].first; t < cache.ranges[p].second; ++t) {
      const double* row = dx.row(static_cast<std::size_t>(t));
      for (std::size_t i = 0; i < latent; ++i) d_codes[p][i] += row[i];
    }
  }
  return d_codes;
}

nn::Mat ProsodyModel::pseudo_input_values(std::size_t k) const {
  const nn::ParamTensor* p = pseudo_.at(k);
  nn::Mat m(config_.pseudo_lengths[k], config_.feat_dim);
  m.data = p->value;
  return m;
}

std::vector<LatentPosterior> ProsodyModel::vamp_components(
    std::vector<EncoderCache>* caches) const {
  if (config_.kind != ModelKind::VaeVamp)
    throw WrongModelKind("vamp_components: model is not VAE-VAMP");
  std::vector<LatentPosterior> components;
  components.reserve(pseudo_.size());
  if (caches) caches->assign(pseudo_.size(), EncoderCache());
  EncoderCache local;
  for (std::size_t k = 0; k < pseudo_.size(); ++k) {
    EncoderCache& cache = caches ? (*caches)[k] : local;
    const nn::Mat u = pseudo_input_values(k);
    const std::vector<std::pair<int, int>> whole = {
        {0, static_cast<int>(u.rows)}};
    auto enc = encode_phrases(u, whole, cache);
    components.push_back(std::move(enc[0].post));
  }
  return components;
}

void ProsodyModel::pseudo_backward(
    const std::vector<EncoderCache>& caches,
    const std::vector<LatentPosterior>& d_components) {
  if (caches.size() != pseudo_.size() || d_components.size() != pseudo_.size())
    throw ShapeMismatch("pseudo_backward: bad component count");
  for (std::size_t k = 0; k < pseudo_.size(); ++k) {
    const nn::Mat du =
        encoder_backward(caches[k], {}, {d_components[k]});
    nn::ParamTensor* p = pseudo_[k];
    for (std::size_t i = 0; i < p->size(); ++i) p->grad[i] += du.data[i];
  }
}

// ---- latent-space math --------------------------------------------------------

std::vector<double> reparameterize(const LatentPosterior& post,
                                   const std::vector<double>& noise) {
  if (noise.size() != post.mu.size())
    throw ShapeMismatch("reparameterize: noise dim != latent dim");
  std::vector<double> z(post.mu.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = post.mu[i] + post.sigma[i] * noise[i];
  }
  return z;
}

double log_diag_gaussian(const std::vector<double>& z,
                         const LatentPosterior& g) {
  if (z.size() != g.mu.size())
    throw ShapeMismatch("log_diag_gaussian: dim mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double u = (z[i] - g.mu[i]) / g.sigma[i];
    acc += -0.5 * std::log(2.0 * M_PI) - std::log(g.sigma[i]) - 0.5 * u * u;
  }
  return acc;
}

double vamp_log_prior(const std::vector<double>& z,
                      const std::vector<LatentPosterior>& components) {
  if (components.empty())
    throw InvalidParams("vamp_log_prior: no mixture components");
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(components.size());
  for (std::size_t k = 0; k < components.size(); ++k) {
    terms[k] = log_diag_gaussian(z, components[k]);
    max_term = std::max(max_term, terms[k]);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - max_term);
  return max_term + std::log(acc) -
         std::log(static_cast<double>(components.size()));
}

VampPriorGrads vamp_log_prior_backward(
    const std::vector<double>& z,
    const std::vector<LatentPosterior>& components) {
  const std::size_t dim = z.size();
  const std::size_t n = components.size();
  // responsibilities w_k = softmax over component log densities
  std::vector<double> logs(n);
  double max_term = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    logs[k] = log_diag_gaussian(z, components[k]);
    max_term = std::max(max_term, logs[k]);
  }
  double denom = 0.0;
  for (double t : logs) denom += std::exp(t - max_term);

  VampPriorGrads grads;
  grads.d_z.assign(dim, 0.0);
  grads.d_components.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = std::exp(logs[k] - max_term) / denom;
    auto& dc = grads.d_components[k];
    dc.mu.assign(dim, 0.0);
    dc.sigma.assign(dim, 0.0);
    const auto& c = components[k];
    for (std::size_t i = 0; i < dim; ++i) {
      const double inv_var = 1.0 / (c.sigma[i] * c.sigma[i]);
      const double diff = z[i] - c.mu[i];
      grads.d_z[i] += w * (-diff * inv_var);
      dc.mu[i] = w * diff * inv_var;
      dc.sigma[i] = w * (diff * diff * inv_var - 1.0) / c.sigma[i];
    }
  }
  return grads;
}

double kl_mc_estimate(const LatentPosterior& post, const std::vector<double>& z,
                      const std::vector<LatentPosterior>& components) {
  return log_diag_gaussian(z, post) - vamp_log_prior(z, components);
}

// ---- losses ----------------------------------------------------------------------

namespace {

double masked_sq_error(const nn::Mat& x, const nn::Mat& x_hat,
                       const std::vector<bool>& mask, std::size_t* n_values) {
  if (x.rows != x_hat.rows || x.cols != x_hat.cols)
    throw ShapeMismatch("loss: prediction shape != target shape");
  if (!mask.empty() && mask.size() != x.rows)
    throw ShapeMismatch("loss: mask length != frame count");
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < x.rows; ++t) {
    if (!mask.empty() && !mask[t]) continue;
    const double* a = x.row(t);
    const double* b = x_hat.row(t);
    for (std::size_t c = 0; c < x.cols; ++c) {
      const double e = b[c] - a[c];
      acc += e * e;
      ++count;
    }
  }
  *n_values = count;
  return acc;
}

}  // namespace

double ae_loss(const nn::Mat& x, const nn::Mat& x_hat,
               const std::vector<bool>& mask) {
  std::size_t count = 0;
  const double acc = masked_sq_error(x, x_hat, mask, &count);
  if (count == 0) throw InvalidParams("ae_loss: no unmasked frames");
  return acc / static_cast<double>(count);
}

VaeLossParts vae_loss(const nn::Mat& x, const nn::Mat& x_hat,
                      const std::vector<LatentPosterior>& posteriors,
                      const std::vector<std::vector<double>>& z_samples,
                      double beta,
                      const std::vector<LatentPosterior>& components,
                      const std::vector<bool>& mask) {
  if (posteriors.size() != z_samples.size())
    throw ShapeMismatch("vae_loss: one z sample needed per posterior");
  VaeLossParts parts;
  parts.recon = ae_loss(x, x_hat, mask);
  double kl_acc = 0.0;
  for (std::size_t p = 0; p < posteriors.size(); ++p) {
    kl_acc += kl_mc_estimate(posteriors[p], z_samples[p], components);
  }
  parts.kl = posteriors.empty()
                 ? 0.0
                 : kl_acc / static_cast<double>(posteriors.size());
  parts.total = parts.recon + beta * parts.kl;
  return parts;
}

// ---- batch forward/backward ---------------------------------------------------------

double batch_loss(ProsodyModel& model,
                  const std::vector<const TrainItem*>& batch,
                  const std::vector<std::vector<double>>& noise, double beta,
                  bool with_grad, double* recon_out, double* kl_out) {
  const bool vae = model.kind() == ModelKind::VaeVamp;
  const std::size_t latent = model.config().latent_dim;

  std::size_t total_values = 0;
  std::size_t total_phrases = 0;
  for (const TrainItem* item : batch) {
    total_values += item->features.rows * item->features.cols;
    total_phrases += item->phrase_ranges.size();
  }
  if (total_values == 0) throw InvalidParams("batch_loss: empty batch");
  if (vae && noise.size() != total_phrases)
    throw ShapeMismatch("batch_loss: need one noise vector per phrase");

  std::vector<LatentPosterior> components;
  std::vector<EncoderCache> comp_caches;
  std::vector<LatentPosterior> comp_grads;
  if (vae) {
    components = model.vamp_components(with_grad ? &comp_caches : nullptr);
    if (with_grad) {
      comp_grads.assign(components.size(), LatentPosterior());
      for (auto& g : comp_grads) {
        g.mu.assign(latent, 0.0);
        g.sigma.assign(latent, 0.0);
      }
    }
  }

  const double recon_norm = static_cast<double>(total_values);
  const double kl_norm =
      total_phrases > 0 ? static_cast<double>(total_phrases) : 1.0;
  double sq_acc = 0.0;
  double kl_acc = 0.0;
  std::size_t noise_cursor = 0;

  for (const TrainItem* item : batch) {
    EncoderCache enc_cache;
    auto encodings =
        model.encode_phrases(item->features, item->phrase_ranges, enc_cache);

    std::vector<std::vector<double>> zs(encodings.size());
    std::vector<const std::vector<double>*> eps(encodings.size(), nullptr);
    for (std::size_t p = 0; p < encodings.size(); ++p) {
      if (vae) {
        eps[p] = &noise[noise_cursor++];
        zs[p] = reparameterize(encodings[p].post, *eps[p]);
      } else {
        zs[p] = encodings[p].z;
      }
    }

    DecoderCache dec_cache;
    nn::Mat y =
        model.decode(zs, item->phrase_ranges, item->frame_phones, dec_cache);

    nn::Mat dy(y.rows, y.cols);
    for (std::size_t i = 0; i < y.data.size(); ++i) {
      const double e = y.data[i] - item->features.data[i];
      sq_acc += e * e;
      dy.data[i] = 2.0 * e / recon_norm;
    }

    if (!with_grad && !vae) continue;

    std::vector<std::vector<double>> d_codes;
    if (with_grad) d_codes = model.decoder_backward(dec_cache, dy);

    if (vae) {
      std::vector<LatentPosterior> d_posts(encodings.size());
      for (std::size_t p = 0; p < encodings.size(); ++p) {
        kl_acc += kl_mc_estimate(encodings[p].post, zs[p], components);
        if (!with_grad) continue;
        const double w = beta / kl_norm;
        auto prior_grads = vamp_log_prior_backward(zs[p], components);
        auto& dp = d_posts[p];
        dp.mu.assign(latent, 0.0);
        dp.sigma.assign(latent, 0.0);
        for (std::size_t i = 0; i < latent; ++i) {
          const double dz_total =
              d_codes[p][i] + w * (-prior_grads.d_z[i]);
          dp.mu[i] = dz_total;
          dp.sigma[i] = dz_total * (*eps[p])[i] +
                        w * (-1.0 / encodings[p].post.sigma[i]);
        }
        for (std::size_t k = 0; k < components.size(); ++k) {
          for (std::size_t i = 0; i < latent; ++i) {
            comp_grads[k].mu[i] += w * (-prior_grads.d_components[k].mu[i]);
            comp_grads[k].sigma[i] +=
                w * (-prior_grads.d_components[k].sigma[i]);
          }
        }
      }
      if (with_grad) model.encoder_backward(enc_cache, {}, d_posts);
    } else if (with_grad) {
      model.encoder_backward(enc_cache, d_codes, {});
    }
  }

  if (vae && with_grad) model.pseudo_backward(comp_caches, comp_grads);

  const double recon = sq_acc / recon_norm;
  const double kl = vae ? kl_acc / kl_norm : 0.0;
  if (recon_out) *recon_out = recon;
  if (kl_out) *kl_out = kl;
  const double total = recon + (vae ? beta * kl : 0.0);
  if (!std::isfinite(total))
    throw NonFiniteLoss("batch_loss: loss is not finite");
  return total;
}

// ---- training --------------------------------------------------------------------

void init_pseudo_inputs_from_corpus(ProsodyModel& model,
                                    const std::vector<TrainItem>& corpus,
                                    Rng& rng) {
  if (corpus.empty())
    throw InvalidParams("init_pseudo_inputs_from_corpus: empty corpus");
  const std::size_t dim = model.config().feat_dim;
  for (nn::ParamTensor* p : model.pseudo_inputs()) {
    const std::size_t frames = p->size() / dim;
    for (std::size_t f = 0; f < frames; ++f) {
      const auto& item = corpus[rng.uniform_int(corpus.size())];
      const std::size_t src = rng.uniform_int(item.features.rows);
      for (std::size_t c = 0; c < dim; ++c) {
        p->value[f * dim + c] = item.features.at(src, c);
      }
    }
  }
}

ProsodyModel train(const ModelConfig& config,
                   const std::vector<TrainItem>& corpus,
                   nn::TrainSchedule schedule, std::uint64_t seed,
                   std::vector<EpochMetrics>* metrics,
                   const std::function<void(const ProsodyModel&, int)>&
                       epoch_hook) {
  if (corpus.empty()) throw EmptyCorpus("train: empty corpus");
  for (const auto& item : corpus) {
    if (item.frame_phones.size() != item.features.rows)
      throw ShapeMismatch("train: frame phones do not match features");
  }

  ProsodyModel model(config, Rng::derive_seed(seed, 1));
  Rng pseudo_rng(Rng::derive_seed(seed, 2));
  Rng shuffle_rng(Rng::derive_seed(seed, 3));
  Rng noise_rng(Rng::derive_seed(seed, 4));
  if (config.kind == ModelKind::VaeVamp)
    init_pseudo_inputs_from_corpus(model, corpus, pseudo_rng);

  const int n = static_cast<int>(corpus.size());
  const int batch_size = std::max(1, schedule.batch_size);
  schedule.batches_per_epoch = (n + batch_size - 1) / batch_size;

  nn::AdamState adam(model.params());
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  long long step = 0;
  for (int epoch = 0; epoch < schedule.total_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double beta = nn::kl_weight_at(epoch, schedule);
    // Fisher-Yates with the dedicated shuffle stream.
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);
    }

    double recon_sum = 0.0, kl_sum = 0.0, lr = 0.0;
    int batches = 0;
    for (int begin = 0; begin < n; begin += batch_size) {
      const int end = std::min(begin + batch_size, n);
      std::vector<const TrainItem*> batch;
      std::size_t phrases = 0;
      for (int i = begin; i < end; ++i) {
        batch.push_back(&corpus[order[static_cast<std::size_t>(i)]]);
        phrases += batch.back()->phrase_ranges.size();
      }
      std::vector<std::vector<double>> noise;
      if (config.kind == ModelKind::VaeVamp) {
        noise.resize(phrases);
        for (auto& eps : noise) {
          eps.resize(config.latent_dim);
          for (double& v : eps) v = noise_rng.normal();
        }
      }
      model.params().zero_grads();
      double recon = 0.0, kl = 0.0;
      batch_loss(model, batch, noise, beta, /*with_grad=*/true, &recon, &kl);
      ++step;
      lr = nn::lr_at(step, schedule);
      nn::adam_step(model.params(), adam, lr);
      recon_sum += recon;
      kl_sum += kl;
      ++batches;
    }

    if (metrics) {
      EpochMetrics row;
      row.epoch = epoch;
      row.lr = lr;
      row.beta = beta;
      row.recon = recon_sum / std::max(1, batches);
      row.kl = kl_sum / std::max(1, batches);
      row.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
      metrics->push_back(row);
    }
    if (epoch_hook) epoch_hook(model, epoch);
  }
  return model;
}

}  // namespace intonation::model
