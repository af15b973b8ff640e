#ifndef INTONATION_PROSODY_MODELS_H
#define INTONATION_PROSODY_MODELS_H

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "intonation/f0_features.h"
#include "intonation/neural_core.h"
#include "intonation/rng.h"
#include "intonation/tensor.h"

namespace intonation::model {

enum class ModelKind { Ae, VaeVamp };

std::string kind_name(ModelKind kind);
ModelKind parse_kind(const std::string& name);

/// Diagonal Gaussian over the latent space.
struct LatentPosterior {
  std::vector<double> mu;
  std::vector<double> sigma;  // elementwise > 0
};

/// Architecture hyperparameters. The phone list fixes the one-hot order the
/// decoder is conditioned on.
struct ModelConfig {
  ModelKind kind = ModelKind::Ae;
  std::size_t feat_dim = 3;
  std::size_t ff_units = 256;
  std::size_t gru_units = 64;
  std::size_t gru_layers = 3;
  std::size_t latent_dim = 16;
  std::vector<std::string> phones;
  std::vector<std::size_t> pseudo_lengths;  // VAE-VAMP only, one per pseudo-input

  std::size_t pseudo_count() const { return pseudo_lengths.size(); }

  /// The default pseudo-input length ladder: lengths lo, lo+step, ... with
  /// each length repeated `repeats` times.
  static std::vector<std::size_t> length_ladder(std::size_t lo,
                                                std::size_t step,
                                                std::size_t repeats,
                                                std::size_t count);
};

/// Encoder output for one phrase: the AE embedding, or the VAE posterior.
struct PhraseEncoding {
  std::vector<double> z;  // AE only
  LatentPosterior post;   // VAE only
};

struct StackCache {
  nn::DenseCache ff;
  std::vector<nn::GruCache> grus;
  nn::DenseCache head;
};

struct EncoderCache {
  StackCache stack;
  std::vector<std::pair<int, int>> ranges;
};

struct DecoderCache {
  StackCache stack;
  std::vector<std::pair<int, int>> ranges;
};

/// Feedforward + GRU stack + linear head shared by encoder and decoder.
class LayerStack {
 public:
  LayerStack(nn::ParamStore& store, const std::string& prefix,
             std::size_t in_dim, std::size_t ff_units, std::size_t gru_units,
             std::size_t gru_layers, std::size_t out_dim, Rng& rng);

  nn::Mat forward(const nn::Mat& x, StackCache& cache) const;
  nn::Mat backward(const StackCache& cache, const nn::Mat& dy) const;

  std::size_t in_dim() const { return ff_->in_dim(); }
  std::size_t out_dim() const { return head_->out_dim(); }

 private:
  std::unique_ptr<nn::Dense> ff_;
  std::vector<std::unique_ptr<nn::GruLayer>> grus_;
  std::unique_ptr<nn::Dense> head_;
};

/// The phrase-level prosody autoencoder. Holds the encoder stack, decoder
/// stack and (for VAE-VAMP) the learnable pseudo-input sequences.
class ProsodyModel {
 public:
  ProsodyModel(ModelConfig config, std::uint64_t init_seed);

  const ModelConfig& config() const { return config_; }
  ModelKind kind() const { return config_.kind; }
  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }

  /// Runs the frame-clocked encoder over the whole utterance and emits the
  /// head output at the last frame of each phrase range.
  std::vector<PhraseEncoding> encode_phrases(
      const nn::Mat& features, const std::vector<std::pair<int, int>>& ranges,
      EncoderCache& cache) const;

  /// Backward for encode_phrases. d_z is used for AE; d_mu/d_sigma for the
  /// VAE (one entry per phrase). Accumulates parameter grads and returns
  /// dL/d(features).
  nn::Mat encoder_backward(const EncoderCache& cache,
                           const std::vector<std::vector<double>>& d_z,
                           const std::vector<LatentPosterior>& d_post) const;

  /// Decodes one latent code per phrase against frame-level phone identity.
  /// Ranges must tile [0, T) and frame_phones must have T entries.
  nn::Mat decode(const std::vector<std::vector<double>>& codes,
                 const std::vector<std::pair<int, int>>& ranges,
                 const std::vector<int>& frame_phones,
                 DecoderCache& cache) const;

  /// Backward for decode: accumulates parameter grads and returns dL/d(code)
  /// per phrase.
  std::vector<std::vector<double>> decoder_backward(const DecoderCache& cache,
                                                    const nn::Mat& dy) const;

  /// Encoder posteriors of every pseudo-input (each treated as one phrase
  /// spanning its whole length). Caches, when given, enable
  /// pseudo_backward.
  std::vector<LatentPosterior> vamp_components(
      std::vector<EncoderCache>* caches) const;

  /// Backward through the pseudo-input encoders; routes input gradients into
  /// the pseudo-input parameters.
  void pseudo_backward(const std::vector<EncoderCache>& caches,
                       const std::vector<LatentPosterior>& d_components);

  const std::vector<nn::ParamTensor*>& pseudo_inputs() const { return pseudo_; }
  nn::Mat pseudo_input_values(std::size_t k) const;

 private:
  ModelConfig config_;
  nn::ParamStore store_;
  std::unique_ptr<LayerStack> encoder_;
  std::unique_ptr<LayerStack> decoder_;
  std::vector<nn::ParamTensor*> pseudo_;
};

// ---- latent-space math ------------------------------------------------------

/// z = mu + sigma . noise
std::vector<double> reparameterize(const LatentPosterior& post,
                                   const std::vector<double>& noise);

/// log N(z; mu, diag sigma^2)
double log_diag_gaussian(const std::vector<double>& z,
                         const LatentPosterior& g);

/// log p(z) under the mixture-of-posteriors prior:
/// logsumexp_k log N(z; mu_k, sigma_k) - log K.
double vamp_log_prior(const std::vector<double>& z,
                      const std::vector<LatentPosterior>& components);

struct VampPriorGrads {
  std::vector<double> d_z;
  std::vector<LatentPosterior> d_components;  // d_mu, d_sigma per component
};

/// Gradients of vamp_log_prior with respect to z and every component.
VampPriorGrads vamp_log_prior_backward(
    const std::vector<double>& z,
    const std::vector<LatentPosterior>& components);

/// Single-sample Monte-Carlo KL estimate: log q(z|x) - log p(z), with z
/// drawn from the posterior via reparameterize.
double kl_mc_estimate(const LatentPosterior& post, const std::vector<double>& z,
                      const std::vector<LatentPosterior>& components);

// ---- losses -------------------------------------------------------------------

/// Mean squared error over unmasked frames and streams. An empty mask keeps
/// every frame.
double ae_loss(const nn::Mat& x, const nn::Mat& x_hat,
               const std::vector<bool>& mask = {});

struct VaeLossParts {
  double total = 0.0;
  double recon = 0.0;
  double kl = 0.0;
};

/// recon MSE + beta * mean-per-phrase KL estimate.
VaeLossParts vae_loss(const nn::Mat& x, const nn::Mat& x_hat,
                      const std::vector<LatentPosterior>& posteriors,
                      const std::vector<std::vector<double>>& z_samples,
                      double beta,
                      const std::vector<LatentPosterior>& components,
                      const std::vector<bool>& mask = {});

// ---- training -------------------------------------------------------------------

/// One training utterance: features, phrase ranges tiling [0, T), and the
/// frame-level phone ids.
struct TrainItem {
  nn::Mat features;
  std::vector<std::pair<int, int>> phrase_ranges;
  std::vector<int> frame_phones;
};

struct EpochMetrics {
  int epoch = 0;
  double lr = 0.0;
  double beta = 0.0;
  double recon = 0.0;
  double kl = 0.0;
  double wall_ms = 0.0;
};

/// Forward (and optionally backward) over a batch of items. Reconstruction
/// error is averaged over every frame and stream in the batch; the KL term is
/// averaged per phrase. For the VAE, noise supplies one latent-dim vector per
/// phrase, in batch order. Returns the total loss; recon/kl are reported
/// through the out-parameters.
double batch_loss(ProsodyModel& model,
                  const std::vector<const TrainItem*>& batch,
                  const std::vector<std::vector<double>>& noise, double beta,
                  bool with_grad, double* recon_out, double* kl_out);

/// Full training run: deterministic given the seed (init, shuffles and noise
/// all derive from it). Metrics are recorded per epoch. The optional
/// checkpoint hook runs after every epoch.
ProsodyModel train(const ModelConfig& config,
                   const std::vector<TrainItem>& corpus,
                   nn::TrainSchedule schedule, std::uint64_t seed,
                   std::vector<EpochMetrics>* metrics,
                   const std::function<void(const ProsodyModel&, int)>&
                       epoch_hook = nullptr);

/// Draws pseudo-input initial values from the empirical distribution of the
/// training feature frames. Called by train; exposed for tests.
void init_pseudo_inputs_from_corpus(ProsodyModel& model,
                                    const std::vector<TrainItem>& corpus,
                                    Rng& rng);

}  // namespace intonation::model

#endif  // INTONATION_PROSODY_MODELS_H
