#ifndef INTONATION_NEURAL_CORE_H
#define INTONATION_NEURAL_CORE_H

#include <functional>
#include <vector>

#include "intonation/rng.h"
#include "intonation/tensor.h"

namespace intonation::nn {

enum class Activation { Tanh, Identity };

// ---- layers ---------------------------------------------------------------

struct DenseCache {
  Mat input;
  Mat output;
};

/// Fully-connected layer over frame sequences: y_t = act(W x_t + b).
class Dense {
 public:
  Dense(ParamStore& store, const std::string& prefix, std::size_t in,
        std::size_t out, Activation act, Rng& rng);

  Mat forward(const Mat& x, DenseCache& cache) const;
  /// Accumulates dW/db and returns dL/dx.
  Mat backward(const DenseCache& cache, const Mat& dy) const;

  std::size_t in_dim() const { return in_; }
  std::size_t out_dim() const { return out_; }

 private:
  ParamTensor* w_;  // [out, in]
  ParamTensor* b_;  // [out]
  std::size_t in_, out_;
  Activation act_;
};

struct GruCache {
  Mat input;
  Mat z, r, c, h;  // gates, candidate, hidden state, each T x H
};

/// Single GRU layer, frame-clocked, h0 = 0:
///   z_t = sigmoid(Wz x_t + Uz h_{t-1} + bz)
///   r_t = sigmoid(Wr x_t + Ur h_{t-1} + br)
///   c_t = tanh(Wh x_t + Uh (r_t . h_{t-1}) + bh)
///   h_t = (1 - z_t) . h_{t-1} + z_t . c_t
class GruLayer {
 public:
  GruLayer(ParamStore& store, const std::string& prefix, std::size_t in,
           std::size_t hidden, Rng& rng);

  Mat forward(const Mat& x, GruCache& cache) const;
  /// Backward through time. dh holds dL/dh_t per frame (zero rows allowed).
  /// Accumulates parameter grads and returns dL/dx.
  Mat backward(const GruCache& cache, const Mat& dh) const;

  std::size_t in_dim() const { return in_; }
  std::size_t hidden_dim() const { return hidden_; }

 private:
  ParamTensor *wz_, *wr_, *wh_;  // [H, D]
  ParamTensor *uz_, *ur_, *uh_;  // [H, H]
  ParamTensor *bz_, *br_, *bh_;  // [H]
  std::size_t in_, hidden_;
};

// ---- optimizer ------------------------------------------------------------

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long long step = 0;
  std::vector<std::vector<double>> m, v;  // parallel to the store

  explicit AdamState(const ParamStore& store);
};

/// One Adam update over every parameter in the store from its .grad.
void adam_step(ParamStore& store, AdamState& state, double lr);

// ---- schedules ------------------------------------------------------------

struct TrainSchedule {
  double peak_lr = 0.005;
  int warmup_epochs = 8;
  int batches_per_epoch = 1;
  int kl_zero_epochs = 5;
  int kl_ramp_epochs = 20;
  double kl_max = 0.001;
  int total_epochs = 100;
  int batch_size = 32;
  double decay_exponent = 0.5;  // lr ~ (s_warm / s)^exponent past warmup
};

/// Learning rate at a (0-based) batch step: linear 0 -> peak over the warmup
/// steps, then peak * (s_warm / s)^decay_exponent. Continuous everywhere.
double lr_at(long long step, const TrainSchedule& schedule);

/// KL weight at an epoch: zero, then a linear ramp up to kl_max.
double kl_weight_at(int epoch, const TrainSchedule& schedule);

// ---- verification ---------------------------------------------------------

/// Compares analytic gradients against central finite differences
/// (epsilon = 1e-5) for every parameter element. The callback computes the
/// loss; when with_grad is true it must also accumulate gradients into the
/// store (grads are zeroed first). Returns the worst relative error.
double grad_check(ParamStore& store,
                  const std::function<double(bool with_grad)>& loss_fn,
                  double epsilon = 1e-5);

// ---- init helpers ---------------------------------------------------------

void init_xavier_uniform(ParamTensor& p, std::size_t fan_in,
                         std::size_t fan_out, Rng& rng);
/// Orthogonalizes a square matrix parameter (Gram-Schmidt on random rows).
void init_orthogonal(ParamTensor& p, std::size_t dim, Rng& rng);

}  // namespace intonation::nn

#endif  // INTONATION_NEURAL_CORE_H
