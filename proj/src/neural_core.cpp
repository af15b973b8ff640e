#include "intonation/neural_core.h"

#include <cmath>
#include <cstring>

namespace intonation::nn {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y (+)= W x, W is rows x cols, x has cols entries.
inline void matvec(const double* w, std::size_t rows, std::size_t cols,
                   const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* wrow = w + i * cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += wrow[j] * x[j];
    y[i] += acc;
  }
}

// y (+)= W' x, W is rows x cols, x has rows entries, y has cols entries.
inline void matvec_t(const double* w, std::size_t rows, std::size_t cols,
                     const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* wrow = w + i * cols;
    for (std::size_t j = 0; j < cols; ++j) y[j] += xi * wrow[j];
  }
}

// dW += a b', a has rows entries, b has cols entries.
inline void outer_acc(double* dw, std::size_t rows, std::size_t cols,
                      const double* a, const double* b) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    double* drow = dw + i * cols;
    for (std::size_t j = 0; j < cols; ++j) drow[j] += ai * b[j];
  }
}

inline void axpy(double* y, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

}  // namespace

// ---- init -------------------------------------------------------------------

void init_xavier_uniform(ParamTensor& p, std::size_t fan_in,
                         std::size_t fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : p.value) v = rng.uniform(-a, a);
}

void init_orthogonal(ParamTensor& p, std::size_t dim, Rng& rng) {
  if (p.size() != dim * dim)
    throw ShapeMismatch("init_orthogonal: expected square matrix");
  for (double& v : p.value) v = rng.normal();
  // Gram-Schmidt over rows.
  for (std::size_t i = 0; i < dim; ++i) {
    double* ri = p.value.data() + i * dim;
    for (std::size_t k = 0; k < i; ++k) {
      const double* rk = p.value.data() + k * dim;
      double dot = 0.0;
      for (std::size_t j = 0; j < dim; ++j) dot += ri[j] * rk[j];
      for (std::size_t j = 0; j < dim; ++j) ri[j] -= dot * rk[j];
    }
    double norm = 0.0;
    for (std::size_t j = 0; j < dim; ++j) norm += ri[j] * ri[j];
    norm = std::sqrt(norm);
    if (norm < 1e-12)
      throw InternalError("init_orthogonal: degenerate random matrix");
    for (std::size_t j = 0; j < dim; ++j) ri[j] /= norm;
  }
}

// ---- Dense ------------------------------------------------------------------

Dense::Dense(ParamStore& store, const std::string& prefix, std::size_t in,
             std::size_t out, Activation act, Rng& rng)
    : in_(in), out_(out), act_(act) {
  w_ = store.add(prefix + ".w", {out, in});
  b_ = store.add(prefix + ".b", {out});
  init_xavier_uniform(*w_, in, out, rng);
}

Mat Dense::forward(const Mat& x, DenseCache& cache) const {
  if (x.cols != in_)
    throw ShapeMismatch("Dense::forward: input width " + std::to_string(x.cols) +
                        " != " + std::to_string(in_));
  Mat y(x.rows, out_);
  for (std::size_t t = 0; t < x.rows; ++t) {
    double* yt = y.row(t);
    std::memcpy(yt, b_->value.data(), out_ * sizeof(double));
    matvec(w_->value.data(), out_, in_, x.row(t), yt);
    if (act_ == Activation::Tanh) {
      for (std::size_t i = 0; i < out_; ++i) yt[i] = std::tanh(yt[i]);
    }
  }
  cache.input = x;
  cache.output = y;
  return y;
}

Mat Dense::backward(const DenseCache& cache, const Mat& dy) const {
  if (dy.rows != cache.input.rows || dy.cols != out_)
    throw ShapeMismatch("Dense::backward: bad gradient shape");
  Mat dx(cache.input.rows, in_);
  std::vector<double> da(out_);
  for (std::size_t t = 0; t < dy.rows; ++t) {
    const double* dyt = dy.row(t);
    const double* yt = cache.output.row(t);
    for (std::size_t i = 0; i < out_; ++i) {
      da[i] = act_ == Activation::Tanh ? dyt[i] * (1.0 - yt[i] * yt[i])
                                       : dyt[i];
    }
    outer_acc(w_->grad.data(), out_, in_, da.data(), cache.input.row(t));
    axpy(b_->grad.data(), da.data(), out_);
    matvec_t(w_->value.data(), out_, in_, da.data(), dx.row(t));
  }
  return dx;
}

// ---- GRU --------------------------------------------------------------------

GruLayer::GruLayer(ParamStore& store, const std::string& prefix,
                   std::size_t in, std::size_t hidden, Rng& rng)
    : in_(in), hidden_(hidden) {
  wz_ = store.add(prefix + ".wz", {hidden, in});
  wr_ = store.add(prefix + ".wr", {hidden, in});
  wh_ = store.add(prefix + ".wh", {hidden, in});
  uz_ = store.add(prefix + ".uz", {hidden, hidden});
  ur_ = store.add(prefix + ".ur", {hidden, hidden});
  uh_ = store.add(prefix + ".uh", {hidden, hidden});
  bz_ = store.add(prefix + ".bz", {hidden});
  br_ = store.add(prefix + ".br", {hidden});
  bh_ = store.add(prefix + ".bh", {hidden});
  init_xavier_uniform(*wz_, in, hidden, rng);
  init_xavier_uniform(*wr_, in, hidden, rng);
  init_xavier_uniform(*wh_, in, hidden, rng);
  init_orthogonal(*uz_, hidden, rng);
  init_orthogonal(*ur_, hidden, rng);
  init_orthogonal(*uh_, hidden, rng);
}

Mat GruLayer::forward(const Mat& x, GruCache& cache) const {
  if (x.cols != in_) throw ShapeMismatch("GruLayer::forward: bad input width");
  const std::size_t T = x.rows, H = hidden_;
  cache.input = x;
  cache.z = Mat(T, H);
  cache.r = Mat(T, H);
  cache.c = Mat(T, H);
  cache.h = Mat(T, H);
  std::vector<double> az(H), ar(H), ac(H), rh(H);
  std::vector<double> h_prev(H, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const double* xt = x.row(t);
    std::memcpy(az.data(), bz_->value.data(), H * sizeof(double));
    std::memcpy(ar.data(), br_->value.data(), H * sizeof(double));
    matvec(wz_->value.data(), H, in_, xt, az.data());
    matvec(uz_->value.data(), H, H, h_prev.data(), az.data());
    matvec(wr_->value.data(), H, in_, xt, ar.data());
    matvec(ur_->value.data(), H, H, h_prev.data(), ar.data());
    double* zt = cache.z.row(t);
    double* rt = cache.r.row(t);
    for (std::size_t i = 0; i < H; ++i) {
      zt[i] = sigmoid(az[i]);
      rt[i] = sigmoid(ar[i]);
      rh[i] = rt[i] * h_prev[i];
    }
    std::memcpy(ac.data(), bh_->value.data(), H * sizeof(double));
    matvec(wh_->value.data(), H, in_, xt, ac.data());
    matvec(uh_->value.data(), H, H, rh.data(), ac.data());
    double* ct = cache.c.row(t);
    double* ht = cache.h.row(t);
    for (std::size_t i = 0; i < H; ++i) {
      ct[i] = std::tanh(ac[i]);
      ht[i] = (1.0 - zt[i]) * h_prev[i] + zt[i] * ct[i];
      h_prev[i] = ht[i];
    }
  }
  return cache.h;
}

Mat GruLayer::backward(const GruCache& cache, const Mat& dh) const {
  const std::size_t T = cache.input.rows, H = hidden_;
  if (dh.rows != T || dh.cols != H)
    throw ShapeMismatch("GruLayer::backward: bad gradient shape");
  Mat dx(T, in_);
  std::vector<double> carry(H, 0.0);
  std::vector<double> dht(H), dz(H), dc(H), dhp(H), dac(H), drh(H), dar(H),
      daz(H), rh(H);
  const std::vector<double> zeros(H, 0.0);
  for (std::size_t ts = T; ts-- > 0;) {
    const double* h_prev = ts > 0 ? cache.h.row(ts - 1) : zeros.data();
    const double* zt = cache.z.row(ts);
    const double* rt = cache.r.row(ts);
    const double* ct = cache.c.row(ts);
    const double* xt = cache.input.row(ts);
    const double* dext = dh.row(ts);
    for (std::size_t i = 0; i < H; ++i) {
      dht[i] = dext[i] + carry[i];
      dz[i] = dht[i] * (ct[i] - h_prev[i]);
      dc[i] = dht[i] * zt[i];
      dhp[i] = dht[i] * (1.0 - zt[i]);
      dac[i] = dc[i] * (1.0 - ct[i] * ct[i]);
      rh[i] = rt[i] * h_prev[i];
    }
    outer_acc(wh_->grad.data(), H, in_, dac.data(), xt);
    outer_acc(uh_->grad.data(), H, H, dac.data(), rh.data());
    axpy(bh_->grad.data(), dac.data(), H);
    std::fill(drh.begin(), drh.end(), 0.0);
    matvec_t(uh_->value.data(), H, H, dac.data(), drh.data());
    for (std::size_t i = 0; i < H; ++i) {
      const double dr = drh[i] * h_prev[i];
      dhp[i] += drh[i] * rt[i];
      dar[i] = dr * rt[i] * (1.0 - rt[i]);
      daz[i] = dz[i] * zt[i] * (1.0 - zt[i]);
    }
    outer_acc(wr_->grad.data(), H, in_, dar.data(), xt);
    outer_acc(ur_->grad.data(), H, H, dar.data(), h_prev);
    axpy(br_->grad.data(), dar.data(), H);
    outer_acc(wz_->grad.data(), H, in_, daz.data(), xt);
    outer_acc(uz_->grad.data(), H, H, daz.data(), h_prev);
    axpy(bz_->grad.data(), daz.data(), H);
    matvec_t(ur_->value.data(), H, H, dar.data(), dhp.data());
    matvec_t(uz_->value.data(), H, H, daz.data(), dhp.data());
    double* dxt = dx.row(ts);
    matvec_t(wz_->value.data(), H, in_, daz.data(), dxt);
    matvec_t(wr_->value.data(), H, in_, dar.data(), dxt);
    matvec_t(wh_->value.data(), H, in_, dac.data(), dxt);
    carry = dhp;
  }
  return dx;
}

// ---- Adam --------------------------------------------------------------------

AdamState::AdamState(const ParamStore& store) {
  m.resize(store.count());
  v.resize(store.count());
  for (std::size_t i = 0; i < store.count(); ++i) {
    m[i].assign(store[i].size(), 0.0);
    v[i].assign(store[i].size(), 0.0);
  }
}

void adam_step(ParamStore& store, AdamState& state, double lr) {
  if (state.m.size() != store.count())
    throw ShapeMismatch("adam_step: state does not match store");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < store.count(); ++i) {
    ParamTensor& p = store[i];
    if (state.m[i].size() != p.size())
      throw ShapeMismatch("adam_step: state size mismatch for " + p.name);
    auto& mi = state.m[i];
    auto& vi = state.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double g = p.grad[j];
      mi[j] = state.beta1 * mi[j] + (1.0 - state.beta1) * g;
      vi[j] = state.beta2 * vi[j] + (1.0 - state.beta2) * g * g;
      const double m_hat = mi[j] / bc1;
      const double v_hat = vi[j] / bc2;
      p.value[j] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

// ---- schedules -----------------------------------------------------------------

double lr_at(long long step, const TrainSchedule& schedule) {
  if (step < 0) throw InvalidParams("lr_at: negative step");
  const double s_warm = std::max(
      1.0, static_cast<double>(schedule.warmup_epochs) *
               static_cast<double>(schedule.batches_per_epoch));
  const double s = static_cast<double>(step);
  if (s <= s_warm) return schedule.peak_lr * s / s_warm;
  return schedule.peak_lr * std::pow(s_warm / s, schedule.decay_exponent);
}

double kl_weight_at(int epoch, const TrainSchedule& schedule) {
  if (epoch < 0) throw InvalidParams("kl_weight_at: negative epoch");
  if (epoch < schedule.kl_zero_epochs) return 0.0;
  const int ramp = std::max(1, schedule.kl_ramp_epochs);
  const int into = epoch - schedule.kl_zero_epochs;
  if (into >= ramp) return schedule.kl_max;
  return schedule.kl_max * static_cast<double>(into) /
         static_cast<double>(ramp);
}

// ---- gradient check --------------------------------------------------------------

double grad_check(ParamStore& store,
                  const std::function<double(bool with_grad)>& loss_fn,
                  double epsilon) {
  store.zero_grads();
  const double base = loss_fn(true);
  if (!std::isfinite(base)) throw NonFiniteLoss("grad_check: loss is not finite");

  std::vector<std::vector<double>> analytic(store.count());
  for (std::size_t i = 0; i < store.count(); ++i) analytic[i] = store[i].grad;

  double worst = 0.0;
  for (std::size_t i = 0; i < store.count(); ++i) {
    ParamTensor& p = store[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double saved = p.value[j];
      p.value[j] = saved + epsilon;
      const double plus = loss_fn(false);
      p.value[j] = saved - epsilon;
      const double minus = loss_fn(false);
      p.value[j] = saved;
      if (!std::isfinite(plus) || !std::isfinite(minus))
        throw NonFiniteLoss("grad_check: perturbed loss is not finite");
      const double numeric = (plus - minus) / (2.0 * epsilon);
      const double a = analytic[i][j];
      const double denom = std::max({1.0, std::fabs(a), std::fabs(numeric)});
      worst = std::max(worst, std::fabs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace intonation::nn
