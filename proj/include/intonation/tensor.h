#ifndef INTONATION_TENSOR_H
#define INTONATION_TENSOR_H

#include <cstddef>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "intonation/errors.h"

namespace intonation::nn {

/// Row-major matrix of doubles. Sequences are stored as (frames x dim).
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
};

/// Named, shaped parameter with its gradient accumulator.
struct ParamTensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;

  ParamTensor(std::string n, std::vector<std::size_t> s)
      : name(std::move(n)), shape(std::move(s)) {
    std::size_t total = 1;
    for (std::size_t d : shape) total *= d;
    value.assign(total, 0.0);
    grad.assign(total, 0.0);
  }

  std::size_t size() const { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

/// Owns all parameters of a model in a stable registration order; the order
/// defines the checkpoint layout and the Adam state layout.
class ParamStore {
 public:
  ParamTensor* add(const std::string& name, std::vector<std::size_t> shape) {
    for (const auto& p : params_) {
      if (p->name == name)
        throw InternalError("duplicate parameter name: " + name);
    }
    params_.push_back(std::make_unique<ParamTensor>(name, std::move(shape)));
    return params_.back().get();
  }

  ParamTensor* find(const std::string& name) const {
    for (const auto& p : params_) {
      if (p->name == name) return p.get();
    }
    return nullptr;
  }

  void zero_grads() {
    for (auto& p : params_) p->zero_grad();
  }

  std::size_t total_size() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->size();
    return n;
  }

  std::size_t count() const { return params_.size(); }
  ParamTensor& operator[](std::size_t i) { return *params_[i]; }
  const ParamTensor& operator[](std::size_t i) const { return *params_[i]; }

 private:
  std::vector<std::unique_ptr<ParamTensor>> params_;
};

}  // namespace intonation::nn

#endif  // INTONATION_TENSOR_H
