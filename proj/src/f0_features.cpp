#include "intonation/f0_features.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace intonation::f0 {

namespace {

constexpr double kStdFloor = 1e-6;

// One window row as (column, coefficient) pairs. Stream 0 = static,
// 1 = delta, 2 = delta-delta; edge frames use replication, which makes the
// delta rows of a length-1 sequence empty.
void window_row(int stream, int t, int total,
                std::vector<std::pair<int, double>>& row) {
  row.clear();
  const int last = total - 1;
  switch (stream) {
    case 0:
      row.emplace_back(t, 1.0);
      break;
    case 1:
      if (total == 1) return;
      if (t == 0) {
        row.emplace_back(0, -0.5);
        row.emplace_back(1, 0.5);
      } else if (t == last) {
        row.emplace_back(last - 1, -0.5);
        row.emplace_back(last, 0.5);
      } else {
        row.emplace_back(t - 1, -0.5);
        row.emplace_back(t + 1, 0.5);
      }
      break;
    case 2:
      if (total == 1) return;
      if (t == 0) {
        row.emplace_back(0, -1.0);
        row.emplace_back(1, 1.0);
      } else if (t == last) {
        row.emplace_back(last - 1, 1.0);
        row.emplace_back(last, -1.0);
      } else {
        row.emplace_back(t - 1, 1.0);
        row.emplace_back(t, -2.0);
        row.emplace_back(t + 1, 1.0);
      }
      break;
    default:
      throw InternalError("window_row: bad stream index");
  }
}

double population_std(double sum, double sum_sq, double n) {
  const double mean = sum / n;
  double var = sum_sq / n - mean * mean;
  if (var < 0.0) var = 0.0;
  return std::max(std::sqrt(var), kStdFloor);
}

}  // namespace

F0Contour interpolate_unvoiced(const F0Contour& contour) {
  const auto& f = contour.f0_hz;
  const std::size_t n = f.size();
  std::size_t first_voiced = n;
  for (std::size_t t = 0; t < n; ++t) {
    if (f[t] > 0.0) {
      first_voiced = t;
      break;
    }
  }
  if (first_voiced == n)
    throw AllUnvoiced("interpolate_unvoiced: contour has no voiced frame");

  F0Contour out;
  out.f0_hz.assign(f.begin(), f.end());
  // Leading run copies the first voiced value.
  for (std::size_t t = 0; t < first_voiced; ++t) out.f0_hz[t] = f[first_voiced];

  std::size_t prev = first_voiced;
  for (std::size_t t = first_voiced + 1; t < n; ++t) {
    if (f[t] <= 0.0) continue;
    if (t > prev + 1) {
      const double lo = f[prev], hi = f[t];
      const double span = static_cast<double>(t - prev);
      for (std::size_t k = prev + 1; k < t; ++k) {
        out.f0_hz[k] = lo + (hi - lo) * static_cast<double>(k - prev) / span;
      }
    }
    prev = t;
  }
  // Trailing run copies the last voiced value.
  for (std::size_t t = prev + 1; t < n; ++t) out.f0_hz[t] = f[prev];
  return out;
}

FeatureSequence compute_deltas(const std::vector<double>& statics) {
  const std::size_t n = statics.size();
  if (n == 0) throw InvalidParams("compute_deltas: empty input");
  FeatureSequence seq;
  seq.frames = n;
  seq.data.assign(n * 3, 0.0);
  auto x = [&](std::ptrdiff_t t) {
    if (t < 0) return statics[0];
    if (t >= static_cast<std::ptrdiff_t>(n)) return statics[n - 1];
    return statics[t];
  };
  for (std::size_t t = 0; t < n; ++t) {
    const auto ti = static_cast<std::ptrdiff_t>(t);
    seq.at(t, 0) = statics[t];
    seq.at(t, 1) = 0.5 * (x(ti + 1) - x(ti - 1));
    seq.at(t, 2) = x(ti + 1) - 2.0 * statics[t] + x(ti - 1);
  }
  return seq;
}

FeatureSequence contour_to_features(const F0Contour& interpolated,
                                    const NormStats& stats) {
  std::vector<double> statics(interpolated.size());
  for (std::size_t t = 0; t < statics.size(); ++t) {
    if (interpolated.f0_hz[t] <= 0.0)
      throw InvalidParams("contour_to_features: unvoiced frame present");
    statics[t] = (std::log(interpolated.f0_hz[t]) - stats.mean) / stats.std;
  }
  return compute_deltas(statics);
}

NormStats compute_norm_stats(const std::vector<F0Contour>& corpus) {
  if (corpus.empty()) throw EmptyCorpus("compute_norm_stats: empty corpus");

  double sum = 0.0, sum_sq = 0.0, count = 0.0;
  std::vector<F0Contour> interpolated;
  interpolated.reserve(corpus.size());
  for (const auto& contour : corpus) {
    interpolated.push_back(interpolate_unvoiced(contour));
    for (double hz : interpolated.back().f0_hz) {
      const double lf = std::log(hz);
      sum += lf;
      sum_sq += lf * lf;
      count += 1.0;
    }
  }
  NormStats stats;
  stats.mean = sum / count;
  stats.std = population_std(sum, sum_sq, count);

  double s[3] = {0, 0, 0}, sq[3] = {0, 0, 0};
  for (const auto& contour : interpolated) {
    FeatureSequence feats = contour_to_features(contour, stats);
    for (std::size_t t = 0; t < feats.frames; ++t) {
      for (int k = 0; k < 3; ++k) {
        const double v = feats.at(t, k);
        s[k] += v;
        sq[k] += v * v;
      }
    }
  }
  stats.global_std_static = population_std(s[0], sq[0], count);
  stats.global_std_delta = population_std(s[1], sq[1], count);
  stats.global_std_deltadelta = population_std(s[2], sq[2], count);
  return stats;
}

std::vector<double> solve_banded_spd(BandedMatrix a, std::vector<double> b) {
  const std::size_t n = a.n;
  const std::size_t bw = a.bandwidth;
  if (b.size() != n)
    throw ShapeMismatch("solve_banded_spd: rhs length != matrix order");

  // In-place banded Cholesky: bands end up holding L.
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k_lo = j > bw ? j - bw : 0;
    double diag = a.at(0, j);
    for (std::size_t k = k_lo; k < j; ++k) {
      const double ljk = a.at(j - k, k);
      diag -= ljk * ljk;
    }
    if (!(diag > 0.0) || !std::isfinite(diag))
      throw SingularSystem("solve_banded_spd: non-positive pivot at column " +
                           std::to_string(j));
    const double ljj = std::sqrt(diag);
    a.at(0, j) = ljj;
    const std::size_t i_hi = std::min(j + bw, n - 1);
    for (std::size_t i = j + 1; i <= i_hi; ++i) {
      const std::size_t lo = i > bw ? i - bw : 0;
      double sum = a.at(i - j, j);
      for (std::size_t k = std::max(lo, k_lo); k < j; ++k) {
        sum -= a.at(i - k, k) * a.at(j - k, k);
      }
      a.at(i - j, j) = sum / ljj;
    }
  }
  // Forward substitution L y = b.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k_lo = i > bw ? i - bw : 0;
    double v = b[i];
    for (std::size_t k = k_lo; k < i; ++k) v -= a.at(i - k, k) * b[k];
    b[i] = v / a.at(0, i);
  }
  // Back substitution L' x = y.
  for (std::size_t ii = n; ii-- > 0;) {
    const std::size_t k_hi = std::min(ii + bw, n - 1);
    double v = b[ii];
    for (std::size_t k = ii + 1; k <= k_hi; ++k) v -= a.at(k - ii, ii) * b[k];
    b[ii] = v / a.at(0, ii);
  }
  return b;
}

std::vector<double> mlpg(const FeatureSequence& means, const NormStats& stats) {
  const std::size_t n = means.frames;
  if (n == 0) throw InvalidParams("mlpg: empty mean sequence");
  const double weights[3] = {
      1.0 / (stats.global_std_static * stats.global_std_static),
      1.0 / (stats.global_std_delta * stats.global_std_delta),
      1.0 / (stats.global_std_deltadelta * stats.global_std_deltadelta)};

  BandedMatrix normal(n, 2);
  std::vector<double> rhs(n, 0.0);
  std::vector<std::pair<int, double>> row;
  for (int s = 0; s < 3; ++s) {
    const double w = weights[s];
    for (std::size_t t = 0; t < n; ++t) {
      window_row(s, static_cast<int>(t), static_cast<int>(n), row);
      const double mu = means.at(t, s);
      for (std::size_t p = 0; p < row.size(); ++p) {
        rhs[row[p].first] += w * row[p].second * mu;
        for (std::size_t q = 0; q <= p; ++q) {
          const int i = std::max(row[p].first, row[q].first);
          const int j = std::min(row[p].first, row[q].first);
          const double contrib = w * row[p].second * row[q].second;
          if (p == q) {
            normal.at(0, j) += contrib;
          } else {
            normal.at(i - j, j) += contrib;
          }
        }
      }
    }
  }
  return solve_banded_spd(std::move(normal), std::move(rhs));
}

F0Contour features_to_hz(const std::vector<double>& statics,
                         const NormStats& stats) {
  F0Contour out;
  out.f0_hz.resize(statics.size());
  for (std::size_t t = 0; t < statics.size(); ++t) {
    out.f0_hz[t] = std::exp(statics[t] * stats.std + stats.mean);
  }
  return out;
}

double f0_rmse(const F0Contour& reference, const F0Contour& generated) {
  if (reference.size() != generated.size())
    throw LengthMismatch("f0_rmse: contour lengths differ (" +
                         std::to_string(reference.size()) + " vs " +
                         std::to_string(generated.size()) + ")");
  double sum_sq = 0.0;
  std::size_t voiced = 0;
  for (std::size_t t = 0; t < reference.size(); ++t) {
    if (!reference.voiced(t)) continue;
    const double d = reference.f0_hz[t] - generated.f0_hz[t];
    sum_sq += d * d;
    ++voiced;
  }
  if (voiced == 0)
    throw AllUnvoiced("f0_rmse: reference has no voiced frame");
  return std::sqrt(sum_sq / static_cast<double>(voiced));
}

F0Contour read_f0_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileMissing("cannot open F0 file: " + path);
  F0Contour contour;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str() || !std::isfinite(v) || v < 0.0)
      throw FormatError("bad F0 value in " + path, line_no);
    contour.f0_hz.push_back(v);
  }
  if (contour.f0_hz.empty())
    throw FormatError("empty F0 file: " + path, line_no);
  return contour;
}

void write_f0_file(const std::string& path, const F0Contour& contour) {
  std::ofstream out(path);
  if (!out) throw FileMissing("cannot write F0 file: " + path);
  char buf[40];
  for (double v : contour.f0_hz) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    out << buf;
  }
}

}  // namespace intonation::f0
