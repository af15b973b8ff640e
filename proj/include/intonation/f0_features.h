#ifndef INTONATION_F0_FEATURES_H
#define INTONATION_F0_FEATURES_H

#include <cstddef>
#include <string>
#include <vector>

#include "intonation/errors.h"

namespace intonation::f0 {

inline constexpr double kFrameShiftSeconds = 0.005;

/// Per-frame F0 track in Hz. 0.0 encodes an unvoiced frame.
struct F0Contour {
  std::vector<double> f0_hz;

  std::size_t size() const { return f0_hz.size(); }
  bool voiced(std::size_t t) const { return f0_hz[t] > 0.0; }
};

/// Corpus-level normalization statistics over log-Hz, plus the global
/// standard deviation of each feature stream after normalization.
struct NormStats {
  double mean = 0.0;       // log-Hz
  double std = 1.0;        // log-Hz
  double global_std_static = 1.0;
  double global_std_delta = 1.0;
  double global_std_deltadelta = 1.0;
};

/// T x 3 feature frames, columns = (static, delta, delta-delta) of
/// normalized logF0. Row-major.
struct FeatureSequence {
  std::size_t frames = 0;
  std::vector<double> data;  // frames * 3

  double& at(std::size_t t, std::size_t s) { return data[t * 3 + s]; }
  double at(std::size_t t, std::size_t s) const { return data[t * 3 + s]; }
};

/// Fills unvoiced gaps by linear interpolation between the flanking voiced
/// frames; leading/trailing unvoiced runs copy the nearest voiced value.
/// Voiced frames pass through untouched. Idempotent.
F0Contour interpolate_unvoiced(const F0Contour& contour);

/// Mean/std of log-interpolated F0 over all frames of all contours, then the
/// global std of each stream after normalization and delta computation.
/// Degenerate stds are floored at 1e-6.
NormStats compute_norm_stats(const std::vector<F0Contour>& corpus);

/// Delta and delta-delta windows over a static trajectory, edge frames
/// replicated (x[-1] := x[0], x[T] := x[T-1]):
///   delta_t  = 0.5 * (x[t+1] - x[t-1])
///   ddelta_t = x[t+1] - 2 x[t] + x[t-1]
FeatureSequence compute_deltas(const std::vector<double>& statics);

/// Normalizes an interpolated contour into model features:
/// static = (log f0 - mean) / std, then deltas.
FeatureSequence contour_to_features(const F0Contour& interpolated,
                                    const NormStats& stats);

/// Maximum-likelihood trajectory from per-frame stream means: solves
/// (W' S^-1 W) c = W' S^-1 mu with W = [I; delta window; delta-delta window]
/// and S diagonal with the squared global stream stds, via a banded
/// (bandwidth 2) symmetric positive-definite Cholesky solve.
std::vector<double> mlpg(const FeatureSequence& means, const NormStats& stats);

/// Inverse of the static normalization: f0 = exp(static * std + mean).
F0Contour features_to_hz(const std::vector<double>& statics,
                         const NormStats& stats);

/// Root-mean-square error in Hz over the frames voiced in the reference.
double f0_rmse(const F0Contour& reference, const F0Contour& generated);

/// Reads an F0 text file, one Hz value per line (0.0 = unvoiced).
F0Contour read_f0_file(const std::string& path);
/// Writes an F0 text file; values print with full round-trip precision.
void write_f0_file(const std::string& path, const F0Contour& contour);

// ---- banded SPD solver -----------------------------------------------------

/// Symmetric banded matrix, lower storage: band(d, t) holds A(t+d, t) for
/// diagonals d = 0..bandwidth.
struct BandedMatrix {
  std::size_t n = 0;
  std::size_t bandwidth = 0;
  std::vector<double> bands;  // (bandwidth + 1) * n

  BandedMatrix(std::size_t n_, std::size_t bw)
      : n(n_), bandwidth(bw), bands((bw + 1) * n_, 0.0) {}
  double& at(std::size_t diag, std::size_t col) { return bands[diag * n + col]; }
  double at(std::size_t diag, std::size_t col) const {
    return bands[diag * n + col];
  }
};

/// Solves A x = b for SPD banded A via in-place banded Cholesky.
/// Throws SingularSystem if a pivot is not strictly positive.
std::vector<double> solve_banded_spd(BandedMatrix a, std::vector<double> b);

}  // namespace intonation::f0

#endif  // INTONATION_F0_FEATURES_H
