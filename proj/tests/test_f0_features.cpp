#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "intonation/f0_features.h"

using namespace intonation;
using namespace intonation::f0;

namespace {

// Independent dense oracle: builds the three window matrices explicitly
// (same edge-replication convention), forms the normal equations densely and
// solves with Gaussian elimination + partial pivoting.
std::vector<std::vector<double>> dense_window(int stream, int n) {
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  for (int t = 0; t < n; ++t) {
    if (stream == 0) {
      w[t][t] = 1.0;
    } else if (stream == 1) {
      if (n == 1) continue;
      const int lo = std::max(t - 1, 0);
      const int hi = std::min(t + 1, n - 1);
      w[t][hi] += 0.5;
      w[t][lo] -= 0.5;
    } else {
      if (n == 1) continue;
      const int lo = std::max(t - 1, 0);
      const int hi = std::min(t + 1, n - 1);
      w[t][hi] += 1.0;
      w[t][lo] += 1.0;
      w[t][t] -= 2.0;
    }
  }
  return w;
}

std::vector<double> dense_mlpg(const FeatureSequence& means,
                               const NormStats& stats) {
  const int n = static_cast<int>(means.frames);
  const double sigmas[3] = {stats.global_std_static, stats.global_std_delta,
                            stats.global_std_deltadelta};
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 0.0);
  for (int s = 0; s < 3; ++s) {
    auto w = dense_window(s, n);
    const double inv_var = 1.0 / (sigmas[s] * sigmas[s]);
    for (int t = 0; t < n; ++t) {
      for (int i = 0; i < n; ++i) {
        if (w[t][i] == 0.0) continue;
        b[i] += inv_var * w[t][i] * means.at(t, s);
        for (int j = 0; j < n; ++j) {
          if (w[t][j] != 0.0) a[i][j] += inv_var * w[t][i] * w[t][j];
        }
      }
    }
  }
  // Gaussian elimination with partial pivoting.
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c2 = col; c2 < n; ++c2) a[r][c2] -= f * a[col][c2];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int c2 = r + 1; c2 < n; ++c2) acc -= a[r][c2] * x[c2];
    x[r] = acc / a[r][r];
  }
  return x;
}

double mlpg_objective(const std::vector<double>& c, const FeatureSequence& mu,
                      const NormStats& stats) {
  const int n = static_cast<int>(mu.frames);
  const double sigmas[3] = {stats.global_std_static, stats.global_std_delta,
                            stats.global_std_deltadelta};
  double obj = 0.0;
  for (int s = 0; s < 3; ++s) {
    auto w = dense_window(s, n);
    for (int t = 0; t < n; ++t) {
      double pred = 0.0;
      for (int i = 0; i < n; ++i) pred += w[t][i] * c[i];
      const double e = (pred - mu.at(t, s)) / sigmas[s];
      obj += e * e;
    }
  }
  return obj;
}

}  // namespace

TEST_CASE("interpolate_unvoiced") {
  F0Contour c;
  c.f0_hz = {100, 0, 0, 160};
  auto out = interpolate_unvoiced(c);
  CHECK(out.f0_hz[0] == doctest::Approx(100));
  CHECK(out.f0_hz[1] == doctest::Approx(120));
  CHECK(out.f0_hz[2] == doctest::Approx(140));
  CHECK(out.f0_hz[3] == doctest::Approx(160));

  F0Contour lead;
  lead.f0_hz = {0, 0, 200};
  auto out2 = interpolate_unvoiced(lead);
  CHECK(out2.f0_hz == std::vector<double>{200, 200, 200});

  F0Contour silent;
  silent.f0_hz = {0, 0, 0};
  CHECK_THROWS_AS(interpolate_unvoiced(silent), AllUnvoiced);

  // idempotence + voiced values untouched, random contours
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    F0Contour r;
    const int len = 2 + static_cast<int>(rng() % 60);
    bool any = false;
    for (int i = 0; i < len; ++i) {
      const bool voiced = rng() % 3 != 0;
      r.f0_hz.push_back(voiced ? 80.0 + static_cast<double>(rng() % 200) : 0.0);
      any = any || voiced;
    }
    if (!any) r.f0_hz[0] = 100.0;
    auto once = interpolate_unvoiced(r);
    auto twice = interpolate_unvoiced(once);
    CHECK(once.f0_hz == twice.f0_hz);
    for (int i = 0; i < len; ++i) {
      if (r.f0_hz[i] > 0) CHECK(once.f0_hz[i] == r.f0_hz[i]);
      CHECK(once.f0_hz[i] > 0);
    }
  }
}

TEST_CASE("compute_deltas windows and edges") {
  auto constant = compute_deltas(std::vector<double>(6, 3.25));
  for (std::size_t t = 0; t < constant.frames; ++t) {
    CHECK(constant.at(t, 0) == doctest::Approx(3.25));
    CHECK(constant.at(t, 1) == doctest::Approx(0));
    CHECK(constant.at(t, 2) == doctest::Approx(0));
  }

  auto ramp = compute_deltas({0, 1, 2, 3});
  const double expect_d[4] = {0.5, 1, 1, 0.5};
  const double expect_dd[4] = {1, 0, 0, -1};
  for (int t = 0; t < 4; ++t) {
    CHECK(ramp.at(t, 1) == doctest::Approx(expect_d[t]));
    CHECK(ramp.at(t, 2) == doctest::Approx(expect_dd[t]));
  }

  auto single = compute_deltas({42.0});
  CHECK(single.at(0, 0) == doctest::Approx(42.0));
  CHECK(single.at(0, 1) == doctest::Approx(0));
  CHECK(single.at(0, 2) == doctest::Approx(0));
}

TEST_CASE("compute_norm_stats") {
  SUBCASE("degenerate corpus hits the std floor") {
    F0Contour c;
    c.f0_hz.assign(10, 100.0);
    auto stats = compute_norm_stats({c});
    CHECK(stats.mean == doctest::Approx(std::log(100.0)));
    CHECK(stats.std == doctest::Approx(1e-6));
  }
  SUBCASE("two-level corpus") {
    F0Contour a, b;
    a.f0_hz.assign(5, std::exp(4.0));
    b.f0_hz.assign(5, std::exp(6.0));
    auto stats = compute_norm_stats({a, b});
    CHECK(stats.mean == doctest::Approx(5.0));
    CHECK(stats.std == doctest::Approx(1.0));
  }
  SUBCASE("empty corpus") {
    CHECK_THROWS_AS(compute_norm_stats({}), EmptyCorpus);
  }
}

TEST_CASE("mlpg recovers known trajectories and matches the dense oracle") {
  std::mt19937 rng(99);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SUBCASE("identity on consistent means") {
    NormStats unit;  // all stds 1
    for (int trial = 0; trial < 5; ++trial) {
      const int n = 2 + static_cast<int>(rng() % 120);
      std::vector<double> target(n);
      for (auto& v : target) v = gauss(rng);
      auto means = compute_deltas(target);
      auto solved = mlpg(means, unit);
      double worst = 0.0;
      for (int t = 0; t < n; ++t)
        worst = std::max(worst, std::fabs(solved[t] - target[t]));
      CHECK(worst < 1e-8);
    }
  }

  SUBCASE("single frame") {
    FeatureSequence means;
    means.frames = 1;
    means.data = {1.75, 0.0, 0.0};
    NormStats stats;
    auto solved = mlpg(means, stats);
    REQUIRE(solved.size() == 1);
    CHECK(solved[0] == doctest::Approx(1.75));
  }

  SUBCASE("banded equals dense on random systems") {
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 1 + static_cast<int>(rng() % 50);
      FeatureSequence means;
      means.frames = n;
      means.data.resize(3 * n);
      for (auto& v : means.data) v = gauss(rng);
      NormStats stats;
      stats.global_std_static = 0.1 + 2.0 * std::fabs(gauss(rng));
      stats.global_std_delta = 0.1 + 2.0 * std::fabs(gauss(rng));
      stats.global_std_deltadelta = 0.1 + 2.0 * std::fabs(gauss(rng));
      auto banded = mlpg(means, stats);
      auto dense = dense_mlpg(means, stats);
      for (int t = 0; t < n; ++t) {
        const double denom = std::max(1.0, std::fabs(dense[t]));
        CHECK(std::fabs(banded[t] - dense[t]) / denom < 1e-8);
      }
    }
  }

  SUBCASE("normal-equation residual is tiny") {
    for (int trial = 0; trial < 10; ++trial) {
      const int n = 2 + static_cast<int>(rng() % 80);
      FeatureSequence means;
      means.frames = n;
      means.data.resize(3 * n);
      for (auto& v : means.data) v = gauss(rng);
      NormStats stats;
      stats.global_std_delta = 0.1;
      stats.global_std_deltadelta = 0.05;
      auto solved = mlpg(means, stats);
      // rebuild A and b densely, check ||A c - b|| < 1e-8 ||b||
      const double sigmas[3] = {stats.global_std_static,
                                stats.global_std_delta,
                                stats.global_std_deltadelta};
      std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
      std::vector<double> b(n, 0.0);
      for (int s = 0; s < 3; ++s) {
        auto w = dense_window(s, n);
        const double inv_var = 1.0 / (sigmas[s] * sigmas[s]);
        for (int t = 0; t < n; ++t) {
          for (int i = 0; i < n; ++i) {
            if (w[t][i] == 0.0) continue;
            b[i] += inv_var * w[t][i] * means.at(t, s);
            for (int j = 0; j < n; ++j)
              if (w[t][j] != 0.0) a[i][j] += inv_var * w[t][i] * w[t][j];
          }
        }
      }
      double res_norm = 0.0, rhs_norm = 0.0;
      for (int i = 0; i < n; ++i) {
        double row = -b[i];
        for (int j = 0; j < n; ++j) row += a[i][j] * solved[j];
        res_norm += row * row;
        rhs_norm += b[i] * b[i];
      }
      CHECK(std::sqrt(res_norm) < 1e-8 * std::sqrt(rhs_norm));
    }
  }

  SUBCASE("solution is a local optimum of the weighted objective") {
    const int n = 40;
    FeatureSequence means;
    means.frames = n;
    means.data.resize(3 * n);
    for (auto& v : means.data) v = gauss(rng);
    NormStats stats;
    stats.global_std_delta = 0.5;
    stats.global_std_deltadelta = 0.25;
    auto solved = mlpg(means, stats);
    const double base = mlpg_objective(solved, means, stats);
    for (int probe = 0; probe < 40; ++probe) {
      auto perturbed = solved;
      for (auto& v : perturbed) v += 1e-4 * gauss(rng);
      CHECK(mlpg_objective(perturbed, means, stats) >= base - 1e-12);
    }
  }
}

TEST_CASE("features_to_hz round trips") {
  NormStats stats;
  stats.mean = std::log(200.0);
  stats.std = 1.0;
  auto flat = features_to_hz(std::vector<double>(4, 0.0), stats);
  for (double v : flat.f0_hz) CHECK(v == doctest::Approx(200.0));

  stats.mean = 5.0;
  stats.std = 0.5;
  auto one = features_to_hz({1.0}, stats);
  CHECK(one.f0_hz[0] == doctest::Approx(std::exp(5.5)));

  // forward then inverse
  std::mt19937 rng(3);
  F0Contour c;
  for (int i = 0; i < 50; ++i)
    c.f0_hz.push_back(90.0 + static_cast<double>(rng() % 150));
  auto feats = contour_to_features(c, stats);
  std::vector<double> statics(feats.frames);
  for (std::size_t t = 0; t < feats.frames; ++t) statics[t] = feats.at(t, 0);
  auto back = features_to_hz(statics, stats);
  for (std::size_t t = 0; t < c.size(); ++t) {
    CHECK(std::fabs(back.f0_hz[t] - c.f0_hz[t]) / c.f0_hz[t] < 1e-9);
  }
}

TEST_CASE("f0_rmse on voiced reference frames") {
  F0Contour a, b;
  a.f0_hz = {100, 0, 100};
  b.f0_hz = {103, 50, 97};
  CHECK(f0_rmse(a, a) == doctest::Approx(0.0));
  CHECK(f0_rmse(a, b) == doctest::Approx(3.0));
  F0Contour shorter;
  shorter.f0_hz = {100};
  CHECK_THROWS_AS(f0_rmse(a, shorter), LengthMismatch);
}

TEST_CASE("f0 file io round trips exactly") {
  F0Contour c;
  c.f0_hz = {123.456789012345678, 0.0, 87.125, 250.000000000001};
  const char* path = "f0_roundtrip_test.f0";
  write_f0_file(path, c);
  auto back = read_f0_file(path);
  REQUIRE(back.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(back.f0_hz[i] == c.f0_hz[i]);
  std::remove(path);
  CHECK_THROWS_AS(read_f0_file("missing_file.f0"), FileMissing);
}
