#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "intonation/eval_stats.h"

using namespace intonation;
using namespace intonation::stats;

namespace {

// Rational-arithmetic oracle for p0 = 1/2: p = sum_{i=k..n} C(n,i) / 2^n.
double exact_half_tail(int k, int n) {
  unsigned long long num = 0;
  for (int i = k; i <= n; ++i) {
    unsigned long long c = 1;
    for (int j = 0; j < i; ++j) c = c * (n - j) / (j + 1);
    num += c;
  }
  return static_cast<double>(num) / std::pow(2.0, n);
}

// Rational oracle for p0 = 1/4: p = sum C(n,i) 3^(n-i) / 4^n.
double exact_quarter_tail(int k, int n) {
  unsigned long long num = 0;
  for (int i = k; i <= n; ++i) {
    unsigned long long c = 1;
    for (int j = 0; j < i; ++j) c = c * (n - j) / (j + 1);
    unsigned long long pow3 = 1;
    for (int j = 0; j < n - i; ++j) pow3 *= 3;
    num += c * pow3;
  }
  return static_cast<double>(num) / std::pow(4.0, n);
}

}  // namespace

TEST_CASE("binomial_test_one_sided exact values") {
  CHECK(binomial_test_one_sided(0, 0) == doctest::Approx(1.0));
  CHECK(binomial_test_one_sided(5, 10) == doctest::Approx(638.0 / 1024.0));
  CHECK(binomial_test_one_sided(7, 7, 0.3) ==
        doctest::Approx(std::pow(0.3, 7)).epsilon(1e-12));
  CHECK_THROWS_AS(binomial_test_one_sided(5, 4), InvalidCounts);
  CHECK_THROWS_AS(binomial_test_one_sided(-1, 4), InvalidCounts);
}

TEST_CASE("binomial test agrees with rational oracles for n <= 20") {
  for (int n = 0; n <= 20; ++n) {
    for (int k = 0; k <= n; ++k) {
      const double expect_half = exact_half_tail(k, n);
      const double got_half = binomial_test_one_sided(k, n, 0.5);
      CHECK(std::fabs(got_half - expect_half) <=
            1e-12 * std::max(expect_half, 1e-300));
      const double expect_quarter = exact_quarter_tail(k, n);
      const double got_quarter = binomial_test_one_sided(k, n, 0.25);
      CHECK(std::fabs(got_quarter - expect_quarter) <=
            1e-10 * std::max(expect_quarter, 1e-300));
    }
  }
}

TEST_CASE("binomial test is nonincreasing in k") {
  for (int n : {1, 7, 23, 200}) {
    double prev = 1.0 + 1e-15;
    for (int k = 0; k <= n; ++k) {
      const double p = binomial_test_one_sided(k, n, 0.5);
      CHECK(p <= prev + 1e-15);
      prev = p;
    }
  }
}

TEST_CASE("holm_bonferroni step-down") {
  SUBCASE("worked fixture") {
    auto result = holm_bonferroni({0.01, 0.04, 0.03}, 0.05);
    CHECK(result.reject == std::vector<bool>{true, false, false});
    CHECK(result.adjusted[0] == doctest::Approx(0.03));
    CHECK(result.adjusted[1] == doctest::Approx(0.06));
    CHECK(result.adjusted[2] == doctest::Approx(0.06));
  }
  SUBCASE("all ones") {
    auto result = holm_bonferroni({1.0, 1.0, 1.0}, 0.05);
    CHECK(result.reject == std::vector<bool>{false, false, false});
  }
  SUBCASE("single test reduces to p <= alpha") {
    CHECK(holm_bonferroni({0.04}, 0.05).reject[0]);
    CHECK(!holm_bonferroni({0.06}, 0.05).reject[0]);
  }
  SUBCASE("rejections are a subset of uncorrected rejections, monotone in alpha") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> ps(1 + rng() % 12);
      for (auto& p : ps) p = unif(rng);
      auto strict = holm_bonferroni(ps, 0.01);
      auto loose = holm_bonferroni(ps, 0.10);
      for (std::size_t i = 0; i < ps.size(); ++i) {
        if (strict.reject[i]) CHECK(ps[i] <= 0.01);  // subset of uncorrected
        if (strict.reject[i]) CHECK(loose.reject[i]);
        CHECK(loose.adjusted[i] == strict.adjusted[i]);
        CHECK(loose.adjusted[i] >= ps[i] - 1e-15);
      }
    }
  }
  SUBCASE("invalid p") {
    CHECK_THROWS_AS(holm_bonferroni({0.5, 1.5}, 0.05), InvalidP);
    CHECK_THROWS_AS(holm_bonferroni({-0.1}, 0.05), InvalidP);
  }
}

TEST_CASE("wilson interval") {
  auto full = binomial_ci(100, 100);
  CHECK(full.hi == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(full.lo > 0.95);
  auto none = binomial_ci(0, 12);
  CHECK(none.lo == doctest::Approx(0.0));

  std::mt19937 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const long long n = 1 + rng() % 400;
    const long long k = rng() % (n + 1);
    auto ci = binomial_ci(k, n);
    const double rate = static_cast<double>(k) / static_cast<double>(n);
    CHECK(ci.lo >= 0.0);
    CHECK(ci.hi <= 1.0);
    CHECK(ci.lo <= rate + 1e-12);
    CHECK(ci.hi >= rate - 1e-12);
  }
  CHECK_THROWS_AS(binomial_ci(1, 0), InvalidCounts);
}

TEST_CASE("inv_norm_cdf reference points") {
  CHECK(inv_norm_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(inv_norm_cdf(0.5) == doctest::Approx(0.0));
  CHECK(inv_norm_cdf(0.841344746068543) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("per_pair_report recovers planted significant pairs") {
  std::vector<JudgmentRecord> records;
  const int listeners = 11;
  // 38 pairs per system; pairs 0 and 3 of each system are planted as
  // unanimously "different", the rest sit at chance.
  for (int sysi = 0; sysi < 2; ++sysi) {
    const System sys = sysi == 0 ? System::AeKmeans : System::VaeVamp;
    for (int pair = 0; pair < 38; ++pair) {
      const bool planted = pair == 0 || pair == 3;
      for (int l = 0; l < listeners; ++l) {
        JudgmentRecord rec;
        rec.system = sys;
        rec.pair_id = "pair" + std::to_string(pair);
        rec.listener_id = "listener" + std::to_string(l);
        rec.judged_different = planted ? true : (l % 2 == 0 && l < 10);
        records.push_back(rec);
      }
    }
  }
  auto report = per_pair_report(records, 0.05);
  REQUIRE(report.pairs.size() == 76);
  int significant = 0;
  for (const auto& row : report.pairs) {
    CHECK(row.n == listeners);
    const bool planted = row.pair_id == "pair0" || row.pair_id == "pair3";
    CHECK(row.significant == planted);
    if (row.significant) ++significant;
  }
  CHECK(significant == 4);
  REQUIRE(report.systems.size() == 2);
  for (const auto& row : report.systems) {
    CHECK(row.n == 38 * listeners);
    CHECK(row.ci.lo <= row.rate);
    CHECK(row.ci.hi >= row.rate);
  }

  CHECK(per_pair_report({}).pairs.empty());
}

TEST_CASE("two-sided report handles unanimous pairs") {
  std::vector<JudgmentRecord> records;
  for (int l = 0; l < 8; ++l) {
    records.push_back({System::AeKmeans, "all_diff", "l" + std::to_string(l),
                       true});
    records.push_back({System::AeKmeans, "none_diff", "l" + std::to_string(l),
                       false});
  }
  auto report = per_pair_report(records, 0.05, /*two_sided=*/true);
  REQUIRE(report.pairs.size() == 2);
  for (const auto& row : report.pairs) {
    // both pairs sit at an extreme tail: p = 2 * (1/2)^8
    CHECK(row.p_value == doctest::Approx(2.0 / 256.0));
  }
}

TEST_CASE("judgment file io") {
  const char* path = "judgments_test.tsv";
  {
    std::vector<JudgmentRecord> records = {
        {System::AeKmeans, "p1", "l1", true},
        {System::VaeVamp, "p1", "l1", false},
    };
    FILE* f = std::fopen(path, "w");
    std::fputs("# comment\nae_kmeans\tp1\tl1\t1\nvae_vamp\tp1\tl1\t0\n", f);
    std::fclose(f);
    auto loaded = read_judgments(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].system == System::AeKmeans);
    CHECK(loaded[0].judged_different);
    CHECK(!loaded[1].judged_different);
    auto report = per_pair_report(loaded);
    write_report("report_test.tsv", report);
    std::remove("report_test.tsv");
  }
  std::remove(path);
  CHECK_THROWS_AS(read_judgments("missing.tsv"), FileMissing);
}
