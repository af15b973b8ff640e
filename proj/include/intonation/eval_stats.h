#ifndef INTONATION_EVAL_STATS_H
#define INTONATION_EVAL_STATS_H

#include <string>
#include <vector>

#include "intonation/errors.h"

namespace intonation::stats {

enum class System { AeKmeans, VaeVamp };

std::string system_name(System s);
System parse_system(const std::string& name);

/// One same/different judgment from the listening-test record format.
struct JudgmentRecord {
  System system = System::AeKmeans;
  std::string pair_id;
  std::string listener_id;
  bool judged_different = false;
};

/// Exact one-sided (upper tail) binomial test:
/// p = sum_{i=k..n} C(n,i) p0^i (1-p0)^(n-i), evaluated in log space.
double binomial_test_one_sided(long long k, long long n, double p0 = 0.5);

struct HolmResult {
  std::vector<bool> reject;      // in original order
  std::vector<double> adjusted;  // step-down adjusted p-values, clipped to 1
};

/// Holm-Bonferroni step-down correction at family-wise level alpha.
HolmResult holm_bonferroni(const std::vector<double>& pvalues,
                           double alpha = 0.05);

/// Wilson score interval for a binomial proportion.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};
Interval binomial_ci(long long k, long long n, double confidence = 0.95);

/// Inverse standard normal CDF (upper precision via bisection + Newton).
double inv_norm_cdf(double p);

struct PairRow {
  System system;
  std::string pair_id;
  long long k = 0;  // "different" judgments
  long long n = 0;  // total judgments
  double p_value = 1.0;
  double p_adjusted = 1.0;
  bool significant = false;
};

struct SystemRow {
  System system;
  long long k = 0;
  long long n = 0;
  double rate = 0.0;
  double p_value = 1.0;
  Interval ci;
};

struct Report {
  std::vector<PairRow> pairs;      // sorted by (system, pair_id)
  std::vector<SystemRow> systems;  // pooled per system
};

/// Groups records by (system, pair), tests each pair against chance, and
/// applies Holm-Bonferroni jointly across all pairs of both systems.
/// two_sided doubles the smaller tail (clipped to 1).
Report per_pair_report(const std::vector<JudgmentRecord>& records,
                       double alpha = 0.05, bool two_sided = false,
                       double confidence = 0.95);

/// Tab-separated judgment records: system pair_id listener_id judged(0/1).
std::vector<JudgmentRecord> read_judgments(const std::string& path);
/// Tab-separated report with fixed column order.
void write_report(const std::string& path, const Report& report);

}  // namespace intonation::stats

#endif  // INTONATION_EVAL_STATS_H
