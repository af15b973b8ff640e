#include "intonation/eval_stats.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace intonation::stats {

std::string system_name(System s) {
  return s == System::AeKmeans ? "ae_kmeans" : "vae_vamp";
}

System parse_system(const std::string& name) {
  if (name == "ae_kmeans" || name == "ae") return System::AeKmeans;
  if (name == "vae_vamp" || name == "vamp") return System::VaeVamp;
  throw InvalidParams("unknown system name: " + name);
}

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

double log_choose(long long n, long long k) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

double inv_norm_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw InvalidParams("inv_norm_cdf: p must be in (0, 1)");
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (norm_cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) {
    const double pdf = norm_pdf(x);
    if (pdf <= 0.0) break;
    x -= (norm_cdf(x) - p) / pdf;
  }
  return x;
}

double binomial_test_one_sided(long long k, long long n, double p0) {
  if (n < 0 || k < 0 || k > n)
    throw InvalidCounts("binomial_test_one_sided: need 0 <= k <= n");
  if (!(p0 >= 0.0 && p0 <= 1.0))
    throw InvalidParams("binomial_test_one_sided: p0 must be in [0, 1]");
  if (k == 0) return 1.0;
  if (p0 == 0.0) return 0.0;  // k >= 1 is impossible under p0 = 0
  if (p0 == 1.0) return 1.0;

  const double log_p = std::log(p0);
  const double log_q = std::log1p(-p0);
  // log-sum-exp over the upper tail, anchored at the largest term.
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n - k + 1));
  for (long long i = k; i <= n; ++i) {
    const double t = log_choose(n, i) + static_cast<double>(i) * log_p +
                     static_cast<double>(n - i) * log_q;
    terms.push_back(t);
    max_term = std::max(max_term, t);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - max_term);
  const double p = std::exp(max_term + std::log(acc));
  return std::min(p, 1.0);
}

HolmResult holm_bonferroni(const std::vector<double>& pvalues, double alpha) {
  for (double p : pvalues) {
    if (!(p >= 0.0 && p <= 1.0) || !std::isfinite(p))
      throw InvalidP("holm_bonferroni: p-value outside [0, 1]");
  }
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw InvalidParams("holm_bonferroni: alpha must be in (0, 1]");
  const std::size_t m = pvalues.size();
  HolmResult result;
  result.reject.assign(m, false);
  result.adjusted.assign(m, 1.0);
  if (m == 0) return result;

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pvalues[a] != pvalues[b]) return pvalues[a] < pvalues[b];
    return a < b;
  });

  bool rejecting = true;
  double running_adj = 0.0;
  for (std::size_t rank = 0; rank < m; ++rank) {
    const std::size_t idx = order[rank];
    const double scale = static_cast<double>(m - rank);
    running_adj = std::max(running_adj, std::min(1.0, scale * pvalues[idx]));
    result.adjusted[idx] = running_adj;
    if (rejecting && pvalues[idx] <= alpha / scale) {
      result.reject[idx] = true;
    } else {
      rejecting = false;
    }
  }
  return result;
}

Interval binomial_ci(long long k, long long n, double confidence) {
  if (n < 1 || k < 0 || k > n)
    throw InvalidCounts("binomial_ci: need n >= 1 and 0 <= k <= n");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw InvalidParams("binomial_ci: confidence must be in (0, 1)");
  const double z = inv_norm_cdf(0.5 * (1.0 + confidence));
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double denom = nd + z * z;
  const double center = (kd + 0.5 * z * z) / denom;
  const double half =
      z * std::sqrt(kd * (nd - kd) / nd + 0.25 * z * z) / denom;
  Interval ci;
  ci.lo = std::max(0.0, center - half);
  ci.hi = std::min(1.0, center + half);
  return ci;
}

Report per_pair_report(const std::vector<JudgmentRecord>& records,
                       double alpha, bool two_sided, double confidence) {
  for (const auto& r : records) {
    if (r.pair_id.empty() || r.listener_id.empty())
      throw InvalidParams("per_pair_report: record with empty id");
  }

  std::map<std::pair<System, std::string>, std::pair<long long, long long>>
      groups;
  std::map<System, std::pair<long long, long long>> pooled;
  for (const auto& r : records) {
    auto& g = groups[{r.system, r.pair_id}];
    auto& s = pooled[r.system];
    g.second += 1;
    s.second += 1;
    if (r.judged_different) {
      g.first += 1;
      s.first += 1;
    }
  }

  Report report;
  std::vector<double> pvalues;
  for (const auto& [key, counts] : groups) {
    PairRow row;
    row.system = key.first;
    row.pair_id = key.second;
    row.k = counts.first;
    row.n = counts.second;
    row.p_value = binomial_test_one_sided(row.k, row.n, 0.5);
    if (two_sided) {
      const double lower =
          row.k >= row.n
              ? 1.0
              : 1.0 - binomial_test_one_sided(row.k + 1, row.n, 0.5);
      row.p_value = std::min(1.0, 2.0 * std::min(row.p_value, lower));
    }
    pvalues.push_back(row.p_value);
    report.pairs.push_back(std::move(row));
  }

  const HolmResult holm = holm_bonferroni(pvalues, alpha);
  for (std::size_t i = 0; i < report.pairs.size(); ++i) {
    report.pairs[i].p_adjusted = holm.adjusted[i];
    report.pairs[i].significant = holm.reject[i];
  }

  for (const auto& [system, counts] : pooled) {
    SystemRow row;
    row.system = system;
    row.k = counts.first;
    row.n = counts.second;
    row.rate = static_cast<double>(row.k) / static_cast<double>(row.n);
    row.p_value = binomial_test_one_sided(row.k, row.n, 0.5);
    row.ci = binomial_ci(row.k, row.n, confidence);
    report.systems.push_back(std::move(row));
  }
  return report;
}

std::vector<JudgmentRecord> read_judgments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileMissing("cannot open judgment file: " + path);
  std::vector<JudgmentRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string system, pair_id, listener_id, judged;
    if (!std::getline(ss, system, '\t') || !std::getline(ss, pair_id, '\t') ||
        !std::getline(ss, listener_id, '\t') || !std::getline(ss, judged)) {
      throw FormatError("judgment line needs 4 tab-separated fields", line_no);
    }
    JudgmentRecord rec;
    rec.system = parse_system(system);
    rec.pair_id = pair_id;
    rec.listener_id = listener_id;
    if (judged == "0")
      rec.judged_different = false;
    else if (judged == "1")
      rec.judged_different = true;
    else
      throw FormatError("judged_different must be 0 or 1", line_no);
    records.push_back(std::move(rec));
  }
  return records;
}

void write_report(const std::string& path, const Report& report) {
  std::ofstream out(path);
  if (!out) throw FileMissing("cannot write report file: " + path);
  char buf[128];
  out << "system\tpair_id\tk\tn\tp_value\tp_adjusted\tsignificant\n";
  for (const auto& row : report.pairs) {
    std::snprintf(buf, sizeof(buf), "%.17g\t%.17g", row.p_value,
                  row.p_adjusted);
    out << system_name(row.system) << '\t' << row.pair_id << '\t' << row.k
        << '\t' << row.n << '\t' << buf << '\t' << (row.significant ? 1 : 0)
        << '\n';
  }
  out << "#system\tk\tn\trate\tp_value\tci_lo\tci_hi\n";
  for (const auto& row : report.systems) {
    std::snprintf(buf, sizeof(buf), "%.17g\t%.17g\t%.17g\t%.17g", row.rate,
                  row.p_value, row.ci.lo, row.ci.hi);
    out << system_name(row.system) << '\t' << row.k << '\t' << row.n << '\t'
        << buf << '\n';
  }
}

}  // namespace intonation::stats
