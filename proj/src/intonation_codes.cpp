#include "intonation/intonation_codes.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "intonation/rng.h"

namespace intonation::codes {

const IntonationCode& Codebook::at(int id) const {
  for (const auto& c : codes) {
    if (c.id == id) return c;
  }
  throw UnknownCode("codebook has no code with id " + std::to_string(id));
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

std::size_t nearest_centroid(const std::vector<double>& point,
                             const std::vector<std::vector<double>>& centroids,
                             double* dist_out) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = sq_dist(point, centroids[c]);
    if (d < best_dist) {
      best_dist = d;
      best = c;
    }
  }
  if (dist_out) *dist_out = best_dist;
  return best;
}

}  // namespace

namespace {

// One seeded k-means++ / Lloyd run; fills the final objective.
std::vector<std::vector<double>> kmeans_once(
    const std::vector<std::vector<double>>& embeddings, std::size_t k,
    std::uint64_t seed, double* objective_out) {
  const std::size_t n = embeddings.size();
  const std::size_t dim = embeddings[0].size();
  Rng rng(seed);
  // k-means++ seeding.
  std::vector<std::vector<double>> centroids;
  centroids.push_back(embeddings[rng.uniform_int(n)]);
  std::vector<double> min_dist(n);
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = sq_dist(embeddings[i], centroids.back());
      if (centroids.size() == 1 || d < min_dist[i]) min_dist[i] = d;
      total += min_dist[i];
    }
    std::size_t chosen = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += min_dist[i];
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = rng.uniform_int(n);  // all points coincide with a centroid
    }
    centroids.push_back(embeddings[chosen]);
  }

  std::vector<std::size_t> assignment(n, 0);
  double prev_objective = std::numeric_limits<double>::infinity();
  bool reseeded_last_iter = false;
  for (int iter = 0; iter < 300; ++iter) {
    // assignment step
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      assignment[i] = nearest_centroid(embeddings[i], centroids, &d);
      objective += d;
    }
    if (!reseeded_last_iter && objective > prev_objective * (1.0 + 1e-12))
      throw InternalError("kmeans_fit: objective increased across iterations");
    prev_objective = objective;

    // update step
    std::vector<std::vector<double>> next(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      counts[assignment[i]] += 1;
      for (std::size_t d = 0; d < dim; ++d)
        next[assignment[i]][d] += embeddings[i][d];
    }
    reseeded_last_iter = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // reseed to the point farthest from its assigned centroid
        std::size_t far = 0;
        double far_dist = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = sq_dist(embeddings[i], centroids[assignment[i]]);
          if (d > far_dist) {
            far_dist = d;
            far = i;
          }
        }
        next[c] = embeddings[far];
        reseeded_last_iter = true;
      } else {
        for (std::size_t d = 0; d < dim; ++d)
          next[c][d] /= static_cast<double>(counts[c]);
      }
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      shift = std::max(shift, std::sqrt(sq_dist(next[c], centroids[c])));
    centroids = std::move(next);
    if (shift < 1e-6 && !reseeded_last_iter) break;
  }

  double objective = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    nearest_centroid(embeddings[i], centroids, &d);
    objective += d;
  }
  *objective_out = objective;
  return centroids;
}

}  // namespace

Codebook kmeans_fit(const std::vector<std::vector<double>>& embeddings,
                    std::size_t k, std::uint64_t seed) {
  if (k == 0) throw InvalidParams("kmeans_fit: k must be > 0");
  if (embeddings.size() < k)
    throw TooFewPoints("kmeans_fit: " + std::to_string(embeddings.size()) +
                       " points for k = " + std::to_string(k));
  const std::size_t dim = embeddings[0].size();
  for (const auto& e : embeddings) {
    if (e.size() != dim) throw DimMismatch("kmeans_fit: ragged embeddings");
  }

  // restarts with derived seeds; keep the lowest objective
  constexpr int kRestarts = 10;
  std::vector<std::vector<double>> best;
  double best_objective = std::numeric_limits<double>::infinity();
  for (int r = 0; r < kRestarts; ++r) {
    double objective = 0.0;
    auto centroids = kmeans_once(
        embeddings, k, Rng::derive_seed(seed, static_cast<std::uint64_t>(r)),
        &objective);
    if (objective < best_objective) {
      best_objective = objective;
      best = std::move(centroids);
    }
  }

  Codebook book;
  book.latent_dim = dim;
  for (std::size_t c = 0; c < k; ++c) {
    IntonationCode code;
    code.id = static_cast<int>(c);
    code.vector = best[c];
    code.source = CodeSource::KMeansCentroid;
    book.codes.push_back(std::move(code));
  }
  return book;
}

int assign(const std::vector<double>& embedding, const Codebook& codebook) {
  if (codebook.codes.empty()) throw InvalidParams("assign: empty codebook");
  if (embedding.size() != codebook.latent_dim)
    throw DimMismatch("assign: embedding dim " +
                      std::to_string(embedding.size()) + " != codebook dim " +
                      std::to_string(codebook.latent_dim));
  int best_id = codebook.codes.front().id;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& code : codebook.codes) {
    const double d = sq_dist(embedding, code.vector);
    if (d < best || (d == best && code.id < best_id)) {
      best = d;
      best_id = code.id;
    }
  }
  return best_id;
}

Codebook extract_vamp_codes(const model::ProsodyModel& model) {
  if (model.kind() != model::ModelKind::VaeVamp)
    throw WrongModelKind("extract_vamp_codes: checkpoint is not VAE-VAMP");
  const auto components = model.vamp_components(nullptr);
  Codebook book;
  book.latent_dim = model.config().latent_dim;
  for (std::size_t k = 0; k < components.size(); ++k) {
    IntonationCode code;
    code.id = static_cast<int>(k);
    code.vector = components[k].mu;
    code.source = CodeSource::VampMode;
    code.pseudo_length = static_cast<int>(model.config().pseudo_lengths[k]);
    book.codes.push_back(std::move(code));
  }
  return book;
}

void save_codebook(const std::string& path, const Codebook& codebook) {
  std::ofstream out(path);
  if (!out) throw FileMissing("cannot write codebook: " + path);
  out << "# intonation codebook v1\n";
  out << "K " << codebook.codes.size() << "\n";
  out << "dim " << codebook.latent_dim << "\n";
  char buf[40];
  for (const auto& code : codebook.codes) {
    out << code.id << '\t'
        << (code.source == CodeSource::KMeansCentroid ? "kmeans" : "vamp")
        << '\t';
    if (code.pseudo_length >= 0)
      out << code.pseudo_length;
    else
      out << '-';
    for (double v : code.vector) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << '\t' << buf;
    }
    out << '\n';
  }
}

Codebook load_codebook(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileMissing("cannot open codebook: " + path);
  Codebook book;
  std::string line;
  int line_no = 0;
  std::size_t expect_k = 0;
  bool have_header = false, have_dim = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    if (!have_header) {
      std::string key;
      ss >> key >> expect_k;
      if (key != "K" || ss.fail())
        throw FormatError("codebook: expected 'K <count>'", line_no);
      have_header = true;
      continue;
    }
    if (!have_dim) {
      std::string key;
      ss >> key >> book.latent_dim;
      if (key != "dim" || ss.fail())
        throw FormatError("codebook: expected 'dim <n>'", line_no);
      have_dim = true;
      continue;
    }
    IntonationCode code;
    std::string source, length;
    ss >> code.id >> source >> length;
    if (ss.fail()) throw FormatError("codebook: bad code line", line_no);
    if (source == "kmeans")
      code.source = CodeSource::KMeansCentroid;
    else if (source == "vamp")
      code.source = CodeSource::VampMode;
    else
      throw FormatError("codebook: unknown source " + source, line_no);
    code.pseudo_length = length == "-" ? -1 : std::stoi(length);
    double v;
    while (ss >> v) code.vector.push_back(v);
    if (code.vector.size() != book.latent_dim)
      throw FormatError("codebook: vector dim mismatch", line_no);
    book.codes.push_back(std::move(code));
  }
  if (book.codes.size() != expect_k)
    throw FormatError("codebook: K header does not match code count");
  return book;
}

}  // namespace intonation::codes
