#include "forumdiv/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "forumdiv/csv.hpp"
#include "forumdiv/error.hpp"
#include "forumdiv/random.hpp"

namespace forumdiv {

std::string_view to_string(ModelTag tag) {
  switch (tag) {
    case ModelTag::Tfidf: return "TFIDF";
    case ModelTag::PcaTfidf: return "PCA+TFIDF";
    case ModelTag::LsaTfidf: return "LSA+TFIDF";
    case ModelTag::NmfTfidf: return "NMF+TFIDF";
  }
  return "?";
}

const std::vector<ModelTag>& all_model_tags() {
  static const std::vector<ModelTag> tags{ModelTag::Tfidf, ModelTag::PcaTfidf, ModelTag::LsaTfidf,
                                          ModelTag::NmfTfidf};
  return tags;
}

ModelTag parse_model_tag(std::string_view name) {
  for (auto tag : all_model_tags()) {
    if (to_string(tag) == name) return tag;
  }
  std::string msg = "unknown model \"" + std::string(name) + "\"; supported models:";
  for (auto tag : all_model_tags()) msg += " " + std::string(to_string(tag));
  throw ParameterError(msg);
}

TfidfFit fit_tfidf(const Corpus& corpus) {
  if (corpus.empty()) throw ParameterError("cannot fit TFIDF on an empty corpus");
  const auto& comments = corpus.comments();
  const std::size_t n = comments.size();

  TfidfFit fit;
  auto& vocab = fit.vocabulary;
  for (const auto& c : comments)
    for (const auto& t : c.tokens) vocab.index.emplace(t, 0);
  if (vocab.index.empty()) throw ParameterError("empty vocabulary: no comment has any token");

  for (auto& [term, col] : vocab.index) {
    col = vocab.terms.size();
    vocab.terms.push_back(term);
  }
  vocab.document_frequency.assign(vocab.size(), 0);

  Matrix counts(n, vocab.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& t : comments[i].tokens) {
      const auto col = vocab.index.at(t);
      if (counts(i, col) == 0.0) ++vocab.document_frequency[col];
      counts(i, col) += 1.0;
    }
  }

  std::vector<double> idf(vocab.size());
  for (std::size_t t = 0; t < vocab.size(); ++t) {
    idf[t] = std::log((1.0 + static_cast<double>(n)) /
                      (1.0 + static_cast<double>(vocab.document_frequency[t]))) +
             1.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto row = counts.row(i);
    double norm2 = 0.0;
    for (std::size_t t = 0; t < row.size(); ++t) {
      row[t] *= idf[t];
      norm2 += row[t] * row[t];
    }
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (double& v : row) v *= inv;
    }
  }
  fit.embedding = EmbeddingMatrix{std::move(counts), corpus.comment_ids(), ModelTag::Tfidf};
  return fit;
}

namespace {

void check_reduction_rank(const EmbeddingMatrix& x, std::size_t k, std::string_view what) {
  const std::size_t limit = std::min(x.rows.rows(), x.rows.cols());
  if (k < 1 || k > limit) {
    std::ostringstream msg;
    msg << what << ": k must be in [1, " << limit << "], got " << k;
    throw ParameterError(msg.str());
  }
}

struct Subspace {
  Matrix components;  // D x k orthonormal
  std::vector<double> eigenvalues;  // of Y^T Y, non-increasing
};

// Top-k right singular vectors of Y via the smaller of the two Gram matrices.
// Directions with no support in Y (rank < k) are completed to an orthonormal
// set against the standard basis.
Subspace top_right_singular(const Matrix& y, std::size_t k) {
  const std::size_t n = y.rows();
  const std::size_t d = y.cols();
  Subspace out{Matrix(d, k), std::vector<double>(k)};

  if (d <= n) {
    auto eig = symmetric_eigen(multiply_at_b(y, y));
    for (std::size_t j = 0; j < k; ++j) {
      out.eigenvalues[j] = std::max(eig.values[j], 0.0);
      for (std::size_t r = 0; r < d; ++r) out.components(r, j) = eig.vectors(r, j);
    }
    return out;
  }

  auto eig = symmetric_eigen(multiply_a_bt(y, y));
  const double top = std::max(eig.values.empty() ? 0.0 : eig.values[0], 0.0);
  std::vector<double> v(d);
  for (std::size_t j = 0; j < k; ++j) {
    const double lambda = std::max(eig.values[j], 0.0);
    out.eigenvalues[j] = lambda;
    std::fill(v.begin(), v.end(), 0.0);
    bool supported = lambda > 1e-12 * top && lambda > 0.0;
    if (supported) {
      const double sigma = std::sqrt(lambda);
      for (std::size_t i = 0; i < n; ++i) {
        const double u = eig.vectors(i, j) / sigma;
        auto row = y.row(i);
        for (std::size_t r = 0; r < d; ++r) v[r] += row[r] * u;
      }
    }
    auto orthogonalize = [&] {
      for (std::size_t p = 0; p < j; ++p) {
        double proj = 0.0;
        for (std::size_t r = 0; r < d; ++r) proj += out.components(r, p) * v[r];
        for (std::size_t r = 0; r < d; ++r) v[r] -= proj * out.components(r, p);
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      return std::sqrt(norm);
    };
    double norm = supported ? orthogonalize() : 0.0;
    if (norm < 0.5) {
      // Pick the basis vector with the largest residual after projection.
      double best = -1.0;
      std::size_t best_r = 0;
      for (std::size_t r = 0; r < d; ++r) {
        double residual = 1.0;
        for (std::size_t p = 0; p < j; ++p) residual -= out.components(r, p) * out.components(r, p);
        if (residual > best + 1e-12) {
          best = residual;
          best_r = r;
        }
      }
      std::fill(v.begin(), v.end(), 0.0);
      v[best_r] = 1.0;
      norm = orthogonalize();
      out.eigenvalues[j] = 0.0;
    }
    for (std::size_t r = 0; r < d; ++r) out.components(r, j) = v[r] / norm;
  }
  return out;
}

// Flip each component so its largest-magnitude loading is positive.
void fix_signs(Matrix& components) {
  for (std::size_t j = 0; j < components.cols(); ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t r = 0; r < components.rows(); ++r) {
      if (std::abs(components(r, j)) > best) {
        best = std::abs(components(r, j));
        arg = r;
      }
    }
    if (components(arg, j) < 0.0) {
      for (std::size_t r = 0; r < components.rows(); ++r) components(r, j) = -components(r, j);
    }
  }
}

}  // namespace

PcaFit fit_pca(const EmbeddingMatrix& x, std::size_t k) {
  check_reduction_rank(x, k, "PCA");
  const std::size_t n = x.rows.rows();
  const std::size_t d = x.rows.cols();

  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = x.rows.row(i);
    for (std::size_t c = 0; c < d; ++c) mean[c] += row[c];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  Matrix centered = x.rows;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = centered.row(i);
    for (std::size_t c = 0; c < d; ++c) row[c] -= mean[c];
  }

  auto sub = top_right_singular(centered, k);
  fix_signs(sub.components);

  PcaFit fit;
  fit.embedding = EmbeddingMatrix{multiply(centered, sub.components), x.comment_ids, ModelTag::PcaTfidf};
  const double dof = n > 1 ? static_cast<double>(n - 1) : 1.0;
  for (double ev : sub.eigenvalues) fit.explained_variance.push_back(ev / dof);
  fit.components = std::move(sub.components);
  fit.mean = std::move(mean);
  return fit;
}

SvdFit fit_lsa(const EmbeddingMatrix& x, std::size_t k) {
  check_reduction_rank(x, k, "LSA");
  auto sub = top_right_singular(x.rows, k);
  fix_signs(sub.components);

  SvdFit fit;
  fit.embedding = EmbeddingMatrix{multiply(x.rows, sub.components), x.comment_ids, ModelTag::LsaTfidf};
  for (double ev : sub.eigenvalues) fit.singular_values.push_back(std::sqrt(ev));
  fit.components = std::move(sub.components);
  return fit;
}

NmfFit fit_nmf(const EmbeddingMatrix& x, std::size_t k, const NmfOptions& options) {
  const std::size_t n = x.rows.rows();
  const std::size_t d = x.rows.cols();
  if (k < 1) throw ParameterError("NMF: k must be >= 1");

  // Sparse row view of X; TFIDF rows are mostly zero.
  std::vector<std::vector<std::pair<std::size_t, double>>> nz(n);
  double x_norm2 = 0.0;
  double x_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = x.rows.row(i);
    for (std::size_t c = 0; c < d; ++c) {
      const double v = row[c];
      if (v < 0.0 || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << "NMF: input must be finite and non-negative, found " << v << " at (" << i << ", " << c << ")";
        throw ParameterError(msg.str());
      }
      if (v != 0.0) {
        nz[i].emplace_back(c, v);
        x_norm2 += v * v;
        x_sum += v;
      }
    }
  }

  Rng rng(options.seed);
  const double avg = (n * d) > 0 ? std::sqrt(x_sum / static_cast<double>(n * d) / static_cast<double>(k)) : 0.0;
  Matrix w(n, k);
  Matrix h(k, d);
  for (double& v : w.values()) v = avg * uniform01(rng);
  for (double& v : h.values()) v = avg * uniform01(rng);

  constexpr double eps = 1e-12;
  auto gram = [](const Matrix& m) { return multiply_at_b(m, m); };  // mᵀm

  auto error_of = [&](const Matrix& xht, const Matrix& hht) {
    double cross = 0.0;
    for (std::size_t i = 0; i < w.values().size(); ++i) cross += w.values()[i] * xht.values()[i];
    const Matrix wtw = gram(w);
    double quad = 0.0;
    for (std::size_t i = 0; i < wtw.values().size(); ++i) quad += wtw.values()[i] * hht.values()[i];
    return std::sqrt(std::max(x_norm2 - 2.0 * cross + quad, 0.0));
  };
  auto x_ht = [&] {
    Matrix out(n, k);
    for (std::size_t i = 0; i < n; ++i)
      for (auto [c, v] : nz[i])
        for (std::size_t j = 0; j < k; ++j) out(i, j) += v * h(j, c);
    return out;
  };

  double prev = error_of(x_ht(), multiply_a_bt(h, h));
  std::size_t iter = 0;
  double err = prev;
  while (iter < options.max_iter) {
    ++iter;
    Matrix wtx(k, d);
    for (std::size_t i = 0; i < n; ++i)
      for (auto [c, v] : nz[i])
        for (std::size_t j = 0; j < k; ++j) wtx(j, c) += w(i, j) * v;
    const Matrix wtwh = multiply(gram(w), h);
    for (std::size_t i = 0; i < h.values().size(); ++i) {
      h.values()[i] *= wtx.values()[i] / (wtwh.values()[i] + eps);
    }

    const Matrix xht = x_ht();
    const Matrix hht = multiply_a_bt(h, h);
    const Matrix whht = multiply(w, hht);
    for (std::size_t i = 0; i < w.values().size(); ++i) {
      w.values()[i] *= xht.values()[i] / (whht.values()[i] + eps);
    }

    err = error_of(xht, hht);
    if (prev <= 0.0 || (prev - err) / prev < options.tol) break;
    prev = err;
  }

  NmfFit fit;
  fit.embedding = EmbeddingMatrix{std::move(w), x.comment_ids, ModelTag::NmfTfidf};
  fit.basis = std::move(h);
  fit.iterations = iter;
  fit.relative_error = x_norm2 > 0.0 ? err / std::sqrt(x_norm2) : 0.0;
  return fit;
}

SimilarityMatrix cosine_matrix(const EmbeddingMatrix& x) {
  const std::size_t n = x.rows.rows();
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = std::sqrt(dot(x.rows.row(i), x.rows.row(i)));

  SimilarityMatrix s{Matrix(n, n), x.comment_ids};
  for (std::size_t i = 0; i < n; ++i) {
    if (norms[i] == 0.0) continue;
    s.values(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (norms[j] == 0.0) continue;
      const double c = std::clamp(dot(x.rows.row(i), x.rows.row(j)) / (norms[i] * norms[j]), -1.0, 1.0);
      s.values(i, j) = s.values(j, i) = c;
    }
  }
  return s;
}

std::size_t default_reduced_dimension(std::size_t n, std::size_t d) {
  std::size_t k = std::min<std::size_t>(100, d);
  if (n > 1) k = std::min(k, n - 1);
  return std::max<std::size_t>(k, 1);
}

EmbeddingMatrix embed_corpus(const Corpus& corpus, const EmbedConfig& config) {
  auto tfidf = fit_tfidf(corpus).embedding;
  if (config.model == ModelTag::Tfidf) return tfidf;
  const std::size_t k = config.k.value_or(default_reduced_dimension(tfidf.rows.rows(), tfidf.rows.cols()));
  switch (config.model) {
    case ModelTag::PcaTfidf: return fit_pca(tfidf, k).embedding;
    case ModelTag::LsaTfidf: return fit_lsa(tfidf, k).embedding;
    case ModelTag::NmfTfidf: return fit_nmf(tfidf, k, config.nmf).embedding;
    case ModelTag::Tfidf: break;
  }
  return tfidf;
}

std::string embedding_to_csv(const EmbeddingMatrix& x) {
  std::string out = "comment_id";
  for (std::size_t c = 0; c < x.rows.cols(); ++c) out += ",dim_" + std::to_string(c);
  out += '\n';
  for (std::size_t i = 0; i < x.rows.rows(); ++i) {
    out += csv::escape(x.comment_ids[i]);
    for (double v : x.rows.row(i)) out += "," + csv::format_real(v);
    out += '\n';
  }
  return out;
}

std::string similarity_to_csv(const SimilarityMatrix& s) {
  std::string out = "comment_id";
  for (const auto& id : s.comment_ids) out += "," + csv::escape(id);
  out += '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += csv::escape(s.comment_ids[i]);
    for (double v : s.values.row(i)) out += "," + csv::format_real(v);
    out += '\n';
  }
  return out;
}

SimilarityMatrix parse_similarity_csv(std::string_view text) {
  auto records = csv::parse(text);
  if (records.empty() || records[0].empty() || records[0][0] != "comment_id") {
    throw ParseError("similarity CSV must start with a comment_id header");
  }
  const std::size_t n = records[0].size() - 1;
  if (records.size() != n + 1) throw ParseError("similarity CSV must have one row per header id");
  SimilarityMatrix s{Matrix(n, n), {records[0].begin() + 1, records[0].end()}};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = records[i + 1];
    if (rec.size() != n + 1 || rec[0] != s.comment_ids[i]) {
      throw ParseError("similarity CSV row " + std::to_string(i + 2) + " does not match the header");
    }
    for (std::size_t j = 0; j < n; ++j) {
      try {
        s.values(i, j) = std::stod(rec[j + 1]);
      } catch (const std::exception&) {
        throw ParseError("similarity CSV row " + std::to_string(i + 2) + ": bad number \"" + rec[j + 1] + "\"");
      }
    }
  }
  return s;
}

SimilarityMatrix restrict_to(const SimilarityMatrix& s, const std::vector<std::string>& ids) {
  std::unordered_map<std::string_view, std::size_t> pos;
  for (std::size_t i = 0; i < s.comment_ids.size(); ++i) pos.emplace(s.comment_ids[i], i);
  std::vector<std::size_t> idx;
  idx.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = pos.find(id);
    if (it == pos.end()) throw ValidationError("comment \"" + id + "\" is not in the similarity matrix");
    idx.push_back(it->second);
  }
  SimilarityMatrix out{Matrix(ids.size(), ids.size()), ids};
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) out.values(i, j) = s.values(idx[i], idx[j]);
  return out;
}

}  // namespace forumdiv
