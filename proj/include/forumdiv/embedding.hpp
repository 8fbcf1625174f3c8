#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forumdiv/corpus.hpp"
#include "forumdiv/matrix.hpp"

namespace forumdiv {

enum class ModelTag { Tfidf, PcaTfidf, LsaTfidf, NmfTfidf };

std::string_view to_string(ModelTag tag);
/// Accepts "TFIDF", "PCA+TFIDF", "LSA+TFIDF", "NMF+TFIDF". Throws ParameterError
/// listing the supported tags otherwise.
ModelTag parse_model_tag(std::string_view name);
const std::vector<ModelTag>& all_model_tags();

struct Vocabulary {
  std::map<std::string, std::size_t> index;  // term -> column, dense in sorted-term order
  std::vector<std::string> terms;            // column -> term
  std::vector<std::size_t> document_frequency;

  std::size_t size() const { return terms.size(); }
};

struct EmbeddingMatrix {
  Matrix rows;  // one row per comment
  std::vector<std::string> comment_ids;
  ModelTag model = ModelTag::Tfidf;
};

struct SimilarityMatrix {
  Matrix values;  // N x N cosines
  std::vector<std::string> comment_ids;

  double operator()(std::size_t i, std::size_t j) const { return values(i, j); }
  std::size_t size() const { return comment_ids.size(); }
};

struct TfidfFit {
  Vocabulary vocabulary;
  EmbeddingMatrix embedding;
};

/// Raw term counts times smoothed idf ln((1+N)/(1+df)) + 1, rows L2-normalized.
TfidfFit fit_tfidf(const Corpus& corpus);

struct PcaFit {
  EmbeddingMatrix embedding;               // N x k projections
  Matrix components;                       // D x k, orthonormal columns
  std::vector<double> explained_variance;  // non-increasing, sample covariance eigenvalues
  std::vector<double> mean;                // column means subtracted before projection
};

/// Centered PCA onto the top-k covariance eigenvectors. Each component's
/// largest-magnitude loading is made positive.
PcaFit fit_pca(const EmbeddingMatrix& x, std::size_t k);

struct SvdFit {
  EmbeddingMatrix embedding;             // N x k, rows of U_k * Sigma_k
  Matrix components;                     // D x k right singular vectors
  std::vector<double> singular_values;   // non-increasing
};

/// Truncated SVD of the uncentered matrix (LSA). Same sign convention as fit_pca.
SvdFit fit_lsa(const EmbeddingMatrix& x, std::size_t k);

struct NmfOptions {
  std::size_t max_iter = 200;
  double tol = 1e-4;
  std::uint64_t seed = 0;
};

struct NmfFit {
  EmbeddingMatrix embedding;  // W, N x k
  Matrix basis;               // H, k x D
  std::size_t iterations = 0;
  double relative_error = 0.0;  // ||X - WH||_F / ||X||_F
};

/// Multiplicative-update NMF. X must be entrywise non-negative.
NmfFit fit_nmf(const EmbeddingMatrix& x, std::size_t k, const NmfOptions& options);

/// Pairwise cosine similarity; a zero row is 0 against everything, itself included.
SimilarityMatrix cosine_matrix(const EmbeddingMatrix& x);

/// min(100, N - 1, D), at least 1.
std::size_t default_reduced_dimension(std::size_t n, std::size_t d);

struct EmbedConfig {
  ModelTag model = ModelTag::PcaTfidf;
  std::optional<std::size_t> k;
  NmfOptions nmf;
};

/// TFIDF followed by the configured reduction.
EmbeddingMatrix embed_corpus(const Corpus& corpus, const EmbedConfig& config);

/// CSV with a `comment_id` header column; values formatted with %.9g.
std::string embedding_to_csv(const EmbeddingMatrix& x);
std::string similarity_to_csv(const SimilarityMatrix& s);
SimilarityMatrix parse_similarity_csv(std::string_view csv);

/// Restricts a similarity matrix to the given ids (in that order).
SimilarityMatrix restrict_to(const SimilarityMatrix& s, const std::vector<std::string>& ids);

}  // namespace forumdiv
