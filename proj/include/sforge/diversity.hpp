// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sforge/http.hpp"
#include "sforge/records.hpp"

namespace sforge {

struct LabeledInstruction {
  std::string text;
  std::string label;

  bool operator==(const LabeledInstruction&) const = default;
};

/// Seeded draw of min(n, size) entries without replacement, in draw order.
/// The label is the entry's source tag. Throws ArgumentError on an empty
/// manifest; a clamped n is logged as a warning.
std::vector<LabeledInstruction> sample_instructions(const DatasetManifest& manifest, std::size_t n,
                                                    std::uint64_t seed);

/// Row-major dense matrix.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool operator==(const DenseMatrix&) const = default;
};

struct EmbeddingMatrix {
  DenseMatrix vectors;
  std::vector<std::string> labels;
  std::string provider_id;

  /// Throws IntegrityError unless rows are unit length, D >= 2 and labels
  /// match the row count.
  void validate() const;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// One unit-norm row per text. Throws ArgumentError on empty strings.
  virtual DenseMatrix embed(std::span<const std::string> texts) const = 0;
  virtual std::string id() const = 0;
};

/// Offline provider: lowercase alphanumeric tokens hashed (FNV-1a 64) into
/// `dims` buckets, term counts weighted by smooth IDF computed over the batch,
/// then L2-normalized. A text with no alphanumeric token hashes as one token.
class LocalHashEmbedder final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDefaultDims = 512;

  explicit LocalHashEmbedder(std::size_t dims = kDefaultDims);
  DenseMatrix embed(std::span<const std::string> texts) const override;
  std::string id() const override;

  /// Tokenizer used for hashing; exposed for tests.
  static std::vector<std::string> tokenize(std::string_view text);
  static std::uint64_t fnv1a(std::string_view s);

 private:
  std::size_t dims_;
};

struct RemoteEmbedderOptions {
  std::size_t batch_size = 64;
  unsigned max_in_flight = 4;
  RetryPolicy retry;
};

/// POSTs batches to <base>/embeddings and normalizes the returned vectors.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(Endpoint endpoint, RemoteEmbedderOptions options = {});
  DenseMatrix embed(std::span<const std::string> texts) const override;
  std::string id() const override;

 private:
  JsonHttpClient client_;
  RemoteEmbedderOptions options_;
};

/// "local-hash" or "remote" (endpoint from SPARROW_EMBED_* variables).
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const std::string& name,
                                                           const RemoteEmbedderOptions& remote = {});

EmbeddingMatrix embed(std::span<const LabeledInstruction> instructions,
                      const EmbeddingProvider& provider);

/// Projects rows onto the top `dims` principal components. Returns the input
/// unchanged when it already has <= dims columns. Each component's sign is
/// fixed so its largest-magnitude loading is positive.
DenseMatrix pca_reduce(const DenseMatrix& x, std::size_t dims);

struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double learning_rate = 200.0;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch_iteration = 250;
  std::uint64_t seed = 0;
  int kl_every = 50;
  /// 0 leaves the input as is.
  std::size_t pca_dims = 0;
  unsigned jobs = 0;

  static constexpr std::size_t kMaxPoints = 12000;

  /// Throws ConfigError. Needs n >= 4 and perplexity < (n - 1) / 3.
  void validate(std::size_t n) const;
};

struct Projection2D {
  std::vector<std::array<double, 2>> points;
  std::vector<std::string> labels;
  /// (iteration, KL) pairs; iteration 0 is the initial layout.
  std::vector<std::pair<int, double>> kl_trace;
  /// Points whose bandwidth search missed the perplexity tolerance.
  std::vector<std::size_t> uncalibrated;
};

struct Affinities {
  std::size_t n = 0;
  /// Symmetric joint probabilities, n * n, zero diagonal.
  std::vector<double> p;
  std::vector<double> betas;
  std::vector<std::size_t> uncalibrated;
};

/// Per-point bandwidth search plus symmetrization.
Affinities joint_probabilities(const DenseMatrix& x, double perplexity, unsigned jobs = 0);

/// Entropy (natural log) of the conditional distribution of one point given
/// its squared distances to all others and precision beta.
double conditional_entropy(std::span<const double> sqdist_row, double beta);

/// KL(P || Q) for a 2D layout y (n * 2, row-major) with a 1e-12 floor.
double kl_divergence(std::span<const double> p, std::span<const double> y, std::size_t n);

/// dKL/dy scaled by `exaggeration` applied to P only.
std::vector<double> kl_gradient(std::span<const double> p, std::span<const double> y,
                                std::size_t n, double exaggeration = 1.0, unsigned jobs = 0);

Projection2D tsne(const DenseMatrix& x, std::vector<std::string> labels, const TsneConfig& config);
Projection2D tsne(const EmbeddingMatrix& matrix, const TsneConfig& config);

struct LabelStats {
  std::string label;
  std::size_t count = 0;
  std::array<double, 2> centroid{};
  /// Root-mean-square distance to the label centroid.
  double spread = 0.0;
  /// Mean fraction of each point's k nearest neighbors sharing its label.
  double same_label_fraction = 0.0;
};

struct ClusterSummary {
  std::size_t k = 0;
  double same_label_fraction = 0.0;
  /// Sorted by label.
  std::vector<LabelStats> labels;
};

/// Brute-force k-NN over the 2D points; k is clamped to n - 1. A lone point
/// counts as fully same-label.
ClusterSummary cluster_stats(const Projection2D& projection, std::size_t k = 10);

void write_scatter_csv(const Projection2D& projection, std::ostream& sink);
void write_scatter_svg(const Projection2D& projection, std::ostream& sink);
void write_cluster_summary(const ClusterSummary& summary, std::ostream& sink);

}  // namespace sforge
