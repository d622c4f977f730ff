// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "sforge/diversity.hpp"
#include "sforge/error.hpp"
#include "sforge/parallel.hpp"
#include "sforge/rng.hpp"

namespace sforge {

using nlohmann::json;

std::vector<LabeledInstruction> sample_instructions(const DatasetManifest& manifest, std::size_t n,
                                                    std::uint64_t seed) {
  const std::size_t size = manifest.entries.size();
  if (size == 0) throw ArgumentError("sample_instructions: manifest is empty");
  if (n > size) {
    spdlog::warn("sample_instructions: requested {} instructions but the manifest has {}", n, size);
    n = size;
  }
  Rng rng(seed);
  std::vector<LabeledInstruction> out;
  out.reserve(n);
  for (std::size_t idx : sample_without_replacement(size, n, rng)) {
    const SampleRecord& r = manifest.entries[idx];
    out.push_back({record_question(r), record_source(r)});
  }
  return out;
}

namespace {

void normalize_rows(DenseMatrix& m, std::string_view who) {
  for (std::size_t i = 0; i < m.rows; ++i) {
    double* r = m.row(i);
    double ss = 0;
    for (std::size_t j = 0; j < m.cols; ++j) ss += r[j] * r[j];
    if (!(ss > 0) || !std::isfinite(ss)) {
      throw IntegrityError(fmt::format("{}: row {} has zero or non-finite norm", who, i));
    }
    const double inv = 1.0 / std::sqrt(ss);
    for (std::size_t j = 0; j < m.cols; ++j) r[j] *= inv;
  }
}

void reject_empty(std::span<const std::string> texts) {
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].find_first_not_of(" \t\r\n\f\v") == std::string::npos) {
      throw ArgumentError(fmt::format("embed: instruction {} is empty", i));
    }
  }
}

}  // namespace

void EmbeddingMatrix::validate() const {
  if (vectors.cols < 2) throw IntegrityError("embedding dimension must be at least 2");
  if (labels.size() != vectors.rows) {
    throw IntegrityError(fmt::format("embedding has {} rows but {} labels", vectors.rows,
                                     labels.size()));
  }
  for (std::size_t i = 0; i < vectors.rows; ++i) {
    double ss = 0;
    for (std::size_t j = 0; j < vectors.cols; ++j) ss += vectors.at(i, j) * vectors.at(i, j);
    if (!std::isfinite(ss) || std::abs(ss - 1.0) > 1e-6) {
      throw IntegrityError(fmt::format("embedding row {} is not unit length", i));
    }
  }
}

LocalHashEmbedder::LocalHashEmbedder(std::size_t dims) : dims_(dims) {
  if (dims_ < 2) throw ConfigError("local-hash embedder needs at least 2 dimensions");
}

std::string LocalHashEmbedder::id() const { return fmt::format("local-hash/fnv1a-tfidf/d{}", dims_); }

std::uint64_t LocalHashEmbedder::fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::string> LocalHashEmbedder::tokenize(std::string_view text) {
  // Bytes >= 0x80 stay inside tokens so non-ASCII words are not dropped.
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if ((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || c >= 0x80) {
      cur.push_back(static_cast<char>(c));
    } else if (c >= 'A' && c <= 'Z') {
      cur.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

DenseMatrix LocalHashEmbedder::embed(std::span<const std::string> texts) const {
  reject_empty(texts);
  const std::size_t n = texts.size();
  std::vector<std::map<std::size_t, double>> tf(n);
  std::vector<std::size_t> df(dims_, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> toks = tokenize(texts[i]);
    if (toks.empty()) toks.push_back(texts[i]);
    for (const std::string& t : toks) tf[i][fnv1a(t) % dims_] += 1.0;
    for (const auto& [bucket, _] : tf[i]) ++df[bucket];
  }
  DenseMatrix m(n, dims_);
  const double nn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [bucket, count] : tf[i]) {
      const double idf = std::log((1.0 + nn) / (1.0 + static_cast<double>(df[bucket]))) + 1.0;
      m.at(i, bucket) = count * idf;
    }
  }
  normalize_rows(m, "local-hash embed");
  return m;
}

RemoteEmbedder::RemoteEmbedder(Endpoint endpoint, RemoteEmbedderOptions options)
    : client_(std::move(endpoint)), options_(options) {
  if (options_.batch_size == 0) throw ConfigError("remote embedder: batch_size must be positive");
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
}

std::string RemoteEmbedder::id() const {
  return "remote/" + (client_.endpoint().model.empty() ? std::string("default")
                                                       : client_.endpoint().model);
}

DenseMatrix RemoteEmbedder::embed(std::span<const std::string> texts) const {
  reject_empty(texts);
  const std::size_t n = texts.size();
  const std::size_t batches = (n + options_.batch_size - 1) / options_.batch_size;
  std::vector<std::vector<std::vector<double>>> results(batches);
  parallel_for(batches, options_.max_in_flight, [&](std::size_t b) {
    const std::size_t lo = b * options_.batch_size;
    const std::size_t hi = std::min(n, lo + options_.batch_size);
    json body = {{"input", std::vector<std::string>(texts.begin() + lo, texts.begin() + hi)}};
    if (!client_.endpoint().model.empty()) body["model"] = client_.endpoint().model;
    with_retries(options_.retry, [&] {
      const json resp = client_.post("/embeddings", body);
      std::vector<std::vector<double>> vecs(hi - lo);
      try {
        const json& data = resp.at("data");
        if (data.size() != hi - lo) {
          throw ProviderError(fmt::format("embeddings: expected {} vectors, got {}", hi - lo,
                                          data.size()));
        }
        for (std::size_t k = 0; k < data.size(); ++k) {
          const std::size_t idx = data[k].contains("index") ? data[k]["index"].get<std::size_t>() : k;
          if (idx >= vecs.size()) throw ProviderError("embeddings: index out of range");
          vecs[idx] = data[k].at("embedding").get<std::vector<double>>();
        }
      } catch (const json::exception& e) {
        throw ProviderError(fmt::format("embeddings: malformed response: {}", e.what()));
      }
      results[b] = std::move(vecs);
    });
  });
  std::size_t dims = 0;
  for (const auto& batch : results) {
    for (const auto& v : batch) {
      if (dims == 0) dims = v.size();
      if (v.size() != dims || dims == 0) {
        throw IntegrityError(fmt::format("embeddings: dimension mismatch ({} vs {})", v.size(), dims));
      }
    }
  }
  DenseMatrix m(n, dims);
  std::size_t i = 0;
  for (const auto& batch : results) {
    for (const auto& v : batch) std::copy(v.begin(), v.end(), m.row(i++));
  }
  normalize_rows(m, "remote embed");
  return m;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const std::string& name,
                                                           const RemoteEmbedderOptions& remote) {
  if (name == "local-hash") return std::make_unique<LocalHashEmbedder>();
  if (name == "remote") {
    return std::make_unique<RemoteEmbedder>(Endpoint::from_env("SPARROW_EMBED"), remote);
  }
  throw ConfigError(fmt::format("unknown embedding provider '{}' (expected local-hash or remote)",
                                name));
}

EmbeddingMatrix embed(std::span<const LabeledInstruction> instructions,
                      const EmbeddingProvider& provider) {
  std::vector<std::string> texts;
  texts.reserve(instructions.size());
  EmbeddingMatrix out;
  for (const auto& ins : instructions) {
    texts.push_back(ins.text);
    out.labels.push_back(ins.label);
  }
  out.vectors = provider.embed(texts);
  out.provider_id = provider.id();
  out.validate();
  return out;
}

DenseMatrix pca_reduce(const DenseMatrix& x, std::size_t dims) {
  if (dims == 0) throw ArgumentError("pca_reduce: dims must be positive");
  if (x.cols <= dims) return x;
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> m(x.data.data(), static_cast<Eigen::Index>(x.rows),
                               static_cast<Eigen::Index>(x.cols));
  const Eigen::RowVectorXd mean = m.colwise().mean();
  const Eigen::MatrixXd centered = m.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericalError(0, "pca_reduce: eigensolver failed");
  // Eigenvalues come out ascending.
  Eigen::MatrixXd basis(x.cols, dims);
  for (std::size_t k = 0; k < dims; ++k) {
    Eigen::VectorXd v = solver.eigenvectors().col(static_cast<Eigen::Index>(x.cols - 1 - k));
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    basis.col(static_cast<Eigen::Index>(k)) = v;
  }
  const Eigen::MatrixXd proj = centered * basis;
  DenseMatrix out(x.rows, dims);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < dims; ++j) {
      out.at(i, j) = proj(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

}  // namespace sforge
