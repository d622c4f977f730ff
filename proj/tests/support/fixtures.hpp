// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "sforge/diversity.hpp"
#include "sforge/records.hpp"
#include "sforge/rng.hpp"

namespace sforge::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "sforge");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path& p);
void spit(const std::filesystem::path& p, const std::string& bytes);

/// Zipf-weighted English-like prose: capitalized sentences of 6..28 words,
/// commas, occasional abbreviations, numbers and paragraph breaks. Mean word
/// length is close to running English text.
std::string english_document(Rng& rng, std::size_t approx_words);

/// Whitespace token count, written independently of the chunker.
std::size_t count_words_simple(std::string_view s);

/// `docs` documents with lengths spread over [300, 3000] words.
std::vector<std::string> english_corpus(std::size_t docs, std::uint64_t seed);

/// One sentence of English-like prose ending in '?'.
std::string english_question(Rng& rng);

/// Text samples whose contexts come from english_document.
std::vector<TextInstructionSample> text_samples(std::size_t n, std::uint64_t seed,
                                                const std::string& source,
                                                std::size_t min_words = 300,
                                                std::size_t max_words = 1500);

std::vector<VideoInstructionSample> video_samples(std::size_t n, std::uint64_t seed,
                                                  const std::string& source);

/// k isotropic Gaussian clusters in `dim` dimensions with unit sigma whose
/// centers sit `separation` sigmas apart along distinct axes scaled by
/// separation / sqrt(2).
struct LabeledPoints {
  DenseMatrix x;
  std::vector<std::string> labels;
};
LabeledPoints gaussian_clusters(std::size_t k, std::size_t per_cluster, std::size_t dim,
                                double separation, std::uint64_t seed);

/// In-process HTTP server on 127.0.0.1 with an ephemeral port.
class StubServer {
 public:
  /// `handler(path, body)` returns {status, body}.
  using Handler = std::function<std::pair<int, std::string>(const std::string&, const std::string&)>;
  explicit StubServer(Handler handler);
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  std::string base_url() const;
  int requests() const { return requests_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<int> requests_{0};
};

/// Chat-completions body whose assistant message is `content`.
std::string chat_response(const std::string& content);

/// Sets an environment variable for the lifetime of the object.
class ScopedEnv {
 public:
  ScopedEnv(std::string name, const std::string& value);
  ~ScopedEnv();

 private:
  std::string name_;
  std::optional<std::string> old_;
};

}  // namespace sforge::testing
