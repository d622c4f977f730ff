// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations. These deliberately avoid the
// library's code paths so agreement means something.

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace sforge::testing {

/// Word counts produced by greedy first-fit packing of sentences with the
/// given word counts. Sentences over `cap` are hard-split into `target`
/// pieces with the remainder left open.
std::vector<std::size_t> greedy_pack_oracle(const std::vector<std::size_t>& sentence_words,
                                            std::size_t target, std::size_t cap);

/// Mean fraction of the k nearest neighbours (squared Euclidean, ties by
/// index) sharing the point's label.
double knn_purity_oracle(const std::vector<std::array<double, 2>>& pts,
                         const std::vector<std::string>& labels, std::size_t k);

/// Cosine between two documents under dictionary (unhashed) TF-IDF with
/// idf = ln((1 + N) / (1 + df)) + 1 computed over `corpus`.
double tfidf_cosine_oracle(const std::vector<std::string>& corpus, std::size_t a, std::size_t b);

/// KL(P || Q) computed from the Student-t definition without any shortcut.
double kl_oracle(const std::vector<double>& p, const std::vector<double>& y, std::size_t n);

/// SHA-256 hex computed by a small standalone implementation.
std::string sha256_oracle(const std::string& data);

}  // namespace sforge::testing
