// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sforge {

enum class ChunkMode {
  /// Greedy first-fit over sentences.
  kSentence,
  /// Fixed windows of target_words, ignoring sentence boundaries.
  kWordWindow,
};

struct ChunkPolicy {
  std::size_t target_words = 115;
  std::size_t hard_cap_words = 160;
  ChunkMode mode = ChunkMode::kSentence;

  /// Throws ConfigError when target_words == 0 or hard_cap_words < target_words.
  void validate() const;
};

struct TextChunk {
  std::size_t index = 0;
  /// Whitespace-normalized: words joined by single spaces.
  std::string text;
  std::size_t word_count = 0;
  /// Word offsets inside `text` that open a new paragraph (never 0).
  std::vector<std::size_t> paragraph_breaks;
};

/// A sentence plus whether a blank line preceded it in the source.
struct Sentence {
  std::string text;
  bool opens_paragraph = false;
};

bool is_space(char c) noexcept;

/// Whitespace-delimited tokens; views into `text`.
std::vector<std::string_view> split_words(std::string_view text);

std::size_t count_words(std::string_view text);

/// Collapses every whitespace run to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);

/// The bundled abbreviation list, lowercase, each ending in '.'.
std::span<const std::string_view> abbreviations();

/// Rule-based sentence splitting. A boundary follows a token ending in
/// '.', '!' or '?' (closing quotes/brackets allowed after it) when the next
/// token starts with an ASCII uppercase letter or digit, unless the token is
/// a bundled abbreviation or a single-capital initial. Blank lines are always
/// boundaries. Throws ArgumentError on blank input.
std::vector<std::string> split_sentences(std::string_view text);

/// Same boundaries as split_sentences, keeping paragraph starts.
std::vector<Sentence> segment_sentences(std::string_view text);

/// Packs sentences into chunks under `policy`. Throws ArgumentError when
/// `sentences` is empty.
std::vector<TextChunk> pack_chunks(std::span<const Sentence> sentences,
                                   const ChunkPolicy& policy);
std::vector<TextChunk> pack_chunks(std::span<const std::string> sentences,
                                   const ChunkPolicy& policy);

/// segment_sentences + pack_chunks.
std::vector<TextChunk> chunk_text(std::string_view context,
                                  const ChunkPolicy& policy);

}  // namespace sforge
