// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include "sforge/chunker.hpp"

#include <algorithm>
#include <array>

#include "sforge/error.hpp"

namespace sforge {
namespace {

constexpr std::array<std::string_view, 64> kAbbreviations = {
    "mr.",    "mrs.",  "ms.",   "dr.",    "prof.", "sr.",    "jr.",   "st.",
    "mt.",    "ft.",   "gen.",  "gov.",   "sen.",  "rep.",   "rev.",  "col.",
    "lt.",    "capt.", "sgt.",  "cmdr.",  "adm.",  "hon.",   "vs.",   "e.g.",
    "i.e.",   "cf.",   "viz.",  "al.",    "fig.",  "figs.",  "eq.",   "eqs.",
    "sec.",   "ch.",   "vol.",  "vols.",  "no.",   "nos.",   "pp.",   "ed.",
    "eds.",   "approx.", "dept.", "univ.", "inc.", "ltd.",   "co.",   "corp.",
    "jan.",   "feb.",  "mar.",  "apr.",   "jun.",  "jul.",   "aug.",  "sep.",
    "sept.",  "oct.",  "nov.",  "dec.",   "u.s.",  "u.k.",   "a.m.",  "p.m.",
};

struct Token {
  std::string_view text;
  bool opens_paragraph = false;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  int newlines = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      if (text[i] == '\n') ++newlines;
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    out.push_back({text.substr(start, i - start), !out.empty() && newlines >= 2});
    newlines = 0;
  }
  return out;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

// Quotes and brackets that may trail terminal punctuation.
std::string_view strip_closers(std::string_view tok) {
  for (bool changed = true; changed && !tok.empty();) {
    changed = false;
    for (std::string_view c : {")", "]", "}", "\"", "'", "’", "”"}) {
      if (ends_with(tok, c)) {
        tok.remove_suffix(c.size());
        changed = true;
      }
    }
  }
  return tok;
}

std::string_view strip_openers(std::string_view tok) {
  for (bool changed = true; changed && !tok.empty();) {
    changed = false;
    for (std::string_view c : {"(", "[", "{", "\"", "'", "‘", "“"}) {
      if (starts_with(tok, c)) {
        tok.remove_prefix(c.size());
        changed = true;
      }
    }
  }
  return tok;
}

bool is_abbreviation(std::string_view core) {
  core = strip_openers(core);
  if (core.size() == 2 && core[0] >= 'A' && core[0] <= 'Z' && core[1] == '.') {
    return true;  // initial, e.g. "J."
  }
  std::string lower(core);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) {
    return static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
  });
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lower) !=
         kAbbreviations.end();
}

bool is_boundary(std::string_view tok, std::string_view next) {
  const std::string_view core = strip_closers(tok);
  if (core.empty()) return false;
  const char last = core.back();
  if (last != '.' && last != '!' && last != '?') return false;
  const std::string_view head = strip_openers(next);
  if (head.empty()) return false;
  const char c = head.front();
  if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'))) return false;
  return !(last == '.' && is_abbreviation(core));
}

void append_words(std::string& dst, std::string_view src) {
  if (!dst.empty()) dst.push_back(' ');
  dst.append(src);
}

}  // namespace

void ChunkPolicy::validate() const {
  if (target_words == 0) throw ConfigError("chunk policy: target_words must be >= 1");
  if (hard_cap_words < target_words) {
    throw ConfigError("chunk policy: hard_cap_words must be >= target_words");
  }
}

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> out;
  for (const Token& t : tokenize(text)) out.push_back(t.text);
  return out;
}

std::size_t count_words(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = is_space(c);
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  for (std::string_view w : split_words(text)) append_words(out, w);
  return out;
}

std::span<const std::string_view> abbreviations() { return kAbbreviations; }

std::vector<Sentence> segment_sentences(std::string_view text) {
  const std::vector<Token> tokens = tokenize(text);
  if (tokens.empty()) throw ArgumentError("split_sentences: input is blank");
  std::vector<Sentence> out;
  Sentence cur;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].opens_paragraph && !cur.text.empty()) {
      out.push_back(std::move(cur));
      cur = {};
    }
    if (cur.text.empty()) cur.opens_paragraph = tokens[i].opens_paragraph;
    append_words(cur.text, tokens[i].text);
    const bool last = i + 1 == tokens.size();
    if (last || tokens[i + 1].opens_paragraph ||
        is_boundary(tokens[i].text, tokens[i + 1].text)) {
      out.push_back(std::move(cur));
      cur = {};
    }
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  for (Sentence& s : segment_sentences(text)) out.push_back(std::move(s.text));
  return out;
}

std::vector<TextChunk> pack_chunks(std::span<const Sentence> sentences,
                                   const ChunkPolicy& policy) {
  policy.validate();
  if (sentences.empty()) throw ArgumentError("pack_chunks: no sentences");

  std::vector<TextChunk> chunks;
  TextChunk cur;
  auto flush = [&] {
    if (cur.word_count == 0) return;
    cur.index = chunks.size();
    chunks.push_back(std::move(cur));
    cur = {};
  };
  auto add = [&](std::span<const std::string_view> words, bool opens_paragraph) {
    if (opens_paragraph && cur.word_count > 0) {
      cur.paragraph_breaks.push_back(cur.word_count);
    }
    for (std::string_view w : words) append_words(cur.text, w);
    cur.word_count += words.size();
  };

  if (policy.mode == ChunkMode::kWordWindow) {
    for (const Sentence& s : sentences) {
      const auto words = split_words(s.text);
      bool opens = s.opens_paragraph;
      for (std::size_t at = 0; at < words.size();) {
        if (cur.word_count == policy.target_words) flush();
        const std::size_t take =
            std::min(words.size() - at, policy.target_words - cur.word_count);
        add(std::span(words).subspan(at, take), opens);
        opens = false;
        at += take;
      }
    }
    flush();
    return chunks;
  }

  for (const Sentence& s : sentences) {
    const auto words = split_words(s.text);
    if (words.empty()) continue;
    if (words.size() > policy.hard_cap_words) {
      // Oversized sentence: hard split into target-sized pieces. The last
      // piece stays open so following sentences can join it.
      flush();
      bool opens = s.opens_paragraph;
      for (std::size_t at = 0; at < words.size(); at += policy.target_words) {
        flush();
        const std::size_t take = std::min(policy.target_words, words.size() - at);
        add(std::span(words).subspan(at, take), opens);
        opens = false;
      }
      continue;
    }
    if (cur.word_count > 0 && cur.word_count + words.size() > policy.target_words) {
      flush();
    }
    add(words, s.opens_paragraph);
  }
  flush();
  return chunks;
}

std::vector<TextChunk> pack_chunks(std::span<const std::string> sentences,
                                   const ChunkPolicy& policy) {
  std::vector<Sentence> wrapped;
  wrapped.reserve(sentences.size());
  for (const std::string& s : sentences) wrapped.push_back({s, false});
  return pack_chunks(std::span<const Sentence>(wrapped), policy);
}

std::vector<TextChunk> chunk_text(std::string_view context, const ChunkPolicy& policy) {
  const std::vector<Sentence> sentences = segment_sentences(context);
  return pack_chunks(std::span<const Sentence>(sentences), policy);
}

}  // namespace sforge
