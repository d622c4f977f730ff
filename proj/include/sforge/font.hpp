// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sforge {

/// Outline point in font units, y up.
struct OutlinePoint {
  double x = 0;
  double y = 0;
  bool on_curve = true;
};

using Contour = std::vector<OutlinePoint>;

/// Minimal reader for TrueType (glyf-flavoured) fonts: character mapping,
/// horizontal metrics and quadratic outlines, including composite glyphs.
/// No hinting, no kerning.
class Font {
 public:
  /// Throws ConfigError if the file is missing or not a usable TrueType font.
  static std::shared_ptr<const Font> load(const std::filesystem::path& path);
  static std::shared_ptr<const Font> from_bytes(std::vector<std::uint8_t> bytes);

  int units_per_em() const { return units_per_em_; }
  int ascender() const { return ascender_; }
  /// Negative below the baseline.
  int descender() const { return descender_; }

  /// Glyph for a code point; 0 (the replacement glyph) when unmapped.
  std::uint16_t glyph_index(char32_t cp) const;
  /// Advance width in font units.
  int advance(std::uint16_t glyph) const;
  std::vector<Contour> outline(std::uint16_t glyph) const;

  /// SHA-256 of the font file bytes.
  const std::string& digest() const { return digest_; }

 private:
  Font() = default;
  void parse();
  void outline_into(std::uint16_t glyph, double dx, double dy, double a, double b, double c,
                    double d, int depth, std::vector<Contour>& out) const;
  std::uint16_t u16(std::size_t off) const;
  std::int16_t i16(std::size_t off) const;
  std::uint32_t u32(std::size_t off) const;
  void require(std::size_t off, std::size_t len) const;

  std::vector<std::uint8_t> data_;
  std::string digest_;
  int units_per_em_ = 0;
  int ascender_ = 0;
  int descender_ = 0;
  int num_glyphs_ = 0;
  int num_hmetrics_ = 0;
  int loca_format_ = 0;
  std::size_t glyf_ = 0;
  std::size_t loca_ = 0;
  std::size_t hmtx_ = 0;
  std::unordered_map<char32_t, std::uint16_t> cmap_;
};

/// Decodes UTF-8; invalid sequences become U+FFFD.
std::u32string decode_utf8(std::string_view text);

}  // namespace sforge
