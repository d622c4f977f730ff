// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sforge/chunker.hpp"
#include "sforge/font.hpp"

namespace sforge {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  bool operator==(const Rgb&) const = default;
};

/// "#RRGGBB"; throws ConfigError otherwise.
Rgb parse_color(std::string_view hex);
std::string format_color(Rgb c);

struct RenderSpec {
  int width_px = 448;
  int height_px = 448;
  int margin_px = 20;
  double font_size_pt = 20.0;
  /// Points per inch is 72, so at 72 dpi one point is one pixel.
  double dpi = 72.0;
  /// Baseline step as a multiple of the font pixel (em) size.
  double line_spacing_factor = 1.2;
  Rgb foreground{0, 0, 0};
  Rgb background{255, 255, 255};
  std::string font_asset = "Roboto-Regular";

  double font_px() const { return font_size_pt * dpi / 72.0; }
  int box_width() const { return width_px - 2 * margin_px; }
  int box_height() const { return height_px - 2 * margin_px; }

  /// Throws ConfigError on any invariant violation.
  void validate() const;
  /// Canonical JSON of every field; hashed into provenance digests.
  std::string canonical_json() const;
};

/// Default directory holding bundled assets (fonts/). Overridden by the
/// SPARROW_FORGE_ASSETS environment variable.
std::filesystem::path default_asset_dir();

/// assets/fonts/<font_asset>.ttf under `asset_dir`.
std::filesystem::path resolve_font_asset(const std::string& font_asset,
                                         const std::filesystem::path& asset_dir);

struct Raster {
  int width = 0;
  int height = 0;
  /// Row-major RGB, 3 bytes per pixel.
  std::vector<std::uint8_t> rgb;

  bool operator==(const Raster&) const = default;
};

struct RenderedImage {
  Raster raster;
  std::size_t chunk_index = 0;
  /// 0 for the first canvas of a chunk.
  std::size_t continuation_index = 0;
};

/// Lays out and rasterizes text under a fixed RenderSpec and font. Immutable
/// after construction; safe to share across threads.
class TextRenderer {
 public:
  /// Validates the spec and checks that at least one line fits a canvas.
  TextRenderer(RenderSpec spec, std::shared_ptr<const Font> font);

  /// Loads spec.font_asset from `asset_dir`.
  static TextRenderer from_assets(RenderSpec spec,
                                  const std::filesystem::path& asset_dir = default_asset_dir());

  const RenderSpec& spec() const { return spec_; }
  const Font& font() const { return *font_; }

  /// Sum of scaled glyph advances. Unmapped code points use the font's
  /// replacement glyph. `text` must not contain line breaks.
  double measure_line(std::string_view text) const;

  /// Greedy word wrap into lines no wider than the margin box. Words wider
  /// than the box are split between code points.
  std::vector<std::string> wrap_lines(std::string_view text) const;

  /// Lines of a chunk, honoring its paragraph breaks.
  std::vector<std::string> layout_chunk(const TextChunk& chunk) const;

  /// Lines that fit on one canvas.
  std::size_t lines_per_canvas() const { return lines_per_canvas_; }

  /// One canvas per lines_per_canvas() lines.
  std::vector<RenderedImage> render_chunk(const TextChunk& chunk) const;

  /// Draws pre-wrapped lines onto one canvas.
  Raster render_lines(std::span<const std::string> lines) const;

  /// SHA-256 over the canonical spec and the font digest.
  const std::string& digest() const { return digest_; }

 private:
  RenderSpec spec_;
  std::shared_ptr<const Font> font_;
  double scale_ = 0;
  double ascent_px_ = 0;
  double descent_px_ = 0;
  double line_step_ = 0;
  std::size_t lines_per_canvas_ = 0;
  std::string digest_;
};

/// PNG, 8-bit RGB, fixed compression parameters, no ancillary chunks.
std::vector<std::uint8_t> encode_png(const Raster& raster);
/// Throws IntegrityError on malformed input.
Raster decode_png(std::span<const std::uint8_t> bytes);

}  // namespace sforge
