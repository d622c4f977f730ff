// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include "sforge/renderer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <nlohmann/json.hpp>

#include "sforge/digest.hpp"
#include "sforge/error.hpp"

#ifndef SFORGE_ASSET_DIR
#define SFORGE_ASSET_DIR "assets"
#endif

namespace sforge {
namespace {

struct Point {
  double x;
  double y;
};

// Signed-area coverage accumulator. Each edge deposits its winding-weighted
// area into the cells it crosses; a running sum along each row then yields
// per-pixel coverage. Every operation happens in a fixed order, so results are
// bit-identical for identical inputs.
class Accumulator {
 public:
  Accumulator(int w, int h) : w_(w), h_(h), acc_(static_cast<std::size_t>(w) * h, 0.0f) {}

  void line(Point p0, Point p1) {
    if (p0.y == p1.y) return;
    float dir = 1.0f;
    if (p0.y > p1.y) {
      std::swap(p0, p1);
      dir = -1.0f;
    }
    const double dxdy = (p1.x - p0.x) / (p1.y - p0.y);
    double x = p0.x;
    int y0 = static_cast<int>(std::floor(p0.y));
    if (p0.y < 0) {
      x -= p0.y * dxdy;
      y0 = 0;
    }
    const int y1 = std::min(h_, static_cast<int>(std::ceil(p1.y)));
    for (int y = y0; y < y1; ++y) {
      float* row = &acc_[static_cast<std::size_t>(y) * w_];
      const double dy = std::min<double>(y + 1, p1.y) - std::max<double>(y, p0.y);
      const double xnext = x + dxdy * dy;
      const float d = static_cast<float>(dy) * dir;
      const double xa = std::min(x, xnext);
      const double xb = std::max(x, xnext);
      const double xa_floor = std::floor(xa);
      const int xa_i = static_cast<int>(xa_floor);
      const double xb_ceil = std::ceil(xb);
      const int xb_i = static_cast<int>(xb_ceil);
      if (xb_i <= xa_i + 1) {
        const float xmf = static_cast<float>(0.5 * (x + xnext) - xa_floor);
        add(row, xa_i, d - d * xmf);
        add(row, xa_i + 1, d * xmf);
      } else {
        const double s = 1.0 / (xb - xa);
        const double xa_f = xa - xa_floor;
        const double a0 = 0.5 * s * (1.0 - xa_f) * (1.0 - xa_f);
        const double xb_f = xb - xb_ceil + 1.0;
        const double am = 0.5 * s * xb_f * xb_f;
        add(row, xa_i, static_cast<float>(d * a0));
        if (xb_i == xa_i + 2) {
          add(row, xa_i + 1, static_cast<float>(d * (1.0 - a0 - am)));
        } else {
          const double a1 = s * (1.5 - xa_f);
          add(row, xa_i + 1, static_cast<float>(d * (a1 - a0)));
          for (int xi = xa_i + 2; xi < xb_i - 1; ++xi) add(row, xi, static_cast<float>(d * s));
          const double a2 = a1 + (xb_i - xa_i - 3) * s;
          add(row, xb_i - 1, static_cast<float>(d * (1.0 - a2 - am)));
        }
        add(row, xb_i, static_cast<float>(d * am));
      }
      x = xnext;
    }
  }

  // Running sum along rows; returns coverage in [0, 1].
  std::vector<float> coverage() const {
    std::vector<float> out(acc_.size());
    for (int y = 0; y < h_; ++y) {
      float sum = 0.0f;
      for (int x = 0; x < w_; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w_ + x;
        sum += acc_[i];
        out[i] = std::min(1.0f, std::fabs(sum));
      }
    }
    return out;
  }

 private:
  void add(float* row, int x, float v) {
    if (x >= 0 && x < w_) row[x] += v;
  }

  int w_;
  int h_;
  std::vector<float> acc_;
};

// Flattens one TrueType contour (quadratic B-splines with implied on-curve
// midpoints) into line segments.
void flatten(const Contour& c, const std::function<Point(const OutlinePoint&)>& map,
             std::vector<std::pair<Point, Point>>& segments) {
  const std::size_t n = c.size();
  if (n < 2) return;
  auto mid = [](Point a, Point b) { return Point{(a.x + b.x) / 2, (a.y + b.y) / 2}; };
  auto quad = [&](Point a, Point ctrl, Point b) {
    const double ddx = a.x - 2 * ctrl.x + b.x;
    const double ddy = a.y - 2 * ctrl.y + b.y;
    const int steps =
        std::clamp(static_cast<int>(std::ceil(std::sqrt(std::hypot(ddx, ddy)) * 2.0)), 1, 16);
    Point prev = a;
    for (int i = 1; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      const double u = 1 - t;
      const Point p{u * u * a.x + 2 * u * t * ctrl.x + t * t * b.x,
                    u * u * a.y + 2 * u * t * ctrl.y + t * t * b.y};
      segments.emplace_back(prev, p);
      prev = p;
    }
  };

  std::size_t first_on = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (c[i].on_curve) {
      first_on = i;
      break;
    }
  }
  Point start;
  std::size_t begin;
  if (first_on == n) {
    start = mid(map(c[n - 1]), map(c[0]));
    begin = 0;
  } else {
    start = map(c[first_on]);
    begin = first_on + 1;
  }
  Point cur = start;
  bool have_ctrl = false;
  Point ctrl{};
  const std::size_t count = first_on == n ? n : n - 1;
  for (std::size_t k = 0; k <= count; ++k) {
    const bool closing = k == count;
    const Point q = closing ? start : map(c[(begin + k) % n]);
    const bool on = closing || c[(begin + k) % n].on_curve;
    if (on) {
      if (have_ctrl) {
        quad(cur, ctrl, q);
      } else {
        segments.emplace_back(cur, q);
      }
      cur = q;
      have_ctrl = false;
    } else if (have_ctrl) {
      const Point m = mid(ctrl, q);
      quad(cur, ctrl, m);
      cur = m;
      ctrl = q;
    } else {
      ctrl = q;
      have_ctrl = true;
    }
  }
}

std::string join(std::span<const std::string_view> words, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    if (i > from) out.push_back(' ');
    out.append(words[i]);
  }
  return out;
}

std::string encode_utf8(std::u32string_view cps) {
  std::string out;
  for (char32_t cp : cps) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

}  // namespace

Rgb parse_color(std::string_view hex) {
  auto nibble = [&](char ch) -> int {
    if (ch >= '0' && ch <= '9') return ch - '0';
    if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
    if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
    throw ConfigError(fmt::format("invalid color '{}' (expected #RRGGBB)", hex));
  };
  if (hex.size() != 7 || hex[0] != '#') {
    throw ConfigError(fmt::format("invalid color '{}' (expected #RRGGBB)", hex));
  }
  auto byte = [&](std::size_t at) {
    return static_cast<std::uint8_t>(nibble(hex[at]) * 16 + nibble(hex[at + 1]));
  };
  return {byte(1), byte(3), byte(5)};
}

std::string format_color(Rgb c) { return fmt::format("#{:02X}{:02X}{:02X}", c.r, c.g, c.b); }

void RenderSpec::validate() const {
  if (width_px <= 0 || height_px <= 0 || margin_px < 0) {
    throw ConfigError("render spec: sizes must be positive and margin non-negative");
  }
  if (box_width() <= 0 || box_height() <= 0) {
    throw ConfigError(fmt::format("render spec: margin {} leaves no drawable area on {}x{}",
                                  margin_px, width_px, height_px));
  }
  if (!(font_size_pt > 0) || !std::isfinite(font_size_pt)) {
    throw ConfigError("render spec: font_size_pt must be positive");
  }
  if (!(dpi > 0) || !std::isfinite(dpi)) throw ConfigError("render spec: dpi must be positive");
  if (!(line_spacing_factor > 0) || !std::isfinite(line_spacing_factor)) {
    throw ConfigError("render spec: line_spacing_factor must be positive");
  }
  if (foreground == background) {
    throw ConfigError("render spec: foreground and background colors must differ");
  }
  if (font_asset.empty()) throw ConfigError("render spec: font_asset is empty");
}

std::string RenderSpec::canonical_json() const {
  const nlohmann::json j = {{"width_px", width_px},
                            {"height_px", height_px},
                            {"margin_px", margin_px},
                            {"font_size_pt", font_size_pt},
                            {"dpi", dpi},
                            {"line_spacing_factor", line_spacing_factor},
                            {"foreground", format_color(foreground)},
                            {"background", format_color(background)},
                            {"font_asset", font_asset}};
  return j.dump();
}

std::filesystem::path default_asset_dir() {
  if (const char* env = std::getenv("SPARROW_FORGE_ASSETS"); env && *env) return env;
  return SFORGE_ASSET_DIR;
}

std::filesystem::path resolve_font_asset(const std::string& font_asset,
                                         const std::filesystem::path& asset_dir) {
  return asset_dir / "fonts" / (font_asset + ".ttf");
}

TextRenderer::TextRenderer(RenderSpec spec, std::shared_ptr<const Font> font)
    : spec_(std::move(spec)), font_(std::move(font)) {
  spec_.validate();
  if (!font_) throw ConfigError("renderer: no font");
  scale_ = spec_.font_px() / font_->units_per_em();
  ascent_px_ = font_->ascender() * scale_;
  descent_px_ = -font_->descender() * scale_;
  line_step_ = spec_.line_spacing_factor * spec_.font_px();
  const double free = spec_.box_height() - ascent_px_ - descent_px_;
  if (free < 0) {
    throw ConfigError(fmt::format("render spec: a {:.1f}px line does not fit a {}px tall box",
                                  ascent_px_ + descent_px_, spec_.box_height()));
  }
  lines_per_canvas_ = static_cast<std::size_t>(std::floor(free / line_step_)) + 1;
  digest_ = sha256_hex(spec_.canonical_json() + "\n" + font_->digest());
}

TextRenderer TextRenderer::from_assets(RenderSpec spec, const std::filesystem::path& asset_dir) {
  spec.validate();
  auto font = Font::load(resolve_font_asset(spec.font_asset, asset_dir));
  return TextRenderer(std::move(spec), std::move(font));
}

double TextRenderer::measure_line(std::string_view text) const {
  double width = 0;
  for (char32_t cp : decode_utf8(text)) width += font_->advance(font_->glyph_index(cp)) * scale_;
  return width;
}

std::vector<std::string> TextRenderer::wrap_lines(std::string_view text) const {
  const auto words = split_words(text);
  const double box = spec_.box_width();
  std::vector<std::string> lines;
  std::string cur;
  for (std::string_view word : words) {
    if (measure_line(word) > box) {
      if (!cur.empty()) lines.push_back(std::move(cur));
      cur.clear();
      const std::u32string cps = decode_utf8(word);
      std::size_t from = 0;
      while (from < cps.size()) {
        std::size_t to = from + 1;
        while (to < cps.size() &&
               measure_line(encode_utf8(std::u32string_view(cps).substr(from, to + 1 - from))) <=
                   box) {
          ++to;
        }
        std::string piece = encode_utf8(std::u32string_view(cps).substr(from, to - from));
        if (to < cps.size()) {
          lines.push_back(std::move(piece));
        } else {
          cur = std::move(piece);
        }
        from = to;
      }
      continue;
    }
    if (cur.empty()) {
      cur = std::string(word);
      continue;
    }
    std::string candidate = cur + " " + std::string(word);
    if (measure_line(candidate) <= box) {
      cur = std::move(candidate);
    } else {
      lines.push_back(std::move(cur));
      cur = std::string(word);
    }
  }
  if (!cur.empty()) lines.push_back(std::move(cur));
  return lines;
}

std::vector<std::string> TextRenderer::layout_chunk(const TextChunk& chunk) const {
  const auto words = split_words(chunk.text);
  std::vector<std::size_t> cuts = {0};
  for (std::size_t b : chunk.paragraph_breaks) {
    if (b > cuts.back() && b < words.size()) cuts.push_back(b);
  }
  cuts.push_back(words.size());
  std::vector<std::string> lines;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    for (std::string& l : wrap_lines(join(words, cuts[i], cuts[i + 1]))) {
      lines.push_back(std::move(l));
    }
  }
  return lines;
}

Raster TextRenderer::render_lines(std::span<const std::string> lines) const {
  const int w = spec_.width_px;
  const int h = spec_.height_px;
  const int m = spec_.margin_px;
  std::vector<float> canvas(static_cast<std::size_t>(w) * h, 0.0f);
  std::vector<std::pair<Point, Point>> segments;

  for (std::size_t k = 0; k < lines.size(); ++k) {
    const double baseline = m + ascent_px_ + static_cast<double>(k) * line_step_;
    double pen = m;
    for (char32_t cp : decode_utf8(lines[k])) {
      const std::uint16_t g = font_->glyph_index(cp);
      segments.clear();
      const auto map = [&](const OutlinePoint& p) {
        return Point{pen + p.x * scale_, baseline - p.y * scale_};
      };
      for (const Contour& c : font_->outline(g)) flatten(c, map, segments);
      pen += font_->advance(g) * scale_;
      if (segments.empty()) continue;

      double min_x = segments[0].first.x, max_x = min_x;
      double min_y = segments[0].first.y, max_y = min_y;
      for (const auto& [a, b] : segments) {
        min_x = std::min({min_x, a.x, b.x});
        max_x = std::max({max_x, a.x, b.x});
        min_y = std::min({min_y, a.y, b.y});
        max_y = std::max({max_y, a.y, b.y});
      }
      const int ox = static_cast<int>(std::floor(min_x));
      const int oy = static_cast<int>(std::floor(min_y));
      const int gw = static_cast<int>(std::ceil(max_x)) - ox + 2;
      const int gh = static_cast<int>(std::ceil(max_y)) - oy + 1;
      Accumulator acc(gw, gh);
      for (const auto& [a, b] : segments) {
        acc.line({a.x - ox, a.y - oy}, {b.x - ox, b.y - oy});
      }
      const std::vector<float> cov = acc.coverage();
      // Composite, clipped to the margin box.
      for (int y = 0; y < gh; ++y) {
        const int cy = oy + y;
        if (cy < m || cy >= h - m) continue;
        for (int x = 0; x < gw; ++x) {
          const int cx = ox + x;
          if (cx < m || cx >= w - m) continue;
          float& dst = canvas[static_cast<std::size_t>(cy) * w + cx];
          dst = std::min(1.0f, dst + cov[static_cast<std::size_t>(y) * gw + x]);
        }
      }
    }
  }

  Raster out{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h * 3)};
  const Rgb fg = spec_.foreground;
  const Rgb bg = spec_.background;
  auto blend = [](int b, int f, int a) {
    return static_cast<std::uint8_t>((b * (255 - a) + f * a + 127) / 255);
  };
  for (std::size_t i = 0; i < canvas.size(); ++i) {
    const int a = static_cast<int>(canvas[i] * 255.0f + 0.5f);
    out.rgb[3 * i] = blend(bg.r, fg.r, a);
    out.rgb[3 * i + 1] = blend(bg.g, fg.g, a);
    out.rgb[3 * i + 2] = blend(bg.b, fg.b, a);
  }
  return out;
}

std::vector<RenderedImage> TextRenderer::render_chunk(const TextChunk& chunk) const {
  if (chunk.word_count == 0 || chunk.text.empty()) {
    throw ArgumentError("render_chunk: chunk is empty");
  }
  const std::vector<std::string> lines = layout_chunk(chunk);
  std::vector<RenderedImage> images;
  for (std::size_t at = 0, cont = 0; at < lines.size(); at += lines_per_canvas_, ++cont) {
    const std::size_t n = std::min(lines_per_canvas_, lines.size() - at);
    images.push_back({render_lines(std::span(lines).subspan(at, n)), chunk.index, cont});
  }
  return images;
}

}  // namespace sforge
