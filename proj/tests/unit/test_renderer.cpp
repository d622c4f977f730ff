// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <fmt/format.h>

#include <algorithm>
#include <map>

#include "fixtures.hpp"
#include "sforge/chunker.hpp"
#include "sforge/digest.hpp"
#include "sforge/error.hpp"
#include "sforge/renderer.hpp"

using namespace sforge;

namespace {

const TextRenderer& renderer() {
  static const TextRenderer r = TextRenderer::from_assets(RenderSpec{});
  return r;
}

TextChunk make_chunk(const std::string& text) {
  TextChunk c;
  c.text = normalize_whitespace(text);
  c.word_count = count_words(c.text);
  return c;
}

bool is_background(const Raster& r, int x, int y, Rgb bg) {
  const std::size_t i = (static_cast<std::size_t>(y) * r.width + x) * 3;
  return r.rgb[i] == bg.r && r.rgb[i + 1] == bg.g && r.rgb[i + 2] == bg.b;
}

std::size_t ink(const Raster& r, Rgb bg = {255, 255, 255}) {
  std::size_t n = 0;
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) n += is_background(r, x, y, bg) ? 0 : 1;
  return n;
}

bool margin_ok(const Raster& r, int m, Rgb bg = {255, 255, 255}) {
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      const bool inside = x >= m && x < r.width - m && y >= m && y < r.height - m;
      if (!inside && !is_background(r, x, y, bg)) return false;
    }
  }
  return true;
}

std::vector<TextChunk> fixture_chunks(std::size_t docs, std::uint64_t seed) {
  std::vector<TextChunk> out;
  for (const auto& doc : sforge::testing::english_corpus(docs, seed)) {
    for (auto& c : chunk_text(doc, ChunkPolicy{})) out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

TEST_CASE("measure_line examples") {
  const auto& r = renderer();
  CHECK(r.measure_line("") == 0.0);
  CHECK(r.measure_line("ab") >= r.measure_line("a"));
  // Frozen from the bundled font's advance table: 4711 units at 20 px / 2048 upem.
  CHECK(r.measure_line("Hello") == doctest::Approx(46.005859375).epsilon(1e-12));
  // Unmapped code points count at the replacement glyph's advance.
  CHECK(r.measure_line("\U0001F600") == doctest::Approx(r.font().advance(0) * 20.0 / 2048));
}

TEST_CASE("measure_line is monotone under extension") {
  const auto& r = renderer();
  Rng rng(5);
  const std::string doc = sforge::testing::english_document(rng, 200);
  for (std::size_t i = 1; i < doc.size(); i += 7) {
    const auto prefix = std::string_view(doc).substr(0, i);
    if (prefix.find('\n') != std::string_view::npos) break;
    CHECK(r.measure_line(prefix) <= r.measure_line(std::string_view(doc).substr(0, i + 1)));
  }
}

TEST_CASE("default spec geometry") {
  const RenderSpec s;
  CHECK(s.font_px() == 20.0);
  CHECK(s.box_width() == 408);
  CHECK(s.box_height() == 408);
  CHECK(renderer().lines_per_canvas() == 17);
}

TEST_CASE("wrap_lines postconditions") {
  const auto& r = renderer();
  CHECK(r.wrap_lines("word") == std::vector<std::string>{"word"});
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const std::string text = normalize_whitespace(sforge::testing::english_document(rng, 150));
    const auto lines = r.wrap_lines(text);
    std::string joined;
    for (const auto& l : lines) {
      CHECK(r.measure_line(l) <= 408.0);
      joined += (joined.empty() ? "" : " ") + l;
    }
    CHECK(joined == text);
  }
}

TEST_CASE("overlong words split at code points") {
  const auto& r = renderer();
  const std::string word(200, 'm');
  const auto lines = r.wrap_lines("a " + word + " b");
  REQUIRE(lines.size() >= 3);
  CHECK(lines.front() == "a");
  std::string rebuilt;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    CHECK(r.measure_line(lines[i]) <= 408.0);
    rebuilt += lines[i];
  }
  CHECK(rebuilt == word + " b");
}

TEST_CASE("paragraph breaks force new lines") {
  const auto chunks = chunk_text("First short paragraph.\n\nSecond one.", ChunkPolicy{});
  REQUIRE(chunks.size() == 1);
  CHECK(renderer().layout_chunk(chunks[0]) ==
        std::vector<std::string>{"First short paragraph.", "Second one."});
}

TEST_CASE("minimal chunk renders one canvas with ink inside the margin") {
  const auto imgs = renderer().render_chunk(make_chunk("a"));
  REQUIRE(imgs.size() == 1);
  CHECK(imgs[0].continuation_index == 0);
  CHECK(imgs[0].raster.width == 448);
  CHECK(imgs[0].raster.height == 448);
  CHECK(ink(imgs[0].raster) > 0);
  CHECK(margin_ok(imgs[0].raster, 20));
  CHECK_THROWS_AS(renderer().render_chunk(TextChunk{}), ArgumentError);
}

TEST_CASE("overflow spills onto continuation canvases") {
  const auto& r = renderer();
  std::string text;
  for (int i = 0; i < 400; ++i) text += "word ";
  TextChunk c = make_chunk(text);
  c.index = 3;
  const auto lines = r.layout_chunk(c);
  const auto imgs = r.render_chunk(c);
  CHECK(imgs.size() == (lines.size() + 16) / 17);
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    CHECK(imgs[i].chunk_index == 3);
    CHECK(imgs[i].continuation_index == i);
    CHECK(margin_ok(imgs[i].raster, 20));
  }
}

TEST_CASE("rendering is deterministic and survives png round trips") {
  Rng rng(21);
  const auto chunks = chunk_text(sforge::testing::english_document(rng, 300), ChunkPolicy{});
  const auto a = renderer().render_chunk(chunks[0]);
  const auto b = TextRenderer::from_assets(RenderSpec{}).render_chunk(chunks[0]);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].raster == b[i].raster);
    const auto png = encode_png(a[i].raster);
    CHECK(png == encode_png(b[i].raster));
    CHECK(decode_png(png) == a[i].raster);
  }
}

TEST_CASE("png codec") {
  Raster white{7, 5, std::vector<std::uint8_t>(7 * 5 * 3, 255)};
  const auto png = encode_png(white);
  CHECK(png.size() > 8);
  CHECK(png[1] == 'P');
  CHECK(decode_png(png) == white);
  Raster noise{13, 9, std::vector<std::uint8_t>(13 * 9 * 3)};
  Rng rng(3);
  for (auto& v : noise.rgb) v = static_cast<std::uint8_t>(rng.uniform_below(256));
  CHECK(decode_png(encode_png(noise)) == noise);
  const std::vector<std::uint8_t> junk = {1, 2, 3};
  CHECK_THROWS_AS(decode_png(junk), IntegrityError);
}

TEST_CASE("colors") {
  CHECK(parse_color("#FF8000") == Rgb{255, 128, 0});
  CHECK(format_color(Rgb{1, 2, 255}) == "#0102FF");
  CHECK_THROWS_AS(parse_color("red"), ConfigError);
  CHECK_THROWS_AS(parse_color("#12345"), ConfigError);

  RenderSpec s;
  s.foreground = {255, 255, 255};
  s.background = {0, 0, 128};
  const TextRenderer r = TextRenderer::from_assets(s);
  const auto imgs = r.render_chunk(make_chunk("Inverted colours work too."));
  CHECK(ink(imgs[0].raster, s.background) > 0);
  CHECK(margin_ok(imgs[0].raster, 20, s.background));
}

TEST_CASE("spec validation") {
  auto bad = [](auto mutate) {
    RenderSpec s;
    mutate(s);
    return s;
  };
  CHECK_THROWS_AS(bad([](RenderSpec& s) { s.margin_px = 224; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RenderSpec& s) { s.width_px = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RenderSpec& s) { s.font_size_pt = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RenderSpec& s) { s.line_spacing_factor = -1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RenderSpec& s) { s.background = s.foreground; }).validate(),
                  ConfigError);
  CHECK_THROWS_AS(TextRenderer::from_assets(bad([](RenderSpec& s) { s.font_asset = "Nope"; })),
                  ConfigError);
  // A single line taller than the box.
  CHECK_THROWS_AS(
      TextRenderer::from_assets(bad([](RenderSpec& s) { s.font_size_pt = 500; })), ConfigError);
  CHECK(RenderSpec{}.canonical_json() == RenderSpec{}.canonical_json());
  CHECK(bad([](RenderSpec& s) { s.margin_px = 21; }).canonical_json() !=
        RenderSpec{}.canonical_json());
}

TEST_CASE("fixture corpus layout properties") {
  const auto& r = renderer();
  const auto chunks = fixture_chunks(40, 77);
  std::map<std::size_t, std::size_t> hist;
  std::size_t full = 0, checked_lines = 0, wide_lines = 0;
  for (const auto& c : chunks) {
    const auto lines = r.layout_chunk(c);
    if (c.word_count >= 100) {
      ++full;
      ++hist[lines.size()];
    }
    // Every line except the last in each paragraph.
    const auto words = split_words(c.text);
    std::vector<std::size_t> cuts = {0};
    for (std::size_t b : c.paragraph_breaks) cuts.push_back(b);
    cuts.push_back(words.size());
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
      std::string para;
      for (std::size_t w = cuts[p]; w < cuts[p + 1]; ++w) {
        para += (para.empty() ? "" : " ") + std::string(words[w]);
      }
      if (para.empty()) continue;
      const auto pl = r.wrap_lines(para);
      for (std::size_t i = 0; i + 1 < pl.size(); ++i) {
        ++checked_lines;
        wide_lines += r.measure_line(pl[i]) >= 0.6 * 408 ? 1 : 0;
      }
    }
  }
  CHECK(checked_lines > 1000);
  CHECK(wide_lines == checked_lines);
  REQUIRE(full > 50);
  // Observed band for full default chunks; a few dense chunks reach 17 or more.
  std::size_t in_band = 0;
  for (const auto& [n, k] : hist) {
    MESSAGE(fmt::format("{} lines: {}", n, k));
    if (n >= 8 && n <= 17) in_band += k;
    CHECK(n >= 8);
  }
  CHECK(static_cast<double>(in_band) / static_cast<double>(full) >= 0.9);
}

TEST_CASE("rendered fixture images respect the margin") {
  const auto chunks = fixture_chunks(3, 5);
  std::size_t n = 0;
  for (std::size_t i = 0; i < chunks.size() && i < 12; ++i) {
    for (const auto& img : renderer().render_chunk(chunks[i])) {
      CHECK(margin_ok(img.raster, 20));
      CHECK(ink(img.raster) > 0);
      ++n;
    }
  }
  CHECK(n >= 12);
}
