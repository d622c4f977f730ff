// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include "sforge/font.hpp"

#include <fmt/format.h>

#include <fstream>
#include <iterator>

#include "sforge/digest.hpp"
#include "sforge/error.hpp"

namespace sforge {
namespace {

constexpr int kMaxCompositeDepth = 8;

std::uint32_t tag(const char (&t)[5]) {
  return (std::uint32_t(std::uint8_t(t[0])) << 24) | (std::uint32_t(std::uint8_t(t[1])) << 16) |
         (std::uint32_t(std::uint8_t(t[2])) << 8) | std::uint32_t(std::uint8_t(t[3]));
}

}  // namespace

std::shared_ptr<const Font> Font::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("font asset not found: '{}'", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return from_bytes(std::move(bytes));
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::shared_ptr<const Font> Font::from_bytes(std::vector<std::uint8_t> bytes) {
  std::shared_ptr<Font> f(new Font());
  f->data_ = std::move(bytes);
  f->digest_ = sha256_hex(f->data_);
  f->parse();
  return f;
}

void Font::require(std::size_t off, std::size_t len) const {
  if (off > data_.size() || len > data_.size() - off) {
    throw ConfigError("font: truncated or corrupt table data");
  }
}

std::uint16_t Font::u16(std::size_t off) const {
  require(off, 2);
  return static_cast<std::uint16_t>((data_[off] << 8) | data_[off + 1]);
}

std::int16_t Font::i16(std::size_t off) const { return static_cast<std::int16_t>(u16(off)); }

std::uint32_t Font::u32(std::size_t off) const {
  require(off, 4);
  return (std::uint32_t(data_[off]) << 24) | (std::uint32_t(data_[off + 1]) << 16) |
         (std::uint32_t(data_[off + 2]) << 8) | std::uint32_t(data_[off + 3]);
}

void Font::parse() {
  const std::uint32_t version = u32(0);
  if (version != 0x00010000 && version != tag("true")) {
    throw ConfigError("font: not a TrueType outline font");
  }
  const int num_tables = u16(4);
  std::size_t head = 0, hhea = 0, maxp = 0, cmap = 0;
  for (int i = 0; i < num_tables; ++i) {
    const std::size_t rec = 12 + 16 * static_cast<std::size_t>(i);
    const std::uint32_t t = u32(rec);
    const std::size_t off = u32(rec + 8);
    require(off, u32(rec + 12));
    if (t == tag("head")) head = off;
    else if (t == tag("hhea")) hhea = off;
    else if (t == tag("maxp")) maxp = off;
    else if (t == tag("cmap")) cmap = off;
    else if (t == tag("hmtx")) hmtx_ = off;
    else if (t == tag("loca")) loca_ = off;
    else if (t == tag("glyf")) glyf_ = off;
  }
  if (!head || !hhea || !maxp || !cmap || !hmtx_ || !loca_ || !glyf_) {
    throw ConfigError("font: missing a required table (head/hhea/maxp/cmap/hmtx/loca/glyf)");
  }
  units_per_em_ = u16(head + 18);
  loca_format_ = i16(head + 50);
  ascender_ = i16(hhea + 4);
  descender_ = i16(hhea + 6);
  num_hmetrics_ = u16(hhea + 34);
  num_glyphs_ = u16(maxp + 4);
  if (units_per_em_ <= 0 || num_hmetrics_ == 0 || num_glyphs_ == 0) {
    throw ConfigError("font: invalid header metrics");
  }

  // Pick the richest Unicode subtable: format 12 beats format 4.
  const int num_sub = u16(cmap + 2);
  std::size_t best = 0;
  int best_rank = 0;
  for (int i = 0; i < num_sub; ++i) {
    const std::size_t rec = cmap + 4 + 8 * static_cast<std::size_t>(i);
    const int platform = u16(rec);
    const int encoding = u16(rec + 2);
    const std::size_t sub = cmap + u32(rec + 4);
    const int format = u16(sub);
    const bool unicode = platform == 0 || (platform == 3 && (encoding == 1 || encoding == 10));
    if (!unicode) continue;
    const int rank = format == 12 ? 2 : format == 4 ? 1 : 0;
    if (rank > best_rank) {
      best_rank = rank;
      best = sub;
    }
  }
  if (best_rank == 0) throw ConfigError("font: no Unicode cmap subtable (format 4 or 12)");

  if (best_rank == 2) {
    const std::uint32_t groups = u32(best + 12);
    for (std::uint32_t g = 0; g < groups; ++g) {
      const std::size_t rec = best + 16 + 12 * static_cast<std::size_t>(g);
      const std::uint32_t first = u32(rec);
      const std::uint32_t last = u32(rec + 4);
      const std::uint32_t glyph = u32(rec + 8);
      if (last < first || last - first > 0x10FFFF) continue;
      for (std::uint32_t c = first; c <= last; ++c) {
        cmap_.emplace(static_cast<char32_t>(c), static_cast<std::uint16_t>(glyph + (c - first)));
      }
    }
  } else {
    const std::size_t seg_count = u16(best + 6) / 2;
    const std::size_t ends = best + 14;
    const std::size_t starts = ends + 2 * seg_count + 2;
    const std::size_t deltas = starts + 2 * seg_count;
    const std::size_t ranges = deltas + 2 * seg_count;
    for (std::size_t s = 0; s < seg_count; ++s) {
      const std::uint32_t end = u16(ends + 2 * s);
      const std::uint32_t start = u16(starts + 2 * s);
      const std::uint16_t delta = u16(deltas + 2 * s);
      const std::size_t range_pos = ranges + 2 * s;
      const std::uint16_t range = u16(range_pos);
      for (std::uint32_t c = start; c <= end && c != 0xFFFF; ++c) {
        std::uint16_t g;
        if (range == 0) {
          g = static_cast<std::uint16_t>(c + delta);
        } else {
          g = u16(range_pos + range + 2 * (c - start));
          if (g != 0) g = static_cast<std::uint16_t>(g + delta);
        }
        if (g != 0) cmap_.emplace(static_cast<char32_t>(c), g);
      }
    }
  }
}

std::uint16_t Font::glyph_index(char32_t cp) const {
  const auto it = cmap_.find(cp);
  if (it == cmap_.end() || it->second >= num_glyphs_) return 0;
  return it->second;
}

int Font::advance(std::uint16_t glyph) const {
  const int i = glyph < num_hmetrics_ ? glyph : num_hmetrics_ - 1;
  return u16(hmtx_ + 4 * static_cast<std::size_t>(i));
}

std::vector<Contour> Font::outline(std::uint16_t glyph) const {
  std::vector<Contour> out;
  outline_into(glyph, 0, 0, 1, 0, 0, 1, 0, out);
  return out;
}

// Transform: x' = a*x + c*y + dx, y' = b*x + d*y + dy.
void Font::outline_into(std::uint16_t glyph, double dx, double dy, double a, double b, double c,
                        double d, int depth, std::vector<Contour>& out) const {
  if (glyph >= num_glyphs_ || depth > kMaxCompositeDepth) return;
  std::size_t start, end;
  if (loca_format_ == 0) {
    start = 2 * static_cast<std::size_t>(u16(loca_ + 2 * glyph));
    end = 2 * static_cast<std::size_t>(u16(loca_ + 2 * (glyph + 1)));
  } else {
    start = u32(loca_ + 4 * glyph);
    end = u32(loca_ + 4 * (glyph + 1));
  }
  if (end <= start) return;  // empty glyph (space)
  const std::size_t g = glyf_ + start;
  require(g, end - start);
  const int contours = i16(g);

  if (contours >= 0) {
    std::vector<std::size_t> ends(static_cast<std::size_t>(contours));
    for (int i = 0; i < contours; ++i) ends[i] = u16(g + 10 + 2 * static_cast<std::size_t>(i));
    const std::size_t n_points = contours ? ends.back() + 1 : 0;
    std::size_t p = g + 10 + 2 * static_cast<std::size_t>(contours);
    p += 2 + u16(p);  // skip instructions
    std::vector<std::uint8_t> flags;
    flags.reserve(n_points);
    while (flags.size() < n_points) {
      require(p, 1);
      const std::uint8_t f = data_[p++];
      flags.push_back(f);
      if (f & 8) {
        require(p, 1);
        for (int r = data_[p++]; r > 0 && flags.size() < n_points; --r) flags.push_back(f);
      }
    }
    std::vector<int> xs(n_points), ys(n_points);
    int v = 0;
    for (std::size_t i = 0; i < n_points; ++i) {
      const std::uint8_t f = flags[i];
      if (f & 2) {
        require(p, 1);
        const int delta = data_[p++];
        v += (f & 16) ? delta : -delta;
      } else if (!(f & 16)) {
        v += i16(p);
        p += 2;
      }
      xs[i] = v;
    }
    v = 0;
    for (std::size_t i = 0; i < n_points; ++i) {
      const std::uint8_t f = flags[i];
      if (f & 4) {
        require(p, 1);
        const int delta = data_[p++];
        v += (f & 32) ? delta : -delta;
      } else if (!(f & 32)) {
        v += i16(p);
        p += 2;
      }
      ys[i] = v;
    }
    std::size_t first = 0;
    for (std::size_t e : ends) {
      if (e < first || e >= n_points) throw ConfigError("font: corrupt contour end points");
      Contour contour;
      for (std::size_t i = first; i <= e; ++i) {
        contour.push_back({a * xs[i] + c * ys[i] + dx, b * xs[i] + d * ys[i] + dy,
                           (flags[i] & 1) != 0});
      }
      out.push_back(std::move(contour));
      first = e + 1;
    }
    return;
  }

  // Composite glyph.
  std::size_t p = g + 10;
  for (bool more = true; more;) {
    const std::uint16_t flags = u16(p);
    const std::uint16_t child = u16(p + 2);
    p += 4;
    double ox = 0, oy = 0;
    if (flags & 1) {
      if (flags & 2) {
        ox = i16(p);
        oy = i16(p + 2);
      }
      p += 4;
    } else {
      if (flags & 2) {
        require(p, 2);
        ox = static_cast<std::int8_t>(data_[p]);
        oy = static_cast<std::int8_t>(data_[p + 1]);
      }
      p += 2;
    }
    double ca = 1, cb = 0, cc = 0, cd = 1;
    if (flags & 8) {
      ca = cd = i16(p) / 16384.0;
      p += 2;
    } else if (flags & 0x40) {
      ca = i16(p) / 16384.0;
      cd = i16(p + 2) / 16384.0;
      p += 4;
    } else if (flags & 0x80) {
      ca = i16(p) / 16384.0;
      cb = i16(p + 2) / 16384.0;
      cc = i16(p + 4) / 16384.0;
      cd = i16(p + 6) / 16384.0;
      p += 8;
    }
    // Compose parent ∘ child.
    const double na = a * ca + c * cb;
    const double nb = b * ca + d * cb;
    const double nc = a * cc + c * cd;
    const double nd = b * cc + d * cd;
    const double ndx = a * ox + c * oy + dx;
    const double ndy = b * ox + d * oy + dy;
    outline_into(child, ndx, ndy, na, nb, nc, nd, depth + 1, out);
    more = (flags & 0x20) != 0;
  }
}

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    const auto c0 = static_cast<unsigned char>(text[i]);
    int len = 0;
    char32_t cp = 0;
    if (c0 < 0x80) {
      len = 1;
      cp = c0;
    } else if ((c0 & 0xE0) == 0xC0) {
      len = 2;
      cp = c0 & 0x1F;
    } else if ((c0 & 0xF0) == 0xE0) {
      len = 3;
      cp = c0 & 0x0F;
    } else if ((c0 & 0xF8) == 0xF0) {
      len = 4;
      cp = c0 & 0x07;
    }
    bool ok = len > 0 && i + len <= text.size();
    for (int k = 1; ok && k < len; ++k) {
      const auto ck = static_cast<unsigned char>(text[i + k]);
      if ((ck & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (ck & 0x3F);
    }
    if (!ok) {
      out.push_back(U'�');
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

}  // namespace sforge
