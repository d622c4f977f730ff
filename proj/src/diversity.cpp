// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>

#include "sforge/diversity.hpp"
#include "sforge/error.hpp"

namespace sforge {

ClusterSummary cluster_stats(const Projection2D& projection, std::size_t k) {
  const std::size_t n = projection.points.size();
  if (projection.labels.size() != n) {
    throw ArgumentError("cluster_stats: labels and points differ in length");
  }
  ClusterSummary out;
  out.k = n > 1 ? std::min(k, n - 1) : 0;
  if (n == 0) return out;

  std::vector<double> frac(n, 1.0);
  if (out.k > 0) {
    std::vector<std::pair<double, std::size_t>> d(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t m = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double dx = projection.points[i][0] - projection.points[j][0];
        const double dy = projection.points[i][1] - projection.points[j][1];
        d[m++] = {dx * dx + dy * dy, j};
      }
      std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(out.k), d.end());
      std::size_t same = 0;
      for (std::size_t t = 0; t < out.k; ++t) {
        if (projection.labels[d[t].second] == projection.labels[i]) ++same;
      }
      frac[i] = static_cast<double>(same) / static_cast<double>(out.k);
    }
  }

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[projection.labels[i]].push_back(i);
  double total = 0;
  for (double f : frac) total += f;
  out.same_label_fraction = total / static_cast<double>(n);
  for (const auto& [label, members] : groups) {
    LabelStats s;
    s.label = label;
    s.count = members.size();
    double f = 0;
    for (std::size_t i : members) {
      s.centroid[0] += projection.points[i][0];
      s.centroid[1] += projection.points[i][1];
      f += frac[i];
    }
    const double c = static_cast<double>(s.count);
    s.centroid[0] /= c;
    s.centroid[1] /= c;
    double ss = 0;
    for (std::size_t i : members) {
      const double dx = projection.points[i][0] - s.centroid[0];
      const double dy = projection.points[i][1] - s.centroid[1];
      ss += dx * dx + dy * dy;
    }
    s.spread = std::sqrt(ss / c);
    s.same_label_fraction = f / c;
    out.labels.push_back(std::move(s));
  }
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q.push_back('"');
    q.push_back(c);
  }
  q.push_back('"');
  return q;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Ten-color categorical palette; further labels get evenly spaced hues.
std::string label_color(std::size_t idx) {
  static constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                             "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                             "#bcbd22", "#17becf"};
  if (idx < std::size(kPalette)) return kPalette[idx];
  return fmt::format("hsl({},60%,45%)", (idx * 137) % 360);
}

}  // namespace

void write_scatter_csv(const Projection2D& projection, std::ostream& sink) {
  sink << "x,y,label\n";
  for (std::size_t i = 0; i < projection.points.size(); ++i) {
    sink << fmt::format("{:.9g},{:.9g},{}\n", projection.points[i][0], projection.points[i][1],
                        csv_field(projection.labels.at(i)));
  }
  if (!sink) throw Error("write_scatter_csv: stream write failed");
}

void write_scatter_svg(const Projection2D& projection, std::ostream& sink) {
  constexpr double kSize = 800, kPad = 40, kLegend = 200;
  std::map<std::string, std::size_t> color_of;
  for (const std::string& l : projection.labels) color_of.emplace(l, 0);
  std::size_t c = 0;
  for (auto& [_, idx] : color_of) idx = c++;

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!projection.points.empty()) {
    xmin = xmax = projection.points[0][0];
    ymin = ymax = projection.points[0][1];
    for (const auto& p : projection.points) {
      xmin = std::min(xmin, p[0]);
      xmax = std::max(xmax, p[0]);
      ymin = std::min(ymin, p[1]);
      ymax = std::max(ymax, p[1]);
    }
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  const double scale = (kSize - 2 * kPad) / span;

  sink << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\">\n",
      kSize + kLegend, kSize);
  sink << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (std::size_t i = 0; i < projection.points.size(); ++i) {
    const double px = kPad + (projection.points[i][0] - xmin) * scale;
    const double py = kSize - kPad - (projection.points[i][1] - ymin) * scale;
    sink << fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2\" fill=\"{}\"/>\n", px, py,
                        label_color(color_of.at(projection.labels.at(i))));
  }
  double ly = kPad;
  for (const auto& [label, idx] : color_of) {
    sink << fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"5\" fill=\"{}\"/>\n",
                        kSize + 10, ly, label_color(idx));
    sink << fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
        kSize + 20, ly + 4, xml_escape(label));
    ly += 18;
  }
  sink << "</svg>\n";
  if (!sink) throw Error("write_scatter_svg: stream write failed");
}

void write_cluster_summary(const ClusterSummary& summary, std::ostream& sink) {
  nlohmann::json j;
  j["k"] = summary.k;
  j["same_label_fraction"] = summary.same_label_fraction;
  j["labels"] = nlohmann::json::array();
  for (const LabelStats& s : summary.labels) {
    j["labels"].push_back({{"label", s.label},
                           {"count", s.count},
                           {"centroid", {s.centroid[0], s.centroid[1]}},
                           {"spread", s.spread},
                           {"same_label_fraction", s.same_label_fraction}});
  }
  sink << j.dump(1) << '\n';
}

}  // namespace sforge
