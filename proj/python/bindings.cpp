// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "sforge/chunker.hpp"
#include "sforge/cli.hpp"
#include "sforge/corpus.hpp"
#include "sforge/diversity.hpp"
#include "sforge/error.hpp"
#include "sforge/judge.hpp"
#include "sforge/mixer.hpp"
#include "sforge/renderer.hpp"
#include "sforge/synthesizer.hpp"
#include "sforge/version.hpp"

namespace py = pybind11;
using namespace sforge;

namespace {

ChunkPolicy make_policy(std::size_t target_words, std::size_t hard_cap_words) {
  ChunkPolicy p;
  p.target_words = target_words;
  p.hard_cap_words = hard_cap_words;
  p.validate();
  return p;
}

McqItem make_item(const std::string& question, const std::vector<std::string>& options,
                  const std::string& gold) {
  McqItem item;
  item.id = "item";
  item.question = question;
  for (std::size_t i = 0; i < options.size(); ++i) {
    item.options.push_back({std::string(1, static_cast<char>('A' + i)), options[i]});
  }
  item.gold = gold;
  if (auto why = item.check()) throw ArgumentError(*why);
  return item;
}

py::bytes as_bytes(const std::vector<std::uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

DenseMatrix to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ArgumentError("points: empty input");
  DenseMatrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols) throw ArgumentError("points: ragged rows");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i));
  }
  return m;
}

py::dict projection_dict(const Projection2D& p) {
  py::dict d;
  d["points"] = p.points;
  d["labels"] = p.labels;
  d["kl_trace"] = p.kl_trace;
  d["uncalibrated"] = p.uncalibrated;
  return d;
}

}  // namespace

PYBIND11_MODULE(_sparrow_forge, m) {
  m.doc() = "Native core of sparrow-forge.";
  m.attr("__version__") = std::string(library_version());

  static py::exception<Error> base(m, "SparrowForgeError", PyExc_ValueError);
  py::register_exception<ArgumentError>(m, "ArgumentError", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<IntegrityError>(m, "IntegrityError", base);
  py::register_exception<CapacityError>(m, "CapacityError", base);
  py::register_exception<DanglingReferenceError>(m, "DanglingReferenceError", base);
  py::register_exception<NumericalError>(m, "NumericalError", base);
  py::register_exception<ProviderError>(m, "ProviderError", base);

  m.def(
      "chunk_text",
      [](const std::string& text, std::size_t target_words, std::size_t hard_cap_words) {
        py::list out;
        for (const TextChunk& c : chunk_text(text, make_policy(target_words, hard_cap_words))) {
          py::dict d;
          d["index"] = c.index;
          d["text"] = c.text;
          d["word_count"] = c.word_count;
          d["paragraph_breaks"] = c.paragraph_breaks;
          out.append(d);
        }
        return out;
      },
      py::arg("text"), py::arg("target_words") = 115, py::arg("hard_cap_words") = 160);

  m.def(
      "render_text",
      [](const std::string& text, std::size_t target_words, std::size_t hard_cap_words) {
        const TextRenderer renderer = TextRenderer::from_assets(RenderSpec{});
        py::list out;
        for (const TextChunk& c : chunk_text(text, make_policy(target_words, hard_cap_words))) {
          for (const RenderedImage& img : renderer.render_chunk(c)) {
            out.append(as_bytes(encode_png(img.raster)));
          }
        }
        return out;
      },
      py::arg("text"), py::arg("target_words") = 115, py::arg("hard_cap_words") = 160,
      "PNG bytes of every canvas, in reading order.");

  m.def(
      "synthesize",
      [](const std::string& id, const std::string& context, const std::string& question,
         const std::string& answer, const std::string& source) {
        const TextRenderer renderer = TextRenderer::from_assets(RenderSpec{});
        MemoryImageSink sink;
        const SyntheticVideoSample s =
            synthesize(TextInstructionSample{id, context, question, answer, source},
                       ChunkPolicy{}, renderer, sink);
        py::dict images;
        for (const auto& [name, png] : sink.images()) images[py::str(name)] = as_bytes(png);
        py::dict d;
        d["id"] = s.id;
        d["images"] = s.images;
        d["question"] = s.question;
        d["answer"] = s.answer;
        d["source"] = s.source;
        d["png"] = images;
        return d;
      },
      py::arg("id"), py::arg("context"), py::arg("question"), py::arg("answer"),
      py::arg("source") = "python");

  m.def(
      "plan_frames",
      [](std::int64_t total, std::int64_t cap) { return plan_frames(total, cap).indices; },
      py::arg("total_frames"), py::arg("cap"));

  m.def(
      "mix",
      [](const std::vector<py::dict>& sources, std::uint64_t seed, std::optional<std::size_t> total,
         bool shuffle) {
        MixPlan plan;
        plan.seed = seed;
        plan.total = total;
        plan.shuffle = shuffle;
        std::vector<MixInput> inputs;
        for (const py::dict& s : sources) {
          MixSource src;
          src.name = s["name"].cast<std::string>();
          src.manifest = s["manifest"].cast<std::string>();
          if (s.contains("count")) src.count = s["count"].cast<std::size_t>();
          if (s.contains("ratio")) src.ratio = s["ratio"].cast<double>();
          const std::string prefix =
              s.contains("media_prefix") ? s["media_prefix"].cast<std::string>() : "";
          inputs.push_back({src.name, load_manifest(src.manifest), prefix});
          plan.sources.push_back(std::move(src));
        }
        std::ostringstream os;
        emit_training_format(build_mix(inputs, plan), os);
        return os.str();
      },
      py::arg("sources"), py::arg("seed") = 0, py::arg("total") = py::none(),
      py::arg("shuffle") = true,
      "Training records as JSON lines. Each source is a dict with name, manifest and count or "
      "ratio.");

  m.def(
      "exact_match",
      [](const std::string& prediction, const std::string& question,
         const std::vector<std::string>& options, const std::string& gold) {
        return exact_match(prediction, make_item(question, options, gold));
      },
      py::arg("prediction"), py::arg("question"), py::arg("options"), py::arg("gold") = "A");

  m.def(
      "build_judge_prompt",
      [](const std::string& question, const std::vector<std::string>& options,
         const std::string& prediction) {
        const JudgePrompt p = build_judge_prompt(make_item(question, options, "A"), prediction);
        return py::make_tuple(p.system, p.user);
      },
      py::arg("question"), py::arg("options"), py::arg("prediction"));

  m.def(
      "tsne",
      [](const std::vector<std::vector<double>>& points, std::vector<std::string> labels,
         std::uint64_t seed, double perplexity, int iterations) {
        TsneConfig cfg;
        cfg.seed = seed;
        cfg.perplexity = perplexity;
        cfg.iterations = iterations;
        const DenseMatrix x = to_matrix(points);
        Projection2D p;
        {
          py::gil_scoped_release release;
          p = tsne(x, std::move(labels), cfg);
        }
        return projection_dict(p);
      },
      py::arg("points"), py::arg("labels"), py::arg("seed") = 0, py::arg("perplexity") = 30.0,
      py::arg("iterations") = 1000);

  m.def(
      "cluster_stats",
      [](const std::vector<std::array<double, 2>>& points, const std::vector<std::string>& labels,
         std::size_t k) {
        Projection2D p;
        p.points = points;
        p.labels = labels;
        const ClusterSummary s = cluster_stats(p, k);
        py::dict d;
        d["k"] = s.k;
        d["same_label_fraction"] = s.same_label_fraction;
        py::dict per;
        for (const LabelStats& l : s.labels) {
          py::dict e;
          e["count"] = l.count;
          e["centroid"] = l.centroid;
          e["spread"] = l.spread;
          e["same_label_fraction"] = l.same_label_fraction;
          per[py::str(l.label)] = e;
        }
        d["labels"] = per;
        return d;
      },
      py::arg("points"), py::arg("labels"), py::arg("k") = 10);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in process; returns (code, stdout, stderr).");
}
