// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include "sforge/synthesizer.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>

#include "sforge/corpus.hpp"
#include "sforge/digest.hpp"
#include "sforge/error.hpp"
#include "sforge/parallel.hpp"

namespace sforge {

DirectoryImageSink::DirectoryImageSink(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_ / "images");
}

std::string DirectoryImageSink::put(const std::string& name, std::span<const std::uint8_t> png) {
  const std::filesystem::path path = root_ / "images" / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));
  if (!out) throw Error(fmt::format("cannot write image '{}'", path.string()));
  return "images/" + name;
}

std::string MemoryImageSink::put(const std::string& name, std::span<const std::uint8_t> png) {
  std::lock_guard lock(mu_);
  images_[name].assign(png.begin(), png.end());
  return "images/" + name;
}

std::map<std::string, std::vector<std::uint8_t>> MemoryImageSink::images() const {
  std::lock_guard lock(mu_);
  return images_;
}

std::string image_file_name(std::string_view sample_id, std::size_t chunk_index,
                            std::size_t continuation_index) {
  std::string safe;
  safe.reserve(sample_id.size());
  for (char c : sample_id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '.';
    safe.push_back(ok ? c : '_');
  }
  return fmt::format("{}_{:04d}_{:02d}.png", safe, chunk_index, continuation_index);
}

std::string policy_digest(const ChunkPolicy& policy) {
  const nlohmann::json j = {
      {"target_words", policy.target_words},
      {"hard_cap_words", policy.hard_cap_words},
      {"mode", policy.mode == ChunkMode::kSentence ? "sentence" : "word_window"}};
  return sha256_hex(j.dump());
}

SyntheticVideoSample synthesize(const TextInstructionSample& sample, const ChunkPolicy& policy,
                                const TextRenderer& renderer, ImageSink& sink) {
  if (auto why = check_sample(sample)) {
    throw ArgumentError(fmt::format("sample '{}': {}", sample.id, *why));
  }
  SyntheticVideoSample out;
  out.id = sample.id;
  out.question = sample.question;
  out.answer = sample.answer;
  out.source = sample.source;
  out.provenance = {sample.id, policy_digest(policy), renderer.digest()};
  try {
    for (const TextChunk& chunk : chunk_text(sample.context, policy)) {
      for (const RenderedImage& img : renderer.render_chunk(chunk)) {
        const std::vector<std::uint8_t> png = encode_png(img.raster);
        out.images.push_back(
            sink.put(image_file_name(sample.id, img.chunk_index, img.continuation_index), png));
      }
    }
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("sample '{}': {}", sample.id, e.what()));
  } catch (const ArgumentError& e) {
    throw ArgumentError(fmt::format("sample '{}': {}", sample.id, e.what()));
  } catch (const Error& e) {
    throw Error(fmt::format("sample '{}': {}", sample.id, e.what()));
  }
  return out;
}

DatasetManifest synthesize_manifest(const DatasetManifest& text_manifest,
                                    const ChunkPolicy& policy, const TextRenderer& renderer,
                                    ImageSink& sink, unsigned jobs) {
  policy.validate();
  text_manifest.validate();
  std::map<std::string, std::string> names;
  for (const SampleRecord& r : text_manifest.entries) {
    if (!std::holds_alternative<TextInstructionSample>(r)) {
      throw ArgumentError("synthesize_manifest: input manifest must contain text samples only");
    }
    const std::string stem = image_file_name(record_id(r), 0, 0);
    if (auto [it, fresh] = names.emplace(stem, record_id(r)); !fresh) {
      throw IntegrityError(fmt::format("sample ids '{}' and '{}' map to the same image names",
                                       it->second, record_id(r)));
    }
  }
  std::vector<std::optional<SyntheticVideoSample>> slots(text_manifest.entries.size());
  parallel_for(slots.size(), jobs, [&](std::size_t i) {
    slots[i] = synthesize(std::get<TextInstructionSample>(text_manifest.entries[i]), policy,
                          renderer, sink);
  });
  std::vector<SampleRecord> entries;
  entries.reserve(slots.size());
  for (auto& s : slots) entries.emplace_back(std::move(*s));
  return DatasetManifest::from_entries(ManifestKind::kSynthetic, std::move(entries));
}

std::int64_t frames_at_fps(double duration_s, double fps) {
  if (!std::isfinite(duration_s) || duration_s < 0) {
    throw ArgumentError("frames_at_fps: duration must be finite and non-negative");
  }
  if (!std::isfinite(fps) || fps <= 0) throw ArgumentError("frames_at_fps: fps must be positive");
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(duration_s * fps)));
}

FramePlan plan_frames(std::int64_t total_frames, std::int64_t cap) {
  if (total_frames < 1 || cap < 1) {
    throw ArgumentError("plan_frames: total_frames and cap must be >= 1");
  }
  FramePlan plan{total_frames, cap, {}};
  if (total_frames <= cap) {
    plan.indices.resize(static_cast<std::size_t>(total_frames));
    for (std::int64_t i = 0; i < total_frames; ++i) plan.indices[i] = i;
    return plan;
  }
  plan.indices.reserve(static_cast<std::size_t>(cap));
  // floor((i + 0.5) * T / c) in exact integer arithmetic.
  for (std::int64_t i = 0; i < cap; ++i) {
    plan.indices.push_back(((2 * i + 1) * total_frames) / (2 * cap));
  }
  return plan;
}

}  // namespace sforge
