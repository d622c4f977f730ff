// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sforge/chunker.hpp"
#include "sforge/records.hpp"
#include "sforge/renderer.hpp"

namespace sforge {

/// Destination for encoded images. Implementations must be thread-safe.
class ImageSink {
 public:
  virtual ~ImageSink() = default;
  /// Stores `png` under `name` and returns the reference to record in the
  /// manifest.
  virtual std::string put(const std::string& name, std::span<const std::uint8_t> png) = 0;
};

/// Writes <root>/images/<name>; references are "images/<name>".
class DirectoryImageSink final : public ImageSink {
 public:
  explicit DirectoryImageSink(std::filesystem::path root);
  std::string put(const std::string& name, std::span<const std::uint8_t> png) override;

 private:
  std::filesystem::path root_;
};

/// Keeps images in memory; for tests and the Python bindings.
class MemoryImageSink final : public ImageSink {
 public:
  std::string put(const std::string& name, std::span<const std::uint8_t> png) override;
  std::map<std::string, std::vector<std::uint8_t>> images() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::vector<std::uint8_t>> images_;
};

/// <id>_<chunk:04>_<continuation:02>.png with unsafe id characters replaced.
std::string image_file_name(std::string_view sample_id, std::size_t chunk_index,
                            std::size_t continuation_index);

/// SHA-256 of the canonical policy JSON.
std::string policy_digest(const ChunkPolicy& policy);

/// chunk -> render -> encode; question and answer are copied unchanged.
/// Errors carry the sample id.
SyntheticVideoSample synthesize(const TextInstructionSample& sample, const ChunkPolicy& policy,
                                const TextRenderer& renderer, ImageSink& sink);

/// Synthesizes every entry of a text manifest on `jobs` workers (0 = all
/// cores). Output order follows the input.
DatasetManifest synthesize_manifest(const DatasetManifest& text_manifest,
                                    const ChunkPolicy& policy, const TextRenderer& renderer,
                                    ImageSink& sink, unsigned jobs = 0);

// ---------------------------------------------------------------------------
// Frame sampling for real videos.

struct FramePlan {
  std::int64_t total_frames = 0;
  std::int64_t cap = 0;
  /// Strictly increasing 0-based frame indices.
  std::vector<std::int64_t> indices;
};

/// max(1, floor(duration_s * fps)). Throws ArgumentError on negative or
/// non-finite duration or non-positive fps.
std::int64_t frames_at_fps(double duration_s, double fps = 1.0);

/// All frames when total <= cap; otherwise the midpoint-uniform subset
/// floor((i + 0.5) * total / cap), i in [0, cap).
FramePlan plan_frames(std::int64_t total_frames, std::int64_t cap);

}  // namespace sforge
