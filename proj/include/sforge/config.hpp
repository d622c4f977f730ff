// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sforge/chunker.hpp"
#include "sforge/diversity.hpp"
#include "sforge/judge.hpp"
#include "sforge/mixer.hpp"
#include "sforge/renderer.hpp"

namespace sforge {

struct MixSourceConfig {
  MixSource source;
  /// Overrides the computed image path prefix for synthetic entries.
  std::optional<std::string> media_prefix;
};

struct DiversitySettings {
  std::size_t n = 5000;
  std::string provider = "local-hash";
  RemoteEmbedderOptions remote;
  TsneConfig tsne;
  std::size_t k = 10;
};

struct JudgeSettings {
  std::string endpoint_env = "SPARROW_JUDGE";
  std::vector<std::string> prefixes = default_answer_prefixes();
  RetryPolicy retry;
  unsigned max_in_flight = 4;
};

struct FrameSettings {
  std::int64_t cap = 64;
  double fps = 1.0;
};

/// Everything a run needs. Relative paths are resolved against the
/// directory of the file they came from.
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  /// 0 means one worker per logical processor.
  unsigned jobs = 0;
  ChunkPolicy chunk;
  RenderSpec render;
  std::filesystem::path asset_dir;
  std::vector<MixSourceConfig> mix_sources;
  std::optional<std::size_t> mix_total;
  bool mix_shuffle = true;
  DiversitySettings diversity;
  JudgeSettings judge;
  FrameSettings frames;

  /// Validates every section; throws ConfigError.
  void validate() const;
  MixPlan mix_plan() const;
  /// Canonical JSON of all settings; the run-log digest is taken over it.
  std::string canonical_json() const;
  std::string digest() const;
};

/// Parses YAML text. Unknown keys and ill-typed values raise ConfigError
/// naming the offending key path.
RunConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace sforge
