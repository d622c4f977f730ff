// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sforge/records.hpp"

namespace sforge {

struct MixSource {
  /// Stable identifier; prefixed onto every entry id drawn from this source.
  std::string name;
  std::filesystem::path manifest;
  /// Exactly one of count / ratio is set.
  std::optional<std::size_t> count;
  std::optional<double> ratio;
};

struct MixPlan {
  std::uint64_t seed = 0;
  std::vector<MixSource> sources;
  /// Required when any source uses a ratio. Ratio sources share
  /// total - sum(counts).
  std::optional<std::size_t> total;
  bool shuffle = true;

  /// Throws ConfigError.
  void validate() const;
  /// SHA-256 over seed, source names and quotas, total, shuffle and the
  /// generator algorithm id. Manifest paths are not part of the digest.
  std::string digest() const;
};

/// Absolute counts pass through; ratios split the remainder by largest
/// remainder with ties going to the earlier source. Throws CapacityError
/// naming the first source whose quota exceeds `available`.
std::vector<std::size_t> resolve_quotas(const MixPlan& plan, std::span<const std::size_t> available);

/// One line of the training file.
struct TrainingEntry {
  /// "<source name>/<original id>".
  std::string id;
  /// "video", "synthetic" or "text".
  std::string kind;
  /// Video locator, ordered image paths, or empty for pure text.
  std::vector<std::string> media;
  std::string question;
  std::string answer;
  std::string source;

  bool operator==(const TrainingEntry&) const = default;
};

struct TrainingManifest {
  std::vector<TrainingEntry> entries;
  /// Realized per-source counts, in plan order.
  std::vector<std::pair<std::string, std::size_t>> composition;
  std::string plan_digest;
  std::string rng_algorithm;

  bool operator==(const TrainingManifest&) const = default;
};

struct MixInput {
  std::string name;
  DatasetManifest manifest;
  /// Prepended to synthetic image references (the manifest directory as seen
  /// from wherever the training file will live).
  std::string media_prefix;
};

/// Converts one manifest record to its training form. Pure-text samples put
/// the context ahead of the question.
TrainingEntry to_training_entry(const SampleRecord& record, const std::string& source_name,
                                const std::string& media_prefix);

/// Per-source sampling without replacement with seed ^ source_index, then an
/// optional permutation of the concatenation. Throws CapacityError or
/// IntegrityError (duplicate ids after prefixing).
TrainingManifest build_mix(std::span<const MixInput> inputs, const MixPlan& plan);

/// JSON lines, one per entry. When `media_root` is set, every synthetic image
/// path must exist under it or DanglingReferenceError is thrown.
void emit_training_format(const TrainingManifest& manifest, std::ostream& sink,
                          const std::optional<std::filesystem::path>& media_root = std::nullopt);

/// Composition, plan digest and generator id as a JSON document.
void write_training_meta(const TrainingManifest& manifest, std::ostream& sink);

std::vector<TrainingEntry> read_training_records(std::istream& source);

}  // namespace sforge
