// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sforge {

/// (long context, question, answer) triplet.
struct TextInstructionSample {
  std::string id;
  std::string context;
  std::string question;
  std::string answer;
  std::string source;

  bool operator==(const TextInstructionSample&) const = default;
};

struct VideoInstructionSample {
  std::string id;
  /// Opaque locator; never opened by this library.
  std::string video_ref;
  std::optional<double> duration_s;
  std::optional<std::int64_t> frame_count;
  std::string question;
  std::string answer;
  std::string source;

  bool operator==(const VideoInstructionSample&) const = default;
};

struct SynthesisProvenance {
  std::string source_id;
  std::string policy_digest;
  std::string spec_digest;

  bool operator==(const SynthesisProvenance&) const = default;
};

/// Rendered image sequence plus the untouched question/answer of the text
/// sample it came from.
struct SyntheticVideoSample {
  std::string id;
  /// Paths relative to the manifest directory, ordered by
  /// (chunk_index, continuation_index).
  std::vector<std::string> images;
  std::string question;
  std::string answer;
  std::string source;
  SynthesisProvenance provenance;

  bool operator==(const SyntheticVideoSample&) const = default;
};

using SampleRecord =
    std::variant<TextInstructionSample, VideoInstructionSample, SyntheticVideoSample>;

enum class ManifestKind { kText, kVideo, kSynthetic, kMixed };

std::string_view to_string(ManifestKind kind);
/// Throws IntegrityError on unknown names.
ManifestKind manifest_kind_from_string(std::string_view name);

struct DatasetManifest {
  ManifestKind kind = ManifestKind::kText;
  std::vector<SampleRecord> entries;
  std::map<std::string, std::size_t> source_counts;

  bool operator==(const DatasetManifest&) const = default;

  /// Builds a manifest and fills source_counts from the entries.
  static DatasetManifest from_entries(ManifestKind kind, std::vector<SampleRecord> entries);

  /// Throws IntegrityError naming the first violated invariant.
  void validate() const;
};

const std::string& record_id(const SampleRecord& r);
const std::string& record_source(const SampleRecord& r);
const std::string& record_question(const SampleRecord& r);
const std::string& record_answer(const SampleRecord& r);

}  // namespace sforge
