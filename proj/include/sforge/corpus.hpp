// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sforge/records.hpp"

namespace sforge {

/// One rejected input record. Emitted alongside parse results instead of
/// aborting the run.
struct ValidationReport {
  std::size_t record_index = 0;
  std::string id;
  std::string reason;

  bool operator==(const ValidationReport&) const = default;
};

template <typename Sample>
struct ParseResult {
  std::vector<Sample> samples;
  std::vector<ValidationReport> reports;
  std::size_t record_count = 0;
};

struct AdapterOptions {
  /// Dataset identifier stamped on samples; defaults to the adapter id.
  std::optional<std::string> source;
  /// Markers that end the context inside a combined instruction field
  /// (longalpaca, longqlora). The last occurrence wins; when none is
  /// present the last question-mark sentence becomes the question.
  std::vector<std::string> context_end_markers = {
      "Now the paper ends.", "Now the material ends.", "Now the book ends.",
      "Now the story ends.", "Now the document ends."};
};

/// Adapter ids accepted by parse_text_dataset.
std::span<const std::string_view> text_adapters();
/// Adapter ids accepted by parse_video_dataset.
std::span<const std::string_view> video_adapters();

/// Parses a JSON array document or a JSON-lines stream. Throws ConfigError
/// for an unknown adapter and ParseError (with record index) for records that
/// are not JSON objects.
ParseResult<TextInstructionSample> parse_text_dataset(std::string_view bytes,
                                                      std::string_view format,
                                                      const AdapterOptions& options = {});
ParseResult<VideoInstructionSample> parse_video_dataset(std::string_view bytes,
                                                        std::string_view format,
                                                        const AdapterOptions& options = {});

/// Splits a combined "context + question" field. Returns {context, question};
/// context is empty when no split point exists.
std::pair<std::string, std::string> split_context_question(
    std::string_view combined, std::span<const std::string> markers);

/// Reason string when the sample breaks an invariant, nullopt otherwise.
std::optional<std::string> check_sample(const TextInstructionSample& s);
std::optional<std::string> check_sample(const VideoInstructionSample& s);

/// Deterministic serialization: sorted keys, fixed indentation, trailing
/// newline. Validates first; throws IntegrityError on violations.
void write_manifest(const DatasetManifest& manifest, std::ostream& sink);
std::string manifest_to_string(const DatasetManifest& manifest);

/// Throws IntegrityError naming the offending entry.
DatasetManifest read_manifest(std::istream& source);
DatasetManifest manifest_from_string(std::string_view text);

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

void write_reports(std::span<const ValidationReport> reports, std::ostream& sink);

// ---------------------------------------------------------------------------
// Textual video descriptions (global caption + per-frame captions).

struct TopaObject {
  std::string name;
  std::string description;
};

struct TopaFrameInfo {
  /// 1-based, strictly increasing within a sample.
  int frame_index = 1;
  std::string caption;
  std::vector<TopaObject> objects;
};

/// Renders the unified multiple-choice training prompt. Requires at least one
/// frame and 2..26 options; throws ArgumentError otherwise.
std::string format_topa_sample(std::string_view global_caption,
                               std::span<const TopaFrameInfo> frames,
                               std::string_view question,
                               std::span<const std::string> options);

}  // namespace sforge
