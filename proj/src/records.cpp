// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include "sforge/records.hpp"

#include <fmt/format.h>

#include <set>

#include "sforge/corpus.hpp"
#include "sforge/error.hpp"

namespace sforge {

std::string_view to_string(ManifestKind kind) {
  switch (kind) {
    case ManifestKind::kText: return "text";
    case ManifestKind::kVideo: return "video";
    case ManifestKind::kSynthetic: return "synthetic";
    case ManifestKind::kMixed: return "mixed";
  }
  return "unknown";
}

ManifestKind manifest_kind_from_string(std::string_view name) {
  if (name == "text") return ManifestKind::kText;
  if (name == "video") return ManifestKind::kVideo;
  if (name == "synthetic") return ManifestKind::kSynthetic;
  if (name == "mixed") return ManifestKind::kMixed;
  throw IntegrityError(fmt::format("unknown manifest kind '{}'", name));
}

const std::string& record_id(const SampleRecord& r) {
  return std::visit([](const auto& s) -> const std::string& { return s.id; }, r);
}

const std::string& record_source(const SampleRecord& r) {
  return std::visit([](const auto& s) -> const std::string& { return s.source; }, r);
}

const std::string& record_question(const SampleRecord& r) {
  return std::visit([](const auto& s) -> const std::string& { return s.question; }, r);
}

const std::string& record_answer(const SampleRecord& r) {
  return std::visit([](const auto& s) -> const std::string& { return s.answer; }, r);
}

DatasetManifest DatasetManifest::from_entries(ManifestKind kind,
                                              std::vector<SampleRecord> entries) {
  DatasetManifest m;
  m.kind = kind;
  m.entries = std::move(entries);
  for (const SampleRecord& r : m.entries) ++m.source_counts[record_source(r)];
  return m;
}

namespace {

bool kind_admits(ManifestKind kind, const SampleRecord& r) {
  switch (kind) {
    case ManifestKind::kText: return std::holds_alternative<TextInstructionSample>(r);
    case ManifestKind::kVideo: return std::holds_alternative<VideoInstructionSample>(r);
    case ManifestKind::kSynthetic: return std::holds_alternative<SyntheticVideoSample>(r);
    case ManifestKind::kMixed: return true;
  }
  return false;
}

std::optional<std::string> check_record(const SampleRecord& r) {
  if (const auto* t = std::get_if<TextInstructionSample>(&r)) return check_sample(*t);
  if (const auto* v = std::get_if<VideoInstructionSample>(&r)) return check_sample(*v);
  const auto& s = std::get<SyntheticVideoSample>(r);
  if (s.id.empty()) return "empty id";
  if (s.images.empty()) return "synthetic sample has no images";
  if (s.question.empty() || s.answer.empty()) return "empty question or answer";
  return std::nullopt;
}

}  // namespace

void DatasetManifest::validate() const {
  std::set<std::string_view> ids;
  std::map<std::string, std::size_t> counted;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const SampleRecord& r = entries[i];
    const std::string& id = record_id(r);
    if (!kind_admits(kind, r)) {
      throw IntegrityError(fmt::format("entry {} (id '{}'): record type not allowed in a {} manifest",
                                       i, id, to_string(kind)));
    }
    if (auto why = check_record(r)) {
      throw IntegrityError(fmt::format("entry {} (id '{}'): {}", i, id, *why));
    }
    if (!ids.insert(id).second) {
      throw IntegrityError(fmt::format("entry {} (id '{}'): duplicate id", i, id));
    }
    ++counted[record_source(r)];
  }
  if (counted != source_counts) {
    std::size_t declared = 0;
    for (const auto& [_, n] : source_counts) declared += n;
    throw IntegrityError(fmt::format(
        "source_counts do not match entries (declared total {}, actual {})", declared,
        entries.size()));
  }
}

}  // namespace sforge
