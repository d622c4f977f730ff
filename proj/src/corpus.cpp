// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include "sforge/corpus.hpp"

#include <fmt/format.h>

#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <variant>

#include "sforge/chunker.hpp"
#include "sforge/error.hpp"

namespace sforge {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 3> kTextAdapters = {"unified", "longalpaca",
                                                           "longqlora"};
constexpr std::array<std::string_view, 3> kVideoAdapters = {"unified", "videochatgpt",
                                                            "sharegemini"};
constexpr std::string_view kManifestFormat = "sparrow-forge/dataset-manifest";
constexpr int kManifestVersion = 1;

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

bool blank(std::string_view s) {
  for (char c : s) {
    if (!is_space(c)) return false;
  }
  return true;
}

// Splits a raw stream into top-level records. Each element is either a parsed
// JSON value or a parse error message.
std::vector<json> read_records(std::string_view bytes) {
  std::size_t first = 0;
  while (first < bytes.size() && is_space(bytes[first])) ++first;
  std::vector<json> out;
  if (first < bytes.size() && bytes[first] == '[') {
    std::size_t finished = 0;
    json::parser_callback_t cb = [&](int depth, json::parse_event_t event, json&) {
      if (depth == 1 && (event == json::parse_event_t::value ||
                         event == json::parse_event_t::object_end ||
                         event == json::parse_event_t::array_end)) {
        ++finished;
      }
      return true;
    };
    json doc;
    try {
      doc = json::parse(bytes.begin(), bytes.end(), cb);
    } catch (const json::parse_error& e) {
      throw ParseError(finished, fmt::format("record {}: {}", finished, e.what()));
    }
    for (json& r : doc) out.push_back(std::move(r));
    return out;
  }
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    const std::string_view line = bytes.substr(pos, end - pos);
    pos = end + 1;
    if (blank(line)) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ParseError(out.size(), fmt::format("record {}: {}", out.size(), e.what()));
    }
  }
  return out;
}

// Field access that turns type problems into validation reasons.
struct FieldReader {
  const json& obj;
  std::string problem;

  std::optional<std::string> str(std::string_view key) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) {
      if (problem.empty()) problem = fmt::format("field '{}' is not a string", key);
      return std::nullopt;
    }
    return it->get<std::string>();
  }

  std::optional<double> number(std::string_view key) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) {
      if (problem.empty()) problem = fmt::format("field '{}' is not a number", key);
      return std::nullopt;
    }
    return it->get<double>();
  }

  std::optional<std::int64_t> integer(std::string_view key) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) {
      if (problem.empty()) problem = fmt::format("field '{}' is not an integer", key);
      return std::nullopt;
    }
    return it->get<std::int64_t>();
  }
};

template <typename Sample>
using Mapped = std::variant<Sample, ValidationReport>;

template <typename Sample>
using Adapter = std::function<Mapped<Sample>(const json&, std::size_t, const std::string&,
                                             const AdapterOptions&)>;

std::string default_id(const std::string& source, std::size_t index) {
  return fmt::format("{}-{:06d}", source, index);
}

template <typename Sample>
Mapped<Sample> finish(Sample s, std::size_t index, const std::string& problem) {
  if (!problem.empty()) return ValidationReport{index, s.id, problem};
  if (auto why = check_sample(s)) return ValidationReport{index, s.id, *why};
  return s;
}

Mapped<TextInstructionSample> unified_text(const json& obj, std::size_t index,
                                           const std::string& source, const AdapterOptions&) {
  FieldReader f{obj, {}};
  TextInstructionSample s;
  s.id = f.str("id").value_or(default_id(source, index));
  s.context = f.str("context").value_or("");
  s.question = f.str("question").value_or("");
  s.answer = f.str("answer").value_or("");
  s.source = f.str("source").value_or(source);
  return finish(std::move(s), index, f.problem);
}

// LongAlpaca: {"instruction": context+question, "output": answer, "input"?}.
// LongQLoRA: {"input": context+question, "output": answer}.
Mapped<TextInstructionSample> combined_text(const json& obj, std::size_t index,
                                            const std::string& source,
                                            const AdapterOptions& options,
                                            std::string_view combined_key,
                                            std::string_view context_key) {
  FieldReader f{obj, {}};
  TextInstructionSample s;
  s.id = f.str("id").value_or(default_id(source, index));
  s.source = source;
  s.answer = f.str("output").value_or("");
  const std::string combined = f.str(combined_key).value_or("");
  const std::string separate = context_key.empty() ? "" : f.str(context_key).value_or("");
  if (!blank(separate)) {
    s.context = trim(separate);
    s.question = trim(combined);
  } else if (!blank(combined)) {
    auto [ctx, q] = split_context_question(combined, options.context_end_markers);
    s.context = std::move(ctx);
    s.question = std::move(q);
  }
  return finish(std::move(s), index, f.problem);
}

Mapped<VideoInstructionSample> unified_video(const json& obj, std::size_t index,
                                             const std::string& source, const AdapterOptions&) {
  FieldReader f{obj, {}};
  VideoInstructionSample s;
  s.id = f.str("id").value_or(default_id(source, index));
  s.video_ref = f.str("video").value_or("");
  s.duration_s = f.number("duration");
  s.frame_count = f.integer("frame_count");
  s.question = f.str("question").value_or("");
  s.answer = f.str("answer").value_or("");
  s.source = f.str("source").value_or(source);
  return finish(std::move(s), index, f.problem);
}

// VideoInstruct-100K: {"video_id", "q", "a"}.
Mapped<VideoInstructionSample> videochatgpt(const json& obj, std::size_t index,
                                            const std::string& source, const AdapterOptions&) {
  FieldReader f{obj, {}};
  VideoInstructionSample s;
  s.id = f.str("id").value_or(default_id(source, index));
  s.video_ref = f.str("video_id").value_or(f.str("video").value_or(""));
  s.duration_s = f.number("duration");
  s.question = f.str("q").value_or("");
  s.answer = f.str("a").value_or("");
  s.source = source;
  return finish(std::move(s), index, f.problem);
}

// ShareGemini: {"id", "video", "conversations": [{"from": "human", ...},
// {"from": "gpt", ...}], "duration"?}. The human turn is the instruction,
// kept verbatim apart from the <video> placeholder token.
Mapped<VideoInstructionSample> sharegemini(const json& obj, std::size_t index,
                                           const std::string& source, const AdapterOptions&) {
  FieldReader f{obj, {}};
  VideoInstructionSample s;
  s.id = f.str("id").value_or(default_id(source, index));
  s.video_ref = f.str("video").value_or("");
  s.duration_s = f.number("duration");
  s.frame_count = f.integer("frame_count");
  s.source = source;
  const auto conv = obj.find("conversations");
  if (conv != obj.end() && conv->is_array()) {
    bool have_question = false;
    for (const json& turn : *conv) {
      if (!turn.is_object()) continue;
      const std::string from = turn.value("from", "");
      if (!turn.contains("value") || !turn["value"].is_string()) continue;
      std::string value = turn["value"].get<std::string>();
      if (!have_question && from == "human") {
        for (std::size_t at; (at = value.find("<video>")) != std::string::npos;) {
          value.erase(at, 7);
        }
        s.question = trim(value);
        have_question = true;
      } else if (have_question && from == "gpt") {
        s.answer = trim(value);
        break;
      }
    }
  } else if (f.problem.empty()) {
    f.problem = "missing 'conversations' array";
  }
  return finish(std::move(s), index, f.problem);
}

template <typename Sample>
ParseResult<Sample> run_adapter(std::string_view bytes, const std::string& source,
                                const AdapterOptions& options, const Adapter<Sample>& adapter) {
  const std::vector<json> records = read_records(bytes);
  ParseResult<Sample> result;
  result.record_count = records.size();
  std::set<std::string> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].is_object()) {
      throw ParseError(i, fmt::format("record {}: expected a JSON object", i));
    }
    Mapped<Sample> m = adapter(records[i], i, source, options);
    if (auto* report = std::get_if<ValidationReport>(&m)) {
      result.reports.push_back(std::move(*report));
      continue;
    }
    Sample& s = std::get<Sample>(m);
    if (!seen.insert(s.id).second) {
      result.reports.push_back({i, s.id, "duplicate id"});
      continue;
    }
    result.samples.push_back(std::move(s));
  }
  return result;
}

// Byte offset of the n-th whitespace token (0-based) in `text`.
std::size_t token_offset(std::string_view text, std::size_t n) {
  std::size_t seen = 0;
  bool in_word = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const bool space = is_space(text[i]);
    if (!space && !in_word) {
      if (seen == n) return i;
      ++seen;
    }
    in_word = !space;
  }
  return text.size();
}

bool ends_question(std::string_view sentence) {
  while (!sentence.empty() && (sentence.back() == '"' || sentence.back() == '\'' ||
                               sentence.back() == ')')) {
    sentence.remove_suffix(1);
  }
  return !sentence.empty() && sentence.back() == '?';
}

json sample_to_json(const SampleRecord& r) {
  json j;
  std::visit(
      [&j](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        j["id"] = s.id;
        j["question"] = s.question;
        j["answer"] = s.answer;
        j["source"] = s.source;
        if constexpr (std::is_same_v<T, TextInstructionSample>) {
          j["type"] = "text";
          j["context"] = s.context;
        } else if constexpr (std::is_same_v<T, VideoInstructionSample>) {
          j["type"] = "video";
          j["video_ref"] = s.video_ref;
          if (s.duration_s) j["duration_s"] = *s.duration_s;
          if (s.frame_count) j["frame_count"] = *s.frame_count;
        } else {
          j["type"] = "synthetic";
          j["images"] = s.images;
          j["provenance"] = {{"source_id", s.provenance.source_id},
                             {"policy_digest", s.provenance.policy_digest},
                             {"spec_digest", s.provenance.spec_digest}};
        }
      },
      r);
  return j;
}

struct EntryReader {
  const json& obj;
  std::size_t index;

  [[noreturn]] void fail(std::string_view what) const {
    const auto id = obj.find("id");
    const std::string id_text =
        id != obj.end() && id->is_string() ? id->get<std::string>() : std::string("?");
    throw IntegrityError(fmt::format("manifest entry {} (id '{}'): {}", index, id_text, what));
  }

  std::string str(const json& from, std::string_view key) const {
    const auto it = from.find(key);
    if (it == from.end() || !it->is_string()) {
      fail(fmt::format("missing string field '{}'", key));
    }
    return it->get<std::string>();
  }

  std::string str(std::string_view key) const { return str(obj, key); }
};

SampleRecord sample_from_json(const json& obj, std::size_t index) {
  EntryReader rd{obj, index};
  if (!obj.is_object()) rd.fail("entry is not an object");
  const std::string type = rd.str("type");
  if (type == "text") {
    return TextInstructionSample{rd.str("id"), rd.str("context"), rd.str("question"),
                                 rd.str("answer"), rd.str("source")};
  }
  if (type == "video") {
    VideoInstructionSample v;
    v.id = rd.str("id");
    v.video_ref = rd.str("video_ref");
    v.question = rd.str("question");
    v.answer = rd.str("answer");
    v.source = rd.str("source");
    if (const auto it = obj.find("duration_s"); it != obj.end()) {
      if (!it->is_number()) rd.fail("duration_s is not a number");
      v.duration_s = it->get<double>();
    }
    if (const auto it = obj.find("frame_count"); it != obj.end()) {
      if (!it->is_number_integer()) rd.fail("frame_count is not an integer");
      v.frame_count = it->get<std::int64_t>();
    }
    return v;
  }
  if (type == "synthetic") {
    SyntheticVideoSample s;
    s.id = rd.str("id");
    s.question = rd.str("question");
    s.answer = rd.str("answer");
    s.source = rd.str("source");
    const auto images = obj.find("images");
    if (images == obj.end() || !images->is_array()) rd.fail("missing array field 'images'");
    for (const json& p : *images) {
      if (!p.is_string()) rd.fail("image reference is not a string");
      s.images.push_back(p.get<std::string>());
    }
    const auto prov = obj.find("provenance");
    if (prov == obj.end() || !prov->is_object()) rd.fail("missing object field 'provenance'");
    s.provenance.source_id = rd.str(*prov, "source_id");
    s.provenance.policy_digest = rd.str(*prov, "policy_digest");
    s.provenance.spec_digest = rd.str(*prov, "spec_digest");
    return s;
  }
  rd.fail(fmt::format("unknown entry type '{}'", type));
}

}  // namespace

std::span<const std::string_view> text_adapters() { return kTextAdapters; }
std::span<const std::string_view> video_adapters() { return kVideoAdapters; }

std::optional<std::string> check_sample(const TextInstructionSample& s) {
  if (blank(s.id)) return "empty id";
  if (blank(s.context)) return "empty context";
  if (blank(s.question)) return "empty question";
  if (blank(s.answer)) return "empty answer";
  return std::nullopt;
}

std::optional<std::string> check_sample(const VideoInstructionSample& s) {
  if (blank(s.id)) return "empty id";
  if (blank(s.video_ref)) return "missing video locator";
  if (s.duration_s && !(std::isfinite(*s.duration_s) && *s.duration_s >= 0.0)) {
    return "duration must be a finite non-negative number";
  }
  if (s.frame_count && *s.frame_count < 1) return "frame_count must be positive";
  if (s.duration_s && s.frame_count) {
    const auto expected = static_cast<std::int64_t>(std::floor(*s.duration_s));
    if (std::llabs(*s.frame_count - expected) > 1) {
      return fmt::format("frame_count {} inconsistent with duration {} at 1 fps",
                         *s.frame_count, *s.duration_s);
    }
  }
  if (blank(s.question)) return "empty question";
  if (blank(s.answer)) return "empty answer";
  return std::nullopt;
}

std::pair<std::string, std::string> split_context_question(
    std::string_view combined, std::span<const std::string> markers) {
  std::size_t best = std::string_view::npos;
  std::size_t best_len = 0;
  for (const std::string& m : markers) {
    if (m.empty()) continue;
    const std::size_t at = combined.rfind(m);
    if (at != std::string_view::npos && (best == std::string_view::npos || at > best)) {
      best = at;
      best_len = m.size();
    }
  }
  if (best != std::string_view::npos) {
    std::string q = trim(combined.substr(best + best_len));
    if (!q.empty()) return {trim(combined.substr(0, best)), std::move(q)};
  }

  if (blank(combined)) return {"", ""};
  const std::vector<std::string> sentences = split_sentences(combined);
  std::size_t q_first = sentences.size() - 1;
  for (std::size_t i = sentences.size(); i-- > 0;) {
    if (ends_question(sentences[i])) {
      q_first = i;
      break;
    }
  }
  std::size_t words_before = 0;
  for (std::size_t i = 0; i < q_first; ++i) words_before += count_words(sentences[i]);
  const std::size_t cut = token_offset(combined, words_before);
  return {trim(combined.substr(0, cut)), trim(combined.substr(cut))};
}

ParseResult<TextInstructionSample> parse_text_dataset(std::string_view bytes,
                                                      std::string_view format,
                                                      const AdapterOptions& options) {
  Adapter<TextInstructionSample> adapter;
  if (format == "unified") {
    adapter = unified_text;
  } else if (format == "longalpaca") {
    adapter = [](const json& o, std::size_t i, const std::string& s, const AdapterOptions& op) {
      return combined_text(o, i, s, op, "instruction", "input");
    };
  } else if (format == "longqlora") {
    adapter = [](const json& o, std::size_t i, const std::string& s, const AdapterOptions& op) {
      return combined_text(o, i, s, op, "input", "");
    };
  } else {
    throw ConfigError(fmt::format("unknown text adapter '{}' (expected one of: {})", format,
                                  fmt::join(kTextAdapters, ", ")));
  }
  return run_adapter(bytes, options.source.value_or(std::string(format)), options, adapter);
}

ParseResult<VideoInstructionSample> parse_video_dataset(std::string_view bytes,
                                                        std::string_view format,
                                                        const AdapterOptions& options) {
  Adapter<VideoInstructionSample> adapter;
  if (format == "unified") {
    adapter = unified_video;
  } else if (format == "videochatgpt") {
    adapter = videochatgpt;
  } else if (format == "sharegemini") {
    adapter = sharegemini;
  } else {
    throw ConfigError(fmt::format("unknown video adapter '{}' (expected one of: {})", format,
                                  fmt::join(kVideoAdapters, ", ")));
  }
  return run_adapter(bytes, options.source.value_or(std::string(format)), options, adapter);
}

void write_manifest(const DatasetManifest& manifest, std::ostream& sink) {
  sink << manifest_to_string(manifest);
  if (!sink) throw Error("write_manifest: stream write failed");
}

std::string manifest_to_string(const DatasetManifest& manifest) {
  manifest.validate();
  json doc;
  doc["format"] = kManifestFormat;
  doc["version"] = kManifestVersion;
  doc["kind"] = to_string(manifest.kind);
  doc["source_counts"] = json::object();
  for (const auto& [source, n] : manifest.source_counts) doc["source_counts"][source] = n;
  doc["entries"] = json::array();
  for (const SampleRecord& r : manifest.entries) doc["entries"].push_back(sample_to_json(r));
  try {
    return doc.dump(1) + "\n";
  } catch (const json::type_error& e) {
    throw IntegrityError(fmt::format("manifest contains invalid UTF-8: {}", e.what()));
  }
}

DatasetManifest manifest_from_string(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IntegrityError(fmt::format("manifest is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object() || doc.value("format", "") != kManifestFormat) {
    throw IntegrityError("not a sparrow-forge dataset manifest");
  }
  if (doc.value("version", 0) != kManifestVersion) {
    throw IntegrityError(fmt::format("unsupported manifest version {}", doc.value("version", 0)));
  }
  DatasetManifest m;
  if (!doc.contains("kind") || !doc["kind"].is_string()) {
    throw IntegrityError("manifest: missing kind");
  }
  m.kind = manifest_kind_from_string(doc["kind"].get<std::string>());
  const auto counts = doc.find("source_counts");
  if (counts == doc.end() || !counts->is_object()) {
    throw IntegrityError("manifest: missing source_counts");
  }
  for (const auto& [source, n] : counts->items()) {
    if (!n.is_number_unsigned()) {
      throw IntegrityError(fmt::format("manifest: source_counts['{}'] is not a count", source));
    }
    m.source_counts[source] = n.get<std::size_t>();
  }
  const auto entries = doc.find("entries");
  if (entries == doc.end() || !entries->is_array()) {
    throw IntegrityError("manifest: missing entries array");
  }
  m.entries.reserve(entries->size());
  for (std::size_t i = 0; i < entries->size(); ++i) {
    m.entries.push_back(sample_from_json((*entries)[i], i));
  }
  m.validate();
  return m;
}

DatasetManifest read_manifest(std::istream& source) {
  std::ostringstream buf;
  buf << source.rdbuf();
  return manifest_from_string(buf.str());
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  const std::string text = manifest_to_string(manifest);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
  out << text;
  if (!out) throw Error(fmt::format("failed writing '{}'", path.string()));
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError(fmt::format("cannot open manifest '{}'", path.string()));
  try {
    return read_manifest(in);
  } catch (const IntegrityError& e) {
    throw IntegrityError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_reports(std::span<const ValidationReport> reports, std::ostream& sink) {
  for (const ValidationReport& r : reports) {
    json j = {{"record_index", r.record_index}, {"id", r.id}, {"reason", r.reason}};
    sink << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
}

std::string format_topa_sample(std::string_view global_caption,
                               std::span<const TopaFrameInfo> frames,
                               std::string_view question,
                               std::span<const std::string> options) {
  if (frames.empty()) throw ArgumentError("format_topa_sample: at least one frame required");
  if (options.size() < 2 || options.size() > 26) {
    throw ArgumentError("format_topa_sample: between 2 and 26 options required");
  }
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].frame_index <= frames[i - 1].frame_index) {
      throw ArgumentError("format_topa_sample: frame indices must be strictly increasing");
    }
  }
  if (frames.front().frame_index < 1) {
    throw ArgumentError("format_topa_sample: frame indices are 1-based");
  }

  std::string out =
      "You will be provided with some information about a video, including a global caption "
      "for the whole video, global captions for each video frame, and descriptions of key "
      "objects in each frame.\n"
      "Answer the questions using the information below.\n\n"
      "Video information:\n";
  out += fmt::format("Caption: {}\n\n", global_caption);
  out += "Frame information:\n";
  for (const TopaFrameInfo& f : frames) {
    out += fmt::format("Frame {}:\nCaption: {}\n", f.frame_index, f.caption);
    for (const TopaObject& o : f.objects) out += fmt::format("{}: {}\n", o.name, o.description);
    out += "\n";
  }
  out += fmt::format("Question: {}\n", question);
  for (std::size_t i = 0; i < options.size(); ++i) {
    out += fmt::format("{}. {}\n", static_cast<char>('A' + i), options[i]);
  }
  out += "Answer with the option's letter from the given choices directly.";
  return out;
}

}  // namespace sforge
