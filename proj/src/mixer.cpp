// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include "sforge/mixer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <ostream>
#include <set>

#include "sforge/digest.hpp"
#include "sforge/error.hpp"
#include "sforge/rng.hpp"

namespace sforge {

using nlohmann::json;

void MixPlan::validate() const {
  if (sources.empty()) throw ConfigError("mix plan: no sources");
  std::set<std::string> names;
  bool any_ratio = false;
  std::size_t absolute = 0;
  for (const MixSource& s : sources) {
    if (s.name.empty()) throw ConfigError("mix plan: source without a name");
    if (s.name.find('/') != std::string::npos) {
      throw ConfigError(fmt::format("mix plan: source name '{}' must not contain '/'", s.name));
    }
    if (!names.insert(s.name).second) {
      throw ConfigError(fmt::format("mix plan: duplicate source name '{}'", s.name));
    }
    if (s.count.has_value() == s.ratio.has_value()) {
      throw ConfigError(
          fmt::format("mix plan: source '{}' needs exactly one of count or ratio", s.name));
    }
    if (s.ratio) {
      if (!(*s.ratio > 0) || !std::isfinite(*s.ratio)) {
        throw ConfigError(fmt::format("mix plan: source '{}' ratio must be positive", s.name));
      }
      any_ratio = true;
    } else {
      absolute += *s.count;
    }
  }
  if (any_ratio && !total) throw ConfigError("mix plan: ratio quotas require a total");
  if (total && *total < absolute) {
    throw ConfigError(fmt::format("mix plan: total {} is below the sum of absolute counts {}",
                                  *total, absolute));
  }
  if (total && !any_ratio && *total != absolute) {
    throw ConfigError(fmt::format("mix plan: total {} does not equal the sum of counts {}",
                                  *total, absolute));
  }
}

std::string MixPlan::digest() const {
  json j;
  j["seed"] = seed;
  j["shuffle"] = shuffle;
  j["total"] = total ? json(*total) : json(nullptr);
  j["rng"] = Rng::kAlgorithm;
  j["sources"] = json::array();
  for (const MixSource& s : sources) {
    json src = {{"name", s.name}};
    if (s.count) src["count"] = *s.count;
    if (s.ratio) src["ratio"] = *s.ratio;
    j["sources"].push_back(std::move(src));
  }
  return sha256_hex(j.dump());
}

std::vector<std::size_t> resolve_quotas(const MixPlan& plan,
                                        std::span<const std::size_t> available) {
  plan.validate();
  if (available.size() != plan.sources.size()) {
    throw ArgumentError("resolve_quotas: one availability per source required");
  }
  std::vector<std::size_t> counts(plan.sources.size(), 0);
  std::size_t absolute = 0;
  double weight_sum = 0;
  for (std::size_t i = 0; i < plan.sources.size(); ++i) {
    if (plan.sources[i].count) {
      counts[i] = *plan.sources[i].count;
      absolute += counts[i];
    } else {
      weight_sum += *plan.sources[i].ratio;
    }
  }
  if (weight_sum > 0) {
    const std::size_t remaining = *plan.total - absolute;
    std::vector<std::pair<double, std::size_t>> remainders;  // (fraction, source)
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < plan.sources.size(); ++i) {
      if (!plan.sources[i].ratio) continue;
      const double exact = static_cast<double>(remaining) * *plan.sources[i].ratio / weight_sum;
      counts[i] = static_cast<std::size_t>(std::floor(exact));
      assigned += counts[i];
      remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < remaining; ++k, ++assigned) {
      ++counts[remainders[k % remainders.size()].second];
    }
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > available[i]) {
      throw CapacityError(fmt::format("source '{}' has {} entries but the plan needs {}",
                                      plan.sources[i].name, available[i], counts[i]));
    }
  }
  return counts;
}

TrainingEntry to_training_entry(const SampleRecord& record, const std::string& source_name,
                                const std::string& media_prefix) {
  TrainingEntry e;
  e.id = source_name + "/" + record_id(record);
  e.source = source_name;
  e.answer = record_answer(record);
  if (const auto* t = std::get_if<TextInstructionSample>(&record)) {
    e.kind = "text";
    e.question = t->context + "\n\n" + t->question;
  } else if (const auto* v = std::get_if<VideoInstructionSample>(&record)) {
    e.kind = "video";
    e.media = {v->video_ref};
    e.question = v->question;
  } else {
    const auto& s = std::get<SyntheticVideoSample>(record);
    e.kind = "synthetic";
    e.question = s.question;
    for (const std::string& img : s.images) {
      e.media.push_back(media_prefix.empty()
                            ? img
                            : (std::filesystem::path(media_prefix) / img).generic_string());
    }
  }
  return e;
}

TrainingManifest build_mix(std::span<const MixInput> inputs, const MixPlan& plan) {
  plan.validate();
  if (inputs.size() != plan.sources.size()) {
    throw ArgumentError("build_mix: one input manifest per plan source required");
  }
  std::vector<std::size_t> available;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].name != plan.sources[i].name) {
      throw ArgumentError(fmt::format("build_mix: input {} is '{}' but the plan expects '{}'", i,
                                      inputs[i].name, plan.sources[i].name));
    }
    inputs[i].manifest.validate();
    available.push_back(inputs[i].manifest.entries.size());
  }
  const std::vector<std::size_t> quotas = resolve_quotas(plan, available);

  TrainingManifest out;
  out.plan_digest = plan.digest();
  out.rng_algorithm = Rng::kAlgorithm;
  std::set<std::string> ids;
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    Rng rng(plan.seed ^ static_cast<std::uint64_t>(s));
    const auto picks = sample_without_replacement(available[s], quotas[s], rng);
    for (std::size_t idx : picks) {
      TrainingEntry e = to_training_entry(inputs[s].manifest.entries[idx], inputs[s].name,
                                          inputs[s].media_prefix);
      if (!ids.insert(e.id).second) {
        throw IntegrityError(fmt::format("duplicate training id '{}'", e.id));
      }
      out.entries.push_back(std::move(e));
    }
    out.composition.emplace_back(inputs[s].name, quotas[s]);
  }
  if (plan.shuffle) {
    Rng rng(mix_seed(plan.seed));
    shuffle(out.entries, rng);
  }
  return out;
}

void emit_training_format(const TrainingManifest& manifest, std::ostream& sink,
                          const std::optional<std::filesystem::path>& media_root) {
  for (const TrainingEntry& e : manifest.entries) {
    if (media_root && e.kind == "synthetic") {
      for (const std::string& m : e.media) {
        if (!std::filesystem::exists(*media_root / m)) {
          throw DanglingReferenceError(
              fmt::format("entry '{}': image '{}' not found under '{}'", e.id, m,
                          media_root->string()));
        }
      }
    }
    const json j = {{"id", e.id},         {"kind", e.kind},     {"media", e.media},
                    {"question", e.question}, {"answer", e.answer}, {"source", e.source}};
    sink << j.dump() << '\n';
  }
  if (!sink) throw Error("emit_training_format: stream write failed");
}

void write_training_meta(const TrainingManifest& manifest, std::ostream& sink) {
  json comp = json::array();
  for (const auto& [name, n] : manifest.composition) comp.push_back({{"source", name}, {"count", n}});
  const json j = {{"format", "sparrow-forge/training-meta"},
                  {"version", 1},
                  {"entries", manifest.entries.size()},
                  {"composition", comp},
                  {"plan_digest", manifest.plan_digest},
                  {"rng", manifest.rng_algorithm}};
  sink << j.dump(1) << '\n';
}

std::vector<TrainingEntry> read_training_records(std::istream& source) {
  std::vector<TrainingEntry> out;
  std::string line;
  for (std::size_t n = 0; std::getline(source, line); ++n) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("kind").get<std::string>(),
                     j.at("media").get<std::vector<std::string>>(),
                     j.at("question").get<std::string>(), j.at("answer").get<std::string>(),
                     j.at("source").get<std::string>()});
    } catch (const json::exception& e) {
      throw IntegrityError(fmt::format("training record {}: {}", n, e.what()));
    }
  }
  return out;
}

}  // namespace sforge
