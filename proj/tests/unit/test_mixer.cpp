// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "sforge/error.hpp"
#include "sforge/mixer.hpp"

using namespace sforge;

namespace {

MixSource by_count(std::string name, std::size_t n) {
  return {std::move(name), {}, n, std::nullopt};
}
MixSource by_ratio(std::string name, double r) {
  return {std::move(name), {}, std::nullopt, r};
}

DatasetManifest text_manifest(std::size_t n, const std::string& src) {
  std::vector<SampleRecord> e;
  for (std::size_t i = 0; i < n; ++i) {
    e.emplace_back(TextInstructionSample{fmt::format("{}-{}", src, i), "ctx", "q?", "a.", src});
  }
  return DatasetManifest::from_entries(ManifestKind::kText, e);
}

DatasetManifest video_manifest(std::size_t n, const std::string& src) {
  std::vector<SampleRecord> e;
  for (std::size_t i = 0; i < n; ++i) {
    e.emplace_back(VideoInstructionSample{fmt::format("{}-{}", src, i),
                                          fmt::format("v/{}.mp4", i), 12.0, {}, "q?", "a.", src});
  }
  return DatasetManifest::from_entries(ManifestKind::kVideo, e);
}

DatasetManifest synthetic_manifest(std::size_t n, const std::string& src) {
  std::vector<SampleRecord> e;
  for (std::size_t i = 0; i < n; ++i) {
    SyntheticVideoSample s;
    s.id = fmt::format("{}-{}", src, i);
    s.images = {fmt::format("images/{}_0000_00.png", s.id), fmt::format("images/{}_0001_00.png", s.id)};
    s.question = "q?";
    s.answer = "a.";
    s.source = src;
    s.provenance = {s.id, "p", "s"};
    e.emplace_back(s);
  }
  return DatasetManifest::from_entries(ManifestKind::kSynthetic, e);
}

std::string emitted(const TrainingManifest& m) {
  std::ostringstream os;
  emit_training_format(m, os);
  return os.str();
}

}  // namespace

TEST_CASE("ratio quotas") {
  const std::vector<std::size_t> plenty(3, 100000);
  MixPlan p;
  p.sources = {by_ratio("sg", 1), by_ratio("vc", 1)};
  p.total = 30000;
  CHECK(resolve_quotas(p, std::span(plenty).first(2)) == std::vector<std::size_t>{15000, 15000});
  p.sources = {by_ratio("video", 2), by_ratio("syn", 1)};
  CHECK(resolve_quotas(p, std::span(plenty).first(2)) == std::vector<std::size_t>{20000, 10000});
  p.sources = {by_ratio("a", 1), by_ratio("b", 1), by_ratio("c", 1)};
  p.total = 10;
  CHECK(resolve_quotas(p, plenty) == std::vector<std::size_t>{4, 3, 3});
  // Counts come off the top; ratios share what is left.
  p.sources = {by_count("a", 5), by_ratio("b", 3), by_ratio("c", 1)};
  p.total = 13;
  CHECK(resolve_quotas(p, plenty) == std::vector<std::size_t>{5, 6, 2});
}

TEST_CASE("ratio quotas sum to the total and stay within one of the ideal") {
  Rng rng(9);
  for (int t = 0; t < 500; ++t) {
    MixPlan p;
    const std::size_t k = 1 + rng.uniform_below(5);
    double wsum = 0;
    std::vector<double> w;
    for (std::size_t i = 0; i < k; ++i) {
      w.push_back(0.1 + static_cast<double>(rng.uniform_below(1000)) / 100.0);
      wsum += w.back();
      p.sources.push_back(by_ratio(fmt::format("s{}", i), w.back()));
    }
    p.total = rng.uniform_below(5000);
    const std::vector<std::size_t> avail(k, 10000);
    const auto q = resolve_quotas(p, avail);
    std::size_t sum = 0;
    for (std::size_t i = 0; i < k; ++i) {
      sum += q[i];
      const double ideal = static_cast<double>(*p.total) * w[i] / wsum;
      CHECK(std::abs(static_cast<double>(q[i]) - ideal) < 1.0 + 1e-9);
    }
    CHECK(sum == *p.total);
  }
}

TEST_CASE("plan validation and capacity") {
  MixPlan p;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.sources = {by_ratio("a", 1)};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.sources = {by_ratio("a", -1)};
  p.total = 3;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.sources = {by_count("a", 1), by_count("a", 1)};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.sources = {by_count("a/b", 1)};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.sources = {MixSource{"a", {}, 1, 0.5}};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.sources = {by_count("a", 5), by_ratio("b", 1)};
  p.total = 4;
  CHECK_THROWS_AS(p.validate(), ConfigError);

  MixPlan cap;
  cap.sources = {by_count("small", 10)};
  const std::vector<std::size_t> five = {5};
  try {
    resolve_quotas(cap, five);
    FAIL("expected CapacityError");
  } catch (const CapacityError& e) {
    CHECK(std::string(e.what()).find("small") != std::string::npos);
  }
}

TEST_CASE("scaled re-enactment of the three-way mix") {
  const std::vector<MixInput> inputs = {{"sharegemini", video_manifest(1000, "sg"), ""},
                                        {"videochatgpt", video_manifest(1000, "vc"), ""},
                                        {"synthetic", synthetic_manifest(1000, "syn"), "out"}};
  MixPlan p;
  p.seed = 2024;
  p.sources = {by_count("sharegemini", 100), by_count("videochatgpt", 100),
               by_count("synthetic", 100)};
  const auto m = build_mix(inputs, p);
  REQUIRE(m.entries.size() == 300);
  std::map<std::string, std::size_t> comp;
  for (const auto& e : m.entries) ++comp[e.source];
  CHECK(comp == std::map<std::string, std::size_t>{{"sharegemini", 100}, {"synthetic", 100},
                                                   {"videochatgpt", 100}});
  CHECK(m.composition.size() == 3);
  CHECK(m.composition[2] == std::pair<std::string, std::size_t>{"synthetic", 100});
  CHECK(m.plan_digest == p.digest());
  CHECK_FALSE(m.rng_algorithm.empty());

  // Same plan, same bytes; another seed, another sample.
  CHECK(emitted(build_mix(inputs, p)) == emitted(m));
  MixPlan other = p;
  other.seed = 2025;
  CHECK(emitted(build_mix(inputs, other)) != emitted(m));
  CHECK(other.digest() != p.digest());

  // Shuffling is a permutation of the unshuffled draw.
  MixPlan flat = p;
  flat.shuffle = false;
  const auto f = build_mix(inputs, flat);
  std::multiset<std::string> a, b;
  for (const auto& e : m.entries) a.insert(e.id);
  for (const auto& e : f.entries) b.insert(e.id);
  CHECK(a == b);
  CHECK(a.size() == std::set<std::string>(a.begin(), a.end()).size());
  CHECK(f.entries.front().source == "sharegemini");
  CHECK(f.entries.back().source == "synthetic");
  // Per-source draws are independent of the other sources' quotas.
  MixPlan fewer = flat;
  fewer.sources[0].count = 7;
  const auto g = build_mix(inputs, fewer);
  CHECK(std::equal(g.entries.begin() + 7, g.entries.end(), f.entries.begin() + 100));
}

TEST_CASE("training record forms") {
  const auto syn = to_training_entry(synthetic_manifest(1, "syn").entries[0], "s", "../data");
  CHECK(syn.id == "s/syn-0");
  CHECK(syn.kind == "synthetic");
  CHECK(syn.media == std::vector<std::string>{"../data/images/syn-0_0000_00.png",
                                              "../data/images/syn-0_0001_00.png"});
  const auto txt = to_training_entry(
      TextInstructionSample{"t", "The long context.", "What?", "That.", "lt"}, "pure", "");
  CHECK(txt.media.empty());
  CHECK(txt.kind == "text");
  CHECK(txt.question == "The long context.\n\nWhat?");
  const auto vid = to_training_entry(video_manifest(1, "v").entries[0], "v", "ignored");
  CHECK(vid.media == std::vector<std::string>{"v/0.mp4"});
}

TEST_CASE("emit and read back") {
  const std::vector<MixInput> inputs = {{"v", video_manifest(5, "v"), ""},
                                        {"t", text_manifest(5, "t"), ""}};
  MixPlan p;
  p.seed = 1;
  p.sources = {by_count("v", 3), by_count("t", 2)};
  const auto m = build_mix(inputs, p);
  std::istringstream is(emitted(m));
  CHECK(read_training_records(is) == m.entries);
  std::ostringstream meta;
  write_training_meta(m, meta);
  CHECK(meta.str().find(m.plan_digest) != std::string::npos);
  std::istringstream bad("{\"id\": 3}\n");
  CHECK_THROWS_AS(read_training_records(bad), IntegrityError);
}

TEST_CASE("dangling media references") {
  sforge::testing::TempDir dir;
  const std::vector<MixInput> inputs = {{"syn", synthetic_manifest(2, "syn"), ""}};
  MixPlan p;
  p.sources = {by_count("syn", 2)};
  const auto m = build_mix(inputs, p);
  std::ostringstream os;
  CHECK_THROWS_AS(emit_training_format(m, os, dir.path()), DanglingReferenceError);
  for (const auto& e : m.entries) {
    for (const auto& img : e.media) sforge::testing::spit(dir / img, "png");
  }
  std::ostringstream ok;
  CHECK_NOTHROW(emit_training_format(m, ok, dir.path()));
  CHECK(ok.str() == emitted(m));
}

TEST_CASE("input shape errors") {
  MixPlan p;
  p.sources = {by_count("a", 1)};
  const std::vector<MixInput> wrong = {{"b", text_manifest(3, "b"), ""}};
  CHECK_THROWS_AS(build_mix(wrong, p), ArgumentError);
  const std::vector<MixInput> none;
  CHECK_THROWS_AS(build_mix(none, p), ArgumentError);
  p.sources = {by_count("a", 10)};
  const std::vector<MixInput> small = {{"a", text_manifest(5, "a"), ""}};
  CHECK_THROWS_AS(build_mix(small, p), CapacityError);
}
