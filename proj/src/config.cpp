// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include "sforge/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "sforge/digest.hpp"
#include "sforge/error.hpp"
#include "sforge/rng.hpp"

namespace sforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

void require_map(const YAML::Node& node, const std::string& path) {
  if (!node.IsMap()) throw ConfigError(fmt::format("config: '{}' must be a mapping", path));
}

void check_keys(const YAML::Node& node, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  require_map(node, path.empty() ? "<root>" : path);
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(fmt::format("config: unknown key '{}'", join_path(path, key)));
    }
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) throw ConfigError(fmt::format("config: '{}' must be a scalar", path));
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("config: '{}' has an invalid value '{}'", path, node.Scalar()));
  }
}

std::uint64_t non_negative(const YAML::Node& node, const std::string& path) {
  const std::string raw = node.IsScalar() ? node.Scalar() : std::string();
  if (!raw.empty() && raw[0] == '-') {
    throw ConfigError(fmt::format("config: '{}' must be non-negative", path));
  }
  return scalar<std::uint64_t>(node, path);
}

template <typename Fn>
void each(const YAML::Node& map, const std::string& path, Fn&& fn) {
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    fn(key, kv.second, join_path(path, key));
  }
}

fs::path resolve(const fs::path& base, const std::string& raw) {
  const fs::path p(raw);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

void parse_chunk(const YAML::Node& n, ChunkPolicy& c) {
  check_keys(n, "chunk", {"target_words", "hard_cap_words", "mode"});
  each(n, "chunk", [&](const std::string& k, const YAML::Node& v, const std::string& p) {
    if (k == "target_words") c.target_words = non_negative(v, p);
    if (k == "hard_cap_words") c.hard_cap_words = non_negative(v, p);
    if (k == "mode") {
      const auto m = scalar<std::string>(v, p);
      if (m == "sentence") {
        c.mode = ChunkMode::kSentence;
      } else if (m == "word_window") {
        c.mode = ChunkMode::kWordWindow;
      } else {
        throw ConfigError(fmt::format("config: '{}' must be sentence or word_window", p));
      }
    }
  });
}

void parse_render(const YAML::Node& n, RunConfig& cfg, const fs::path& base) {
  check_keys(n, "render", {"width", "height", "margin", "font_size_pt", "dpi", "line_spacing",
                           "foreground", "background", "font", "asset_dir"});
  RenderSpec& r = cfg.render;
  each(n, "render", [&](const std::string& k, const YAML::Node& v, const std::string& p) {
    if (k == "width") r.width_px = scalar<int>(v, p);
    if (k == "height") r.height_px = scalar<int>(v, p);
    if (k == "margin") r.margin_px = scalar<int>(v, p);
    if (k == "font_size_pt") r.font_size_pt = scalar<double>(v, p);
    if (k == "dpi") r.dpi = scalar<double>(v, p);
    if (k == "line_spacing") r.line_spacing_factor = scalar<double>(v, p);
    if (k == "foreground") r.foreground = parse_color(scalar<std::string>(v, p));
    if (k == "background") r.background = parse_color(scalar<std::string>(v, p));
    if (k == "font") r.font_asset = scalar<std::string>(v, p);
    if (k == "asset_dir") cfg.asset_dir = resolve(base, scalar<std::string>(v, p));
  });
}

void parse_mix(const YAML::Node& n, RunConfig& cfg, const fs::path& base) {
  check_keys(n, "mix", {"seed", "total", "shuffle", "sources"});
  each(n, "mix", [&](const std::string& k, const YAML::Node& v, const std::string& p) {
    if (k == "seed") cfg.seed = non_negative(v, p);
    if (k == "total") cfg.mix_total = non_negative(v, p);
    if (k == "shuffle") cfg.mix_shuffle = scalar<bool>(v, p);
    if (k == "sources") {
      if (!v.IsSequence()) throw ConfigError(fmt::format("config: '{}' must be a list", p));
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string sp = fmt::format("{}[{}]", p, i);
        check_keys(v[i], sp, {"name", "manifest", "count", "ratio", "media_prefix"});
        MixSourceConfig sc;
        each(v[i], sp, [&](const std::string& sk, const YAML::Node& sv, const std::string& spp) {
          if (sk == "name") sc.source.name = scalar<std::string>(sv, spp);
          if (sk == "manifest") sc.source.manifest = resolve(base, scalar<std::string>(sv, spp));
          if (sk == "count") sc.source.count = non_negative(sv, spp);
          if (sk == "ratio") sc.source.ratio = scalar<double>(sv, spp);
          if (sk == "media_prefix") sc.media_prefix = scalar<std::string>(sv, spp);
        });
        if (sc.source.manifest.empty()) {
          throw ConfigError(fmt::format("config: '{}' needs a manifest", sp));
        }
        cfg.mix_sources.push_back(std::move(sc));
      }
    }
  });
}

void parse_diversity(const YAML::Node& n, DiversitySettings& d) {
  check_keys(n, "diversity",
             {"n", "provider", "batch_size", "max_in_flight", "perplexity", "iterations",
              "early_exaggeration", "exaggeration_iterations", "learning_rate", "pca_dims", "k"});
  each(n, "diversity", [&](const std::string& k, const YAML::Node& v, const std::string& p) {
    if (k == "n") d.n = non_negative(v, p);
    if (k == "provider") d.provider = scalar<std::string>(v, p);
    if (k == "batch_size") d.remote.batch_size = non_negative(v, p);
    if (k == "max_in_flight") d.remote.max_in_flight = static_cast<unsigned>(non_negative(v, p));
    if (k == "perplexity") d.tsne.perplexity = scalar<double>(v, p);
    if (k == "iterations") d.tsne.iterations = scalar<int>(v, p);
    if (k == "early_exaggeration") d.tsne.early_exaggeration = scalar<double>(v, p);
    if (k == "exaggeration_iterations") d.tsne.exaggeration_iterations = scalar<int>(v, p);
    if (k == "learning_rate") d.tsne.learning_rate = scalar<double>(v, p);
    if (k == "pca_dims") d.tsne.pca_dims = non_negative(v, p);
    if (k == "k") d.k = non_negative(v, p);
  });
}

void parse_judge(const YAML::Node& n, JudgeSettings& j) {
  check_keys(n, "judge", {"endpoint_env", "prefixes", "extra_prefixes", "attempts",
                          "base_delay_ms", "max_in_flight"});
  each(n, "judge", [&](const std::string& k, const YAML::Node& v, const std::string& p) {
    if (k == "endpoint_env") j.endpoint_env = scalar<std::string>(v, p);
    if (k == "prefixes" || k == "extra_prefixes") {
      if (!v.IsSequence()) throw ConfigError(fmt::format("config: '{}' must be a list", p));
      if (k == "prefixes") j.prefixes.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        j.prefixes.push_back(scalar<std::string>(v[i], fmt::format("{}[{}]", p, i)));
      }
    }
    if (k == "attempts") j.retry.attempts = scalar<int>(v, p);
    if (k == "base_delay_ms") {
      j.retry.base_delay = std::chrono::milliseconds(non_negative(v, p));
    }
    if (k == "max_in_flight") j.max_in_flight = static_cast<unsigned>(non_negative(v, p));
  });
}

void parse_frames(const YAML::Node& n, FrameSettings& f) {
  check_keys(n, "frames", {"cap", "fps"});
  each(n, "frames", [&](const std::string& k, const YAML::Node& v, const std::string& p) {
    if (k == "cap") f.cap = scalar<std::int64_t>(v, p);
    if (k == "fps") f.fps = scalar<double>(v, p);
  });
}

}  // namespace

void RunConfig::validate() const {
  if (jobs > 1024) throw ConfigError("config: jobs must be at most 1024");
  chunk.validate();
  render.validate();
  if (!mix_sources.empty()) mix_plan().validate();
  if (diversity.n == 0) throw ConfigError("config: diversity.n must be positive");
  if (diversity.provider != "local-hash" && diversity.provider != "remote") {
    throw ConfigError(fmt::format("config: diversity.provider '{}' must be local-hash or remote",
                                  diversity.provider));
  }
  if (diversity.remote.batch_size == 0) throw ConfigError("config: diversity.batch_size must be positive");
  if (diversity.k == 0) throw ConfigError("config: diversity.k must be positive");
  // Point count is unknown until sampling; check everything but feasibility.
  diversity.tsne.validate(std::max<std::size_t>(4, static_cast<std::size_t>(
                                                       3 * diversity.tsne.perplexity + 2)));
  if (judge.endpoint_env.empty()) throw ConfigError("config: judge.endpoint_env is empty");
  if (judge.retry.attempts < 1) throw ConfigError("config: judge.attempts must be positive");
  if (judge.max_in_flight == 0) throw ConfigError("config: judge.max_in_flight must be positive");
  if (frames.cap < 1) throw ConfigError("config: frames.cap must be positive");
  if (!(frames.fps > 0)) throw ConfigError("config: frames.fps must be positive");
}

MixPlan RunConfig::mix_plan() const {
  MixPlan plan;
  plan.seed = seed;
  plan.total = mix_total;
  plan.shuffle = mix_shuffle;
  for (const auto& s : mix_sources) plan.sources.push_back(s.source);
  return plan;
}

std::string RunConfig::canonical_json() const {
  json j;
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["output_dir"] = output_dir.generic_string();
  j["chunk"] = {{"target_words", chunk.target_words},
                {"hard_cap_words", chunk.hard_cap_words},
                {"mode", chunk.mode == ChunkMode::kSentence ? "sentence" : "word_window"}};
  j["render"] = json::parse(render.canonical_json());
  json sources = json::array();
  for (const auto& s : mix_sources) {
    json e = {{"name", s.source.name}, {"manifest", s.source.manifest.generic_string()}};
    if (s.source.count) e["count"] = *s.source.count;
    if (s.source.ratio) e["ratio"] = *s.source.ratio;
    if (s.media_prefix) e["media_prefix"] = *s.media_prefix;
    sources.push_back(std::move(e));
  }
  j["mix"] = {{"total", mix_total ? json(*mix_total) : json(nullptr)},
              {"shuffle", mix_shuffle},
              {"sources", sources}};
  const TsneConfig& t = diversity.tsne;
  j["diversity"] = {{"n", diversity.n},
                    {"provider", diversity.provider},
                    {"batch_size", diversity.remote.batch_size},
                    {"perplexity", t.perplexity},
                    {"iterations", t.iterations},
                    {"early_exaggeration", t.early_exaggeration},
                    {"exaggeration_iterations", t.exaggeration_iterations},
                    {"learning_rate", t.learning_rate},
                    {"pca_dims", t.pca_dims},
                    {"k", diversity.k}};
  j["judge"] = {{"endpoint_env", judge.endpoint_env},
                {"prefixes", judge.prefixes},
                {"attempts", judge.retry.attempts}};
  j["frames"] = {{"cap", frames.cap}, {"fps", frames.fps}};
  j["rng"] = Rng::kAlgorithm;
  return j.dump();
}

std::string RunConfig::digest() const { return sha256_hex(canonical_json()); }

RunConfig parse_config(std::string_view yaml_text, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("config: invalid YAML: {}", e.what()));
  }
  RunConfig cfg;
  if (root.IsNull()) {
    cfg.validate();
    return cfg;
  }
  check_keys(root, "", {"seed", "output_dir", "jobs", "chunk", "render", "mix", "diversity",
                        "judge", "frames"});
  // Top-level seed first so mix.seed can override it regardless of key order.
  if (root["seed"]) cfg.seed = non_negative(root["seed"], "seed");
  each(root, "", [&](const std::string& k, const YAML::Node& v, const std::string& p) {
    if (k == "output_dir") cfg.output_dir = resolve(base_dir, scalar<std::string>(v, p));
    if (k == "jobs") cfg.jobs = static_cast<unsigned>(non_negative(v, p));
    if (k == "chunk") parse_chunk(v, cfg.chunk);
    if (k == "render") parse_render(v, cfg, base_dir);
    if (k == "diversity") parse_diversity(v, cfg.diversity);
    if (k == "judge") parse_judge(v, cfg.judge);
    if (k == "frames") parse_frames(v, cfg.frames);
  });
  if (root["mix"]) parse_mix(root["mix"], cfg, base_dir);
  cfg.diversity.tsne.seed = cfg.seed;
  cfg.diversity.tsne.jobs = cfg.jobs;
  cfg.validate();
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

}  // namespace sforge
