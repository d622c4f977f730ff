// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include "sforge/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "sforge/config.hpp"
#include "sforge/corpus.hpp"
#include "sforge/digest.hpp"
#include "sforge/diversity.hpp"
#include "sforge/error.hpp"
#include "sforge/judge.hpp"
#include "sforge/mixer.hpp"
#include "sforge/rng.hpp"
#include "sforge/synthesizer.hpp"
#include "sforge/version.hpp"

namespace sforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Bad flag combination detected after CLI11 parsing.
class UsageError : public Error {
 public:
  using Error::Error;
};

constexpr const char* kEnvHelp =
    "Environment:\n"
    "  SPARROW_JUDGE_URL, SPARROW_JUDGE_KEY, SPARROW_JUDGE_MODEL\n"
    "      chat-completions endpoint for the judge (prefix changeable with --endpoint-env)\n"
    "  SPARROW_EMBED_URL, SPARROW_EMBED_KEY, SPARROW_EMBED_MODEL\n"
    "      embeddings endpoint for --provider remote\n"
    "  SPARROW_FORGE_ASSETS\n"
    "      directory holding fonts/<name>.ttf (defaults to the bundled assets)\n"
    "Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", p.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
  if (!out) throw Error(fmt::format("cannot write '{}'", p.string()));
}

std::string file_digest(const fs::path& p) { return sha256_hex(read_file(p)); }

fs::path with_suffix(const fs::path& p, std::string_view suffix) {
  return fs::path(p.string() + std::string(suffix));
}

/// Provenance record written next to a command's outputs. Holds no
/// timestamps so reruns reproduce it byte for byte.
void write_run_log(const fs::path& path, std::string_view command, const RunConfig& cfg,
                   const std::vector<fs::path>& outputs, json extra = json::object()) {
  json j;
  j["command"] = command;
  j["config_digest"] = cfg.digest();
  j["seed"] = cfg.seed;
  j["versions"] = {{"sparrow-forge", library_version()}, {"rng", Rng::kAlgorithm}};
  j["outputs"] = json::object();
  for (const fs::path& o : outputs) j["outputs"][o.filename().string()] = file_digest(o);
  if (!extra.empty()) j["details"] = std::move(extra);
  write_file(path, j.dump(1) + "\n");
}

struct Common {
  std::string config;
  std::optional<unsigned> jobs;
};

RunConfig load_or_default(const Common& c) {
  RunConfig cfg;
  if (!c.config.empty()) {
    cfg = load_config(c.config);
  } else {
    cfg.validate();
  }
  if (c.jobs) {
    cfg.jobs = *c.jobs;
    cfg.diversity.tsne.jobs = *c.jobs;
  }
  return cfg;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string format, input, out, kind, source;
};

int cmd_ingest(const IngestArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_or_default(c);
  auto in_list = [](auto adapters, std::string_view f) {
    return std::find(adapters.begin(), adapters.end(), f) != adapters.end();
  };
  const bool text_ok = in_list(text_adapters(), a.format);
  const bool video_ok = in_list(video_adapters(), a.format);
  std::string kind = a.kind;
  if (kind.empty()) kind = (video_ok && !text_ok) ? "video" : "text";
  if (kind != "text" && kind != "video") {
    throw UsageError(fmt::format("--kind must be text or video, got '{}'", kind));
  }
  if ((kind == "text" && !text_ok) || (kind == "video" && !video_ok)) {
    std::string known;
    for (auto f : kind == "text" ? text_adapters() : video_adapters()) {
      known += (known.empty() ? "" : ", ") + std::string(f);
    }
    throw UsageError(
        fmt::format("unknown {} format '{}' (expected one of: {})", kind, a.format, known));
  }
  AdapterOptions opts;
  if (!a.source.empty()) opts.source = a.source;
  const std::string bytes = read_file(a.input);

  DatasetManifest manifest;
  std::vector<ValidationReport> reports;
  std::size_t records = 0;
  if (kind == "text") {
    auto r = parse_text_dataset(bytes, a.format, opts);
    std::vector<SampleRecord> entries(r.samples.begin(), r.samples.end());
    manifest = DatasetManifest::from_entries(ManifestKind::kText, std::move(entries));
    reports = std::move(r.reports);
    records = r.record_count;
  } else {
    auto r = parse_video_dataset(bytes, a.format, opts);
    std::vector<SampleRecord> entries(r.samples.begin(), r.samples.end());
    manifest = DatasetManifest::from_entries(ManifestKind::kVideo, std::move(entries));
    reports = std::move(r.reports);
    records = r.record_count;
  }
  const fs::path out_path(a.out);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  save_manifest(manifest, out_path);
  const fs::path report_path = with_suffix(out_path, ".reports.jsonl");
  {
    std::ostringstream ss;
    write_reports(reports, ss);
    write_file(report_path, ss.str());
  }
  if (!reports.empty()) {
    err << fmt::format("warning: {} record(s) rejected; see {}\n", reports.size(),
                       report_path.string());
  }
  write_run_log(with_suffix(out_path, ".runlog.json"), "ingest", cfg, {out_path, report_path},
                {{"format", a.format}, {"kind", kind}, {"records", records},
                 {"accepted", manifest.entries.size()}, {"rejected", reports.size()}});
  out << fmt::format("ingested {} of {} records into {} ({} warning(s))\n",
                     manifest.entries.size(), records, out_path.string(), reports.size());
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string input_manifest, out_dir;
};

int cmd_synth(const SynthArgs& a, const Common& c, std::ostream& out) {
  const RunConfig cfg = load_or_default(c);
  const fs::path assets = cfg.asset_dir.empty() ? default_asset_dir() : cfg.asset_dir;
  const TextRenderer renderer = TextRenderer::from_assets(cfg.render, assets);
  const DatasetManifest text = load_manifest(a.input_manifest);
  if (text.kind != ManifestKind::kText) {
    throw UsageError(fmt::format("'{}' is a {} manifest; synth needs a text manifest",
                                 a.input_manifest, to_string(text.kind)));
  }
  const fs::path out_dir(a.out_dir);
  fs::create_directories(out_dir);
  DirectoryImageSink sink(out_dir);
  const DatasetManifest synth = synthesize_manifest(text, cfg.chunk, renderer, sink, cfg.jobs);
  const fs::path manifest_path = out_dir / "manifest.json";
  save_manifest(synth, manifest_path);
  std::size_t images = 0;
  for (const SampleRecord& r : synth.entries) {
    images += std::get<SyntheticVideoSample>(r).images.size();
  }
  write_run_log(out_dir / "run-log.json", "synth", cfg, {manifest_path},
                {{"input", file_digest(a.input_manifest)},
                 {"samples", synth.entries.size()},
                 {"images", images},
                 {"renderer_digest", renderer.digest()},
                 {"policy_digest", policy_digest(cfg.chunk)}});
  out << fmt::format("synthesized {} samples ({} images) into {}\n", synth.entries.size(), images,
                     out_dir.string());
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct MixArgs {
  std::string out;
  std::optional<std::uint64_t> seed;
};

int cmd_mix(const MixArgs& a, const Common& c, std::ostream& out) {
  if (c.config.empty()) throw UsageError("mix needs --config with a mix section");
  RunConfig cfg = load_or_default(c);
  if (a.seed) cfg.seed = *a.seed;
  if (cfg.mix_sources.empty()) throw ConfigError("config: mix.sources is empty");
  const MixPlan plan = cfg.mix_plan();
  plan.validate();

  const fs::path out_path(a.out);
  const fs::path out_dir = out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
  fs::create_directories(out_dir);
  std::vector<MixInput> inputs;
  for (const MixSourceConfig& s : cfg.mix_sources) {
    std::string prefix;
    if (s.media_prefix) {
      prefix = *s.media_prefix;
    } else {
      prefix = fs::relative(fs::absolute(s.source.manifest).parent_path(), fs::absolute(out_dir))
                   .generic_string();
      if (prefix == ".") prefix.clear();
    }
    inputs.push_back({s.source.name, load_manifest(s.source.manifest), prefix});
  }
  const TrainingManifest tm = build_mix(inputs, plan);
  {
    std::ostringstream ss;
    emit_training_format(tm, ss, out_dir);
    write_file(out_path, ss.str());
  }
  const fs::path meta_path = with_suffix(out_path, ".meta.json");
  {
    std::ostringstream ss;
    write_training_meta(tm, ss);
    write_file(meta_path, ss.str());
  }
  json comp = json::object();
  for (const auto& [name, n] : tm.composition) comp[name] = n;
  write_run_log(with_suffix(out_path, ".runlog.json"), "mix", cfg, {out_path, meta_path},
                {{"plan_digest", tm.plan_digest}, {"composition", comp}});
  std::string summary;
  for (const auto& [name, n] : tm.composition) {
    summary += fmt::format("{}{}={}", summary.empty() ? "" : ", ", name, n);
  }
  out << fmt::format("mixed {} entries ({}) into {}\n", tm.entries.size(), summary,
                     out_path.string());
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct DiversityArgs {
  std::vector<std::string> inputs;
  std::optional<std::size_t> n;
  std::string provider;
  std::optional<std::uint64_t> seed;
  std::optional<double> perplexity;
  std::optional<int> iterations;
  std::optional<std::size_t> pca_dims;
  std::string out_dir;
};

int cmd_diversity(const DiversityArgs& a, const Common& c, std::ostream& out) {
  RunConfig cfg = load_or_default(c);
  if (a.seed) cfg.seed = *a.seed;
  DiversitySettings& d = cfg.diversity;
  if (a.n) d.n = *a.n;
  if (!a.provider.empty()) d.provider = a.provider;
  if (a.perplexity) d.tsne.perplexity = *a.perplexity;
  if (a.iterations) d.tsne.iterations = *a.iterations;
  if (a.pca_dims) d.tsne.pca_dims = *a.pca_dims;
  d.tsne.seed = cfg.seed;
  d.tsne.jobs = cfg.jobs;
  if (d.n == 0) throw UsageError("--n must be positive");
  const auto provider = make_embedding_provider(d.provider, d.remote);

  std::vector<LabeledInstruction> instructions;
  for (std::size_t i = 0; i < a.inputs.size(); ++i) {
    const DatasetManifest m = load_manifest(a.inputs[i]);
    auto s = sample_instructions(m, d.n, cfg.seed ^ static_cast<std::uint64_t>(i));
    instructions.insert(instructions.end(), s.begin(), s.end());
  }
  d.tsne.validate(instructions.size());
  const EmbeddingMatrix em = embed(instructions, *provider);
  const Projection2D proj = tsne(em, d.tsne);
  const ClusterSummary summary = cluster_stats(proj, d.k);

  const fs::path out_dir(a.out_dir);
  fs::create_directories(out_dir);
  const fs::path csv = out_dir / "scatter.csv", svg = out_dir / "scatter.svg",
                 stats = out_dir / "stats.json";
  {
    std::ostringstream ss;
    write_scatter_csv(proj, ss);
    write_file(csv, ss.str());
  }
  {
    std::ostringstream ss;
    write_scatter_svg(proj, ss);
    write_file(svg, ss.str());
  }
  {
    std::ostringstream ss;
    write_cluster_summary(summary, ss);
    json j = json::parse(ss.str());
    j["provider"] = em.provider_id;
    j["points"] = proj.points.size();
    j["kl_trace"] = json::array();
    for (const auto& [it, kl] : proj.kl_trace) j["kl_trace"].push_back({it, kl});
    j["uncalibrated"] = proj.uncalibrated;
    write_file(stats, j.dump(1) + "\n");
  }
  write_run_log(out_dir / "run-log.json", "diversity", cfg, {csv, svg, stats},
                {{"inputs", a.inputs.size()}, {"provider", em.provider_id}});
  out << fmt::format("projected {} instructions; same-label fraction {:.4f} (k={}); final KL {:.4f}\n",
                     proj.points.size(), summary.same_label_fraction, summary.k,
                     proj.kl_trace.back().second);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct JudgeArgs {
  std::string items, predictions, endpoint_env, out_dir;
  bool no_llm = false;
};

int cmd_judge(const JudgeArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_or_default(c);
  if (!a.endpoint_env.empty()) cfg.judge.endpoint_env = a.endpoint_env;
  std::unique_ptr<HttpChatClient> client;
  if (!a.no_llm) client = std::make_unique<HttpChatClient>(Endpoint::from_env(cfg.judge.endpoint_env));

  const ParseResult<McqItem> items = parse_mcq_items(read_file(a.items));
  const auto predictions = parse_predictions(read_file(a.predictions));
  const fs::path out_dir(a.out_dir);
  fs::create_directories(out_dir);
  const fs::path item_reports = out_dir / "items.reports.jsonl";
  {
    std::ostringstream ss;
    write_reports(items.reports, ss);
    write_file(item_reports, ss.str());
  }
  if (!items.reports.empty()) {
    err << fmt::format("warning: {} item(s) rejected; see {}\n", items.reports.size(),
                       item_reports.string());
  }
  // Predictions for rejected items are dropped with the items.
  std::map<std::string, std::string> kept;
  for (const McqItem& it : items.samples) {
    if (auto p = predictions.find(it.id); p != predictions.end()) kept.emplace(p->first, p->second);
  }
  for (const auto& [id, _] : predictions) {
    const bool rejected = std::any_of(items.reports.begin(), items.reports.end(),
                                      [&](const ValidationReport& r) { return r.id == id; });
    if (!kept.count(id) && !rejected) {
      throw IntegrityError(fmt::format("prediction for unknown item '{}'", id));
    }
  }
  JudgeOptions opts;
  opts.prefixes = cfg.judge.prefixes;
  opts.retry = cfg.judge.retry;
  const auto verdicts =
      judge_all(items.samples, kept, client.get(), opts, client ? cfg.judge.max_in_flight : cfg.jobs);
  const ScoreReport report = score(verdicts, items.samples, client ? client->model_id() : "");

  const fs::path report_path = out_dir / "report.json", verdict_path = out_dir / "verdicts.csv";
  {
    std::ostringstream ss;
    write_score_report(report, ss);
    write_file(report_path, ss.str());
  }
  {
    std::ostringstream ss;
    write_verdicts_csv(verdicts, ss);
    write_file(verdict_path, ss.str());
  }
  write_run_log(out_dir / "run-log.json", "judge", cfg, {report_path, verdict_path, item_reports},
                {{"items", file_digest(a.items)},
                 {"predictions", file_digest(a.predictions)},
                 {"llm", !a.no_llm},
                 {"judge_model", report.judge_model}});
  out << fmt::format("accuracy {:.4f} ({}/{}); exact {:.3f}, llm {:.3f}, fail {:.3f}\n",
                     report.overall.accuracy.value_or(0.0), report.overall.correct,
                     report.overall.total, report.exact_fraction, report.llm_fraction,
                     report.fail_fraction);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct PlanFramesArgs {
  std::optional<std::int64_t> total;
  std::optional<double> duration;
  std::optional<double> fps;
  std::optional<std::int64_t> cap;
};

int cmd_plan_frames(const PlanFramesArgs& a, const Common& c, std::ostream& out) {
  const RunConfig cfg = load_or_default(c);
  if (a.total.has_value() == a.duration.has_value()) {
    throw UsageError("plan-frames needs exactly one of --total or --duration");
  }
  const std::int64_t cap = a.cap.value_or(cfg.frames.cap);
  if (cap < 1) throw UsageError("--cap must be at least 1");
  std::int64_t total = 0;
  if (a.total) {
    if (*a.total < 1) throw UsageError("--total must be at least 1");
    total = *a.total;
  } else {
    const double fps = a.fps.value_or(cfg.frames.fps);
    if (!(fps > 0) || !(*a.duration >= 0)) {
      throw UsageError("--duration must be non-negative and --fps positive");
    }
    total = frames_at_fps(*a.duration, fps);
  }
  const FramePlan plan = plan_frames(total, cap);
  for (std::int64_t idx : plan.indices) out << idx << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"sparrow-forge: synthesize, mix, audit and score video-instruction data",
               "sparrow-forge"};
  app.footer(kEnvHelp);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(library_version()));

  Common common;
  std::string log_level = "warn";
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "YAML run configuration");
    sub->add_option("--jobs", common.jobs, "worker threads (0 = all logical processors)");
    sub->add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  };

  IngestArgs ingest;
  auto* s_ingest = app.add_subcommand("ingest", "parse a raw dataset into a manifest");
  s_ingest->add_option("--format", ingest.format, "source adapter id")->required();
  s_ingest->add_option("--input", ingest.input, "raw dataset file (JSON or JSON lines)")
      ->required();
  s_ingest->add_option("--out", ingest.out, "manifest path")->required();
  s_ingest->add_option("--kind", ingest.kind, "text or video (inferred from --format)");
  s_ingest->add_option("--source", ingest.source, "source tag stamped on every sample");
  add_common(s_ingest);

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "render text samples into image sequences");
  s_synth->add_option("--input-manifest", synth.input_manifest, "text manifest")->required();
  s_synth->add_option("--out-dir", synth.out_dir, "directory for manifest.json and images/")
      ->required();
  add_common(s_synth);

  MixArgs mix;
  auto* s_mix = app.add_subcommand("mix", "build a seeded training mix from manifests");
  s_mix->add_option("--out", mix.out, "training file (JSON lines)")->required();
  s_mix->add_option("--seed", mix.seed, "overrides the configured seed");
  add_common(s_mix);

  DiversityArgs div;
  auto* s_div = app.add_subcommand("diversity", "embed sampled instructions and project with t-SNE");
  s_div->add_option("--input", div.inputs, "manifest to sample from (repeatable)")->required();
  s_div->add_option("--n", div.n, "instructions sampled per manifest (default 5000)");
  s_div->add_option("--provider", div.provider, "local-hash or remote")
      ->check(CLI::IsMember({"local-hash", "remote"}));
  s_div->add_option("--seed", div.seed, "overrides the configured seed");
  s_div->add_option("--perplexity", div.perplexity, "t-SNE perplexity");
  s_div->add_option("--iterations", div.iterations, "t-SNE iterations");
  s_div->add_option("--pca-dims", div.pca_dims, "PCA pre-reduction (0 = off)");
  s_div->add_option("--out-dir", div.out_dir, "output directory")->required();
  add_common(s_div);

  JudgeArgs jd;
  auto* s_judge = app.add_subcommand("judge", "score MCQ predictions");
  s_judge->add_option("--items", jd.items, "benchmark items (JSON or JSON lines)")->required();
  s_judge->add_option("--predictions", jd.predictions, "JSON lines of {id, prediction}")
      ->required();
  s_judge->add_option("--endpoint-env", jd.endpoint_env,
                      "environment prefix for the judge endpoint (default SPARROW_JUDGE)");
  s_judge->add_flag("--no-llm", jd.no_llm, "exact matching only");
  s_judge->add_option("--out-dir", jd.out_dir, "output directory")->required();
  add_common(s_judge);

  PlanFramesArgs pf;
  auto* s_pf = app.add_subcommand("plan-frames", "print uniformly sampled frame indices");
  s_pf->add_option("--total", pf.total, "total frame count");
  s_pf->add_option("--duration", pf.duration, "video duration in seconds");
  s_pf->add_option("--fps", pf.fps, "frames per second used with --duration");
  s_pf->add_option("--cap", pf.cap, "maximum frames (default from config, 64)");
  add_common(s_pf);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto previous = spdlog::default_logger();
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  auto logger = std::make_shared<spdlog::logger>("sparrow-forge", sink);
  logger->set_pattern("%l: %v");
  logger->set_level(spdlog::level::from_str(log_level));
  spdlog::set_default_logger(logger);
  struct Restore {
    std::shared_ptr<spdlog::logger> prev;
    ~Restore() { spdlog::set_default_logger(prev); }
  } restore{previous};

  try {
    if (s_ingest->parsed()) return cmd_ingest(ingest, common, out, err);
    if (s_synth->parsed()) return cmd_synth(synth, common, out);
    if (s_mix->parsed()) return cmd_mix(mix, common, out);
    if (s_div->parsed()) return cmd_diversity(div, common, out);
    if (s_judge->parsed()) return cmd_judge(jd, common, out, err);
    if (s_pf->parsed()) return cmd_plan_frames(pf, common, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    if (e.record_index() == static_cast<std::size_t>(-1)) {
      err << "error: " << e.what() << "\n";
    } else {
      err << fmt::format("error: record {}: {}\n", e.record_index(), e.what());
    }
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace sforge
