// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <fmt/format.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "fixtures.hpp"
#include "sforge/cli.hpp"
#include "sforge/corpus.hpp"

using namespace sforge;
using nlohmann::json;
namespace fs = std::filesystem;
namespace st = sforge::testing;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string text_jsonl(std::size_t n, std::uint64_t seed, bool bad_row) {
  std::string s;
  for (const auto& t : st::text_samples(n, seed, "lt", 150, 400)) {
    s += json{{"id", t.id}, {"context", t.context}, {"question", t.question}, {"answer", t.answer}}
             .dump() +
         "\n";
  }
  if (bad_row) s += R"({"id": "broken", "context": "c", "question": "q", "answer": ""})" "\n";
  return s;
}

std::string video_jsonl(std::size_t n, std::uint64_t seed) {
  std::string s;
  for (const auto& v : st::video_samples(n, seed, "vc")) {
    s += json{{"video_id", v.video_ref}, {"q", v.question}, {"a", v.answer}}.dump() + "\n";
  }
  return s;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

std::string s(const fs::path& p) { return p.string(); }

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"plan-frames"}).code == 2);
  CHECK(cli({"plan-frames", "--total", "abc"}).code == 2);
  CHECK(cli({"ingest", "--format", "nope", "--input", "x", "--out", "y"}).code == 2);
  const Run help = cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("SPARROW_JUDGE_URL") != std::string::npos);
  CHECK(help.out.find("SPARROW_EMBED_URL") != std::string::npos);
}

TEST_CASE("plan-frames") {
  const Run a = cli({"plan-frames", "--total", "100", "--cap", "64"});
  CHECK(a.code == 0);
  CHECK(count_lines(a.out) == 64);
  CHECK(a.out.rfind("0\n", 0) == 0);
  CHECK(a.out.find("\n99\n") != std::string::npos);
  CHECK(cli({"plan-frames", "--total", "5", "--cap", "24"}).out == "0\n1\n2\n3\n4\n");
  CHECK(count_lines(cli({"plan-frames", "--duration", "210"}).out) == 64);
  CHECK(count_lines(cli({"plan-frames", "--duration", "10", "--fps", "2", "--cap", "100"}).out) == 20);
  CHECK(cli({"plan-frames", "--total", "0"}).code != 0);
}

TEST_CASE("ingest with one bad row") {
  st::TempDir dir;
  st::spit(dir / "raw.jsonl", text_jsonl(10, 1, true));
  const Run r = cli({"ingest", "--format", "unified", "--input", s(dir / "raw.jsonl"), "--out",
                     s(dir / "text.json")});
  CHECK(r.code == 0);
  CHECK(r.err.find("warning: 1 record(s) rejected") != std::string::npos);
  CHECK(load_manifest(dir / "text.json").entries.size() == 10);
  CHECK(count_lines(st::slurp(dir / "text.json.reports.jsonl")) == 1);
  const json log = json::parse(st::slurp(dir / "text.json.runlog.json"));
  CHECK(log["command"] == "ingest");
  CHECK(log["outputs"].contains("text.json"));
  CHECK(log["config_digest"].get<std::string>().size() == 64);

  st::spit(dir / "junk.jsonl", "{\"id\": 1}\nnot json\n");
  const Run bad = cli({"ingest", "--format", "unified", "--input", s(dir / "junk.jsonl"), "--out",
                       s(dir / "junk.json")});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("record 1") != std::string::npos);
  CHECK(cli({"ingest", "--format", "unified", "--input", s(dir / "missing.jsonl"), "--out",
             s(dir / "m.json")})
            .code == 2);
}

TEST_CASE("ingest, synth and mix end to end") {
  st::TempDir dir;
  st::spit(dir / "raw.jsonl", text_jsonl(10, 2, false));
  st::spit(dir / "vc.jsonl", video_jsonl(30, 3));
  REQUIRE(cli({"ingest", "--format", "unified", "--input", s(dir / "raw.jsonl"), "--out",
               s(dir / "text.json")})
              .code == 0);
  REQUIRE(cli({"ingest", "--format", "videochatgpt", "--input", s(dir / "vc.jsonl"), "--out",
               s(dir / "vc.json")})
              .code == 0);
  CHECK(load_manifest(dir / "vc.json").kind == ManifestKind::kVideo);

  const Run syn = cli({"synth", "--input-manifest", s(dir / "text.json"), "--out-dir",
                       s(dir / "syn"), "--jobs", "2"});
  REQUIRE(syn.code == 0);
  const DatasetManifest m = load_manifest(dir / "syn/manifest.json");
  CHECK(m.entries.size() == 10);
  std::size_t images = 0;
  for (const auto& e : m.entries) {
    for (const auto& img : std::get<SyntheticVideoSample>(e).images) {
      CHECK(fs::exists(dir / "syn" / img));
      ++images;
    }
  }
  CHECK(images == static_cast<std::size_t>(std::distance(
                      fs::directory_iterator(dir / "syn/images"), fs::directory_iterator())));

  // Rerun into a second directory: identical bytes.
  REQUIRE(cli({"synth", "--input-manifest", s(dir / "text.json"), "--out-dir", s(dir / "syn2")})
              .code == 0);
  CHECK(st::slurp(dir / "syn/manifest.json") == st::slurp(dir / "syn2/manifest.json"));
  // --jobs changes the config digest but not the outputs.
  CHECK(json::parse(st::slurp(dir / "syn/run-log.json"))["outputs"] ==
        json::parse(st::slurp(dir / "syn2/run-log.json"))["outputs"]);
  for (const auto& f : fs::directory_iterator(dir / "syn/images")) {
    CHECK(st::slurp(f.path()) == st::slurp(dir / "syn2/images" / f.path().filename()));
  }

  st::spit(dir / "mix.yaml", R"(seed: 5
mix:
  sources:
    - {name: vc, manifest: vc.json, count: 20}
    - {name: syn, manifest: syn/manifest.json, count: 10}
)");
  const Run mix = cli({"mix", "--config", s(dir / "mix.yaml"), "--out", s(dir / "train/mix.jsonl")});
  REQUIRE(mix.code == 0);
  const std::string lines = st::slurp(dir / "train/mix.jsonl");
  CHECK(count_lines(lines) == 30);
  std::istringstream is(lines);
  std::string line;
  while (std::getline(is, line)) {
    const json e = json::parse(line);
    if (e["kind"] == "synthetic") {
      for (const auto& p : e["media"]) CHECK(fs::exists(dir / "train" / p.get<std::string>()));
    }
  }
  REQUIRE(cli({"mix", "--config", s(dir / "mix.yaml"), "--out", s(dir / "train/again.jsonl")})
              .code == 0);
  CHECK(st::slurp(dir / "train/again.jsonl") == lines);
  CHECK(cli({"mix", "--config", s(dir / "mix.yaml"), "--out", s(dir / "train/other.jsonl"),
             "--seed", "6"})
            .code == 0);
  CHECK(st::slurp(dir / "train/other.jsonl") != lines);
  CHECK(fs::exists(dir / "train/mix.jsonl.meta.json"));
  CHECK(fs::exists(dir / "train/mix.jsonl.runlog.json"));

  st::spit(dir / "greedy.yaml", R"(mix:
  sources:
    - {name: vc, manifest: vc.json, count: 31}
)");
  const Run cap = cli({"mix", "--config", s(dir / "greedy.yaml"), "--out", s(dir / "g.jsonl")});
  CHECK(cap.code == 1);
  CHECK(cap.err.find("vc") != std::string::npos);
  CHECK(cli({"mix", "--out", s(dir / "g.jsonl")}).code == 2);

  // Images removed after synthesis: the mix refuses to reference them.
  fs::remove_all(dir / "syn2/images");
  st::spit(dir / "dangling.yaml", R"(mix:
  sources:
    - {name: syn, manifest: syn2/manifest.json, count: 3}
)");
  CHECK(cli({"mix", "--config", s(dir / "dangling.yaml"), "--out", s(dir / "d.jsonl")}).code == 1);
}

TEST_CASE("synth with a missing font is a configuration error") {
  st::TempDir dir;
  st::spit(dir / "raw.jsonl", text_jsonl(2, 4, false));
  REQUIRE(cli({"ingest", "--format", "unified", "--input", s(dir / "raw.jsonl"), "--out",
               s(dir / "text.json")})
              .code == 0);
  st::spit(dir / "cfg.yaml", "render: {font: NoSuchFont}\n");
  const Run r = cli({"synth", "--config", s(dir / "cfg.yaml"), "--input-manifest",
                     s(dir / "text.json"), "--out-dir", s(dir / "out")});
  CHECK(r.code == 2);
  CHECK(r.err.find("configuration error") != std::string::npos);
  st::spit(dir / "typo.yaml", "rendr: {}\n");
  CHECK(cli({"synth", "--config", s(dir / "typo.yaml"), "--input-manifest", s(dir / "text.json"),
             "--out-dir", s(dir / "out")})
            .code == 2);
}

TEST_CASE("diversity command") {
  st::TempDir dir;
  st::spit(dir / "raw.jsonl", text_jsonl(40, 5, false));
  st::spit(dir / "vc.jsonl", video_jsonl(40, 6));
  REQUIRE(cli({"ingest", "--format", "unified", "--input", s(dir / "raw.jsonl"), "--out",
               s(dir / "text.json")})
              .code == 0);
  REQUIRE(cli({"ingest", "--format", "videochatgpt", "--input", s(dir / "vc.jsonl"), "--out",
               s(dir / "vc.json")})
              .code == 0);
  const std::vector<std::string> args = {"diversity", "--input", s(dir / "text.json"), "--input",
                                         s(dir / "vc.json"), "--n", "30", "--perplexity", "10",
                                         "--iterations", "300"};
  auto with_out = [&](const std::string& o) {
    auto a = args;
    a.push_back("--out-dir");
    a.push_back(o);
    return a;
  };
  REQUIRE(cli(with_out(s(dir / "d1"))).code == 0);
  REQUIRE(cli(with_out(s(dir / "d2"))).code == 0);
  CHECK(count_lines(st::slurp(dir / "d1/scatter.csv")) == 61);
  CHECK(st::slurp(dir / "d1/scatter.csv") == st::slurp(dir / "d2/scatter.csv"));
  CHECK(st::slurp(dir / "d1/scatter.svg") == st::slurp(dir / "d2/scatter.svg"));
  const json stats = json::parse(st::slurp(dir / "d1/stats.json"));
  CHECK(stats["labels"].size() == 2);
  CHECK(fs::exists(dir / "d1/run-log.json"));
  auto bad = with_out(s(dir / "d3"));
  bad.push_back("--provider");
  bad.push_back("word2vec");
  CHECK(cli(bad).code == 2);
}

TEST_CASE("judge command") {
  st::TempDir dir;
  st::spit(dir / "items.jsonl",
           R"({"id": "1", "question": "Color?", "options": ["A. Red", "B. Pink"], "answer": "B", "duration": "short"}
{"id": "2", "question": "Count?", "options": ["A. one", "B. two", "C. three"], "answer": "C"}
{"id": "3", "question": "Bad?", "options": ["A. x"], "answer": "Q"}
)");
  st::spit(dir / "pred.jsonl", R"({"id": "1", "prediction": "Answer: B. Pink."}
{"id": "2", "prediction": "no idea at all"}
)");
  const Run r = cli({"judge", "--items", s(dir / "items.jsonl"), "--predictions",
                     s(dir / "pred.jsonl"), "--no-llm", "--out-dir", s(dir / "j")});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("1 item(s) rejected") != std::string::npos);
  const json rep = json::parse(st::slurp(dir / "j/report.json"));
  CHECK(rep["overall"]["total"] == 2);
  CHECK(rep["overall"]["correct"] == 1);
  const std::string csv = st::slurp(dir / "j/verdicts.csv");
  CHECK(csv.find("1,B,exact,") != std::string::npos);
  CHECK(csv.find("2,Z,fail,") != std::string::npos);

  // Without --no-llm an endpoint must be configured.
  st::ScopedEnv unset("SFORGE_TEST_NO_JUDGE_URL", "");
  CHECK(cli({"judge", "--items", s(dir / "items.jsonl"), "--predictions", s(dir / "pred.jsonl"),
             "--endpoint-env", "SFORGE_TEST_NO_JUDGE", "--out-dir", s(dir / "k")})
            .code == 2);

  st::StubServer server([](const std::string&, const std::string&) {
    return std::pair<int, std::string>{200, st::chat_response("C")};
  });
  st::ScopedEnv url("SFORGE_TEST_JUDGE_URL", server.base_url());
  const Run llm = cli({"judge", "--items", s(dir / "items.jsonl"), "--predictions",
                       s(dir / "pred.jsonl"), "--endpoint-env", "SFORGE_TEST_JUDGE", "--out-dir",
                       s(dir / "l")});
  REQUIRE(llm.code == 0);
  CHECK(json::parse(st::slurp(dir / "l/report.json"))["overall"]["correct"] == 2);
  CHECK(server.requests() == 1);
}
