// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixtures.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <fmt/format.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string_view>

namespace sforge::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto base = fs::temp_directory_path();
  for (;;) {
    path_ = base / fmt::format("{}-{}-{}", tag, static_cast<long>(::getpid()), counter++);
    if (fs::create_directories(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& bytes) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

namespace {

// Common English words, roughly by descending frequency.
constexpr std::string_view kWords[] = {
    "the", "of", "and", "to", "in", "a", "is", "that", "for", "it", "as", "was", "with", "be",
    "by", "on", "not", "he", "this", "are", "or", "his", "from", "at", "which", "but", "have",
    "an", "had", "they", "you", "were", "their", "one", "all", "we", "can", "her", "has",
    "there", "been", "if", "more", "when", "will", "would", "who", "so", "no", "she", "other",
    "its", "may", "these", "about", "than", "into", "some", "could", "them", "time", "only",
    "new", "what", "out", "two", "first", "also", "after", "most", "then", "any", "like",
    "should", "made", "such", "between", "many", "over", "before", "through", "where", "much",
    "because", "people", "those", "under", "during", "without", "however", "general", "world",
    "government", "system", "number", "country", "different", "important", "development",
    "information", "between", "public", "children", "several", "national", "community",
    "history", "research", "problem", "process", "service", "experience", "education",
    "economic", "political", "interest", "business", "example", "question", "including",
    "approach", "evidence", "analysis", "structure", "relationship", "language", "individual",
    "particular", "certain", "possible", "together", "although", "knowledge", "material",
    "surface", "position", "building", "evening", "company", "century", "describe", "measure",
    "distance", "pattern", "mountain", "village", "garden", "window", "morning", "story",
    "river", "water", "light", "house", "place", "small", "large", "great", "early", "later",
    "found", "known", "given", "small", "local", "human", "social", "power", "study", "group",
    "market", "policy", "family", "school", "church", "street", "field", "money", "health",
    "paper", "court", "table", "color", "heart", "voice", "river", "earth", "cloud", "stone",
    "train", "music", "night", "woman", "member", "series", "report", "season", "figure",
    "result", "change", "energy", "nature", "simple", "common", "second", "strong", "natural",
    "written", "several", "between", "movement", "attention", "character", "condition",
    "difference", "opportunity", "technology", "understanding", "environment", "particularly",
    "significant", "traditional", "considerable", "organization", "responsibility",
    "unfortunately", "independent", "established", "necessary", "production", "professor",
    "university", "literature", "collection", "department", "manuscript", "observation",
    "experiment", "instrument", "discussion", "agreement", "direction", "following",
    "afternoon", "carefully", "suddenly", "quietly", "probably", "certainly", "usually",
    "finally", "recently", "slowly", "nearly", "almost", "always", "never", "often", "still",
    "again", "already", "perhaps", "toward", "across", "behind", "beyond", "around", "within",
    "against", "among", "above", "below", "while", "since", "until", "though", "whether",
    "every", "each", "both", "either", "neither", "another", "whose", "whom", "here", "now",
    "very", "just", "well", "even", "back", "down", "still", "long", "last", "good", "little",
    "own", "old", "right", "high", "different", "next", "young", "few", "public", "bad", "same",
    "able", "said", "came", "went", "took", "gave", "told", "left", "felt", "kept", "brought",
    "began", "seemed", "turned", "looked", "called", "asked", "wanted", "showed", "moved",
    "lived", "believed", "considered", "appeared", "continued", "remained", "suggested",
    "produced", "described", "explained", "developed", "published", "returned", "received"};

constexpr std::string_view kNames[] = {
    "London", "Paris", "Maria", "Thomas", "Chen", "Amsterdam", "Elena", "Robert", "Tokyo",
    "Victoria", "Samuel", "Lisbon", "Anna", "Ibrahim", "Oxford", "Harvard", "Kenya", "Peru",
    "Margaret", "William", "Sofia", "Vienna", "Daniel", "Priya", "Oslo", "Jakarta"};

constexpr std::string_view kTitles[] = {"Dr.", "Mr.", "Mrs.", "Prof.", "St."};

std::vector<double> zipf_cdf() {
  std::vector<double> cdf;
  double acc = 0;
  for (std::size_t r = 0; r < std::size(kWords); ++r) {
    acc += 1.0 / std::pow(static_cast<double>(r) + 13.0, 0.9);
    cdf.push_back(acc);
  }
  for (double& c : cdf) c /= acc;
  return cdf;
}

std::string_view draw_word(Rng& rng) {
  static const std::vector<double> cdf = zipf_cdf();
  const double u = rng.uniform01();
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  return kWords[std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()),
                                      std::size(kWords) - 1)];
}

std::string capitalize(std::string_view w) {
  std::string s(w);
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string sentence(Rng& rng, char terminal) {
  const std::size_t len = 6 + rng.uniform_below(23);
  std::string s;
  for (std::size_t i = 0; i < len; ++i) {
    std::string w;
    const std::uint64_t kind = rng.uniform_below(100);
    if (kind < 4) {
      w = kNames[rng.uniform_below(std::size(kNames))];
    } else if (kind < 6) {
      w = fmt::format("{}", 1 + rng.uniform_below(2024));
    } else if (kind < 7 && i + 1 < len) {
      w = std::string(kTitles[rng.uniform_below(std::size(kTitles))]) + " " +
          std::string(kNames[rng.uniform_below(std::size(kNames))]);
      ++i;
    } else {
      w = draw_word(rng);
    }
    if (i == 0) w = capitalize(w);
    if (i + 1 < len && rng.uniform_below(100) < 7) w += ",";
    if (!s.empty()) s += ' ';
    s += w;
  }
  s += terminal;
  return s;
}

}  // namespace

std::string english_document(Rng& rng, std::size_t approx_words) {
  std::string doc;
  std::size_t words = 0;
  std::size_t in_paragraph = 0;
  while (words < approx_words) {
    const std::uint64_t t = rng.uniform_below(100);
    const char term = t < 90 ? '.' : (t < 96 ? '?' : '!');
    const std::string s = sentence(rng, term);
    if (!doc.empty()) {
      // Paragraphs of roughly 3..8 sentences.
      if (in_paragraph >= 3 && rng.uniform_below(100) < 22) {
        doc += "\n\n";
        in_paragraph = 0;
      } else {
        doc += ' ';
      }
    }
    doc += s;
    ++in_paragraph;
    words += count_words_simple(s);
  }
  return doc;
}

std::size_t count_words_simple(std::string_view s) {
  std::size_t n = 0;
  bool in = false;
  for (char c : s) {
    const bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r';
    if (!space && !in) ++n;
    in = !space;
  }
  return n;
}

std::vector<std::string> english_corpus(std::size_t docs, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < docs; ++i) {
    out.push_back(english_document(rng, 300 + rng.uniform_below(2701)));
  }
  return out;
}

std::string english_question(Rng& rng) { return sentence(rng, '?'); }

std::vector<TextInstructionSample> text_samples(std::size_t n, std::uint64_t seed,
                                                const std::string& source, std::size_t min_words,
                                                std::size_t max_words) {
  Rng rng(seed);
  std::vector<TextInstructionSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    TextInstructionSample s;
    s.id = fmt::format("{}-{:05d}", source, i);
    s.context = english_document(rng, min_words + rng.uniform_below(max_words - min_words + 1));
    s.question = english_question(rng);
    s.answer = sentence(rng, '.');
    s.source = source;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<VideoInstructionSample> video_samples(std::size_t n, std::uint64_t seed,
                                                  const std::string& source) {
  Rng rng(seed);
  std::vector<VideoInstructionSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    VideoInstructionSample v;
    v.id = fmt::format("{}-{:05d}", source, i);
    v.video_ref = fmt::format("videos/{}/{:05d}.mp4", source, i);
    v.duration_s = 5.0 + static_cast<double>(rng.uniform_below(6000)) / 10.0;
    v.question = english_question(rng);
    v.answer = sentence(rng, '.');
    v.source = source;
    out.push_back(std::move(v));
  }
  return out;
}

LabeledPoints gaussian_clusters(std::size_t k, std::size_t per_cluster, std::size_t dim,
                                double separation, std::uint64_t seed) {
  Rng rng(seed);
  LabeledPoints lp;
  lp.x = DenseMatrix(k * per_cluster, dim);
  // Centers on distinct axes at distance `separation` from each other.
  const double offset = separation / std::sqrt(2.0);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < per_cluster; ++i) {
      double* row = lp.x.row(c * per_cluster + i);
      for (std::size_t d = 0; d < dim; ++d) row[d] = rng.normal();
      row[c % dim] += offset;
      lp.labels.push_back(fmt::format("cluster-{}", c));
    }
  }
  return lp;
}

struct StubServer::Impl {
  httplib::Server server;
  int port = 0;
  std::thread thread;
};

StubServer::StubServer(Handler handler) : impl_(std::make_unique<Impl>()) {
  impl_->server.Post(R"(.*)", [this, handler](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    auto [status, body] = handler(req.path, req.body);
    res.status = status;
    res.set_content(body, "application/json");
  });
  impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

StubServer::~StubServer() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string StubServer::base_url() const {
  return fmt::format("http://127.0.0.1:{}/v1", impl_->port);
}

std::string chat_response(const std::string& content) {
  const nlohmann::json j = {
      {"object", "chat.completion"},
      {"choices",
       {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}}}};
  return j.dump();
}

ScopedEnv::ScopedEnv(std::string name, const std::string& value) : name_(std::move(name)) {
  if (const char* v = std::getenv(name_.c_str())) old_ = v;
  ::setenv(name_.c_str(), value.c_str(), 1);
}

ScopedEnv::~ScopedEnv() {
  if (old_) {
    ::setenv(name_.c_str(), old_->c_str(), 1);
  } else {
    ::unsetenv(name_.c_str());
  }
}

}  // namespace sforge::testing
