// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include "sforge/judge.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>

#include "sforge/error.hpp"
#include "sforge/parallel.hpp"

namespace sforge {

using nlohmann::json;

namespace {

constexpr std::string_view kSpace = " \t\r\n\f\v";

std::string_view trim(std::string_view s) {
  const std::size_t b = s.find_first_not_of(kSpace);
  if (b == std::string_view::npos) return {};
  const std::size_t e = s.find_last_not_of(kSpace);
  return s.substr(b, e - b + 1);
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = ascii_lower(c);
  return out;
}

bool istarts_with(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (ascii_lower(s[i]) != ascii_lower(prefix[i])) return false;
  }
  return true;
}

bool is_alnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

}  // namespace

std::vector<std::string> McqItem::letters() const {
  std::vector<std::string> out;
  for (const McqOption& o : options) out.push_back(o.letter);
  return out;
}

std::optional<std::string> McqItem::check() const {
  if (id.empty()) return "item id is empty";
  if (options.size() < 2) return "an item needs at least two options";
  if (options.size() > 5) return "an item has more than five options";
  for (std::size_t i = 0; i < options.size(); ++i) {
    const std::string want(1, static_cast<char>('A' + i));
    if (options[i].letter != want) {
      return fmt::format("option {} has letter '{}' but '{}' was expected", i, options[i].letter,
                         want);
    }
  }
  if (std::none_of(options.begin(), options.end(),
                   [&](const McqOption& o) { return o.letter == gold; })) {
    return fmt::format("gold letter '{}' is not among the options", gold);
  }
  if (duration_tier && *duration_tier != "short" && *duration_tier != "medium" &&
      *duration_tier != "long") {
    return fmt::format("unknown duration tier '{}'", *duration_tier);
  }
  return std::nullopt;
}

std::string_view to_string(JudgeStage stage) {
  switch (stage) {
    case JudgeStage::kExact: return "exact";
    case JudgeStage::kLlm: return "llm";
    case JudgeStage::kFail: return "fail";
  }
  return "fail";
}

std::span<const std::string_view> task_categories() {
  static constexpr std::string_view kCategories[] = {
      "Counting Problems",    "OCR Problems",        "Object Recognition",
      "Action Recognition",   "Attribute Perception", "Spatial Perception",
      "Temporal Perception",  "Temporal Reasoning",  "Spatial Reasoning",
      "Action Reasoning",     "Object Reasoning",    "Information Synopsis"};
  return kCategories;
}

const std::vector<std::string>& default_answer_prefixes() {
  static const std::vector<std::string> kPrefixes = {"Answer:", "The answer is", "Option",
                                                     "答案:", "答案："};
  return kPrefixes;
}

std::optional<std::string> exact_match(std::string_view prediction, const McqItem& item,
                                       const std::vector<std::string>& prefixes) {
  std::string_view s = trim(prediction);
  for (bool changed = true; changed;) {
    changed = false;
    for (const std::string& p : prefixes) {
      if (!p.empty() && istarts_with(s, p)) {
        s.remove_prefix(p.size());
        // A colon left behind by "The answer is:" goes too.
        while (!s.empty() && (s.front() == ':' || kSpace.find(s.front()) != std::string_view::npos)) {
          s.remove_prefix(1);
        }
        changed = true;
      }
    }
  }
  if (s.empty()) return std::nullopt;

  if (s[0] >= 'A' && s[0] <= 'Z') {
    const bool boundary = s.size() == 1 || s[1] == '.' || s[1] == ')' || s[1] == ':' ||
                          kSpace.find(s[1]) != std::string_view::npos;
    if (boundary) {
      for (const McqOption& o : item.options) {
        if (o.letter.size() == 1 && o.letter[0] == s[0]) return o.letter;
      }
    }
  }

  const std::string hay = lower(s);
  std::optional<std::string> found;
  for (const McqOption& o : item.options) {
    const std::string needle = lower(trim(o.text));
    if (needle.empty() || hay.find(needle) == std::string::npos) continue;
    if (found) return std::nullopt;
    found = o.letter;
  }
  return found;
}

const std::string_view kJudgeSystemMessage =
    "You are an AI assistant who will help me match an answer with several options of a "
    "single-choice question.";

const std::string_view kJudgeUserTemplate =
    "You are provided with a question, several options, and an answer, and you need to find "
    "which option is most similar to the answer.\n"
    "If the meaning of all options is significantly different from the answer, output Z. You "
    "should directly output a single uppercase character, such as A, B, C, D (if they are valid "
    "options), and Z, and nothing else. Here are two examples.\n"
    "\n"
    "Example 1:\n"
    "Question: What is the main object in the image?\n"
    "\n"
    "Options: A. teddy bear.\n"
    "B. rabbit.\n"
    "C. cat.\n"
    "D. dog.\n"
    "Answer: a cute teddy bear\n"
    "Output: A\n"
    "\n"
    "Example 2:\n"
    "Question: What is the main object in the image?\n"
    "Options: A. teddy bear.\n"
    "B. rabbit.\n"
    "C. cat.\n"
    "D. dog.\n"
    "Answer: Spider\n"
    "Output: Z\n"
    "\n"
    "Now here are the question, options, and the answer, you should match and give me the "
    "option letter:\n"
    "Question: {Question}\n"
    "Options: {Options}\n"
    "Answer: {Model Answer}\n"
    "Output:";

JudgePrompt build_judge_prompt(const McqItem& item, std::string_view prediction) {
  std::string options;
  for (std::size_t i = 0; i < item.options.size(); ++i) {
    if (i) options += '\n';
    options += item.options[i].letter + ". " + item.options[i].text;
  }
  // Substitute in one left-to-right pass so slot values are never rescanned.
  const std::pair<std::string_view, std::string_view> slots[] = {
      {"{Question}", item.question}, {"{Options}", options}, {"{Model Answer}", prediction}};
  std::string user;
  std::string_view rest = kJudgeUserTemplate;
  for (const auto& [key, value] : slots) {
    const std::size_t at = rest.find(key);
    user.append(rest.substr(0, at));
    user.append(value);
    rest.remove_prefix(at + key.size());
  }
  user.append(rest);
  return {std::string(kJudgeSystemMessage), std::move(user)};
}

HttpChatClient::HttpChatClient(Endpoint endpoint) : client_(std::move(endpoint)) {}

std::string HttpChatClient::model_id() const { return client_.endpoint().model; }

std::string HttpChatClient::complete(const JudgePrompt& prompt) const {
  json body = {{"messages", json::array({{{"role", "system"}, {"content", prompt.system}},
                                         {{"role", "user"}, {"content", prompt.user}}})},
               {"temperature", 0}};
  if (!client_.endpoint().model.empty()) body["model"] = client_.endpoint().model;
  const json resp = client_.post("/chat/completions", body);
  try {
    const json& content = resp.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const json::exception& e) {
    throw ProviderError(fmt::format("chat completion: malformed response: {}", e.what()));
  }
}

std::string parse_judge_completion(std::string_view completion, const McqItem& item) {
  for (std::size_t i = 0; i < completion.size(); ++i) {
    const char c = completion[i];
    if (c < 'A' || c > 'Z') continue;
    if (i > 0 && is_alnum(completion[i - 1])) continue;
    if (i + 1 < completion.size() && is_alnum(completion[i + 1])) continue;
    if (c == kNoMatch[0]) return std::string(kNoMatch);
    for (const McqOption& o : item.options) {
      if (o.letter.size() == 1 && o.letter[0] == c) return o.letter;
    }
  }
  return std::string(kNoMatch);
}

std::string llm_match(const ChatClient& client, const McqItem& item, std::string_view prediction,
                      const RetryPolicy& retry) {
  const JudgePrompt prompt = build_judge_prompt(item, prediction);
  std::string completion;
  try {
    with_retries(retry, [&] { completion = client.complete(prompt); });
  } catch (const Error& e) {
    spdlog::error("judge: item '{}': {}", item.id, e.what());
    return std::string(kNoMatch);
  }
  return parse_judge_completion(completion, item);
}

JudgeVerdict judge(const McqItem& item, std::string_view prediction, const ChatClient* client,
                   const JudgeOptions& options) {
  JudgeVerdict v{item.id, std::string(kNoMatch), JudgeStage::kFail, std::string(prediction)};
  if (auto letter = exact_match(prediction, item, options.prefixes)) {
    v.predicted = *letter;
    v.stage = JudgeStage::kExact;
  } else if (client) {
    v.predicted = llm_match(*client, item, prediction, options.retry);
    v.stage = JudgeStage::kLlm;
  }
  return v;
}

std::vector<JudgeVerdict> judge_all(std::span<const McqItem> items,
                                    const std::map<std::string, std::string>& predictions,
                                    const ChatClient* client, const JudgeOptions& options,
                                    unsigned jobs) {
  std::set<std::string> ids;
  for (const McqItem& it : items) {
    if (!ids.insert(it.id).second) throw IntegrityError(fmt::format("duplicate item id '{}'", it.id));
  }
  for (const auto& [id, _] : predictions) {
    if (!ids.count(id)) throw IntegrityError(fmt::format("prediction for unknown item '{}'", id));
  }
  std::vector<JudgeVerdict> out(items.size());
  parallel_for(items.size(), jobs, [&](std::size_t i) {
    const auto it = predictions.find(items[i].id);
    if (it == predictions.end()) {
      out[i] = {items[i].id, std::string(kNoMatch), JudgeStage::kFail, {}};
    } else {
      out[i] = judge(items[i], it->second, client, options);
    }
  });
  std::size_t missing = 0;
  for (const McqItem& it : items) missing += predictions.count(it.id) ? 0 : 1;
  if (missing) spdlog::warn("judge: {} items have no prediction and count as wrong", missing);
  return out;
}

ScoreReport score(std::span<const JudgeVerdict> verdicts, std::span<const McqItem> items,
                  std::string judge_model) {
  std::map<std::string, const JudgeVerdict*> by_id;
  for (const JudgeVerdict& v : verdicts) {
    if (!by_id.emplace(v.item_id, &v).second) {
      throw IntegrityError(fmt::format("duplicate verdict for item '{}'", v.item_id));
    }
  }
  if (by_id.size() != items.size()) {
    throw IntegrityError(fmt::format("{} verdicts for {} items", by_id.size(), items.size()));
  }

  ScoreReport r;
  r.judge_model = std::move(judge_model);
  r.overall.name = "overall";
  std::map<std::string, AccuracyRow> dur, cat;
  for (std::string_view t : {"short", "medium", "long"}) dur[std::string(t)].name = t;
  for (std::string_view c : task_categories()) cat[std::string(c)].name = c;
  std::size_t exact = 0, llm = 0, fail = 0;

  auto tally = [](AccuracyRow& row, bool ok) {
    ++row.total;
    if (ok) ++row.correct;
  };
  for (const McqItem& item : items) {
    const auto it = by_id.find(item.id);
    if (it == by_id.end()) throw IntegrityError(fmt::format("no verdict for item '{}'", item.id));
    const JudgeVerdict& v = *it->second;
    const bool ok = v.predicted == item.gold;
    tally(r.overall, ok);
    if (item.duration_tier) {
      auto& row = dur[*item.duration_tier];
      row.name = *item.duration_tier;
      tally(row, ok);
    }
    if (item.category) {
      auto& row = cat[*item.category];
      row.name = *item.category;
      tally(row, ok);
    }
    switch (v.stage) {
      case JudgeStage::kExact: ++exact; break;
      case JudgeStage::kLlm: ++llm; break;
      case JudgeStage::kFail: ++fail; break;
    }
  }
  auto finish = [](AccuracyRow row) {
    if (row.total) row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.total);
    return row;
  };
  r.overall = finish(r.overall);
  for (std::string_view t : {"short", "medium", "long"}) {
    r.by_duration.push_back(finish(dur.at(std::string(t))));
  }
  for (std::string_view c : task_categories()) {
    r.by_category.push_back(finish(cat.at(std::string(c))));
    cat.erase(std::string(c));
  }
  for (auto& [_, row] : cat) r.by_category.push_back(finish(row));
  const double n = static_cast<double>(std::max<std::size_t>(1, items.size()));
  r.exact_fraction = static_cast<double>(exact) / n;
  r.llm_fraction = static_cast<double>(llm) / n;
  r.fail_fraction = static_cast<double>(fail) / n;
  return r;
}

namespace {

// Array document or one object per line; `fn(index, value)` sees each record.
template <typename Fn>
void for_each_record(std::string_view bytes, Fn&& fn) {
  const std::size_t first = bytes.find_first_not_of(kSpace);
  if (first != std::string_view::npos && bytes[first] == '[') {
    json doc;
    try {
      doc = json::parse(bytes);
    } catch (const json::parse_error& e) {
      throw ParseError(static_cast<std::size_t>(-1), fmt::format("invalid JSON: {}", e.what()));
    }
    for (std::size_t i = 0; i < doc.size(); ++i) fn(i, doc[i]);
    return;
  }
  std::size_t index = 0;
  std::size_t pos = 0;
  while (pos <= bytes.size()) {
    std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) nl = bytes.size();
    const std::string_view line = trim(bytes.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(index, fmt::format("record {}: invalid JSON: {}", index, e.what()));
    }
    fn(index++, j);
  }
}

std::optional<std::string> opt_string(const json& j, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    if (j.contains(k) && !j[k].is_null()) return j[k].get<std::string>();
  }
  return std::nullopt;
}

}  // namespace

ParseResult<McqItem> parse_mcq_items(std::string_view bytes) {
  ParseResult<McqItem> out;
  std::set<std::string> seen;
  for_each_record(bytes, [&](std::size_t index, const json& j) {
    ++out.record_count;
    if (!j.is_object()) throw ParseError(index, fmt::format("record {} is not an object", index));
    McqItem item;
    try {
      item.id = opt_string(j, {"id"}).value_or("");
      item.question = opt_string(j, {"question"}).value_or("");
      item.gold = opt_string(j, {"gold", "answer"}).value_or("");
      item.category = opt_string(j, {"category", "task_type"});
      item.duration_tier = opt_string(j, {"duration_tier", "duration"});
      const json& opts = j.at("options");
      if (opts.is_array()) {
        for (std::size_t k = 0; k < opts.size(); ++k) {
          const std::string letter(1, static_cast<char>('A' + std::min<std::size_t>(k, 25)));
          std::string text = opts[k].get<std::string>();
          // "A. text" entries carry their own letter.
          if (text.size() >= 2 && text.compare(0, 1, letter) == 0 && (text[1] == '.' || text[1] == ')')) {
            text = std::string(trim(std::string_view(text).substr(2)));
          }
          item.options.push_back({letter, std::move(text)});
        }
      } else if (opts.is_object()) {
        for (const auto& [k, v] : opts.items()) item.options.push_back({k, v.get<std::string>()});
      } else {
        throw std::invalid_argument("options must be a list or an object");
      }
    } catch (const std::exception& e) {
      out.reports.push_back({index, item.id, fmt::format("malformed item: {}", e.what())});
      return;
    }
    if (auto why = item.check()) {
      out.reports.push_back({index, item.id, *why});
      return;
    }
    if (!seen.insert(item.id).second) {
      out.reports.push_back({index, item.id, "duplicate item id"});
      return;
    }
    out.samples.push_back(std::move(item));
  });
  return out;
}

std::map<std::string, std::string> parse_predictions(std::string_view bytes) {
  std::map<std::string, std::string> out;
  for_each_record(bytes, [&](std::size_t index, const json& j) {
    std::string id, pred;
    try {
      id = j.at("id").get<std::string>();
      pred = j.at("prediction").get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError(index, fmt::format("prediction record {}: {}", index, e.what()));
    }
    if (!out.emplace(id, std::move(pred)).second) {
      throw IntegrityError(fmt::format("duplicate prediction for item '{}'", id));
    }
  });
  return out;
}

void write_score_report(const ScoreReport& report, std::ostream& sink) {
  auto row = [](const AccuracyRow& r) {
    return json{{"name", r.name},
                {"total", r.total},
                {"correct", r.correct},
                {"accuracy", r.accuracy ? json(*r.accuracy) : json(nullptr)}};
  };
  json j;
  j["overall"] = row(report.overall);
  j["by_duration"] = json::array();
  for (const auto& r : report.by_duration) j["by_duration"].push_back(row(r));
  j["by_category"] = json::array();
  for (const auto& r : report.by_category) j["by_category"].push_back(row(r));
  j["stages"] = {{"exact", report.exact_fraction},
                 {"llm", report.llm_fraction},
                 {"fail", report.fail_fraction}};
  j["judge_model"] = report.judge_model;
  sink << j.dump(1) << '\n';
}

void write_verdicts_csv(std::span<const JudgeVerdict> verdicts, std::ostream& sink) {
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q.push_back('"');
      q.push_back(c);
    }
    return q + "\"";
  };
  sink << "id,predicted,stage,raw_prediction\n";
  for (const JudgeVerdict& v : verdicts) {
    sink << field(v.item_id) << ',' << v.predicted << ',' << to_string(v.stage) << ','
         << field(v.raw_prediction) << '\n';
  }
}

}  // namespace sforge
