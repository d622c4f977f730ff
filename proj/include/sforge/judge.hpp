// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sforge/corpus.hpp"
#include "sforge/http.hpp"

namespace sforge {

struct McqOption {
  std::string letter;
  std::string text;

  bool operator==(const McqOption&) const = default;
};

struct McqItem {
  std::string id;
  std::string question;
  /// Letters are consecutive from "A", at most "E".
  std::vector<McqOption> options;
  std::string gold;
  std::optional<std::string> category;
  /// "short", "medium" or "long".
  std::optional<std::string> duration_tier;

  std::vector<std::string> letters() const;
  /// Reason string when the item breaks an invariant.
  std::optional<std::string> check() const;

  bool operator==(const McqItem&) const = default;
};

/// Returned whenever no option can be matched.
inline constexpr std::string_view kNoMatch = "Z";

enum class JudgeStage { kExact, kLlm, kFail };
std::string_view to_string(JudgeStage stage);

struct JudgeVerdict {
  std::string item_id;
  std::string predicted;
  JudgeStage stage = JudgeStage::kFail;
  std::string raw_prediction;

  bool operator==(const JudgeVerdict&) const = default;
};

/// The video-benchmark task taxonomy, in reporting order.
std::span<const std::string_view> task_categories();

/// "Answer:", "The answer is", "Option" and the full- and half-width
/// Chinese "答案:" forms.
const std::vector<std::string>& default_answer_prefixes();

/// Trim, strip known prefixes repeatedly, then either a lone option letter at
/// the start or the unique option whose full text occurs in the prediction.
std::optional<std::string> exact_match(std::string_view prediction, const McqItem& item,
                                       const std::vector<std::string>& prefixes =
                                           default_answer_prefixes());

struct JudgePrompt {
  std::string system;
  std::string user;

  bool operator==(const JudgePrompt&) const = default;
};

/// Fixed parts of the option-matching prompt.
extern const std::string_view kJudgeSystemMessage;
/// Contains the placeholders {Question}, {Options} and {Model Answer}.
extern const std::string_view kJudgeUserTemplate;

JudgePrompt build_judge_prompt(const McqItem& item, std::string_view prediction);

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  /// Returns the assistant message text. Throws ProviderError on failure.
  virtual std::string complete(const JudgePrompt& prompt) const = 0;
  virtual std::string model_id() const = 0;
};

/// chat/completions client with temperature 0.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(Endpoint endpoint);
  std::string complete(const JudgePrompt& prompt) const override;
  std::string model_id() const override;

 private:
  JsonHttpClient client_;
};

/// First standalone uppercase letter that is an option letter or "Z";
/// "Z" when there is none.
std::string parse_judge_completion(std::string_view completion, const McqItem& item);

/// Never throws ProviderError: after the retries are spent the failure is
/// logged and "Z" is returned.
std::string llm_match(const ChatClient& client, const McqItem& item, std::string_view prediction,
                      const RetryPolicy& retry = {});

struct JudgeOptions {
  std::vector<std::string> prefixes = default_answer_prefixes();
  RetryPolicy retry;
};

/// Exact stage first, then the LLM when a client is given. Total.
JudgeVerdict judge(const McqItem& item, std::string_view prediction, const ChatClient* client,
                   const JudgeOptions& options = {});

/// One verdict per item in item order. Items without a prediction get a
/// failed verdict. Throws IntegrityError for predictions naming unknown items.
std::vector<JudgeVerdict> judge_all(std::span<const McqItem> items,
                                    const std::map<std::string, std::string>& predictions,
                                    const ChatClient* client, const JudgeOptions& options = {},
                                    unsigned jobs = 0);

struct AccuracyRow {
  std::string name;
  std::size_t total = 0;
  std::size_t correct = 0;
  /// correct / total; absent when total is 0.
  std::optional<double> accuracy;

  bool operator==(const AccuracyRow&) const = default;
};

struct ScoreReport {
  AccuracyRow overall;
  /// short, medium, long.
  std::vector<AccuracyRow> by_duration;
  /// The twelve taxonomy rows in order, then any other categories sorted.
  std::vector<AccuracyRow> by_category;
  double exact_fraction = 0;
  double llm_fraction = 0;
  double fail_fraction = 0;
  std::string judge_model;

  bool operator==(const ScoreReport&) const = default;
};

/// Matches verdicts to items by id; throws IntegrityError unless the id sets
/// agree one to one.
ScoreReport score(std::span<const JudgeVerdict> verdicts, std::span<const McqItem> items,
                  std::string judge_model = {});

/// JSON array or JSON lines. Options may be a list (letters assigned A, B, ...)
/// or an object keyed by letter. Invalid rows, including a gold letter that
/// is not an option, are reported and skipped.
ParseResult<McqItem> parse_mcq_items(std::string_view bytes);

/// JSON lines of {"id", "prediction"}. Throws ParseError on malformed lines
/// and IntegrityError on duplicate ids.
std::map<std::string, std::string> parse_predictions(std::string_view bytes);

void write_score_report(const ScoreReport& report, std::ostream& sink);
void write_verdicts_csv(std::span<const JudgeVerdict> verdicts, std::ostream& sink);

}  // namespace sforge
