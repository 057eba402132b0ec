#pragma once

#include "coref_meter/errors.hpp"
#include "coref_meter/types.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace corefmeter {

/// Lowercase single-token pronoun strings, in declaration order.
struct PronounSet {
  std::vector<std::string> words;

  static PronounSet standard();
  bool contains(std::string_view surface) const;  // case-insensitive
};

/// A binary pronoun resolution item. Spans are relative to `tokens`.
struct PCRInstance {
  std::string instance_id;
  std::string dataset;
  std::vector<std::string> tokens;
  std::vector<std::string> speakers;  // empty or one per token
  Mention pronoun;
  Mention candidates[2];
  int label = 1;  // 1 or 2: which candidate is the antecedent
  std::string doc_id;
  std::size_t sentence = 0;      // sentence of the pronoun
  std::size_t window_start = 0;  // document token index of tokens[0]

  bool operator==(const PCRInstance& other) const;
};

struct ExtractOptions {
  PronounSet pronouns = PronounSet::standard();
  std::uint64_t seed = 0;
  /// Sentences before the pronoun's sentence included in the window.
  std::size_t preceding_sentences = 2;
  std::size_t threads = 1;
};

/// True when `m` counts as a nominal antecedent: head POS NOUN/PROPN or a
/// Penn NN* tag when the document has parses, otherwise any span that is not
/// a single pronoun-like token.
bool is_nominal(const Document& doc, const Mention& m);

/// Builds instances from gold partitions (singletons ignored for the pronoun
/// and antecedent, kept as distractors). Per document the RNG stream is
/// derived from (seed, doc_id), so the output does not depend on threads.
std::vector<PCRInstance> extract_instances(const std::vector<Document>& docs, const ExtractOptions& options,
                                           Diagnostics* diag = nullptr);

void write_instances(std::ostream& out, const std::vector<PCRInstance>& instances);
std::vector<PCRInstance> parse_instances(std::istream& in, const std::string& name);
std::vector<PCRInstance> parse_instances(const std::filesystem::path& path);

/// Splits raw text into tokens: whitespace separates, punctuation stands alone.
using Splitter = std::function<std::vector<std::string>(const std::string&)>;
std::vector<std::string> default_split(const std::string& text);

/// WSC-style JSON lines: {"id", "text", "pronoun", "candidates": [c1, c2],
/// "label": 1|2, optional "pronoun_char": offset}. Spans are found by token
/// match; the pronoun defaults to its first occurrence after both candidates.
std::vector<PCRInstance> load_wsc_jsonl(const std::filesystem::path& path, const std::string& dataset,
                                        const Splitter& split = default_split);
std::vector<PCRInstance> load_wsc_jsonl(std::istream& in, const std::string& name, const std::string& dataset,
                                        const Splitter& split = default_split);

/// instance_id -> 1|2.
using Predictions = std::map<std::string, int>;
Predictions parse_predictions(std::istream& in, const std::string& name);
Predictions parse_predictions(const std::filesystem::path& path);

struct Accuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  std::size_t missing = 0;
  double accuracy = 0;
  double ci_low = 0;
  double ci_high = 0;
};

/// Wilson score interval at the given two-sided z (default 90%).
inline constexpr double kZ90 = 1.6448536269514722;
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n, double z = kZ90);

struct AccuracyReport {
  Accuracy overall;
  std::map<std::string, Accuracy> per_dataset;
};

/// Missing predictions count as wrong under `strict`, otherwise are skipped.
/// Predictions naming unknown instances and an empty instance list are errors.
AccuracyReport score_predictions(const std::vector<PCRInstance>& instances, const Predictions& predictions,
                                 bool strict);

/// The supervised choice when its predicted cluster has more than two
/// mentions, else the language-model choice.
int ensemble_select(int supervised_choice, int lm_choice, std::size_t predicted_cluster_size);

enum class AssumptionStatus { Holds, Violated, Indeterminate };
std::string_view to_string(AssumptionStatus status);

struct AssumptionCheck {
  double u_tc = 0, u_pc = 0, u_td = 0, u_pd = 0;
  AssumptionStatus status = AssumptionStatus::Indeterminate;

  bool holds() const { return status == AssumptionStatus::Holds; }
};

/// Compares the ordering of two systems on the challenge set (C) and the
/// general task (D). A tie on C is indeterminate; a tie on D alone violates.
AssumptionCheck check_assumption(double u_tc, double u_pc, double u_td, double u_pd);

struct Feature {
  std::string name;
  std::string target;
  std::string value;
};

struct PromptOptions {
  /// Prefix each run of same-speaker tokens with `SPEAKER: `.
  bool speakers = false;
};

/// Substitutes {context}, {pronoun}, {cand1}, {cand2}, {speaker} ({{ and }}
/// are literal braces) and prepends one `The NAME of "TARGET" is VALUE.` line
/// per feature, in order. Unknown placeholders are InputErrors.
std::string format_prompt(const PCRInstance& instance, const std::string& template_text,
                          const std::vector<Feature>& features = {}, const PromptOptions& options = {});

std::string span_text(const std::vector<std::string>& tokens, const Mention& m);

}  // namespace corefmeter
