#pragma once

#include "coref_meter/errors.hpp"
#include "coref_meter/hierarchy.hpp"
#include "coref_meter/triple_counts.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace corefmeter {

/// A model score; `value` is empty when the model is undefined for the input.
/// Fallbacks (e.g. an unseen verb scored 0) carry a flag.
struct PlausibilityScore {
  std::optional<double> value;
  std::vector<std::string> flags;
};

/// Count(s,v) Count(v,o) / Count(v)^2; 0 with flag `unseen-verb` when Count(v) = 0.
PlausibilityScore ngram_score(const TripleCounts& counts, const Triple& t);

/// An ordered pair of slots, e.g. (verb, object).
struct Relation {
  Slot first = Slot::Verb;
  Slot second = Slot::Object;

  Relation reversed() const { return {second, first}; }
};

/// log(Count(x,y) N / (Count(x) Count(y))), natural log. Undefined when any
/// count is zero.
std::optional<double> pmi_from_counts(double joint, double count_x, double count_y, double n);

/// PMI of x in relation.first and y in relation.second. Count(x) and Count(y)
/// are unigram counts and N = corpus_size(), so
/// pmi(x, y, r) == pmi(y, x, r.reversed()).
std::optional<double> pmi(const TripleCounts& counts, const std::string& x, const std::string& y,
                          const Relation& relation);

/// P(c | x) per verb and the prior P(c), over concepts of a hierarchy.
struct ConceptDistribution {
  std::map<std::string, std::map<std::string, double>> by_verb;
  std::map<std::string, double> prior;
  std::size_t dropped_words = 0;
};

/// Every (v, o, count) spreads count/|senses(o)| over each sense of o and all
/// of its retained ancestors; both the per-verb and the prior table are then
/// normalized. The prior uses every object occurrence.
ConceptDistribution build_concept_distribution(const TripleCounts& counts, const Hierarchy& hierarchy,
                                               Diagnostics* diag = nullptr);

/// KL(P(c|x) || P(c)) in nats; 0 for an unseen verb.
double selectional_strength(const ConceptDistribution& dist, const std::string& verb);
/// P(c|x) log(P(c|x)/P(c)) / SelStr(x); requires SelStr(x) > 0.
double selectional_association(const ConceptDistribution& dist, const std::string& verb, const std::string& concept_id);

/// Max selectional association over the senses of y and their ancestors.
/// Unknown y is an InputError; SelStr(x) = 0 gives 0 with `uninformative-verb`.
PlausibilityScore resnik_score(const ConceptDistribution& dist, const Hierarchy& hierarchy, const std::string& verb,
                               const std::string& word);

/// P(y|r,x) P(r|x) by maximum likelihood; 0 with `unseen-role` when Count(r,x) = 0.
PlausibilityScore pado_score(const RoleCounts& roles, const std::string& predicate, const std::string& argument,
                             const std::string& role);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

/// Σ μ(y')/Z cos(v_y, v_y') over the exemplars y' with weights μ. Undefined
/// when there are no exemplars; missing vectors are InputErrors.
PlausibilityScore exemplar_score(const WordVectors& vectors, const std::map<std::string, double>& seen,
                                 const std::string& word);

/// Arguments attested with `verb` in `slot`, weighted by frequency.
std::map<std::string, double> seen_arguments(const TripleCounts& counts, const std::string& verb, Slot slot);

enum class PerturbForm { Subject, Object, Both };
std::string_view to_string(PerturbForm form);

struct TrainingPair {
  Triple attested;
  Triple perturbed;
  PerturbForm form = PerturbForm::Subject;

  bool operator==(const TrainingPair&) const = default;
};

struct PairOptions {
  std::uint64_t seed = 0;
  std::size_t count = 0;
  /// Words seen fewer times than this in a slot are removed from that slot
  /// (with the triples that use them).
  std::int64_t min_position_count = 1;
  std::size_t threads = 1;
};

/// Pseudo-disambiguation pairs: attested events drawn by count, one of the
/// feasible perturbation forms chosen uniformly, replacements drawn by
/// positional frequency and redrawn until the perturbed event differs.
std::vector<TrainingPair> generate_pairs(const TripleCounts& counts, const PairOptions& options);

}  // namespace corefmeter
