#pragma once

#include "coref_meter/coref_metrics.hpp"
#include "coref_meter/mention_typing.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace corefmeter {

struct TypedScore {
  MetricScore score;
  std::size_t gold_mentions = 0;
  std::size_t pred_mentions = 0;

  bool operator==(const TypedScore&) const = default;
};

/// B3 restricted to mentions of type `t`: recall over typed gold mentions,
/// precision over typed predicted mentions, clusters unrestricted. Mentions
/// missing from a type map or untyped never match.
TypedScore typed_b3(const EntityPartition& gold, const EntityPartition& pred, const TypeMap& gold_types,
                    const TypeMap& pred_types, CoreferenceType t);
MetricCounts typed_b3_counts(const EntityPartition& gold, const EntityPartition& pred, const TypeMap& gold_types,
                             const TypeMap& pred_types, CoreferenceType t);

struct DisaggReport {
  std::string dataset;
  CorefReport overall;
  std::map<CoreferenceType, TypedScore> per_type;
  std::size_t untyped_gold = 0;
  std::size_t untyped_pred = 0;
};

struct DocumentTypes {
  TypeMap gold;
  TypeMap pred;
};

/// Scores a corpus overall and per type. `types[i]` holds the type maps of
/// docs[i] (both over singleton-filtered partitions unless
/// options.keep_singletons). Typed scores are micro-averaged.
DisaggReport disaggregate(const std::vector<Document>& docs, const std::vector<DocumentTypes>& types,
                          const ScoringOptions& options, const std::string& dataset = {});

/// Types both partitions of every document from its dependency trees.
std::vector<DocumentTypes> type_documents(const std::vector<Document>& docs, const ScoringOptions& options,
                                          const TypingOptions& typing = {}, Diagnostics* diag = nullptr);

struct GapReport {
  double agg = 0;
  std::map<CoreferenceType, double> tgg;
  std::vector<CoreferenceType> incomparable;
  /// Types with |TGG − AGG| > threshold.
  std::vector<CoreferenceType> highlighted;
  double threshold = 0.10;
};

/// Absolute B3 F1 differences, overall and per type. A type with no typed
/// mentions on either side is listed as incomparable.
GapReport generalization_gap(const DisaggReport& in_domain, const DisaggReport& out_domain, double threshold = 0.10);

struct PermutationResult {
  double p_value = 1;
  double observed = 0;
  std::uint64_t at_least_as_extreme = 0;
  std::uint64_t iterations = 0;
};

/// Two-sided paired sign-flip test on per-item reals; statistic |mean(a − b)|.
/// p = (1 + #{perm stat ≥ observed}) / (iterations + 1). Iterations are
/// split into fixed-size chunks with their own derived RNG streams, so the
/// result does not depend on `threads`.
PermutationResult permutation_test(const std::vector<double>& a, const std::vector<double>& b,
                                   std::uint64_t iterations, std::uint64_t seed, std::size_t threads = 1);

enum class CorefMetric { Muc, B3, CeafE, Conll };
std::string_view to_string(CorefMetric metric);
std::optional<CorefMetric> parse_coref_metric(std::string_view text);

/// Paired test between two systems scored on the same documents. Each
/// permutation swaps the systems' counts on a random subset of documents and
/// recomputes the corpus (micro) F1 difference.
PermutationResult permutation_test_systems(const std::vector<DocumentScore>& a, const std::vector<DocumentScore>& b,
                                           CorefMetric metric, std::uint64_t iterations, std::uint64_t seed,
                                           std::size_t threads = 1);

}  // namespace corefmeter
