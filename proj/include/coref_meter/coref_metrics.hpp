#pragma once

#include "coref_meter/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace corefmeter {

/// Numerators and denominators of one metric. Corpus (micro) scores sum
/// these across documents before dividing.
struct MetricCounts {
  double recall_num = 0;
  double recall_den = 0;
  double precision_num = 0;
  double precision_den = 0;

  MetricCounts& operator+=(const MetricCounts& other);
  bool operator==(const MetricCounts&) const = default;
};

struct MetricScore {
  double recall = 0;
  double precision = 0;
  double f1 = 0;
  /// Set when the corresponding denominator was zero and the score forced to 0.
  bool degenerate_recall = false;
  bool degenerate_precision = false;

  bool degenerate() const { return degenerate_recall || degenerate_precision; }
  bool operator==(const MetricScore&) const = default;
};

/// Harmonic mean, or 0 unless both inputs are positive.
double f1_of(double recall, double precision);
MetricScore to_score(const MetricCounts& counts);

MetricCounts muc_counts(const EntityPartition& gold, const EntityPartition& pred);
MetricCounts b3_counts(const EntityPartition& gold, const EntityPartition& pred);
MetricCounts ceaf_e_counts(const EntityPartition& gold, const EntityPartition& pred);

MetricScore muc_score(const EntityPartition& gold, const EntityPartition& pred);
MetricScore b3_score(const EntityPartition& gold, const EntityPartition& pred);
MetricScore ceaf_e_score(const EntityPartition& gold, const EntityPartition& pred);

using MentionFilter = std::function<bool(const Mention&)>;

/// B3 where recall sums only over gold mentions accepted by `gold_filter`
/// and precision only over predicted mentions accepted by `pred_filter`.
/// Cluster contexts stay unrestricted. `b3_counts` is this with both
/// filters accepting everything.
MetricCounts b3_counts_restricted(const EntityPartition& gold, const EntityPartition& pred,
                                  const MentionFilter& gold_filter, const MentionFilter& pred_filter);

struct CorefReport {
  MetricScore muc;
  MetricScore b3;
  MetricScore ceaf_e;
  double conll_f1 = 0;
  std::size_t gold_mentions = 0;
  std::size_t pred_mentions = 0;
};

/// Mean of the three F1 values, summed in ascending order so the result does
/// not depend on argument order.
double conll_f1(double a, double b, double c);
double conll_f1(const CorefReport& report);

struct ScoringOptions {
  bool keep_singletons = false;
  bool macro = false;
  std::size_t threads = 1;
};

struct DocumentScore {
  std::string doc_id;
  MetricCounts muc;
  MetricCounts b3;
  MetricCounts ceaf_e;
  CorefReport report;
};

/// Applies the singleton policy, then scores one document.
DocumentScore score_document(const std::string& doc_id, const EntityPartition& gold, const EntityPartition& pred,
                             const ScoringOptions& options = {});

struct CorpusScore {
  CorefReport overall;
  std::vector<DocumentScore> documents;
};

/// Micro by default: per-metric counts summed over documents. With
/// options.macro, per-document scores are averaged instead. Every document
/// must carry a predicted partition.
CorpusScore score_corpus(const std::vector<Document>& docs, const ScoringOptions& options = {});

/// Combines per-document results the same way score_corpus does.
CorefReport aggregate(const std::vector<DocumentScore>& documents, bool macro);

}  // namespace corefmeter
