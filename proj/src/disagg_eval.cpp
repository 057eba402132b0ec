#include "coref_meter/disagg_eval.hpp"
#include "coref_meter/errors.hpp"
#include "coref_meter/parallel.hpp"
#include "coref_meter/rng.hpp"

#include <fmt/format.h>

#include <cmath>

namespace corefmeter {

namespace {

constexpr std::uint64_t kChunk = 1024;

MentionFilter type_filter(const TypeMap& types, CoreferenceType t) {
  return [&types, t](const Mention& m) {
    auto it = types.find(m);
    return it != types.end() && !it->second.untyped() && it->second.has(t);
  };
}

bool extreme(double stat, double observed) { return stat >= observed - 1e-12 * std::max(1.0, std::abs(observed)); }

// Runs `iterations` sign-flip draws in chunks; draw(rng) returns one statistic.
template <class Draw>
std::uint64_t count_extreme(std::uint64_t iterations, std::uint64_t seed, std::size_t threads, double observed,
                            Draw draw) {
  const std::uint64_t chunks = (iterations + kChunk - 1) / kChunk;
  std::vector<std::uint64_t> hits(chunks, 0);
  parallel_for(chunks, threads, [&](std::size_t c) {
    Rng rng(derive_seed(seed, c));
    const std::uint64_t begin = c * kChunk;
    const std::uint64_t end = std::min(iterations, begin + kChunk);
    std::uint64_t local = 0;
    for (std::uint64_t i = begin; i < end; ++i) {
      if (extreme(draw(rng), observed)) ++local;
    }
    hits[c] = local;
  });
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  return total;
}

struct SystemTotals {
  MetricCounts muc, b3, ceaf;
  void add(const DocumentScore& d) {
    muc += d.muc;
    b3 += d.b3;
    ceaf += d.ceaf_e;
  }
  double f1(CorefMetric metric) const {
    switch (metric) {
      case CorefMetric::Muc: return to_score(muc).f1;
      case CorefMetric::B3: return to_score(b3).f1;
      case CorefMetric::CeafE: return to_score(ceaf).f1;
      case CorefMetric::Conll: return conll_f1(to_score(muc).f1, to_score(b3).f1, to_score(ceaf).f1);
    }
    return 0;
  }
};

}  // namespace

MetricCounts typed_b3_counts(const EntityPartition& gold, const EntityPartition& pred, const TypeMap& gold_types,
                             const TypeMap& pred_types, CoreferenceType t) {
  return b3_counts_restricted(gold, pred, type_filter(gold_types, t), type_filter(pred_types, t));
}

TypedScore typed_b3(const EntityPartition& gold, const EntityPartition& pred, const TypeMap& gold_types,
                    const TypeMap& pred_types, CoreferenceType t) {
  const auto counts = typed_b3_counts(gold, pred, gold_types, pred_types, t);
  return {to_score(counts), static_cast<std::size_t>(counts.recall_den),
          static_cast<std::size_t>(counts.precision_den)};
}

std::vector<DocumentTypes> type_documents(const std::vector<Document>& docs, const ScoringOptions& options,
                                          const TypingOptions& typing, Diagnostics* diag) {
  std::vector<DocumentTypes> out(docs.size());
  std::vector<Diagnostics> local(docs.size());
  parallel_for(docs.size(), options.threads, [&](std::size_t i) {
    const auto& doc = docs[i];
    if (!doc.predicted) throw InputError(fmt::format("{}: no predicted partition", doc.doc_id));
    const auto gold = options.keep_singletons ? doc.gold : without_singletons(doc.gold);
    const auto pred = options.keep_singletons ? *doc.predicted : without_singletons(*doc.predicted);
    out[i].gold = type_partition(doc, gold, typing, &local[i]);
    out[i].pred = type_partition(doc, pred, typing, &local[i]);
  });
  if (diag) {
    for (const auto& d : local) diag->merge(d);
  }
  return out;
}

DisaggReport disaggregate(const std::vector<Document>& docs, const std::vector<DocumentTypes>& types,
                          const ScoringOptions& options, const std::string& dataset) {
  if (types.size() != docs.size()) throw InvariantError("type maps do not match documents");
  DisaggReport report;
  report.dataset = dataset;
  report.overall = score_corpus(docs, options).overall;

  constexpr std::size_t kTypes = std::size(kAllTypes);
  std::vector<std::array<MetricCounts, kTypes>> per_doc(docs.size());
  parallel_for(docs.size(), options.threads, [&](std::size_t i) {
    const auto gold = options.keep_singletons ? docs[i].gold : without_singletons(docs[i].gold);
    const auto pred = options.keep_singletons ? *docs[i].predicted : without_singletons(*docs[i].predicted);
    for (std::size_t k = 0; k < kTypes; ++k) {
      per_doc[i][k] = typed_b3_counts(gold, pred, types[i].gold, types[i].pred, kAllTypes[k]);
    }
  });
  for (std::size_t k = 0; k < kTypes; ++k) {
    MetricCounts total;
    for (const auto& d : per_doc) total += d[k];
    report.per_type[kAllTypes[k]] = {to_score(total), static_cast<std::size_t>(total.recall_den),
                                     static_cast<std::size_t>(total.precision_den)};
  }
  for (const auto& t : types) {
    for (const auto& [m, tm] : t.gold) report.untyped_gold += tm.untyped();
    for (const auto& [m, tm] : t.pred) report.untyped_pred += tm.untyped();
  }
  return report;
}

GapReport generalization_gap(const DisaggReport& in_domain, const DisaggReport& out_domain, double threshold) {
  GapReport gap;
  gap.threshold = threshold;
  gap.agg = std::abs(in_domain.overall.b3.f1 - out_domain.overall.b3.f1);
  for (auto t : kAllTypes) {
    auto a = in_domain.per_type.find(t);
    auto b = out_domain.per_type.find(t);
    const bool usable = a != in_domain.per_type.end() && b != out_domain.per_type.end() &&
                        a->second.gold_mentions > 0 && b->second.gold_mentions > 0;
    if (!usable) {
      gap.incomparable.push_back(t);
      continue;
    }
    const double tgg = std::abs(a->second.score.f1 - b->second.score.f1);
    gap.tgg[t] = tgg;
    if (std::abs(tgg - gap.agg) > threshold) gap.highlighted.push_back(t);
  }
  return gap;
}

PermutationResult permutation_test(const std::vector<double>& a, const std::vector<double>& b,
                                   std::uint64_t iterations, std::uint64_t seed, std::size_t threads) {
  if (a.size() != b.size()) {
    throw InputError(fmt::format("paired lists differ in length ({} vs {})", a.size(), b.size()));
  }
  if (a.empty()) throw InputError("paired lists are empty");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double n = static_cast<double>(d.size());
  double sum = 0;
  for (double x : d) sum += x;
  PermutationResult r;
  r.observed = std::abs(sum / n);
  r.iterations = iterations;
  r.at_least_as_extreme = count_extreme(iterations, seed, threads, r.observed, [&](Rng& rng) {
    double s = 0;
    for (double x : d) s += rng.coin() ? -x : x;
    return std::abs(s / n);
  });
  r.p_value = static_cast<double>(1 + r.at_least_as_extreme) / static_cast<double>(iterations + 1);
  return r;
}

std::string_view to_string(CorefMetric metric) {
  switch (metric) {
    case CorefMetric::Muc: return "muc";
    case CorefMetric::B3: return "b3";
    case CorefMetric::CeafE: return "ceaf_e";
    case CorefMetric::Conll: return "conll";
  }
  return "?";
}

std::optional<CorefMetric> parse_coref_metric(std::string_view text) {
  for (auto m : {CorefMetric::Muc, CorefMetric::B3, CorefMetric::CeafE, CorefMetric::Conll}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

PermutationResult permutation_test_systems(const std::vector<DocumentScore>& a, const std::vector<DocumentScore>& b,
                                           CorefMetric metric, std::uint64_t iterations, std::uint64_t seed,
                                           std::size_t threads) {
  if (a.size() != b.size()) {
    throw InputError(fmt::format("systems scored on different document counts ({} vs {})", a.size(), b.size()));
  }
  if (a.empty()) throw InputError("no documents to compare");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].doc_id != b[i].doc_id) {
      throw InputError(fmt::format("document {} differs between systems ('{}' vs '{}')", i, a[i].doc_id, b[i].doc_id));
    }
  }
  SystemTotals ta, tb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ta.add(a[i]);
    tb.add(b[i]);
  }
  PermutationResult r;
  r.observed = std::abs(ta.f1(metric) - tb.f1(metric));
  r.iterations = iterations;
  r.at_least_as_extreme = count_extreme(iterations, seed, threads, r.observed, [&](Rng& rng) {
    SystemTotals pa, pb;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (rng.coin()) {
        pa.add(b[i]);
        pb.add(a[i]);
      } else {
        pa.add(a[i]);
        pb.add(b[i]);
      }
    }
    return std::abs(pa.f1(metric) - pb.f1(metric));
  });
  r.p_value = static_cast<double>(1 + r.at_least_as_extreme) / static_cast<double>(iterations + 1);
  return r;
}

}  // namespace corefmeter
