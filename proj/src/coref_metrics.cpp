#include "coref_meter/coref_metrics.hpp"
#include "coref_meter/assignment.hpp"
#include "coref_meter/errors.hpp"
#include "coref_meter/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <set>

namespace corefmeter {

MetricCounts& MetricCounts::operator+=(const MetricCounts& other) {
  recall_num += other.recall_num;
  recall_den += other.recall_den;
  precision_num += other.precision_num;
  precision_den += other.precision_den;
  return *this;
}

double f1_of(double recall, double precision) {
  if (recall <= 0 || precision <= 0) return 0;
  return 2 * recall * precision / (recall + precision);
}

MetricScore to_score(const MetricCounts& c) {
  MetricScore s;
  if (c.recall_den > 0) {
    s.recall = c.recall_num / c.recall_den;
  } else {
    s.degenerate_recall = true;
  }
  if (c.precision_den > 0) {
    s.precision = c.precision_num / c.precision_den;
  } else {
    s.degenerate_precision = true;
  }
  s.f1 = f1_of(s.recall, s.precision);
  return s;
}

namespace {

// inter[i][j] = |gold_i ∩ pred_j|
std::vector<std::vector<std::size_t>> intersections(const EntityPartition& gold, const EntityPartition& pred) {
  const auto pred_index = entity_index(pred);
  std::vector<std::vector<std::size_t>> inter(gold.entities.size(), std::vector<std::size_t>(pred.entities.size(), 0));
  for (std::size_t i = 0; i < gold.entities.size(); ++i) {
    for (const auto& m : gold.entities[i]) {
      if (auto it = pred_index.find(m); it != pred_index.end()) ++inter[i][it->second];
    }
  }
  return inter;
}

// Σ (|S| − |p(S)|) and Σ (|S| − 1) over key entities S partitioned by response.
std::pair<double, double> muc_direction(const EntityPartition& key, const EntityPartition& response) {
  const auto response_index = entity_index(response);
  std::int64_t num = 0;
  std::int64_t den = 0;
  for (const auto& entity : key.entities) {
    std::set<std::size_t> parts;
    std::int64_t unaligned = 0;
    for (const auto& m : entity) {
      if (auto it = response_index.find(m); it != response_index.end()) {
        parts.insert(it->second);
      } else {
        ++unaligned;  // each missing mention is its own part
      }
    }
    const auto size = static_cast<std::int64_t>(entity.size());
    num += size - (static_cast<std::int64_t>(parts.size()) + unaligned);
    den += size - 1;
  }
  return {static_cast<double>(num), static_cast<double>(den)};
}

std::pair<double, double> b3_direction(const EntityPartition& key, const EntityPartition& response,
                                       const MentionFilter& filter) {
  const auto key_index = entity_index(key);
  const auto response_index = entity_index(response);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> overlap;
  for (const auto& [m, k] : key_index) {
    if (auto it = response_index.find(m); it != response_index.end()) ++overlap[{k, it->second}];
  }
  double sum = 0;
  std::size_t count = 0;
  for (const auto& [m, k] : key_index) {  // ascending mention order
    if (filter && !filter(m)) continue;
    ++count;
    auto it = response_index.find(m);
    if (it == response_index.end()) continue;
    const auto inter = overlap.at({k, it->second});
    sum += static_cast<double>(inter) / static_cast<double>(key.entities[k].size());
  }
  return {sum, static_cast<double>(count)};
}

constexpr std::uint64_t kExactLimit = std::uint64_t{1} << 53;

// Σ φ4 over the optimal alignment.
double ceaf_similarity(const EntityPartition& gold, const EntityPartition& pred) {
  const auto k = gold.entities.size();
  const auto l = pred.entities.size();
  if (k == 0 || l == 0) return 0;
  const auto inter = intersections(gold, pred);

  // φ4 = 2|∩| / (|E| + |E'|). Scale every weight by the lcm of the
  // denominators so the matching runs on exact integers when that fits.
  std::uint64_t lcm = 1;
  bool exact = true;
  for (std::size_t i = 0; i < k && exact; ++i) {
    for (std::size_t j = 0; j < l; ++j) {
      if (inter[i][j] == 0) continue;
      const std::uint64_t d = gold.entities[i].size() + pred.entities[j].size();
      const std::uint64_t g = std::gcd(lcm, d);
      if (lcm / g > kExactLimit / d) {
        exact = false;
        break;
      }
      lcm = lcm / g * d;
    }
  }
  const std::uint64_t pairs = std::min(k, l);
  if (exact && lcm <= kExactLimit / pairs) {
    std::vector<std::vector<std::int64_t>> w(k, std::vector<std::int64_t>(l, 0));
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < l; ++j) {
        if (inter[i][j] == 0) continue;
        const std::uint64_t d = gold.entities[i].size() + pred.entities[j].size();
        w[i][j] = static_cast<std::int64_t>(2 * inter[i][j] * (lcm / d));
      }
    }
    const auto match = max_weight_assignment(w, l);
    std::int64_t total = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (match[i] < l) total += w[i][match[i]];
    }
    return static_cast<double>(total) / static_cast<double>(lcm);
  }

  std::vector<std::vector<double>> w(k, std::vector<double>(l, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < l; ++j) {
      w[i][j] = 2.0 * static_cast<double>(inter[i][j]) /
                static_cast<double>(gold.entities[i].size() + pred.entities[j].size());
    }
  }
  const auto match = max_weight_assignment(w, l);
  double total = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (match[i] < l) total += w[i][match[i]];
  }
  return total;
}

}  // namespace

MetricCounts muc_counts(const EntityPartition& gold, const EntityPartition& pred) {
  const auto [rn, rd] = muc_direction(gold, pred);
  const auto [pn, pd] = muc_direction(pred, gold);
  return {rn, rd, pn, pd};
}

MetricCounts b3_counts_restricted(const EntityPartition& gold, const EntityPartition& pred,
                                  const MentionFilter& gold_filter, const MentionFilter& pred_filter) {
  const auto [rn, rd] = b3_direction(gold, pred, gold_filter);
  const auto [pn, pd] = b3_direction(pred, gold, pred_filter);
  return {rn, rd, pn, pd};
}

MetricCounts b3_counts(const EntityPartition& gold, const EntityPartition& pred) {
  return b3_counts_restricted(gold, pred, nullptr, nullptr);
}

MetricCounts ceaf_e_counts(const EntityPartition& gold, const EntityPartition& pred) {
  const double sim = ceaf_similarity(gold, pred);
  return {sim, static_cast<double>(gold.entities.size()), sim, static_cast<double>(pred.entities.size())};
}

MetricScore muc_score(const EntityPartition& gold, const EntityPartition& pred) {
  return to_score(muc_counts(gold, pred));
}
MetricScore b3_score(const EntityPartition& gold, const EntityPartition& pred) {
  return to_score(b3_counts(gold, pred));
}
MetricScore ceaf_e_score(const EntityPartition& gold, const EntityPartition& pred) {
  return to_score(ceaf_e_counts(gold, pred));
}

double conll_f1(double a, double b, double c) {
  std::array<double, 3> v{a, b, c};
  std::sort(v.begin(), v.end());
  return (v[0] + v[1] + v[2]) / 3.0;
}

double conll_f1(const CorefReport& report) { return conll_f1(report.muc.f1, report.b3.f1, report.ceaf_e.f1); }

DocumentScore score_document(const std::string& doc_id, const EntityPartition& gold, const EntityPartition& pred,
                             const ScoringOptions& options) {
  EntityPartition g = options.keep_singletons ? gold : without_singletons(gold);
  EntityPartition p = options.keep_singletons ? pred : without_singletons(pred);
  normalize(g);
  normalize(p);
  DocumentScore out;
  out.doc_id = doc_id;
  out.muc = muc_counts(g, p);
  out.b3 = b3_counts(g, p);
  out.ceaf_e = ceaf_e_counts(g, p);
  out.report.muc = to_score(out.muc);
  out.report.b3 = to_score(out.b3);
  out.report.ceaf_e = to_score(out.ceaf_e);
  out.report.conll_f1 = conll_f1(out.report);
  out.report.gold_mentions = mention_count(g);
  out.report.pred_mentions = mention_count(p);
  return out;
}

CorefReport aggregate(const std::vector<DocumentScore>& documents, bool macro) {
  CorefReport out;
  for (const auto& d : documents) {
    out.gold_mentions += d.report.gold_mentions;
    out.pred_mentions += d.report.pred_mentions;
  }
  if (!macro) {
    MetricCounts muc, b3, ceaf;
    for (const auto& d : documents) {
      muc += d.muc;
      b3 += d.b3;
      ceaf += d.ceaf_e;
    }
    out.muc = to_score(muc);
    out.b3 = to_score(b3);
    out.ceaf_e = to_score(ceaf);
  } else {
    auto average = [&](auto member) {
      MetricScore s;
      if (documents.empty()) {
        s.degenerate_recall = s.degenerate_precision = true;
        return s;
      }
      for (const auto& d : documents) {
        const MetricScore& m = d.report.*member;
        s.recall += m.recall;
        s.precision += m.precision;
        s.f1 += m.f1;
        s.degenerate_recall = s.degenerate_recall || m.degenerate_recall;
        s.degenerate_precision = s.degenerate_precision || m.degenerate_precision;
      }
      const auto n = static_cast<double>(documents.size());
      s.recall /= n;
      s.precision /= n;
      s.f1 /= n;
      return s;
    };
    out.muc = average(&CorefReport::muc);
    out.b3 = average(&CorefReport::b3);
    out.ceaf_e = average(&CorefReport::ceaf_e);
  }
  out.conll_f1 = conll_f1(out);
  return out;
}

CorpusScore score_corpus(const std::vector<Document>& docs, const ScoringOptions& options) {
  CorpusScore out;
  out.documents.resize(docs.size());
  for (const auto& doc : docs) {
    if (!doc.predicted) throw InputError(fmt::format("{}: no predicted partition", doc.doc_id));
  }
  parallel_for(docs.size(), options.threads, [&](std::size_t i) {
    out.documents[i] = score_document(docs[i].doc_id, docs[i].gold, *docs[i].predicted, options);
  });
  out.overall = aggregate(out.documents, options.macro);
  return out;
}

}  // namespace corefmeter
