#include "coref_meter/corpus_io.hpp"
#include "coref_meter/disagg_eval.hpp"
#include "coref_meter/report.hpp"

#include "../oracles.hpp"

#include <doctest.h>

using namespace corefmeter;

namespace {

EntityPartition make(std::vector<std::vector<std::size_t>> clusters) {
  EntityPartition p;
  for (const auto& c : clusters) {
    Entity e;
    for (auto t : c) e.push_back({t, t});
    p.entities.push_back(e);
  }
  normalize(p);
  return p;
}

TypeMap typed(const EntityPartition& p, std::set<std::size_t> of_type) {
  TypeMap out;
  for (const auto& m : all_mentions(p)) {
    TypedMention t;
    t.mention = m;
    if (of_type.contains(m.start)) t.types.insert(CoreferenceType::Copular);
    out[m] = t;
  }
  return out;
}

DisaggReport report_with(double overall_b3_f1, std::map<CoreferenceType, std::pair<double, std::size_t>> types) {
  DisaggReport r;
  r.overall.b3.f1 = overall_b3_f1;
  for (const auto& [t, v] : types) {
    TypedScore s;
    s.score.f1 = v.first;
    s.gold_mentions = v.second;
    r.per_type[t] = s;
  }
  return r;
}

}  // namespace

TEST_CASE("typed B3 sums only over typed mentions but keeps whole clusters") {
  const auto gold = make({{1, 2, 3}, {4, 5}});
  const auto pred = make({{1, 2}, {3, 4, 5}});
  const auto s = typed_b3(gold, pred, typed(gold, {3}), typed(pred, {3}), CoreferenceType::Copular);
  // Mention 3: gold cluster {1,2,3}, predicted {3,4,5}: overlap 1.
  CHECK(s.score.recall == doctest::Approx(1.0 / 3.0));
  CHECK(s.score.precision == doctest::Approx(1.0 / 3.0));
  CHECK(s.gold_mentions == 1);
  CHECK(s.pred_mentions == 1);

  const auto none = typed_b3(gold, pred, typed(gold, {}), typed(pred, {}), CoreferenceType::Copular);
  CHECK(none.score.degenerate());
  CHECK(none.gold_mentions == 0);

  // Untyped mentions and mentions missing from the map never match.
  auto g = typed(gold, {1, 2, 3, 4, 5});
  g[{1, 1}].untyped_reason = "no parse";
  g.erase({2, 2});
  const auto partial = typed_b3(gold, pred, g, typed(pred, {}), CoreferenceType::Copular);
  CHECK(partial.gold_mentions == 3);
}

TEST_CASE("generalization gap") {
  const auto a = report_with(0.826, {{CoreferenceType::Nested, {0.5, 10}}, {CoreferenceType::Copular, {0.4, 3}}});
  const auto b = report_with(0.699, {{CoreferenceType::Nested, {0.2, 8}}, {CoreferenceType::Copular, {0.3, 0}}});
  const auto gap = generalization_gap(a, b);
  CHECK(gap.agg == doctest::Approx(0.127).epsilon(1e-12));
  CHECK(gap.tgg.at(CoreferenceType::Nested) == doctest::Approx(0.3));
  CHECK_FALSE(gap.tgg.contains(CoreferenceType::Copular));
  CHECK(std::find(gap.incomparable.begin(), gap.incomparable.end(), CoreferenceType::Copular) !=
        gap.incomparable.end());
  CHECK(gap.highlighted == std::vector{CoreferenceType::Nested});  // |0.3 − 0.127| > 0.10

  const auto self = generalization_gap(a, a);
  CHECK(self.agg == 0.0);
  for (const auto& [t, v] : self.tgg) CHECK(v == 0.0);
}

TEST_CASE("disagg report JSON round trip") {
  auto docs = load_documents(COREF_METER_FIXTURES "/typing.jsonl", PartitionSource::Gold);
  merge_predictions(docs, load_documents(COREF_METER_FIXTURES "/typing_pred.jsonl", PartitionSource::Predicted));
  attach_dependencies(docs, parse_conllu(COREF_METER_FIXTURES "/typing.conllu"));
  const ScoringOptions options;
  const auto r = disaggregate(docs, type_documents(docs, options), options, "typing");
  const auto back = disagg_report_from_json(make_report("disagg", Json::object(), to_json(r), {}));
  CHECK(back.dataset == "typing");
  CHECK(back.overall.b3.f1 == r.overall.b3.f1);
  CHECK(back.per_type.at(CoreferenceType::Copular) == r.per_type.at(CoreferenceType::Copular));
}

TEST_CASE("permutation test: identical lists, shifts and exact enumeration") {
  std::vector<double> a = {0.2, 0.5, 0.1, 0.9, 0.4, 0.3, 0.8, 0.6, 0.7, 0.05};
  CHECK(permutation_test(a, a, 2000, 1).p_value == 1.0);

  std::vector<double> b = a;
  for (std::size_t i = 0; i < b.size(); i += 2) b[i] += 0.3;
  const double exact = oracle::exact_sign_flip_p(a, b);
  const auto est = permutation_test(a, b, 40000, 17);
  CHECK(est.p_value == doctest::Approx(exact).epsilon(0.15));

  std::vector<double> shifted(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) shifted[i] = a[i] + 10;
  CHECK(oracle::exact_sign_flip_p(a, shifted) == doctest::Approx(2.0 / 1024.0));

  CHECK_THROWS_AS(permutation_test(a, {1.0}, 10, 1), InputError);
}

TEST_CASE("permutation test does not depend on thread count") {
  std::vector<double> a(30), b(30);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = static_cast<double>(i % 7) / 7.0;
    b[i] = static_cast<double>((i * 3) % 11) / 11.0;
  }
  const auto one = permutation_test(a, b, 5000, 3, 1);
  const auto many = permutation_test(a, b, 5000, 3, 8);
  CHECK(one.at_least_as_extreme == many.at_least_as_extreme);
  CHECK(one.p_value == many.p_value);
}

TEST_CASE("system permutation test") {
  auto docs = load_documents(COREF_METER_FIXTURES "/corpus_gold.conll", PartitionSource::Gold);
  auto docs_b = docs;
  merge_predictions(docs, load_documents(COREF_METER_FIXTURES "/corpus_pred.conll", PartitionSource::Predicted));
  merge_predictions(docs_b, load_documents(COREF_METER_FIXTURES "/corpus_pred_b.conll", PartitionSource::Predicted));
  const auto a = score_corpus(docs).documents;
  const auto b = score_corpus(docs_b).documents;
  const auto self = permutation_test_systems(a, a, CorefMetric::Conll, 500, 1);
  CHECK(self.p_value == 1.0);
  const auto r = permutation_test_systems(a, b, CorefMetric::B3, 2000, 1, 1);
  CHECK(r.p_value > 0.0);
  CHECK(r.p_value <= 1.0);
  CHECK(r.observed == doctest::Approx(std::abs(score_corpus(docs).overall.b3.f1 - score_corpus(docs_b).overall.b3.f1)));
  CHECK(permutation_test_systems(a, b, CorefMetric::B3, 2000, 1, 4).at_least_as_extreme == r.at_least_as_extreme);
}
