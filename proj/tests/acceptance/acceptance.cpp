// Runs every acceptance criterion and prints one PASS/FAIL line for each.
// Exit status is non-zero when any criterion fails.

#include "coref_meter/cli.hpp"
#include "coref_meter/consistency.hpp"
#include "coref_meter/coref_metrics.hpp"
#include "coref_meter/corpus_io.hpp"
#include "coref_meter/disagg_eval.hpp"
#include "coref_meter/hierarchy.hpp"
#include "coref_meter/pcr_bench.hpp"
#include "coref_meter/plausibility.hpp"
#include "coref_meter/report.hpp"

#include "../oracles.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <unistd.h>

namespace fs = std::filesystem;
using namespace corefmeter;

namespace {

const fs::path kFixtures = COREF_METER_FIXTURES;

// Collects the first few failures of one criterion.
struct Check {
  std::vector<std::string> failures;
  std::string note;

  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok && failures.size() == 5) failures.push_back("...");
  }
  bool ok() const { return failures.empty(); }
};

bool same(const MetricCounts& a, const oracle::Counts& b) {
  return a.recall_num == b.recall_num && a.recall_den == b.recall_den && a.precision_num == b.precision_num &&
         a.precision_den == b.precision_den;
}

std::string show(const MetricCounts& c) {
  return fmt::format("({}/{}, {}/{})", c.recall_num, c.recall_den, c.precision_num, c.precision_den);
}

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

// ---------------------------------------------------------------------------

Check metric_oracles() {
  Check c;
  oracle::PartitionGen gen(20240101);
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 1000; ++i) {
    const auto [gold, pred] = gen.document(8, 4);
    const auto muc = muc_counts(gold, pred);
    const auto b3 = b3_counts(gold, pred);
    const auto ceaf = ceaf_e_counts(gold, pred);
    c.expect(same(muc, oracle::muc(gold, pred)), fmt::format("doc {}: MUC {}", i, show(muc)));
    c.expect(same(b3, oracle::b3(gold, pred)), fmt::format("doc {}: B3 {}", i, show(b3)));
    c.expect(same(ceaf, oracle::ceaf_e(gold, pred)), fmt::format("doc {}: CEAF_e {}", i, show(ceaf)));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.expect(secs < 10.0, fmt::format("took {:.2f} s", secs));
  c.note = fmt::format("1000 documents, {:.2f} s", secs);
  return c;
}

Check identity_and_symmetry() {
  Check c;
  oracle::PartitionGen gen(77);
  int identity_trials = 0;
  for (int i = 0; i < 200; ++i) {
    auto [gold, pred] = gen.document(8, 4);
    // Identity: needs at least one non-singleton gold entity.
    const auto g = without_singletons(gold);
    if (!g.entities.empty()) {
      ++identity_trials;
      for (const auto& s : {muc_score(g, g), b3_score(g, g), ceaf_e_score(g, g)}) {
        c.expect(s.recall == 1.0 && s.precision == 1.0 && s.f1 == 1.0, fmt::format("trial {}: identity", i));
      }
    }
    using Fn = MetricScore (*)(const EntityPartition&, const EntityPartition&);
    for (Fn f : {Fn{muc_score}, Fn{b3_score}, Fn{ceaf_e_score}}) {
      const auto ab = f(gold, pred);
      const auto ba = f(pred, gold);
      c.expect(ab.recall == ba.precision && ab.precision == ba.recall && ab.f1 == ba.f1,
               fmt::format("trial {}: swap", i));
    }
  }
  c.note = fmt::format("200 trials, {} with identity", identity_trials);
  return c;
}

std::vector<Document> fixture_documents() {
  auto conll = load_documents(kFixtures / "corpus_gold.conll", PartitionSource::Gold);
  merge_predictions(conll, load_documents(kFixtures / "corpus_pred.conll", PartitionSource::Predicted));
  auto typing = load_documents(kFixtures / "typing.jsonl", PartitionSource::Gold);
  merge_predictions(typing, load_documents(kFixtures / "typing_pred.jsonl", PartitionSource::Predicted));
  conll.insert(conll.end(), typing.begin(), typing.end());
  return conll;
}

Check typed_reduction() {
  Check c;
  const auto docs = fixture_documents();
  const auto always = [](const Mention&) { return true; };
  std::vector<DocumentTypes> all_typed;
  for (const auto& d : docs) {
    for (bool keep : {false, true}) {
      const auto g = keep ? d.gold : without_singletons(d.gold);
      const auto p = keep ? *d.predicted : without_singletons(*d.predicted);
      c.expect(b3_counts_restricted(g, p, always, always) == b3_counts(g, p), d.doc_id + ": restricted counts");
      TypeMap gt, pt;
      for (const auto& m : all_mentions(g)) gt[m] = TypedMention{m, {CoreferenceType::Nested}, {}, {}, {}};
      for (const auto& m : all_mentions(p)) pt[m] = TypedMention{m, {CoreferenceType::Nested}, {}, {}, {}};
      c.expect(typed_b3(g, p, gt, pt, CoreferenceType::Nested).score == b3_score(g, p), d.doc_id + ": typed B3");
      if (!keep) all_typed.push_back({gt, pt});
    }
  }
  const ScoringOptions options;
  const auto report = disaggregate(docs, all_typed, options, "fixtures");
  c.expect(report.per_type.at(CoreferenceType::Nested).score == report.overall.b3, "corpus typed B3");

  // Gaps of a report against itself, with real typings from the parses.
  auto typing = load_documents(kFixtures / "typing.jsonl", PartitionSource::Gold);
  merge_predictions(typing, load_documents(kFixtures / "typing_pred.jsonl", PartitionSource::Predicted));
  attach_dependencies(typing, parse_conllu(kFixtures / "typing.conllu"));
  const auto typed = disaggregate(typing, type_documents(typing, options), options, "typing");
  for (const auto& r : {report, typed}) {
    const auto gap = generalization_gap(r, r);
    c.expect(gap.agg == 0.0, r.dataset + ": AGG");
    for (const auto& [t, v] : gap.tgg) c.expect(v == 0.0, fmt::format("{}: TGG {}", r.dataset, to_string(t)));
    c.expect(gap.highlighted.empty(), r.dataset + ": highlighted");
  }
  c.note = fmt::format("{} documents", docs.size());
  return c;
}

Check hand_values() {
  Check c;
  const auto muc = muc_score(make({{1, 2, 3}}), make({{1, 2}, {3}}));
  c.expect(std::abs(muc.recall - 0.5) <= 1e-12, fmt::format("MUC recall {}", muc.recall));
  const auto b3 = b3_score(make({{1, 2}}), make({{1, 2, 3}}));
  c.expect(std::abs(b3.recall - 1.0) <= 1e-12, fmt::format("B3 R {}", b3.recall));
  c.expect(std::abs(b3.precision - 4.0 / 9.0) <= 1e-12, fmt::format("B3 P {}", b3.precision));
  c.expect(std::abs(b3.f1 - 8.0 / 13.0) <= 1e-12, fmt::format("B3 F1 {}", b3.f1));
  c.note = fmt::format("MUC R={}, B3 R={} P={:.6f} F1={:.6f}", muc.recall, b3.recall, b3.precision, b3.f1);
  return c;
}

// ---------------------------------------------------------------------------
// Synthetic PCR corpus. Six document shapes, five documents each; the
// expected instances follow from the shapes alone.

struct ExpectedInstance {
  std::string id;
  Mention pronoun;     // document coordinates
  Mention antecedent;  // document coordinates
  std::set<Mention> distractors;
};

struct PcrCorpus {
  std::vector<Document> docs;
  std::vector<ExpectedInstance> expected;
  std::map<std::string, std::size_t> counters;
};

Document pcr_doc(const std::string& id, const std::string& genre, const std::vector<std::string>& sentences,
                 std::vector<std::vector<Mention>> clusters) {
  Document d;
  d.doc_id = id;
  d.genre = genre;
  for (const auto& s : sentences) {
    std::istringstream in(s);
    std::vector<std::string> toks;
    std::string w;
    while (in >> w) toks.push_back(w);
    d.add_sentence(toks);
  }
  for (auto& c : clusters) d.gold.entities.push_back(c);
  normalize(d.gold);
  return d;
}

PcrCorpus pcr_corpus() {
  const std::vector<std::string> nouns = {"farmer", "teacher", "doctor", "sailor", "baker",
                                          "judge",  "miner",   "pilot",  "tailor", "guard"};
  PcrCorpus c;
  auto& k = c.counters;
  for (int i = 0; i < 30; ++i) {
    const auto& n1 = nouns[i % nouns.size()];
    const auto& n2 = nouns[(i + 3) % nouns.size()];
    const auto& n3 = nouns[(i + 7) % nouns.size()];
    const std::string id = fmt::format("synthetic/{:02d}:000", i);
    const std::string genre = i % 2 ? "bc" : "nw";
    switch (i % 6) {
      case 0:  // one pronoun, one antecedent, one distractor
        c.docs.push_back(pcr_doc(id, genre, {"the " + n1 + " saw the " + n2 + " .", "he smiled ."},
                                 {{{0, 1}, {6, 6}}, {{3, 4}}}));
        c.expected.push_back({id + ":6", {6, 6}, {0, 1}, {{3, 4}}});
        k["pcr_pronouns"] += 1;
        k["pcr_instances"] += 1;
        break;
      case 1:  // nothing else in the window
        c.docs.push_back(pcr_doc(id, genre, {"the " + n1 + " smiled .", "he left ."}, {{{0, 1}, {4, 4}}}));
        k["pcr_pronouns"] += 1;
        k["pcr_skipped_no_distractor"] += 1;
        break;
      case 2:  // antecedent three sentences back
        c.docs.push_back(pcr_doc(id, genre, {"the " + n1 + " ruled .", "rain fell .", "snow fell .", "he slept ."},
                                 {{{0, 1}, {10, 10}}}));
        k["pcr_pronouns"] += 1;
        k["pcr_skipped_no_antecedent"] += 1;
        break;
      case 3:  // two in-window antecedents
        c.docs.push_back(pcr_doc(id, genre,
                                 {"the " + n1 + " met the " + n2 + " .", "the " + n1 + " bowed .", "he smiled ."},
                                 {{{0, 1}, {6, 7}, {10, 10}}, {{3, 4}}}));
        k["pcr_pronouns"] += 1;
        k["pcr_skipped_multiple_antecedents"] += 1;
        break;
      case 4:  // cataphora; a pronoun whose only antecedent is a pronoun
        c.docs.push_back(pcr_doc(id, genre,
                                 {"when she arrived the " + n1 + " smiled .", "she left .",
                                  "she returned with the " + n2 + " ."},
                                 {{{1, 1}, {3, 4}}, {{7, 7}, {10, 10}}, {{13, 14}}}));
        k["pcr_pronouns"] += 3;
        k["pcr_skipped_antecedent_not_preceding"] += 1;
        k["pcr_skipped_no_antecedent"] += 1;
        k["pcr_skipped_non_nominal"] += 1;
        break;
      default:  // two distractors; a second pronoun whose antecedent left the window
        c.docs.push_back(pcr_doc(id, genre,
                                 {"the " + n1 + " saw the " + n2 + " .", "the " + n3 + " ran .", "he laughed .",
                                  "she cried ."},
                                 {{{0, 1}, {10, 10}}, {{3, 4}, {13, 13}}, {{6, 7}}}));
        c.expected.push_back({id + ":10", {10, 10}, {0, 1}, {{3, 4}, {6, 7}}});
        k["pcr_pronouns"] += 2;
        k["pcr_instances"] += 1;
        k["pcr_skipped_no_antecedent"] += 1;
        break;
    }
  }
  return c;
}

std::string dump_instances(const std::vector<PCRInstance>& instances) {
  std::ostringstream out;
  write_instances(out, instances);
  return out.str();
}

Check pcr_extraction() {
  Check c;
  const auto corpus = pcr_corpus();
  ExtractOptions options;
  options.seed = 42;
  Diagnostics diag;
  const auto got = extract_instances(corpus.docs, options, &diag);
  c.expect(got.size() == corpus.expected.size(),
           fmt::format("{} instances, expected {}", got.size(), corpus.expected.size()));
  for (std::size_t i = 0; i < std::min(got.size(), corpus.expected.size()); ++i) {
    const auto& g = got[i];
    const auto& e = corpus.expected[i];
    c.expect(g.instance_id == e.id, fmt::format("instance {} id {}", i, g.instance_id));
    auto doc_span = [&](const Mention& m) { return Mention{m.start + g.window_start, m.end + g.window_start}; };
    c.expect(doc_span(g.pronoun) == e.pronoun, e.id + ": pronoun");
    c.expect(g.label == 1 || g.label == 2, e.id + ": label");
    const auto a = doc_span(g.candidates[g.label - 1]);
    const auto b = doc_span(g.candidates[2 - g.label]);
    c.expect(a == e.antecedent, e.id + ": antecedent");
    c.expect(e.distractors.contains(b), e.id + ": distractor");
    // Window: the pronoun's sentence and up to two before it.
    const auto& doc = *std::find_if(corpus.docs.begin(), corpus.docs.end(),
                                    [&](const Document& d) { return d.doc_id == g.doc_id; });
    const auto s = doc.sentence_of(e.pronoun.start);
    const auto first = s >= 2 ? s - 2 : 0;
    c.expect(g.window_start == doc.sentence_begin(first) &&
                 g.tokens.size() == doc.sentence_end(s) - doc.sentence_begin(first),
             e.id + ": window");
    c.expect(g.dataset == doc.genre, e.id + ": dataset");
  }
  for (const auto& [key, value] : corpus.counters) {
    const auto it = diag.counters.find(key);
    c.expect(it != diag.counters.end() && it->second == value, fmt::format("counter {}", key));
  }
  for (const auto& [key, value] : diag.counters) {
    c.expect(corpus.counters.contains(key), fmt::format("unexpected counter {}={}", key, value));
  }

  const auto first = dump_instances(got);
  c.expect(dump_instances(extract_instances(corpus.docs, options)) == first, "rerun differs");
  options.threads = 4;
  c.expect(dump_instances(extract_instances(corpus.docs, options)) == first, "4 threads differ");
  c.note = fmt::format("30 documents, {} instances", got.size());
  return c;
}

Check ensemble_rule() {
  Check c;
  struct Row {
    std::size_t size;
    int supervised, lm, expected;
  };
  const Row table[] = {{1, 1, 2, 2}, {1, 2, 1, 1}, {2, 1, 2, 2}, {2, 2, 1, 1}, {3, 1, 2, 1}, {3, 2, 1, 2}};
  for (const auto& r : table) {
    c.expect(ensemble_select(r.supervised, r.lm, r.size) == r.expected,
             fmt::format("size {} choices ({}, {})", r.size, r.supervised, r.lm));
  }
  c.note = "6 combinations";
  return c;
}

Check consistency_metrics() {
  Check c;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), b = u(rng);
    const auto n = 3 + rng() % 8;
    std::vector<double> seq(n);
    for (std::size_t j = 0; j < n; ++j) seq[j] = a + b * static_cast<double>(j);
    const auto w = windows_of_sequence(seq);
    c.expect(ccd(w) == 0.0 && ler(w) == 0.0, fmt::format("linear {} + {} i, n={}", a, b, n));
  }
  const auto w1 = windows_of_sequence({0.8, 0.2, 0.9});
  c.expect(ccd(w1) == 0.65, fmt::format("CCD(0.8,0.2,0.9) = {}", ccd(w1).value_or(-1)));
  const auto w2 = windows_of_sequence({0.1, 0.5, 0.2, 0.4});
  c.expect(ler(w2) == 1.0, fmt::format("LER(0.1,0.5,0.2,0.4) = {}", ler(w2).value_or(-1)));

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    ScoreGrid g;
    g.event = {"s", "v", "o"};
    const auto rows = 1 + rng() % 6, cols = 1 + rng() % 6;
    for (std::size_t r = 0; r < rows; ++r) g.subject_chain.push_back(fmt::format("s{}", r));
    for (std::size_t k = 0; k < cols; ++k) g.object_chain.push_back(fmt::format("o{}", k));
    g.scores.assign(rows, std::vector<double>(cols));
    for (auto& row : g.scores) {
      for (auto& v : row) v = rng() % 4 == 0 ? 0.5 : unit(rng);
    }
    const auto m = consistency_of(abstraction_windows(concept_max_transform(g)));
    c.expect(!m.ler || *m.ler == 0.0, fmt::format("grid {}: LER {}", i, m.ler.value_or(-1)));
  }
  c.note = "10k linear sequences, 10k transformed grids";
  return c;
}

// Random three-level hierarchy with random counts.
struct ToyModel {
  Hierarchy hierarchy;
  TripleCounts counts;
  std::vector<std::string> verbs;
};

ToyModel toy_model(std::mt19937_64& rng) {
  std::vector<Hierarchy::Edge> edges;
  std::vector<Hierarchy::Sense> senses;
  const auto mids = 1 + rng() % 3;
  std::vector<std::string> words;
  for (std::size_t m = 0; m < mids; ++m) {
    const auto mid = fmt::format("mid{}.n.01", m);
    edges.push_back({mid, "root.n.01"});
    const auto leaves = 1 + rng() % 3;
    for (std::size_t l = 0; l < leaves; ++l) {
      const auto leaf = fmt::format("w{}_{}.n.01", m, l);
      edges.push_back({leaf, mid});
      const auto word = fmt::format("w{}_{}", m, l);
      words.push_back(word);
      senses.push_back({word, leaf});
      if (rng() % 4 == 0) senses.push_back({word, mid});
    }
  }
  ToyModel t{Hierarchy::build(edges, senses), {}, {}};
  const auto verbs = 1 + rng() % 3;
  for (std::size_t v = 0; v < verbs; ++v) {
    t.verbs.push_back(fmt::format("v{}", v));
    const auto objs = 1 + rng() % words.size();
    for (std::size_t o = 0; o < objs; ++o) {
      t.counts.add({"s", t.verbs.back(), words[rng() % words.size()]}, 1 + static_cast<std::int64_t>(rng() % 20));
    }
  }
  return t;
}

Check plausibility_models() {
  Check c;
  std::mt19937_64 rng(5);
  std::size_t informative = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto toy = toy_model(rng);
    const auto dist = build_concept_distribution(toy.counts, toy.hierarchy);
    for (const auto& v : toy.verbs) {
      if (selectional_strength(dist, v) <= 0) continue;
      ++informative;
      double sum = 0;
      for (const auto& [concept_id, p] : dist.prior) sum += selectional_association(dist, v, concept_id);
      c.expect(std::abs(sum - 1.0) <= 1e-9, fmt::format("toy {} verb {}: sum {}", i, v, sum));
    }
  }

  TripleCounts ng;
  ng.add({"a", "v", "x"}, 2);
  ng.add({"b", "v", "o"}, 3);
  ng.add({"b", "v", "y"}, 1);
  const auto n = ngram_score(ng, {"a", "v", "o"});
  c.expect(n.value && std::abs(*n.value - 1.0 / 6.0) <= 1e-12, fmt::format("n-gram {}", n.value.value_or(-1)));

  for (int i = 0; i < 1000; ++i) {
    const double t = static_cast<double>(1 + rng() % 50);
    const double m = static_cast<double>(1 + rng() % 50);
    const double cy = static_cast<double>(1 + rng() % 50);
    const auto p = pmi_from_counts(t, m * t, cy, cy * m);  // joint = Count(x) Count(y) / N
    c.expect(p && *p == 0.0, fmt::format("independence trial {}: {}", i, p.value_or(-1)));
  }
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e"};
  const Slot slots[] = {Slot::Subject, Slot::Verb, Slot::Object};
  for (int i = 0; i < 1000; ++i) {
    TripleCounts tc;
    for (int k = 0; k < 8; ++k) {
      tc.add({vocab[rng() % 5], vocab[rng() % 5], vocab[rng() % 5]}, 1 + static_cast<std::int64_t>(rng() % 9));
    }
    const auto a = slots[rng() % 3];
    auto b = slots[rng() % 3];
    while (b == a) b = slots[rng() % 3];
    const Relation r{a, b};
    const auto& x = vocab[rng() % 5];
    const auto& y = vocab[rng() % 5];
    const auto xy = pmi(tc, x, y, r);
    const auto yx = pmi(tc, y, x, r.reversed());
    c.expect(xy.has_value() == yx.has_value() && (!xy || *xy == *yx), fmt::format("symmetry trial {}", i));
  }

  RoleCounts roles;
  roles.add("x", "r", "y", 2);
  roles.add("x", "r", "z", 2);
  roles.add("x", "q", "z", 4);
  const auto pado = pado_score(roles, "x", "y", "r");
  c.expect(pado.value && std::abs(*pado.value - 0.25) <= 1e-12, fmt::format("Pado {}", pado.value.value_or(-1)));

  WordVectors vectors;
  vectors.add("dog", {0.3, -1.2, 2.5});
  const auto ex = exemplar_score(vectors, {{"dog", 4.0}}, "dog");
  c.expect(ex.value && std::abs(*ex.value - 1.0) <= 1e-12, fmt::format("exemplar {}", ex.value.value_or(-1)));
  c.note = fmt::format("{} informative verbs", informative);
  return c;
}

Check auc_oracle() {
  Check c;
  std::mt19937_64 rng(31);
  for (int i = 0; i < 500; ++i) {
    const auto n = 2 + rng() % 99;
    std::vector<double> scores(n);
    std::vector<bool> labels(n);
    for (std::size_t k = 0; k < n; ++k) {
      scores[k] = static_cast<double>(rng() % 12) / 4.0;  // frequent ties
      labels[k] = rng() % 2;
    }
    labels[0] = true;
    labels[1] = false;
    const auto got = auc(scores, labels);
    const auto want = oracle::auc(scores, labels);
    c.expect(got == want, fmt::format("set {}: {} vs {}", i, got, want));
  }
  c.note = "500 sets";
  return c;
}

Check permutation_test_checks() {
  Check c;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> a(20), b(20);
  for (std::size_t i = 0; i < 20; ++i) {
    a[i] = u(rng);
    b[i] = a[i] + 10.0;
  }
  const auto same_lists = permutation_test(a, a, 10000, 1);
  c.expect(same_lists.p_value == 1.0, fmt::format("identical lists p = {}", same_lists.p_value));
  const auto shifted = permutation_test(a, b, 10000, 1);
  c.expect(shifted.p_value <= 0.001, fmt::format("shifted p = {}", shifted.p_value));
  const auto once = to_json(permutation_test(a, b, 10000, 12345)).dump();
  const auto again = to_json(permutation_test(a, b, 10000, 12345)).dump();
  const auto threaded = to_json(permutation_test(a, b, 10000, 12345, 8)).dump();
  c.expect(once == again && once == threaded, "seed reproducibility");
  c.note = fmt::format("identical p={}, shifted p={:.6f}", same_lists.p_value, shifted.p_value);
  return c;
}

// ---------------------------------------------------------------------------

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
  std::string data;
};

CliRun run_cli(std::vector<std::string> args, const fs::path& data_path) {
  std::ostringstream out, err;
  CliRun r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  if (!data_path.empty() && fs::exists(data_path)) {
    std::ifstream in(data_path, std::ios::binary);
    r.data.assign(std::istreambuf_iterator<char>(in), {});
  }
  return r;
}

Check thread_invariance() {
  Check c;
  const auto tmp = fs::temp_directory_path() / fmt::format("coref-meter-acceptance-{}", ::getpid());
  fs::create_directories(tmp);
  auto fx = [](const char* name) { return (kFixtures / name).string(); };

  // Inputs produced by the tool itself.
  const auto inst = (tmp / "instances.jsonl").string();
  const auto counts = (tmp / "counts.tsv").string();
  const auto disagg_in = (tmp / "disagg_in.json").string();
  const auto disagg_out = (tmp / "disagg_out.json").string();
  const auto types = (tmp / "types.jsonl").string();
  const auto pred_types = (tmp / "pred_types.jsonl").string();
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"pcr", "extract", "--docs", fx("corpus_gold.conll"), "--seed", "3", "--out", inst},
           {"plaus", "build-counts", "--triples", fx("triples_a.tsv"), "--triples", fx("triples_b.tsv"), "--out", counts},
           {"disagg", "--gold", fx("typing.jsonl"), "--pred", fx("typing_pred.jsonl"), "--deps", fx("typing.conllu"),
            "--dataset", "typing", "--out", disagg_in},
           {"disagg", "--gold", fx("corpus_gold.conll"), "--pred", fx("corpus_pred.conll"), "--dataset", "corpus",
            "--out", disagg_out},
           {"classify", "--docs", fx("typing.jsonl"), "--deps", fx("typing.conllu"), "--out", types},
           {"classify", "--docs", fx("typing.jsonl"), "--pred", fx("typing_pred.jsonl"), "--source", "predicted",
            "--deps", fx("typing.conllu"), "--out", pred_types}}) {
    const auto r = run_cli(args, {});
    c.expect(r.code == 0, fmt::format("setup {} {}: {}", args[0], args[1], r.err));
  }
  const auto preds = (tmp / "predictions.jsonl").string();
  const auto supervised = (tmp / "supervised.jsonl").string();
  {
    std::ofstream p(preds), s(supervised);
    std::size_t i = 0;
    for (const auto& x : parse_instances(fs::path(inst))) {
      p << Json{{"instance_id", x.instance_id}, {"prediction", 1 + static_cast<int>(i % 2)}}.dump() << '\n';
      s << Json{{"instance_id", x.instance_id}, {"prediction", 2 - static_cast<int>(i % 3 == 0)}, {"cluster_size", 1 + i % 4}}
               .dump()
        << '\n';
      ++i;
    }
  }
  const auto features = (tmp / "features.jsonl").string();
  {
    std::ofstream f(features);
    for (const auto& x : parse_instances(fs::path(inst))) {
      f << Json{{"instance_id", x.instance_id},
                {"features", {{{"name", "grammatical gender"}, {"target", span_text(x.tokens, x.candidates[0])},
                               {"value", "male"}}}}}
               .dump()
        << '\n';
    }
  }

  const std::vector<std::vector<std::string>> commands = {
      {"score", "--gold", fx("corpus_gold.conll"), "--pred", fx("corpus_pred.conll"), "--per-doc"},
      {"score", "--gold", fx("corpus_gold.conll"), "--pred", fx("corpus_pred.conll"), "--macro", "--format", "md"},
      {"score", "--gold", fx("typing.jsonl"), "--pred", fx("typing_pred.jsonl"), "--keep-singletons"},
      {"classify", "--docs", fx("typing.jsonl"), "--deps", fx("typing.conllu"), "--out", "@DATA"},
      {"classify", "--docs", fx("corpus_gold.conll"), "--out", "@DATA"},
      {"disagg", "--gold", fx("typing.jsonl"), "--pred", fx("typing_pred.jsonl"), "--deps", fx("typing.conllu")},
      {"disagg", "--gold", fx("typing.jsonl"), "--pred", fx("typing_pred.jsonl"), "--types", types, "--pred-types",
       pred_types, "--format", "md"},
      {"gap", "--in", disagg_in, "--out-domain", disagg_out},
      {"permtest", "--a", fx("reals_a.txt"), "--b", fx("reals_b.txt"), "--iterations", "5000", "--seed", "9"},
      {"permtest", "--gold", fx("corpus_gold.conll"), "--pred-a", fx("corpus_pred.conll"), "--pred-b",
       fx("corpus_pred_b.conll"), "--metric", "conll", "--iterations", "3000", "--seed", "2"},
      {"pcr", "extract", "--docs", fx("corpus_gold.conll"), "--seed", "5", "--out", "@DATA"},
      {"pcr", "extract", "--docs", fx("typing.jsonl"), "--deps", fx("typing.conllu"), "--pronouns", fx("pronouns.txt"),
       "--out", "@DATA"},
      {"pcr", "score", "--instances", inst, "--predictions", preds, "--format", "md"},
      {"pcr", "ensemble", "--supervised", supervised, "--lm", preds, "--out", "@DATA"},
      {"pcr", "ensemble", "--supervised-choice", "1", "--lm-choice", "2", "--cluster-size", "3"},
      {"pcr", "assume", "--u-tc", "0.9", "--u-pc", "0.7", "--u-td", "0.8", "--u-pd", "0.6"},
      {"pcr", "prompt", "--instances", inst, "--template", fx("template.txt"), "--features", features, "--speakers",
       "--out", "@DATA"},
      {"plaus", "build-counts", "--triples", fx("triples_a.tsv"), "--triples", fx("triples_b.tsv"), "--cap-per-triple",
       "1000", "--out", "@DATA"},
      {"plaus", "score", "--counts", counts, "--model", "ngram", "--events", fx("events.tsv"), "--out", "@DATA"},
      {"plaus", "score", "--counts", counts, "--model", "pmi", "--events", fx("events.tsv"), "--relation",
       "subject,object", "--out", "@DATA"},
      {"plaus", "score", "--counts", counts, "--model", "resnik", "--events", fx("events.tsv"), "--hierarchy",
       fx("hierarchy.tsv"), "--senses", fx("senses.tsv"), "--out", "@DATA"},
      {"plaus", "score", "--counts", counts, "--model", "pado", "--events", fx("events.tsv"), "--out", "@DATA"},
      {"plaus", "score", "--counts", counts, "--model", "pado", "--roles", fx("roles.tsv"), "--events",
       fx("events.tsv"), "--out", "@DATA"},
      {"plaus", "score", "--counts", counts, "--model", "exemplar", "--events", fx("events.tsv"), "--vectors",
       fx("vectors.txt"), "--out", "@DATA"},
      {"plaus", "gen-pairs", "--counts", counts, "--n", "3000", "--seed", "4", "--out", "@DATA"},
      {"consistency", "--grids", fx("grids.jsonl"), "--hierarchy", fx("hierarchy.tsv"), "--senses", fx("senses.tsv")},
      {"consistency", "--grids", fx("grids.jsonl"), "--concept-max", "--format", "md"},
      {"auc", "--events", fx("labeled.jsonl"), "--scores", fx("scores.jsonl")},
  };

  std::size_t index = 0;
  for (const auto& base : commands) {
    std::vector<CliRun> runs;
    for (const char* threads : {"1", "2", "8"}) {
      const auto data = tmp / fmt::format("data_{}_{}", index, threads);
      auto args = base;
      for (auto& a : args) {
        if (a == "@DATA") a = data.string();
      }
      args.push_back("--threads");
      args.push_back(threads);
      runs.push_back(run_cli(args, data));
    }
    const auto name = base[0] == "pcr" || base[0] == "plaus" ? base[0] + " " + base[1] : base[0];
    c.expect(runs[0].code == 0, fmt::format("{} #{} failed: {}", name, index, runs[0].err));
    for (std::size_t k = 1; k < runs.size(); ++k) {
      c.expect(runs[k].code == runs[0].code && runs[k].out == runs[0].out && runs[k].data == runs[0].data,
               fmt::format("{} #{} differs across thread counts", name, index));
    }
    ++index;
  }
  fs::remove_all(tmp);
  c.note = fmt::format("{} invocations x 3 thread counts", commands.size());
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"metric oracle equivalence", metric_oracles},
      {"identity and symmetry", identity_and_symmetry},
      {"typed B3 reduction", typed_reduction},
      {"hand-anchored values", hand_values},
      {"PCR extraction conformance", pcr_extraction},
      {"ensemble rule", ensemble_rule},
      {"consistency metrics", consistency_metrics},
      {"plausibility models", plausibility_models},
      {"AUC oracle", auc_oracle},
      {"permutation test", permutation_test_checks},
      {"determinism under parallelism", thread_invariance},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      c = criteria[i].second();
    } catch (const std::exception& e) {
      c.failures.push_back(fmt::format("exception: {}", e.what()));
    }
    std::cout << fmt::format("{} {:>2} {}", c.ok() ? "PASS" : "FAIL", i + 1, criteria[i].first);
    if (!c.note.empty()) std::cout << " (" << c.note << ")";
    std::cout << '\n';
    for (const auto& f : c.failures) std::cout << "       " << f << '\n';
    failed += !c.ok();
  }
  std::cout << fmt::format("{}/{} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
