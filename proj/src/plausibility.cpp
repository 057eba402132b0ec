#include "coref_meter/plausibility.hpp"
#include "coref_meter/parallel.hpp"
#include "coref_meter/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace corefmeter {

PlausibilityScore ngram_score(const TripleCounts& counts, const Triple& t) {
  const auto cv = counts.verb(t.verb);
  if (cv == 0) return {0.0, {"unseen-verb"}};
  const double v = static_cast<double>(cv);
  return {static_cast<double>(counts.subject_verb(t.subject, t.verb)) *
              static_cast<double>(counts.verb_object(t.verb, t.object)) / (v * v),
          {}};
}

std::optional<double> pmi_from_counts(double joint, double count_x, double count_y, double n) {
  if (joint <= 0 || count_x <= 0 || count_y <= 0 || n <= 0) return std::nullopt;
  return std::log(joint * n / (count_x * count_y));
}

std::optional<double> pmi(const TripleCounts& counts, const std::string& x, const std::string& y,
                          const Relation& relation) {
  if (relation.first == relation.second) throw InputError("a relation needs two different slots");
  const auto joint = counts.joint(relation.first, x, relation.second, y);
  // Multiplication order fixed so that swapping x and y is bit-identical.
  const double cx = static_cast<double>(counts.unigram(x));
  const double cy = static_cast<double>(counts.unigram(y));
  const double lo = std::min(cx, cy);
  const double hi = std::max(cx, cy);
  return pmi_from_counts(static_cast<double>(joint), lo, hi, static_cast<double>(counts.corpus_size()));
}

ConceptDistribution build_concept_distribution(const TripleCounts& counts, const Hierarchy& hierarchy,
                                               Diagnostics* diag) {
  ConceptDistribution dist;
  std::map<std::string, std::vector<std::string>> spread;  // object -> concepts receiving mass
  std::set<std::string> dropped;
  for (const auto& [t, c] : counts.triples()) {
    const auto& senses = hierarchy.senses(t.object);
    if (senses.empty()) {
      dropped.insert(t.object);
      continue;
    }
    const double share = static_cast<double>(c) / static_cast<double>(senses.size());
    auto& verb = dist.by_verb[t.verb];
    for (const auto& sense : senses) {
      for (const auto& concept_id : hierarchy.ancestors(sense)) {
        verb[concept_id] += share;
        dist.prior[concept_id] += share;
      }
    }
  }
  auto normalize = [](std::map<std::string, double>& m) {
    double total = 0;
    for (const auto& [k, v] : m) total += v;
    if (total > 0)
      for (auto& [k, v] : m) v /= total;
  };
  for (auto& [v, m] : dist.by_verb) normalize(m);
  normalize(dist.prior);
  dist.dropped_words = dropped.size();
  if (diag && !dropped.empty()) {
    diag->count("objects_without_senses", dropped.size());
    diag->warn(fmt::format("{} object words have no senses in the hierarchy and were dropped", dropped.size()));
  }
  return dist;
}

namespace {

double kl_term(double p, double q) {
  if (p <= 0) return 0;
  if (q <= 0) throw InvariantError("concept with P(c|x) > 0 but P(c) = 0");
  return p * std::log(p / q);
}

constexpr double kUninformative = 1e-12;

}  // namespace

double selectional_strength(const ConceptDistribution& dist, const std::string& verb) {
  auto it = dist.by_verb.find(verb);
  if (it == dist.by_verb.end()) return 0;
  double s = 0;
  for (const auto& [c, p] : it->second) {
    auto q = dist.prior.find(c);
    s += kl_term(p, q == dist.prior.end() ? 0.0 : q->second);
  }
  return s;
}

double selectional_association(const ConceptDistribution& dist, const std::string& verb,
                               const std::string& concept_id) {
  const double strength = selectional_strength(dist, verb);
  if (strength <= kUninformative) throw InputError(fmt::format("verb '{}' has no selectional strength", verb));
  const auto& pv = dist.by_verb.at(verb);
  auto p = pv.find(concept_id);
  if (p == pv.end()) return 0;
  auto q = dist.prior.find(concept_id);
  return kl_term(p->second, q == dist.prior.end() ? 0.0 : q->second) / strength;
}

PlausibilityScore resnik_score(const ConceptDistribution& dist, const Hierarchy& hierarchy, const std::string& verb,
                               const std::string& word) {
  const auto& senses = hierarchy.senses(word);
  if (senses.empty()) throw InputError(fmt::format("word '{}' has no senses in the hierarchy", word));
  if (!dist.by_verb.contains(verb)) return {0.0, {"unseen-verb"}};
  if (selectional_strength(dist, verb) <= kUninformative) return {0.0, {"uninformative-verb"}};
  std::set<std::string> candidates;
  for (const auto& s : senses) {
    for (const auto& c : hierarchy.ancestors(s)) candidates.insert(c);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) best = std::max(best, selectional_association(dist, verb, c));
  return {best, {}};
}

PlausibilityScore pado_score(const RoleCounts& roles, const std::string& predicate, const std::string& argument,
                             const std::string& role) {
  const auto rx = roles.role_predicate(role, predicate);
  const auto x = roles.predicate(predicate);
  if (rx == 0 || x == 0) return {0.0, {"unseen-role"}};
  const double yrx = static_cast<double>(roles.joint(argument, role, predicate));
  return {(yrx / static_cast<double>(rx)) * (static_cast<double>(rx) / static_cast<double>(x)), {}};
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InputError("vectors differ in dimension");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  if (a == b) return 1;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

PlausibilityScore exemplar_score(const WordVectors& vectors, const std::map<std::string, double>& seen,
                                 const std::string& word) {
  if (seen.empty()) return {std::nullopt, {"no-exemplars"}};
  const auto* vy = vectors.find(word);
  if (!vy) throw InputError(fmt::format("no vector for '{}'", word));
  double z = 0;
  for (const auto& [w, mu] : seen) {
    if (mu < 0) throw InputError(fmt::format("negative exemplar weight for '{}'", w));
    z += mu;
  }
  if (z <= 0) return {std::nullopt, {"no-exemplars"}};
  PlausibilityScore out{0.0, {}};
  double total = 0;
  for (const auto& [w, mu] : seen) {
    const auto* v = vectors.find(w);
    if (!v) throw InputError(fmt::format("no vector for exemplar '{}'", w));
    total += (mu / z) * cosine(*vy, *v);
  }
  out.value = std::clamp(total, -1.0, 1.0);
  return out;
}

std::map<std::string, double> seen_arguments(const TripleCounts& counts, const std::string& verb, Slot slot) {
  std::map<std::string, double> out;
  for (const auto& [t, c] : counts.triples()) {
    if (t.verb != verb) continue;
    if (slot == Slot::Subject) {
      out[t.subject] += static_cast<double>(c);
    } else if (slot == Slot::Object) {
      out[t.object] += static_cast<double>(c);
    } else {
      throw InputError("exemplars are subjects or objects");
    }
  }
  return out;
}

std::string_view to_string(PerturbForm form) {
  switch (form) {
    case PerturbForm::Subject: return "subject";
    case PerturbForm::Object: return "object";
    case PerturbForm::Both: return "both";
  }
  return "?";
}

namespace {

constexpr std::size_t kPairChunk = 1024;

// Draws items with probability proportional to their weight.
template <class T>
class WeightedTable {
 public:
  void add(T item, std::int64_t weight) {
    total_ += weight;
    items_.push_back(std::move(item));
    cumulative_.push_back(total_);
  }
  const T& draw(Rng& rng) const {
    const auto r = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(total_)));
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
    return items_[static_cast<std::size_t>(it - cumulative_.begin())];
  }
  std::size_t size() const { return items_.size(); }

 private:
  std::vector<T> items_;
  std::vector<std::int64_t> cumulative_;
  std::int64_t total_ = 0;
};

}  // namespace

std::vector<TrainingPair> generate_pairs(const TripleCounts& counts, const PairOptions& options) {
  TripleCounts kept;
  for (const auto& [t, c] : counts.triples()) {
    if (counts.subject(t.subject) >= options.min_position_count &&
        counts.object(t.object) >= options.min_position_count) {
      kept.add(t, c);
    }
  }
  if (kept.empty()) throw InputError("no triples survive the positional frequency filter");

  WeightedTable<Triple> events;
  for (const auto& [t, c] : kept.triples()) events.add(t, c);
  WeightedTable<std::string> subjects, objects;
  for (const auto& [w, c] : kept.positional_table(Slot::Subject)) subjects.add(w, c);
  for (const auto& [w, c] : kept.positional_table(Slot::Object)) objects.add(w, c);

  std::vector<PerturbForm> forms;
  if (subjects.size() >= 2) forms.push_back(PerturbForm::Subject);
  if (objects.size() >= 2) forms.push_back(PerturbForm::Object);
  if (subjects.size() >= 2 || objects.size() >= 2) forms.push_back(PerturbForm::Both);
  if (forms.empty()) throw InputError("vocabulary too small to perturb: one subject and one object");

  std::vector<TrainingPair> pairs(options.count);
  const std::size_t chunks = (options.count + kPairChunk - 1) / kPairChunk;
  parallel_for(chunks, options.threads, [&](std::size_t c) {
    Rng rng(derive_seed(options.seed, c));
    const std::size_t end = std::min(options.count, (c + 1) * kPairChunk);
    for (std::size_t i = c * kPairChunk; i < end; ++i) {
      TrainingPair p;
      p.attested = events.draw(rng);
      p.form = forms[rng.uniform_index(forms.size())];
      p.perturbed = p.attested;
      std::size_t attempts = 0;
      do {
        if (++attempts > 1000000) throw InvariantError("pair generation failed to find a distinct perturbation");
        if (p.form != PerturbForm::Object) p.perturbed.subject = subjects.draw(rng);
        if (p.form != PerturbForm::Subject) p.perturbed.object = objects.draw(rng);
      } while (p.perturbed == p.attested);
      pairs[i] = std::move(p);
    }
  });
  return pairs;
}

}  // namespace corefmeter
