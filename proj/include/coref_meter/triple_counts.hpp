#pragma once

#include "coref_meter/errors.hpp"
#include "coref_meter/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace corefmeter {

enum class Slot { Subject, Verb, Object };

std::string_view to_string(Slot slot);
std::optional<Slot> parse_slot(std::string_view text);

/// Aggregated subject-verb-object counts with every marginal needed by the
/// count-based plausibility models.
class TripleCounts {
 public:
  using Pair = std::pair<std::string, std::string>;

  void add(const Triple& triple, std::int64_t count);
  void merge(const TripleCounts& other);
  /// Clamps every triple count to at most `cap`.
  void cap(std::int64_t cap);

  std::int64_t count(const Triple& t) const;
  std::int64_t subject_verb(const std::string& s, const std::string& v) const;
  std::int64_t verb_object(const std::string& v, const std::string& o) const;
  std::int64_t subject_object(const std::string& s, const std::string& o) const;
  /// Joint count of `x` in slot `a` and `y` in slot `b` (a != b).
  std::int64_t joint(Slot a, const std::string& x, Slot b, const std::string& y) const;
  /// Count of `word` in one slot.
  std::int64_t positional(Slot slot, const std::string& word) const;
  std::int64_t verb(const std::string& v) const { return positional(Slot::Verb, v); }
  std::int64_t subject(const std::string& s) const { return positional(Slot::Subject, s); }
  std::int64_t object(const std::string& o) const { return positional(Slot::Object, o); }
  /// Occurrences of `word` in any slot.
  std::int64_t unigram(const std::string& word) const;

  /// Sum of triple counts.
  std::int64_t total() const { return total_; }
  /// N: total word occurrences, three per triple.
  std::int64_t corpus_size() const { return 3 * total_; }
  bool empty() const { return triples_.empty(); }

  const std::map<Triple, std::int64_t>& triples() const { return triples_; }
  const std::map<std::string, std::int64_t>& positional_table(Slot slot) const;

  bool operator==(const TripleCounts& other) const { return triples_ == other.triples_; }

 private:
  void rebuild();
  const std::map<Pair, std::int64_t>& pair_table(Slot a, Slot b) const;

  std::map<Triple, std::int64_t> triples_;
  std::map<Pair, std::int64_t> sv_, vo_, so_;
  std::map<std::string, std::int64_t> s_, v_, o_, unigram_;
  std::int64_t total_ = 0;
};

struct TripleParseOptions {
  /// When set, summed counts above this value are clamped to it.
  std::optional<std::int64_t> cap_per_triple;
};

/// Reads `subject<TAB>verb<TAB>object<TAB>count` rows; duplicates are summed.
TripleCounts parse_triples(const std::filesystem::path& path, const TripleParseOptions& options = {});
TripleCounts parse_triples(std::istream& in, const std::string& name, const TripleParseOptions& options = {});
void write_triples(std::ostream& out, const TripleCounts& counts);

/// Role-conditioned counts for P(y | r, x) P(r | x): argument y filling role r
/// of predicate x.
class RoleCounts {
 public:
  void add(const std::string& predicate, const std::string& role, const std::string& argument, std::int64_t count);

  std::int64_t joint(const std::string& argument, const std::string& role, const std::string& predicate) const;
  std::int64_t role_predicate(const std::string& role, const std::string& predicate) const;
  /// Sum over roles and arguments.
  std::int64_t predicate(const std::string& predicate) const;

  const std::map<std::tuple<std::string, std::string, std::string>, std::int64_t>& table() const { return joint_; }

  /// Subjects become role "subj" and objects role "obj" of their verb.
  static RoleCounts from_triples(const TripleCounts& counts);

 private:
  std::map<std::tuple<std::string, std::string, std::string>, std::int64_t> joint_;  // (x, r, y)
  std::map<std::pair<std::string, std::string>, std::int64_t> role_;               // (x, r)
  std::map<std::string, std::int64_t> predicate_;
};

/// Reads `predicate<TAB>role<TAB>argument<TAB>count` rows.
RoleCounts parse_role_counts(const std::filesystem::path& path);
RoleCounts parse_role_counts(std::istream& in, const std::string& name);

/// Word embeddings of uniform dimension.
class WordVectors {
 public:
  void add(const std::string& word, std::vector<double> vector);
  const std::vector<double>* find(const std::string& word) const;
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }
  const std::map<std::string, std::vector<double>>& table() const { return vectors_; }

 private:
  std::map<std::string, std::vector<double>> vectors_;
  std::size_t dimension_ = 0;
};

/// Reads `word<TAB>v1<TAB>v2...` rows (tabs or spaces).
WordVectors parse_word_vectors(const std::filesystem::path& path);
WordVectors parse_word_vectors(std::istream& in, const std::string& name);
void write_word_vectors(std::ostream& out, const WordVectors& vectors);

}  // namespace corefmeter
