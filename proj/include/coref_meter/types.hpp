#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace corefmeter {

/// A contiguous token span with inclusive, document-global indices.
struct Mention {
  std::size_t start = 0;
  std::size_t end = 0;

  auto operator<=>(const Mention&) const = default;

  std::size_t length() const { return end - start + 1; }
  bool overlaps(const Mention& other) const { return start <= other.end && other.start <= end; }
  bool contains(const Mention& other) const { return start <= other.start && other.end <= end; }
};

/// Mentions of one discourse entity, kept sorted and unique.
using Entity = std::vector<Mention>;

/// A family of pairwise-disjoint entities. Canonical form: mentions sorted
/// inside each entity, entities sorted by their first mention.
struct EntityPartition {
  std::vector<Entity> entities;

  bool operator==(const EntityPartition&) const = default;
};

/// Sorts and deduplicates, producing the canonical form.
void normalize(EntityPartition& partition);

/// Drops entities with fewer than two mentions.
EntityPartition without_singletons(const EntityPartition& partition);

/// All mentions, sorted.
std::vector<Mention> all_mentions(const EntityPartition& partition);

std::size_t mention_count(const EntityPartition& partition);

/// Maps each mention to the index of its entity.
std::map<Mention, std::size_t> entity_index(const EntityPartition& partition);

/// Throws InputError when a mention appears in two entities or an entity is empty.
void validate_disjoint(const EntityPartition& partition, std::string_view context);

/// One row of a CoNLL-U sentence. `head` is 1-based, 0 for the root.
struct DepToken {
  std::string id;
  std::string form;
  std::string lemma;
  std::string upos;
  std::string xpos;
  std::string feats;
  std::size_t head = 0;
  std::string deprel;
  std::string deps;
  std::string misc;

  bool operator==(const DepToken&) const = default;
};

struct DependencyTree {
  std::vector<std::string> comments;
  std::vector<DepToken> tokens;

  bool operator==(const DependencyTree&) const = default;

  /// 0-based indices of the tokens whose head is token `index` (0-based).
  std::vector<std::size_t> children(std::size_t index) const;
};

/// "nsubj:pass" -> "nsubj".
std::string_view relation_base(std::string_view deprel);

/// True when a UD feature string contains `key=value`.
bool has_feature(std::string_view feats, std::string_view key, std::string_view value);

struct Document {
  std::string doc_id;
  /// Flat token surfaces, document-global order.
  std::vector<std::string> tokens;
  /// Sentence boundaries: sentence i covers [offsets[i], offsets[i+1]).
  std::vector<std::size_t> sentence_offsets{0};
  /// Empty, or one speaker string per token.
  std::vector<std::string> speakers;
  std::string genre;
  /// False when the source declared no sentence segmentation.
  bool sentence_boundaries = true;
  EntityPartition gold;
  std::optional<EntityPartition> predicted;
  /// Empty, or one tree per sentence with identical tokenization.
  std::vector<DependencyTree> deps;

  bool operator==(const Document&) const = default;

  std::size_t token_count() const { return tokens.size(); }
  std::size_t sentence_count() const { return sentence_offsets.size() - 1; }
  std::size_t sentence_begin(std::size_t s) const { return sentence_offsets[s]; }
  std::size_t sentence_end(std::size_t s) const { return sentence_offsets[s + 1]; }
  /// Sentence containing a token. Requires token < token_count().
  std::size_t sentence_of(std::size_t token) const;
  void add_sentence(const std::vector<std::string>& sentence);
  std::vector<std::vector<std::string>> sentences() const;
};

/// A subject-verb-object event. Counts live in TripleCounts.
struct Triple {
  std::string subject;
  std::string verb;
  std::string object;

  auto operator<=>(const Triple&) const = default;
};

std::string to_string(const Triple& t);

}  // namespace corefmeter
