#pragma once

#include "coref_meter/errors.hpp"
#include "coref_meter/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace corefmeter {

enum class CoreferenceType { Nested, OnGeneric, Compound, Copular };

inline constexpr CoreferenceType kAllTypes[] = {CoreferenceType::Nested, CoreferenceType::OnGeneric,
                                                CoreferenceType::Compound, CoreferenceType::Copular};

std::string_view to_string(CoreferenceType type);
std::optional<CoreferenceType> parse_coreference_type(std::string_view text);

struct TypedMention {
  Mention mention;
  std::set<CoreferenceType> types;
  /// One line per assigned type, naming the relations and tags used.
  std::vector<std::string> evidence;
  /// Document-global index of the head token, when typed.
  std::optional<std::size_t> head;
  /// Non-empty when the mention could not be typed (no aligned parse).
  std::string untyped_reason;

  bool untyped() const { return !untyped_reason.empty(); }
  bool has(CoreferenceType t) const { return types.contains(t); }
  bool operator==(const TypedMention&) const = default;
};

struct TypingOptions {
  /// Penn tags treated as plural nouns.
  std::set<std::string> plural_xpos{"NNS", "NNPS"};
  /// Also treat `Number=Plur` in the UD feature column as plural.
  bool number_feature = true;
};

/// The token inside `m` whose syntactic head lies outside the span. When
/// several qualify the sentence root wins, then the leftmost. Returns
/// nullopt when the document has no aligned parse for `m`.
std::optional<std::size_t> mention_head(const Document& doc, const Mention& m);

/// Classifies one mention of `partition`.
TypedMention classify_mention(const Document& doc, const EntityPartition& partition, const Mention& m,
                              const TypingOptions& options = {}, Diagnostics* diag = nullptr);

using TypeMap = std::map<Mention, TypedMention>;

/// Classifies every mention of `partition`. Untyped mentions are counted in
/// `diag` under `untyped_mentions`; heads lacking a det child but carrying a
/// possessive or quantifier dependent under `ongeneric_no_det_possessive_or_quantifier`.
TypeMap type_partition(const Document& doc, const EntityPartition& partition, const TypingOptions& options = {},
                       Diagnostics* diag = nullptr);

/// JSON lines, one mention per line: doc_id, start, end, types, evidence,
/// head, untyped.
void write_type_maps(std::ostream& out, const std::vector<std::pair<std::string, TypeMap>>& maps);
std::map<std::string, TypeMap> parse_type_maps(std::istream& in, const std::string& name);
std::map<std::string, TypeMap> parse_type_maps(const std::filesystem::path& path);

}  // namespace corefmeter
