#pragma once

#include "coref_meter/errors.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace corefmeter {

struct HierarchyOptions {
  /// Concepts shallower than this are removed after chains are formed.
  int min_depth = 1;
  /// Required when the edge list has more than one parentless concept.
  std::optional<std::string> root;
};

/// A rooted is-a DAG over concept ids with shortest-path depths (root = 1)
/// and a word -> ordered senses map.
///
/// Depths and hypernym chains are computed on the full graph. Concepts with
/// depth < min_depth are then dropped from chains, ancestor sets and the
/// sense map, but their edges are kept so the graph can be re-serialized.
class Hierarchy {
 public:
  struct Edge {
    std::string child;
    std::string parent;
  };
  struct Sense {
    std::string word;
    std::string concept_id;
  };

  /// Builds from edge and sense rows. Throws InputError on cycles or an
  /// ambiguous root; unreachable concepts and senses naming unknown or
  /// removed concepts are dropped with a warning.
  static Hierarchy build(const std::vector<Edge>& edges, const std::vector<Sense>& senses,
                         const HierarchyOptions& options = {}, Diagnostics* diag = nullptr);

  const std::string& root() const { return names_[root_]; }
  int min_depth() const { return min_depth_; }

  /// Known to the graph (retained or not).
  bool known(const std::string& concept_id) const { return ids_.contains(concept_id); }
  /// Known and deep enough to survive filtering.
  bool retained(const std::string& concept_id) const;
  int depth(const std::string& concept_id) const;
  const std::vector<std::string>& parents(const std::string& concept_id) const;

  /// Shortest root-to-concept chain, filtered to retained concepts.
  std::vector<std::string> chain(const std::string& concept_id) const;
  /// The concept and every retained ancestor over all DAG paths, sorted.
  std::vector<std::string> ancestors(const std::string& concept_id) const;
  /// True when `ancestor` is reachable upward from `concept_id` (strictly).
  bool is_proper_ancestor(const std::string& ancestor, const std::string& concept_id) const;

  /// Retained senses of a word in declaration order; empty when unknown.
  const std::vector<std::string>& senses(const std::string& word) const;
  /// "dog.n.01" -> "dog".
  static std::string lemma(const std::string& concept_id);

  /// Retained concept ids, sorted.
  std::vector<std::string> concepts() const;
  std::size_t size() const { return names_.size(); }

  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Sense>& sense_rows() const { return sense_rows_; }

  bool operator==(const Hierarchy& other) const;

 private:
  std::size_t id_of(const std::string& concept_id) const;

  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> ids_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::string>> parent_names_;
  std::vector<int> depth_;
  std::vector<std::size_t> chain_parent_;  // self for the root
  std::size_t root_ = 0;
  int min_depth_ = 1;
  std::unordered_map<std::string, std::vector<std::string>> senses_;
  std::vector<Edge> edges_;
  std::vector<Sense> sense_rows_;
};

/// Reads `child<TAB>parent` and `word<TAB>concept` rows. Blank lines and
/// `#` comments are skipped.
Hierarchy parse_hierarchy(const std::filesystem::path& edges_path, const std::filesystem::path& senses_path,
                          const HierarchyOptions& options = {}, Diagnostics* diag = nullptr);
Hierarchy parse_hierarchy(std::istream& edges, const std::string& edges_name, std::istream& senses,
                          const std::string& senses_name, const HierarchyOptions& options = {},
                          Diagnostics* diag = nullptr);
void write_hierarchy(std::ostream& edges_out, std::ostream& senses_out, const Hierarchy& hierarchy);

}  // namespace corefmeter
