#include "coref_meter/hierarchy.hpp"
#include "coref_meter/corpus_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <deque>
#include <ostream>
#include <set>
#include <sstream>

namespace corefmeter {

namespace {

/// Raised by build() when a specific edge is at fault, so the file reader
/// can point at its line.
class EdgeError : public InputError {
 public:
  EdgeError(std::size_t edge, const std::string& message) : InputError(message), edge(edge) {}
  std::size_t edge;
};

const std::vector<std::string> kNoStrings;

}  // namespace

Hierarchy Hierarchy::build(const std::vector<Edge>& edges, const std::vector<Sense>& senses,
                           const HierarchyOptions& options, Diagnostics* diag) {
  // Intern every concept mentioned by an edge.
  std::vector<std::string> names;
  std::unordered_map<std::string, std::size_t> ids;
  auto intern = [&](const std::string& name) {
    auto [it, inserted] = ids.try_emplace(name, names.size());
    if (inserted) names.push_back(name);
    return it->second;
  };
  std::vector<std::pair<std::size_t, std::size_t>> links;  // child, parent
  std::vector<std::size_t> link_edge;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].child == edges[e].parent) throw EdgeError(e, fmt::format("self-loop on {}", edges[e].child));
    const auto c = intern(edges[e].child);
    const auto p = intern(edges[e].parent);
    links.emplace_back(c, p);
    link_edge.push_back(e);
  }
  if (options.root && !ids.contains(*options.root)) {
    if (!edges.empty()) throw InputError(fmt::format("root {} does not occur in the hierarchy", *options.root));
    intern(*options.root);
  }
  const std::size_t n = names.size();
  if (n == 0) throw InputError("hierarchy has no concepts");

  std::vector<std::vector<std::size_t>> parents(n), children(n);
  std::vector<std::vector<std::size_t>> parent_edge(n);
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto [c, p] = links[i];
    if (std::find(parents[c].begin(), parents[c].end(), p) != parents[c].end()) continue;
    parents[c].push_back(p);
    parent_edge[c].push_back(link_edge[i]);
    children[p].push_back(c);
  }

  // Cycle check: iterative DFS over parent links.
  {
    std::vector<int> state(n, 0);  // 0 new, 1 on stack, 2 done
    for (std::size_t s = 0; s < n; ++s) {
      if (state[s] != 0) continue;
      std::vector<std::pair<std::size_t, std::size_t>> stack{{s, 0}};
      state[s] = 1;
      while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < parents[node].size()) {
          const auto p = parents[node][next];
          const auto edge = parent_edge[node][next];
          ++next;
          if (state[p] == 1) {
            throw EdgeError(edge, fmt::format("cycle in hierarchy through {} -> {}", names[node], names[p]));
          }
          if (state[p] == 0) {
            state[p] = 1;
            stack.emplace_back(p, 0);
          }
        } else {
          state[node] = 2;
          stack.pop_back();
        }
      }
    }
  }

  std::size_t root = 0;
  if (options.root) {
    root = ids.at(*options.root);
    if (!parents[root].empty()) throw InputError(fmt::format("root {} has a parent", *options.root));
  } else {
    std::vector<std::size_t> roots;
    for (std::size_t i = 0; i < n; ++i) {
      if (parents[i].empty()) roots.push_back(i);
    }
    if (roots.size() != 1) {
      std::vector<std::string> listed;
      for (std::size_t i = 0; i < roots.size() && i < 5; ++i) listed.push_back(names[roots[i]]);
      throw InputError(fmt::format("hierarchy has {} root concepts ({}); pass an explicit root", roots.size(),
                                   fmt::join(listed, ", ")));
    }
    root = roots.front();
  }

  // Shortest-path depths from the root.
  std::vector<int> depth(n, 0);
  depth[root] = 1;
  std::deque<std::size_t> queue{root};
  while (!queue.empty()) {
    const auto cur = queue.front();
    queue.pop_front();
    for (auto c : children[cur]) {
      if (depth[c] == 0) {
        depth[c] = depth[cur] + 1;
        queue.push_back(c);
      }
    }
  }

  Hierarchy h;
  h.min_depth_ = options.min_depth;
  // Keep only concepts reachable from the root.
  std::vector<std::size_t> remap(n, SIZE_MAX);
  for (std::size_t i = 0; i < n; ++i) {
    if (depth[i] == 0) {
      if (diag) {
        diag->count("unreachable_concepts");
        diag->warn(fmt::format("concept {} is not reachable from root {}; dropped", names[i], names[root]));
      }
      continue;
    }
    remap[i] = h.names_.size();
    h.ids_.emplace(names[i], h.names_.size());
    h.names_.push_back(names[i]);
    h.depth_.push_back(depth[i]);
  }
  h.root_ = remap[root];
  h.parents_.resize(h.names_.size());
  h.parent_names_.resize(h.names_.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (remap[i] == SIZE_MAX) continue;
    for (auto p : parents[i]) {
      if (remap[p] == SIZE_MAX) continue;
      h.parents_[remap[i]].push_back(remap[p]);
      h.parent_names_[remap[i]].push_back(names[p]);
    }
  }
  for (const auto& e : edges) {
    if (remap[ids.at(e.child)] != SIZE_MAX && remap[ids.at(e.parent)] != SIZE_MAX) h.edges_.push_back(e);
  }
  // Chain parent: a parent one level up; ties go to the smallest id string.
  h.chain_parent_.resize(h.names_.size());
  for (std::size_t i = 0; i < h.names_.size(); ++i) {
    if (i == h.root_) {
      h.chain_parent_[i] = i;
      continue;
    }
    std::size_t best = SIZE_MAX;
    for (auto p : h.parents_[i]) {
      if (h.depth_[p] != h.depth_[i] - 1) continue;
      if (best == SIZE_MAX || h.names_[p] < h.names_[best]) best = p;
    }
    if (best == SIZE_MAX) throw InvariantError(fmt::format("no shortest-path parent for {}", h.names_[i]));
    h.chain_parent_[i] = best;
  }

  for (const auto& s : senses) {
    auto it = h.ids_.find(s.concept_id);
    if (it == h.ids_.end()) {
      if (diag) {
        diag->count("unknown_sense_concepts");
        diag->warn(fmt::format("sense {} -> {} names an unknown concept; dropped", s.word, s.concept_id));
      }
      continue;
    }
    if (h.depth_[it->second] < h.min_depth_) {
      if (diag) diag->count("senses_below_min_depth");
      continue;
    }
    auto& list = h.senses_[s.word];
    if (std::find(list.begin(), list.end(), s.concept_id) != list.end()) continue;
    list.push_back(s.concept_id);
    h.sense_rows_.push_back(s);
  }
  return h;
}

std::size_t Hierarchy::id_of(const std::string& concept_id) const {
  auto it = ids_.find(concept_id);
  if (it == ids_.end()) throw InputError(fmt::format("unknown concept {}", concept_id));
  return it->second;
}

bool Hierarchy::retained(const std::string& concept_id) const {
  auto it = ids_.find(concept_id);
  return it != ids_.end() && depth_[it->second] >= min_depth_;
}

int Hierarchy::depth(const std::string& concept_id) const { return depth_[id_of(concept_id)]; }

const std::vector<std::string>& Hierarchy::parents(const std::string& concept_id) const {
  return parent_names_[id_of(concept_id)];
}

std::vector<std::string> Hierarchy::chain(const std::string& concept_id) const {
  std::vector<std::string> out;
  std::size_t cur = id_of(concept_id);
  while (true) {
    if (depth_[cur] >= min_depth_) out.push_back(names_[cur]);
    if (cur == root_) break;
    cur = chain_parent_[cur];
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::string> Hierarchy::ancestors(const std::string& concept_id) const {
  std::vector<bool> seen(names_.size(), false);
  std::vector<std::size_t> stack{id_of(concept_id)};
  seen[stack.back()] = true;
  std::vector<std::string> out;
  while (!stack.empty()) {
    const auto cur = stack.back();
    stack.pop_back();
    if (depth_[cur] >= min_depth_) out.push_back(names_[cur]);
    for (auto p : parents_[cur]) {
      if (!seen[p]) {
        seen[p] = true;
        stack.push_back(p);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Hierarchy::is_proper_ancestor(const std::string& ancestor, const std::string& concept_id) const {
  const auto target = id_of(ancestor);
  std::vector<bool> seen(names_.size(), false);
  std::vector<std::size_t> stack(parents_[id_of(concept_id)]);
  while (!stack.empty()) {
    const auto cur = stack.back();
    stack.pop_back();
    if (cur == target) return true;
    if (seen[cur]) continue;
    seen[cur] = true;
    for (auto p : parents_[cur]) stack.push_back(p);
  }
  return false;
}

const std::vector<std::string>& Hierarchy::senses(const std::string& word) const {
  auto it = senses_.find(word);
  return it == senses_.end() ? kNoStrings : it->second;
}

std::string Hierarchy::lemma(const std::string& concept_id) {
  const auto dot = concept_id.find('.');
  return dot == std::string::npos ? concept_id : concept_id.substr(0, dot);
}

std::vector<std::string> Hierarchy::concepts() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (depth_[i] >= min_depth_) out.push_back(names_[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Hierarchy::operator==(const Hierarchy& other) const {
  auto sorted_edges = [](std::vector<Edge> e) {
    std::sort(e.begin(), e.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.child, a.parent) < std::tie(b.child, b.parent); });
    return e;
  };
  auto a = sorted_edges(edges_);
  auto b = sorted_edges(other.edges_);
  auto same_edge = [](const Edge& x, const Edge& y) { return x.child == y.child && x.parent == y.parent; };
  auto same_sense = [](const Sense& x, const Sense& y) { return x.word == y.word && x.concept_id == y.concept_id; };
  return root() == other.root() && min_depth_ == other.min_depth_ &&
         std::equal(a.begin(), a.end(), b.begin(), b.end(), same_edge) &&
         std::equal(sense_rows_.begin(), sense_rows_.end(), other.sense_rows_.begin(), other.sense_rows_.end(),
                    same_sense) &&
         depth_.size() == other.depth_.size();
}

namespace {

std::vector<std::pair<std::vector<std::string>, std::size_t>> read_tsv_pairs(std::istream& in,
                                                                              const std::string& name) {
  std::vector<std::pair<std::vector<std::string>, std::size_t>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(name, line_no, 1, "expected exactly two tab-separated columns");
    }
    std::string a = line.substr(0, tab);
    std::string b = line.substr(tab + 1);
    if (a.empty()) throw ParseError(name, line_no, 1, "empty first column");
    if (b.empty()) throw ParseError(name, line_no, tab + 2, "empty second column");
    rows.push_back({{std::move(a), std::move(b)}, line_no});
  }
  return rows;
}

}  // namespace

Hierarchy parse_hierarchy(std::istream& edges_in, const std::string& edges_name, std::istream& senses_in,
                          const std::string& senses_name, const HierarchyOptions& options, Diagnostics* diag) {
  const auto edge_rows = read_tsv_pairs(edges_in, edges_name);
  const auto sense_rows = read_tsv_pairs(senses_in, senses_name);
  std::vector<Hierarchy::Edge> edges;
  for (const auto& [cols, line] : edge_rows) edges.push_back({cols[0], cols[1]});
  std::vector<Hierarchy::Sense> senses;
  for (const auto& [cols, line] : sense_rows) senses.push_back({cols[0], cols[1]});
  try {
    return Hierarchy::build(edges, senses, options, diag);
  } catch (const EdgeError& e) {
    throw ParseError(edges_name, edge_rows[e.edge].second, 1, e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const InputError& e) {
    throw ParseError(edges_name, 0, 0, e.what());
  }
}

Hierarchy parse_hierarchy(const std::filesystem::path& edges_path, const std::filesystem::path& senses_path,
                          const HierarchyOptions& options, Diagnostics* diag) {
  std::istringstream edges(read_file(edges_path));
  std::istringstream senses(read_file(senses_path));
  return parse_hierarchy(edges, edges_path.string(), senses, senses_path.string(), options, diag);
}

void write_hierarchy(std::ostream& edges_out, std::ostream& senses_out, const Hierarchy& hierarchy) {
  for (const auto& e : hierarchy.edges()) edges_out << e.child << '\t' << e.parent << '\n';
  for (const auto& s : hierarchy.sense_rows()) senses_out << s.word << '\t' << s.concept_id << '\n';
}

}  // namespace corefmeter
