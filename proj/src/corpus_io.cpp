#include "coref_meter/corpus_io.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace corefmeter {

using nlohmann::json;

void normalize(EntityPartition& partition) {
  for (auto& entity : partition.entities) {
    std::sort(entity.begin(), entity.end());
    entity.erase(std::unique(entity.begin(), entity.end()), entity.end());
  }
  std::erase_if(partition.entities, [](const Entity& e) { return e.empty(); });
  std::sort(partition.entities.begin(), partition.entities.end(),
            [](const Entity& a, const Entity& b) { return a.front() < b.front(); });
}

EntityPartition without_singletons(const EntityPartition& partition) {
  EntityPartition out;
  for (const auto& entity : partition.entities) {
    if (entity.size() >= 2) out.entities.push_back(entity);
  }
  return out;
}

std::vector<Mention> all_mentions(const EntityPartition& partition) {
  std::vector<Mention> out;
  for (const auto& entity : partition.entities) out.insert(out.end(), entity.begin(), entity.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t mention_count(const EntityPartition& partition) {
  std::size_t n = 0;
  for (const auto& entity : partition.entities) n += entity.size();
  return n;
}

std::map<Mention, std::size_t> entity_index(const EntityPartition& partition) {
  std::map<Mention, std::size_t> index;
  for (std::size_t i = 0; i < partition.entities.size(); ++i) {
    for (const auto& m : partition.entities[i]) index.emplace(m, i);
  }
  return index;
}

void validate_disjoint(const EntityPartition& partition, std::string_view context) {
  std::map<Mention, std::size_t> seen;
  for (std::size_t i = 0; i < partition.entities.size(); ++i) {
    if (partition.entities[i].empty()) throw InputError(fmt::format("{}: entity {} is empty", context, i));
    for (const auto& m : partition.entities[i]) {
      auto [it, inserted] = seen.emplace(m, i);
      if (!inserted && it->second != i) {
        throw InputError(fmt::format("{}: mention [{},{}] belongs to two entities", context, m.start, m.end));
      }
    }
  }
}

std::vector<std::size_t> DependencyTree::children(std::size_t index) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].head == index + 1) out.push_back(i);
  }
  return out;
}

std::string_view relation_base(std::string_view deprel) {
  const auto colon = deprel.find(':');
  return colon == std::string_view::npos ? deprel : deprel.substr(0, colon);
}

bool has_feature(std::string_view feats, std::string_view key, std::string_view value) {
  std::size_t pos = 0;
  while (pos <= feats.size()) {
    auto bar = feats.find('|', pos);
    if (bar == std::string_view::npos) bar = feats.size();
    const auto item = feats.substr(pos, bar - pos);
    const auto eq = item.find('=');
    if (eq != std::string_view::npos && item.substr(0, eq) == key) {
      // Multi-valued features are comma separated: Number=Plur,Sing
      auto values = item.substr(eq + 1);
      std::size_t vp = 0;
      while (vp <= values.size()) {
        auto comma = values.find(',', vp);
        if (comma == std::string_view::npos) comma = values.size();
        if (values.substr(vp, comma - vp) == value) return true;
        vp = comma + 1;
      }
    }
    pos = bar + 1;
  }
  return false;
}

std::size_t Document::sentence_of(std::size_t token) const {
  auto it = std::upper_bound(sentence_offsets.begin(), sentence_offsets.end(), token);
  return static_cast<std::size_t>(it - sentence_offsets.begin()) - 1;
}

void Document::add_sentence(const std::vector<std::string>& sentence) {
  tokens.insert(tokens.end(), sentence.begin(), sentence.end());
  sentence_offsets.push_back(tokens.size());
}

std::vector<std::vector<std::string>> Document::sentences() const {
  std::vector<std::vector<std::string>> out;
  for (std::size_t s = 0; s < sentence_count(); ++s) {
    out.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(sentence_begin(s)),
                     tokens.begin() + static_cast<std::ptrdiff_t>(sentence_end(s)));
  }
  return out;
}

std::string to_string(const Triple& t) { return fmt::format("{}-{}-{}", t.subject, t.verb, t.object); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open file: {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------------------
// JSON-lines documents

namespace {

EntityPartition clusters_from_json(const json& clusters, const std::string& file, std::size_t line,
                                   const Document& doc, Diagnostics* diag) {
  EntityPartition partition;
  if (!clusters.is_array()) throw ParseError(file, line, 0, "clusters must be an array");
  for (const auto& cluster : clusters) {
    if (!cluster.is_array()) throw ParseError(file, line, 0, "cluster must be an array of [start, end] pairs");
    Entity entity;
    for (const auto& item : cluster) {
      if (!item.is_array() || item.empty()) throw ParseError(file, line, 0, "mention must be a [start, end] pair");
      if (item[0].is_array()) {
        // [[s,e],[s,e],...]: discontinuous unless it has a single part
        if (item.size() != 1) {
          if (diag) {
            diag->count("discontinuous_mentions");
            diag->warn(fmt::format("{}:{}: {}: discontinuous mention rejected", file, line, doc.doc_id));
          }
          continue;
        }
        const auto& part = item[0];
        if (part.size() != 2) throw ParseError(file, line, 0, "mention must be a [start, end] pair");
        entity.push_back({part[0].get<std::size_t>(), part[1].get<std::size_t>()});
      } else {
        if (item.size() != 2) throw ParseError(file, line, 0, "mention must be a [start, end] pair");
        entity.push_back({item[0].get<std::size_t>(), item[1].get<std::size_t>()});
      }
    }
    for (const auto& m : entity) {
      if (m.start > m.end || m.end >= doc.token_count()) {
        throw ParseError(file, line, 0,
                         fmt::format("{}: mention [{},{}] out of range (0..{})", doc.doc_id, m.start, m.end,
                                     doc.token_count()));
      }
      if (doc.sentence_boundaries && doc.sentence_of(m.start) != doc.sentence_of(m.end)) {
        throw ParseError(file, line, 0, fmt::format("{}: mention [{},{}] crosses a sentence boundary", doc.doc_id,
                                                    m.start, m.end));
      }
    }
    if (!entity.empty()) partition.entities.push_back(std::move(entity));
  }
  normalize(partition);
  try {
    validate_disjoint(partition, doc.doc_id);
  } catch (const InputError& e) {
    throw ParseError(file, line, 0, e.what());
  }
  return partition;
}

json clusters_to_json(const EntityPartition& partition) {
  json out = json::array();
  for (const auto& entity : partition.entities) {
    json cluster = json::array();
    for (const auto& m : entity) cluster.push_back({m.start, m.end});
    out.push_back(std::move(cluster));
  }
  return out;
}

std::vector<Document> parse_jsonl_impl(std::istream& in, const std::string& name, PartitionSource source,
                                       Diagnostics* diag) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(name, line_no, e.byte, "invalid JSON");
    }
    try {
      Document doc;
      doc.doc_id = obj.at("doc_id").get<std::string>();
      if (obj.contains("sentences")) {
        for (const auto& sentence : obj["sentences"]) doc.add_sentence(sentence.get<std::vector<std::string>>());
      } else if (obj.contains("tokens")) {
        doc.add_sentence(obj["tokens"].get<std::vector<std::string>>());
        doc.sentence_boundaries = false;
      } else {
        throw ParseError(name, line_no, 0, "document needs `sentences` or `tokens`");
      }
      if (obj.contains("speakers")) {
        const auto& sp = obj["speakers"];
        if (!sp.empty() && sp[0].is_array()) {
          for (const auto& s : sp) {
            for (const auto& v : s) doc.speakers.push_back(v.get<std::string>());
          }
        } else {
          doc.speakers = sp.get<std::vector<std::string>>();
        }
        if (doc.speakers.size() != doc.token_count()) {
          throw ParseError(name, line_no, 0, fmt::format("{}: speakers do not match tokens", doc.doc_id));
        }
      }
      doc.genre = obj.value("genre", std::string{});
      const json empty = json::array();
      const json& primary = obj.contains("clusters") ? obj["clusters"] : empty;
      if (source == PartitionSource::Gold) {
        doc.gold = clusters_from_json(primary, name, line_no, doc, diag);
        if (obj.contains("predicted_clusters")) {
          doc.predicted = clusters_from_json(obj["predicted_clusters"], name, line_no, doc, diag);
        }
      } else {
        const json& pred = obj.contains("predicted_clusters") ? obj["predicted_clusters"] : primary;
        doc.predicted = clusters_from_json(pred, name, line_no, doc, diag);
      }
      docs.push_back(std::move(doc));
    } catch (const json::exception& e) {
      throw ParseError(name, line_no, 0, e.what());
    }
  }
  return docs;
}

}  // namespace

std::vector<Document> parse_document_jsonl(std::istream& in, const std::string& name, Diagnostics* diag) {
  return parse_jsonl_impl(in, name, PartitionSource::Gold, diag);
}

std::vector<Document> parse_document_jsonl(const std::filesystem::path& path, Diagnostics* diag) {
  std::istringstream in(read_file(path));
  return parse_jsonl_impl(in, path.string(), PartitionSource::Gold, diag);
}

void write_document_jsonl(std::ostream& out, const std::vector<Document>& docs) {
  for (const auto& doc : docs) {
    json obj;
    obj["doc_id"] = doc.doc_id;
    if (doc.sentence_boundaries) {
      obj["sentences"] = doc.sentences();
    } else {
      obj["tokens"] = doc.tokens;
    }
    if (!doc.speakers.empty()) obj["speakers"] = doc.speakers;
    if (!doc.genre.empty()) obj["genre"] = doc.genre;
    obj["clusters"] = clusters_to_json(doc.gold);
    if (doc.predicted) obj["predicted_clusters"] = clusters_to_json(*doc.predicted);
    out << obj.dump() << '\n';
  }
}

std::vector<Document> load_documents(const std::filesystem::path& path, PartitionSource source, Diagnostics* diag) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".json") {
    std::istringstream in(read_file(path));
    return parse_jsonl_impl(in, path.string(), source, diag);
  }
  return parse_conll_coref(path, source, diag);
}

void merge_predictions(std::vector<Document>& docs, const std::vector<Document>& predictions) {
  std::map<std::string, const Document*> by_id;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.doc_id, &p).second) {
      throw InputError(fmt::format("duplicate predicted document '{}'", p.doc_id));
    }
  }
  for (auto& doc : docs) {
    auto it = by_id.find(doc.doc_id);
    if (it == by_id.end()) throw InputError(fmt::format("no predictions for document '{}'", doc.doc_id));
    const Document& p = *it->second;
    if (p.token_count() != doc.token_count()) {
      throw InputError(fmt::format("{}: gold has {} tokens, predictions have {}", doc.doc_id, doc.token_count(),
                                   p.token_count()));
    }
    doc.predicted = p.predicted ? *p.predicted : p.gold;
    by_id.erase(it);
  }
  if (!by_id.empty()) {
    throw InputError(fmt::format("predicted document '{}' has no gold counterpart", by_id.begin()->first));
  }
}

void attach_dependencies(std::vector<Document>& docs, const std::vector<DependencyTree>& trees) {
  std::size_t next = 0;
  for (auto& doc : docs) {
    doc.deps.clear();
    for (std::size_t s = 0; s < doc.sentence_count(); ++s) {
      if (next >= trees.size()) {
        throw InputError(fmt::format("{}: ran out of dependency trees at sentence {}", doc.doc_id, s));
      }
      const auto& tree = trees[next++];
      const std::size_t len = doc.sentence_end(s) - doc.sentence_begin(s);
      if (tree.tokens.size() != len) {
        throw InputError(fmt::format("{}: sentence {} has {} tokens but its dependency tree has {}", doc.doc_id, s,
                                     len, tree.tokens.size()));
      }
      for (std::size_t i = 0; i < len; ++i) {
        if (tree.tokens[i].form != doc.tokens[doc.sentence_begin(s) + i]) {
          throw InputError(fmt::format("{}: sentence {} token {} is '{}' but the dependency tree has '{}'",
                                       doc.doc_id, s, i, doc.tokens[doc.sentence_begin(s) + i],
                                       tree.tokens[i].form));
        }
      }
      doc.deps.push_back(tree);
    }
  }
  if (next != trees.size()) {
    throw InputError(fmt::format("{} dependency trees left over after aligning all documents", trees.size() - next));
  }
}

}  // namespace corefmeter
