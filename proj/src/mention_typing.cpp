#include "coref_meter/mention_typing.hpp"
#include "coref_meter/corpus_io.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <ostream>
#include <sstream>

namespace corefmeter {

using nlohmann::json;

std::string_view to_string(CoreferenceType type) {
  switch (type) {
    case CoreferenceType::Nested: return "Nested";
    case CoreferenceType::OnGeneric: return "OnGeneric";
    case CoreferenceType::Compound: return "Compound";
    case CoreferenceType::Copular: return "Copular";
  }
  return "?";
}

std::optional<CoreferenceType> parse_coreference_type(std::string_view text) {
  for (auto t : kAllTypes) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Aligned tree and local offset of a sentence, or nullptr.
const DependencyTree* tree_for(const Document& doc, std::size_t sentence) {
  if (doc.deps.size() != doc.sentence_count() || sentence >= doc.deps.size()) return nullptr;
  const auto& tree = doc.deps[sentence];
  if (tree.tokens.size() != doc.sentence_end(sentence) - doc.sentence_begin(sentence)) return nullptr;
  return &tree;
}

const DepToken& token_at(const Document& doc, std::size_t global) {
  const auto s = doc.sentence_of(global);
  return doc.deps[s].tokens[global - doc.sentence_begin(s)];
}

std::vector<std::size_t> children_of(const Document& doc, std::size_t global) {
  const auto s = doc.sentence_of(global);
  std::vector<std::size_t> out;
  for (auto c : doc.deps[s].children(global - doc.sentence_begin(s))) out.push_back(doc.sentence_begin(s) + c);
  return out;
}

bool is_plural(const DepToken& t, const TypingOptions& options) {
  return options.plural_xpos.contains(t.xpos) || (options.number_feature && has_feature(t.feats, "Number", "Plur"));
}

bool is_possessive_or_quantifier(const DepToken& t) {
  const auto base = relation_base(t.deprel);
  return t.deprel == "nmod:poss" || base == "poss" || base == "nummod" || t.upos == "NUM" || t.xpos == "CD" ||
         t.xpos == "PRP$" || t.xpos == "POS";
}

// Heads hm and hn are linked by nsubj in either direction.
bool nsubj_linked(const Document& doc, std::size_t hm, std::size_t hn) {
  if (doc.sentence_of(hm) != doc.sentence_of(hn)) return false;
  const auto begin = doc.sentence_begin(doc.sentence_of(hm));
  auto links = [&](std::size_t dep, std::size_t head) {
    const auto& t = token_at(doc, dep);
    return t.head != 0 && begin + t.head - 1 == head && relation_base(t.deprel) == "nsubj";
  };
  return links(hm, hn) || links(hn, hm);
}

std::optional<std::size_t> cop_child(const Document& doc, std::size_t head) {
  for (auto c : children_of(doc, head)) {
    if (relation_base(token_at(doc, c).deprel) == "cop") return c;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::size_t> mention_head(const Document& doc, const Mention& m) {
  if (m.end >= doc.token_count() || m.start > m.end) return std::nullopt;
  const auto s = doc.sentence_of(m.start);
  if (doc.sentence_of(m.end) != s) return std::nullopt;
  const auto* tree = tree_for(doc, s);
  if (!tree) return std::nullopt;
  const auto begin = doc.sentence_begin(s);
  std::optional<std::size_t> leftmost;
  for (std::size_t g = m.start; g <= m.end; ++g) {
    const auto head = tree->tokens[g - begin].head;
    if (head == 0) return g;
    const auto head_global = begin + head - 1;
    if ((head_global < m.start || head_global > m.end) && !leftmost) leftmost = g;
  }
  return leftmost;
}

TypedMention classify_mention(const Document& doc, const EntityPartition& partition, const Mention& m,
                              const TypingOptions& options, Diagnostics* diag) {
  TypedMention out;
  out.mention = m;
  const auto head = mention_head(doc, m);
  if (!head) {
    out.untyped_reason = doc.deps.empty() ? "no dependency parse" : "mention not aligned to a dependency tree";
    return out;
  }
  out.head = head;

  const Entity* entity = nullptr;
  for (const auto& e : partition.entities) {
    if (std::binary_search(e.begin(), e.end(), m)) {
      entity = &e;
      break;
    }
  }
  if (!entity) throw InputError(fmt::format("{}: mention [{},{}] is not in the partition", doc.doc_id, m.start, m.end));

  for (const auto& other : *entity) {
    if (other != m && other.overlaps(m)) {
      out.types.insert(CoreferenceType::Nested);
      out.evidence.push_back(fmt::format("Nested: overlaps coreferring [{},{}]", other.start, other.end));
      break;
    }
  }

  const auto& h = token_at(doc, *head);
  std::vector<std::size_t> dets;
  bool poss_or_quant = false;
  for (auto c : children_of(doc, *head)) {
    const auto& ct = token_at(doc, c);
    if (relation_base(ct.deprel) == "det") dets.push_back(c);
    if (is_possessive_or_quantifier(ct)) poss_or_quant = true;
  }
  for (auto d : dets) {
    const auto& dt = token_at(doc, d);
    const auto lemma = lower(dt.lemma == "_" || dt.lemma.empty() ? dt.form : dt.lemma);
    if (lemma == "a" || lemma == "an") {
      out.types.insert(CoreferenceType::OnGeneric);
      out.evidence.push_back(fmt::format("OnGeneric: head '{}' has det child '{}'", h.form, dt.form));
      break;
    }
  }
  if (dets.empty()) {
    if (is_plural(h, options)) {
      out.types.insert(CoreferenceType::OnGeneric);
      out.evidence.push_back(fmt::format("OnGeneric: plural head '{}' ({}) without det", h.form,
                                         options.plural_xpos.contains(h.xpos) ? h.xpos : "Number=Plur"));
    }
    if (poss_or_quant && diag) diag->count("ongeneric_no_det_possessive_or_quantifier");
  }

  if (relation_base(h.deprel) == "compound") {
    out.types.insert(CoreferenceType::Compound);
    out.evidence.push_back(fmt::format("Compound: head '{}' is a {} dependent", h.form, h.deprel));
  }

  for (const auto& other : *entity) {
    if (other == m) continue;
    const auto other_head = mention_head(doc, other);
    if (!other_head || *other_head == *head) continue;
    if (!nsubj_linked(doc, *head, *other_head)) continue;
    const auto rightmost = std::max(*head, *other_head);
    if (auto cop = cop_child(doc, rightmost)) {
      out.types.insert(CoreferenceType::Copular);
      out.evidence.push_back(fmt::format("Copular: nsubj link with [{},{}]; '{}' heads cop '{}'", other.start,
                                         other.end, token_at(doc, rightmost).form, token_at(doc, *cop).form));
      break;
    }
  }
  return out;
}

TypeMap type_partition(const Document& doc, const EntityPartition& partition, const TypingOptions& options,
                       Diagnostics* diag) {
  TypeMap out;
  for (const auto& m : all_mentions(partition)) {
    auto typed = classify_mention(doc, partition, m, options, diag);
    if (typed.untyped() && diag) diag->count("untyped_mentions");
    out.emplace(m, std::move(typed));
  }
  return out;
}

void write_type_maps(std::ostream& out, const std::vector<std::pair<std::string, TypeMap>>& maps) {
  for (const auto& [doc_id, map] : maps) {
    for (const auto& [m, typed] : map) {
      json j;
      j["doc_id"] = doc_id;
      j["start"] = m.start;
      j["end"] = m.end;
      json types = json::array();
      for (auto t : typed.types) types.push_back(std::string(to_string(t)));
      j["types"] = types;
      j["evidence"] = typed.evidence;
      j["head"] = typed.head ? json(*typed.head) : json(nullptr);
      j["untyped"] = typed.untyped() ? json(typed.untyped_reason) : json(nullptr);
      out << j.dump() << '\n';
    }
  }
}

std::map<std::string, TypeMap> parse_type_maps(std::istream& in, const std::string& name) {
  std::map<std::string, TypeMap> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      TypedMention t;
      t.mention = {j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
      if (t.mention.start > t.mention.end) throw InputError("start > end");
      for (const auto& s : j.at("types")) {
        auto type = parse_coreference_type(s.get<std::string>());
        if (!type) throw InputError(fmt::format("unknown coreference type '{}'", s.get<std::string>()));
        t.types.insert(*type);
      }
      if (j.contains("evidence")) t.evidence = j["evidence"].get<std::vector<std::string>>();
      if (j.contains("head") && !j["head"].is_null()) t.head = j["head"].get<std::size_t>();
      if (j.contains("untyped") && !j["untyped"].is_null()) t.untyped_reason = j["untyped"].get<std::string>();
      out[j.at("doc_id").get<std::string>()][t.mention] = std::move(t);
    } catch (const json::exception& e) {
      throw ParseError(name, line_no, 0, e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      throw ParseError(name, line_no, 0, e.what());
    }
  }
  return out;
}

std::map<std::string, TypeMap> parse_type_maps(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return parse_type_maps(in, path.string());
}

}  // namespace corefmeter
