#include "coref_meter/triple_counts.hpp"
#include "coref_meter/corpus_io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

namespace corefmeter {

std::string_view to_string(Slot slot) {
  switch (slot) {
    case Slot::Subject: return "subject";
    case Slot::Verb: return "verb";
    case Slot::Object: return "object";
  }
  return "?";
}

std::optional<Slot> parse_slot(std::string_view text) {
  if (text == "subject") return Slot::Subject;
  if (text == "verb") return Slot::Verb;
  if (text == "object") return Slot::Object;
  return std::nullopt;
}

namespace {

template <class Map, class Key>
std::int64_t lookup(const Map& map, const Key& key) {
  auto it = map.find(key);
  return it == map.end() ? 0 : it->second;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
}

std::int64_t parse_count(std::string_view text, const std::string& name, std::size_t line, std::size_t column) {
  std::int64_t value = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || p != text.data() + text.size()) {
    throw ParseError(name, line, column, fmt::format("count '{}' is not an integer", text));
  }
  if (value < 1) throw ParseError(name, line, column, fmt::format("count must be at least 1, found {}", value));
  return value;
}

void check_lemma(std::string_view text, const std::string& name, std::size_t line, std::size_t column) {
  if (text.empty()) throw ParseError(name, line, column, "empty lemma");
  if (text.find_first_of(" \r\n\v\f") != std::string_view::npos) {
    throw ParseError(name, line, column, fmt::format("lemma '{}' contains whitespace", text));
  }
}

std::size_t column_of(const std::vector<std::string_view>& cols, std::size_t i, std::string_view line) {
  return static_cast<std::size_t>(cols[i].data() - line.data()) + 1;
}

}  // namespace

void TripleCounts::add(const Triple& triple, std::int64_t count) {
  triples_[triple] += count;
  sv_[{triple.subject, triple.verb}] += count;
  vo_[{triple.verb, triple.object}] += count;
  so_[{triple.subject, triple.object}] += count;
  s_[triple.subject] += count;
  v_[triple.verb] += count;
  o_[triple.object] += count;
  unigram_[triple.subject] += count;
  unigram_[triple.verb] += count;
  unigram_[triple.object] += count;
  total_ += count;
}

void TripleCounts::merge(const TripleCounts& other) {
  for (const auto& [t, c] : other.triples_) add(t, c);
}

void TripleCounts::cap(std::int64_t cap) {
  for (auto& [t, c] : triples_) c = std::min(c, cap);
  rebuild();
}

void TripleCounts::rebuild() {
  auto triples = std::move(triples_);
  *this = TripleCounts{};
  for (const auto& [t, c] : triples) add(t, c);
}

std::int64_t TripleCounts::count(const Triple& t) const { return lookup(triples_, t); }
std::int64_t TripleCounts::subject_verb(const std::string& s, const std::string& v) const {
  return lookup(sv_, Pair{s, v});
}
std::int64_t TripleCounts::verb_object(const std::string& v, const std::string& o) const {
  return lookup(vo_, Pair{v, o});
}
std::int64_t TripleCounts::subject_object(const std::string& s, const std::string& o) const {
  return lookup(so_, Pair{s, o});
}

std::int64_t TripleCounts::joint(Slot a, const std::string& x, Slot b, const std::string& y) const {
  if (a == b) throw InputError("joint count needs two different slots");
  // Tables are keyed in canonical subject < verb < object order.
  if (static_cast<int>(a) > static_cast<int>(b)) return joint(b, y, a, x);
  return lookup(pair_table(a, b), Pair{x, y});
}

const std::map<TripleCounts::Pair, std::int64_t>& TripleCounts::pair_table(Slot a, Slot b) const {
  if (a == Slot::Subject && b == Slot::Verb) return sv_;
  if (a == Slot::Verb && b == Slot::Object) return vo_;
  return so_;
}

std::int64_t TripleCounts::positional(Slot slot, const std::string& word) const {
  return lookup(positional_table(slot), word);
}

const std::map<std::string, std::int64_t>& TripleCounts::positional_table(Slot slot) const {
  switch (slot) {
    case Slot::Subject: return s_;
    case Slot::Verb: return v_;
    case Slot::Object: return o_;
  }
  return v_;
}

std::int64_t TripleCounts::unigram(const std::string& word) const { return lookup(unigram_, word); }

TripleCounts parse_triples(std::istream& in, const std::string& name, const TripleParseOptions& options) {
  TripleCounts counts;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = split_tabs(line);
    if (cols.size() != 4) {
      throw ParseError(name, line_no, 1, fmt::format("expected 4 tab-separated columns, found {}", cols.size()));
    }
    for (std::size_t i = 0; i < 3; ++i) check_lemma(cols[i], name, line_no, column_of(cols, i, line));
    const auto count = parse_count(cols[3], name, line_no, column_of(cols, 3, line));
    counts.add({std::string(cols[0]), std::string(cols[1]), std::string(cols[2])}, count);
  }
  if (options.cap_per_triple) counts.cap(*options.cap_per_triple);
  return counts;
}

TripleCounts parse_triples(const std::filesystem::path& path, const TripleParseOptions& options) {
  std::istringstream in(read_file(path));
  return parse_triples(in, path.string(), options);
}

void write_triples(std::ostream& out, const TripleCounts& counts) {
  for (const auto& [t, c] : counts.triples()) out << t.subject << '\t' << t.verb << '\t' << t.object << '\t' << c << '\n';
}

void RoleCounts::add(const std::string& predicate, const std::string& role, const std::string& argument,
                     std::int64_t count) {
  joint_[{predicate, role, argument}] += count;
  role_[{predicate, role}] += count;
  predicate_[predicate] += count;
}

std::int64_t RoleCounts::joint(const std::string& argument, const std::string& role,
                               const std::string& predicate) const {
  return lookup(joint_, std::tuple{predicate, role, argument});
}

std::int64_t RoleCounts::role_predicate(const std::string& role, const std::string& predicate) const {
  return lookup(role_, std::pair{predicate, role});
}

std::int64_t RoleCounts::predicate(const std::string& predicate) const { return lookup(predicate_, predicate); }

RoleCounts RoleCounts::from_triples(const TripleCounts& counts) {
  RoleCounts roles;
  for (const auto& [t, c] : counts.triples()) {
    roles.add(t.verb, "subj", t.subject, c);
    roles.add(t.verb, "obj", t.object, c);
  }
  return roles;
}

RoleCounts parse_role_counts(std::istream& in, const std::string& name) {
  RoleCounts roles;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = split_tabs(line);
    if (cols.size() != 4) {
      throw ParseError(name, line_no, 1, fmt::format("expected 4 tab-separated columns, found {}", cols.size()));
    }
    for (std::size_t i = 0; i < 3; ++i) check_lemma(cols[i], name, line_no, column_of(cols, i, line));
    roles.add(std::string(cols[0]), std::string(cols[1]), std::string(cols[2]),
              parse_count(cols[3], name, line_no, column_of(cols, 3, line)));
  }
  return roles;
}

RoleCounts parse_role_counts(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return parse_role_counts(in, path.string());
}

void WordVectors::add(const std::string& word, std::vector<double> vector) {
  if (vectors_.empty()) {
    dimension_ = vector.size();
  } else if (vector.size() != dimension_) {
    throw InputError(fmt::format("vector for '{}' has dimension {}, expected {}", word, vector.size(), dimension_));
  }
  vectors_[word] = std::move(vector);
}

const std::vector<double>* WordVectors::find(const std::string& word) const {
  auto it = vectors_.find(word);
  return it == vectors_.end() ? nullptr : &it->second;
}

WordVectors parse_word_vectors(std::istream& in, const std::string& name) {
  WordVectors vectors;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::istringstream row(line);
    std::string word;
    row >> word;
    std::vector<double> values;
    std::string cell;
    while (row >> cell) {
      double v = 0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || p != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError(name, line_no, line.find(cell) + 1, fmt::format("'{}' is not a number", cell));
      }
      values.push_back(v);
    }
    if (values.empty()) throw ParseError(name, line_no, 1, fmt::format("no values for '{}'", word));
    try {
      vectors.add(word, std::move(values));
    } catch (const InputError& e) {
      throw ParseError(name, line_no, 1, e.what());
    }
  }
  return vectors;
}

WordVectors parse_word_vectors(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return parse_word_vectors(in, path.string());
}

void write_word_vectors(std::ostream& out, const WordVectors& vectors) {
  for (const auto& [word, values] : vectors.table()) {
    out << word;
    for (double v : values) out << '\t' << fmt::format("{}", v);
    out << '\n';
  }
}

}  // namespace corefmeter
