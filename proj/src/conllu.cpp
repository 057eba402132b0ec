#include "coref_meter/corpus_io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <ostream>
#include <sstream>

namespace corefmeter {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return out;
}

std::size_t column_of(const std::vector<std::string_view>& cols, std::size_t index, std::string_view line) {
  return static_cast<std::size_t>(cols[index].data() - line.data()) + 1;
}

}  // namespace

void validate_tree(const DependencyTree& tree, const std::string& file, std::size_t line) {
  const std::size_t n = tree.tokens.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (tree.tokens[i].head > n) {
      throw ParseError(file, line, 0,
                       fmt::format("token {} has head {} outside the sentence (1..{})", i + 1, tree.tokens[i].head, n));
    }
  }
  // Walk up from every token; a walk longer than n steps revisits a node.
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t cur = i + 1;
    std::size_t steps = 0;
    while (cur != 0) {
      cur = tree.tokens[cur - 1].head;
      if (++steps > n) throw ParseError(file, line, 0, fmt::format("dependency cycle through token {}", i + 1));
    }
  }
  std::size_t roots = 0;
  for (const auto& t : tree.tokens) roots += t.head == 0 ? 1 : 0;
  if (roots != 1) throw ParseError(file, line, 0, fmt::format("sentence has {} roots, expected 1", roots));
}

std::vector<DependencyTree> parse_conllu(std::istream& in, const std::string& name) {
  std::vector<DependencyTree> trees;
  DependencyTree current;
  std::size_t block_line = 0;
  std::string raw;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (current.tokens.empty() && current.comments.empty()) return;
    if (current.tokens.empty()) throw ParseError(name, block_line, 0, "sentence block without tokens");
    validate_tree(current, name, block_line);
    trees.push_back(std::move(current));
    current = DependencyTree{};
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      flush();
      continue;
    }
    if (current.tokens.empty() && current.comments.empty()) block_line = line_no;
    if (line.front() == '#') {
      current.comments.emplace_back(line);
      continue;
    }
    const auto cols = split_tabs(line);
    if (cols.size() != 10) {
      throw ParseError(name, line_no, 1, fmt::format("expected 10 tab-separated columns, found {}", cols.size()));
    }
    if (cols[0].find_first_of("-.") != std::string_view::npos) continue;  // multiword token or empty node
    std::size_t id = 0;
    auto [p, ec] = std::from_chars(cols[0].data(), cols[0].data() + cols[0].size(), id);
    if (ec != std::errc{} || p != cols[0].data() + cols[0].size() || id != current.tokens.size() + 1) {
      throw ParseError(name, line_no, 1, fmt::format("expected token id {}, found '{}'", current.tokens.size() + 1,
                                                     cols[0]));
    }
    std::size_t head = 0;
    auto [hp, hec] = std::from_chars(cols[6].data(), cols[6].data() + cols[6].size(), head);
    if (hec != std::errc{} || hp != cols[6].data() + cols[6].size()) {
      throw ParseError(name, line_no, column_of(cols, 6, line), fmt::format("invalid head '{}'", cols[6]));
    }
    DepToken tok;
    tok.id = std::string(cols[0]);
    tok.form = std::string(cols[1]);
    tok.lemma = std::string(cols[2]);
    tok.upos = std::string(cols[3]);
    tok.xpos = std::string(cols[4]);
    tok.feats = std::string(cols[5]);
    tok.head = head;
    tok.deprel = std::string(cols[7]);
    tok.deps = std::string(cols[8]);
    tok.misc = std::string(cols[9]);
    current.tokens.push_back(std::move(tok));
  }
  flush();
  return trees;
}

std::vector<DependencyTree> parse_conllu(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return parse_conllu(in, path.string());
}

void write_conllu(std::ostream& out, const std::vector<DependencyTree>& trees) {
  for (const auto& tree : trees) {
    for (const auto& c : tree.comments) out << c << '\n';
    for (const auto& t : tree.tokens) {
      out << t.id << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << '\t' << t.xpos << '\t' << t.feats << '\t'
          << t.head << '\t' << t.deprel << '\t' << t.deps << '\t' << t.misc << '\n';
    }
    out << '\n';
  }
}

}  // namespace corefmeter
