#include "coref_meter/corpus_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <map>
#include <ostream>
#include <sstream>

namespace corefmeter {

namespace {

struct Field {
  std::string_view text;
  std::size_t column;  // 1-based character column
};

std::vector<Field> split_fields(std::string_view line) {
  std::vector<Field> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    fields.push_back({line.substr(start, i - start), start + 1});
  }
  return fields;
}

bool parse_cluster_id(std::string_view text, long& id) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

std::string genre_of(std::string_view name) {
  const auto slash = name.find('/');
  return slash == std::string_view::npos ? std::string{} : std::string(name.substr(0, slash));
}

class ConllCorefReader {
 public:
  ConllCorefReader(std::string file, PartitionSource source, Diagnostics* diag)
      : file_(std::move(file)), source_(source), diag_(diag) {}

  std::vector<Document> read(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string_view view(line);
      if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
      if (view.starts_with("#begin document")) {
        if (open_) finish(line_no);
        begin(view, line_no);
      } else if (view.starts_with("#end document")) {
        if (!open_) throw ParseError(file_, line_no, 1, "#end document without #begin document");
        finish(line_no);
      } else if (view.starts_with("#")) {
        continue;
      } else if (view.find_first_not_of(" \t") == std::string_view::npos) {
        end_sentence();
      } else {
        if (!open_) throw ParseError(file_, line_no, 1, "token row outside of a document");
        token_row(view, line_no);
      }
    }
    if (open_) finish(line_no);
    return std::move(docs_);
  }

 private:
  void begin(std::string_view header, std::size_t line_no) {
    // #begin document (name); part 000
    std::string name;
    std::string part = "000";
    const auto lp = header.find('(');
    const auto rp = header.rfind(')');
    if (lp != std::string_view::npos && rp != std::string_view::npos && rp > lp) {
      name = std::string(header.substr(lp + 1, rp - lp - 1));
      const auto pp = header.find("part", rp);
      if (pp != std::string_view::npos) {
        auto rest = header.substr(pp + 4);
        const auto b = rest.find_first_not_of(" \t");
        if (b != std::string_view::npos) part = std::string(rest.substr(b));
        while (!part.empty() && (part.back() == ' ' || part.back() == '\t')) part.pop_back();
      }
    } else {
      const auto fields = split_fields(header);
      if (fields.size() < 3) throw ParseError(file_, line_no, 1, "malformed #begin document line");
      name = std::string(fields[2].text);
    }
    doc_ = Document{};
    doc_.doc_id = name + ":" + part;
    doc_.genre = genre_of(name);
    sentence_.clear();
    sentence_start_ = 0;
    clusters_.clear();
    cluster_order_.clear();
    stacks_.clear();
    columns_ = 0;
    open_ = true;
  }

  void end_sentence() {
    if (!open_ || sentence_.empty()) return;
    doc_.add_sentence(sentence_);
    sentence_.clear();
    sentence_start_ = doc_.token_count();
  }

  void token_row(std::string_view line, std::size_t line_no) {
    const auto fields = split_fields(line);
    if (fields.size() < 5) {
      throw ParseError(file_, line_no, 1, fmt::format("expected at least 5 columns, found {}", fields.size()));
    }
    if (columns_ == 0) {
      columns_ = fields.size();
    } else if (fields.size() != columns_) {
      throw ParseError(file_, line_no, 1,
                       fmt::format("{}: expected {} columns, found {}", doc_.doc_id, columns_, fields.size()));
    }
    const std::size_t token = sentence_start_ + sentence_.size();
    sentence_.emplace_back(fields[3].text);
    if (fields.size() >= 11) {
      doc_.speakers.emplace_back(fields[9].text);
    }
    coref_field(fields.back(), token, line_no);
  }

  void coref_field(const Field& field, std::size_t token, std::size_t line_no) {
    if (field.text == "-") return;
    std::size_t offset = 0;
    while (offset <= field.text.size()) {
      auto bar = field.text.find('|', offset);
      if (bar == std::string_view::npos) bar = field.text.size();
      const auto part = field.text.substr(offset, bar - offset);
      const std::size_t column = field.column + offset;
      const bool opens = part.starts_with('(');
      const bool closes = part.ends_with(')');
      std::string_view digits = part;
      if (opens) digits.remove_prefix(1);
      if (closes && !digits.empty()) digits.remove_suffix(1);
      long id = 0;
      if ((!opens && !closes) || !parse_cluster_id(digits, id)) {
        throw ParseError(file_, line_no, column, fmt::format("malformed coreference annotation '{}'", part));
      }
      if (opens && closes) {
        add_mention(id, {token, token}, line_no, column);
      } else if (opens) {
        stacks_[id].push_back({token, line_no});
      } else {
        auto& stack = stacks_[id];
        if (stack.empty()) {
          throw ParseError(file_, line_no, column,
                           fmt::format("{}: closing bracket for cluster {} without an opening one", doc_.doc_id, id));
        }
        const auto start = stack.back().token;
        stack.pop_back();
        if (start < sentence_start_) {
          throw ParseError(file_, line_no, column,
                           fmt::format("{}: mention of cluster {} crosses a sentence boundary", doc_.doc_id, id));
        }
        add_mention(id, {start, token}, line_no, column);
      }
      offset = bar + 1;
    }
  }

  void add_mention(long id, Mention m, std::size_t line_no, std::size_t column) {
    auto [it, inserted] = clusters_.try_emplace(id);
    if (inserted) cluster_order_.push_back(id);
    auto& entity = it->second;
    if (std::find(entity.begin(), entity.end(), m) != entity.end()) {
      if (diag_) {
        diag_->count("duplicate_mentions");
        diag_->warn(fmt::format("{}:{}:{}: {}: duplicate mention [{},{}] in cluster {} ignored", file_, line_no, column,
                                doc_.doc_id, m.start, m.end, id));
      }
      return;
    }
    entity.push_back(m);
  }

  void finish(std::size_t line_no) {
    end_sentence();
    for (const auto& [id, stack] : stacks_) {
      if (!stack.empty()) {
        throw ParseError(file_, line_no, 1,
                         fmt::format("{}: cluster {} opened on line {} is never closed", doc_.doc_id, id,
                                     stack.back().line));
      }
    }
    EntityPartition partition;
    for (long id : cluster_order_) partition.entities.push_back(std::move(clusters_[id]));
    normalize(partition);
    try {
      validate_disjoint(partition, doc_.doc_id);
    } catch (const InputError& e) {
      throw ParseError(file_, line_no, 1, e.what());
    }
    if (std::all_of(doc_.speakers.begin(), doc_.speakers.end(), [](const std::string& sp) { return sp == "-"; })) {
      doc_.speakers.clear();
    }
    if (!doc_.speakers.empty() && doc_.speakers.size() != doc_.token_count()) {
      throw ParseError(file_, line_no, 1, fmt::format("{}: inconsistent speaker column", doc_.doc_id));
    }
    if (source_ == PartitionSource::Gold) {
      doc_.gold = std::move(partition);
    } else {
      doc_.predicted = std::move(partition);
    }
    docs_.push_back(std::move(doc_));
    open_ = false;
  }

  struct OpenBracket {
    std::size_t token;
    std::size_t line;
  };

  std::string file_;
  PartitionSource source_;
  Diagnostics* diag_;
  std::vector<Document> docs_;
  Document doc_;
  bool open_ = false;
  std::vector<std::string> sentence_;
  std::size_t sentence_start_ = 0;
  std::size_t columns_ = 0;
  std::map<long, Entity> clusters_;
  std::vector<long> cluster_order_;
  std::map<long, std::vector<OpenBracket>> stacks_;
};

}  // namespace

std::vector<Document> parse_conll_coref(std::istream& in, const std::string& name, PartitionSource source,
                                        Diagnostics* diag) {
  return ConllCorefReader(name, source, diag).read(in);
}

std::vector<Document> parse_conll_coref(const std::filesystem::path& path, PartitionSource source, Diagnostics* diag) {
  std::istringstream in(read_file(path));
  return parse_conll_coref(in, path.string(), source, diag);
}

void write_conll_coref(std::ostream& out, const std::vector<Document>& docs, PartitionSource source) {
  for (const auto& doc : docs) {
    std::string name = doc.doc_id;
    std::string part = "000";
    if (const auto colon = doc.doc_id.rfind(':'); colon != std::string::npos) {
      name = doc.doc_id.substr(0, colon);
      part = doc.doc_id.substr(colon + 1);
    }
    const EntityPartition empty;
    const EntityPartition& partition =
        source == PartitionSource::Gold ? doc.gold : (doc.predicted ? *doc.predicted : empty);

    // Per token: closes (innermost first), then multi-token opens (outermost
    // first), then single-token mentions. This order keeps same-cluster
    // nesting unambiguous for a stack-based reader.
    struct Mark {
      std::size_t other;
      std::size_t cluster;
    };
    std::vector<std::vector<Mark>> opens(doc.token_count()), closes(doc.token_count());
    std::vector<std::vector<std::size_t>> singles(doc.token_count());
    for (std::size_t c = 0; c < partition.entities.size(); ++c) {
      for (const auto& m : partition.entities[c]) {
        if (m.start == m.end) {
          singles[m.start].push_back(c);
        } else {
          opens[m.start].push_back({m.end, c});
          closes[m.end].push_back({m.start, c});
        }
      }
    }
    out << "#begin document (" << name << "); part " << part << '\n';
    for (std::size_t s = 0; s < doc.sentence_count(); ++s) {
      for (std::size_t t = doc.sentence_begin(s); t < doc.sentence_end(s); ++t) {
        auto& cl = closes[t];
        std::sort(cl.begin(), cl.end(), [](const Mark& a, const Mark& b) {
          return a.other != b.other ? a.other > b.other : a.cluster < b.cluster;
        });
        auto& op = opens[t];
        std::sort(op.begin(), op.end(), [](const Mark& a, const Mark& b) {
          return a.other != b.other ? a.other > b.other : a.cluster < b.cluster;
        });
        std::string coref;
        auto append = [&](const std::string& piece) {
          if (!coref.empty()) coref += '|';
          coref += piece;
        };
        for (const auto& m : cl) append(fmt::format("{})", m.cluster));
        for (const auto& m : op) append(fmt::format("({}", m.cluster));
        for (auto c : singles[t]) append(fmt::format("({})", c));
        if (coref.empty()) coref = "-";
        const std::string speaker = doc.speakers.empty() ? "-" : doc.speakers[t];
        out << fmt::format("{}\t{}\t{}\t{}\t-\t-\t-\t-\t-\t{}\t-\t{}\n", name, part, t - doc.sentence_begin(s),
                           doc.tokens[t], speaker, coref);
      }
      out << '\n';
    }
    out << "#end document\n";
  }
}

}  // namespace corefmeter
