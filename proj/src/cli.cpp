#include "coref_meter/cli.hpp"
#include "coref_meter/consistency.hpp"
#include "coref_meter/corpus_io.hpp"
#include "coref_meter/disagg_eval.hpp"
#include "coref_meter/hierarchy.hpp"
#include "coref_meter/parallel.hpp"
#include "coref_meter/pcr_bench.hpp"
#include "coref_meter/plausibility.hpp"
#include "coref_meter/report.hpp"
#include "coref_meter/score_grid.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <charconv>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

namespace corefmeter {

namespace {

constexpr std::size_t kMaxLoggedWarnings = 20;

struct Common {
  std::size_t threads = 0;  // 0: from the environment
  std::string format = "json";
  std::string out;
  std::string report;
  std::string config;
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(const std::vector<std::string>& args);

 private:
  void setup();
  void add_score();
  void add_classify();
  void add_disagg();
  void add_gap();
  void add_permtest();
  void add_pcr();
  void add_plaus();
  void add_consistency();
  void add_auc();

  std::size_t threads() const { return common_.threads > 0 ? common_.threads : default_thread_count(); }

  /// Report commands: the report goes to --out or standard output.
  void emit_report(const std::string& command, const Json& config, Json result);
  /// Data commands: data goes to --out (required), the report to --report
  /// or standard output.
  void emit_data(const std::string& command, const std::string& data, const Json& config, Json result);
  std::string render(const Json& report) const;
  void log_diagnostics();

  std::vector<Document> load_gold_and_pred(const std::string& gold, const std::string& pred);
  Hierarchy load_hierarchy(const std::string& edges, const std::string& senses, int min_depth,
                           const std::string& root);

  std::ostream& out_;
  std::ostream& err_;
  CLI::App app_{"Coreference and plausibility evaluation workbench", kToolName};
  Common common_;
  Diagnostics diag_;
  std::function<void()> action_;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--threads", c.threads, "Worker threads (default: $COREF_METER_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--format", c.format, "Report format")->check(CLI::IsMember({"json", "md"}));
  sub->add_option("--out", c.out, "Output file (report, or data for data-producing commands)");
  sub->add_option("--report", c.report, "Report file for data-producing commands");
}

std::string ext_of(const std::string& path) { return std::filesystem::path(path).extension().string(); }

std::vector<double> read_reals(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == '#') continue;
    // Last tab-separated field, so `id<TAB>value` rows work too.
    const auto tab = line.rfind('\t');
    std::string cell = line.substr(tab == std::string::npos ? b : tab + 1);
    while (!cell.empty() && (cell.back() == ' ')) cell.pop_back();
    double v = 0;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || p != cell.data() + cell.size() || !std::isfinite(v)) {
      throw ParseError(path, line_no, 0, fmt::format("'{}' is not a number", cell));
    }
    values.push_back(v);
  }
  return values;
}

std::vector<Triple> read_events(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<Triple> events;
  std::string line;
  std::size_t line_no = 0;
  const bool jsonl = ext_of(path) == ".jsonl" || ext_of(path) == ".json";
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    if (jsonl) {
      try {
        const auto j = Json::parse(line);
        const auto& e = j.at("event");
        if (e.is_array() && e.size() == 3) {
          events.push_back({e[0].get<std::string>(), e[1].get<std::string>(), e[2].get<std::string>()});
        } else {
          events.push_back({e.at("subject").get<std::string>(), e.at("verb").get<std::string>(),
                            e.at("object").get<std::string>()});
        }
      } catch (const Json::exception& ex) {
        throw ParseError(path, line_no, 0, ex.what());
      }
      continue;
    }
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      const auto tab = line.find('\t', pos);
      cols.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    if (cols.size() < 3) throw ParseError(path, line_no, 0, "expected subject, verb and object columns");
    events.push_back({cols[0], cols[1], cols[2]});
  }
  return events;
}

PronounSet read_pronouns(const std::string& path) {
  std::istringstream in(read_file(path));
  PronounSet set;
  std::string word;
  while (in >> word) {
    if (word.starts_with('#')) {
      std::getline(in, word);
      continue;
    }
    for (auto& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (std::find(set.words.begin(), set.words.end(), word) == set.words.end()) set.words.push_back(word);
  }
  if (set.words.empty()) throw InputError(fmt::format("pronoun file '{}' is empty", path));
  return set;
}

std::optional<Slot> slot_arg(const std::string& text) {
  if (text == "subj") return Slot::Subject;
  if (text == "obj") return Slot::Object;
  return parse_slot(text);
}

const std::string& slot_word(const Triple& t, Slot s) {
  switch (s) {
    case Slot::Subject: return t.subject;
    case Slot::Verb: return t.verb;
    case Slot::Object: return t.object;
  }
  return t.verb;
}

}  // namespace

std::string Runner::render(const Json& report) const {
  return common_.format == "md" ? render_markdown(report) : report.dump(2) + "\n";
}

void Runner::log_diagnostics() {
  std::size_t shown = 0;
  for (const auto& w : diag_.warnings) {
    if (shown++ == kMaxLoggedWarnings) {
      err_ << fmt::format("warning: ... {} more\n", diag_.warnings.size() - kMaxLoggedWarnings);
      break;
    }
    err_ << "warning: " << w << '\n';
  }
}

void Runner::emit_report(const std::string& command, const Json& config, Json result) {
  const auto text = render(make_report(command, config, std::move(result), diag_));
  if (common_.out.empty()) {
    out_ << text;
  } else {
    write_file_atomic(common_.out, text);
  }
}

void Runner::emit_data(const std::string& command, const std::string& data, const Json& config, Json result) {
  if (common_.out.empty()) throw InputError(fmt::format("{} needs --out", command));
  write_file_atomic(common_.out, data);
  const auto text = render(make_report(command, config, std::move(result), diag_));
  if (common_.report.empty()) {
    out_ << text;
  } else {
    write_file_atomic(common_.report, text);
  }
}

std::vector<Document> Runner::load_gold_and_pred(const std::string& gold, const std::string& pred) {
  auto docs = load_documents(gold, PartitionSource::Gold, &diag_);
  if (!pred.empty()) {
    const auto preds = load_documents(pred, PartitionSource::Predicted, &diag_);
    merge_predictions(docs, preds);
  }
  for (const auto& d : docs) {
    if (!d.predicted) throw InputError(fmt::format("{}: no predictions; pass --pred", d.doc_id));
  }
  return docs;
}

Hierarchy Runner::load_hierarchy(const std::string& edges, const std::string& senses, int min_depth,
                                 const std::string& root) {
  HierarchyOptions options;
  options.min_depth = min_depth;
  if (!root.empty()) options.root = root;
  if (senses.empty()) {
    std::istringstream edges_in(read_file(edges));
    std::istringstream none;
    return parse_hierarchy(edges_in, edges, none, "(no senses)", options, &diag_);
  }
  return parse_hierarchy(edges, senses, options, &diag_);
}

void Runner::add_score() {
  auto* sub = app_.add_subcommand("score", "MUC, B3, CEAF_e and CoNLL F1");
  add_common(sub, common_);
  struct Opts {
    std::string gold, pred;
    bool keep_singletons = false, macro = false, per_doc = false;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--gold", o->gold, "Gold documents (CoNLL-2012 or JSON lines)")->required();
  sub->add_option("--pred", o->pred, "Predicted documents");
  sub->add_flag("--keep-singletons", o->keep_singletons, "Score singleton entities too");
  sub->add_flag("--macro", o->macro, "Average per-document scores instead of summing counts");
  sub->add_flag("--per-doc", o->per_doc, "Include per-document scores");
  sub->callback([this, o] {
    action_ = [this, o] {
      auto docs = load_gold_and_pred(o->gold, o->pred);
      ScoringOptions options{o->keep_singletons, o->macro, threads()};
      const auto scores = score_corpus(docs, options);
      Json result{{"overall", to_json(scores.overall)},
                  {"documents", docs.size()},
                  {"ceaf_similarity", "phi4"},
                  {"singletons", o->keep_singletons ? "kept" : "removed"},
                  {"aggregation", o->macro ? "macro" : "micro"}};
      if (o->per_doc) {
        Json per = Json::array();
        for (const auto& d : scores.documents) per.push_back(to_json(d));
        result["per_document"] = per;
      }
      const Json config{{"gold", o->gold},
                        {"pred", o->pred},
                        {"keep_singletons", o->keep_singletons},
                        {"macro", o->macro},
                        {"per_doc", o->per_doc}};
      emit_report("score", config, std::move(result));
    };
  });
}

void Runner::add_classify() {
  auto* sub = app_.add_subcommand("classify", "Type coreferring mentions from dependency parses");
  add_common(sub, common_);
  struct Opts {
    std::string docs, pred, deps, source = "gold";
    bool keep_singletons = false, no_number_feature = false;
    std::vector<std::string> plural_xpos{"NNS", "NNPS"};
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--docs", o->docs, "Documents (CoNLL-2012 or JSON lines)")->required();
  sub->add_option("--pred", o->pred, "Predicted documents, for --source predicted");
  sub->add_option("--deps", o->deps, "CoNLL-U parses aligned with the documents");
  sub->add_option("--source", o->source, "Partition to type")->check(CLI::IsMember({"gold", "predicted"}));
  sub->add_flag("--keep-singletons", o->keep_singletons, "Type singleton mentions too");
  sub->add_option("--plural-xpos", o->plural_xpos, "Penn tags counted as plural nouns");
  sub->add_flag("--no-number-feature", o->no_number_feature, "Ignore Number=Plur in the feature column");
  sub->callback([this, o] {
    action_ = [this, o] {
      std::vector<Document> docs;
      if (o->source == "predicted") {
        docs = load_gold_and_pred(o->docs, o->pred);
      } else {
        docs = load_documents(o->docs, PartitionSource::Gold, &diag_);
      }
      if (!o->deps.empty()) attach_dependencies(docs, parse_conllu(std::filesystem::path(o->deps)));
      TypingOptions typing;
      typing.plural_xpos = {o->plural_xpos.begin(), o->plural_xpos.end()};
      typing.number_feature = !o->no_number_feature;
      std::vector<std::pair<std::string, TypeMap>> maps(docs.size());
      std::vector<Diagnostics> local(docs.size());
      parallel_for(docs.size(), threads(), [&](std::size_t i) {
        const auto& p = o->source == "gold" ? docs[i].gold : *docs[i].predicted;
        const auto partition = o->keep_singletons ? p : without_singletons(p);
        maps[i] = {docs[i].doc_id, type_partition(docs[i], partition, typing, &local[i])};
      });
      for (const auto& d : local) diag_.merge(d);
      std::ostringstream data;
      write_type_maps(data, maps);
      std::map<std::string, std::size_t> per_type;
      for (auto t : kAllTypes) per_type[std::string(to_string(t))] = 0;
      std::size_t mentions = 0, untyped = 0;
      for (const auto& [id, map] : maps) {
        for (const auto& [m, tm] : map) {
          ++mentions;
          untyped += tm.untyped();
          for (auto t : tm.types) ++per_type[std::string(to_string(t))];
        }
      }
      Json result{{"documents", docs.size()}, {"mentions", mentions}, {"untyped", untyped}, {"per_type", per_type}};
      const Json config{{"docs", o->docs},
                        {"pred", o->pred},
                        {"deps", o->deps},
                        {"source", o->source},
                        {"keep_singletons", o->keep_singletons},
                        {"plural_xpos", o->plural_xpos},
                        {"number_feature", !o->no_number_feature}};
      emit_data("classify", data.str(), config, std::move(result));
    };
  });
}

void Runner::add_disagg() {
  auto* sub = app_.add_subcommand("disagg", "Overall and type-restricted B3");
  add_common(sub, common_);
  struct Opts {
    std::string gold, pred, deps, types, pred_types, dataset;
    bool keep_singletons = false, macro = false;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--gold", o->gold, "Gold documents")->required();
  sub->add_option("--pred", o->pred, "Predicted documents");
  sub->add_option("--deps", o->deps, "CoNLL-U parses; types are computed for both partitions");
  sub->add_option("--types", o->types, "Gold mention types from `classify`");
  sub->add_option("--pred-types", o->pred_types, "Predicted mention types from `classify --source predicted`");
  sub->add_option("--dataset", o->dataset, "Dataset name recorded in the report");
  sub->add_flag("--keep-singletons", o->keep_singletons, "Score singleton entities too");
  sub->add_flag("--macro", o->macro, "Macro-average the overall scores");
  sub->callback([this, o] {
    action_ = [this, o] {
      auto docs = load_gold_and_pred(o->gold, o->pred);
      ScoringOptions options{o->keep_singletons, o->macro, threads()};
      std::vector<DocumentTypes> types;
      if (!o->types.empty() || !o->pred_types.empty()) {
        if (o->types.empty() || o->pred_types.empty()) throw InputError("--types and --pred-types go together");
        const auto gold_maps = parse_type_maps(std::filesystem::path(o->types));
        const auto pred_maps = parse_type_maps(std::filesystem::path(o->pred_types));
        for (const auto& d : docs) {
          DocumentTypes t;
          if (auto it = gold_maps.find(d.doc_id); it != gold_maps.end()) t.gold = it->second;
          if (auto it = pred_maps.find(d.doc_id); it != pred_maps.end()) t.pred = it->second;
          types.push_back(std::move(t));
        }
      } else {
        if (!o->deps.empty()) attach_dependencies(docs, parse_conllu(std::filesystem::path(o->deps)));
        types = type_documents(docs, options, {}, &diag_);
      }
      const auto report = disaggregate(docs, types, options, o->dataset.empty() ? o->gold : o->dataset);
      const Json config{{"gold", o->gold},
                        {"pred", o->pred},
                        {"deps", o->deps},
                        {"types", o->types},
                        {"pred_types", o->pred_types},
                        {"dataset", o->dataset},
                        {"keep_singletons", o->keep_singletons},
                        {"macro", o->macro}};
      emit_report("disagg", config, to_json(report));
    };
  });
}

void Runner::add_gap() {
  auto* sub = app_.add_subcommand("gap", "Aggregate and per-type generalization gaps");
  add_common(sub, common_);
  struct Opts {
    std::string in, out_domain;
    double threshold = 0.10;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--in", o->in, "In-domain disagg report (JSON)")->required();
  sub->add_option("--out-domain", o->out_domain, "Out-of-domain disagg report (JSON)")->required();
  sub->add_option("--threshold", o->threshold, "Highlight types with |TGG - AGG| above this (F1 fraction)")
      ->check(CLI::NonNegativeNumber);
  sub->callback([this, o] {
    action_ = [this, o] {
      auto load = [](const std::string& path) {
        try {
          return disagg_report_from_json(Json::parse(read_file(path)));
        } catch (const Json::exception& e) {
          throw InputError(fmt::format("{}: {}", path, e.what()));
        }
      };
      const auto a = load(o->in);
      const auto b = load(o->out_domain);
      Json result = to_json(generalization_gap(a, b, o->threshold));
      result["in_domain"] = a.dataset;
      result["out_domain"] = b.dataset;
      const Json config{{"in", o->in}, {"out_domain", o->out_domain}, {"threshold", o->threshold}};
      emit_report("gap", config, std::move(result));
    };
  });
}

void Runner::add_permtest() {
  auto* sub = app_.add_subcommand("permtest", "Paired permutation test");
  add_common(sub, common_);
  struct Opts {
    std::string a, b, gold, pred_a, pred_b, metric = "b3";
    std::uint64_t iterations = 10000, seed = 0;
    double alpha = 0.1;
    bool keep_singletons = false;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--a", o->a, "Per-document reals for system A (one per line)");
  sub->add_option("--b", o->b, "Per-document reals for system B");
  sub->add_option("--gold", o->gold, "Gold documents, for a corpus-F1 test");
  sub->add_option("--pred-a", o->pred_a, "System A predictions");
  sub->add_option("--pred-b", o->pred_b, "System B predictions");
  sub->add_option("--metric", o->metric, "Metric for the corpus-F1 test")
      ->check(CLI::IsMember({"muc", "b3", "ceaf_e", "conll"}));
  sub->add_option("--iterations", o->iterations, "Permutations")->check(CLI::PositiveNumber);
  sub->add_option("--seed", o->seed, "Random seed");
  sub->add_option("--alpha", o->alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  sub->add_flag("--keep-singletons", o->keep_singletons, "Score singleton entities too");
  sub->callback([this, o] {
    action_ = [this, o] {
      PermutationResult r;
      std::string mode;
      if (!o->a.empty() || !o->b.empty()) {
        if (o->a.empty() || o->b.empty()) throw InputError("--a and --b go together");
        mode = "paired-reals";
        r = permutation_test(read_reals(o->a), read_reals(o->b), o->iterations, o->seed, threads());
      } else {
        if (o->gold.empty() || o->pred_a.empty() || o->pred_b.empty()) {
          throw InputError("give --a/--b, or --gold with --pred-a and --pred-b");
        }
        mode = "corpus-f1";
        ScoringOptions options{o->keep_singletons, false, threads()};
        const auto sa = score_corpus(load_gold_and_pred(o->gold, o->pred_a), options);
        const auto sb = score_corpus(load_gold_and_pred(o->gold, o->pred_b), options);
        r = permutation_test_systems(sa.documents, sb.documents, *parse_coref_metric(o->metric), o->iterations,
                                     o->seed, threads());
      }
      Json result = to_json(r);
      result["mode"] = mode;
      result["alpha"] = o->alpha;
      result["significant"] = r.p_value < o->alpha;
      const Json config{{"a", o->a},           {"b", o->b},         {"gold", o->gold},
                        {"pred_a", o->pred_a}, {"pred_b", o->pred_b}, {"metric", o->metric},
                        {"iterations", o->iterations}, {"seed", o->seed}, {"alpha", o->alpha},
                        {"keep_singletons", o->keep_singletons}};
      emit_report("permtest", config, std::move(result));
    };
  });
}

void Runner::add_pcr() {
  auto* pcr = app_.add_subcommand("pcr", "Binary pronominal coreference benchmark");
  pcr->require_subcommand(1);
  pcr->fallthrough();

  {
    auto* sub = pcr->add_subcommand("extract", "Build instances from annotated documents");
    add_common(sub, common_);
    struct Opts {
      std::string docs, deps, pronouns;
      std::uint64_t seed = 0;
      std::size_t preceding = 2;
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("--docs", o->docs, "Gold documents")->required();
    sub->add_option("--deps", o->deps, "CoNLL-U parses (nominal check by POS)");
    sub->add_option("--pronouns", o->pronouns, "Pronoun list, one per line (default: the standard 16)");
    sub->add_option("--seed", o->seed, "Random seed");
    sub->add_option("--preceding", o->preceding, "Preceding sentences in the window");
    sub->callback([this, o] {
      action_ = [this, o] {
        auto docs = load_documents(o->docs, PartitionSource::Gold, &diag_);
        if (!o->deps.empty()) attach_dependencies(docs, parse_conllu(std::filesystem::path(o->deps)));
        ExtractOptions options;
        if (!o->pronouns.empty()) options.pronouns = read_pronouns(o->pronouns);
        options.seed = o->seed;
        options.preceding_sentences = o->preceding;
        options.threads = threads();
        const auto instances = extract_instances(docs, options, &diag_);
        std::ostringstream data;
        write_instances(data, instances);
        Json result{{"documents", docs.size()},
                    {"instances", instances.size()},
                    {"nominal_rule", o->deps.empty() ? "multi-token span or non-pronoun token"
                                                     : "head UPOS NOUN/PROPN or XPOS NN*"},
                    {"pronouns", options.pronouns.words}};
        const Json config{{"docs", o->docs},
                          {"deps", o->deps},
                          {"pronouns", o->pronouns},
                          {"seed", o->seed},
                          {"preceding", o->preceding}};
        emit_data("pcr extract", data.str(), config, std::move(result));
      };
    });
  }
  {
    auto* sub = pcr->add_subcommand("score", "Accuracy of predictions with 90% intervals");
    add_common(sub, common_);
    struct Opts {
      std::string instances, predictions;
      bool strict = false;
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("--instances", o->instances, "Instances (JSON lines)")->required();
    sub->add_option("--predictions", o->predictions, "Predictions (JSON lines)")->required();
    sub->add_flag("--strict", o->strict, "Count missing predictions as wrong");
    sub->callback([this, o] {
      action_ = [this, o] {
        const auto report = score_predictions(parse_instances(std::filesystem::path(o->instances)),
                                              parse_predictions(std::filesystem::path(o->predictions)), o->strict);
        const Json config{{"instances", o->instances}, {"predictions", o->predictions}, {"strict", o->strict}};
        emit_report("pcr score", config, to_json(report));
      };
    });
  }
  {
    auto* sub = pcr->add_subcommand("ensemble", "Route between a supervised system and a language model");
    add_common(sub, common_);
    struct Opts {
      std::string supervised, lm;
      int supervised_choice = 0, lm_choice = 0;
      std::size_t cluster_size = 0;
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("--supervised", o->supervised,
                    "Supervised predictions (JSON lines with instance_id, prediction, cluster_size)");
    sub->add_option("--lm", o->lm, "Language-model predictions (JSON lines)");
    sub->add_option("--supervised-choice", o->supervised_choice, "Single decision: supervised choice");
    sub->add_option("--lm-choice", o->lm_choice, "Single decision: language-model choice");
    sub->add_option("--cluster-size", o->cluster_size, "Single decision: predicted cluster size");
    sub->callback([this, o] {
      action_ = [this, o] {
        const Json config{{"supervised", o->supervised},
                          {"lm", o->lm},
                          {"supervised_choice", o->supervised_choice},
                          {"lm_choice", o->lm_choice},
                          {"cluster_size", o->cluster_size}};
        if (o->supervised.empty() && o->lm.empty()) {
          const int choice = ensemble_select(o->supervised_choice, o->lm_choice, o->cluster_size);
          emit_report("pcr ensemble", config,
                      {{"choice", choice}, {"source", o->cluster_size > 2 ? "supervised" : "lm"}});
          return;
        }
        if (o->supervised.empty() || o->lm.empty()) throw InputError("--supervised and --lm go together");
        const auto lm = parse_predictions(std::filesystem::path(o->lm));
        std::istringstream in(read_file(o->supervised));
        std::string line;
        std::size_t line_no = 0, from_supervised = 0, total = 0;
        std::ostringstream data;
        while (std::getline(in, line)) {
          ++line_no;
          if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
          try {
            const auto j = Json::parse(line);
            const auto id = j.at("instance_id").get<std::string>();
            auto it = lm.find(id);
            if (it == lm.end()) throw InputError(fmt::format("no language-model prediction for '{}'", id));
            const auto size = j.at("cluster_size").get<std::size_t>();
            const int choice = ensemble_select(j.at("prediction").get<int>(), it->second, size);
            from_supervised += size > 2;
            ++total;
            data << Json{{"instance_id", id}, {"prediction", choice}}.dump() << '\n';
          } catch (const Json::exception& e) {
            throw ParseError(o->supervised, line_no, 0, e.what());
          } catch (const ParseError&) {
            throw;
          } catch (const InputError& e) {
            throw ParseError(o->supervised, line_no, 0, e.what());
          }
        }
        emit_data("pcr ensemble", data.str(), config, {{"instances", total}, {"from_supervised", from_supervised}});
      };
    });
  }
  {
    auto* sub = pcr->add_subcommand("assume", "Check the challenge-set ordering assumption");
    add_common(sub, common_);
    auto u = std::make_shared<std::array<double, 4>>();
    sub->add_option("--u-tc", (*u)[0], "Accuracy of system theta on the challenge set")->required();
    sub->add_option("--u-pc", (*u)[1], "Accuracy of system phi on the challenge set")->required();
    sub->add_option("--u-td", (*u)[2], "Accuracy of system theta on the general task")->required();
    sub->add_option("--u-pd", (*u)[3], "Accuracy of system phi on the general task")->required();
    sub->callback([this, u] {
      action_ = [this, u] {
        const auto c = check_assumption((*u)[0], (*u)[1], (*u)[2], (*u)[3]);
        const Json config{{"u_tc", (*u)[0]}, {"u_pc", (*u)[1]}, {"u_td", (*u)[2]}, {"u_pd", (*u)[3]}};
        emit_report("pcr assume", config, to_json(c));
      };
    });
  }
  {
    auto* sub = pcr->add_subcommand("prompt", "Render prompts from a user template");
    add_common(sub, common_);
    struct Opts {
      std::string instances, template_path, features;
      bool speakers = false;
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("--instances", o->instances, "Instances (JSON lines)")->required();
    sub->add_option("--template", o->template_path, "Template file with {context} {pronoun} {cand1} {cand2} {speaker}")
        ->required();
    sub->add_option("--features", o->features, "Features (JSON lines: instance_id, features[{name,target,value}])");
    sub->add_flag("--speakers", o->speakers, "Prefix speaker turns in the context");
    sub->callback([this, o] {
      action_ = [this, o] {
        const auto instances = parse_instances(std::filesystem::path(o->instances));
        auto tmpl = read_file(o->template_path);
        while (!tmpl.empty() && (tmpl.back() == '\n' || tmpl.back() == '\r')) tmpl.pop_back();
        std::map<std::string, std::vector<Feature>> features;
        if (!o->features.empty()) {
          std::istringstream in(read_file(o->features));
          std::string line;
          std::size_t line_no = 0;
          while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
              const auto j = Json::parse(line);
              auto& list = features[j.at("instance_id").get<std::string>()];
              for (const auto& f : j.at("features")) {
                list.push_back({f.at("name").get<std::string>(), f.at("target").get<std::string>(),
                                f.at("value").get<std::string>()});
              }
            } catch (const Json::exception& e) {
              throw ParseError(o->features, line_no, 0, e.what());
            }
          }
        }
        std::vector<std::string> prompts(instances.size());
        parallel_for(instances.size(), threads(), [&](std::size_t i) {
          auto it = features.find(instances[i].instance_id);
          prompts[i] = format_prompt(instances[i], tmpl, it == features.end() ? std::vector<Feature>{} : it->second,
                                     {o->speakers});
        });
        std::ostringstream data;
        for (std::size_t i = 0; i < instances.size(); ++i) {
          data << Json{{"instance_id", instances[i].instance_id}, {"prompt", prompts[i]}}.dump() << '\n';
        }
        const Json config{{"instances", o->instances},
                          {"template", o->template_path},
                          {"features", o->features},
                          {"speakers", o->speakers}};
        emit_data("pcr prompt", data.str(), config, {{"prompts", prompts.size()}});
      };
    });
  }
}

void Runner::add_plaus() {
  auto* plaus = app_.add_subcommand("plaus", "Count-based plausibility models");
  plaus->require_subcommand(1);
  plaus->fallthrough();

  {
    auto* sub = plaus->add_subcommand("build-counts", "Merge triple count shards");
    add_common(sub, common_);
    struct Opts {
      std::vector<std::string> triples;
      std::int64_t cap = 0;
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("--triples", o->triples, "Triple TSV shards")->required();
    sub->add_option("--cap-per-triple", o->cap, "Clamp each merged triple count (e.g. 1000)")
        ->check(CLI::PositiveNumber);
    sub->callback([this, o] {
      action_ = [this, o] {
        std::vector<TripleCounts> shards(o->triples.size());
        parallel_for(o->triples.size(), threads(),
                     [&](std::size_t i) { shards[i] = parse_triples(std::filesystem::path(o->triples[i])); });
        TripleCounts merged;
        for (const auto& s : shards) merged.merge(s);
        if (o->cap > 0) merged.cap(o->cap);
        std::ostringstream data;
        write_triples(data, merged);
        const Json config{{"triples", o->triples}, {"cap_per_triple", o->cap}};
        emit_data("plaus build-counts", data.str(), config,
                  {{"shards", shards.size()}, {"unique_triples", merged.triples().size()}, {"total", merged.total()}});
      };
    });
  }
  {
    auto* sub = plaus->add_subcommand("score", "Score events with one model");
    add_common(sub, common_);
    struct Opts {
      std::string counts, model, events, hierarchy, senses, root, roles, vectors, relation = "verb,object",
                                                                                   role = "obj", exemplar_slot = "object";
      int min_depth = 1;
      std::int64_t cap = 0;
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("--counts", o->counts, "Triple counts TSV")->required();
    sub->add_option("--model", o->model, "Model")
        ->required()
        ->check(CLI::IsMember({"ngram", "pmi", "resnik", "pado", "exemplar"}));
    sub->add_option("--events", o->events, "Events to score (TSV s v o, or JSON lines with `event`)")->required();
    sub->add_option("--hierarchy", o->hierarchy, "Hierarchy edges TSV (resnik)");
    sub->add_option("--senses", o->senses, "Sense map TSV (resnik)");
    sub->add_option("--min-depth", o->min_depth, "Drop concepts shallower than this")->check(CLI::PositiveNumber);
    sub->add_option("--root", o->root, "Hierarchy root");
    sub->add_option("--roles", o->roles, "Role counts TSV `predicate role argument count` (pado)");
    sub->add_option("--role", o->role, "Role scored by pado");
    sub->add_option("--vectors", o->vectors, "Word vectors (exemplar)");
    sub->add_option("--relation", o->relation, "Slot pair scored by pmi, e.g. verb,object");
    sub->add_option("--exemplar-slot", o->exemplar_slot, "Slot whose attested fillers are exemplars")
        ->check(CLI::IsMember({"subject", "object"}));
    sub->add_option("--cap-per-triple", o->cap, "Clamp triple counts on load")->check(CLI::PositiveNumber);
    sub->callback([this, o] {
      action_ = [this, o] {
        TripleParseOptions parse_options;
        if (o->cap > 0) parse_options.cap_per_triple = o->cap;
        const auto counts = parse_triples(std::filesystem::path(o->counts), parse_options);
        const auto events = read_events(o->events);

        Relation relation;
        {
          const auto comma = o->relation.find(',');
          const auto a = comma == std::string::npos ? std::nullopt : slot_arg(o->relation.substr(0, comma));
          const auto b = comma == std::string::npos ? std::nullopt : slot_arg(o->relation.substr(comma + 1));
          if (!a || !b || *a == *b) throw InputError(fmt::format("bad --relation '{}'", o->relation));
          relation = {*a, *b};
        }
        std::optional<Hierarchy> hierarchy;
        std::optional<ConceptDistribution> dist;
        std::optional<RoleCounts> roles;
        std::optional<WordVectors> vectors;
        const Slot exemplar_slot = o->exemplar_slot == "subject" ? Slot::Subject : Slot::Object;
        if (o->model == "resnik") {
          if (o->hierarchy.empty() || o->senses.empty()) throw InputError("resnik needs --hierarchy and --senses");
          hierarchy = load_hierarchy(o->hierarchy, o->senses, o->min_depth, o->root);
          dist = build_concept_distribution(counts, *hierarchy, &diag_);
        } else if (o->model == "pado") {
          roles = o->roles.empty() ? RoleCounts::from_triples(counts) : parse_role_counts(std::filesystem::path(o->roles));
        } else if (o->model == "exemplar") {
          if (o->vectors.empty()) throw InputError("exemplar needs --vectors");
          vectors = parse_word_vectors(std::filesystem::path(o->vectors));
        }

        std::vector<PlausibilityScore> scores(events.size());
        parallel_for(events.size(), threads(), [&](std::size_t i) {
          const auto& e = events[i];
          if (o->model == "ngram") {
            scores[i] = ngram_score(counts, e);
          } else if (o->model == "pmi") {
            const auto v = pmi(counts, slot_word(e, relation.first), slot_word(e, relation.second), relation);
            scores[i] = {v, v ? std::vector<std::string>{} : std::vector<std::string>{"zero-count"}};
          } else if (o->model == "resnik") {
            scores[i] = resnik_score(*dist, *hierarchy, e.verb, e.object);
          } else if (o->model == "pado") {
            scores[i] = pado_score(*roles, e.verb, o->role == "subj" ? e.subject : e.object, o->role);
          } else {
            const auto seen = seen_arguments(counts, e.verb, exemplar_slot);
            scores[i] = exemplar_score(*vectors, seen, exemplar_slot == Slot::Subject ? e.subject : e.object);
          }
        });
        std::ostringstream data;
        std::size_t undefined = 0;
        for (std::size_t i = 0; i < events.size(); ++i) {
          const auto& e = events[i];
          undefined += !scores[i].value;
          for (const auto& f : scores[i].flags) diag_.count("flag:" + f);
          data << Json{{"event", {e.subject, e.verb, e.object}},
                       {"model", o->model},
                       {"score", optional_number(scores[i].value)},
                       {"flags", scores[i].flags}}
                      .dump()
               << '\n';
        }
        Json result{{"events", events.size()}, {"undefined", undefined}, {"model", o->model}, {"log_base", "e"}};
        if (o->model == "resnik") {
          result["resnik_prior"] = "all object occurrences";
          result["objects_without_senses"] = dist->dropped_words;
        }
        if (o->model == "exemplar") result["exemplar_weight"] = "attestation frequency";
        const Json config{{"counts", o->counts},   {"model", o->model},       {"events", o->events},
                          {"hierarchy", o->hierarchy}, {"senses", o->senses}, {"min_depth", o->min_depth},
                          {"root", o->root},       {"roles", o->roles},       {"role", o->role},
                          {"vectors", o->vectors}, {"relation", o->relation}, {"exemplar_slot", o->exemplar_slot},
                          {"cap_per_triple", o->cap}};
        emit_data("plaus score", data.str(), config, std::move(result));
      };
    });
  }
  {
    auto* sub = plaus->add_subcommand("gen-pairs", "Pseudo-disambiguation training pairs");
    add_common(sub, common_);
    struct Opts {
      std::string counts;
      std::size_t n = 0;
      std::uint64_t seed = 0;
      std::int64_t min_position_count = 1;
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("--counts", o->counts, "Triple counts TSV")->required();
    sub->add_option("--n", o->n, "Number of pairs")->required();
    sub->add_option("--seed", o->seed, "Random seed");
    sub->add_option("--min-position-count", o->min_position_count, "Minimum positional frequency (e.g. 1000)")
        ->check(CLI::PositiveNumber);
    sub->callback([this, o] {
      action_ = [this, o] {
        const auto counts = parse_triples(std::filesystem::path(o->counts));
        PairOptions options{o->seed, o->n, o->min_position_count, threads()};
        const auto pairs = generate_pairs(counts, options);
        std::ostringstream data;
        std::map<std::string, std::size_t> forms;
        for (const auto& p : pairs) {
          ++forms[std::string(to_string(p.form))];
          data << Json{{"attested", {p.attested.subject, p.attested.verb, p.attested.object}},
                       {"perturbed", {p.perturbed.subject, p.perturbed.verb, p.perturbed.object}},
                       {"form", to_string(p.form)}}
                      .dump()
               << '\n';
        }
        const Json config{
            {"counts", o->counts}, {"n", o->n}, {"seed", o->seed}, {"min_position_count", o->min_position_count}};
        emit_data("plaus gen-pairs", data.str(), config, {{"pairs", pairs.size()}, {"forms", forms}});
      };
    });
  }
}

void Runner::add_consistency() {
  auto* sub = app_.add_subcommand("consistency", "CCD and LER over score grids");
  add_common(sub, common_);
  struct Opts {
    std::string grids, hierarchy, senses, root;
    int min_depth = 1;
    bool transform = false;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--grids", o->grids, "Score grids (JSON lines)")->required();
  sub->add_option("--hierarchy", o->hierarchy, "Hierarchy edges TSV; validates the grid chains");
  sub->add_option("--senses", o->senses, "Sense map TSV");
  sub->add_option("--min-depth", o->min_depth, "Drop concepts shallower than this")->check(CLI::PositiveNumber);
  sub->add_option("--root", o->root, "Hierarchy root");
  sub->add_flag("--concept-max", o->transform, "Apply the ConceptMax transform before measuring");
  sub->callback([this, o] {
    action_ = [this, o] {
      std::optional<Hierarchy> hierarchy;
      if (!o->hierarchy.empty()) hierarchy = load_hierarchy(o->hierarchy, o->senses, o->min_depth, o->root);
      auto grids = parse_score_grids(std::filesystem::path(o->grids), hierarchy ? &*hierarchy : nullptr);
      if (o->transform) {
        parallel_for(grids.size(), threads(), [&](std::size_t i) { grids[i] = concept_max_transform(grids[i]); });
      }
      const auto report = evaluate_consistency(grids, threads());
      Json result = to_json(report);
      Json events = Json::array();
      for (std::size_t i = 0; i < grids.size(); ++i) {
        const auto& g = grids[i];
        events.push_back({{"event", {g.event.subject, g.event.verb, g.event.object}},
                          {"concept_max_hard", concept_max(g, MaxMode::Hard)},
                          {"concept_max_soft", concept_max(g, MaxMode::Soft)}});
      }
      result["events"] = events;
      result["concept_max_transform"] = o->transform;
      const Json config{{"grids", o->grids},   {"hierarchy", o->hierarchy}, {"senses", o->senses},
                        {"root", o->root},     {"min_depth", o->min_depth}, {"concept_max", o->transform}};
      emit_report("consistency", config, std::move(result));
    };
  });
}

void Runner::add_auc() {
  auto* sub = app_.add_subcommand("auc", "ROC AUC of event scores against labels");
  add_common(sub, common_);
  struct Opts {
    std::string events, scores, source = "events";
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--events", o->events, "Labeled events (JSON lines with label or answers)")->required();
  sub->add_option("--scores", o->scores, "Event scores (JSON lines with event and score)")->required();
  sub->add_option("--source", o->source, "Source tag for the events");
  sub->callback([this, o] {
    action_ = [this, o] {
      const auto events = parse_labeled_events(std::filesystem::path(o->events), o->source, &diag_);
      const auto scores = parse_event_scores(std::filesystem::path(o->scores));
      std::size_t plausible = 0;
      for (const auto& e : events) plausible += e.plausible;
      Json result{{"auc", auc(events, scores)},
                  {"events", events.size()},
                  {"plausible", plausible},
                  {"implausible", events.size() - plausible}};
      const Json config{{"events", o->events}, {"scores", o->scores}, {"source", o->source}};
      emit_report("auc", config, std::move(result));
    };
  });
}

void Runner::setup() {
  app_.set_version_flag("--version", std::string(kToolVersion));
  app_.set_config("--config", "", "Read options from a TOML/INI file");
  app_.require_subcommand(1);
  app_.fallthrough();
  add_score();
  add_classify();
  add_disagg();
  add_gap();
  add_permtest();
  add_pcr();
  add_plaus();
  add_consistency();
  add_auc();
}

int Runner::run(const std::vector<std::string>& args) {
  setup();
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back(kToolName);
  for (const auto& a : args) storage.push_back(a);
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app_.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app_.exit(e, out_, err_);
  } catch (const CLI::CallForAllHelp& e) {
    return app_.exit(e, out_, err_);
  } catch (const CLI::CallForVersion& e) {
    return app_.exit(e, out_, err_);
  } catch (const CLI::ParseError& e) {
    err_ << kToolName << ": " << e.what() << '\n';
    err_ << app_.help();
    return 1;
  }
  if (!action_) {
    err_ << app_.help();
    return 1;
  }
  try {
    action_();
    log_diagnostics();
    return 0;
  } catch (const InputError& e) {
    log_diagnostics();
    err_ << kToolName << ": error: " << e.what() << '\n';
    return 1;
  } catch (const Json::exception& e) {
    err_ << kToolName << ": error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err_ << kToolName << ": internal error: " << e.what() << '\n';
    return 2;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return Runner(out, err).run(args);
}

}  // namespace corefmeter
