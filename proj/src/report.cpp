#include "coref_meter/report.hpp"
#include "coref_meter/rng.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace corefmeter {

Json optional_number(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

Json to_json(const MetricScore& s) {
  return {{"recall", s.recall},
          {"precision", s.precision},
          {"f1", s.f1},
          {"degenerate_recall", s.degenerate_recall},
          {"degenerate_precision", s.degenerate_precision}};
}

Json to_json(const CorefReport& r) {
  return {{"muc", to_json(r.muc)},
          {"b3", to_json(r.b3)},
          {"ceaf_e", to_json(r.ceaf_e)},
          {"conll_f1", r.conll_f1},
          {"gold_mentions", r.gold_mentions},
          {"pred_mentions", r.pred_mentions}};
}

Json to_json(const DocumentScore& d) {
  Json j = to_json(d.report);
  j["doc_id"] = d.doc_id;
  return j;
}

Json to_json(const TypedScore& s) {
  Json j = to_json(s.score);
  j["gold_mentions"] = s.gold_mentions;
  j["pred_mentions"] = s.pred_mentions;
  return j;
}

Json to_json(const DisaggReport& r) {
  Json types = Json::object();
  for (const auto& [t, s] : r.per_type) types[std::string(to_string(t))] = to_json(s);
  return {{"dataset", r.dataset},
          {"overall", to_json(r.overall)},
          {"per_type", types},
          {"untyped_gold", r.untyped_gold},
          {"untyped_pred", r.untyped_pred}};
}

Json to_json(const GapReport& g) {
  Json tgg = Json::object();
  for (const auto& [t, v] : g.tgg) tgg[std::string(to_string(t))] = v;
  Json incomparable = Json::array();
  for (auto t : g.incomparable) incomparable.push_back(std::string(to_string(t)));
  Json highlighted = Json::array();
  for (auto t : g.highlighted) highlighted.push_back(std::string(to_string(t)));
  return {{"agg", g.agg},
          {"tgg", tgg},
          {"incomparable", incomparable},
          {"highlighted", highlighted},
          {"threshold", g.threshold}};
}

Json to_json(const PermutationResult& p) {
  return {{"p_value", p.p_value},
          {"observed", p.observed},
          {"at_least_as_extreme", p.at_least_as_extreme},
          {"iterations", p.iterations}};
}

Json to_json(const Accuracy& a) {
  return {{"correct", a.correct}, {"total", a.total},     {"missing", a.missing},
          {"accuracy", a.accuracy}, {"ci90_low", a.ci_low}, {"ci90_high", a.ci_high}};
}

Json to_json(const AccuracyReport& r) {
  Json per = Json::object();
  for (const auto& [name, a] : r.per_dataset) per[name] = to_json(a);
  return {{"overall", to_json(r.overall)}, {"per_dataset", per}};
}

Json to_json(const AssumptionCheck& c) {
  return {{"u_theta_c", c.u_tc}, {"u_phi_c", c.u_pc}, {"u_theta_d", c.u_td},
          {"u_phi_d", c.u_pd},   {"status", std::string(to_string(c.status))}, {"holds", c.holds()}};
}

Json to_json(const ConsistencyMetrics& m) {
  return {{"ccd", optional_number(m.ccd)}, {"ler", optional_number(m.ler)}, {"windows", m.windows}};
}

Json to_json(const ConsistencyReport& r) {
  Json per = Json::array();
  for (const auto& m : r.per_grid) per.push_back(to_json(m));
  return {{"pooled", to_json(r.pooled)},
          {"subject_axis", to_json(r.subject_axis)},
          {"object_axis", to_json(r.object_axis)},
          {"per_grid", per},
          {"grids_without_windows", r.grids_without_windows}};
}

Json to_json(const Diagnostics& d) { return {{"warnings", d.warnings}, {"counters", d.counters}}; }

MetricScore metric_score_from_json(const Json& j) {
  MetricScore s;
  s.recall = j.at("recall").get<double>();
  s.precision = j.at("precision").get<double>();
  s.f1 = j.at("f1").get<double>();
  s.degenerate_recall = j.value("degenerate_recall", false);
  s.degenerate_precision = j.value("degenerate_precision", false);
  return s;
}

CorefReport coref_report_from_json(const Json& j) {
  CorefReport r;
  r.muc = metric_score_from_json(j.at("muc"));
  r.b3 = metric_score_from_json(j.at("b3"));
  r.ceaf_e = metric_score_from_json(j.at("ceaf_e"));
  r.conll_f1 = j.at("conll_f1").get<double>();
  r.gold_mentions = j.value("gold_mentions", std::size_t{0});
  r.pred_mentions = j.value("pred_mentions", std::size_t{0});
  return r;
}

DisaggReport disagg_report_from_json(const Json& j) {
  // Accept a full report envelope or the bare result.
  const Json& body = j.contains("result") ? j.at("result") : j;
  DisaggReport r;
  r.dataset = body.value("dataset", std::string());
  r.overall = coref_report_from_json(body.at("overall"));
  for (const auto& [name, s] : body.at("per_type").items()) {
    const auto t = parse_coreference_type(name);
    if (!t) throw InputError(fmt::format("unknown coreference type '{}'", name));
    TypedScore ts;
    ts.score = metric_score_from_json(s);
    ts.gold_mentions = s.value("gold_mentions", std::size_t{0});
    ts.pred_mentions = s.value("pred_mentions", std::size_t{0});
    r.per_type[*t] = ts;
  }
  r.untyped_gold = body.value("untyped_gold", std::size_t{0});
  r.untyped_pred = body.value("untyped_pred", std::size_t{0});
  return r;
}

std::string config_hash(const Json& config) { return fmt::format("{:016x}", fnv1a64(config.dump())); }

Json make_report(const std::string& command, const Json& config, Json result, const Diagnostics& diag) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"report_version", kReportVersion},
          {"command", command},
          {"config", config},
          {"config_hash", config_hash(config)},
          {"result", std::move(result)},
          {"diagnostics", to_json(diag)}};
}

namespace {

std::string num(const Json& v, int digits = 4) {
  if (v.is_null()) return "n/a";
  if (v.is_number_float()) return fmt::format("{:.{}f}", v.get<double>(), digits);
  if (v.is_number()) return v.dump();
  if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string points(const Json& v) {
  if (!v.is_number()) return "n/a";
  return fmt::format("{:.1f}", 100.0 * v.get<double>());
}

void metric_table(std::ostringstream& md, const Json& report) {
  md << "| Metric | Recall | Precision | F1 |\n|---|---:|---:|---:|\n";
  for (const char* m : {"muc", "b3", "ceaf_e"}) {
    const auto& s = report.at(m);
    md << fmt::format("| {} | {} | {} | {} |\n", m, points(s.at("recall")), points(s.at("precision")),
                      points(s.at("f1")));
  }
  md << fmt::format("\nCoNLL F1: {}  \nMentions: {} gold, {} predicted\n", points(report.at("conll_f1")),
                    num(report.at("gold_mentions")), num(report.at("pred_mentions")));
}

void flatten(std::ostringstream& md, const Json& j, const std::string& prefix) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(md, v, prefix.empty() ? k : prefix + "." + k);
  } else if (j.is_array()) {
    if (j.size() > 20) {
      md << fmt::format("| {} | [{} items] |\n", prefix, j.size());
      return;
    }
    for (std::size_t i = 0; i < j.size(); ++i) flatten(md, j[i], fmt::format("{}[{}]", prefix, i));
  } else {
    md << fmt::format("| {} | {} |\n", prefix, num(j));
  }
}

}  // namespace

std::string render_markdown(const Json& report) {
  std::ostringstream md;
  const auto command = report.at("command").get<std::string>();
  const auto& r = report.at("result");
  md << fmt::format("# {} {}\n\n", kToolName, command);
  md << fmt::format("Version {}, report format {}, config {}\n\n", report.at("version").get<std::string>(),
                    report.at("report_version").get<int>(), report.at("config_hash").get<std::string>());

  if (command == "score") {
    metric_table(md, r.at("overall"));
  } else if (command == "disagg") {
    md << fmt::format("Dataset: {}\n\n", r.value("dataset", std::string("-")));
    md << "| Subset | Gold mentions | Recall | Precision | B3 F1 |\n|---|---:|---:|---:|---:|\n";
    const auto& o = r.at("overall");
    md << fmt::format("| All | {} | {} | {} | {} |\n", num(o.at("gold_mentions")), points(o.at("b3").at("recall")),
                      points(o.at("b3").at("precision")), points(o.at("b3").at("f1")));
    for (const auto& [t, s] : r.at("per_type").items()) {
      md << fmt::format("| {} | {} | {} | {} | {} |\n", t, num(s.at("gold_mentions")), points(s.at("recall")),
                        points(s.at("precision")), points(s.at("f1")));
    }
    md << "\n";
    metric_table(md, o);
  } else if (command == "gap") {
    md << fmt::format("AGG: {}  \nHighlight threshold: {}\n\n", points(r.at("agg")), points(r.at("threshold")));
    md << "| Type | TGG | TGG - AGG | Highlighted |\n|---|---:|---:|---|\n";
    for (const auto& [t, v] : r.at("tgg").items()) {
      bool hl = false;
      for (const auto& h : r.at("highlighted")) hl = hl || h == t;
      md << fmt::format("| {} | {} | {} | {} |\n", t, points(v), points(Json(v.get<double>() - r.at("agg").get<double>())),
                        hl ? "**yes**" : "no");
    }
    for (const auto& t : r.at("incomparable")) md << fmt::format("| {} | n/a | n/a | incomparable |\n", t.get<std::string>());
  } else if (command == "pcr score") {
    md << "| Dataset | Correct | Total | Missing | Accuracy | 90% CI |\n|---|---:|---:|---:|---:|---|\n";
    auto row = [&](const std::string& name, const Json& a) {
      md << fmt::format("| {} | {} | {} | {} | {} | [{}, {}] |\n", name, num(a.at("correct")), num(a.at("total")),
                        num(a.at("missing")), num(a.at("accuracy")), num(a.at("ci90_low")), num(a.at("ci90_high")));
    };
    for (const auto& [name, a] : r.at("per_dataset").items()) row(name, a);
    row("**all**", r.at("overall"));
  } else if (command == "consistency") {
    md << "| Scope | Windows | CCD | LER |\n|---|---:|---:|---:|\n";
    for (const char* scope : {"pooled", "subject_axis", "object_axis"}) {
      const auto& m = r.at(scope);
      md << fmt::format("| {} | {} | {} | {} |\n", scope, num(m.at("windows")), num(m.at("ccd"), 3),
                        num(m.at("ler"), 3));
    }
    md << fmt::format("\nGrids: {} ({} without windows)\n", r.at("per_grid").size(),
                      num(r.at("grids_without_windows")));
  } else {
    md << "| Field | Value |\n|---|---|\n";
    flatten(md, r, "");
  }

  const auto& diag = report.at("diagnostics");
  if (!diag.at("counters").empty()) {
    md << "\n## Counters\n\n| Counter | Value |\n|---|---:|\n";
    for (const auto& [k, v] : diag.at("counters").items()) md << fmt::format("| {} | {} |\n", k, num(v));
  }
  if (!diag.at("warnings").empty()) {
    md << fmt::format("\n{} warnings; see the JSON report.\n", diag.at("warnings").size());
  }
  return md.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += fmt::format(".tmp.{}", static_cast<long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(fmt::format("cannot write '{}'", tmp.string()));
    out << content;
    out.flush();
    if (!out) throw InputError(fmt::format("failed writing '{}'", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw InputError(fmt::format("cannot move report into '{}': {}", path.string(), ec.message()));
  }
}

}  // namespace corefmeter
