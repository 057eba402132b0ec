#include "coref_meter/consistency.hpp"
#include "coref_meter/corpus_io.hpp"
#include "coref_meter/parallel.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

namespace corefmeter {

using nlohmann::json;

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::Subject: return "subject";
    case Axis::Object: return "object";
    case Axis::Both: return "both";
  }
  return "?";
}

std::optional<Axis> parse_axis(std::string_view text) {
  for (auto a : {Axis::Subject, Axis::Object, Axis::Both}) {
    if (to_string(a) == text) return a;
  }
  return std::nullopt;
}

std::vector<Window> windows_of_sequence(const std::vector<double>& scores, Axis axis) {
  std::vector<Window> out;
  for (std::size_t i = 1; i + 1 < scores.size(); ++i) out.push_back({scores[i - 1], scores[i], scores[i + 1], axis});
  return out;
}

std::vector<Window> abstraction_windows(const ScoreGrid& grid, Axis axis) {
  std::vector<Window> out;
  if (axis != Axis::Object) {
    for (std::size_t j = 0; j < grid.cols(); ++j) {
      std::vector<double> seq;
      for (std::size_t i = 0; i < grid.rows(); ++i) seq.push_back(grid.scores[i][j]);
      for (const auto& w : windows_of_sequence(seq, Axis::Subject)) out.push_back(w);
    }
  }
  if (axis != Axis::Subject) {
    for (std::size_t i = 0; i < grid.rows(); ++i) {
      for (const auto& w : windows_of_sequence(grid.scores[i], Axis::Object)) out.push_back(w);
    }
  }
  return out;
}

double concavity_delta(const Window& w) {
  // (a₋ + a₊) − 2a, formed from differences so that round-off on collinear
  // triples stays below the tolerance.
  const double excess = (w.prev - w.cur) + (w.next - w.cur);
  const double scale = std::max({std::abs(w.prev), std::abs(w.cur), std::abs(w.next)});
  if (excess <= 4 * std::numeric_limits<double>::epsilon() * scale) return 0;
  return excess / 2;
}

bool is_local_extremum(const Window& w) {
  return w.cur > std::max(w.prev, w.next) || w.cur < std::min(w.prev, w.next);
}

std::optional<double> ccd(const std::vector<Window>& windows) {
  if (windows.empty()) return std::nullopt;
  double sum = 0;
  for (const auto& w : windows) sum += concavity_delta(w);
  return sum / static_cast<double>(windows.size());
}

std::optional<double> ler(const std::vector<Window>& windows) {
  if (windows.empty()) return std::nullopt;
  const auto n = std::count_if(windows.begin(), windows.end(), is_local_extremum);
  return static_cast<double>(n) / static_cast<double>(windows.size());
}

ConsistencyMetrics consistency_of(const std::vector<Window>& windows) {
  return {ccd(windows), ler(windows), windows.size()};
}

ConsistencyReport evaluate_consistency(const std::vector<ScoreGrid>& grids, std::size_t threads) {
  std::vector<std::vector<Window>> per_grid(grids.size());
  parallel_for(grids.size(), threads, [&](std::size_t i) { per_grid[i] = abstraction_windows(grids[i], Axis::Both); });
  ConsistencyReport report;
  std::vector<Window> all, subj, obj;
  for (const auto& windows : per_grid) {
    report.per_grid.push_back(consistency_of(windows));
    if (windows.empty()) ++report.grids_without_windows;
    for (const auto& w : windows) {
      all.push_back(w);
      (w.axis == Axis::Subject ? subj : obj).push_back(w);
    }
  }
  report.pooled = consistency_of(all);
  report.subject_axis = consistency_of(subj);
  report.object_axis = consistency_of(obj);
  return report;
}

double concept_max(const ScoreGrid& grid, MaxMode mode) {
  double hi = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& row : grid.scores) {
    for (double v : row) {
      hi = std::max(hi, v);
      any = true;
    }
  }
  if (!any) throw InputError(fmt::format("grid for {} is empty", to_string(grid.event)));
  if (mode == MaxMode::Hard) return hi;
  double sum = 0;
  for (const auto& row : grid.scores)
    for (double v : row) sum += std::exp(v - hi);
  return hi + std::log(sum);
}

ScoreGrid concept_max_transform(const ScoreGrid& grid) {
  ScoreGrid out = grid;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) {
      double v = out.scores[i][j];
      if (i > 0) v = std::max(v, out.scores[i - 1][j]);
      if (j > 0) v = std::max(v, out.scores[i][j - 1]);
      out.scores[i][j] = v;
    }
  }
  return out;
}

double auc(const std::vector<double>& scores, const std::vector<bool>& plausible) {
  if (scores.size() != plausible.size()) throw InvariantError("scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::uint64_t pos = 0, neg = 0;
  for (bool p : plausible) (p ? pos : neg) += 1;
  if (pos == 0 || neg == 0) throw InputError("AUC needs both plausible and implausible events");
  // Twice the Mann-Whitney U: ties contribute one half, kept exact as integers.
  std::uint64_t u2 = 0;
  std::uint64_t neg_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t gp = 0, gn = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (plausible[order[j]] ? gp : gn) += 1;
      ++j;
    }
    u2 += 2 * gp * neg_below + gp * gn;
    neg_below += gn;
    i = j;
  }
  return static_cast<double>(u2) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

double auc(const std::vector<LabeledEvent>& events, const std::map<Triple, double>& scores) {
  std::vector<double> s;
  std::vector<bool> labels;
  for (const auto& e : events) {
    auto it = scores.find(e.event);
    if (it == scores.end()) throw InputError(fmt::format("no score for event {}", to_string(e.event)));
    if (!std::isfinite(it->second)) throw InputError(fmt::format("non-finite score for {}", to_string(e.event)));
    s.push_back(it->second);
    labels.push_back(e.plausible);
  }
  return auc(s, labels);
}

namespace {

Triple event_of(const json& j) {
  const auto& e = j.at("event");
  if (e.is_array() && e.size() == 3) return {e[0].get<std::string>(), e[1].get<std::string>(), e[2].get<std::string>()};
  if (e.is_object()) return {e.at("subject").get<std::string>(), e.at("verb").get<std::string>(), e.at("object").get<std::string>()};
  throw InputError("'event' must be [subject, verb, object]");
}

}  // namespace

std::vector<LabeledEvent> parse_labeled_events(std::istream& in, const std::string& name, const std::string& source,
                                               Diagnostics* diag) {
  std::vector<LabeledEvent> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      LabeledEvent e;
      e.event = event_of(j);
      e.source = j.value("source", source);
      if (j.contains("label")) {
        const auto& l = j["label"];
        if (l.is_boolean()) {
          e.plausible = l.get<bool>();
        } else if (l.is_number_integer() && (l.get<int>() == 0 || l.get<int>() == 1)) {
          e.plausible = l.get<int>() == 1;
        } else if (l.is_string() && (l == "plausible" || l == "implausible")) {
          e.plausible = l == "plausible";
        } else {
          throw InputError(fmt::format("unrecognized label {}", l.dump()));
        }
      } else if (j.contains("answers")) {
        const auto answers = j["answers"].get<std::vector<std::string>>();
        if (answers.empty()) throw InputError("empty answers");
        const auto never = static_cast<std::size_t>(std::count(answers.begin(), answers.end(), "never"));
        if (never == answers.size()) {
          e.plausible = false;
        } else if (2 * never > answers.size()) {
          if (diag) diag->count("events_dropped_never_majority");
          continue;
        } else {
          e.plausible = true;
        }
      } else {
        throw InputError("event needs 'label' or 'answers'");
      }
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw ParseError(name, line_no, 0, ex.what());
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& ex) {
      throw ParseError(name, line_no, 0, ex.what());
    }
  }
  return out;
}

std::vector<LabeledEvent> parse_labeled_events(const std::filesystem::path& path, const std::string& source,
                                               Diagnostics* diag) {
  std::istringstream in(read_file(path));
  return parse_labeled_events(in, path.string(), source, diag);
}

std::map<Triple, double> parse_event_scores(std::istream& in, const std::string& name) {
  std::map<Triple, double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const auto t = event_of(j);
      const auto& s = j.at("score");
      if (!s.is_number()) throw InputError(fmt::format("score for {} is not a number", to_string(t)));
      if (!out.emplace(t, s.get<double>()).second) throw InputError(fmt::format("duplicate score for {}", to_string(t)));
    } catch (const json::exception& ex) {
      throw ParseError(name, line_no, 0, ex.what());
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& ex) {
      throw ParseError(name, line_no, 0, ex.what());
    }
  }
  return out;
}

std::map<Triple, double> parse_event_scores(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return parse_event_scores(in, path.string());
}

}  // namespace corefmeter
