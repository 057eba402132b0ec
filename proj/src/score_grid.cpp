#include "coref_meter/score_grid.hpp"
#include "coref_meter/corpus_io.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <ostream>
#include <sstream>

namespace corefmeter {

using nlohmann::json;

void validate_grid(const ScoreGrid& grid) {
  const auto label = to_string(grid.event);
  if (grid.subject_chain.empty() || grid.object_chain.empty()) {
    throw InputError(fmt::format("grid for {}: chains must be non-empty", label));
  }
  if (grid.scores.size() != grid.rows()) {
    throw InputError(fmt::format("grid for {}: {} score rows for a subject chain of length {}", label,
                                 grid.scores.size(), grid.rows()));
  }
  for (std::size_t i = 0; i < grid.scores.size(); ++i) {
    if (grid.scores[i].size() != grid.cols()) {
      throw InputError(fmt::format("grid for {}: row {} has {} scores for an object chain of length {}", label, i,
                                   grid.scores[i].size(), grid.cols()));
    }
    for (double v : grid.scores[i]) {
      if (!std::isfinite(v)) throw InputError(fmt::format("grid for {}: non-finite score in row {}", label, i));
    }
  }
}

namespace {

void check_chain(const std::vector<std::string>& chain, const Hierarchy& hierarchy, const std::string& label,
                 const char* which) {
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (!hierarchy.retained(chain[i])) {
      throw InputError(fmt::format("grid for {}: {} chain concept '{}' is not in the hierarchy", label, which, chain[i]));
    }
    if (i > 0 && !hierarchy.is_proper_ancestor(chain[i - 1], chain[i])) {
      throw InputError(fmt::format("grid for {}: {} chain: '{}' is not an ancestor of '{}'", label, which,
                                   chain[i - 1], chain[i]));
    }
  }
}

std::vector<std::string> string_array(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) throw InputError(fmt::format("missing array '{}'", key));
  std::vector<std::string> out;
  for (const auto& e : j[key]) {
    if (!e.is_string()) throw InputError(fmt::format("'{}' must contain strings", key));
    out.push_back(e.get<std::string>());
  }
  return out;
}

Triple parse_event(const json& j) {
  if (j.is_array() && j.size() == 3 && j[0].is_string() && j[1].is_string() && j[2].is_string()) {
    return {j[0].get<std::string>(), j[1].get<std::string>(), j[2].get<std::string>()};
  }
  if (j.is_object() && j.contains("subject") && j.contains("verb") && j.contains("object")) {
    return {j["subject"].get<std::string>(), j["verb"].get<std::string>(), j["object"].get<std::string>()};
  }
  throw InputError("'event' must be [subject, verb, object]");
}

}  // namespace

void check_grid_hierarchy(const ScoreGrid& grid, const Hierarchy& hierarchy) {
  const auto label = to_string(grid.event);
  check_chain(grid.subject_chain, hierarchy, label, "subject");
  check_chain(grid.object_chain, hierarchy, label, "object");
}

std::vector<ScoreGrid> parse_score_grids(std::istream& in, const std::string& name, const Hierarchy* hierarchy) {
  std::vector<ScoreGrid> grids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (!j.is_object()) throw InputError("expected a JSON object");
      ScoreGrid grid;
      if (!j.contains("event")) throw InputError("missing 'event'");
      grid.event = parse_event(j["event"]);
      grid.subject_chain = string_array(j, "subject_chain");
      grid.object_chain = string_array(j, "object_chain");
      if (!j.contains("scores") || !j["scores"].is_array()) throw InputError("missing array 'scores'");
      for (const auto& row : j["scores"]) {
        if (!row.is_array()) throw InputError("'scores' must be an array of rows");
        std::vector<double> values;
        for (const auto& v : row) {
          if (!v.is_number()) throw InputError("scores must be numbers");
          values.push_back(v.get<double>());
        }
        grid.scores.push_back(std::move(values));
      }
      validate_grid(grid);
      if (hierarchy) check_grid_hierarchy(grid, *hierarchy);
      grids.push_back(std::move(grid));
    } catch (const json::exception& e) {
      throw ParseError(name, line_no, 0, e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      throw ParseError(name, line_no, 0, e.what());
    }
  }
  return grids;
}

std::vector<ScoreGrid> parse_score_grids(const std::filesystem::path& path, const Hierarchy* hierarchy) {
  std::istringstream in(read_file(path));
  return parse_score_grids(in, path.string(), hierarchy);
}

void write_score_grids(std::ostream& out, const std::vector<ScoreGrid>& grids) {
  for (const auto& g : grids) {
    json j;
    j["event"] = {g.event.subject, g.event.verb, g.event.object};
    j["subject_chain"] = g.subject_chain;
    j["object_chain"] = g.object_chain;
    j["scores"] = g.scores;
    out << j.dump() << '\n';
  }
}

}  // namespace corefmeter
