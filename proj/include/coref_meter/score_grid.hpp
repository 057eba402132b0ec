#pragma once

#include "coref_meter/errors.hpp"
#include "coref_meter/hierarchy.hpp"
#include "coref_meter/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace corefmeter {

/// Plausibility scores of one event over all pairs of abstractions of its
/// subject and object. Row i is subject_chain[i], column j object_chain[j];
/// chains run root to leaf.
struct ScoreGrid {
  Triple event;
  std::vector<std::string> subject_chain;
  std::vector<std::string> object_chain;
  std::vector<std::vector<double>> scores;

  bool operator==(const ScoreGrid&) const = default;

  std::size_t rows() const { return subject_chain.size(); }
  std::size_t cols() const { return object_chain.size(); }
};

/// Throws InputError naming the event when the matrix shape disagrees with
/// the chains, a chain is empty, or a score is not finite.
void validate_grid(const ScoreGrid& grid);

/// Throws InputError unless every chain element is a retained concept and a
/// proper ancestor of the next element.
void check_grid_hierarchy(const ScoreGrid& grid, const Hierarchy& hierarchy);

/// JSON lines: {"event": [s, v, o], "subject_chain": [...],
/// "object_chain": [...], "scores": [[...], ...]}. `event` may also be an
/// object with subject/verb/object keys.
std::vector<ScoreGrid> parse_score_grids(const std::filesystem::path& path, const Hierarchy* hierarchy = nullptr);
std::vector<ScoreGrid> parse_score_grids(std::istream& in, const std::string& name,
                                         const Hierarchy* hierarchy = nullptr);
void write_score_grids(std::ostream& out, const std::vector<ScoreGrid>& grids);

}  // namespace corefmeter
