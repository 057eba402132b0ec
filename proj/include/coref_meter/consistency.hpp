#pragma once

#include "coref_meter/errors.hpp"
#include "coref_meter/score_grid.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace corefmeter {

/// Subject: sequences along the subject chain with the object abstraction
/// fixed (one per grid column). Object: the transpose. Both: subject-axis
/// windows first, then object-axis windows.
enum class Axis { Subject, Object, Both };
std::string_view to_string(Axis axis);
std::optional<Axis> parse_axis(std::string_view text);

/// Three consecutive scores (a_{i-1}, a_i, a_{i+1}) along one chain.
struct Window {
  double prev = 0;
  double cur = 0;
  double next = 0;
  Axis axis = Axis::Subject;

  bool operator==(const Window&) const = default;
};

std::vector<Window> windows_of_sequence(const std::vector<double>& scores, Axis axis = Axis::Subject);
std::vector<Window> abstraction_windows(const ScoreGrid& grid, Axis axis = Axis::Both);

/// δ = ½(a_{i−1} + a_{i+1}) − a_i when 2a_i < a_{i−1} + a_{i+1}, else 0.
double concavity_delta(const Window& w);
/// Strict local extremum.
bool is_local_extremum(const Window& w);

/// Mean δ; nullopt when there are no windows.
std::optional<double> ccd(const std::vector<Window>& windows);
/// Fraction of windows that are strict local extrema; nullopt when empty.
std::optional<double> ler(const std::vector<Window>& windows);

struct ConsistencyMetrics {
  std::optional<double> ccd;
  std::optional<double> ler;
  std::size_t windows = 0;
};

ConsistencyMetrics consistency_of(const std::vector<Window>& windows);

struct ConsistencyReport {
  ConsistencyMetrics pooled;
  ConsistencyMetrics subject_axis;
  ConsistencyMetrics object_axis;
  std::vector<ConsistencyMetrics> per_grid;  // pooled over both axes
  std::size_t grids_without_windows = 0;
};

/// Pools windows across all grids. Per-grid metrics are computed in
/// parallel; pooled sums run in grid order.
ConsistencyReport evaluate_consistency(const std::vector<ScoreGrid>& grids, std::size_t threads = 1);

enum class MaxMode { Hard, Soft };

/// Max (hard) or LogSumExp (soft) over all cells.
double concept_max(const ScoreGrid& grid, MaxMode mode);

/// Each cell (i, j) becomes the max over cells (i', j') with i' <= i and
/// j' <= j, i.e. over the abstractions it specializes.
ScoreGrid concept_max_transform(const ScoreGrid& grid);

struct LabeledEvent {
  Triple event;
  bool plausible = true;
  std::string source;

  bool operator==(const LabeledEvent&) const = default;
};

/// Probability that a random plausible event outscores a random implausible
/// one, ties counting one half. Every event needs a score and both classes
/// must be present.
double auc(const std::vector<LabeledEvent>& events, const std::map<Triple, double>& scores);
/// Same, on parallel vectors of scores and labels.
double auc(const std::vector<double>& scores, const std::vector<bool>& plausible);

/// JSON lines with `event` ([s, v, o]) and either `label`
/// ("plausible"/"implausible", true/false or 1/0) or `answers` (20Q-style
/// frequency answers). For answers: unanimous "never" is implausible, a
/// non-unanimous majority of "never" is dropped, anything else is plausible.
std::vector<LabeledEvent> parse_labeled_events(const std::filesystem::path& path, const std::string& source,
                                               Diagnostics* diag = nullptr);
std::vector<LabeledEvent> parse_labeled_events(std::istream& in, const std::string& name, const std::string& source,
                                               Diagnostics* diag = nullptr);

/// JSON lines with `event` and `score`. A null score is an error.
std::map<Triple, double> parse_event_scores(const std::filesystem::path& path);
std::map<Triple, double> parse_event_scores(std::istream& in, const std::string& name);

}  // namespace corefmeter
