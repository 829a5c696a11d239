#pragma once

#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "domsfm/correspondence.hpp"
#include "domsfm/model.hpp"

namespace domsfm {

// Directed graph over reference image ids; edge u -> v means the model
// restricted to u's points sufficed to estimate v's pose within the error
// threshold.
struct LocalizabilityGraph {
  std::vector<ImageId> nodes;  // ascending id order
  std::map<ImageId, std::set<ImageId>> edges;  // out-adjacency
  std::map<std::pair<ImageId, ImageId>, double> edge_metadata;  // achieved error ratio

  bool has_node(ImageId id) const;
  bool has_edge(ImageId from, ImageId to) const;
  std::size_t num_edges() const { return edge_metadata.size(); }
  const std::set<ImageId>& out_neighbors(ImageId id) const;

  // Rejects self-edges and unlisted endpoints.
  void add_edge(ImageId from, ImageId to, double error_ratio);
  void validate() const;
};

struct DominatingSet {
  std::set<ImageId> members;
  int iterations_run = 0;
  std::uint64_t seed = 0;
  int best_iteration = 0;
};

// The two admissible readings of the edge error: mean bbox-corner
// displacement ratio (default) or plain location-error ratio.
enum class EdgeErrorKind { BboxCornerMean, LocRatio };

std::string to_string(EdgeErrorKind kind);
EdgeErrorKind edge_error_kind_from_string(const std::string& name);

struct GraphBuildOptions {
  double threshold = 0.05;  // error ratio below which an edge is added
  EdgeErrorKind error_kind = EdgeErrorKind::BboxCornerMean;
  int threads = 1;

  void validate() const;
};

struct GraphBuildStats {
  std::size_t estimation_attempts = 0;
  std::size_t converged = 0;
};

// For every ordered reference-image pair (i, j), i != j: match image j's view
// against the model restricted to image i, estimate j's pose, and add edge
// i -> j when the achieved error ratio is strictly below the threshold.
// Failed or non-converged estimations simply add no edge.
LocalizabilityGraph build_graph(const SfmModel& model, const CorrespondenceProvider& provider,
                                const EstimatorConfig& estimator, const GraphBuildOptions& options,
                                GraphBuildStats* stats = nullptr);

// Randomized greedy: repeatedly pick a uniform-random remaining node, add it,
// and remove it together with its out-neighbours from the remaining set.
std::set<ImageId> greedy_dominating_set(const LocalizabilityGraph& graph, std::mt19937_64& rng);

// Best of `iterations` greedy runs, each seeded with seed XOR iteration
// index; smaller sets win, ties keep the earliest iteration.
DominatingSet best_dominating_set(const LocalizabilityGraph& graph, int iterations,
                                  std::uint64_t seed);

// Exhaustive smallest-first search, capped at 20 nodes; deterministic
// lexicographically-smallest tie break among minimum sets.
std::set<ImageId> exact_min_dominating_set(const LocalizabilityGraph& graph);

// Uniform sample of k nodes without replacement (the random-sampling
// baseline at the dominating set's cardinality).
std::set<ImageId> random_reference_sample(const LocalizabilityGraph& graph, std::size_t k,
                                          std::mt19937_64& rng);

// True iff every node is a member or an out-neighbour of a member.
bool is_dominating(const LocalizabilityGraph& graph, const std::set<ImageId>& candidate);

// On-disk cache of the O(N^2) construction, keyed by model digest plus the
// full build configuration.
struct GraphFile {
  LocalizabilityGraph graph;
  double threshold = 0.05;
  std::string provider;
  std::uint64_t seed = 0;
  EdgeErrorKind error_kind = EdgeErrorKind::BboxCornerMean;
  std::string model_digest;
  nlohmann::json cache_key;  // provider + noise + estimator + threshold echo
};

void save_graph_file(const GraphFile& file, const std::filesystem::path& path);
GraphFile load_graph_file(const std::filesystem::path& path);

}  // namespace domsfm
