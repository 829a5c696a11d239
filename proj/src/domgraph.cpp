#include "domsfm/domgraph.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <unordered_map>

#include "domsfm/log.hpp"
#include "domsfm/model_io.hpp"
#include "domsfm/random_util.hpp"

namespace domsfm {

bool LocalizabilityGraph::has_node(ImageId id) const {
  return std::binary_search(nodes.begin(), nodes.end(), id);
}

bool LocalizabilityGraph::has_edge(ImageId from, ImageId to) const {
  auto it = edges.find(from);
  return it != edges.end() && it->second.count(to) != 0;
}

const std::set<ImageId>& LocalizabilityGraph::out_neighbors(ImageId id) const {
  static const std::set<ImageId> kEmpty;
  auto it = edges.find(id);
  return it == edges.end() ? kEmpty : it->second;
}

void LocalizabilityGraph::add_edge(ImageId from, ImageId to, double error_ratio) {
  if (from == to) throw ValidationError("graph: self-edges are not allowed");
  if (!has_node(from) || !has_node(to))
    throw ValidationError("graph: edge endpoint not a listed node");
  edges[from].insert(to);
  edge_metadata[{from, to}] = error_ratio;
}

void LocalizabilityGraph::validate() const {
  if (!std::is_sorted(nodes.begin(), nodes.end()))
    throw ValidationError("graph: node list must be sorted");
  if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end())
    throw ValidationError("graph: duplicate node id");
  for (const auto& [from, outs] : edges) {
    if (!has_node(from)) throw ValidationError("graph: edge source not a listed node");
    for (ImageId to : outs) {
      if (from == to) throw ValidationError("graph: self-edge on node " + std::to_string(from));
      if (!has_node(to)) throw ValidationError("graph: edge target not a listed node");
      if (!edge_metadata.count({from, to}))
        throw ValidationError("graph: edge without metadata");
    }
  }
}

std::string to_string(EdgeErrorKind kind) {
  return kind == EdgeErrorKind::BboxCornerMean ? "bbox_corner_mean" : "loc_ratio";
}

EdgeErrorKind edge_error_kind_from_string(const std::string& name) {
  if (name == "bbox_corner_mean") return EdgeErrorKind::BboxCornerMean;
  if (name == "loc_ratio") return EdgeErrorKind::LocRatio;
  throw ValidationError("unknown edge error kind '" + name +
                        "' (expected bbox_corner_mean|loc_ratio)");
}

void GraphBuildOptions::validate() const {
  if (!(threshold >= 0.0)) throw ValidationError("graph: threshold must be >= 0");
  if (threads < 1) throw ValidationError("graph: threads must be >= 1");
}

LocalizabilityGraph build_graph(const SfmModel& model, const CorrespondenceProvider& provider,
                                const EstimatorConfig& estimator, const GraphBuildOptions& options,
                                GraphBuildStats* stats) {
  options.validate();
  estimator.validate();
  if (model.images.empty()) throw ValidationError("build_graph: model has no images");

  LocalizabilityGraph graph;
  graph.nodes.reserve(model.images.size());
  for (const auto& [id, image] : model.images) graph.nodes.push_back(id);
  const std::size_t n = graph.nodes.size();

  // One restricted model per reference image, reused across all queries.
  std::vector<SfmModel> restricted;
  restricted.reserve(n);
  for (ImageId id : graph.nodes) restricted.push_back(restrict_to_image(model, id));

  struct Pair {
    std::size_t ref;
    std::size_t query;
  };
  std::vector<Pair> pairs;
  pairs.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) pairs.push_back({i, j});

  std::vector<double> edge_error(pairs.size(), -1.0);  // negative = no edge
  std::atomic<std::size_t> converged{0};
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= pairs.size()) return;
      const Pair pair = pairs[k];
      const ImageId query_id = graph.nodes[pair.query];
      QueryView query = view_from_image(model.image(query_id), static_cast<std::uint64_t>(k + 1));
      const MatchSet matches = provider.match(restricted[pair.ref], query);
      PoseEstimate estimate;
      try {
        estimate = ransac_pnp(matches.correspondences, query.camera, estimator);
      } catch (const Error& e) {
        if (log_enabled(LogLevel::Debug))
          log_debug("pair " + std::to_string(graph.nodes[pair.ref]) + "->" +
                    std::to_string(query_id) + ": " + e.what());
        continue;
      }
      if (!estimate.converged) {
        if (log_enabled(LogLevel::Debug))
          log_debug("pair " + std::to_string(graph.nodes[pair.ref]) + "->" +
                    std::to_string(query_id) + ": estimation did not converge");
        continue;
      }
      converged.fetch_add(1);
      const Pose& gt = query.pose_gt;
      const double err = options.error_kind == EdgeErrorKind::BboxCornerMean
                             ? bbox_add_error(gt, estimate.pose, model.bbox)
                             : loc_error(gt.translation, estimate.pose.translation) /
                                   model.bbox.diagonal();
      if (err < options.threshold) edge_error[k] = err;
    }
  };

  const int worker_count = std::max(1, std::min<int>(options.threads, static_cast<int>(pairs.size())));
  if (worker_count == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(worker_count);
    for (int t = 0; t < worker_count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  // Assembly is keyed by pair, so results are independent of worker
  // scheduling.
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (edge_error[k] >= 0.0)
      graph.add_edge(graph.nodes[pairs[k].ref], graph.nodes[pairs[k].query], edge_error[k]);
  }
  if (stats) {
    stats->estimation_attempts = pairs.size();
    stats->converged = converged.load();
  }
  return graph;
}

std::set<ImageId> greedy_dominating_set(const LocalizabilityGraph& graph, std::mt19937_64& rng) {
  std::vector<ImageId> remaining = graph.nodes;
  std::unordered_map<ImageId, std::size_t> position;
  position.reserve(remaining.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) position[remaining[i]] = i;

  auto remove = [&](ImageId id) {
    auto it = position.find(id);
    if (it == position.end()) return;
    const std::size_t i = it->second;
    const ImageId last = remaining.back();
    remaining[i] = last;
    position[last] = i;
    remaining.pop_back();
    position.erase(it);
  };

  std::set<ImageId> dominating;
  while (!remaining.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, remaining.size() - 1);
    const ImageId u = remaining[pick(rng)];
    dominating.insert(u);
    for (ImageId v : graph.out_neighbors(u)) remove(v);
    remove(u);
  }
  return dominating;
}

DominatingSet best_dominating_set(const LocalizabilityGraph& graph, int iterations,
                                  std::uint64_t seed) {
  if (iterations < 1) throw ValidationError("best_dominating_set: iterations must be >= 1");
  DominatingSet result;
  result.iterations_run = iterations;
  result.seed = seed;
  result.best_iteration = -1;
  for (int it = 0; it < iterations; ++it) {
    std::mt19937_64 rng(seed ^ static_cast<std::uint64_t>(it));
    std::set<ImageId> candidate = greedy_dominating_set(graph, rng);
    // Smaller wins; ties keep the earliest iteration.
    if (result.best_iteration < 0 || candidate.size() < result.members.size()) {
      result.members = std::move(candidate);
      result.best_iteration = it;
    }
  }
  return result;
}

std::set<ImageId> exact_min_dominating_set(const LocalizabilityGraph& graph) {
  const std::size_t n = graph.nodes.size();
  if (n > 20)
    throw ValidationError("exact_min_dominating_set: node count " + std::to_string(n) +
                          " exceeds the exhaustive-search cap of 20");
  if (n == 0) return {};

  std::unordered_map<ImageId, int> index;
  for (std::size_t i = 0; i < n; ++i) index[graph.nodes[i]] = static_cast<int>(i);
  std::vector<std::uint32_t> cover(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    cover[i] = 1u << i;
    for (ImageId v : graph.out_neighbors(graph.nodes[i])) cover[i] |= 1u << index.at(v);
  }
  const std::uint32_t full = (1u << n) - 1u;

  std::vector<int> combo;
  for (std::size_t k = 1; k <= n; ++k) {
    combo.resize(k);
    for (std::size_t i = 0; i < k; ++i) combo[i] = static_cast<int>(i);
    for (;;) {
      std::uint32_t mask = 0;
      for (int idx : combo) mask |= cover[idx];
      if (mask == full) {
        std::set<ImageId> out;
        for (int idx : combo) out.insert(graph.nodes[idx]);
        return out;  // first hit in lexicographic order is the smallest
      }
      // Advance to the next k-combination in lexicographic order.
      int pos = static_cast<int>(k) - 1;
      while (pos >= 0 && combo[pos] == static_cast<int>(n - k + pos)) --pos;
      if (pos < 0) break;
      ++combo[pos];
      for (std::size_t i = pos + 1; i < k; ++i) combo[i] = combo[i - 1] + 1;
    }
  }
  throw ValidationError("exact_min_dominating_set: internal search exhausted");  // unreachable
}

std::set<ImageId> random_reference_sample(const LocalizabilityGraph& graph, std::size_t k,
                                          std::mt19937_64& rng) {
  if (k < 1 || k > graph.nodes.size())
    throw ValidationError("random_reference_sample: k out of range");
  const auto indices = sample_without_replacement(graph.nodes.size(), k, rng);
  std::set<ImageId> out;
  for (std::size_t idx : indices) out.insert(graph.nodes[idx]);
  return out;
}

bool is_dominating(const LocalizabilityGraph& graph, const std::set<ImageId>& candidate) {
  for (ImageId id : candidate) {
    if (!graph.has_node(id))
      throw ValidationError("is_dominating: unknown node id " + std::to_string(id));
  }
  std::set<ImageId> covered = candidate;
  for (ImageId u : candidate) {
    const auto& outs = graph.out_neighbors(u);
    covered.insert(outs.begin(), outs.end());
  }
  for (ImageId v : graph.nodes)
    if (!covered.count(v)) return false;
  return true;
}

namespace {
constexpr int kGraphFileVersion = 1;
}

void save_graph_file(const GraphFile& file, const std::filesystem::path& path) {
  nlohmann::json j;
  j["version"] = kGraphFileVersion;
  j["nodes"] = file.graph.nodes;
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [key, err] : file.graph.edge_metadata)
    edges.push_back({{"from", key.first}, {"to", key.second}, {"error_ratio", err}});
  j["edges"] = std::move(edges);
  j["threshold"] = file.threshold;
  j["provider"] = file.provider;
  j["seed"] = file.seed;
  j["error_kind"] = to_string(file.error_kind);
  j["model_digest"] = file.model_digest;
  if (!file.cache_key.is_null()) j["cache_key"] = file.cache_key;
  write_json_file(j, path);
}

GraphFile load_graph_file(const std::filesystem::path& path) {
  const nlohmann::json j = read_json_file(path);
  if (!j.is_object() || !j.contains("version"))
    throw ValidationError("graph file " + path.string() + ": missing version");
  const int version = j.at("version").get<int>();
  if (version != kGraphFileVersion)
    throw ValidationError("graph file " + path.string() + ": unsupported version " +
                          std::to_string(version));
  GraphFile file;
  file.graph.nodes = j.at("nodes").get<std::vector<ImageId>>();
  std::sort(file.graph.nodes.begin(), file.graph.nodes.end());
  for (const auto& je : j.at("edges")) {
    file.graph.add_edge(je.at("from").get<ImageId>(), je.at("to").get<ImageId>(),
                        je.at("error_ratio").get<double>());
  }
  file.threshold = j.at("threshold").get<double>();
  file.provider = j.at("provider").get<std::string>();
  file.seed = j.at("seed").get<std::uint64_t>();
  file.error_kind = edge_error_kind_from_string(j.at("error_kind").get<std::string>());
  file.model_digest = j.at("model_digest").get<std::string>();
  if (j.contains("cache_key")) file.cache_key = j.at("cache_key");
  file.graph.validate();
  return file;
}

}  // namespace domsfm
