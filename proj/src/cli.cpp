#include "domsfm/cli.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "domsfm/config.hpp"
#include "domsfm/domgraph.hpp"
#include "domsfm/eval.hpp"
#include "domsfm/log.hpp"
#include "domsfm/model_io.hpp"
#include "domsfm/random_util.hpp"
#include "domsfm/synth.hpp"

namespace domsfm {

namespace {

namespace fs = std::filesystem;
constexpr int kDomsetFileVersion = 1;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> threads_override;
  std::string log_level = "info";
};

RunConfig resolve_run_config(const GlobalOptions& opts) {
  RunConfig config;
  if (!opts.config_path.empty()) {
    config = load_run_config(opts.config_path);
  } else {
    config.noise.rng_seed = config.seed;
    config.estimator.rng_seed = config.seed;
  }
  if (opts.seed_override) {
    config.seed = *opts.seed_override;
    config.noise.rng_seed = config.seed;
    config.estimator.rng_seed = config.seed;
  }
  if (opts.threads_override) config.threads = *opts.threads_override;
  config.validate();
  return config;
}

void cmd_synth(const std::string& config_path, const std::string& out_dir) {
  const SynthConfig config = load_synth_config(config_path);
  const Scene scene = generate_scene(config);
  scene_to_native_files(scene, out_dir);
  log_info("synth: wrote " + std::to_string(scene.model.num_points()) + " points, " +
           std::to_string(scene.model.num_images()) + " images, " +
           std::to_string(scene.query_views.size()) + " queries to " + out_dir);
}

void cmd_graph(const std::string& model_path, const RunConfig& config, const std::string& out_file,
               bool force) {
  const SfmModel model = load_model_auto(model_path);
  const std::string digest = model_digest(model);
  const nlohmann::json key = config.cache_key(digest);

  if (!force && fs::exists(out_file)) {
    try {
      const GraphFile cached = load_graph_file(out_file);
      if (cached.cache_key == key) {
        log_info("graph: cache hit for " + out_file + " (digest " + digest + "), skipping build");
        return;
      }
      log_info("graph: cache key mismatch for " + out_file + ", rebuilding");
    } catch (const Error&) {
      log_warn("graph: could not read existing " + out_file + ", rebuilding");
    }
  }

  const auto provider = config.make_configured_provider();
  GraphBuildOptions options;
  options.threshold = config.threshold;
  options.error_kind = config.edge_error;
  options.threads = config.threads;
  GraphBuildStats stats;
  const LocalizabilityGraph graph = build_graph(model, *provider, config.estimator, options, &stats);

  GraphFile file;
  file.graph = graph;
  file.threshold = config.threshold;
  file.provider = provider->name();
  file.seed = config.noise.rng_seed;
  file.error_kind = config.edge_error;
  file.model_digest = digest;
  file.cache_key = key;
  save_graph_file(file, out_file);
  log_info("graph: " + std::to_string(graph.nodes.size()) + " nodes, " +
           std::to_string(graph.num_edges()) + " edges (" + std::to_string(stats.converged) + "/" +
           std::to_string(stats.estimation_attempts) + " estimations converged) -> " + out_file);
}

void cmd_domset(const std::string& graph_path, const RunConfig& config,
                const std::string& out_file, int random_samples) {
  const GraphFile graph_file = load_graph_file(graph_path);
  const DominatingSet domset =
      best_dominating_set(graph_file.graph, config.domset_iterations, config.seed);

  nlohmann::json j;
  j["version"] = kDomsetFileVersion;
  j["members"] = domset.members;
  j["iterations_run"] = domset.iterations_run;
  j["seed"] = domset.seed;
  j["best_iteration"] = domset.best_iteration;
  j["model_digest"] = graph_file.model_digest;
  if (random_samples > 0) {
    nlohmann::json samples = nlohmann::json::array();
    for (int s = 0; s < random_samples; ++s) {
      std::mt19937_64 rng(splitmix64(config.seed + 0x9E3779B97F4A7C15ULL *
                                                       static_cast<std::uint64_t>(s + 1)));
      const auto sample = random_reference_sample(graph_file.graph, domset.members.size(), rng);
      samples.push_back({{"index", s}, {"members", sample}});
    }
    j["random_samples"] = std::move(samples);
  }
  write_json_file(j, out_file);
  log_info("domset: |D| = " + std::to_string(domset.members.size()) + " of " +
           std::to_string(graph_file.graph.nodes.size()) + " nodes (best at iteration " +
           std::to_string(domset.best_iteration) + ") -> " + out_file);
}

std::set<ImageId> load_domset_members(const nlohmann::json& j, const char* key) {
  std::set<ImageId> members;
  for (const auto& id : j.at(key)) members.insert(id.get<ImageId>());
  return members;
}

void cmd_filter(const std::string& model_path, const std::string& domset_path,
                const std::string& out_dir, int sample_index) {
  const SfmModel model = load_model_auto(model_path);
  const nlohmann::json j = read_json_file(domset_path);
  const std::string digest = model_digest(model);
  const std::string recorded = j.at("model_digest").get<std::string>();
  if (recorded != digest) {
    throw ValidationError(
        "filter: stale dominating set: it was computed from a model with digest " + recorded +
        " but this model has digest " + digest + "; re-run `domsfm graph` and `domsfm domset` "
        "against this model first");
  }
  std::set<ImageId> members;
  if (sample_index < 0) {
    members = load_domset_members(j, "members");
  } else {
    if (!j.contains("random_samples"))
      throw ValidationError("filter: domset file has no random_samples section");
    const auto& samples = j.at("random_samples");
    if (sample_index >= static_cast<int>(samples.size()))
      throw ValidationError("filter: random sample index out of range");
    members = load_domset_members(samples.at(sample_index), "members");
  }
  const SfmModel filtered = filter_by_dominating_set(model, members);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw IoError("cannot create output directory " + out_dir);
  save_native(filtered, fs::path(out_dir) / "model.json");
  log_info("filter: kept " + std::to_string(filtered.num_images()) + "/" +
           std::to_string(model.num_images()) + " images, " +
           std::to_string(filtered.num_points()) + "/" + std::to_string(model.num_points()) +
           " points -> " + out_dir);
}

void cmd_eval(const std::string& model_path, const std::string& queries_path,
              const RunConfig& config, const std::string& out_file, const std::string& csv_path,
              const std::string& variant_name) {
  const SfmModel model = load_model_auto(model_path);
  const std::vector<QueryView> queries = load_queries(queries_path);
  const auto provider = config.make_configured_provider();
  const EvalReport report = evaluate(model, queries, *provider, config.estimator, variant_name,
                                     config.unit_scale, config.threads);
  save_report(report, out_file);
  if (!csv_path.empty()) write_csv(report, csv_path);
  log_info("eval[" + variant_name + "]: 1deg-1cm " + std::to_string(report.success_1deg1cm) +
           ", 3deg-3cm " + std::to_string(report.success_3deg3cm) + ", 5deg-5cm " +
           std::to_string(report.success_5deg5cm) + ", add-0.1d " +
           std::to_string(report.success_add01d) + " -> " + out_file);
}

void cmd_compare(const std::vector<std::string>& report_paths, const std::string& out_file) {
  if (report_paths.size() < 2)
    throw ValidationError("compare: need at least a full and a domset report");
  const EvalReport full = load_report(report_paths[0]);
  const EvalReport domset = load_report(report_paths[1]);
  std::vector<EvalReport> randoms;
  for (std::size_t i = 2; i < report_paths.size(); ++i)
    randoms.push_back(load_report(report_paths[i]));
  const ComparisonReport cmp = compare(full, domset, randoms);
  save_comparison(cmp, out_file);
  log_info("compare: image reduction " + std::to_string(cmp.image_reduction_factor) +
           "x, point reduction " + std::to_string(cmp.point_reduction_factor) + "x, fps speedup " +
           std::to_string(cmp.speedup_factor) + "x -> " + out_file);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"SfM model compression via dominating sets: graph construction, "
               "dominating-set extraction, point-cloud filtering and pose-estimation "
               "evaluation over the compressed models"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_path, "Run configuration JSON (strict keys)");
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Override the configured seed");
  int threads_value = 1;
  auto* threads_opt = app.add_option("--threads", threads_value, "Worker thread cap");
  app.add_option("--log-level", global.log_level, "debug|info|warn|error")
      ->default_str("info");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic ground-truth scene");
  std::string synth_config, synth_out;
  synth->add_option("--config", synth_config, "Synthetic scene config JSON")->required();
  synth->add_option("--out", synth_out, "Output directory (model.json + queries.json)")->required();

  // graph
  auto* graph = app.add_subcommand("graph", "Build the localizability graph over reference images");
  std::string graph_model, graph_out;
  bool graph_force = false;
  graph->add_option("--model", graph_model, "Model directory or model.json")->required();
  graph->add_option("--out", graph_out, "Graph cache file")->required();
  graph->add_flag("--force", graph_force, "Rebuild even on cache hit");

  // domset
  auto* domset = app.add_subcommand("domset", "Extract the best-of-K dominating set");
  std::string domset_graph, domset_out;
  int domset_random_samples = 0;
  domset->add_option("--graph", domset_graph, "Graph cache file")->required();
  domset->add_option("--out", domset_out, "Dominating set file")->required();
  domset->add_option("--random-samples", domset_random_samples,
                     "Also emit this many same-cardinality random reference samples");

  // filter
  auto* filter = app.add_subcommand("filter", "Filter the model by a dominating set");
  std::string filter_model, filter_domset, filter_out;
  int filter_sample_index = -1;
  filter->add_option("--model", filter_model, "Model directory or model.json")->required();
  filter->add_option("--domset", filter_domset, "Dominating set file")->required();
  filter->add_option("--out", filter_out, "Output directory")->required();
  filter->add_option("--random-sample", filter_sample_index,
                     "Filter by the i-th stored random sample instead of the dominating set");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Estimate poses for a query set and report metrics");
  std::string eval_model, eval_queries, eval_out, eval_csv, eval_name = "default";
  eval_cmd->add_option("--model", eval_model, "Model directory or model.json")->required();
  eval_cmd->add_option("--queries", eval_queries, "queries.json")->required();
  eval_cmd->add_option("--out", eval_out, "Report JSON output")->required();
  eval_cmd->add_option("--csv", eval_csv, "Optional per-query CSV output");
  eval_cmd->add_option("--name", eval_name, "Variant name recorded in the report");

  // compare
  auto* comp = app.add_subcommand("compare",
                                  "Compare reports: <full> <domset> [random...] -> factors/deltas");
  std::vector<std::string> compare_reports;
  std::string compare_out;
  comp->add_option("reports", compare_reports, "Report files: full, domset, then random baselines")
      ->required();
  comp->add_option("--out", compare_out, "Comparison JSON output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // bad arguments are validation errors
  }

  try {
    set_log_level(parse_log_level(global.log_level));
    if (*seed_opt) global.seed_override = seed_value;
    if (*threads_opt) global.threads_override = threads_value;

    if (*synth) {
      cmd_synth(synth_config, synth_out);
    } else if (*graph) {
      cmd_graph(graph_model, resolve_run_config(global), graph_out, graph_force);
    } else if (*domset) {
      cmd_domset(domset_graph, resolve_run_config(global), domset_out, domset_random_samples);
    } else if (*filter) {
      cmd_filter(filter_model, filter_domset, filter_out, filter_sample_index);
    } else if (*eval_cmd) {
      cmd_eval(eval_model, eval_queries, resolve_run_config(global), eval_out, eval_csv, eval_name);
    } else if (*comp) {
      cmd_compare(compare_reports, compare_out);
    }
    return 0;
  } catch (const ValidationError& e) {
    log_error(e.what());
    return 1;
  } catch (const IoError& e) {
    log_error(e.what());
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    log_error(e.what());
    return 2;
  } catch (const std::exception& e) {
    log_error(std::string("internal error: ") + e.what());
    return 3;
  }
}

}  // namespace domsfm
