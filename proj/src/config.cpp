#include "domsfm/config.hpp"

#include <algorithm>

#include "domsfm/model_io.hpp"

namespace domsfm {

void require_known_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                        const std::string& context) {
  if (!j.is_object()) throw ValidationError(context + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end())
      throw ValidationError(context + ": unknown key '" + key + "'");
  }
}

namespace {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

NoiseConfig noise_from_json(const nlohmann::json& j, std::uint64_t default_seed) {
  require_known_keys(j, {"pixel_noise_sigma", "outlier_ratio", "drop_ratio", "rng_seed"},
                     "provider.noise");
  NoiseConfig noise;
  noise.pixel_noise_sigma = get_or(j, "pixel_noise_sigma", noise.pixel_noise_sigma);
  noise.outlier_ratio = get_or(j, "outlier_ratio", noise.outlier_ratio);
  noise.drop_ratio = get_or(j, "drop_ratio", noise.drop_ratio);
  noise.rng_seed = get_or(j, "rng_seed", default_seed);
  noise.validate();
  return noise;
}

EstimatorConfig estimator_from_json(const nlohmann::json& j, std::uint64_t default_seed) {
  require_known_keys(j,
                     {"ransac_max_iterations", "ransac_inlier_threshold_px", "ransac_confidence",
                      "min_correspondences", "refine_max_iterations", "rng_seed"},
                     "estimator");
  EstimatorConfig est;
  est.ransac_max_iterations = get_or(j, "ransac_max_iterations", est.ransac_max_iterations);
  est.ransac_inlier_threshold_px =
      get_or(j, "ransac_inlier_threshold_px", est.ransac_inlier_threshold_px);
  est.ransac_confidence = get_or(j, "ransac_confidence", est.ransac_confidence);
  est.min_correspondences = get_or(j, "min_correspondences", est.min_correspondences);
  est.refine_max_iterations = get_or(j, "refine_max_iterations", est.refine_max_iterations);
  est.rng_seed = get_or(j, "rng_seed", default_seed);
  est.validate();
  return est;
}

nlohmann::json noise_to_json(const NoiseConfig& noise) {
  return {{"pixel_noise_sigma", noise.pixel_noise_sigma},
          {"outlier_ratio", noise.outlier_ratio},
          {"drop_ratio", noise.drop_ratio},
          {"rng_seed", noise.rng_seed}};
}

nlohmann::json estimator_to_json(const EstimatorConfig& est) {
  return {{"ransac_max_iterations", est.ransac_max_iterations},
          {"ransac_inlier_threshold_px", est.ransac_inlier_threshold_px},
          {"ransac_confidence", est.ransac_confidence},
          {"min_correspondences", est.min_correspondences},
          {"refine_max_iterations", est.refine_max_iterations},
          {"rng_seed", est.rng_seed}};
}

}  // namespace

void RunConfig::validate() const {
  if (!(threshold >= 0.0)) throw ValidationError("config: threshold must be >= 0");
  if (domset_iterations < 1) throw ValidationError("config: domset_iterations must be >= 1");
  if (threads < 1) throw ValidationError("config: threads must be >= 1");
  if (!(unit_scale > 0.0)) throw ValidationError("config: unit_scale must be positive");
  if (!(ratio_threshold > 0.0)) throw ValidationError("config: ratio_threshold must be positive");
  if (provider_name != "oracle" && provider_name != "descriptor-nn")
    throw ValidationError("config: provider.name must be oracle|descriptor-nn, got '" +
                          provider_name + "'");
  noise.validate();
  estimator.validate();
}

std::unique_ptr<CorrespondenceProvider> RunConfig::make_configured_provider() const {
  return make_provider(provider_name, noise, ratio_threshold);
}

nlohmann::json RunConfig::cache_key(const std::string& digest) const {
  return {{"model_digest", digest},
          {"provider", provider_name},
          {"ratio_threshold", ratio_threshold},
          {"noise", noise_to_json(noise)},
          {"estimator", estimator_to_json(estimator)},
          {"threshold", threshold},
          {"error_kind", to_string(edge_error)}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  require_known_keys(j,
                     {"threshold", "domset_iterations", "seed", "threads", "unit_scale",
                      "provider", "estimator", "edge_error"},
                     "config");
  RunConfig config;
  config.threshold = get_or(j, "threshold", config.threshold);
  config.domset_iterations = get_or(j, "domset_iterations", config.domset_iterations);
  config.seed = get_or(j, "seed", config.seed);
  config.threads = get_or(j, "threads", config.threads);
  config.unit_scale = get_or(j, "unit_scale", config.unit_scale);
  if (j.contains("edge_error"))
    config.edge_error = edge_error_kind_from_string(j.at("edge_error").get<std::string>());
  if (j.contains("provider")) {
    const auto& jp = j.at("provider");
    require_known_keys(jp, {"name", "ratio_threshold", "noise"}, "provider");
    config.provider_name = get_or<std::string>(jp, "name", config.provider_name);
    config.ratio_threshold = get_or(jp, "ratio_threshold", config.ratio_threshold);
    if (jp.contains("noise")) config.noise = noise_from_json(jp.at("noise"), config.seed);
    else config.noise.rng_seed = config.seed;
  } else {
    config.noise.rng_seed = config.seed;
  }
  if (j.contains("estimator")) {
    config.estimator = estimator_from_json(j.at("estimator"), config.seed);
  } else {
    config.estimator.rng_seed = config.seed;
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(read_json_file(path));
}

nlohmann::json run_config_to_json(const RunConfig& config) {
  return {{"threshold", config.threshold},
          {"domset_iterations", config.domset_iterations},
          {"seed", config.seed},
          {"threads", config.threads},
          {"unit_scale", config.unit_scale},
          {"edge_error", to_string(config.edge_error)},
          {"provider",
           {{"name", config.provider_name},
            {"ratio_threshold", config.ratio_threshold},
            {"noise", noise_to_json(config.noise)}}},
          {"estimator", estimator_to_json(config.estimator)}};
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  require_known_keys(j,
                     {"num_points", "point_distribution", "object_extent", "num_ref_cameras",
                      "camera_layout", "camera_radius", "num_query_cameras", "descriptor_dim",
                      "visibility_fraction", "rng_seed", "intrinsics"},
                     "synth config");
  SynthConfig config;
  config.num_points = get_or(j, "num_points", config.num_points);
  if (j.contains("point_distribution"))
    config.point_distribution =
        point_distribution_from_string(j.at("point_distribution").get<std::string>());
  config.object_extent = get_or(j, "object_extent", config.object_extent);
  config.num_ref_cameras = get_or(j, "num_ref_cameras", config.num_ref_cameras);
  if (j.contains("camera_layout"))
    config.camera_layout = camera_layout_from_string(j.at("camera_layout").get<std::string>());
  config.camera_radius = get_or(j, "camera_radius", config.camera_radius);
  config.num_query_cameras = get_or(j, "num_query_cameras", config.num_query_cameras);
  config.descriptor_dim = get_or(j, "descriptor_dim", config.descriptor_dim);
  config.visibility_fraction = get_or(j, "visibility_fraction", config.visibility_fraction);
  config.rng_seed = get_or(j, "rng_seed", config.rng_seed);
  if (j.contains("intrinsics")) {
    const auto& ji = j.at("intrinsics");
    require_known_keys(ji, {"fx", "fy", "cx", "cy", "width", "height"}, "intrinsics");
    config.intrinsics.fx = get_or(ji, "fx", config.intrinsics.fx);
    config.intrinsics.fy = get_or(ji, "fy", config.intrinsics.fy);
    config.intrinsics.cx = get_or(ji, "cx", config.intrinsics.cx);
    config.intrinsics.cy = get_or(ji, "cy", config.intrinsics.cy);
    config.intrinsics.width = get_or(ji, "width", config.intrinsics.width);
    config.intrinsics.height = get_or(ji, "height", config.intrinsics.height);
  }
  config.validate();
  return config;
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
  return synth_config_from_json(read_json_file(path));
}

}  // namespace domsfm
