#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "domsfm/correspondence.hpp"
#include "domsfm/domgraph.hpp"
#include "domsfm/synth.hpp"

namespace domsfm {

// Experiment knobs shared by the pipeline commands. Parsed strictly: unknown
// keys anywhere in the document are rejected.
struct RunConfig {
  double threshold = 0.05;
  int domset_iterations = 1000;
  std::uint64_t seed = 0;
  int threads = 1;
  double unit_scale = 1.0;  // scene units per meter
  std::string provider_name = "oracle";
  NoiseConfig noise;
  double ratio_threshold = 0.8;
  EstimatorConfig estimator;
  EdgeErrorKind edge_error = EdgeErrorKind::BboxCornerMean;

  void validate() const;
  std::unique_ptr<CorrespondenceProvider> make_configured_provider() const;
  // The cache key written into graph files: every knob that affects edges.
  nlohmann::json cache_key(const std::string& digest) const;
};

RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json run_config_to_json(const RunConfig& config);

SynthConfig synth_config_from_json(const nlohmann::json& j);
SynthConfig load_synth_config(const std::filesystem::path& path);

// Rejects keys of j not in `allowed`; context names the object in messages.
void require_known_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                        const std::string& context);

}  // namespace domsfm
