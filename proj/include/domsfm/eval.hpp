#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "domsfm/correspondence.hpp"
#include "domsfm/model.hpp"

namespace domsfm {

struct QueryResult {
  int query_index = 0;
  PoseEstimate estimate;
  double e_loc = 0.0;      // scene units
  double e_theta = 0.0;    // radians, in [0, pi]
  double add_ratio = 0.0;  // dimensionless corner-mean ratio
  double match_time = 0.0;  // seconds
  double pnp_time = 0.0;    // seconds
  std::size_t candidate_comparisons = 0;
};

struct EvalReport {
  std::string variant_name;
  std::size_t num_images = 0;
  std::size_t num_points = 0;
  double success_1deg1cm = 0.0;
  double success_3deg3cm = 0.0;
  double success_5deg5cm = 0.0;
  double success_add01d = 0.0;
  // Matching + PnP only; feature extraction is outside this pipeline, hence
  // the explicit label in the serialized report.
  double mean_fps = 0.0;
  double unit_scale = 1.0;
  std::vector<QueryResult> per_query;
};

struct SuccessRates {
  double s1 = 0.0;
  double s3 = 0.0;
  double s5 = 0.0;
  double add = 0.0;
};

struct ComparisonReport {
  double image_reduction_factor = 1.0;
  double point_reduction_factor = 1.0;
  double speedup_factor = 1.0;       // domset fps / full fps
  double match_time_speedup = 1.0;   // total full match time / total domset match time
  EvalReport full;
  EvalReport domset;
  std::vector<EvalReport> randoms;
  // domset success rates minus the random-baseline mean (absent when no
  // random reports were supplied).
  std::optional<SuccessRates> domset_vs_random_delta;
  std::optional<SuccessRates> random_mean;
  std::optional<SuccessRates> random_stddev;
};

// Match (timed), estimate (timed), compute the three error metrics against
// the query's held-out ground truth. Estimator failures become a
// converged=false result, never an exception.
QueryResult estimate_query_pose(const SfmModel& model, const QueryView& query,
                                const CorrespondenceProvider& provider,
                                const EstimatorConfig& estimator, int query_index = 0);

// e_loc <= n cm (converted via unit_scale: scene units per meter) AND
// e_theta <= n degrees; non-converged results always fail.
bool success_n_deg_n_cm(const QueryResult& result, double n_deg, double n_cm,
                        double unit_scale = 1.0);

// add_ratio strictly below 10% of the diagonal.
bool success_add_01d(const QueryResult& result);

EvalReport evaluate(const SfmModel& model, const std::vector<QueryView>& queries,
                    const CorrespondenceProvider& provider, const EstimatorConfig& estimator,
                    const std::string& variant_name, double unit_scale = 1.0, int threads = 1);

// Reduction/speedup factors of domset vs full, plus success-rate deltas
// against the random baselines. All reports must cover the same query set.
ComparisonReport compare(const EvalReport& full, const EvalReport& domset,
                         const std::vector<EvalReport>& randoms);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
void save_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);

nlohmann::json comparison_to_json(const ComparisonReport& report);
void save_comparison(const ComparisonReport& report, const std::filesystem::path& path);

// Per-query CSV flattening: query_index, e_loc, e_theta_deg, add_ratio,
// match_ms, pnp_ms, converged.
void write_csv(const EvalReport& report, const std::filesystem::path& path);

// Copy of a report/comparison JSON with wall-clock fields removed; reports
// are deterministic modulo these fields.
nlohmann::json strip_timing(const nlohmann::json& j);

}  // namespace domsfm
