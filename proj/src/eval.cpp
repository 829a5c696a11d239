#include "domsfm/eval.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <thread>

#include "domsfm/model_io.hpp"

namespace domsfm {

namespace {
constexpr int kReportVersion = 1;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

QueryResult estimate_query_pose(const SfmModel& model, const QueryView& query,
                                const CorrespondenceProvider& provider,
                                const EstimatorConfig& estimator, int query_index) {
  QueryResult result;
  result.query_index = query_index;

  const MatchSet matches = provider.match(model, query);
  result.match_time = matches.elapsed_seconds;
  result.candidate_comparisons = matches.candidate_comparisons;

  const auto start = std::chrono::steady_clock::now();
  try {
    result.estimate = ransac_pnp(matches.correspondences, query.camera, estimator);
  } catch (const Error&) {
    result.estimate = PoseEstimate{};  // converged = false
  }
  result.pnp_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (result.estimate.converged) {
    result.e_loc = loc_error(query.pose_gt.translation, result.estimate.pose.translation);
    result.e_theta = geodesic_error(query.pose_gt.rotation, result.estimate.pose.rotation);
    result.add_ratio = bbox_add_error(query.pose_gt, result.estimate.pose, model.bbox);
  } else {
    result.e_loc = kInf;
    result.e_theta = std::numbers::pi;
    result.add_ratio = kInf;
  }
  return result;
}

bool success_n_deg_n_cm(const QueryResult& result, double n_deg, double n_cm, double unit_scale) {
  if (!result.estimate.converged) return false;
  const double loc_threshold = n_cm * 0.01 * unit_scale;  // cm -> m -> scene units
  const double angle_threshold = n_deg * std::numbers::pi / 180.0;
  return result.e_loc <= loc_threshold && result.e_theta <= angle_threshold;
}

bool success_add_01d(const QueryResult& result) {
  return result.estimate.converged && result.add_ratio < 0.1;
}

EvalReport evaluate(const SfmModel& model, const std::vector<QueryView>& queries,
                    const CorrespondenceProvider& provider, const EstimatorConfig& estimator,
                    const std::string& variant_name, double unit_scale, int threads) {
  if (queries.empty()) throw ValidationError("evaluate: need at least one query");
  if (threads < 1) throw ValidationError("evaluate: threads must be >= 1");

  EvalReport report;
  report.variant_name = variant_name;
  report.num_images = model.num_images();
  report.num_points = model.num_points();
  report.unit_scale = unit_scale;
  report.per_query.resize(queries.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= queries.size()) return;
      QueryView query = queries[i];
      query.salt = static_cast<std::uint64_t>(i + 1);
      report.per_query[i] =
          estimate_query_pose(model, query, provider, estimator, static_cast<int>(i));
    }
  };
  const int worker_count = std::max(1, std::min<int>(threads, static_cast<int>(queries.size())));
  if (worker_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    for (int t = 0; t < worker_count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  double total_time = 0.0;
  std::size_t s1 = 0, s3 = 0, s5 = 0, sa = 0;
  for (const QueryResult& r : report.per_query) {
    total_time += r.match_time + r.pnp_time;
    s1 += success_n_deg_n_cm(r, 1.0, 1.0, unit_scale);
    s3 += success_n_deg_n_cm(r, 3.0, 3.0, unit_scale);
    s5 += success_n_deg_n_cm(r, 5.0, 5.0, unit_scale);
    sa += success_add_01d(r);
  }
  const double n = static_cast<double>(queries.size());
  report.success_1deg1cm = static_cast<double>(s1) / n;
  report.success_3deg3cm = static_cast<double>(s3) / n;
  report.success_5deg5cm = static_cast<double>(s5) / n;
  report.success_add01d = static_cast<double>(sa) / n;
  report.mean_fps = total_time > 0.0 ? n / total_time : 0.0;
  return report;
}

namespace {

SuccessRates rates_of(const EvalReport& r) {
  return {r.success_1deg1cm, r.success_3deg3cm, r.success_5deg5cm, r.success_add01d};
}

void check_same_queries(const EvalReport& a, const EvalReport& b) {
  if (a.per_query.size() != b.per_query.size())
    throw ValidationError("compare: mismatched query sets (" + a.variant_name + " has " +
                          std::to_string(a.per_query.size()) + " queries, " + b.variant_name +
                          " has " + std::to_string(b.per_query.size()) + ")");
  for (std::size_t i = 0; i < a.per_query.size(); ++i) {
    if (a.per_query[i].query_index != b.per_query[i].query_index)
      throw ValidationError("compare: mismatched query sets (query_index differs at row " +
                            std::to_string(i) + ")");
  }
}

double total_match_time(const EvalReport& r) {
  double t = 0.0;
  for (const auto& q : r.per_query) t += q.match_time;
  return t;
}

}  // namespace

ComparisonReport compare(const EvalReport& full, const EvalReport& domset,
                         const std::vector<EvalReport>& randoms) {
  check_same_queries(full, domset);
  for (const EvalReport& r : randoms) check_same_queries(full, r);
  if (domset.num_images == 0 || domset.num_points == 0)
    throw ValidationError("compare: domset report covers an empty model");

  ComparisonReport cmp;
  cmp.full = full;
  cmp.domset = domset;
  cmp.randoms = randoms;
  cmp.image_reduction_factor =
      static_cast<double>(full.num_images) / static_cast<double>(domset.num_images);
  cmp.point_reduction_factor =
      static_cast<double>(full.num_points) / static_cast<double>(domset.num_points);
  cmp.speedup_factor = full.mean_fps > 0.0 ? domset.mean_fps / full.mean_fps : 1.0;
  const double domset_match = total_match_time(domset);
  cmp.match_time_speedup = domset_match > 0.0 ? total_match_time(full) / domset_match : 1.0;

  if (!randoms.empty()) {
    SuccessRates mean{}, var{};
    for (const EvalReport& r : randoms) {
      const SuccessRates s = rates_of(r);
      mean.s1 += s.s1;
      mean.s3 += s.s3;
      mean.s5 += s.s5;
      mean.add += s.add;
    }
    const double k = static_cast<double>(randoms.size());
    mean.s1 /= k;
    mean.s3 /= k;
    mean.s5 /= k;
    mean.add /= k;
    for (const EvalReport& r : randoms) {
      const SuccessRates s = rates_of(r);
      var.s1 += (s.s1 - mean.s1) * (s.s1 - mean.s1);
      var.s3 += (s.s3 - mean.s3) * (s.s3 - mean.s3);
      var.s5 += (s.s5 - mean.s5) * (s.s5 - mean.s5);
      var.add += (s.add - mean.add) * (s.add - mean.add);
    }
    cmp.random_mean = mean;
    cmp.random_stddev = SuccessRates{std::sqrt(var.s1 / k), std::sqrt(var.s3 / k),
                                     std::sqrt(var.s5 / k), std::sqrt(var.add / k)};
    const SuccessRates d = rates_of(domset);
    cmp.domset_vs_random_delta =
        SuccessRates{d.s1 - mean.s1, d.s3 - mean.s3, d.s5 - mean.s5, d.add - mean.add};
  }
  return cmp;
}

namespace {

// JSON cannot carry inf; failed-query error fields serialize as null.
nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double from_finite_or_null(const nlohmann::json& j) {
  return j.is_null() ? kInf : j.get<double>();
}

nlohmann::json rates_to_json(const SuccessRates& r) {
  return {{"1deg_1cm", r.s1}, {"3deg_3cm", r.s3}, {"5deg_5cm", r.s5}, {"add_01d", r.add}};
}

nlohmann::json pose_to_json(const Pose& pose) {
  nlohmann::json rot = nlohmann::json::array();
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) rot.push_back(pose.rotation(row, col));
  return {{"rotation", std::move(rot)},
          {"translation", {pose.translation.x(), pose.translation.y(), pose.translation.z()}}};
}

Pose pose_from_json(const nlohmann::json& j) {
  Pose pose;
  const auto& rot = j.at("rotation");
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) pose.rotation(row, col) = rot[3 * row + col].get<double>();
  const auto& t = j.at("translation");
  pose.translation = Eigen::Vector3d(t[0].get<double>(), t[1].get<double>(), t[2].get<double>());
  return pose;
}

}  // namespace

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["version"] = kReportVersion;
  j["variant_name"] = report.variant_name;
  j["num_images"] = report.num_images;
  j["num_points"] = report.num_points;
  j["success_1deg_1cm"] = report.success_1deg1cm;
  j["success_3deg_3cm"] = report.success_3deg3cm;
  j["success_5deg_5cm"] = report.success_5deg5cm;
  j["success_add_01d"] = report.success_add01d;
  j["pipeline_fps_match_pnp"] = report.mean_fps;
  j["unit_scale"] = report.unit_scale;
  nlohmann::json rows = nlohmann::json::array();
  for (const QueryResult& r : report.per_query) {
    nlohmann::json row;
    row["query_index"] = r.query_index;
    row["converged"] = r.estimate.converged;
    row["e_loc"] = finite_or_null(r.e_loc);
    row["e_theta"] = finite_or_null(r.e_theta);
    row["add_ratio"] = finite_or_null(r.add_ratio);
    row["match_time"] = r.match_time;
    row["pnp_time"] = r.pnp_time;
    row["candidate_comparisons"] = r.candidate_comparisons;
    row["num_iterations"] = r.estimate.num_iterations_used;
    row["inlier_ids"] = r.estimate.inlier_ids;
    if (r.estimate.converged) row["pose"] = pose_to_json(r.estimate.pose);
    rows.push_back(std::move(row));
  }
  j["per_query"] = std::move(rows);
  return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("version"))
    throw ValidationError("report: missing version field");
  if (j.at("version").get<int>() != kReportVersion)
    throw ValidationError("report: unsupported version");
  EvalReport report;
  report.variant_name = j.at("variant_name").get<std::string>();
  report.num_images = j.at("num_images").get<std::size_t>();
  report.num_points = j.at("num_points").get<std::size_t>();
  report.success_1deg1cm = j.at("success_1deg_1cm").get<double>();
  report.success_3deg3cm = j.at("success_3deg_3cm").get<double>();
  report.success_5deg5cm = j.at("success_5deg_5cm").get<double>();
  report.success_add01d = j.at("success_add_01d").get<double>();
  report.mean_fps = j.at("pipeline_fps_match_pnp").get<double>();
  report.unit_scale = j.at("unit_scale").get<double>();
  for (const auto& row : j.at("per_query")) {
    QueryResult r;
    r.query_index = row.at("query_index").get<int>();
    r.estimate.converged = row.at("converged").get<bool>();
    r.e_loc = from_finite_or_null(row.at("e_loc"));
    r.e_theta = row.at("e_theta").is_null() ? std::numbers::pi : row.at("e_theta").get<double>();
    r.add_ratio = from_finite_or_null(row.at("add_ratio"));
    r.match_time = row.at("match_time").get<double>();
    r.pnp_time = row.at("pnp_time").get<double>();
    r.candidate_comparisons = row.at("candidate_comparisons").get<std::size_t>();
    r.estimate.num_iterations_used = row.at("num_iterations").get<int>();
    for (const auto& id : row.at("inlier_ids")) r.estimate.inlier_ids.insert(id.get<PointId>());
    if (row.contains("pose")) r.estimate.pose = pose_from_json(row.at("pose"));
    report.per_query.push_back(std::move(r));
  }
  return report;
}

void save_report(const EvalReport& report, const std::filesystem::path& path) {
  write_json_file(report_to_json(report), path);
}

EvalReport load_report(const std::filesystem::path& path) {
  return report_from_json(read_json_file(path));
}

nlohmann::json comparison_to_json(const ComparisonReport& report) {
  nlohmann::json j;
  j["version"] = kReportVersion;
  j["image_reduction_factor"] = report.image_reduction_factor;
  j["point_reduction_factor"] = report.point_reduction_factor;
  j["speedup_factor"] = report.speedup_factor;
  j["match_time_speedup"] = report.match_time_speedup;
  j["full"] = report_to_json(report.full);
  j["domset"] = report_to_json(report.domset);
  nlohmann::json randoms = nlohmann::json::array();
  for (const EvalReport& r : report.randoms) randoms.push_back(report_to_json(r));
  j["randoms"] = std::move(randoms);
  j["domset_vs_random_delta"] =
      report.domset_vs_random_delta ? rates_to_json(*report.domset_vs_random_delta)
                                    : nlohmann::json(nullptr);
  j["random_mean"] =
      report.random_mean ? rates_to_json(*report.random_mean) : nlohmann::json(nullptr);
  j["random_stddev"] =
      report.random_stddev ? rates_to_json(*report.random_stddev) : nlohmann::json(nullptr);
  return j;
}

void save_comparison(const ComparisonReport& report, const std::filesystem::path& path) {
  write_json_file(comparison_to_json(report), path);
}

void write_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) throw IoError("cannot write " + path.string());
  out << "query_index,e_loc,e_theta_deg,add_ratio,match_ms,pnp_ms,converged\n";
  char buf[256];
  for (const QueryResult& r : report.per_query) {
    const double theta_deg = r.e_theta * 180.0 / std::numbers::pi;
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.6f,%.6f,%d\n", r.query_index, r.e_loc,
                  theta_deg, r.add_ratio, r.match_time * 1e3, r.pnp_time * 1e3,
                  r.estimate.converged ? 1 : 0);
    out << buf;
  }
  if (!out.good()) throw IoError("write failed for " + path.string());
}

nlohmann::json strip_timing(const nlohmann::json& j) {
  static const std::set<std::string> kTimingKeys = {"match_time", "pnp_time",
                                                    "pipeline_fps_match_pnp", "speedup_factor",
                                                    "match_time_speedup"};
  if (j.is_object()) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [key, value] : j.items()) {
      if (kTimingKeys.count(key)) continue;
      out[key] = strip_timing(value);
    }
    return out;
  }
  if (j.is_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& value : j) out.push_back(strip_timing(value));
    return out;
  }
  return j;
}

}  // namespace domsfm
