// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 6 and 7 share one fixed-seed synthetic suite whose
// measured values are pinned below as regression baselines.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "domsfm/cli.hpp"
#include "domsfm/config.hpp"
#include "domsfm/domgraph.hpp"
#include "domsfm/eval.hpp"
#include "domsfm/log.hpp"
#include "domsfm/model_io.hpp"
#include "domsfm/random_util.hpp"
#include "domsfm/synth.hpp"

using namespace domsfm;

namespace {

struct CriterionResult {
  bool pass = true;
  std::ostringstream detail;

  void expect(bool condition, const std::string& what) {
    if (!condition) {
      pass = false;
      detail << "  FAILED: " << what << "\n";
    }
  }
  void note(const std::string& what) { detail << "  " << what << "\n"; }
};

// ---------------------------------------------------------------------------
// Shared fixtures
// ---------------------------------------------------------------------------

LocalizabilityGraph fig2_graph() {
  LocalizabilityGraph g;
  g.nodes = {1, 2, 3, 4, 5, 6};
  for (const auto& [a, b] : std::vector<std::pair<ImageId, ImageId>>{
           {1, 2}, {1, 3}, {2, 4}, {3, 4}, {4, 5}, {4, 6}}) {
    g.add_edge(a, b, 0.0);
    g.add_edge(b, a, 0.0);
  }
  return g;
}

LocalizabilityGraph random_digraph(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(2, 12);
  std::uniform_real_distribution<double> density(0.1, 0.9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = size(rng);
  const double p = density(rng);
  LocalizabilityGraph g;
  for (int i = 1; i <= n; ++i) g.nodes.push_back(i);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      if (i != j && unit(rng) < p) g.add_edge(i, j, 0.0);
  return g;
}

const CameraIntrinsics kPnpCamera{500.0, 500.0, 320.0, 240.0, 640, 480};

Pose random_pose(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Vector3d axis(gauss(rng), gauss(rng), gauss(rng));
  while (axis.norm() < 1e-6) axis = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  Pose pose;
  pose.rotation = Eigen::AngleAxisd(angle(rng), axis.normalized()).toRotationMatrix();
  pose.translation = Eigen::Vector3d(0.2 * gauss(rng), 0.2 * gauss(rng), 0.1 * gauss(rng));
  return pose;
}

std::vector<Correspondence> synthesize_correspondences(const Pose& pose, std::size_t n,
                                                       std::mt19937_64& rng) {
  std::uniform_real_distribution<double> depth(2.0, 6.0);
  std::uniform_real_distribution<double> lateral(-0.4, 0.4);
  std::vector<Correspondence> out;
  out.reserve(n);
  const Eigen::Matrix3d r_inv = pose.rotation.transpose();
  while (out.size() < n) {
    const double z = depth(rng);
    const Eigen::Vector3d p_cam(lateral(rng) * z, lateral(rng) * z, z);
    const Eigen::Vector3d p_model = r_inv * (p_cam - pose.translation);
    const auto px = project(kPnpCamera, pose, p_model);
    if (!px || !kPnpCamera.contains(*px)) continue;
    out.push_back(Correspondence{*px, static_cast<PointId>(out.size() + 1), p_model});
  }
  return out;
}

// ---------------------------------------------------------------------------
// The pinned synthetic suite for criteria 6 and 7 (fixed seeds throughout).
// Close-in cameras with a long focal length see only part of the object, so
// the localizability graph is informative rather than complete.
// ---------------------------------------------------------------------------

SynthConfig suite_synth_config() {
  SynthConfig config;
  config.num_points = 500;
  config.point_distribution = PointDistribution::SphereSurface;
  config.object_extent = 2.0;
  config.num_ref_cameras = 36;
  config.camera_layout = CameraLayout::Hemisphere;
  config.camera_radius = 2.4;
  config.num_query_cameras = 200;
  config.descriptor_dim = 64;
  config.visibility_fraction = 0.5;
  config.rng_seed = 20240915;
  // Long focal length: each camera images a window onto the object, so the
  // localizability graph is informative rather than complete.
  config.intrinsics = CameraIntrinsics{1100.0, 1100.0, 320.0, 240.0, 640, 480};
  return config;
}

RunConfig suite_run_config() {
  RunConfig config;
  config.threshold = 0.05;
  config.domset_iterations = 1000;
  config.seed = 424242;
  config.provider_name = "descriptor-nn";
  config.noise.pixel_noise_sigma = 1.0;
  config.noise.outlier_ratio = 0.10;
  config.noise.rng_seed = 424242;
  config.estimator.rng_seed = 424242;
  config.validate();
  return config;
}

struct Suite {
  Scene scene;
  LocalizabilityGraph graph;
  DominatingSet domset;
  SfmModel filtered;
  EvalReport full_report;
  EvalReport domset_report;
};

Suite build_suite() {
  Suite suite;
  suite.scene = generate_scene(suite_synth_config());
  const RunConfig run = suite_run_config();
  const auto provider = run.make_configured_provider();

  GraphBuildOptions options;
  options.threshold = run.threshold;
  options.threads = 4;
  suite.graph = build_graph(suite.scene.model, *provider, run.estimator, options);
  suite.domset = best_dominating_set(suite.graph, run.domset_iterations, run.seed);
  suite.filtered = filter_by_dominating_set(suite.scene.model, suite.domset.members);
  suite.full_report = evaluate(suite.scene.model, suite.scene.query_views, *provider,
                               run.estimator, "full");
  suite.domset_report = evaluate(suite.filtered, suite.scene.query_views, *provider,
                                 run.estimator, "domset");
  return suite;
}

// Regression pins, frozen from the first fixed-seed run of the suite above.
// The kept/full point ratio of 210/490 = 0.4286 is the desk-scale analogue
// of the keypoint-model filter ratios around 0.44 reported at dataset scale.
constexpr std::size_t kPinnedDomsetSize = 3;
constexpr std::size_t kPinnedFullPoints = 490;
constexpr std::size_t kPinnedKeptPoints = 210;
constexpr std::size_t kPinnedGraphEdges = 452;
constexpr double kPinnedFull5deg5cm = 1.0;
constexpr double kPinnedDomset5deg5cm = 1.0;

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

void criterion_1(CriterionResult& r) {
  const LocalizabilityGraph g = fig2_graph();
  const auto exact = exact_min_dominating_set(g);
  r.expect(exact.size() == 2, "exact minimum has size 2");
  r.expect(exact == std::set<ImageId>{1, 4}, "lexicographic tie-break picks {1, 4}");
  r.expect(is_dominating(g, exact), "exact set dominates");
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const DominatingSet best = best_dominating_set(g, 100, seed);
    r.expect(best.members.size() == 2,
             "best-of-100 has size 2 for seed " + std::to_string(seed));
    r.expect(is_dominating(g, best.members),
             "best-of-100 dominates for seed " + std::to_string(seed));
  }
}

void criterion_2(CriterionResult& r) {
  int equal = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const LocalizabilityGraph g = random_digraph(seed);
    const DominatingSet best = best_dominating_set(g, 1000, seed);
    const auto exact = exact_min_dominating_set(g);
    r.expect(is_dominating(g, best.members), "greedy output dominates (seed " +
                                                 std::to_string(seed) + ")");
    r.expect(best.members.size() >= exact.size(),
             "best >= exact (seed " + std::to_string(seed) + ")");
    equal += best.members.size() == exact.size();
  }
  r.note("equality on " + std::to_string(equal) + "/100 graphs");
  r.expect(equal >= 95, "equality in >= 95% of graphs");
}

void criterion_3(CriterionResult& r) {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<int> count(6, 32);
  int exact_recoveries = 0;
  constexpr int kTrials = 1000;
  for (int trial = 0; trial < kTrials; ++trial) {
    const Pose gt = random_pose(rng);
    const auto corrs = synthesize_correspondences(gt, count(rng), rng);
    const Pose est = refine_pose(solve_pnp_linear(corrs, kPnpCamera), corrs, kPnpCamera, 20);
    const bool ok = geodesic_error(gt.rotation, est.rotation) < 1e-6 &&
                    loc_error(gt.translation, est.translation) < 1e-8;
    exact_recoveries += ok;
  }
  r.note("exact recoveries: " + std::to_string(exact_recoveries) + "/" + std::to_string(kTrials));
  r.expect(exact_recoveries == kTrials, "100% exact recovery");
}

void criterion_4(CriterionResult& r) {
  std::mt19937_64 rng(5);
  const Eigen::Matrix3d base = random_pose(rng).rotation;
  r.expect(geodesic_error(base, base) <= 1e-12, "geodesic(identity) = 0");

  // Exactly representable closed-form rotations; acos quantizes near +-1, so
  // the 1e-12 identities need trace values that are exact (the clamp then
  // maps them to exactly pi/2 and pi).
  Eigen::Matrix3d rz90;
  rz90 << 0, -1, 0, 1, 0, 0, 0, 0, 1;  // 90 degrees about z: trace(delta) = 1
  r.expect(std::abs(geodesic_error(Eigen::Matrix3d::Identity(), rz90) -
                    std::numbers::pi / 2.0) <= 1e-12,
           "90 degrees -> pi/2");

  Eigen::Matrix3d r180 = Eigen::Matrix3d::Identity();
  r180(0, 0) = -1.0;
  r180(1, 1) = -1.0;  // 180 degrees about z: trace(delta) = -1
  r.expect(std::abs(geodesic_error(Eigen::Matrix3d::Identity(), r180) - std::numbers::pi) <=
               1e-12,
           "180 degrees -> pi");

  r.expect(loc_error(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(3, 4, 0)) == 5.0,
           "loc_error((0,0,0),(3,4,0)) = 5 exactly");

  const Bbox3 unit_cube{Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones()};
  const Pose gt = random_pose(rng);
  for (double delta : {0.003, 0.07, 0.4, 1.9}) {
    Pose shifted = gt;
    shifted.translation.y() -= delta;
    const double expected = delta / std::sqrt(3.0);
    r.expect(std::abs(bbox_add_error(gt, shifted, unit_cube) - expected) <= 1e-12,
             "pure translation " + std::to_string(delta) + " -> delta/sqrt(3)");
  }
}

void criterion_5(CriterionResult& r) {
  SynthConfig config;
  config.num_points = 300;
  config.num_ref_cameras = 12;
  config.camera_layout = CameraLayout::Ring;
  config.camera_radius = 4.0;
  config.visibility_fraction = 1.0;
  config.descriptor_dim = 8;
  config.rng_seed = 777;
  const Scene scene = generate_scene(config);

  const OracleProvider provider(NoiseConfig{});
  EstimatorConfig estimator;
  GraphBuildOptions options;
  options.threads = 4;
  GraphBuildStats stats;
  const LocalizabilityGraph g = build_graph(scene.model, provider, estimator, options, &stats);
  r.note("edges: " + std::to_string(g.num_edges()) + "/132, attempts: " +
         std::to_string(stats.estimation_attempts));
  r.expect(g.nodes.size() == 12, "12 nodes");
  r.expect(g.num_edges() == 132, "all 132 directed edges present");
  r.expect(stats.estimation_attempts == 132, "exactly N(N-1) estimation attempts");

  const DominatingSet d = best_dominating_set(g, 100, 9);
  r.expect(d.members.size() == 1, "dominating set of size 1");
  r.expect(is_dominating(g, d.members), "dominating set dominates");
}

void criterion_6(CriterionResult& r, const Suite& suite) {
  const ComparisonReport cmp = compare(suite.full_report, suite.domset_report, {});
  const double filter_ratio = static_cast<double>(suite.filtered.num_points()) /
                              static_cast<double>(suite.scene.model.num_points());
  r.note("domset size: " + std::to_string(suite.domset.members.size()) + " of 36");
  r.note("graph edges: " + std::to_string(suite.graph.num_edges()) + " of 1260");
  r.note("image reduction: " + std::to_string(cmp.image_reduction_factor));
  r.note("point reduction: " + std::to_string(cmp.point_reduction_factor) +
         " (filter ratio " + std::to_string(filter_ratio) + ")");
  r.note("match-time speedup: " + std::to_string(cmp.match_time_speedup));
  r.note("full 5deg-5cm: " + std::to_string(suite.full_report.success_5deg5cm));
  r.note("domset 5deg-5cm: " + std::to_string(suite.domset_report.success_5deg5cm));

  r.expect(cmp.image_reduction_factor >= 3.0, "image reduction >= 3");
  r.expect(cmp.point_reduction_factor >= 1.5, "point reduction >= 1.5");
  r.expect(cmp.match_time_speedup >= 1.5, "match-time speedup >= 1.5x");
  r.expect(suite.full_report.success_5deg5cm - suite.domset_report.success_5deg5cm <= 0.10,
           "5deg-5cm drop <= 10 percentage points");

  r.expect(suite.domset.members.size() == kPinnedDomsetSize, "pinned domset size");
  r.expect(suite.scene.model.num_points() == kPinnedFullPoints, "pinned full point count");
  r.expect(suite.filtered.num_points() == kPinnedKeptPoints, "pinned kept point count");
  r.expect(suite.graph.num_edges() == kPinnedGraphEdges, "pinned graph edge count");
  r.expect(std::abs(suite.full_report.success_5deg5cm - kPinnedFull5deg5cm) < 1e-9,
           "pinned full 5deg-5cm rate");
  r.expect(std::abs(suite.domset_report.success_5deg5cm - kPinnedDomset5deg5cm) < 1e-9,
           "pinned domset 5deg-5cm rate");
}

void criterion_7(CriterionResult& r, const Suite& suite) {
  const RunConfig run = suite_run_config();
  const auto provider = run.make_configured_provider();
  std::vector<EvalReport> randoms;
  double mean5 = 0.0;
  for (int s = 0; s < 20; ++s) {
    std::mt19937_64 rng(splitmix64(run.seed + 0x9E3779B97F4A7C15ULL *
                                                  static_cast<std::uint64_t>(s + 1)));
    const auto sample =
        random_reference_sample(suite.graph, suite.domset.members.size(), rng);
    const SfmModel filtered = filter_by_dominating_set(suite.scene.model, sample);
    randoms.push_back(evaluate(filtered, suite.scene.query_views, *provider, run.estimator,
                               "random-" + std::to_string(s)));
    mean5 += randoms.back().success_5deg5cm;
  }
  mean5 /= 20.0;
  const ComparisonReport cmp = compare(suite.full_report, suite.domset_report, randoms);
  r.note("domset 5deg-5cm: " + std::to_string(suite.domset_report.success_5deg5cm));
  r.note("random mean 5deg-5cm: " + std::to_string(mean5) + " (stddev " +
         std::to_string(cmp.random_stddev->s5) + ")");
  r.note("delta: " + std::to_string(cmp.domset_vs_random_delta->s5));
  r.expect(suite.domset_report.success_5deg5cm > mean5,
           "domset 5deg-5cm beats the random-baseline mean");
}

int run_pipeline_cli(const std::filesystem::path& dir, const std::filesystem::path& synth_cfg,
                     const std::filesystem::path& run_cfg) {
  auto cli = [](std::vector<std::string> args) {
    std::vector<const char*> argv;
    argv.push_back("domsfm");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
  };
  const std::string scene = (dir / "scene").string();
  int code = cli({"synth", "--config", synth_cfg.string(), "--out", scene});
  if (code != 0) return code;
  code = cli({"--config", run_cfg.string(), "graph", "--model", scene, "--out",
              (dir / "graph.json").string()});
  if (code != 0) return code;
  code = cli({"--config", run_cfg.string(), "domset", "--graph", (dir / "graph.json").string(),
              "--out", (dir / "domset.json").string(), "--random-samples", "2"});
  if (code != 0) return code;
  code = cli({"--config", run_cfg.string(), "filter", "--model", scene, "--domset",
              (dir / "domset.json").string(), "--out", (dir / "filtered").string()});
  if (code != 0) return code;
  code = cli({"--config", run_cfg.string(), "eval", "--model", scene, "--queries",
              scene + "/queries.json", "--out", (dir / "full.json").string(), "--name", "full",
              "--csv", (dir / "full.csv").string()});
  if (code != 0) return code;
  code = cli({"--config", run_cfg.string(), "eval", "--model", (dir / "filtered").string(),
              "--queries", scene + "/queries.json", "--out", (dir / "domset_report.json").string(),
              "--name", "domset"});
  if (code != 0) return code;
  return cli({"compare", (dir / "full.json").string(), (dir / "domset_report.json").string(),
              "--out", (dir / "compare.json").string()});
}

void criterion_8(CriterionResult& r) {
  const auto base = std::filesystem::temp_directory_path() /
                    ("domsfm_acceptance_" + std::to_string(::getpid()));
  std::filesystem::remove_all(base);
  std::filesystem::create_directories(base);

  const auto synth_cfg = base / "synth.json";
  const auto run_cfg = base / "run.json";
  {
    nlohmann::json s = {{"num_points", 150},   {"num_ref_cameras", 10},
                        {"camera_layout", "ring"}, {"camera_radius", 4.0},
                        {"num_query_cameras", 20}, {"descriptor_dim", 8},
                        {"visibility_fraction", 0.8}, {"rng_seed", 99}};
    write_json_file(s, synth_cfg);
    nlohmann::json c = {{"threshold", 0.05},
                        {"domset_iterations", 200},
                        {"seed", 7},
                        {"provider",
                         {{"name", "descriptor-nn"},
                          {"noise", {{"pixel_noise_sigma", 0.5}, {"outlier_ratio", 0.05}}}}},
                        {"estimator", {{"ransac_max_iterations", 500}}}};
    write_json_file(c, run_cfg);
  }

  const auto dir_a = base / "a";
  const auto dir_b = base / "b";
  std::filesystem::create_directories(dir_a);
  std::filesystem::create_directories(dir_b);
  r.expect(run_pipeline_cli(dir_a, synth_cfg, run_cfg) == 0, "first pipeline run succeeds");
  r.expect(run_pipeline_cli(dir_b, synth_cfg, run_cfg) == 0, "second pipeline run succeeds");

  auto file_bytes = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };
  for (const char* rel : {"scene/model.json", "scene/queries.json", "graph.json", "domset.json",
                          "filtered/model.json"}) {
    r.expect(!file_bytes(dir_a / rel).empty() &&
                 file_bytes(dir_a / rel) == file_bytes(dir_b / rel),
             std::string("byte-identical ") + rel);
  }
  // Reports are deterministic modulo wall-clock fields.
  for (const char* rel : {"full.json", "domset_report.json", "compare.json"}) {
    r.expect(strip_timing(read_json_file(dir_a / rel)) == strip_timing(read_json_file(dir_b / rel)),
             std::string("deterministic (timing-stripped) ") + rel);
  }
  std::filesystem::remove_all(base);
}

void criterion_9(CriterionResult& r) {
  // Reference views cover only a 45-degree cap around the pole; the cameras
  // nearest the cap boundary are the ones a dominating set can drop.
  SynthConfig config = suite_synth_config();
  config.camera_layout = CameraLayout::SphereCap;
  config.num_ref_cameras = 24;
  config.num_query_cameras = 0;
  config.rng_seed = 31415;
  config.intrinsics = CameraIntrinsics{1300.0, 1300.0, 320.0, 240.0, 640, 480};
  const Scene scene = generate_scene(config);

  const RunConfig run = suite_run_config();
  const auto provider = run.make_configured_provider();
  GraphBuildOptions options;
  options.threshold = run.threshold;
  options.threads = 4;
  const LocalizabilityGraph graph = build_graph(scene.model, *provider, run.estimator, options);
  const DominatingSet domset = best_dominating_set(graph, run.domset_iterations, run.seed);
  const SfmModel filtered = filter_by_dominating_set(scene.model, domset.members);
  r.note("domset size: " + std::to_string(domset.members.size()) + " of 24");

  // Interior queries look down from near the pole; boundary queries sit at
  // and slightly beyond the cap rim, overlapping regions that only the
  // boundary reference images saw.
  auto make_queries = [&](double polar_lo_deg, double polar_hi_deg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> polar(polar_lo_deg * std::numbers::pi / 180.0,
                                                 polar_hi_deg * std::numbers::pi / 180.0);
    std::uniform_real_distribution<double> azimuth(0.0, 2.0 * std::numbers::pi);
    std::vector<QueryView> queries;
    for (int i = 0; i < 60; ++i) {
      const double phi = polar(rng);
      const double psi = azimuth(rng);
      const Eigen::Vector3d eye = config.camera_radius *
                                  Eigen::Vector3d(std::sin(phi) * std::cos(psi),
                                                  std::sin(phi) * std::sin(psi), std::cos(phi));
      queries.push_back(render_view(scene.model, look_at(eye, Eigen::Vector3d::Zero()),
                                    config.intrinsics, config.visibility_fraction, rng));
    }
    return queries;
  };
  const auto interior = make_queries(5.0, 30.0, 1001);
  const auto boundary = make_queries(50.0, 70.0, 1002);

  const EvalReport full_interior =
      evaluate(scene.model, interior, *provider, run.estimator, "full-interior");
  const EvalReport full_boundary =
      evaluate(scene.model, boundary, *provider, run.estimator, "full-boundary");
  const EvalReport filt_interior =
      evaluate(filtered, interior, *provider, run.estimator, "domset-interior");
  const EvalReport filt_boundary =
      evaluate(filtered, boundary, *provider, run.estimator, "domset-boundary");

  const double drop_interior = full_interior.success_5deg5cm - filt_interior.success_5deg5cm;
  const double drop_boundary = full_boundary.success_5deg5cm - filt_boundary.success_5deg5cm;
  r.note("interior 5deg-5cm: " + std::to_string(full_interior.success_5deg5cm) + " -> " +
         std::to_string(filt_interior.success_5deg5cm) + " (drop " +
         std::to_string(drop_interior) + ")");
  r.note("boundary 5deg-5cm: " + std::to_string(full_boundary.success_5deg5cm) + " -> " +
         std::to_string(filt_boundary.success_5deg5cm) + " (drop " +
         std::to_string(drop_boundary) + ")");
  r.expect(drop_boundary > drop_interior,
           "boundary-only queries drop strictly more than interior queries");
}

}  // namespace

int main() {
  set_log_level(LogLevel::Warn);

  struct Entry {
    int id;
    const char* name;
    double budget_seconds;
    std::function<void(CriterionResult&)> run;
  };

  // The suite for criteria 6/7 is built lazily and shared.
  std::optional<Suite> suite;
  auto get_suite = [&]() -> const Suite& {
    if (!suite) suite = build_suite();
    return *suite;
  };

  const std::vector<Entry> entries = {
      {1, "fig2 optimality (exact size 2; best-of-100 size 2 on 50 seeds)", 1.0, criterion_1},
      {2, "greedy vs exact oracle on 100 random digraphs (n <= 12)", 30.0, criterion_2},
      {3, "PnP exactness on 1000 noise-free configurations", 10.0, criterion_3},
      {4, "metric unit identities", 5.0, criterion_4},
      {5, "zero-noise 12-camera ring: complete graph, domset size 1", 60.0, criterion_5},
      {6, "reduction and speedup on the pinned synthetic suite", 300.0,
       [&](CriterionResult& r) { criterion_6(r, get_suite()); }},
      {7, "dominating set beats random sampling (20 baseline seeds)", 600.0,
       [&](CriterionResult& r) { criterion_7(r, get_suite()); }},
      {8, "full-pipeline determinism (byte-identical artifacts)", 120.0, criterion_8},
      {9, "hemisphere limitation fixture (boundary drop exceeds interior)", 300.0, criterion_9},
  };

  int failures = 0;
  for (const Entry& entry : entries) {
    CriterionResult result;
    const auto start = std::chrono::steady_clock::now();
    try {
      entry.run(result);
    } catch (const std::exception& e) {
      result.pass = false;
      result.detail << "  EXCEPTION: " << e.what() << "\n";
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed >= entry.budget_seconds) {
      result.pass = false;
      result.detail << "  FAILED: runtime " << elapsed << "s exceeds budget "
                    << entry.budget_seconds << "s\n";
    }
    std::printf("[%s] criterion %d: %s (%.2fs)\n", result.pass ? "PASS" : "FAIL", entry.id,
                entry.name, elapsed);
    const std::string detail = result.detail.str();
    if (!detail.empty()) std::fputs(detail.c_str(), stdout);
    failures += result.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(entries.size()) - failures,
              entries.size());
  return failures == 0 ? 0 : 1;
}
