#include "domsfm/correspondence.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "domsfm/random_util.hpp"

namespace domsfm {

void NoiseConfig::validate() const {
  if (!(pixel_noise_sigma >= 0.0)) throw ValidationError("noise: pixel_noise_sigma must be >= 0");
  if (!(outlier_ratio >= 0.0 && outlier_ratio < 1.0))
    throw ValidationError("noise: outlier_ratio must lie in [0, 1)");
  if (!(drop_ratio >= 0.0 && drop_ratio < 1.0))
    throw ValidationError("noise: drop_ratio must lie in [0, 1)");
}

void corrupt_matches(std::vector<Correspondence>* matches, const NoiseConfig& noise,
                     const CameraIntrinsics& camera, std::mt19937_64& rng) {
  // Stage 1: Gaussian pixel noise.
  if (noise.pixel_noise_sigma > 0.0) {
    std::normal_distribution<double> gauss(0.0, noise.pixel_noise_sigma);
    for (Correspondence& c : *matches) {
      c.pixel.x() += gauss(rng);
      c.pixel.y() += gauss(rng);
    }
  }
  // Stage 2: independent drops.
  if (noise.drop_ratio > 0.0) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<Correspondence> kept;
    kept.reserve(matches->size());
    for (Correspondence& c : *matches)
      if (uniform(rng) >= noise.drop_ratio) kept.push_back(std::move(c));
    *matches = std::move(kept);
  }
  // Stage 3: replace a fraction of pixels with uniform in-bounds pixels; the
  // 3D point is kept, modelling a mismatch.
  if (noise.outlier_ratio > 0.0 && !matches->empty()) {
    const std::size_t n_outliers = static_cast<std::size_t>(
        std::llround(noise.outlier_ratio * static_cast<double>(matches->size())));
    const auto indices = sample_without_replacement(matches->size(), n_outliers, rng);
    std::uniform_real_distribution<double> ux(0.0, static_cast<double>(camera.width));
    std::uniform_real_distribution<double> uy(0.0, static_cast<double>(camera.height));
    for (std::size_t idx : indices) {
      const double x = ux(rng);
      const double y = uy(rng);
      (*matches)[idx].pixel = Eigen::Vector2d(x, y);
    }
  }
}

MatchSet oracle_matches(const SfmModel& model, const Pose& query_pose,
                        const CameraIntrinsics& query_camera, const NoiseConfig& noise) {
  noise.validate();
  const auto start = std::chrono::steady_clock::now();
  MatchSet out;
  out.provider_name = "oracle";
  std::mt19937_64 rng(noise.rng_seed);
  for (const auto& [id, point] : model.points) {
    const auto px = project(query_camera, query_pose, point.position);
    if (!px || !query_camera.contains(*px)) continue;
    out.correspondences.push_back(Correspondence{*px, id, point.position});
  }
  corrupt_matches(&out.correspondences, noise, query_camera, rng);
  out.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

MatchSet descriptor_matches(const SfmModel& model,
                            const std::vector<Eigen::Vector2d>& query_keypoints,
                            const std::vector<Eigen::VectorXd>& query_descriptors,
                            double ratio_threshold) {
  if (query_keypoints.size() != query_descriptors.size())
    throw ValidationError("descriptor_matches: query descriptor list not parallel to keypoints");
  if (!(ratio_threshold > 0.0))
    throw ValidationError("descriptor_matches: ratio_threshold must be positive");

  // Flatten model points; every point must carry a descriptor.
  std::vector<PointId> point_ids;
  std::vector<const Point3D*> points;
  point_ids.reserve(model.points.size());
  points.reserve(model.points.size());
  for (const auto& [id, point] : model.points) {
    if (!point.descriptor)
      throw ValidationError("descriptor_matches: model lacks descriptors (point " +
                            std::to_string(id) + ")");
    point_ids.push_back(id);
    points.push_back(&point);
  }

  const auto start = std::chrono::steady_clock::now();
  MatchSet out;
  out.provider_name = "descriptor-nn";
  out.candidate_comparisons = query_keypoints.size() * points.size();

  const std::size_t nq = query_descriptors.size();
  const std::size_t nm = points.size();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  // Nearest and second-nearest model point per query, and nearest query per
  // model point (for the mutual check).
  std::vector<std::size_t> best_model(nq, kNone);
  std::vector<double> best_d(nq, std::numeric_limits<double>::infinity());
  std::vector<double> second_d(nq, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> best_query(nm, kNone);
  std::vector<double> best_query_d(nm, std::numeric_limits<double>::infinity());

  for (std::size_t q = 0; q < nq; ++q) {
    const Eigen::VectorXd& qd = query_descriptors[q];
    for (std::size_t m = 0; m < nm; ++m) {
      const Eigen::VectorXd& md = *points[m]->descriptor;
      if (md.size() != qd.size())
        throw ValidationError("descriptor_matches: descriptor dimension mismatch");
      const double d = (qd - md).norm();
      if (d < best_d[q]) {
        second_d[q] = best_d[q];
        best_d[q] = d;
        best_model[q] = m;
      } else if (d < second_d[q]) {
        second_d[q] = d;
      }
      if (d < best_query_d[m]) {
        best_query_d[m] = d;
        best_query[m] = q;
      }
    }
  }

  for (std::size_t q = 0; q < nq; ++q) {
    const std::size_t m = best_model[q];
    if (m == kNone || best_query[m] != q) continue;  // not mutual
    // Lowe ratio test in multiplicative form; with a single candidate there
    // is no ambiguity and the match is accepted.
    if (std::isfinite(second_d[q]) && !(best_d[q] < ratio_threshold * second_d[q])) continue;
    out.correspondences.push_back(
        Correspondence{query_keypoints[q], point_ids[m], points[m]->position});
  }
  out.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

MatchSet OracleProvider::match(const SfmModel& model, const QueryView& query) const {
  NoiseConfig salted = noise_;
  salted.rng_seed = mix_seed(noise_.rng_seed, query.salt);
  return oracle_matches(model, query.pose_gt, query.camera, salted);
}

MatchSet DescriptorNnProvider::match(const SfmModel& model, const QueryView& query) const {
  MatchSet out = descriptor_matches(model, query.keypoints, query.descriptors, ratio_threshold_);
  std::mt19937_64 rng(mix_seed(noise_.rng_seed, query.salt));
  corrupt_matches(&out.correspondences, noise_, query.camera, rng);
  return out;
}

std::unique_ptr<CorrespondenceProvider> make_provider(const std::string& name,
                                                      const NoiseConfig& noise,
                                                      double ratio_threshold) {
  if (name == "oracle") return std::make_unique<OracleProvider>(noise);
  if (name == "descriptor-nn")
    return std::make_unique<DescriptorNnProvider>(ratio_threshold, noise);
  throw ValidationError("unknown provider '" + name + "' (expected oracle|descriptor-nn)");
}

}  // namespace domsfm
