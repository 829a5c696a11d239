#include "domsfm/geometry.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "domsfm/random_util.hpp"

namespace domsfm {

namespace {
constexpr double kDegenerateSingularValueRatio = 1e-10;
constexpr double kRefineStepNormExit = 1e-10;
}  // namespace

void EstimatorConfig::validate() const {
  if (ransac_max_iterations < 1)
    throw ValidationError("estimator: ransac_max_iterations must be >= 1");
  if (!(ransac_inlier_threshold_px > 0.0))
    throw ValidationError("estimator: ransac_inlier_threshold_px must be positive");
  if (!(ransac_confidence > 0.0 && ransac_confidence < 1.0))
    throw ValidationError("estimator: ransac_confidence must lie in (0, 1)");
  if (min_correspondences < 4)
    throw ValidationError("estimator: min_correspondences must be >= 4");
  if (refine_max_iterations < 0)
    throw ValidationError("estimator: refine_max_iterations must be >= 0");
}

std::optional<Eigen::Vector2d> project(const CameraIntrinsics& camera, const Pose& pose,
                                       const Eigen::Vector3d& point) {
  const Eigen::Vector3d p = pose.apply(point);
  if (p.z() <= kChiralityEpsilon) return std::nullopt;
  return Eigen::Vector2d(camera.fx * p.x() / p.z() + camera.cx,
                         camera.fy * p.y() / p.z() + camera.cy);
}

Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
  Eigen::Matrix3d m;
  m << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return m;
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& w) {
  const double theta = w.norm();
  const Eigen::Matrix3d wx = skew(w);
  if (theta < 1e-12) return Eigen::Matrix3d::Identity() + wx + 0.5 * wx * wx;
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Eigen::Matrix3d::Identity() + a * wx + b * wx * wx;
}

Pose solve_pnp_linear(std::span<const Correspondence> correspondences,
                      const CameraIntrinsics& camera) {
  const std::size_t n = correspondences.size();
  if (n < 6)
    throw ValidationError("solve_pnp_linear: need at least 6 correspondences, got " +
                          std::to_string(n));

  // Normalize the 3D points (centroid to origin, RMS distance sqrt(3)).
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& c : correspondences) centroid += c.position;
  centroid /= static_cast<double>(n);
  double mean_dist = 0.0;
  for (const auto& c : correspondences) mean_dist += (c.position - centroid).norm();
  mean_dist /= static_cast<double>(n);
  if (!(mean_dist > 1e-15))
    throw ValidationError("solve_pnp_linear: degenerate configuration (coincident points)");
  const double scale = std::sqrt(3.0) / mean_dist;

  Eigen::MatrixXd a(2 * n, 12);
  for (std::size_t i = 0; i < n; ++i) {
    const Correspondence& c = correspondences[i];
    const Eigen::Vector3d xn = scale * (c.position - centroid);
    const double mx = (c.pixel.x() - camera.cx) / camera.fx;
    const double my = (c.pixel.y() - camera.cy) / camera.fy;
    Eigen::RowVector4d xh(xn.x(), xn.y(), xn.z(), 1.0);
    a.row(2 * i) << xh, Eigen::RowVector4d::Zero(), -mx * xh;
    a.row(2 * i + 1) << Eigen::RowVector4d::Zero(), xh, -my * xh;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv(10) <= kDegenerateSingularValueRatio * sv(0))
    throw ValidationError("solve_pnp_linear: degenerate configuration (conditioning check failed)");

  const Eigen::VectorXd p = svd.matrixV().col(11);
  Eigen::Matrix<double, 3, 4> proj_norm;
  proj_norm << p(0), p(1), p(2), p(3), p(4), p(5), p(6), p(7), p(8), p(9), p(10), p(11);

  // Undo the 3D normalization: X_norm = scale * (X - centroid).
  Eigen::Matrix4d t_norm = Eigen::Matrix4d::Identity();
  t_norm.topLeftCorner<3, 3>() *= scale;
  t_norm.topRightCorner<3, 1>() = -scale * centroid;
  Eigen::Matrix<double, 3, 4> proj = proj_norm * t_norm;

  // Resolve the null-vector sign by cheirality (majority of points in front).
  int in_front = 0;
  for (const auto& c : correspondences) {
    const double depth = proj.row(2).head<3>().dot(c.position) + proj(2, 3);
    if (depth > 0.0) ++in_front;
  }
  if (2 * in_front < static_cast<int>(n)) proj = -proj;

  Eigen::Matrix3d m = proj.topLeftCorner<3, 3>();
  Eigen::Vector3d t = proj.col(3);
  const double det = m.determinant();
  if (!(det > 0.0) || !std::isfinite(det))
    throw ValidationError("solve_pnp_linear: degenerate configuration (non-positive determinant)");
  const double s = std::cbrt(det);
  m /= s;
  t /= s;

  // Nearest orthogonal matrix with det +1.
  Eigen::JacobiSVD<Eigen::Matrix3d> rsvd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = rsvd.matrixU() * rsvd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    flip(2, 2) = -1.0;
    r = rsvd.matrixU() * flip * rsvd.matrixV().transpose();
  }
  return Pose{r, t};
}

bool reprojection_residual(const CameraIntrinsics& camera, const Pose& pose,
                           const Correspondence& corr, Eigen::Vector2d* residual,
                           Eigen::Matrix<double, 2, 6>* jacobian) {
  const Eigen::Vector3d p = pose.apply(corr.position);
  if (p.z() <= kChiralityEpsilon) return false;
  const double inv_z = 1.0 / p.z();
  if (residual) {
    (*residual) << camera.fx * p.x() * inv_z + camera.cx - corr.pixel.x(),
        camera.fy * p.y() * inv_z + camera.cy - corr.pixel.y();
  }
  if (jacobian) {
    Eigen::Matrix<double, 2, 3> d_pixel;
    d_pixel << camera.fx * inv_z, 0.0, -camera.fx * p.x() * inv_z * inv_z, 0.0, camera.fy * inv_z,
        -camera.fy * p.y() * inv_z * inv_z;
    Eigen::Matrix<double, 3, 6> d_point;
    d_point.leftCols<3>() = -skew(p);
    d_point.rightCols<3>() = Eigen::Matrix3d::Identity();
    *jacobian = d_pixel * d_point;
  }
  return true;
}

double total_squared_reprojection_error(const CameraIntrinsics& camera, const Pose& pose,
                                        std::span<const Correspondence> correspondences) {
  double cost = 0.0;
  Eigen::Vector2d r;
  for (const auto& c : correspondences) {
    if (!reprojection_residual(camera, pose, c, &r, nullptr))
      return std::numeric_limits<double>::infinity();
    cost += r.squaredNorm();
  }
  return cost;
}

Pose refine_pose(const Pose& initial, std::span<const Correspondence> inliers,
                 const CameraIntrinsics& camera, int max_iterations) {
  if (inliers.size() < 4)
    throw ValidationError("refine_pose: need at least 4 inliers, got " +
                          std::to_string(inliers.size()));
  Pose pose = initial;
  double cost = total_squared_reprojection_error(camera, pose, inliers);
  if (!std::isfinite(cost)) return initial;

  double lambda = 1e-3;
  for (int iter = 0; iter < max_iterations; ++iter) {
    Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
    Eigen::Vector2d r;
    Eigen::Matrix<double, 2, 6> j;
    for (const auto& c : inliers) {
      if (!reprojection_residual(camera, pose, c, &r, &j)) continue;
      h += j.transpose() * j;
      g += j.transpose() * r;
    }

    bool stepped = false;
    double step_norm = 0.0;
    for (int attempt = 0; attempt < 12 && !stepped; ++attempt) {
      Eigen::Matrix<double, 6, 6> damped = h;
      for (int d = 0; d < 6; ++d) damped(d, d) += lambda * std::max(h(d, d), 1e-12);
      const Eigen::Matrix<double, 6, 1> delta = damped.ldlt().solve(-g);
      if (!delta.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::Matrix3d dr = so3_exp(delta.head<3>());
      Pose candidate{dr * pose.rotation, dr * pose.translation + delta.tail<3>()};
      const double candidate_cost = total_squared_reprojection_error(camera, candidate, inliers);
      if (candidate_cost < cost) {
        pose = candidate;
        cost = candidate_cost;
        lambda = std::max(lambda / 3.0, 1e-12);
        step_norm = delta.norm();
        stepped = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!stepped) break;  // no improving step found
    if (step_norm < kRefineStepNormExit) break;
  }
  return pose;
}

namespace {

struct Classification {
  std::vector<std::size_t> inliers;
  double mean_error = std::numeric_limits<double>::infinity();
};

Classification classify_inliers(const std::vector<Correspondence>& correspondences,
                                const CameraIntrinsics& camera, const Pose& pose,
                                double threshold_px) {
  Classification out;
  double total = 0.0;
  for (std::size_t i = 0; i < correspondences.size(); ++i) {
    const auto px = project(camera, pose, correspondences[i].position);
    if (!px) continue;  // behind-camera points are never inliers
    const double err = (*px - correspondences[i].pixel).norm();
    if (err < threshold_px) {
      out.inliers.push_back(i);
      total += err;
    }
  }
  if (!out.inliers.empty()) out.mean_error = total / static_cast<double>(out.inliers.size());
  return out;
}

int ransac_iterations_needed(double inlier_ratio, int sample_size, double confidence,
                             int max_iterations) {
  if (!(inlier_ratio > 0.0)) return max_iterations;
  const double p_good = std::pow(std::min(inlier_ratio, 1.0), sample_size);
  if (p_good >= 1.0 - 1e-15) return 1;
  const double denom = std::log1p(-p_good);
  if (!(denom < 0.0)) return max_iterations;
  const double needed = std::log1p(-confidence) / denom;
  if (!(needed > 0.0)) return 1;
  if (needed >= static_cast<double>(max_iterations)) return max_iterations;
  return static_cast<int>(std::ceil(needed));
}

}  // namespace

PoseEstimate ransac_pnp(const std::vector<Correspondence>& correspondences,
                        const CameraIntrinsics& camera, const EstimatorConfig& config) {
  config.validate();
  const std::size_t n = correspondences.size();
  if (n < static_cast<std::size_t>(config.min_correspondences))
    throw ValidationError("ransac_pnp: need at least " +
                          std::to_string(config.min_correspondences) + " correspondences, got " +
                          std::to_string(n));

  // The linear solver needs 6 points; min_correspondences stays the inlier
  // acceptance threshold.
  const std::size_t sample_size =
      std::max<std::size_t>(6, static_cast<std::size_t>(config.min_correspondences));
  if (n < sample_size)
    throw ValidationError("ransac_pnp: need at least " + std::to_string(sample_size) +
                          " correspondences for the linear solver, got " + std::to_string(n));

  std::mt19937_64 rng(config.rng_seed);
  Pose best_pose;
  Classification best;
  bool have_best = false;

  int needed = config.ransac_max_iterations;
  int it = 0;
  std::vector<Correspondence> sample(sample_size);
  for (; it < config.ransac_max_iterations && it < needed; ++it) {
    const auto indices = sample_without_replacement(n, sample_size, rng);
    for (std::size_t k = 0; k < sample_size; ++k) sample[k] = correspondences[indices[k]];
    Pose hypothesis;
    try {
      hypothesis = solve_pnp_linear(sample, camera);
    } catch (const Error&) {
      continue;  // degenerate sample
    }
    Classification cls =
        classify_inliers(correspondences, camera, hypothesis, config.ransac_inlier_threshold_px);
    const bool better = !have_best || cls.inliers.size() > best.inliers.size() ||
                        (cls.inliers.size() == best.inliers.size() &&
                         cls.mean_error < best.mean_error);
    if (better && !cls.inliers.empty()) {
      best = std::move(cls);
      best_pose = hypothesis;
      have_best = true;
      const double w = static_cast<double>(best.inliers.size()) / static_cast<double>(n);
      needed = ransac_iterations_needed(w, static_cast<int>(sample_size), config.ransac_confidence,
                                        config.ransac_max_iterations);
    }
  }

  PoseEstimate estimate;
  estimate.num_iterations_used = it;
  if (!have_best || best.inliers.size() < static_cast<std::size_t>(config.min_correspondences)) {
    estimate.converged = false;
    if (have_best) estimate.pose = best_pose;
    return estimate;
  }

  // Refine on the inlier set, reclassify against the refined pose, and
  // repeat until the set stabilizes: a minimal-sample hypothesis under pixel
  // noise misses borderline inliers that only the refined fit admits.
  Pose refined = best_pose;
  std::vector<std::size_t> inlier_set = best.inliers;
  for (int round = 0; round < 5; ++round) {
    if (inlier_set.size() < 4) break;
    std::vector<Correspondence> inlier_corrs;
    inlier_corrs.reserve(inlier_set.size());
    for (std::size_t idx : inlier_set) inlier_corrs.push_back(correspondences[idx]);
    refined = refine_pose(refined, inlier_corrs, camera, config.refine_max_iterations);
    Classification cls =
        classify_inliers(correspondences, camera, refined, config.ransac_inlier_threshold_px);
    const bool stable = cls.inliers == inlier_set;
    inlier_set = std::move(cls.inliers);
    if (stable) break;
  }

  estimate.pose = refined;
  for (std::size_t idx : inlier_set) estimate.inlier_ids.insert(correspondences[idx].point_id);
  estimate.converged =
      inlier_set.size() >= static_cast<std::size_t>(config.min_correspondences);
  return estimate;
}

double loc_error(const Eigen::Vector3d& t_gt, const Eigen::Vector3d& t_hat) {
  return (t_gt - t_hat).norm();
}

double geodesic_error(const Eigen::Matrix3d& r_gt, const Eigen::Matrix3d& r_hat) {
  const Eigen::Matrix3d delta = r_gt.transpose() * r_hat;
  const double c = std::clamp((delta.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

double bbox_add_error(const Pose& pose_gt, const Pose& pose_hat, const Bbox3& bbox) {
  double total = 0.0;
  for (const Eigen::Vector3d& corner : bbox.corners())
    total += (pose_gt.apply(corner) - pose_hat.apply(corner)).norm();
  return total / (8.0 * bbox.diagonal());
}

}  // namespace domsfm
