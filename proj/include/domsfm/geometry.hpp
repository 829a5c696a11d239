#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "domsfm/types.hpp"

namespace domsfm {

// One 2D-3D match between a query pixel and a model point.
struct Correspondence {
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  PointId point_id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

struct EstimatorConfig {
  int ransac_max_iterations = 1000;
  double ransac_inlier_threshold_px = 3.0;
  double ransac_confidence = 0.999;
  int min_correspondences = 6;
  int refine_max_iterations = 50;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct PoseEstimate {
  Pose pose;
  std::set<PointId> inlier_ids;
  int num_iterations_used = 0;
  bool converged = false;
};

// Points at or behind the camera plane (z <= this) get the behind-camera
// marker and never count as inliers.
inline constexpr double kChiralityEpsilon = 1e-9;

// Pinhole projection; nullopt is the behind-camera marker.
std::optional<Eigen::Vector2d> project(const CameraIntrinsics& camera, const Pose& pose,
                                       const Eigen::Vector3d& point);

// Direct linear transform over >= 6 correspondences, with 3D normalization,
// cheirality-resolved sign, nearest-rotation projection and a conditioning
// check that rejects collinear/coplanar configurations.
Pose solve_pnp_linear(std::span<const Correspondence> correspondences,
                      const CameraIntrinsics& camera);

// Hypothesize-and-verify over minimal samples, best hypothesis by inlier
// count (ties by lower mean inlier reprojection error), adaptive early exit,
// final refinement on the inlier set. Deterministic given config.rng_seed.
PoseEstimate ransac_pnp(const std::vector<Correspondence>& correspondences,
                        const CameraIntrinsics& camera, const EstimatorConfig& config);

// Damped least-squares (Levenberg-Marquardt) minimization of total squared
// reprojection error over a 6-parameter local pose update. Never returns a
// pose with higher error than the initial one.
Pose refine_pose(const Pose& initial, std::span<const Correspondence> inliers,
                 const CameraIntrinsics& camera, int max_iterations);

// Residual and 2x6 Jacobian of the reprojection error at the current pose,
// under the local update (w, t): R' = exp([w]x) R, t' = exp([w]x) t + t.
// Returns false when the point is behind the camera.
bool reprojection_residual(const CameraIntrinsics& camera, const Pose& pose,
                           const Correspondence& corr, Eigen::Vector2d* residual,
                           Eigen::Matrix<double, 2, 6>* jacobian);

// Total squared reprojection error; +inf when any point falls behind the
// camera.
double total_squared_reprojection_error(const CameraIntrinsics& camera, const Pose& pose,
                                        std::span<const Correspondence> correspondences);

Eigen::Matrix3d skew(const Eigen::Vector3d& w);
Eigen::Matrix3d so3_exp(const Eigen::Vector3d& w);

// ---- Pose error metrics ----

// Euclidean distance between ground-truth and estimated locations.
double loc_error(const Eigen::Vector3d& t_gt, const Eigen::Vector3d& t_hat);

// Angle of the relative orientation R_gt^T * R_hat, clamped into [0, pi].
double geodesic_error(const Eigen::Matrix3d& r_gt, const Eigen::Matrix3d& r_hat);

// Mean displacement of the 8 bbox corners under the two poses, divided by the
// box's longest diagonal.
double bbox_add_error(const Pose& pose_gt, const Pose& pose_hat, const Bbox3& bbox);

}  // namespace domsfm
