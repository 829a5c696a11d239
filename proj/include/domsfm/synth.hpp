#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "domsfm/model.hpp"

namespace domsfm {

enum class PointDistribution { CubeSurface, SphereSurface, GaussianBlob };
enum class CameraLayout { Ring, SphereCap, Hemisphere };

std::string to_string(PointDistribution d);
std::string to_string(CameraLayout l);
PointDistribution point_distribution_from_string(const std::string& name);
CameraLayout camera_layout_from_string(const std::string& name);

struct SynthConfig {
  int num_points = 500;
  PointDistribution point_distribution = PointDistribution::CubeSurface;
  double object_extent = 1.0;
  int num_ref_cameras = 12;
  CameraLayout camera_layout = CameraLayout::Ring;
  double camera_radius = 4.0;
  int num_query_cameras = 0;
  int descriptor_dim = 32;
  double visibility_fraction = 1.0;
  std::uint64_t rng_seed = 0;
  CameraIntrinsics intrinsics{500.0, 500.0, 320.0, 240.0, 640, 480};

  void validate() const;
};

struct Scene {
  SfmModel model;
  std::vector<QueryView> query_views;  // held-out: ground truth lives here, not in the model
};

// World-to-camera pose of a camera at `eye` whose optical axis points at
// `target` (y down, right-handed).
Pose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target);

// Frustum-visible model points rendered into a view: exact projections as
// keypoints, point descriptors copied, per-point Bernoulli hiding when
// visibility_fraction < 1.
QueryView render_view(const SfmModel& model, const Pose& pose, const CameraIntrinsics& camera,
                      double visibility_fraction, std::mt19937_64& rng);

// Ground-truth scene generation: sampled point cloud with unit descriptors,
// cameras on the chosen layout looking at the centroid, exact-projection
// keypoints/tracks, query views on perturbed layout positions. Deterministic
// given config.rng_seed.
Scene generate_scene(const SynthConfig& config);

// Writes model.json (native format) plus queries.json into the directory.
void scene_to_native_files(const Scene& scene, const std::filesystem::path& directory);

void save_queries(const std::vector<QueryView>& queries, const std::filesystem::path& path);
std::vector<QueryView> load_queries(const std::filesystem::path& path);

}  // namespace domsfm
