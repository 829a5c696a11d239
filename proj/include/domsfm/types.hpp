#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace domsfm {

using ImageId = std::int64_t;
using PointId = std::int64_t;

// Error hierarchy. The CLI maps these onto exit codes:
// ValidationError -> 1, IoError/ParseError -> 2, anything else -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public IoError {
 public:
  ParseError(const std::string& file, int line, const std::string& what)
      : IoError(file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}

  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_ = 0;
};

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  void validate() const;

  // Inclusive image bounds, [0, width] x [0, height].
  bool contains(const Eigen::Vector2d& px) const {
    return px.x() >= 0.0 && px.x() <= static_cast<double>(width) &&
           px.y() >= 0.0 && px.y() <= static_cast<double>(height);
  }

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

// Rigid transform taking model-frame points into the camera frame:
// p_cam = R * p_model + t.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static constexpr double kRotationTolerance = 1e-9;

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }

  void validate() const;
};

struct Bbox3 {
  Eigen::Vector3d min_corner = Eigen::Vector3d::Zero();
  Eigen::Vector3d max_corner = Eigen::Vector3d::Ones();

  double diagonal() const { return (max_corner - min_corner).norm(); }
  std::array<Eigen::Vector3d, 8> corners() const;
  bool contains(const Eigen::Vector3d& p) const;
  void validate() const;
};

struct TrackEntry {
  ImageId image_id = 0;
  std::uint32_t keypoint_index = 0;

  friend bool operator==(const TrackEntry&, const TrackEntry&) = default;
};

struct Point3D {
  PointId id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::vector<TrackEntry> track;
  std::optional<Eigen::VectorXd> descriptor;
};

struct RefImage {
  ImageId id = 0;
  CameraIntrinsics camera;
  Pose pose;  // ground-truth model-to-camera transform from the reconstruction
  std::vector<Eigen::Vector2d> keypoints;
  std::vector<Eigen::VectorXd> descriptors;  // empty when absent, else parallel to keypoints

  bool has_descriptors() const { return !descriptors.empty(); }
};

// A view to localize: camera, held-out ground-truth pose, detected features.
// salt is mixed into provider RNG seeds so concurrent per-query noise draws
// stay reproducible regardless of scheduling.
struct QueryView {
  CameraIntrinsics camera;
  Pose pose_gt;
  std::vector<Eigen::Vector2d> keypoints;
  std::vector<Eigen::VectorXd> descriptors;
  std::uint64_t salt = 0;

  bool has_descriptors() const { return !descriptors.empty(); }
};

inline QueryView view_from_image(const RefImage& image, std::uint64_t salt = 0) {
  return QueryView{image.camera, image.pose, image.keypoints, image.descriptors, salt};
}

}  // namespace domsfm
