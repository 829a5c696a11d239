#include "domsfm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "domsfm/log.hpp"
#include "domsfm/model_io.hpp"

namespace domsfm {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ValidationError("camera: focal lengths must be positive");
  if (width <= 0 || height <= 0) throw ValidationError("camera: image size must be positive");
  if (!(cx >= 0.0 && cx <= width) || !(cy >= 0.0 && cy <= height))
    throw ValidationError("camera: principal point outside image bounds");
  if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) || !std::isfinite(cy))
    throw ValidationError("camera: non-finite intrinsics");
}

void Pose::validate() const {
  if (!rotation.allFinite() || !translation.allFinite())
    throw ValidationError("pose: non-finite entries");
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm();
  const double det = rotation.determinant();
  if (ortho > kRotationTolerance || std::abs(det - 1.0) > kRotationTolerance) {
    std::ostringstream msg;
    msg << "pose: rotation not orthonormal with det +1 (|R^T R - I| = " << ortho
        << ", det = " << det << ")";
    throw ValidationError(msg.str());
  }
}

std::array<Eigen::Vector3d, 8> Bbox3::corners() const {
  std::array<Eigen::Vector3d, 8> out;
  for (int b = 0; b < 8; ++b) {
    out[b] = Eigen::Vector3d((b & 1) ? max_corner.x() : min_corner.x(),
                             (b & 2) ? max_corner.y() : min_corner.y(),
                             (b & 4) ? max_corner.z() : min_corner.z());
  }
  return out;
}

bool Bbox3::contains(const Eigen::Vector3d& p) const {
  return (p.array() >= min_corner.array()).all() && (p.array() <= max_corner.array()).all();
}

void Bbox3::validate() const {
  if (!min_corner.allFinite() || !max_corner.allFinite())
    throw ValidationError("bbox: non-finite corners");
  if (!(min_corner.array() < max_corner.array()).all())
    throw ValidationError("bbox: min_corner must be componentwise below max_corner");
  if (!(diagonal() > 0.0)) throw ValidationError("bbox: diagonal must be positive");
}

const Point3D& SfmModel::point(PointId id) const {
  auto it = points.find(id);
  if (it == points.end())
    throw ValidationError("unknown point id " + std::to_string(id));
  return it->second;
}

const RefImage& SfmModel::image(ImageId id) const {
  auto it = images.find(id);
  if (it == images.end())
    throw ValidationError("unknown image id " + std::to_string(id));
  return it->second;
}

void SfmModel::validate() const {
  bbox.validate();
  for (const auto& [id, image] : images) {
    if (image.id != id) throw ValidationError("image key/id mismatch for id " + std::to_string(id));
    image.camera.validate();
    image.pose.validate();
    for (std::size_t k = 0; k < image.keypoints.size(); ++k) {
      const Eigen::Vector2d& px = image.keypoints[k];
      if (!px.allFinite() || !image.camera.contains(px)) {
        throw ValidationError("image " + std::to_string(id) + ": keypoint " + std::to_string(k) +
                              " outside image bounds");
      }
    }
    if (!image.descriptors.empty() && image.descriptors.size() != image.keypoints.size())
      throw ValidationError("image " + std::to_string(id) +
                            ": descriptor list not parallel to keypoints");
  }
  for (const auto& [id, point] : points) {
    if (point.id != id) throw ValidationError("point key/id mismatch for id " + std::to_string(id));
    if (!point.position.allFinite())
      throw ValidationError("point " + std::to_string(id) + ": non-finite position");
    if (point.track.empty())
      throw ValidationError("point " + std::to_string(id) + ": empty track");
    std::unordered_set<ImageId> seen;
    for (const TrackEntry& entry : point.track) {
      if (!seen.insert(entry.image_id).second)
        throw ValidationError("point " + std::to_string(id) + ": duplicate image " +
                              std::to_string(entry.image_id) + " in track");
      auto it = images.find(entry.image_id);
      if (it == images.end())
        throw ValidationError("point " + std::to_string(id) + ": track references missing image " +
                              std::to_string(entry.image_id));
      if (entry.keypoint_index >= it->second.keypoints.size())
        throw ValidationError("point " + std::to_string(id) + ": track keypoint index " +
                              std::to_string(entry.keypoint_index) + " out of range for image " +
                              std::to_string(entry.image_id));
    }
    if (!bbox.contains(point.position))
      throw ValidationError("point " + std::to_string(id) + ": position outside bbox");
    if (point.descriptor && !point.descriptor->allFinite())
      throw ValidationError("point " + std::to_string(id) + ": non-finite descriptor");
  }
}

std::set<ImageId> parents(const SfmModel& model, PointId point_id) {
  const Point3D& p = model.point(point_id);
  std::set<ImageId> out;
  for (const TrackEntry& entry : p.track) out.insert(entry.image_id);
  return out;
}

SfmModel restrict_to_image(const SfmModel& model, ImageId image_id) {
  const RefImage& image = model.image(image_id);
  SfmModel out;
  out.bbox = model.bbox;
  out.images.emplace(image_id, image);
  for (const auto& [id, point] : model.points) {
    std::vector<TrackEntry> kept;
    for (const TrackEntry& entry : point.track)
      if (entry.image_id == image_id) kept.push_back(entry);
    if (kept.empty()) continue;
    Point3D copy = point;
    copy.track = std::move(kept);
    out.points.emplace(id, std::move(copy));
  }
  if (out.points.empty())
    log_warn("restrict_to_image: image " + std::to_string(image_id) + " observes no points");
  return out;
}

SfmModel filter_by_dominating_set(const SfmModel& model, const std::set<ImageId>& dominating,
                                  bool recompute_bbox) {
  if (dominating.empty())
    throw ValidationError("filter_by_dominating_set: dominating set is empty");
  for (ImageId id : dominating) {
    if (!model.has_image(id))
      throw ValidationError("filter_by_dominating_set: unknown image id " + std::to_string(id));
  }
  SfmModel out;
  out.bbox = model.bbox;
  for (ImageId id : dominating) out.images.emplace(id, model.image(id));
  for (const auto& [id, point] : model.points) {
    std::vector<TrackEntry> kept;
    for (const TrackEntry& entry : point.track)
      if (dominating.count(entry.image_id)) kept.push_back(entry);
    if (kept.empty()) continue;  // no parent in the dominating set
    Point3D copy = point;
    copy.track = std::move(kept);
    out.points.emplace(id, std::move(copy));
  }
  if (recompute_bbox && !out.points.empty()) out.bbox = bbox_of_points(out.points);
  return out;
}

Bbox3 bbox_of_points(const std::map<PointId, Point3D>& points) {
  Bbox3 box;
  if (points.empty()) {
    box.min_corner = Eigen::Vector3d::Constant(-0.5);
    box.max_corner = Eigen::Vector3d::Constant(0.5);
    return box;
  }
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (const auto& [id, point] : points) {
    lo = lo.cwiseMin(point.position);
    hi = hi.cwiseMax(point.position);
  }
  // Pad flat dimensions so min < max holds even for planar or single-point
  // clouds.
  const double span = (hi - lo).maxCoeff();
  const double pad = 1e-6 * std::max(1.0, span);
  for (int d = 0; d < 3; ++d) {
    if (!(hi[d] - lo[d] > 0.0)) {
      lo[d] -= pad;
      hi[d] += pad;
    }
  }
  box.min_corner = lo;
  box.max_corner = hi;
  return box;
}

namespace {
std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}
}  // namespace

std::string model_digest(const SfmModel& model) {
  const std::string canonical = model_to_json(model).dump();
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical)));
  return std::string(buf);
}

}  // namespace domsfm
