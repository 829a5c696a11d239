#pragma once

#include <map>
#include <set>
#include <string>

#include "domsfm/types.hpp"

namespace domsfm {

// The reconstruction: a point cloud with observation tracks plus the posed
// reference images that produced it. Immutable after construction by
// convention; every operation below returns a new model.
struct SfmModel {
  std::map<PointId, Point3D> points;
  std::map<ImageId, RefImage> images;
  Bbox3 bbox;

  std::size_t num_points() const { return points.size(); }
  std::size_t num_images() const { return images.size(); }

  bool has_point(PointId id) const { return points.count(id) != 0; }
  bool has_image(ImageId id) const { return images.count(id) != 0; }

  const Point3D& point(PointId id) const;
  const RefImage& image(ImageId id) const;

  // Full structural check: camera/pose/bbox invariants, track cross-references
  // resolve both ways, keypoints inside image bounds, descriptors parallel,
  // all points inside the bbox. Throws ValidationError.
  void validate() const;
};

// Reference images observing the given point (the image ids of its track).
std::set<ImageId> parents(const SfmModel& model, PointId point_id);

// Sub-model containing exactly the points observed by image_id; the image
// collection is reduced to that one image, tracks are pruned accordingly and
// the bbox is preserved.
SfmModel restrict_to_image(const SfmModel& model, ImageId image_id);

// Keeps the images in `dominating` and the points observed by at least one of
// them; surviving tracks are pruned to members. The bbox is kept from the
// input model by default so diagonal-relative error thresholds stay
// comparable across variants.
SfmModel filter_by_dominating_set(const SfmModel& model, const std::set<ImageId>& dominating,
                                  bool recompute_bbox = false);

// Stable content digest (hex) used to key cached graph/domset artifacts.
std::string model_digest(const SfmModel& model);

// Axis-aligned enclosure of a point collection; degenerate spans are padded
// so the box invariant (min < max) always holds.
Bbox3 bbox_of_points(const std::map<PointId, Point3D>& points);

}  // namespace domsfm
