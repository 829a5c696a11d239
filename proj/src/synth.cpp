#include "domsfm/synth.hpp"

#include <cmath>
#include <numbers>

#include "domsfm/geometry.hpp"
#include "domsfm/model_io.hpp"

namespace domsfm {

namespace {
constexpr double kTau = 2.0 * std::numbers::pi;
// Golden-angle increment for the spiral cap layouts.
constexpr double kGoldenAngle = kTau * 0.3819660112501051;
}  // namespace

std::string to_string(PointDistribution d) {
  switch (d) {
    case PointDistribution::CubeSurface: return "cube_surface";
    case PointDistribution::SphereSurface: return "sphere_surface";
    case PointDistribution::GaussianBlob: return "gaussian_blob";
  }
  return "?";
}

std::string to_string(CameraLayout l) {
  switch (l) {
    case CameraLayout::Ring: return "ring";
    case CameraLayout::SphereCap: return "sphere_cap";
    case CameraLayout::Hemisphere: return "hemisphere";
  }
  return "?";
}

PointDistribution point_distribution_from_string(const std::string& name) {
  if (name == "cube_surface") return PointDistribution::CubeSurface;
  if (name == "sphere_surface") return PointDistribution::SphereSurface;
  if (name == "gaussian_blob") return PointDistribution::GaussianBlob;
  throw ValidationError("unknown point distribution '" + name +
                        "' (expected cube_surface|sphere_surface|gaussian_blob)");
}

CameraLayout camera_layout_from_string(const std::string& name) {
  if (name == "ring") return CameraLayout::Ring;
  if (name == "sphere_cap") return CameraLayout::SphereCap;
  if (name == "hemisphere") return CameraLayout::Hemisphere;
  throw ValidationError("unknown camera layout '" + name +
                        "' (expected ring|sphere_cap|hemisphere)");
}

void SynthConfig::validate() const {
  if (num_points < 8) throw ValidationError("synth: num_points must be >= 8");
  if (!(object_extent > 0.0)) throw ValidationError("synth: object_extent must be positive");
  if (num_ref_cameras < 2) throw ValidationError("synth: num_ref_cameras must be >= 2");
  if (!(camera_radius > object_extent))
    throw ValidationError("synth: camera_radius must exceed object_extent");
  if (num_query_cameras < 0) throw ValidationError("synth: num_query_cameras must be >= 0");
  if (descriptor_dim < 1) throw ValidationError("synth: descriptor_dim must be >= 1");
  if (!(visibility_fraction > 0.0 && visibility_fraction <= 1.0))
    throw ValidationError("synth: visibility_fraction must lie in (0, 1]");
  intrinsics.validate();
}

Pose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target) {
  const Eigen::Vector3d forward = (target - eye).normalized();
  Eigen::Vector3d up(0.0, 0.0, 1.0);
  if (std::abs(forward.dot(up)) > 0.999) up = Eigen::Vector3d(1.0, 0.0, 0.0);
  const Eigen::Vector3d right = up.cross(forward).normalized();
  const Eigen::Vector3d down = forward.cross(right);
  Pose pose;
  pose.rotation.row(0) = right;
  pose.rotation.row(1) = down;
  pose.rotation.row(2) = forward;
  pose.translation = -pose.rotation * eye;
  return pose;
}

namespace {

Eigen::Vector3d sample_point(PointDistribution dist, double extent, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(-0.5, 0.5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  switch (dist) {
    case PointDistribution::CubeSurface: {
      // Pick a face, then a uniform position on it; cube side = extent.
      std::uniform_int_distribution<int> face_dist(0, 5);
      const int face = face_dist(rng);
      const double u = uniform(rng) * extent;
      const double v = uniform(rng) * extent;
      const double w = (face % 2 == 0 ? -0.5 : 0.5) * extent;
      switch (face / 2) {
        case 0: return {w, u, v};
        case 1: return {u, w, v};
        default: return {u, v, w};
      }
    }
    case PointDistribution::SphereSurface: {
      Eigen::Vector3d dir(gauss(rng), gauss(rng), gauss(rng));
      while (dir.norm() < 1e-9) dir = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
      return dir.normalized() * (0.5 * extent);
    }
    case PointDistribution::GaussianBlob: {
      const double sigma = extent / 4.0;
      return {sigma * gauss(rng), sigma * gauss(rng), sigma * gauss(rng)};
    }
  }
  return Eigen::Vector3d::Zero();
}

double cap_polar_limit(CameraLayout layout) {
  return layout == CameraLayout::Hemisphere ? 0.5 * std::numbers::pi : 0.25 * std::numbers::pi;
}

Eigen::Vector3d layout_position(CameraLayout layout, std::size_t index, std::size_t count,
                                double radius) {
  switch (layout) {
    case CameraLayout::Ring: {
      const double theta = kTau * static_cast<double>(index) / static_cast<double>(count);
      return {radius * std::cos(theta), radius * std::sin(theta), 0.0};
    }
    case CameraLayout::SphereCap:
    case CameraLayout::Hemisphere: {
      // Even spiral over the cap: cos(polar) uniform in [cos(limit), 1].
      const double cos_limit = std::cos(cap_polar_limit(layout));
      const double u = (static_cast<double>(index) + 0.5) / static_cast<double>(count);
      const double cos_polar = 1.0 - u * (1.0 - cos_limit);
      const double sin_polar = std::sqrt(std::max(0.0, 1.0 - cos_polar * cos_polar));
      const double azimuth = kGoldenAngle * static_cast<double>(index);
      return {radius * sin_polar * std::cos(azimuth), radius * sin_polar * std::sin(azimuth),
              radius * cos_polar};
    }
  }
  return Eigen::Vector3d::Zero();
}

Eigen::Vector3d sample_query_position(CameraLayout layout, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double r = radius * (1.0 + 0.03 * gauss(rng));
  switch (layout) {
    case CameraLayout::Ring: {
      const double theta = kTau * unit(rng);
      const double z = 0.05 * radius * gauss(rng);
      return {r * std::cos(theta), r * std::sin(theta), z};
    }
    case CameraLayout::SphereCap:
    case CameraLayout::Hemisphere: {
      const double cos_limit = std::cos(cap_polar_limit(layout));
      const double cos_polar = cos_limit + (1.0 - cos_limit) * unit(rng);
      const double sin_polar = std::sqrt(std::max(0.0, 1.0 - cos_polar * cos_polar));
      const double azimuth = kTau * unit(rng);
      return {r * sin_polar * std::cos(azimuth), r * sin_polar * std::sin(azimuth), r * cos_polar};
    }
  }
  return Eigen::Vector3d::Zero();
}

}  // namespace

QueryView render_view(const SfmModel& model, const Pose& pose, const CameraIntrinsics& camera,
                      double visibility_fraction, std::mt19937_64& rng) {
  QueryView view;
  view.camera = camera;
  view.pose_gt = pose;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& [id, point] : model.points) {
    const auto px = project(camera, pose, point.position);
    if (!px || !camera.contains(*px)) continue;
    if (visibility_fraction < 1.0 && unit(rng) >= visibility_fraction) continue;
    view.keypoints.push_back(*px);
    if (point.descriptor) view.descriptors.push_back(*point.descriptor);
  }
  return view;
}

Scene generate_scene(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Points with unit-vector descriptors.
  std::map<PointId, Point3D> points;
  for (int i = 0; i < config.num_points; ++i) {
    Point3D point;
    point.id = i + 1;
    point.position = sample_point(config.point_distribution, config.object_extent, rng);
    Eigen::VectorXd desc(config.descriptor_dim);
    do {
      for (int d = 0; d < config.descriptor_dim; ++d) desc[d] = gauss(rng);
    } while (desc.norm() < 1e-9);
    point.descriptor = desc.normalized();
    points.emplace(point.id, std::move(point));
  }

  // Reference cameras on the layout, all looking at the centroid.
  SfmModel model;
  for (int c = 0; c < config.num_ref_cameras; ++c) {
    RefImage image;
    image.id = c + 1;
    image.camera = config.intrinsics;
    image.pose = look_at(layout_position(config.camera_layout, static_cast<std::size_t>(c),
                                         static_cast<std::size_t>(config.num_ref_cameras),
                                         config.camera_radius),
                         Eigen::Vector3d::Zero());
    model.images.emplace(image.id, std::move(image));
  }

  // Observations: frustum visibility plus Bernoulli hiding. Keypoints are
  // exact projections; descriptors are copies of the point descriptor.
  for (auto& [image_id, image] : model.images) {
    std::size_t seen = 0;
    for (auto& [point_id, point] : points) {
      const auto px = project(image.camera, image.pose, point.position);
      if (!px || !image.camera.contains(*px)) continue;
      if (config.visibility_fraction < 1.0 && unit(rng) >= config.visibility_fraction) continue;
      const auto kp_index = static_cast<std::uint32_t>(image.keypoints.size());
      image.keypoints.push_back(*px);
      image.descriptors.push_back(*point.descriptor);
      point.track.push_back(TrackEntry{image_id, kp_index});
      ++seen;
    }
    if (seen < 6)
      throw ValidationError("synth: camera " + std::to_string(image_id) + " sees only " +
                            std::to_string(seen) + " points (< 6); widen the layout or raise "
                            "visibility_fraction");
  }

  // Points never observed cannot carry a track; they are not part of the
  // reconstruction.
  for (auto& [point_id, point] : points)
    if (!point.track.empty()) model.points.emplace(point_id, std::move(point));

  model.bbox = bbox_of_points(model.points);
  model.validate();

  Scene scene;
  scene.model = std::move(model);

  // Query views on perturbed layout positions, looking at the centroid.
  for (int q = 0; q < config.num_query_cameras; ++q) {
    const Eigen::Vector3d eye = sample_query_position(config.camera_layout, config.camera_radius, rng);
    const Pose pose = look_at(eye, Eigen::Vector3d::Zero());
    scene.query_views.push_back(
        render_view(scene.model, pose, config.intrinsics, config.visibility_fraction, rng));
  }
  return scene;
}

namespace {

nlohmann::json camera_to_json(const CameraIntrinsics& c) {
  return {{"fx", c.fx},    {"fy", c.fy},       {"cx", c.cx},
          {"cy", c.cy},    {"width", c.width}, {"height", c.height}};
}

CameraIntrinsics camera_from_json(const nlohmann::json& j) {
  CameraIntrinsics c;
  c.fx = j.at("fx").get<double>();
  c.fy = j.at("fy").get<double>();
  c.cx = j.at("cx").get<double>();
  c.cy = j.at("cy").get<double>();
  c.width = j.at("width").get<int>();
  c.height = j.at("height").get<int>();
  return c;
}

}  // namespace

void save_queries(const std::vector<QueryView>& queries, const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const QueryView& view : queries) {
    nlohmann::json jv;
    jv["camera"] = camera_to_json(view.camera);
    nlohmann::json kps = nlohmann::json::array();
    for (const auto& kp : view.keypoints) kps.push_back({kp.x(), kp.y()});
    jv["keypoints"] = std::move(kps);
    if (!view.descriptors.empty()) {
      nlohmann::json descs = nlohmann::json::array();
      for (const auto& d : view.descriptors) {
        nlohmann::json a = nlohmann::json::array();
        for (Eigen::Index i = 0; i < d.size(); ++i) a.push_back(d[i]);
        descs.push_back(std::move(a));
      }
      jv["descriptors"] = std::move(descs);
    }
    Eigen::Quaterniond q(view.pose_gt.rotation);
    q.normalize();
    if (q.w() < 0.0) q.coeffs() *= -1.0;  // canonical sign for reproducible files
    nlohmann::json jq;
    jq["quaternion"] = {q.w(), q.x(), q.y(), q.z()};
    jq["translation"] = {view.pose_gt.translation.x(), view.pose_gt.translation.y(),
                         view.pose_gt.translation.z()};
    j.push_back({{"view", std::move(jv)}, {"pose_gt", std::move(jq)}});
  }
  write_json_file(j, path);
}

std::vector<QueryView> load_queries(const std::filesystem::path& path) {
  const nlohmann::json j = read_json_file(path);
  if (!j.is_array()) throw ValidationError("queries file " + path.string() + ": expected an array");
  std::vector<QueryView> out;
  out.reserve(j.size());
  for (const auto& jq : j) {
    QueryView view;
    const auto& jv = jq.at("view");
    view.camera = camera_from_json(jv.at("camera"));
    for (const auto& jk : jv.at("keypoints"))
      view.keypoints.emplace_back(jk[0].get<double>(), jk[1].get<double>());
    if (jv.contains("descriptors")) {
      for (const auto& jd : jv.at("descriptors")) {
        Eigen::VectorXd d(static_cast<Eigen::Index>(jd.size()));
        for (std::size_t i = 0; i < jd.size(); ++i) d[static_cast<Eigen::Index>(i)] = jd[i].get<double>();
        view.descriptors.push_back(std::move(d));
      }
      if (view.descriptors.size() != view.keypoints.size())
        throw ValidationError("queries file " + path.string() +
                              ": descriptors not parallel to keypoints");
    }
    const auto& jp = jq.at("pose_gt");
    const auto& quat = jp.at("quaternion");
    Eigen::Quaterniond q(quat[0].get<double>(), quat[1].get<double>(), quat[2].get<double>(),
                         quat[3].get<double>());
    if (!(q.norm() > 0.0)) throw ValidationError("queries file: zero quaternion");
    q.normalize();
    view.pose_gt.rotation = q.toRotationMatrix();
    const auto& t = jp.at("translation");
    view.pose_gt.translation =
        Eigen::Vector3d(t[0].get<double>(), t[1].get<double>(), t[2].get<double>());
    view.pose_gt.validate();
    out.push_back(std::move(view));
  }
  return out;
}

void scene_to_native_files(const Scene& scene, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec || !std::filesystem::is_directory(directory))
    throw IoError("cannot create output directory " + directory.string());
  save_native(scene.model, directory / "model.json");
  save_queries(scene.query_views, directory / "queries.json");
}

}  // namespace domsfm
