#include "domsfm/model_io.hpp"

#include <fstream>
#include <sstream>

#include "domsfm/log.hpp"

namespace domsfm {

namespace {

constexpr int kNativeVersion = 1;

std::string trimmed(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

struct LineReader {
  std::ifstream stream;
  std::string path;
  int line_number = 0;

  explicit LineReader(const std::filesystem::path& p) : stream(p), path(p.string()) {
    if (!stream.is_open()) throw IoError("missing file: " + path);
  }

  // Next non-empty, non-comment line (nullopt at EOF). keep_empty keeps blank
  // data lines, which are meaningful in images.txt.
  std::optional<std::string> next(bool keep_empty = false) {
    std::string line;
    while (std::getline(stream, line)) {
      ++line_number;
      std::string t = trimmed(line);
      if (!t.empty() && t[0] == '#') continue;
      if (t.empty() && !keep_empty) continue;
      return t;
    }
    return std::nullopt;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(path, line_number, what); }
};

double parse_double(LineReader& reader, std::istringstream& in, const char* what) {
  double v;
  if (!(in >> v)) reader.fail(std::string("expected ") + what);
  return v;
}

std::int64_t parse_int(LineReader& reader, std::istringstream& in, const char* what) {
  std::int64_t v;
  if (!(in >> v)) reader.fail(std::string("expected ") + what);
  return v;
}

std::map<std::int64_t, CameraIntrinsics> read_cameras_text(const std::filesystem::path& path) {
  LineReader reader(path);
  std::map<std::int64_t, CameraIntrinsics> cameras;
  while (auto line = reader.next()) {
    std::istringstream in(*line);
    const std::int64_t camera_id = parse_int(reader, in, "camera id");
    std::string model;
    if (!(in >> model)) reader.fail("expected camera model");
    CameraIntrinsics cam;
    cam.width = static_cast<int>(parse_int(reader, in, "width"));
    cam.height = static_cast<int>(parse_int(reader, in, "height"));
    if (model == "PINHOLE") {
      cam.fx = parse_double(reader, in, "fx");
      cam.fy = parse_double(reader, in, "fy");
      cam.cx = parse_double(reader, in, "cx");
      cam.cy = parse_double(reader, in, "cy");
    } else if (model == "SIMPLE_PINHOLE") {
      cam.fx = parse_double(reader, in, "f");
      cam.fy = cam.fx;
      cam.cx = parse_double(reader, in, "cx");
      cam.cy = parse_double(reader, in, "cy");
    } else {
      reader.fail("unsupported camera model '" + model + "' (supported: PINHOLE, SIMPLE_PINHOLE)");
    }
    cameras[camera_id] = cam;
  }
  return cameras;
}

void read_images_text(const std::filesystem::path& path,
                      const std::map<std::int64_t, CameraIntrinsics>& cameras, SfmModel* model) {
  LineReader reader(path);
  while (auto line = reader.next()) {
    std::istringstream in(*line);
    RefImage image;
    image.id = parse_int(reader, in, "image id");
    double q[4];
    for (int i = 0; i < 4; ++i) q[i] = parse_double(reader, in, "quaternion component");
    Eigen::Vector3d t;
    for (int i = 0; i < 3; ++i) t[i] = parse_double(reader, in, "translation component");
    const std::int64_t camera_id = parse_int(reader, in, "camera id");
    std::string name;
    in >> name;  // image name, unused

    auto cam_it = cameras.find(camera_id);
    if (cam_it == cameras.end())
      reader.fail("image references missing camera " + std::to_string(camera_id));
    image.camera = cam_it->second;

    Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
    if (!(quat.norm() > 0)) reader.fail("zero quaternion");
    quat.normalize();
    image.pose.rotation = quat.toRotationMatrix();
    image.pose.translation = t;

    // Second line: flat list of X Y POINT3D_ID triples; may be empty.
    auto points_line = reader.next(/*keep_empty=*/true);
    if (!points_line) reader.fail("missing keypoint line for image " + std::to_string(image.id));
    std::istringstream pin(*points_line);
    double x, y;
    while (pin >> x) {
      if (!(pin >> y)) reader.fail("keypoint missing y coordinate");
      std::int64_t point_id;
      if (!(pin >> point_id)) reader.fail("keypoint missing point id");
      image.keypoints.emplace_back(x, y);
      // POINT3D_ID is redundant with points3D.txt tracks; -1 keypoints stay
      // as trackless keypoints either way.
    }
    if (model->images.count(image.id))
      reader.fail("duplicate image id " + std::to_string(image.id));
    model->images.emplace(image.id, std::move(image));
  }
}

void read_points_text(const std::filesystem::path& path, SfmModel* model) {
  LineReader reader(path);
  while (auto line = reader.next()) {
    std::istringstream in(*line);
    Point3D point;
    point.id = parse_int(reader, in, "point id");
    for (int i = 0; i < 3; ++i) point.position[i] = parse_double(reader, in, "coordinate");
    for (int i = 0; i < 3; ++i) parse_int(reader, in, "color component");  // RGB, unused
    parse_double(reader, in, "reprojection error");                       // unused
    std::int64_t image_id;
    while (in >> image_id) {
      std::int64_t kp_index;
      if (!(in >> kp_index)) reader.fail("track entry missing keypoint index");
      if (kp_index < 0) reader.fail("negative keypoint index in track");
      point.track.push_back(TrackEntry{image_id, static_cast<std::uint32_t>(kp_index)});
    }
    if (point.track.empty()) reader.fail("point " + std::to_string(point.id) + " has empty track");
    if (model->points.count(point.id))
      reader.fail("duplicate point id " + std::to_string(point.id));
    model->points.emplace(point.id, std::move(point));
  }
}

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

nlohmann::json vec3_to_json(const Eigen::Vector3d& v) { return nlohmann::json{v.x(), v.y(), v.z()}; }

Eigen::Vector3d vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw ValidationError("expected 3-element array");
  return Eigen::Vector3d(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ValidationError("expected array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

nlohmann::json rotation_to_json(const Eigen::Matrix3d& r) {
  nlohmann::json a = nlohmann::json::array();
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) a.push_back(r(row, col));
  return a;
}

Eigen::Matrix3d rotation_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 9) throw ValidationError("expected 9-element rotation array");
  Eigen::Matrix3d r;
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) r(row, col) = j[3 * row + col].get<double>();
  return r;
}

}  // namespace

SfmModel load_reconstruction_text(const std::filesystem::path& directory,
                                  std::optional<Bbox3> bbox_override) {
  SfmModel model;
  const auto cameras = read_cameras_text(directory / "cameras.txt");
  read_images_text(directory / "images.txt", cameras, &model);
  read_points_text(directory / "points3D.txt", &model);
  model.bbox = bbox_override ? *bbox_override : bbox_of_points(model.points);
  model.validate();  // catches dangling track references and bad keypoints
  return model;
}

nlohmann::json model_to_json(const SfmModel& model) {
  nlohmann::json j;
  j["version"] = kNativeVersion;
  j["bbox"] = {{"min", vec3_to_json(model.bbox.min_corner)},
               {"max", vec3_to_json(model.bbox.max_corner)}};

  // Deduplicate intrinsics into a camera table referenced by id.
  std::vector<CameraIntrinsics> camera_table;
  std::map<ImageId, std::size_t> camera_of_image;
  for (const auto& [id, image] : model.images) {
    std::size_t index = camera_table.size();
    for (std::size_t k = 0; k < camera_table.size(); ++k) {
      if (camera_table[k] == image.camera) {
        index = k;
        break;
      }
    }
    if (index == camera_table.size()) camera_table.push_back(image.camera);
    camera_of_image[id] = index;
  }
  nlohmann::json cameras = nlohmann::json::array();
  for (std::size_t k = 0; k < camera_table.size(); ++k) {
    const CameraIntrinsics& c = camera_table[k];
    cameras.push_back({{"id", k + 1},
                       {"model", "PINHOLE"},
                       {"fx", c.fx},
                       {"fy", c.fy},
                       {"cx", c.cx},
                       {"cy", c.cy},
                       {"width", c.width},
                       {"height", c.height}});
  }
  j["cameras"] = std::move(cameras);

  nlohmann::json images = nlohmann::json::array();
  for (const auto& [id, image] : model.images) {
    nlohmann::json ji;
    ji["id"] = id;
    ji["camera_id"] = camera_of_image.at(id) + 1;
    ji["rotation"] = rotation_to_json(image.pose.rotation);
    ji["translation"] = vec3_to_json(image.pose.translation);
    nlohmann::json kps = nlohmann::json::array();
    for (const auto& kp : image.keypoints) kps.push_back({kp.x(), kp.y()});
    ji["keypoints"] = std::move(kps);
    if (!image.descriptors.empty()) {
      nlohmann::json descs = nlohmann::json::array();
      for (const auto& d : image.descriptors) descs.push_back(vec_to_json(d));
      ji["descriptors"] = std::move(descs);
    }
    images.push_back(std::move(ji));
  }
  j["images"] = std::move(images);

  nlohmann::json points = nlohmann::json::array();
  for (const auto& [id, point] : model.points) {
    nlohmann::json jp;
    jp["id"] = id;
    jp["position"] = vec3_to_json(point.position);
    nlohmann::json track = nlohmann::json::array();
    for (const TrackEntry& entry : point.track)
      track.push_back({entry.image_id, entry.keypoint_index});
    jp["track"] = std::move(track);
    if (point.descriptor) jp["descriptor"] = vec_to_json(*point.descriptor);
    points.push_back(std::move(jp));
  }
  j["points"] = std::move(points);
  return j;
}

SfmModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("model document must be a JSON object");
  if (!j.contains("version")) throw ValidationError("model document missing version field");
  const int version = j.at("version").get<int>();
  if (version != kNativeVersion)
    throw ValidationError("unsupported model format version " + std::to_string(version) +
                          " (supported: " + std::to_string(kNativeVersion) + ")");

  SfmModel model;
  const auto& jb = j.at("bbox");
  model.bbox.min_corner = vec3_from_json(jb.at("min"));
  model.bbox.max_corner = vec3_from_json(jb.at("max"));

  std::map<std::int64_t, CameraIntrinsics> cameras;
  for (const auto& jc : j.at("cameras")) {
    CameraIntrinsics cam;
    cam.fx = jc.at("fx").get<double>();
    cam.fy = jc.at("fy").get<double>();
    cam.cx = jc.at("cx").get<double>();
    cam.cy = jc.at("cy").get<double>();
    cam.width = jc.at("width").get<int>();
    cam.height = jc.at("height").get<int>();
    cameras[jc.at("id").get<std::int64_t>()] = cam;
  }

  for (const auto& ji : j.at("images")) {
    RefImage image;
    image.id = ji.at("id").get<ImageId>();
    auto cam_it = cameras.find(ji.at("camera_id").get<std::int64_t>());
    if (cam_it == cameras.end())
      throw ValidationError("image " + std::to_string(image.id) + " references missing camera");
    image.camera = cam_it->second;
    image.pose.rotation = rotation_from_json(ji.at("rotation"));
    image.pose.translation = vec3_from_json(ji.at("translation"));
    for (const auto& jk : ji.at("keypoints"))
      image.keypoints.emplace_back(jk[0].get<double>(), jk[1].get<double>());
    if (ji.contains("descriptors"))
      for (const auto& jd : ji.at("descriptors")) image.descriptors.push_back(vec_from_json(jd));
    model.images.emplace(image.id, std::move(image));
  }

  for (const auto& jp : j.at("points")) {
    Point3D point;
    point.id = jp.at("id").get<PointId>();
    point.position = vec3_from_json(jp.at("position"));
    for (const auto& jt : jp.at("track"))
      point.track.push_back(
          TrackEntry{jt[0].get<ImageId>(), jt[1].get<std::uint32_t>()});
    if (jp.contains("descriptor")) point.descriptor = vec_from_json(jp.at("descriptor"));
    model.points.emplace(point.id, std::move(point));
  }

  model.validate();
  return model;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) throw IoError("cannot write " + path.string());
  out << j.dump() << '\n';
  if (!out.good()) throw IoError("write failed for " + path.string());
}

SfmModel load_native(const std::filesystem::path& path) { return model_from_json(read_json_file(path)); }

void save_native(const SfmModel& model, const std::filesystem::path& path) {
  write_json_file(model_to_json(model), path);
}

SfmModel load_model_auto(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (fs::is_directory(path)) {
    if (fs::exists(path / "model.json")) return load_native(path / "model.json");
    if (fs::exists(path / "cameras.txt")) return load_reconstruction_text(path);
    throw IoError("no model.json or cameras.txt under " + path.string());
  }
  if (fs::exists(path)) return load_native(path);
  throw IoError("no such model path: " + path.string());
}

}  // namespace domsfm
