#include "doctest.h"

#include <random>

#include "domsfm/model.hpp"
#include "domsfm/model_io.hpp"
#include "domsfm/synth.hpp"

#include "test_util.hpp"

using namespace domsfm;
using test::TempDir;

namespace {

// A consistent text reconstruction: 1 camera, 2 images, 3 points.
void write_text_fixture(const std::filesystem::path& dir, const std::string& camera_line,
                        const std::string& track3 = "1 1 2 0") {
  test::write_file(dir / "cameras.txt", "# Camera list\n" + camera_line + "\n");
  test::write_file(dir / "images.txt",
                   "# Image list\n"
                   "1 1 0 0 0 0.1 -0.2 4 1 img1.png\n"
                   "10 10 1 20 20 2 30 30 -1\n"
                   "2 1 0 0 0 -0.1 0.2 4 1 img2.png\n"
                   "15 15 2 25 25 3\n");
  test::write_file(dir / "points3D.txt",
                   "# 3D point list\n"
                   "1 -0.5 0.0 0.0 255 0 0 0.5 1 0\n"
                   "2 0.0 0.3 0.1 0 255 0 0.4 " + track3 + "\n"
                   "3 0.4 -0.2 0.2 0 0 255 0.3 2 1\n");
}

}  // namespace

TEST_CASE("load_reconstruction_text parses a consistent fixture") {
  TempDir dir("text");
  write_text_fixture(dir.path, "1 PINHOLE 100 100 100 100 50 50");
  const SfmModel m = load_reconstruction_text(dir.path);
  CHECK(m.num_points() == 3);
  CHECK(m.num_images() == 2);
  CHECK(m.image(1).keypoints.size() == 3);
  CHECK(m.image(2).keypoints.size() == 2);
  CHECK(m.point(2).track.size() == 2);
  CHECK(m.image(1).camera.fx == 100.0);
  // bbox defaults to the point cloud extents
  CHECK(m.bbox.min_corner.x() == doctest::Approx(-0.5));
  CHECK(m.bbox.max_corner.x() == doctest::Approx(0.4));
}

TEST_CASE("load_reconstruction_text accepts an explicit bbox override") {
  TempDir dir("override");
  write_text_fixture(dir.path, "1 PINHOLE 100 100 100 100 50 50");
  const Bbox3 box{Eigen::Vector3d(-2, -2, -2), Eigen::Vector3d(2, 2, 2)};
  const SfmModel m = load_reconstruction_text(dir.path, box);
  CHECK(m.bbox.min_corner == box.min_corner);
  CHECK(m.bbox.max_corner == box.max_corner);
}

TEST_CASE("load_reconstruction_text supports SIMPLE_PINHOLE") {
  TempDir dir("simple");
  write_text_fixture(dir.path, "1 SIMPLE_PINHOLE 100 100 100 50 50");
  const SfmModel m = load_reconstruction_text(dir.path);
  CHECK(m.image(1).camera.fx == 100.0);
  CHECK(m.image(1).camera.fy == 100.0);
}

TEST_CASE("load_reconstruction_text rejects dangling track references") {
  TempDir dir("dangling");
  write_text_fixture(dir.path, "1 PINHOLE 100 100 100 100 50 50", "99 1 2 0");
  CHECK_THROWS_WITH_AS(load_reconstruction_text(dir.path),
                       doctest::Contains("missing image 99"), ValidationError);
}

TEST_CASE("load_reconstruction_text rejects unsupported camera models by name") {
  TempDir dir("fisheye");
  write_text_fixture(dir.path, "1 FISHEYE 100 100 100 100 50 50 0.1");
  CHECK_THROWS_WITH_AS(load_reconstruction_text(dir.path), doctest::Contains("FISHEYE"),
                       ParseError);
}

TEST_CASE("load_reconstruction_text reports missing files") {
  TempDir dir("missing");
  CHECK_THROWS_AS(load_reconstruction_text(dir.path), IoError);
}

TEST_CASE("load_reconstruction_text reports malformed lines with location") {
  TempDir dir("malformed");
  write_text_fixture(dir.path, "1 PINHOLE 100 100 abc 100 50 50");
  try {
    load_reconstruction_text(dir.path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("cameras.txt") != std::string::npos);
  }
}

TEST_CASE("native round-trip is the identity on a synthetic model") {
  SynthConfig config;
  config.num_points = 100;
  config.num_ref_cameras = 6;
  config.descriptor_dim = 8;
  config.rng_seed = 42;
  const Scene scene = generate_scene(config);

  TempDir dir("native");
  const auto path = dir.path / "model.json";
  save_native(scene.model, path);
  const SfmModel loaded = load_native(path);
  CHECK(test::models_equal(scene.model, loaded));

  // Saving the loaded model again reproduces the file byte for byte.
  const auto path2 = dir.path / "model2.json";
  save_native(loaded, path2);
  CHECK(test::read_file(path) == test::read_file(path2));
}

TEST_CASE("native load rejects unsupported versions") {
  TempDir dir("version");
  const auto path = dir.path / "model.json";
  SfmModel m = test::tiny_model();
  nlohmann::json j = model_to_json(m);
  j["version"] = 2;
  write_json_file(j, path);
  CHECK_THROWS_WITH_AS(load_native(path), doctest::Contains("version"), ValidationError);
}

TEST_CASE("native round-trip works for an empty point collection") {
  SfmModel m;
  RefImage image;
  image.id = 1;
  image.camera = CameraIntrinsics{100, 100, 50, 50, 100, 100};
  m.images.emplace(1, image);
  m.bbox = Bbox3{Eigen::Vector3d(-1, -1, -1), Eigen::Vector3d(1, 1, 1)};
  m.validate();

  TempDir dir("empty");
  const auto path = dir.path / "model.json";
  save_native(m, path);
  const SfmModel loaded = load_native(path);
  CHECK(loaded.num_points() == 0);
  CHECK(test::models_equal(m, loaded));
}

TEST_CASE("parents returns exactly the track image ids") {
  const SfmModel m = test::tiny_model();
  CHECK(parents(m, 1) == std::set<ImageId>{1});
  CHECK(parents(m, 2) == std::set<ImageId>{1, 2});
  CHECK(parents(m, 3) == std::set<ImageId>{2});
  CHECK_THROWS_AS(parents(m, 99), ValidationError);
}

TEST_CASE("restrict_to_image keeps exactly the observed points") {
  const SfmModel m = test::tiny_model();
  const SfmModel r = restrict_to_image(m, 1);
  CHECK(r.num_images() == 1);
  CHECK(r.has_point(1));
  CHECK(r.has_point(2));
  CHECK(!r.has_point(3));
  CHECK(r.bbox.min_corner == m.bbox.min_corner);
  // tracks pruned to the surviving image
  for (const auto& [id, p] : r.points)
    for (const auto& entry : p.track) CHECK(entry.image_id == 1);
  r.validate();

  CHECK_THROWS_AS(restrict_to_image(m, 42), ValidationError);
}

TEST_CASE("restrict_to_image oracle check: independent track scan") {
  SynthConfig config;
  config.num_points = 80;
  config.num_ref_cameras = 5;
  config.visibility_fraction = 0.6;
  config.rng_seed = 3;
  const SfmModel m = generate_scene(config).model;
  for (const auto& [image_id, image] : m.images) {
    const SfmModel r = restrict_to_image(m, image_id);
    std::set<PointId> expected;
    for (const auto& [pid, p] : m.points)
      for (const auto& entry : p.track)
        if (entry.image_id == image_id) expected.insert(pid);
    std::set<PointId> got;
    for (const auto& [pid, p] : r.points) got.insert(pid);
    CHECK(got == expected);
  }
}

TEST_CASE("restrict_to_image allows an image with no observations") {
  SfmModel m = test::tiny_model();
  RefImage image;
  image.id = 3;
  image.camera = m.image(1).camera;
  image.pose = m.image(1).pose;
  m.images.emplace(3, image);
  m.validate();
  const SfmModel r = restrict_to_image(m, 3);
  CHECK(r.num_points() == 0);
  CHECK(r.num_images() == 1);
}

TEST_CASE("filter_by_dominating_set implements the defining equation") {
  const SfmModel m = test::tiny_model();
  // p1 seen by {1}, p2 by {1,2}, p3 by {2}; D = {2} keeps p2, p3.
  const SfmModel f = filter_by_dominating_set(m, {2});
  CHECK(f.num_images() == 1);
  CHECK(!f.has_point(1));
  CHECK(f.has_point(2));
  CHECK(f.has_point(3));
  f.validate();

  CHECK_THROWS_AS(filter_by_dominating_set(m, {}), ValidationError);
  CHECK_THROWS_AS(filter_by_dominating_set(m, {7}), ValidationError);
}

TEST_CASE("filter with all images is the identity (bbox kept)") {
  const SfmModel m = test::tiny_model();
  const SfmModel f = filter_by_dominating_set(m, {1, 2});
  CHECK(test::models_equal(m, f));
}

TEST_CASE("filter set equality property against parents, and idempotence") {
  SynthConfig config;
  config.num_points = 120;
  config.num_ref_cameras = 8;
  config.visibility_fraction = 0.5;
  config.rng_seed = 9;
  const SfmModel m = generate_scene(config).model;
  const std::set<ImageId> d = {2, 5, 7};
  const SfmModel f = filter_by_dominating_set(m, d);

  for (const auto& [pid, p] : f.points) {
    std::set<ImageId> par = parents(m, pid);
    bool hit = false;
    for (ImageId img : d) hit = hit || par.count(img) > 0;
    CHECK(hit);
  }
  for (const auto& [pid, p] : m.points) {
    if (f.has_point(pid)) continue;
    std::set<ImageId> par = parents(m, pid);
    for (ImageId img : d) CHECK(par.count(img) == 0);
  }

  const SfmModel ff = filter_by_dominating_set(f, d);
  CHECK(test::models_equal(f, ff));
}

TEST_CASE("validation rejects broken fixtures") {
  SUBCASE("dangling track reference") {
    SfmModel m = test::tiny_model();
    m.points.at(1).track.push_back(TrackEntry{9, 0});
    CHECK_THROWS_AS(m.validate(), ValidationError);
  }
  SUBCASE("out-of-range keypoint index") {
    SfmModel m = test::tiny_model();
    m.points.at(1).track[0].keypoint_index = 50;
    CHECK_THROWS_AS(m.validate(), ValidationError);
  }
  SUBCASE("keypoint outside image bounds") {
    SfmModel m = test::tiny_model();
    m.images.at(1).keypoints[0] = Eigen::Vector2d(500.0, 10.0);
    CHECK_THROWS_AS(m.validate(), ValidationError);
  }
  SUBCASE("duplicate image in track") {
    SfmModel m = test::tiny_model();
    m.points.at(2).track.push_back(TrackEntry{1, 0});
    CHECK_THROWS_AS(m.validate(), ValidationError);
  }
  SUBCASE("point outside bbox") {
    SfmModel m = test::tiny_model();
    m.bbox.max_corner = Eigen::Vector3d(0.1, 0.1, 0.05);
    CHECK_THROWS_AS(m.validate(), ValidationError);
  }
  SUBCASE("non-orthonormal rotation") {
    SfmModel m = test::tiny_model();
    m.images.at(1).pose.rotation(0, 0) += 1e-6;
    CHECK_THROWS_AS(m.validate(), ValidationError);
  }
}

TEST_CASE("model_digest changes with content") {
  const SfmModel a = test::tiny_model();
  SfmModel b = a;
  CHECK(model_digest(a) == model_digest(b));
  b.points.at(1).position.x() += 1e-9;
  CHECK(model_digest(a) != model_digest(b));
}
