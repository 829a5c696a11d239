#pragma once

#include <filesystem>
#include <optional>

#include "json.hpp"

#include "domsfm/model.hpp"

namespace domsfm {

// Text reconstruction export: cameras.txt / images.txt / points3D.txt in the
// conventional column layout (PINHOLE and SIMPLE_PINHOLE camera models).
// The bbox defaults to the componentwise min/max of the point cloud unless an
// explicit box is supplied.
SfmModel load_reconstruction_text(const std::filesystem::path& directory,
                                  std::optional<Bbox3> bbox_override = std::nullopt);

// Native single-document JSON format (see docs/formats.md). save followed by
// load is the identity on all fields.
SfmModel load_native(const std::filesystem::path& path);
void save_native(const SfmModel& model, const std::filesystem::path& path);

// Accepts a native model.json, a directory containing one, or a text
// reconstruction directory.
SfmModel load_model_auto(const std::filesystem::path& path);

nlohmann::json model_to_json(const SfmModel& model);
SfmModel model_from_json(const nlohmann::json& j);

// Shared helpers for the other JSON file formats.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace domsfm
