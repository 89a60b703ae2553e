// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "glosskit/image.hpp"
#include "glosskit/optimize.hpp"

namespace glosskit {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- images

/// 8-bit PNG (gray, RGB or RGBA; 16-bit is reduced). Values map to [0, 1]
/// without a transfer curve. The alpha channel, when present, becomes
/// Image::alpha.
Image read_png(const fs::path& path);

/// Clamps to [0, 1] and rounds to 8 bits. Writes RGBA when the image has alpha.
void write_png(const fs::path& path, const Image& image);

/// FNV-1a over the 8-bit samples write_png would store. Independent of the
/// PNG encoder, so it can be pinned in tests.
std::uint64_t pixel_checksum(const Image& image);

/// Portable float map. Rows are stored bottom to top as the format requires.
void write_pfm(const fs::path& path, int width, int height, std::span<const Rgb> pixels);
void write_pfm(const fs::path& path, int width, int height, std::span<const double> pixels);

struct FloatImage {
  int width = 0;
  int height = 0;
  int channels = 0;          // 1 or 3
  std::vector<float> data;   // row 0 is the top row
};
FloatImage read_pfm(const fs::path& path);

// ------------------------------------------------------ environment maps

/// `.json` (format "glosskit-envmap") or `.pfm` (32 wide, 16 high). Any
/// other size is an error.
EnvironmentMap read_environment(const fs::path& path);
void write_environment(const fs::path& path, const EnvironmentMap& env);

// ------------------------------------------------------------ scene file

inline constexpr int kSceneFormatVersion = 1;

struct NamedCamera {
  std::string id;
  Camera camera;
};

struct SceneFile {
  Scene scene;
  std::vector<NamedCamera> cameras;
  std::map<std::string, std::string> masks;  // camera id -> mask image path
  std::string environment_path;  // empty when the map is embedded

  const Camera& camera(const std::string& id) const;
};

/// Parses a scene; unknown fields and version mismatches throw Error.
/// Relative environment paths resolve against the scene's directory.
SceneFile read_scene(const fs::path& path);
SceneFile parse_scene(const std::string& text, const fs::path& base_dir = {});

/// Writes with the environment embedded unless environment_path is set.
void write_scene(const fs::path& path, const SceneFile& file);
std::string format_scene(const SceneFile& file);

// ---------------------------------------------------------------- config

/// Train config from JSON. Unknown keys throw Error naming the key.
TrainConfig read_config(const fs::path& path);
TrainConfig parse_config(const std::string& text);
std::string format_config(const TrainConfig& config);

// --------------------------------------------------------------- dataset

/// NeRF-Synthetic style transforms file: camera_angle_x plus frames with
/// file_path and an OpenGL camera-to-world transform_matrix. An optional
/// per-frame mask_path overrides the PNG alpha channel. Missing files and
/// non-rigid transforms throw Error naming the offender.
std::vector<View> read_manifest(const fs::path& path);

/// Writes images as <dir>/<name>.png and the transforms file next to them.
void write_manifest(const fs::path& path, std::span<const View> views);

// ------------------------------------------------------------------- csv

/// iteration,total,photometric,normal,light,alpha with round-trip precision.
void write_loss_csv(const fs::path& path, std::span<const LossReport> history);

}  // namespace glosskit
