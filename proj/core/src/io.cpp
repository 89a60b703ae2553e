// Copyright 2026 The GlossKit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "glosskit/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace glosskit {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::vector<std::uint8_t> to_bytes(const Image& image) {
  const int channels = image.alpha.empty() ? 3 : 4;
  std::vector<std::uint8_t> bytes(image.size() * channels);
  for (std::size_t i = 0; i < image.size(); ++i) {
    for (int c = 0; c < 3; ++c) bytes[i * channels + c] = quantize(image.rgb[i][c]);
    if (channels == 4) bytes[i * channels + 3] = quantize(image.alpha[i]);
  }
  return bytes;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(what + ": malformed JSON: " + e.what());
  }
}

// Throws on keys outside `allowed`.
void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw Error(where + ": expected an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) throw Error(where + ": unknown field '" + item.key() + "'");
  }
}

void check_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(where + ": expected an object");
  for (const auto& item : obj.items())
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw Error(where + ": unknown field '" + item.key() + "'");
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(where + ": missing field '" + key + "'");
  return *it;
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw Error(where + ": expected a number");
  return j.get<double>();
}

Vec3 get_vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw Error(where + ": expected 3 numbers");
  return Vec3(get_number(j[0], where), get_number(j[1], where), get_number(j[2], where));
}

Rgb get_rgb(const json& j, const std::string& where) { return get_vec3(j, where).array(); }

template <std::size_t N>
std::array<Rgb, N> get_coeffs(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != N)
    throw Error(where + ": expected " + std::to_string(N) + " RGB coefficients");
  std::array<Rgb, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = get_rgb(j[i], where);
  return out;
}

ordered_json vec_json(const Vec3& v) { return ordered_json::array({v[0], v[1], v[2]}); }
ordered_json rgb_json(const Rgb& v) { return ordered_json::array({v[0], v[1], v[2]}); }

// ------------------------------------------------------------ environment

constexpr const char* kEnvFormat = "glosskit-envmap";
constexpr const char* kSceneFormat = "glosskit-scene";

EnvironmentMap env_from_json(const json& j, const std::string& where) {
  check_keys(j, {"format", "version", "rows", "cols", "radiance"}, where);
  if (j.contains("format") && j["format"] != kEnvFormat)
    throw Error(where + ": format must be '" + kEnvFormat + "'");
  if (j.contains("version") && j["version"] != kSceneFormatVersion)
    throw Error(where + ": unsupported version (expected 1)");
  const int rows = static_cast<int>(get_number(require(j, "rows", where), where));
  const int cols = static_cast<int>(get_number(require(j, "cols", where), where));
  if (rows != EnvironmentMap::kRows || cols != EnvironmentMap::kCols)
    throw Error(where + ": environment map must be 16x32, got " + std::to_string(rows) + "x" +
                std::to_string(cols));
  const json& rad = require(j, "radiance", where);
  if (!rad.is_array() || rad.size() != EnvironmentMap::kTexels)
    throw Error(where + ": radiance must list 512 RGB texels");
  EnvironmentMap env;
  for (int i = 0; i < EnvironmentMap::kTexels; ++i) env.texels()[i] = get_rgb(rad[i], where);
  env.validate();
  return env;
}

ordered_json env_to_json(const EnvironmentMap& env) {
  ordered_json j;
  j["rows"] = EnvironmentMap::kRows;
  j["cols"] = EnvironmentMap::kCols;
  ordered_json rad = ordered_json::array();
  for (const Rgb& t : env.texels()) rad.push_back(rgb_json(t));
  j["radiance"] = std::move(rad);
  return j;
}

// --------------------------------------------------------------- cameras

Camera camera_from_json(const json& j, const std::string& where) {
  check_keys(j, {"id", "width", "height", "fx", "fy", "cx", "cy", "rotation", "translation"},
             where);
  Camera c;
  c.width = static_cast<int>(get_number(require(j, "width", where), where));
  c.height = static_cast<int>(get_number(require(j, "height", where), where));
  c.fx = get_number(require(j, "fx", where), where);
  c.fy = get_number(require(j, "fy", where), where);
  c.cx = get_number(require(j, "cx", where), where);
  c.cy = get_number(require(j, "cy", where), where);
  const json& r = require(j, "rotation", where);
  if (!r.is_array() || r.size() != 3) throw Error(where + ": rotation must be 3 rows");
  for (int i = 0; i < 3; ++i) c.rotation.row(i) = get_vec3(r[i], where).transpose();
  c.translation = get_vec3(require(j, "translation", where), where);
  c.validate();
  return c;
}

ordered_json camera_to_json(const NamedCamera& nc) {
  const Camera& c = nc.camera;
  ordered_json j;
  j["id"] = nc.id;
  j["width"] = c.width;
  j["height"] = c.height;
  j["fx"] = c.fx;
  j["fy"] = c.fy;
  j["cx"] = c.cx;
  j["cy"] = c.cy;
  j["rotation"] = ordered_json::array({vec_json(c.rotation.row(0).transpose()),
                                       vec_json(c.rotation.row(1).transpose()),
                                       vec_json(c.rotation.row(2).transpose())});
  j["translation"] = vec_json(c.translation);
  return j;
}

// ---------------------------------------------------------------- surfels

Surfel surfel_from_json(const json& j, const std::string& where) {
  check_keys(j,
             {"position", "tangent_u", "tangent_v", "scale_u", "scale_v", "opacity", "roughness",
              "specular_reflectance", "diffuse_sh", "indirect_sh"},
             where);
  Surfel s;
  s.position = get_vec3(require(j, "position", where), where);
  s.tangent_u = get_vec3(require(j, "tangent_u", where), where);
  s.tangent_v = get_vec3(require(j, "tangent_v", where), where);
  s.scale_u = get_number(require(j, "scale_u", where), where);
  s.scale_v = get_number(require(j, "scale_v", where), where);
  s.opacity = get_number(require(j, "opacity", where), where);
  s.roughness = get_number(require(j, "roughness", where), where);
  s.specular_reflectance = get_rgb(require(j, "specular_reflectance", where), where);
  s.diffuse_sh = get_coeffs<kDiffuseShCoeffs>(require(j, "diffuse_sh", where), where);
  s.indirect_sh = get_coeffs<kIndirectShCoeffs>(require(j, "indirect_sh", where), where);
  try {
    validate(s);
  } catch (const Error& e) {
    throw Error(where + ": " + e.what());
  }
  return s;
}

ordered_json surfel_to_json(const Surfel& s) {
  ordered_json j;
  j["position"] = vec_json(s.position);
  j["tangent_u"] = vec_json(s.tangent_u);
  j["tangent_v"] = vec_json(s.tangent_v);
  j["scale_u"] = s.scale_u;
  j["scale_v"] = s.scale_v;
  j["opacity"] = s.opacity;
  j["roughness"] = s.roughness;
  j["specular_reflectance"] = rgb_json(s.specular_reflectance);
  ordered_json d = ordered_json::array();
  for (const Rgb& c : s.diffuse_sh) d.push_back(rgb_json(c));
  j["diffuse_sh"] = std::move(d);
  ordered_json ind = ordered_json::array();
  for (const Rgb& c : s.indirect_sh) ind.push_back(rgb_json(c));
  j["indirect_sh"] = std::move(ind);
  return j;
}

}  // namespace

// ----------------------------------------------------------------- images

Image read_png(const fs::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str()))
    throw Error("cannot read PNG '" + path.string() + "': " + png.message);
  const bool has_alpha = (png.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  png.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&png);
    throw Error("cannot decode PNG '" + path.string() + "': " + png.message);
  }
  Image img(static_cast<int>(png.width), static_cast<int>(png.height));
  if (has_alpha) img.alpha.resize(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    for (int c = 0; c < 3; ++c) img.rgb[i][c] = buffer[4 * i + c] / 255.0;
    if (has_alpha) img.alpha[i] = buffer[4 * i + 3] / 255.0;
  }
  return img;
}

void write_png(const fs::path& path, const Image& image) {
  if (image.width <= 0 || image.height <= 0 || image.size() != static_cast<std::size_t>(image.width) * image.height)
    throw Error("write_png: image has inconsistent size");
  const std::vector<std::uint8_t> bytes = to_bytes(image);
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = image.alpha.empty() ? PNG_FORMAT_RGB : PNG_FORMAT_RGBA;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, bytes.data(), 0, nullptr))
    throw Error("cannot write PNG '" + path.string() + "': " + png.message);
}

std::uint64_t pixel_checksum(const Image& image) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : to_bytes(image)) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

void write_pfm_raw(const fs::path& path, int width, int height, int channels,
                   const std::vector<float>& top_down) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << (channels == 3 ? "PF" : "Pf") << "\n" << width << " " << height << "\n-1.0\n";
  const std::size_t row = static_cast<std::size_t>(width) * channels;
  for (int y = height - 1; y >= 0; --y)
    out.write(reinterpret_cast<const char*>(top_down.data() + y * row),
              static_cast<std::streamsize>(row * sizeof(float)));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace

void write_pfm(const fs::path& path, int width, int height, std::span<const Rgb> pixels) {
  if (pixels.size() != static_cast<std::size_t>(width) * height)
    throw Error("write_pfm: pixel count does not match the size");
  std::vector<float> data(pixels.size() * 3);
  for (std::size_t i = 0; i < pixels.size(); ++i)
    for (int c = 0; c < 3; ++c) data[3 * i + c] = static_cast<float>(pixels[i][c]);
  write_pfm_raw(path, width, height, 3, data);
}

void write_pfm(const fs::path& path, int width, int height, std::span<const double> pixels) {
  if (pixels.size() != static_cast<std::size_t>(width) * height)
    throw Error("write_pfm: pixel count does not match the size");
  std::vector<float> data(pixels.begin(), pixels.end());
  write_pfm_raw(path, width, height, 1, data);
}

FloatImage read_pfm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::string magic;
  FloatImage img;
  double scale = 0.0;
  in >> magic >> img.width >> img.height >> scale;
  if (!in || (magic != "PF" && magic != "Pf") || img.width <= 0 || img.height <= 0 ||
      scale == 0.0)
    throw Error("'" + path.string() + "' is not a valid PFM file");
  in.get();  // single whitespace before the raster
  img.channels = magic == "PF" ? 3 : 1;
  const std::size_t row = static_cast<std::size_t>(img.width) * img.channels;
  img.data.resize(row * img.height);
  for (int y = img.height - 1; y >= 0; --y)
    in.read(reinterpret_cast<char*>(img.data.data() + y * row),
            static_cast<std::streamsize>(row * sizeof(float)));
  if (!in) throw Error("'" + path.string() + "' is truncated");
  if (scale > 0.0) {
    // Big-endian payload.
    for (float& f : img.data) {
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      u = __builtin_bswap32(u);
      std::memcpy(&f, &u, 4);
    }
  }
  return img;
}

// ---------------------------------------------------- environment files

EnvironmentMap read_environment(const fs::path& path) {
  if (path.extension() == ".pfm") {
    const FloatImage img = read_pfm(path);
    if (img.width != EnvironmentMap::kCols || img.height != EnvironmentMap::kRows)
      throw Error("environment map '" + path.string() + "' must be 16x32 (rows x cols), got " +
                  std::to_string(img.height) + "x" + std::to_string(img.width));
    EnvironmentMap env;
    for (int i = 0; i < EnvironmentMap::kTexels; ++i)
      for (int c = 0; c < 3; ++c)
        env.texels()[i][c] = img.channels == 3 ? img.data[3 * i + c] : img.data[i];
    env.validate();
    return env;
  }
  const std::string where = "environment map '" + path.string() + "'";
  return env_from_json(parse_json(read_text(path), where), where);
}

void write_environment(const fs::path& path, const EnvironmentMap& env) {
  if (path.extension() == ".pfm") {
    write_pfm(path, EnvironmentMap::kCols, EnvironmentMap::kRows, env.texels());
    return;
  }
  ordered_json j;
  j["format"] = kEnvFormat;
  j["version"] = kSceneFormatVersion;
  const ordered_json body = env_to_json(env);
  for (auto& [k, v] : body.items()) j[k] = v;
  write_text(path, j.dump(1) + "\n");
}

// ------------------------------------------------------------ scene files

const Camera& SceneFile::camera(const std::string& id) const {
  for (const NamedCamera& c : cameras)
    if (c.id == id) return c.camera;
  throw Error("unknown camera id '" + id + "'");
}

SceneFile parse_scene(const std::string& text, const fs::path& base_dir) {
  const std::string where = "scene (format version 1)";
  const json j = parse_json(text, "scene");
  check_keys(j, {"format", "version", "cameras", "environment", "masks", "surfels"}, where);
  if (require(j, "format", where) != kSceneFormat)
    throw Error(where + ": format must be '" + std::string(kSceneFormat) + "'");
  const json& version = require(j, "version", where);
  if (version != kSceneFormatVersion)
    throw Error("scene: unsupported format version " + version.dump() + " (this build reads 1)");

  SceneFile file;
  if (j.contains("cameras")) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < j["cameras"].size(); ++i) {
      const std::string w = where + ": cameras[" + std::to_string(i) + "]";
      const json& cj = j["cameras"][i];
      NamedCamera nc;
      nc.id = require(cj, "id", w).get<std::string>();
      if (!seen.insert(nc.id).second) throw Error(w + ": duplicate camera id '" + nc.id + "'");
      nc.camera = camera_from_json(cj, w);
      file.cameras.push_back(nc);
    }
  }
  if (j.contains("environment")) {
    const json& e = j["environment"];
    if (e.is_string()) {
      file.environment_path = e.get<std::string>();
      fs::path p = file.environment_path;
      if (p.is_relative()) p = base_dir / p;
      file.scene.environment = read_environment(p);
    } else {
      file.scene.environment = env_from_json(e, where + ": environment");
    }
  }
  if (j.contains("masks")) {
    if (!j["masks"].is_object()) throw Error(where + ": masks must map camera ids to paths");
    for (const auto& item : j["masks"].items())
      file.masks[item.key()] = item.value().get<std::string>();
  }
  const json& surfels = require(j, "surfels", where);
  if (!surfels.is_array()) throw Error(where + ": surfels must be an array");
  for (std::size_t i = 0; i < surfels.size(); ++i)
    file.scene.surfels.push_back(
        surfel_from_json(surfels[i], where + ": surfels[" + std::to_string(i) + "]"));
  return file;
}

SceneFile read_scene(const fs::path& path) {
  if (!fs::exists(path)) throw Error("scene file '" + path.string() + "' does not exist");
  return parse_scene(read_text(path), path.parent_path());
}

std::string format_scene(const SceneFile& file) {
  ordered_json j;
  j["format"] = kSceneFormat;
  j["version"] = kSceneFormatVersion;
  ordered_json cams = ordered_json::array();
  for (const NamedCamera& c : file.cameras) cams.push_back(camera_to_json(c));
  j["cameras"] = std::move(cams);
  if (file.environment_path.empty())
    j["environment"] = env_to_json(file.scene.environment);
  else
    j["environment"] = file.environment_path;
  if (!file.masks.empty()) {
    ordered_json m = ordered_json::object();
    for (const auto& [k, v] : file.masks) m[k] = v;
    j["masks"] = std::move(m);
  }
  ordered_json surfels = ordered_json::array();
  for (const Surfel& s : file.scene.surfels) surfels.push_back(surfel_to_json(s));
  j["surfels"] = std::move(surfels);
  return j.dump(1) + "\n";
}

void write_scene(const fs::path& path, const SceneFile& file) {
  write_text(path, format_scene(file));
}

// ----------------------------------------------------------------- config

TrainConfig parse_config(const std::string& text) {
  const json j = parse_json(text, "config");
  const std::string where = "config";
  check_keys(j,
             {"version", "stage1_iters", "stage2_iters", "stage3_iters", "learning_rates",
              "weights", "samples", "alpha_min", "seed", "iters_scale", "ndf", "normal_loss",
              "phased", "use_visibility", "visibility_refresh", "threads"},
             where);
  if (j.contains("version") && j["version"] != kSceneFormatVersion)
    throw Error("config: unsupported version " + j["version"].dump() + " (this build reads 1)");
  TrainConfig c;
  auto get_int = [&](const char* key, int& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer()) throw Error(where + ": '" + key + "' must be an integer");
    out = j[key].get<int>();
  };
  auto get_bool = [&](const char* key, bool& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_boolean()) throw Error(where + ": '" + key + "' must be true or false");
    out = j[key].get<bool>();
  };
  auto get_real = [&](const json& obj, const char* key, double& out, const std::string& w) {
    if (obj.contains(key)) out = get_number(obj[key], w + ": '" + key + "'");
  };
  get_int("stage1_iters", c.stage1_iters);
  get_int("stage2_iters", c.stage2_iters);
  get_int("stage3_iters", c.stage3_iters);
  get_int("samples", c.samples);
  get_int("visibility_refresh", c.visibility_refresh);
  get_int("threads", c.threads);
  get_bool("normal_loss", c.normal_loss);
  get_bool("phased", c.phased);
  get_bool("use_visibility", c.use_visibility);
  get_real(j, "alpha_min", c.alpha_min, where);
  get_real(j, "iters_scale", c.iters_scale, where);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw Error(where + ": 'seed' must be a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("ndf")) {
    const std::string ndf = j["ndf"].get<std::string>();
    if (ndf == "warped_asg")
      c.ndf = NdfModel::WarpedAsg;
    else if (ndf == "isotropic_sg")
      c.ndf = NdfModel::IsotropicSg;
    else
      throw Error(where + ": 'ndf' must be warped_asg or isotropic_sg");
  }
  if (j.contains("learning_rates")) {
    const json& lr = j["learning_rates"];
    const std::string w = where + ".learning_rates";
    std::vector<std::string> names;
    for (ParamGroup g : kAllGroups) names.emplace_back(group_name(g));
    check_keys(lr, names, w);
    for (ParamGroup g : kAllGroups) {
      const std::string name(group_name(g));
      get_real(lr, name.c_str(), c.lr.for_group(g), w);
    }
  }
  if (j.contains("weights")) {
    const json& wj = j["weights"];
    const std::string w = where + ".weights";
    check_keys(wj, {"dssim", "normal", "light", "alpha"}, w);
    get_real(wj, "dssim", c.weights.dssim, w);
    get_real(wj, "normal", c.weights.normal, w);
    get_real(wj, "light", c.weights.light, w);
    get_real(wj, "alpha", c.weights.alpha, w);
  }
  c.validate();
  return c;
}

TrainConfig read_config(const fs::path& path) {
  if (!fs::exists(path)) throw Error("config file '" + path.string() + "' does not exist");
  return parse_config(read_text(path));
}

std::string format_config(const TrainConfig& c) {
  ordered_json j;
  j["version"] = kSceneFormatVersion;
  j["stage1_iters"] = c.stage1_iters;
  j["stage2_iters"] = c.stage2_iters;
  j["stage3_iters"] = c.stage3_iters;
  ordered_json lr;
  for (ParamGroup g : kAllGroups) lr[std::string(group_name(g))] = c.lr.for_group(g);
  j["learning_rates"] = lr;
  j["weights"] = {{"dssim", c.weights.dssim},
                  {"normal", c.weights.normal},
                  {"light", c.weights.light},
                  {"alpha", c.weights.alpha}};
  j["samples"] = c.samples;
  j["alpha_min"] = c.alpha_min;
  j["seed"] = c.seed;
  j["iters_scale"] = c.iters_scale;
  j["ndf"] = c.ndf == NdfModel::WarpedAsg ? "warped_asg" : "isotropic_sg";
  j["normal_loss"] = c.normal_loss;
  j["phased"] = c.phased;
  j["use_visibility"] = c.use_visibility;
  j["visibility_refresh"] = c.visibility_refresh;
  j["threads"] = c.threads;
  return j.dump(1) + "\n";
}

// --------------------------------------------------------------- manifest

std::vector<View> read_manifest(const fs::path& path) {
  if (!fs::exists(path)) throw Error("manifest '" + path.string() + "' does not exist");
  const std::string where = "manifest '" + path.string() + "'";
  const json j = parse_json(read_text(path), where);
  const double fov_x = get_number(require(j, "camera_angle_x", where), where);
  if (!(fov_x > 0.0 && fov_x < kPi)) throw Error(where + ": camera_angle_x out of range");
  const json& frames = require(j, "frames", where);
  if (!frames.is_array() || frames.empty()) throw Error(where + ": no frames");
  const fs::path dir = path.parent_path();
  auto resolve = [&](const std::string& rel) {
    fs::path p = dir / rel;
    if (!fs::exists(p) && p.extension() != ".png") p += ".png";
    if (!fs::exists(p)) throw Error(where + ": missing image file '" + p.string() + "'");
    return p;
  };

  std::vector<View> views;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string w = where + ": frames[" + std::to_string(i) + "]";
    const json& f = frames[i];
    const std::string file = require(f, "file_path", w).get<std::string>();
    const json& m = require(f, "transform_matrix", w);
    if (!m.is_array() || m.size() != 4) throw Error(w + ": transform_matrix must be 4x4");
    Mat4 c2w;
    for (int r = 0; r < 4; ++r) {
      if (!m[r].is_array() || m[r].size() != 4) throw Error(w + ": transform_matrix must be 4x4");
      for (int c = 0; c < 4; ++c) c2w(r, c) = get_number(m[r][c], w);
    }
    const Mat3 rot = c2w.topLeftCorner<3, 3>();
    const double ortho = (rot.transpose() * rot - Mat3::Identity()).cwiseAbs().maxCoeff();
    const double bottom = (c2w.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff();
    if (ortho > 1e-4 || std::abs(rot.determinant() - 1.0) > 1e-4 || bottom > 1e-4)
      throw Error(w + ": transform_matrix is not rigid");

    View v;
    v.name = fs::path(file).stem().string();
    v.image = read_png(resolve(file));
    if (f.contains("mask_path")) {
      const Image mask = read_png(resolve(f["mask_path"].get<std::string>()));
      if (mask.width != v.image.width || mask.height != v.image.height)
        throw Error(w + ": mask size does not match the image");
      v.image.alpha.resize(mask.size());
      for (std::size_t k = 0; k < mask.size(); ++k)
        v.image.alpha[k] = mask.alpha.empty() ? mask.rgb[k][0] : mask.alpha[k];
    }
    // OpenGL camera axes (y up, z backward) to OpenCV (y down, z forward).
    Mat3 c2w_cv = rot;
    c2w_cv.col(1) *= -1.0;
    c2w_cv.col(2) *= -1.0;
    Camera& cam = v.camera;
    cam.width = v.image.width;
    cam.height = v.image.height;
    cam.fx = cam.fy = 0.5 * cam.width / std::tan(0.5 * fov_x);
    cam.cx = 0.5 * cam.width;
    cam.cy = 0.5 * cam.height;
    cam.rotation = c2w_cv.transpose();
    cam.translation = -cam.rotation * c2w.topRightCorner<3, 1>();
    views.push_back(std::move(v));
  }
  return views;
}

void write_manifest(const fs::path& path, std::span<const View> views) {
  if (views.empty()) throw Error("write_manifest: no views");
  const fs::path dir = path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  const Camera& first = views.front().camera;
  ordered_json j;
  j["camera_angle_x"] = 2.0 * std::atan(0.5 * first.width / first.fx);
  ordered_json frames = ordered_json::array();
  for (const View& v : views) {
    if (v.name.empty()) throw Error("write_manifest: every view needs a name");
    write_png(dir / (v.name + ".png"), v.image);
    Mat3 c2w_cv = v.camera.rotation.transpose();
    c2w_cv.col(1) *= -1.0;
    c2w_cv.col(2) *= -1.0;
    const Vec3 c = v.camera.center();
    ordered_json m = ordered_json::array();
    for (int r = 0; r < 3; ++r)
      m.push_back(ordered_json::array({c2w_cv(r, 0), c2w_cv(r, 1), c2w_cv(r, 2), c[r]}));
    m.push_back(ordered_json::array({0.0, 0.0, 0.0, 1.0}));
    frames.push_back({{"file_path", "./" + v.name}, {"transform_matrix", m}});
  }
  j["frames"] = std::move(frames);
  write_text(path, j.dump(1) + "\n");
}

void write_loss_csv(const fs::path& path, std::span<const LossReport> history) {
  std::ostringstream out;
  out << "iteration,total,photometric,normal,light,alpha\n" << std::setprecision(17);
  for (const LossReport& r : history)
    out << r.iteration << ',' << r.total << ',' << r.photometric << ',' << r.normal << ','
        << r.light << ',' << r.alpha << '\n';
  write_text(path, out.str());
}

}  // namespace glosskit
