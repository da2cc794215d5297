#include "rotsym/scene_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "rotsym/matching.hpp"

namespace rotsym {

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& path, bool strict) {
  if (!strict) return;
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const std::string_view key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError(path + ": unknown field '" + item.key() + "'");
    }
  }
}

const json& require_field(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + ": missing field '" + key + "'");
  return *it;
}

double parse_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path + ": value must be finite");
  return v;
}

int parse_positive_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
  const long long v = j.get<long long>();
  if (v <= 0) throw ConfigError(path + ": value must be positive");
  return static_cast<int>(v);
}

Point2D parse_point2d(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(path + ": expected [u, v]");
  return {parse_number(j[0], path + "[0]"), parse_number(j[1], path + "[1]")};
}

Vector3 parse_vector3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(path + ": expected [x, y, z]");
  return {parse_number(j[0], path + "[0]"), parse_number(j[1], path + "[1]"),
          parse_number(j[2], path + "[2]")};
}

PolygonParams3D parse_params3d(const json& j, RotationGroup group, const std::string& path,
                               bool strict) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  check_keys(j, {"c", "s", "a", "beta"}, path, strict);
  PolygonParams3D p;
  p.group = group;
  p.center = parse_vector3(require_field(j, "c", path), path + ".c");
  p.seed = parse_vector3(require_field(j, "s", path), path + ".s");
  p.axis = parse_vector3(require_field(j, "a", path), path + ".a");
  p.angle_bias = j.contains("beta") ? parse_number(j["beta"], path + ".beta") : 0.0;
  if (p.angle_bias < 0.0 || p.angle_bias > std::numbers::pi / 2.0) {
    throw ConfigError(path + ".beta: must lie in [0, pi/2]");
  }
  return p;
}

Polygon2D parse_polygon(const json& j, const std::string& path, bool strict) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  check_keys(j, {"group", "center", "vertices", "scores", "params3d"}, path, strict);

  Polygon2D poly;
  const json& group_json = require_field(j, "group", path);
  if (!group_json.is_string()) throw ConfigError(path + ".group: expected a string");
  poly.group = parse_group(group_json.get<std::string>());
  poly.center = parse_point2d(require_field(j, "center", path), path + ".center");

  const int expected = vertex_count(poly.group);
  if (j.contains("vertices") && !j["vertices"].is_null()) {
    const json& verts = j["vertices"];
    if (!verts.is_array()) throw ConfigError(path + ".vertices: expected an array");
    for (std::size_t k = 0; k < verts.size(); ++k) {
      poly.vertices.push_back(
          parse_point2d(verts[k], path + ".vertices[" + std::to_string(k) + "]"));
    }
  }
  if (static_cast<int>(poly.vertices.size()) != expected) {
    throw ConfigError(path + ".vertices: group " + std::string(group_name(poly.group)) +
                      " carries " + std::to_string(expected) + " vertices, got " +
                      std::to_string(poly.vertices.size()));
  }

  if (j.contains("scores") && !j["scores"].is_null()) {
    const json& scores = j["scores"];
    if (!scores.is_object()) throw ConfigError(path + ".scores: expected an object");
    for (const auto& item : scores.items()) {
      const RotationGroup g = parse_group(item.key());
      const double s = parse_number(item.value(), path + ".scores." + item.key());
      if (s < 0.0 || s > 1.0) {
        throw ConfigError(path + ".scores." + item.key() + ": confidence must be in [0, 1]");
      }
      poly.scores[g] = s;
    }
  }

  if (j.contains("params3d") && !j["params3d"].is_null()) {
    poly.params3d = parse_params3d(j["params3d"], poly.group, path + ".params3d", strict);
  }
  return poly;
}

Scene parse_scene(const json& j, const std::string& path, bool strict) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  check_keys(j, {"id", "width", "height", "intrinsics", "polygons"}, path, strict);

  Scene scene;
  const json& id = require_field(j, "id", path);
  if (!id.is_string()) throw ConfigError(path + ".id: expected a string");
  scene.id = id.get<std::string>();
  if (scene.id.empty()) throw ConfigError(path + ".id: must be non-empty");
  scene.width = parse_positive_int(require_field(j, "width", path), path + ".width");
  scene.height = parse_positive_int(require_field(j, "height", path), path + ".height");

  if (j.contains("intrinsics") && !j["intrinsics"].is_null()) {
    const json& k = j["intrinsics"];
    const std::string kpath = path + ".intrinsics";
    if (!k.is_object()) throw ConfigError(kpath + ": expected an object");
    check_keys(k, {"f", "cx", "cy"}, kpath, strict);
    CameraIntrinsics intr;
    intr.f = parse_number(require_field(k, "f", kpath), kpath + ".f");
    if (!(intr.f > 0.0)) throw ConfigError(kpath + ".f: focal length must be positive");
    intr.cx = parse_number(require_field(k, "cx", kpath), kpath + ".cx");
    intr.cy = parse_number(require_field(k, "cy", kpath), kpath + ".cy");
    scene.intrinsics = intr;
  }

  if (j.contains("polygons") && !j["polygons"].is_null()) {
    const json& polys = j["polygons"];
    if (!polys.is_array()) throw ConfigError(path + ".polygons: expected an array");
    for (std::size_t i = 0; i < polys.size(); ++i) {
      scene.polygons.push_back(
          parse_polygon(polys[i], path + ".polygons[" + std::to_string(i) + "]", strict));
    }
  }
  return scene;
}

// --- serialization -------------------------------------------------------

void append_point2d(std::string& out, const Point2D& p) {
  out += '[';
  out += format_double(p.u);
  out += ", ";
  out += format_double(p.v);
  out += ']';
}

void append_vector3(std::string& out, const Vector3& v) {
  out += '[';
  out += format_double(v.x);
  out += ", ";
  out += format_double(v.y);
  out += ", ";
  out += format_double(v.z);
  out += ']';
}

void append_polygon(std::string& out, const Polygon2D& poly, const std::string& indent) {
  out += indent + "{\n";
  out += indent + "  \"group\": \"" + std::string(group_name(poly.group)) + "\",\n";
  out += indent + "  \"center\": ";
  append_point2d(out, poly.center);
  if (!poly.vertices.empty()) {
    out += ",\n" + indent + "  \"vertices\": [";
    for (std::size_t k = 0; k < poly.vertices.size(); ++k) {
      if (k > 0) out += ", ";
      append_point2d(out, poly.vertices[k]);
    }
    out += ']';
  }
  if (!poly.scores.empty()) {
    out += ",\n" + indent + "  \"scores\": {";
    bool first = true;
    for (const auto& [g, s] : poly.scores) {
      if (!first) out += ", ";
      first = false;
      out += '"' + std::string(group_name(g)) + "\": " + format_double(s);
    }
    out += '}';
  }
  if (poly.params3d) {
    out += ",\n" + indent + "  \"params3d\": {\"c\": ";
    append_vector3(out, poly.params3d->center);
    out += ", \"s\": ";
    append_vector3(out, poly.params3d->seed);
    out += ", \"a\": ";
    append_vector3(out, poly.params3d->axis);
    out += ", \"beta\": " + format_double(poly.params3d->angle_bias) + '}';
  }
  out += '\n' + indent + '}';
}

void validate_scene_for_write(const Scene& scene) {
  if (scene.id.empty()) throw ConfigError("write: scene id must be non-empty");
  if (scene.width <= 0 || scene.height <= 0) {
    throw ConfigError("write: scene '" + scene.id + "' has non-positive dimensions");
  }
  for (const Polygon2D& poly : scene.polygons) {
    if (!poly.center.finite()) {
      throw ConfigError("write: non-finite center in scene '" + scene.id + "'");
    }
    if (static_cast<int>(poly.vertices.size()) != vertex_count(poly.group)) {
      throw ConfigError("write: vertex count does not match group in scene '" + scene.id + "'");
    }
    for (const Point2D& v : poly.vertices) {
      if (!v.finite()) throw ConfigError("write: non-finite vertex in scene '" + scene.id + "'");
    }
  }
}

}  // namespace

std::string format_double(double value) {
  if (!std::isfinite(value)) throw ConfigError("format_double: value must be finite");
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::vector<Scene> parse_scenes_json(const std::string& text, const ParseOptions& opts) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scene file: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("scene file: top level must be an object");
  check_keys(root, {"format_version", "scenes"}, "scene file", opts.strict);

  const json& version = require_field(root, "format_version", "scene file");
  if (!version.is_number_integer() || version.get<int>() != 1) {
    throw ConfigError("scene file: format_version must be 1");
  }
  const json& scenes_json = require_field(root, "scenes", "scene file");
  if (!scenes_json.is_array()) throw ConfigError("scene file: 'scenes' must be an array");

  std::vector<Scene> scenes;
  scenes.reserve(scenes_json.size());
  for (std::size_t i = 0; i < scenes_json.size(); ++i) {
    scenes.push_back(
        parse_scene(scenes_json[i], "scenes[" + std::to_string(i) + "]", opts.strict));
  }
  return scenes;
}

std::vector<Scene> read_scene_file(const std::string& path, const ParseOptions& opts) {
  return parse_scenes_json(read_text_file(path), opts);
}

std::string scenes_to_json(std::span<const Scene> scenes) {
  std::string out;
  out += "{\n  \"format_version\": 1,\n  \"scenes\": [";
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const Scene& scene = scenes[i];
    validate_scene_for_write(scene);
    out += i == 0 ? "\n" : ",\n";
    out += "    {\n";
    out += "      \"id\": \"" + scene.id + "\",\n";
    out += "      \"width\": " + std::to_string(scene.width) + ",\n";
    out += "      \"height\": " + std::to_string(scene.height);
    if (scene.intrinsics) {
      out += ",\n      \"intrinsics\": {\"f\": " + format_double(scene.intrinsics->f) +
             ", \"cx\": " + format_double(scene.intrinsics->cx) +
             ", \"cy\": " + format_double(scene.intrinsics->cy) + '}';
    }
    out += ",\n      \"polygons\": [";
    for (std::size_t k = 0; k < scene.polygons.size(); ++k) {
      out += k == 0 ? "\n" : ",\n";
      append_polygon(out, scene.polygons[k], "        ");
    }
    out += scene.polygons.empty() ? "]" : "\n      ]";
    out += "\n    }";
  }
  out += scenes.empty() ? "]" : "\n  ]";
  out += "\n}\n";
  return out;
}

void write_scene_file(const std::string& path, std::span<const Scene> scenes) {
  write_text_file(path, scenes_to_json(scenes));
}

SynthJob parse_synth_config_json(const std::string& text, const ParseOptions& opts) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("synth config: top level must be an object");
  check_keys(root,
             {"seed", "n_scenes", "polygons_per_scene", "group_weights", "center_range",
              "radius_range", "image", "axis_mode", "focal", "noise"},
             "synth config", opts.strict);

  SynthJob job;
  SynthConfig& cfg = job.synth;

  if (root.contains("seed")) {
    const json& s = root["seed"];
    if (!s.is_number_integer()) throw ConfigError("synth config.seed: expected an integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (root.contains("n_scenes")) {
    cfg.n_scenes = parse_positive_int(root["n_scenes"], "synth config.n_scenes");
  }
  if (root.contains("polygons_per_scene")) {
    const json& r = root["polygons_per_scene"];
    if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() ||
        !r[1].is_number_integer()) {
      throw ConfigError("synth config.polygons_per_scene: expected [min, max] integers");
    }
    cfg.min_polygons = r[0].get<int>();
    cfg.max_polygons = r[1].get<int>();
  }
  if (root.contains("group_weights")) {
    const json& w = root["group_weights"];
    if (w.is_string()) {
      const std::string preset = w.get<std::string>();
      if (preset == "uniform") {
        cfg.group_weights.clear();
      } else if (preset == "skewed") {
        cfg.group_weights = SynthConfig::skewed_weights();
      } else {
        throw ConfigError("synth config.group_weights: unknown preset '" + preset + "'");
      }
    } else if (w.is_object()) {
      for (const auto& item : w.items()) {
        cfg.group_weights[parse_group(item.key())] =
            parse_number(item.value(), "synth config.group_weights." + item.key());
      }
    } else {
      throw ConfigError("synth config.group_weights: expected an object or preset name");
    }
  }
  if (root.contains("center_range")) {
    const json& c = root["center_range"];
    if (!c.is_object()) throw ConfigError("synth config.center_range: expected an object");
    check_keys(c, {"x", "y", "z"}, "synth config.center_range", opts.strict);
    auto read_range = [&](const char* key, double& lo, double& hi) {
      if (!c.contains(key)) return;
      const json& r = c[key];
      const std::string path = std::string("synth config.center_range.") + key;
      if (!r.is_array() || r.size() != 2) throw ConfigError(path + ": expected [lo, hi]");
      lo = parse_number(r[0], path + "[0]");
      hi = parse_number(r[1], path + "[1]");
    };
    read_range("x", cfg.x_min, cfg.x_max);
    read_range("y", cfg.y_min, cfg.y_max);
    read_range("z", cfg.z_min, cfg.z_max);
  }
  if (root.contains("radius_range")) {
    const json& r = root["radius_range"];
    if (!r.is_array() || r.size() != 2) {
      throw ConfigError("synth config.radius_range: expected [lo, hi]");
    }
    cfg.radius_min = parse_number(r[0], "synth config.radius_range[0]");
    cfg.radius_max = parse_number(r[1], "synth config.radius_range[1]");
  }
  if (root.contains("image")) {
    const json& im = root["image"];
    if (!im.is_object()) throw ConfigError("synth config.image: expected an object");
    check_keys(im, {"width", "height"}, "synth config.image", opts.strict);
    cfg.image_width =
        parse_positive_int(require_field(im, "width", "synth config.image"), "synth config.image.width");
    cfg.image_height = parse_positive_int(require_field(im, "height", "synth config.image"),
                                          "synth config.image.height");
  }
  if (root.contains("axis_mode")) {
    const json& m = root["axis_mode"];
    if (!m.is_string()) throw ConfigError("synth config.axis_mode: expected a string");
    const std::string mode = m.get<std::string>();
    if (mode == "random") {
      cfg.axis_mode = SynthConfig::AxisMode::Random;
    } else if (mode == "frontoparallel") {
      cfg.axis_mode = SynthConfig::AxisMode::Frontoparallel;
    } else {
      throw ConfigError("synth config.axis_mode: expected 'random' or 'frontoparallel'");
    }
  }
  if (root.contains("focal")) {
    const json& f = root["focal"];
    if (!f.is_object()) throw ConfigError("synth config.focal: expected an object");
    check_keys(f, {"mode", "f", "range", "normalized_clip"}, "synth config.focal", opts.strict);
    const json& mode = require_field(f, "mode", "synth config.focal");
    if (!mode.is_string()) throw ConfigError("synth config.focal.mode: expected a string");
    const std::string m = mode.get<std::string>();
    if (m == "fixed") {
      cfg.focal_mode = SynthConfig::FocalMode::Fixed;
      if (f.contains("f")) cfg.focal = parse_number(f["f"], "synth config.focal.f");
    } else if (m == "sampled") {
      cfg.focal_mode = SynthConfig::FocalMode::Sampled;
      if (f.contains("range")) {
        const json& r = f["range"];
        if (!r.is_array() || r.size() != 2) {
          throw ConfigError("synth config.focal.range: expected [lo, hi]");
        }
        cfg.focal_range_min = parse_number(r[0], "synth config.focal.range[0]");
        cfg.focal_range_max = parse_number(r[1], "synth config.focal.range[1]");
      }
      if (f.contains("normalized_clip")) {
        const json& r = f["normalized_clip"];
        if (!r.is_array() || r.size() != 2) {
          throw ConfigError("synth config.focal.normalized_clip: expected [lo, hi]");
        }
        cfg.focal_clip_lo = parse_number(r[0], "synth config.focal.normalized_clip[0]");
        cfg.focal_clip_hi = parse_number(r[1], "synth config.focal.normalized_clip[1]");
      }
    } else {
      throw ConfigError("synth config.focal.mode: expected 'fixed' or 'sampled'");
    }
  }
  if (root.contains("noise") && !root["noise"].is_null()) {
    const json& n = root["noise"];
    if (!n.is_object()) throw ConfigError("synth config.noise: expected an object");
    check_keys(n,
               {"center_sigma", "vertex_sigma", "axis_jitter_sigma", "drop_rate",
                "spurious_rate", "score_model"},
               "synth config.noise", opts.strict);
    NoiseSpec noise;
    auto read = [&](const char* key, double& dst) {
      if (n.contains(key)) dst = parse_number(n[key], std::string("synth config.noise.") + key);
    };
    read("center_sigma", noise.center_sigma);
    read("vertex_sigma", noise.vertex_sigma);
    read("axis_jitter_sigma", noise.axis_jitter_sigma);
    read("drop_rate", noise.drop_rate);
    read("spurious_rate", noise.spurious_rate);
    if (n.contains("score_model")) {
      const json& sm = n["score_model"];
      if (!sm.is_object()) throw ConfigError("synth config.noise.score_model: expected an object");
      check_keys(sm, {"max_score", "decay"}, "synth config.noise.score_model", opts.strict);
      if (sm.contains("max_score")) {
        noise.score_model.max_score =
            parse_number(sm["max_score"], "synth config.noise.score_model.max_score");
      }
      if (sm.contains("decay")) {
        noise.score_model.decay =
            parse_number(sm["decay"], "synth config.noise.score_model.decay");
      }
    }
    noise.validate();
    job.noise = noise;
  }

  cfg.validate();
  return job;
}

SynthJob read_synth_config(const std::string& path, const ParseOptions& opts) {
  return parse_synth_config_json(read_text_file(path), opts);
}

std::string report_to_json(const EvalReport& report) {
  const MatchConfig defaults;
  std::string out;
  out += "{\n";
  out += "  \"report_version\": 1,\n";
  out += "  \"protocol\": {\n";
  out += "    \"tau\": " + format_double(report.config.tau) + ",\n";
  out += "    \"dilation_px\": " + std::to_string(report.config.dilation_px) + ",\n";
  out += "    \"n_thresholds\": " + std::to_string(report.config.n_thresholds) + ",\n";
  out += "    \"reg_weight\": " + format_double(defaults.reg_weight) + ",\n";
  out += "    \"default_focal\": " + format_double(kDefaultFocalLength) + "\n";
  out += "  },\n";
  out += "  \"counts\": {\"scenes\": " + std::to_string(report.n_scenes) +
         ", \"gt_polygons\": " + std::to_string(report.n_gt_polygons) +
         ", \"pred_polygons\": " + std::to_string(report.n_pred_polygons) + "},\n";

  auto append_ap = [&out](const char* name, const APResult& ap) {
    out += "  \"";
    out += name;
    out += "\": {\n    \"per_group\": {";
    bool first = true;
    for (const auto& [g, gr] : ap.per_group) {
      if (!first) out += ", ";
      first = false;
      out += '"' + std::string(group_name(g)) + "\": {\"ap\": " + format_double(gr.ap) +
             ", \"gt\": " + std::to_string(gr.n_gt) + ", \"pred\": " + std::to_string(gr.n_pred) +
             '}';
    }
    out += "},\n    \"mean\": " + format_double(ap.mean) + "\n  }";
  };
  append_ap("center_ap", report.center);
  out += ",\n";
  append_ap("vertex_ap", report.vertex);
  if (report.f1) {
    out += ",\n  \"max_f1\": " + format_double(*report.f1);
  }
  out += "\n}\n";
  return out;
}

std::string report_to_text(const EvalReport& report) {
  const MatchConfig defaults;
  char line[160];
  std::string out;
  out += "rotsym evaluation report\n";
  std::snprintf(line, sizeof(line), "  scenes: %ld  gt polygons: %ld  predictions: %ld\n",
                report.n_scenes, report.n_gt_polygons, report.n_pred_polygons);
  out += line;
  std::snprintf(line, sizeof(line),
                "  protocol: tau=%g  dilation=%d px  thresholds=%d  reg_weight=%g  "
                "default_focal=%g\n",
                report.config.tau, report.config.dilation_px, report.config.n_thresholds,
                defaults.reg_weight, kDefaultFocalLength);
  out += line;

  auto append_table = [&](const char* title, const APResult& ap) {
    out += title;
    out += "\n    group      AP        gt      pred\n";
    for (const auto& [g, gr] : ap.per_group) {
      std::snprintf(line, sizeof(line), "    %-6s %9.6f %7ld %9ld\n",
                    std::string(group_name(g)).c_str(), gr.ap, gr.n_gt, gr.n_pred);
      out += line;
    }
    std::snprintf(line, sizeof(line), "    mean   %9.6f\n", ap.mean);
    out += line;
  };
  append_table("  center AP:", report.center);
  append_table("  vertex AP:", report.vertex);
  if (report.f1) {
    std::snprintf(line, sizeof(line), "  max F1: %.6f\n", *report.f1);
    out += line;
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw ConfigError("read failure: " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open file for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw ConfigError("write failure: " + path);
}

}  // namespace rotsym
