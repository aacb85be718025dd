#include "kinesim/serialization.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

namespace kinesim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// ---------------------------------------------------------------- writing

void write_string(std::string& out, std::string_view s) {
  static constexpr char kHex[] = "0123456789abcdef";
  out.push_back('"');
  for (const char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '<':
      case '>':
      case '&':
        out += "\\u00";
        out.push_back(kHex[c >> 4]);
        out.push_back(kHex[c & 15]);
        break;
      default:
        if (c < 0x20) {
          out += "\\u00";
          out.push_back(kHex[c >> 4]);
          out.push_back(kHex[c & 15]);
        } else {
          out.push_back(ch);
        }
    }
  }
  out.push_back('"');
}

void write_value(std::string& out, const Json& v) {
  switch (v.type()) {
    case Json::value_t::null: out += "null"; break;
    case Json::value_t::boolean: out += v.get<bool>() ? "true" : "false"; break;
    case Json::value_t::number_integer: out += std::to_string(v.get<std::int64_t>()); break;
    case Json::value_t::number_unsigned: out += std::to_string(v.get<std::uint64_t>()); break;
    case Json::value_t::number_float: out += format_number(v.get<double>()); break;
    case Json::value_t::string: write_string(out, v.get_ref<const std::string&>()); break;
    case Json::value_t::array: {
      out.push_back('[');
      bool first = true;
      for (const auto& e : v) {
        if (!first) out.push_back(',');
        first = false;
        write_value(out, e);
      }
      out.push_back(']');
      break;
    }
    case Json::value_t::object: {
      // std::map storage: keys already in byte order.
      out.push_back('{');
      bool first = true;
      for (const auto& [k, e] : v.items()) {
        if (!first) out.push_back(',');
        first = false;
        write_string(out, k);
        out.push_back(':');
        write_value(out, e);
      }
      out.push_back('}');
      break;
    }
    default: throw InvalidArgument("write_canonical: unsupported JSON value");
  }
}

Json vec3_value(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json color_value(const Color& c) {
  return Json::array({static_cast<double>(c.r), static_cast<double>(c.g), static_cast<double>(c.b)});
}

Json material_value(const Material& m) {
  return {{"color", color_value(m.color)},
          {"metalness", m.metalness},
          {"opacity", m.opacity},
          {"roughness", m.roughness}};
}

Json object_value(const SceneObject& obj);

Json shape_value(const Shape& shape) {
  Json out = std::visit(
      Overloaded{
          [](const Box& b) -> Json { return {{"width", b.width}, {"height", b.height}, {"depth", b.depth}}; },
          [](const Ball& b) -> Json { return {{"radius", b.radius}}; },
          [](const Cylinder& c) -> Json { return {{"radius", c.radius}, {"height", c.height}}; },
          [](const Cone& c) -> Json { return {{"radius", c.radius}, {"height", c.height}}; },
          [](const Frame& f) -> Json { return {{"axis_length", f.axis_length}}; },
          [](const PointCloud& p) -> Json {
            Json pts = Json::array();
            for (const Vec3& v : p.points) pts.push_back(vec3_value(v));
            return {{"points", std::move(pts)}, {"point_size", p.point_size}};
          },
          [](const Group& g) -> Json {
            Json children = Json::array();
            for (const SceneObject& c : g.children) children.push_back(object_value(c));
            return {{"children", std::move(children)}};
          },
      },
      shape);
  out["type"] = std::string(shape_name(shape));
  return out;
}

Json object_value(const SceneObject& obj) {
  return {{"id", obj.id},
          {"material", material_value(obj.material)},
          {"pose", htm_value(obj.initial_pose)},
          {"shape", shape_value(obj.shape)}};
}

Json mat3_value(const Mat3& m) {
  Json out = Json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.push_back(m(r, c));
  return out;
}

Json model_value(const RobotModel& m) {
  Json links = Json::array();
  for (const DhLink& l : m.links()) {
    links.push_back({{"theta", l.theta_off},
                     {"d", l.d_off},
                     {"alpha", l.alpha},
                     {"a", l.a},
                     {"joint", l.kind == JointKind::revolute ? "revolute" : "prismatic"},
                     {"q_min", l.q_min},
                     {"q_max", l.q_max}});
  }
  Json inertias = nullptr;
  if (m.inertias()) {
    inertias = Json::array();
    for (const LinkInertia& li : *m.inertias()) {
      inertias.push_back({{"mass", li.mass}, {"com", vec3_value(li.com)}, {"inertia", mat3_value(li.inertia)}});
    }
  }
  Json attached = Json::array();
  for (const Attachment& a : m.attached()) {
    attached.push_back({{"id", a.object_id}, {"grasp", htm_value(a.grasp)}, {"pose", htm_value(a.world_pose)}});
  }
  return {{"name", m.name()},   {"links", std::move(links)}, {"base", htm_value(m.base())},
          {"tool", htm_value(m.tool())}, {"inertias", std::move(inertias)}, {"q", vec_value(m.q())},
          {"attached", std::move(attached)}};
}

// ---------------------------------------------------------------- reading

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw SchemaError(path, what); }

const Json& require_object(const Json& v, const std::string& path, std::initializer_list<const char*> keys) {
  if (!v.is_object()) fail(path, "expected an object");
  for (const char* k : keys) {
    if (!v.contains(k)) fail(path + "." + k, "missing field");
  }
  for (const auto& [k, _] : v.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* want) { return k == want; })) {
      fail(path + "." + k, "unknown field");
    }
  }
  return v;
}

const Json& require_array(const Json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array");
  return v;
}

double number(const Json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "number out of range");
  return d;
}

std::string text(const Json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

bool flag(const Json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

Vec3 vec3_from(const Json& v, const std::string& path) {
  require_array(v, path);
  if (v.size() != 3) fail(path, "expected 3 numbers");
  return {number(v[0], at(path, 0)), number(v[1], at(path, 1)), number(v[2], at(path, 2))};
}

Color color_from(const Json& v, const std::string& path) {
  require_array(v, path);
  if (v.size() != 3) fail(path, "expected 3 channels");
  std::array<std::uint8_t, 3> ch{};
  for (std::size_t i = 0; i < 3; ++i) {
    const double c = number(v[i], at(path, i));
    if (c < 0 || c > 255 || c != std::floor(c)) fail(at(path, i), "channel must be an integer in [0, 255]");
    ch[i] = static_cast<std::uint8_t>(c);
  }
  return {ch[0], ch[1], ch[2]};
}

Material material_from(const Json& v, const std::string& path) {
  require_object(v, path, {"color", "metalness", "opacity", "roughness"});
  Material m;
  m.color = color_from(v["color"], path + ".color");
  m.metalness = number(v["metalness"], path + ".metalness");
  m.opacity = number(v["opacity"], path + ".opacity");
  m.roughness = number(v["roughness"], path + ".roughness");
  return m;
}

SceneObject object_from(const Json& v, const std::string& path, int depth);

Shape shape_from(const Json& v, const std::string& path, int depth) {
  if (!v.is_object() || !v.contains("type")) fail(path + ".type", "missing field");
  const std::string type = text(v["type"], path + ".type");
  auto n = [&](const char* key) { return number(v[key], path + "." + key); };
  if (type == "box") {
    require_object(v, path, {"type", "width", "height", "depth"});
    return Box{n("width"), n("height"), n("depth")};
  }
  if (type == "ball") {
    require_object(v, path, {"type", "radius"});
    return Ball{n("radius")};
  }
  if (type == "cylinder") {
    require_object(v, path, {"type", "radius", "height"});
    return Cylinder{n("radius"), n("height")};
  }
  if (type == "cone") {
    require_object(v, path, {"type", "radius", "height"});
    return Cone{n("radius"), n("height")};
  }
  if (type == "frame") {
    require_object(v, path, {"type", "axis_length"});
    return Frame{n("axis_length")};
  }
  if (type == "point_cloud") {
    require_object(v, path, {"type", "points", "point_size"});
    PointCloud pc;
    const std::string pp = path + ".points";
    require_array(v["points"], pp);
    for (std::size_t i = 0; i < v["points"].size(); ++i) pc.points.push_back(vec3_from(v["points"][i], at(pp, i)));
    pc.point_size = n("point_size");
    return pc;
  }
  if (type == "group") {
    require_object(v, path, {"type", "children"});
    if (depth > 64) fail(path, "groups nested too deeply");
    Group g;
    const std::string cp = path + ".children";
    require_array(v["children"], cp);
    for (std::size_t i = 0; i < v["children"].size(); ++i) {
      g.children.push_back(object_from(v["children"][i], at(cp, i), depth + 1));
    }
    return g;
  }
  fail(path + ".type", "unknown shape '" + type + "'");
}

SceneObject object_from(const Json& v, const std::string& path, int depth) {
  require_object(v, path, {"id", "material", "pose", "shape"});
  SceneObject obj;
  obj.id = text(v["id"], path + ".id");
  obj.material = material_from(v["material"], path + ".material");
  obj.initial_pose = htm_from_value(v["pose"], path + ".pose");
  obj.shape = shape_from(v["shape"], path + ".shape", depth);
  return obj;
}

Mat3 mat3_from(const Json& v, const std::string& path) {
  require_array(v, path);
  if (v.size() != 9) fail(path, "expected 9 numbers");
  Mat3 m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = number(v[i], at(path, i));
  return m;
}

RobotModel model_from(const Json& v, const std::string& path) {
  require_object(v, path, {"name", "links", "base", "tool", "inertias", "q", "attached"});
  std::vector<DhLink> links;
  const std::string lp = path + ".links";
  require_array(v["links"], lp);
  for (std::size_t i = 0; i < v["links"].size(); ++i) {
    const Json& l = v["links"][i];
    const std::string p = at(lp, i);
    require_object(l, p, {"theta", "d", "alpha", "a", "joint", "q_min", "q_max"});
    DhLink link;
    link.theta_off = number(l["theta"], p + ".theta");
    link.d_off = number(l["d"], p + ".d");
    link.alpha = number(l["alpha"], p + ".alpha");
    link.a = number(l["a"], p + ".a");
    const std::string joint = text(l["joint"], p + ".joint");
    if (joint == "revolute") {
      link.kind = JointKind::revolute;
    } else if (joint == "prismatic") {
      link.kind = JointKind::prismatic;
    } else {
      fail(p + ".joint", "expected \"revolute\" or \"prismatic\"");
    }
    link.q_min = number(l["q_min"], p + ".q_min");
    link.q_max = number(l["q_max"], p + ".q_max");
    links.push_back(link);
  }
  std::optional<std::vector<LinkInertia>> inertias;
  if (!v["inertias"].is_null()) {
    const std::string ip = path + ".inertias";
    require_array(v["inertias"], ip);
    inertias.emplace();
    for (std::size_t i = 0; i < v["inertias"].size(); ++i) {
      const Json& e = v["inertias"][i];
      const std::string p = at(ip, i);
      require_object(e, p, {"mass", "com", "inertia"});
      inertias->push_back({number(e["mass"], p + ".mass"), vec3_from(e["com"], p + ".com"),
                           mat3_from(e["inertia"], p + ".inertia")});
    }
  }
  const std::string name = text(v["name"], path + ".name");
  const Htm base = htm_from_value(v["base"], path + ".base");
  const Htm tool = htm_from_value(v["tool"], path + ".tool");
  const VecX q = vec_from_value(v["q"], path + ".q");

  RobotModel model = [&] {
    try {
      return RobotModel(name, std::move(links), base, tool, std::move(inertias));
    } catch (const SchemaError&) {
      throw;
    } catch (const Error& e) {
      fail(path, e.what());
    }
  }();
  try {
    model.set_config(q);
  } catch (const Error& e) {
    fail(path + ".q", e.what());
  }
  const std::string ap = path + ".attached";
  require_array(v["attached"], ap);
  for (std::size_t i = 0; i < v["attached"].size(); ++i) {
    const Json& a = v["attached"][i];
    const std::string p = at(ap, i);
    require_object(a, p, {"id", "grasp", "pose"});
    Attachment att{text(a["id"], p + ".id"), htm_from_value(a["grasp"], p + ".grasp"),
                   htm_from_value(a["pose"], p + ".pose")};
    try {
      model.restore_attachment(att);
    } catch (const Error& e) {
      fail(p, e.what());
    }
  }
  return model;
}

// Runs a document mutation, reporting library errors against `path`.
template <class F>
void apply(const std::string& path, F&& f) {
  try {
    f();
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------- public

std::string format_number(double v) {
  if (!std::isfinite(v)) throw InvalidArgument("cannot write a non-finite number as JSON");
  if (v == 0) return "0";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string write_canonical(const Json& value) {
  std::string out;
  write_value(out, value);
  return out;
}

Json htm_value(const Htm& h) {
  Json out = Json::array();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out.push_back(h(r, c));
  return out;
}

Htm htm_from_value(const Json& v, const std::string& path) {
  require_array(v, path);
  if (v.size() != 16) fail(path, "expected 16 numbers (row-major 4x4)");
  Htm h;
  for (int i = 0; i < 16; ++i) h(i / 4, i % 4) = number(v[i], at(path, i));
  if (!is_valid_htm(h)) fail(path, "not a rigid transform");
  return h;
}

Json vec_value(const VecX& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

VecX vec_from_value(const Json& v, const std::string& path) {
  require_array(v, path);
  VecX out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = number(v[i], at(path, i));
  return out;
}

Json document_value(const SceneDocument& doc) {
  Json objects = Json::array();
  for (const auto& [id, obj] : doc.objects()) objects.push_back(object_value(obj));
  Json robots = Json::array();
  for (const auto& [id, r] : doc.robots()) {
    robots.push_back({{"id", r.id},
                      {"link_style", "primitive_chain"},
                      {"material", material_value(r.material)},
                      {"model", model_value(r.model)}});
  }
  Json tracks = Json::array();
  for (const auto& [id, track] : doc.tracks()) {
    Json keys = Json::array();
    if (const auto* pk = std::get_if<std::vector<PoseKey>>(&track.keys)) {
      for (const PoseKey& k : *pk) keys.push_back({{"t", k.t}, {"pose", htm_value(k.pose)}});
      tracks.push_back({{"id", id}, {"kind", "pose"}, {"keys", std::move(keys)}});
    } else {
      for (const ConfigKey& k : std::get<std::vector<ConfigKey>>(track.keys)) {
        keys.push_back({{"t", k.t}, {"q", vec_value(k.q)}});
      }
      tracks.push_back({{"id", id}, {"kind", "config"}, {"keys", std::move(keys)}});
    }
  }
  const Camera& cam = doc.camera();
  return {{"_version", std::string(SceneDocument::kVersion)},
          {"ambient_light_intensity", doc.ambient_light_intensity()},
          {"background", color_value(doc.background())},
          {"camera",
           {{"position", vec3_value(cam.position)},
            {"look_at", vec3_value(cam.look_at)},
            {"up", vec3_value(cam.up)},
            {"fov_deg", cam.fov_deg}}},
          {"viewport",
           {{"width", static_cast<double>(doc.viewport().width)},
            {"height", static_cast<double>(doc.viewport().height)}}},
          {"grid_visible", doc.grid_visible()},
          {"duration", doc.duration()},
          {"objects", std::move(objects)},
          {"robots", std::move(robots)},
          {"tracks", std::move(tracks)}};
}

std::string to_json(const SceneDocument& doc) { return write_canonical(document_value(doc)); }

SceneDocument document_from_value(const Json& v) {
  if (!v.is_object()) fail("$", "expected an object");
  if (!v.contains("_version")) fail("$._version", "missing field");
  const std::string version = text(v["_version"], "$._version");
  if (version != SceneDocument::kVersion) {
    throw VersionError("unsupported document version '" + version + "' (expected '" +
                       std::string(SceneDocument::kVersion) + "')");
  }
  require_object(v, "$",
                 {"_version", "ambient_light_intensity", "background", "camera", "viewport", "grid_visible",
                  "duration", "objects", "robots", "tracks"});

  SceneDocument doc;
  doc.set_background(color_from(v["background"], "$.background"));
  const double ambient = number(v["ambient_light_intensity"], "$.ambient_light_intensity");
  apply("$.ambient_light_intensity", [&] { doc.set_ambient_light_intensity(ambient); });

  const Json& c = require_object(v["camera"], "$.camera", {"position", "look_at", "up", "fov_deg"});
  Camera cam;
  cam.position = vec3_from(c["position"], "$.camera.position");
  cam.look_at = vec3_from(c["look_at"], "$.camera.look_at");
  cam.up = vec3_from(c["up"], "$.camera.up");
  cam.fov_deg = number(c["fov_deg"], "$.camera.fov_deg");
  apply("$.camera", [&] { doc.set_camera(cam); });

  const Json& vp = require_object(v["viewport"], "$.viewport", {"width", "height"});
  auto pixels = [&](const char* key) {
    const std::string p = std::string("$.viewport.") + key;
    const double d = number(vp[key], p);
    if (d != std::floor(d) || d < 1 || d > 1e6) fail(p, "expected a positive integer");
    return static_cast<int>(d);
  };
  const Viewport viewport{pixels("width"), pixels("height")};
  apply("$.viewport", [&] { doc.set_viewport(viewport); });
  doc.set_grid_visible(flag(v["grid_visible"], "$.grid_visible"));

  require_array(v["objects"], "$.objects");
  for (std::size_t i = 0; i < v["objects"].size(); ++i) {
    const std::string p = at("$.objects", i);
    SceneObject obj = object_from(v["objects"][i], p, 0);
    apply(p, [&] { doc.add_object(std::move(obj)); });
  }

  require_array(v["robots"], "$.robots");
  for (std::size_t i = 0; i < v["robots"].size(); ++i) {
    const std::string p = at("$.robots", i);
    const Json& r = require_object(v["robots"][i], p, {"id", "link_style", "material", "model"});
    if (text(r["link_style"], p + ".link_style") != "primitive_chain") {
      fail(p + ".link_style", "expected \"primitive_chain\"");
    }
    RobotVisual rv{text(r["id"], p + ".id"), model_from(r["model"], p + ".model"), LinkStyle::primitive_chain,
                   material_from(r["material"], p + ".material")};
    apply(p, [&] { doc.add_robot(std::move(rv)); });
  }

  require_array(v["tracks"], "$.tracks");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < v["tracks"].size(); ++i) {
    const std::string p = at("$.tracks", i);
    const Json& tr = require_object(v["tracks"][i], p, {"id", "kind", "keys"});
    const std::string id = text(tr["id"], p + ".id");
    if (!seen.insert(id).second) fail(p + ".id", "second track for '" + id + "'");
    const std::string kind = text(tr["kind"], p + ".kind");
    if (kind != "pose" && kind != "config") fail(p + ".kind", "expected \"pose\" or \"config\"");
    const std::string kp = p + ".keys";
    require_array(tr["keys"], kp);
    double last = -1;
    for (std::size_t k = 0; k < tr["keys"].size(); ++k) {
      const std::string ep = at(kp, k);
      const Json& key = tr["keys"][k];
      require_object(key, ep, {"t", kind == "pose" ? "pose" : "q"});
      const double t = number(key["t"], ep + ".t");
      if (t <= last) fail(ep + ".t", "key times must be strictly increasing");
      last = t;
      if (kind == "pose") {
        const Htm pose = htm_from_value(key["pose"], ep + ".pose");
        apply(ep, [&] { doc.set_pose_at(id, t, pose); });
      } else {
        const VecX q = vec_from_value(key["q"], ep + ".q");
        apply(ep, [&] { doc.set_config_at(id, t, q); });
      }
    }
  }
  const double duration = number(v["duration"], "$.duration");
  apply("$.duration", [&] { doc.set_duration(duration); });
  return doc;
}

SceneDocument from_json(std::string_view bytes) {
  Json v;
  try {
    v = Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::exception& e) {
    fail("$", std::string("malformed JSON: ") + e.what());
  }
  return document_from_value(v);
}

// ---------------------------------------------------------------- HTML

namespace {

constexpr std::string_view kDataOpen = R"(<script type="application/json" id="kinesim-doc">)";

constexpr std::string_view kPageHead = R"(<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<meta name="viewport" content="width=device-width, initial-scale=1">
<title>kinesim scene</title>
<style>html,body{margin:0;height:100%;overflow:hidden;background:#fff;font:13px sans-serif}#kinesim-root{position:absolute;inset:0}</style>
</head>
<body>
<div id="kinesim-root"></div>
)";

constexpr std::string_view kPageTail = "</script>\n</body>\n</html>\n";

bool contains_ci(std::string_view hay, std::string_view needle) {
  auto it = std::search(hay.begin(), hay.end(), needle.begin(), needle.end(),
                        [](char a, char b) { return std::tolower(static_cast<unsigned char>(a)) == b; });
  return it != hay.end();
}

}  // namespace

std::string export_html(const SceneDocument& doc, std::string_view viewer_bundle) {
  if (viewer_bundle.empty()) throw InvalidArgument("export_html: viewer bundle is empty");
  if (contains_ci(viewer_bundle, "</script")) {
    throw InvalidArgument("export_html: viewer bundle contains a closing script tag");
  }
  const std::string json = to_json(doc);
  std::string out;
  out.reserve(kPageHead.size() + json.size() + viewer_bundle.size() + 256);
  out += kPageHead;
  out += kDataOpen;
  out += json;
  out += "</script>\n<script>\n";
  out += viewer_bundle;
  out += "\n";
  out += kPageTail;
  return out;
}

std::string embedded_document(std::string_view html) {
  const auto open = html.find(kDataOpen);
  if (open == std::string_view::npos) throw InvalidArgument("page has no kinesim-doc data block");
  const auto begin = open + kDataOpen.size();
  const auto end = html.find("</script>", begin);
  if (end == std::string_view::npos) throw InvalidArgument("unterminated kinesim-doc data block");
  return std::string(html.substr(begin, end - begin));
}

std::vector<std::string> find_external_references(std::string_view html) {
  std::string lower(html);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '@'; };

  // Tokens that, directly before a URL, make the browser fetch it.
  static const std::set<std::string> kAttrs = {"src", "href", "srcset", "poster", "data", "action", "background"};
  static const std::set<std::string> kCalls = {"url", "fetch", "importscripts", "import", "websocket",
                                               "eventsource", "worker", "sendbeacon", "open"};
  static const std::set<std::string> kBare = {"@import", "import", "from"};

  std::vector<std::string> found;
  for (std::size_t pos = lower.find("//"); pos != std::string::npos; pos = lower.find("//", pos + 2)) {
    std::size_t j = pos;
    // Optional scheme, e.g. "https:".
    if (j > 0 && lower[j - 1] == ':') {
      std::size_t s = j - 1;
      while (s > 0 && (std::isalnum(static_cast<unsigned char>(lower[s - 1])) || lower[s - 1] == '+' ||
                       lower[s - 1] == '.' || lower[s - 1] == '-')) {
        --s;
      }
      if (s == j - 1) continue;
      j = s;
    }
    // Opening quote (or none for unquoted attributes and url()).
    if (j > 0 && (lower[j - 1] == '"' || lower[j - 1] == '\'' || lower[j - 1] == '`')) --j;
    while (j > 0 && is_space(lower[j - 1])) --j;
    if (j == 0) continue;
    const char lead = lower[j - 1];
    std::size_t end = j;
    if (lead == '=' || lead == '(' || lead == ',') {
      --end;
      while (end > 0 && is_space(lower[end - 1])) --end;
    }
    std::size_t start = end;
    while (start > 0 && is_word(lower[start - 1])) --start;
    const std::string word = lower.substr(start, end - start);
    bool hit = false;
    if (lead == '=') hit = kAttrs.count(word) > 0;
    else if (lead == '(') hit = kCalls.count(word) > 0;
    else if (lead == ',') hit = false;
    else hit = kBare.count(word) > 0 && end == j;
    if (hit) {
      const std::size_t stop = std::min(html.size(), pos + 64);
      found.emplace_back(html.substr(start, stop - start));
    }
  }
  return found;
}

// ---------------------------------------------------------------- CSV

Shape parse_shape_spec(std::string_view spec) {
  std::vector<std::string_view> parts;
  for (std::size_t start = 0;;) {
    const auto colon = spec.find(':', start);
    parts.push_back(spec.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  std::vector<double> nums;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    double d = 0;
    const auto res = std::from_chars(parts[i].data(), parts[i].data() + parts[i].size(), d);
    if (res.ec != std::errc{} || res.ptr != parts[i].data() + parts[i].size() || !(d > 0) || !std::isfinite(d)) {
      throw InvalidArgument("shape spec '" + std::string(spec) + "': bad dimension '" + std::string(parts[i]) + "'");
    }
    nums.push_back(d);
  }
  const std::string_view kind = parts[0];
  auto want = [&](std::size_t n) {
    if (nums.size() != n) {
      throw InvalidArgument("shape spec '" + std::string(spec) + "': expected " + std::to_string(n) + " dimension(s)");
    }
  };
  if (kind == "ball") {
    if (nums.empty()) return Ball{0.1};
    want(1);
    return Ball{nums[0]};
  }
  if (kind == "box") {
    want(3);
    return Box{nums[0], nums[1], nums[2]};
  }
  if (kind == "cylinder") {
    want(2);
    return Cylinder{nums[0], nums[1]};
  }
  if (kind == "cone") {
    want(2);
    return Cone{nums[0], nums[1]};
  }
  if (kind == "frame") {
    want(1);
    return Frame{nums[0]};
  }
  throw InvalidArgument("shape spec '" + std::string(spec) + "': unknown shape");
}

SceneDocument import_trajectory_csv(std::string_view bytes, const Shape& shape) {
  std::vector<std::string_view> lines;
  for (std::size_t start = 0; start < bytes.size();) {
    auto nl = bytes.find('\n', start);
    if (nl == std::string_view::npos) nl = bytes.size();
    std::string_view line = bytes.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  // A trailing newline is not an empty row.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw CsvError(1, "missing header");

  std::size_t columns = 0;
  if (lines[0] == "t,id,x,y,z") {
    columns = 5;
  } else if (lines[0] == "t,id,x,y,z,qw,qx,qy,qz") {
    columns = 9;
  } else {
    throw CsvError(1, "header must be 't,id,x,y,z' or 't,id,x,y,z,qw,qx,qy,qz'");
  }

  struct Row {
    double t;
    Htm pose;
  };
  std::map<std::string, std::vector<Row>> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    std::vector<std::string_view> cells;
    for (std::size_t start = 0;;) {
      const auto comma = lines[li].find(',', start);
      cells.push_back(lines[li].substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cells.size() != columns) {
      throw CsvError(line_no, "expected " + std::to_string(columns) + " fields, got " + std::to_string(cells.size()));
    }
    std::array<double, 9> val{};
    for (std::size_t c = 0; c < columns; ++c) {
      if (c == 1) continue;
      const std::string_view cell = cells[c];
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), val[c]);
      if (cell.empty() || res.ec != std::errc{} || res.ptr != cell.data() + cell.size() || !std::isfinite(val[c])) {
        throw CsvError(line_no, "field " + std::to_string(c + 1) + " is not a number: '" + std::string(cell) + "'");
      }
    }
    const std::string id(cells[1]);
    if (!is_valid_id(id)) throw CsvError(line_no, "invalid id '" + id + "'");
    if (val[0] < 0) throw CsvError(line_no, "negative time");
    Htm pose = trn(val[2], val[3], val[4]);
    if (columns == 9) {
      Eigen::Quaterniond q(val[5], val[6], val[7], val[8]);
      if (q.norm() < 1e-9) throw CsvError(line_no, "zero quaternion");
      pose.topLeftCorner<3, 3>() = q.normalized().toRotationMatrix();
    }
    auto& seq = rows[id];
    if (!seq.empty() && !(val[0] > seq.back().t)) {
      throw CsvError(line_no, "time for '" + id + "' does not increase");
    }
    seq.push_back({val[0], pose});
  }

  SceneDocument doc;
  for (const auto& [id, seq] : rows) {
    doc.add_object({id, shape, {}, seq.front().pose});
    for (const Row& r : seq) doc.set_pose_at(id, r.t, r.pose);
  }
  return doc;
}

}  // namespace kinesim
