#include "kinesim/scene.hpp"

#include <algorithm>
#include <cmath>

namespace kinesim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool positive(double v) { return std::isfinite(v) && v > 0; }
bool unit_interval(double v) { return v >= 0 && v <= 1; }

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

void validate_material(const Material& m, const std::string& where) {
  require(unit_interval(m.metalness), where + ": metalness must lie in [0, 1]");
  require(unit_interval(m.roughness), where + ": roughness must lie in [0, 1]");
  require(unit_interval(m.opacity), where + ": opacity must lie in [0, 1]");
}

void validate_shape(const Shape& shape, const std::string& where) {
  std::visit(Overloaded{
                 [&](const Box& b) {
                   require(positive(b.width) && positive(b.height) && positive(b.depth),
                           where + ": box dimensions must be positive");
                 },
                 [&](const Ball& b) { require(positive(b.radius), where + ": radius must be positive"); },
                 [&](const Cylinder& c) {
                   require(positive(c.radius) && positive(c.height),
                           where + ": cylinder dimensions must be positive");
                 },
                 [&](const Cone& c) {
                   require(positive(c.radius) && positive(c.height),
                           where + ": cone dimensions must be positive");
                 },
                 [&](const Frame& f) {
                   require(positive(f.axis_length), where + ": axis length must be positive");
                 },
                 [&](const PointCloud& p) {
                   require(positive(p.point_size), where + ": point size must be positive");
                   for (const auto& pt : p.points) {
                     require(pt.allFinite(), where + ": point coordinates must be finite");
                   }
                 },
                 [&](const Group& g) {
                   for (const auto& child : g.children) validate_object(child);
                 },
             },
             shape);
}

void collect_ids(const SceneObject& obj, std::vector<std::string>& out) {
  out.push_back(obj.id);
  if (const auto* g = std::get_if<Group>(&obj.shape)) {
    for (const auto& c : g->children) collect_ids(c, out);
  }
}

std::size_t count_leaves(const SceneObject& obj) {
  if (const auto* g = std::get_if<Group>(&obj.shape)) {
    std::size_t n = 0;
    for (const auto& c : g->children) n += count_leaves(c);
    return n;
  }
  return 1;
}

void expand(const SceneObject& obj, const Htm& pose, std::map<std::string, Htm>& out) {
  out[obj.id] = pose;
  if (const auto* g = std::get_if<Group>(&obj.shape)) {
    for (const auto& c : g->children) expand(c, pose * c.initial_pose, out);
  }
}

void require_time(double t) {
  if (!std::isfinite(t) || t < 0) throw InvalidArgument("key time must be finite and >= 0");
}

template <typename Key>
void insert_key(std::vector<Key>& keys, Key key) {
  auto it = std::lower_bound(keys.begin(), keys.end(), key.t,
                             [](const Key& k, double t) { return k.t < t; });
  if (it != keys.end() && it->t == key.t) {
    *it = std::move(key);
  } else {
    keys.insert(it, std::move(key));
  }
}

// Index of the last key with key.t <= t, or -1.
template <typename Key>
std::ptrdiff_t held_index(const std::vector<Key>& keys, double t) {
  auto it = std::upper_bound(keys.begin(), keys.end(), t,
                             [](double tt, const Key& k) { return tt < k.t; });
  return static_cast<std::ptrdiff_t>(it - keys.begin()) - 1;
}

}  // namespace

std::string_view shape_name(const Shape& shape) {
  return std::visit(Overloaded{
                        [](const Box&) { return std::string_view("box"); },
                        [](const Ball&) { return std::string_view("ball"); },
                        [](const Cylinder&) { return std::string_view("cylinder"); },
                        [](const Cone&) { return std::string_view("cone"); },
                        [](const Frame&) { return std::string_view("frame"); },
                        [](const PointCloud&) { return std::string_view("point_cloud"); },
                        [](const Group&) { return std::string_view("group"); },
                    },
                    shape);
}

std::size_t Track::size() const {
  return std::visit([](const auto& k) { return k.size(); }, keys);
}

double Track::last_time() const {
  return std::visit([](const auto& k) { return k.empty() ? 0.0 : k.back().t; }, keys);
}

bool is_valid_id(std::string_view id) {
  if (id.empty()) return false;
  return std::none_of(id.begin(), id.end(), [](char c) {
    return c == ':' || static_cast<unsigned char>(c) < 0x20 || c == 0x7f;
  });
}

void validate_object(const SceneObject& obj) {
  require(is_valid_id(obj.id), "invalid object id '" + obj.id + "'");
  const std::string where = "object '" + obj.id + "'";
  require(is_valid_htm(obj.initial_pose), where + ": pose is not a rigid transform");
  validate_material(obj.material, where);
  validate_shape(obj.shape, where);
}

void SceneDocument::set_ambient_light_intensity(double v) {
  require(v >= 0 && v <= 10, "ambient light intensity must lie in [0, 10]");
  ambient_ = v;
}

void SceneDocument::set_camera(const Camera& camera) {
  require(camera.position.allFinite() && camera.look_at.allFinite() && camera.up.allFinite(),
          "camera vectors must be finite");
  require(camera.up.norm() > 0, "camera up vector must be non-zero");
  require(camera.fov_deg > 0 && camera.fov_deg < 180, "camera fov must lie in (0, 180) degrees");
  camera_ = camera;
}

void SceneDocument::set_viewport(const Viewport& viewport) {
  require(viewport.width > 0 && viewport.height > 0, "viewport dimensions must be positive");
  viewport_ = viewport;
}

void SceneDocument::set_duration(double d) {
  require(std::isfinite(d) && d >= 0, "duration must be finite and >= 0");
  for (const auto& [id, track] : tracks_) {
    require(track.last_time() <= d, "duration shorter than the last key of '" + id + "'");
  }
  duration_ = d;
}

void SceneDocument::claim_ids(const SceneObject& obj, std::vector<std::string>& ids) const {
  collect_ids(obj, ids);
  std::vector<std::string> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DuplicateId("duplicate id inside object '" + obj.id + "'");
  }
  for (const auto& id : sorted) {
    if (std::binary_search(all_ids_.begin(), all_ids_.end(), id)) {
      throw DuplicateId("id '" + id + "' already present in the document");
    }
  }
}

void SceneDocument::add_object(SceneObject obj) {
  validate_object(obj);
  std::vector<std::string> ids;
  claim_ids(obj, ids);
  for (auto& id : ids) all_ids_.insert(std::lower_bound(all_ids_.begin(), all_ids_.end(), id), id);
  const std::string key = obj.id;
  objects_.emplace(key, std::move(obj));
}

void SceneDocument::add_robot(RobotVisual robot) {
  require(is_valid_id(robot.id), "invalid robot id '" + robot.id + "'");
  validate_material(robot.material, "robot '" + robot.id + "'");
  if (std::binary_search(all_ids_.begin(), all_ids_.end(), robot.id)) {
    throw DuplicateId("id '" + robot.id + "' already present in the document");
  }
  all_ids_.insert(std::lower_bound(all_ids_.begin(), all_ids_.end(), robot.id), robot.id);
  const std::string key = robot.id;
  robots_.emplace(key, std::move(robot));
}

void SceneDocument::set_pose_at(const std::string& id, double t, const Htm& pose) {
  require_time(t);
  if (!objects_.contains(id)) {
    throw UnknownId(robots_.contains(id) ? "'" + id + "' is a robot; use configuration keys"
                                         : "no top-level object '" + id + "'");
  }
  require(is_valid_htm(pose), "pose for '" + id + "' is not a rigid transform");
  auto [it, fresh] = tracks_.try_emplace(id, Track{std::vector<PoseKey>{}});
  auto* keys = std::get_if<std::vector<PoseKey>>(&it->second.keys);
  require(keys != nullptr, "track of '" + id + "' holds configuration keys");
  insert_key(*keys, PoseKey{t, pose});
  duration_ = std::max(duration_, t);
}

void SceneDocument::set_config_at(const std::string& robot_id, double t, const VecX& q) {
  require_time(t);
  auto robot = robots_.find(robot_id);
  if (robot == robots_.end()) throw UnknownId("no robot '" + robot_id + "'");
  robot->second.model.check_config(q);
  auto [it, fresh] = tracks_.try_emplace(robot_id, Track{std::vector<ConfigKey>{}});
  auto* keys = std::get_if<std::vector<ConfigKey>>(&it->second.keys);
  require(keys != nullptr, "track of '" + robot_id + "' holds pose keys");
  insert_key(*keys, ConfigKey{t, q});
  duration_ = std::max(duration_, t);
}

bool SceneDocument::contains(const std::string& id) const {
  return std::binary_search(all_ids_.begin(), all_ids_.end(), id);
}

const SceneObject& SceneDocument::object(const std::string& id) const {
  auto it = objects_.find(id);
  if (it == objects_.end()) throw UnknownId("no top-level object '" + id + "'");
  return it->second;
}

const RobotVisual& SceneDocument::robot(const std::string& id) const {
  auto it = robots_.find(id);
  if (it == robots_.end()) throw UnknownId("no robot '" + id + "'");
  return it->second;
}

std::size_t SceneDocument::leaf_count() const {
  std::size_t n = 0;
  for (const auto& [id, obj] : objects_) n += count_leaves(obj);
  return n;
}

void validate(const SceneDocument& doc) {
  require(doc.ambient_light_intensity() >= 0 && doc.ambient_light_intensity() <= 10,
          "ambient light intensity out of range");
  require(std::isfinite(doc.duration()) && doc.duration() >= 0, "invalid duration");
  std::vector<std::string> ids;
  for (const auto& [key, obj] : doc.objects()) {
    require(key == obj.id, "object key '" + key + "' differs from its id");
    validate_object(obj);
    collect_ids(obj, ids);
  }
  for (const auto& [key, robot] : doc.robots()) {
    require(key == robot.id && is_valid_id(key), "invalid robot id '" + key + "'");
    ids.push_back(key);
  }
  std::sort(ids.begin(), ids.end());
  require(std::adjacent_find(ids.begin(), ids.end()) == ids.end(), "duplicate ids in document");
  for (const auto& [id, track] : doc.tracks()) {
    const bool pose = track.is_pose();
    require(pose ? doc.objects().contains(id) : doc.robots().contains(id),
            "track '" + id + "' references no matching " + std::string(pose ? "object" : "robot"));
    require(track.size() > 0, "track '" + id + "' is empty");
    require(track.last_time() <= doc.duration(), "track '" + id + "' extends past the duration");
    std::visit(
        [&](const auto& keys) {
          for (std::size_t i = 0; i < keys.size(); ++i) {
            require(std::isfinite(keys[i].t) && keys[i].t >= 0, "track '" + id + "': bad key time");
            if (i > 0) require(keys[i - 1].t < keys[i].t, "track '" + id + "': times not increasing");
          }
        },
        track.keys);
    if (pose) {
      for (const auto& k : std::get<std::vector<PoseKey>>(track.keys)) {
        require(is_valid_htm(k.pose), "track '" + id + "': key pose is not rigid");
      }
    } else {
      const auto& model = doc.robots().at(id).model;
      for (const auto& k : std::get<std::vector<ConfigKey>>(track.keys)) {
        require(model.within_limits(k.q), "track '" + id + "': key outside joint limits");
      }
    }
  }
}

Htm pose_at(const SceneDocument& doc, const std::string& id, double t) {
  const SceneObject& obj = doc.object(id);
  auto it = doc.tracks().find(id);
  if (it == doc.tracks().end()) return obj.initial_pose;
  const auto& keys = std::get<std::vector<PoseKey>>(it->second.keys);
  const auto i = held_index(keys, t);
  return i < 0 ? obj.initial_pose : keys[static_cast<std::size_t>(i)].pose;
}

VecX config_at(const SceneDocument& doc, const std::string& robot_id, double t) {
  const RobotVisual& robot = doc.robot(robot_id);
  auto it = doc.tracks().find(robot_id);
  if (it == doc.tracks().end()) return robot.model.q();
  const auto& keys = std::get<std::vector<ConfigKey>>(it->second.keys);
  const auto i = held_index(keys, t);
  return i < 0 ? robot.model.q() : keys[static_cast<std::size_t>(i)].q;
}

std::string robot_link_key(const std::string& robot_id, std::size_t link) {
  return robot_id + ":link" + std::to_string(link);
}

std::string robot_eef_key(const std::string& robot_id) { return robot_id + ":eef"; }

std::map<std::string, Htm> sample(const SceneDocument& doc, double t) {
  if (!(t >= 0 && t <= doc.duration())) {
    throw RangeError("sample time " + std::to_string(t) + " outside [0, " +
                     std::to_string(doc.duration()) + "]");
  }
  std::map<std::string, Htm> out;
  for (const auto& [id, obj] : doc.objects()) expand(obj, pose_at(doc, id, t), out);
  for (const auto& [id, robot] : doc.robots()) {
    const GeometricJacobian chain = jac_geo(robot.model, config_at(doc, id, t));
    for (std::size_t i = 0; i < chain.frames.size(); ++i) out[robot_link_key(id, i)] = chain.frames[i];
    out[robot_eef_key(id)] = chain.eef;
  }
  return out;
}

}  // namespace kinesim
