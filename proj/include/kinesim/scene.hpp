#ifndef KINESIM_SCENE_HPP_
#define KINESIM_SCENE_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kinesim/kinematics.hpp"

namespace kinesim {

/// sRGB, 0-255 per channel.
struct Color {
  std::uint8_t r{200};
  std::uint8_t g{200};
  std::uint8_t b{200};
  bool operator==(const Color&) const = default;
};

struct Material {
  Color color{};
  double metalness{0.0};
  double roughness{0.5};
  double opacity{1.0};
  bool operator==(const Material&) const = default;
};

struct Box {
  double width{0.1};
  double height{0.1};
  double depth{0.1};
  bool operator==(const Box&) const = default;
};

struct Ball {
  double radius{0.1};
  bool operator==(const Ball&) const = default;
};

struct Cylinder {
  double radius{0.1};
  double height{0.2};
  bool operator==(const Cylinder&) const = default;
};

struct Cone {
  double radius{0.1};
  double height{0.2};
  bool operator==(const Cone&) const = default;
};

/// Coordinate axes triad.
struct Frame {
  double axis_length{0.2};
  bool operator==(const Frame&) const = default;
};

struct PointCloud {
  std::vector<Vec3> points;
  double point_size{0.01};
  bool operator==(const PointCloud&) const = default;
};

struct SceneObject;

/// Children carry their offset relative to the group in `initial_pose`.
struct Group {
  std::vector<SceneObject> children;
  bool operator==(const Group&) const;
};

using Shape = std::variant<Box, Ball, Cylinder, Cone, Frame, PointCloud, Group>;

struct SceneObject {
  std::string id;
  Shape shape{Ball{}};
  Material material{};
  Htm initial_pose{Htm::Identity()};
  bool operator==(const SceneObject&) const = default;
};

inline bool Group::operator==(const Group& o) const { return children == o.children; }

/// Name of a shape alternative as used on disk ("box", "ball", ...).
std::string_view shape_name(const Shape& shape);

enum class LinkStyle { primitive_chain };

struct RobotVisual {
  std::string id;
  RobotModel model;
  LinkStyle link_style{LinkStyle::primitive_chain};
  Material material{};
  bool operator==(const RobotVisual&) const = default;
};

struct PoseKey {
  double t{0};
  Htm pose{Htm::Identity()};
  bool operator==(const PoseKey&) const = default;
};

struct ConfigKey {
  double t{0};
  VecX q;
  bool operator==(const ConfigKey& o) const {
    return t == o.t && q.size() == o.q.size() && q == o.q;
  }
};

/// Keys of one object, strictly increasing in time. Pose and configuration
/// keys never share a track.
struct Track {
  std::variant<std::vector<PoseKey>, std::vector<ConfigKey>> keys;

  bool is_pose() const { return keys.index() == 0; }
  std::size_t size() const;
  double last_time() const;
  bool operator==(const Track&) const = default;
};

struct Camera {
  Vec3 position{3.0, 3.0, 2.0};
  Vec3 look_at{0.0, 0.0, 0.0};
  Vec3 up{0.0, 0.0, 1.0};
  double fov_deg{50.0};
  bool operator==(const Camera&) const = default;
};

struct Viewport {
  int width{960};
  int height{540};
  bool operator==(const Viewport&) const = default;
};

/// Everything a viewer plays back. Objects, robots and tracks are keyed by id
/// so that documents built in different orders compare (and serialize) equal.
class SceneDocument {
 public:
  static constexpr std::string_view kVersion = "kinesim-doc/1";

  const Color& background() const { return background_; }
  void set_background(Color c) { background_ = c; }
  double ambient_light_intensity() const { return ambient_; }
  void set_ambient_light_intensity(double v);
  const Camera& camera() const { return camera_; }
  void set_camera(const Camera& camera);
  const Viewport& viewport() const { return viewport_; }
  void set_viewport(const Viewport& viewport);
  bool grid_visible() const { return grid_visible_; }
  void set_grid_visible(bool v) { grid_visible_ = v; }

  double duration() const { return duration_; }
  /// Must cover every key.
  void set_duration(double d);

  const std::map<std::string, SceneObject>& objects() const { return objects_; }
  const std::map<std::string, RobotVisual>& robots() const { return robots_; }
  const std::map<std::string, Track>& tracks() const { return tracks_; }

  /// Throws DuplicateId if the id (or any nested child id) is taken.
  void add_object(SceneObject obj);
  void add_robot(RobotVisual robot);

  /// Inserts a key in time order; an existing key at the same time is replaced.
  void set_pose_at(const std::string& id, double t, const Htm& pose);
  void set_config_at(const std::string& robot_id, double t, const VecX& q);

  bool contains(const std::string& id) const;
  const SceneObject& object(const std::string& id) const;
  const RobotVisual& robot(const std::string& id) const;
  /// Leaves of the object tree (groups expanded); robots not included.
  std::size_t leaf_count() const;

  bool operator==(const SceneDocument&) const = default;

 private:
  void claim_ids(const SceneObject& obj, std::vector<std::string>& ids) const;

  Color background_{255, 255, 255};
  double ambient_{1.0};
  Camera camera_{};
  Viewport viewport_{};
  bool grid_visible_{true};
  double duration_{0.0};
  std::map<std::string, SceneObject> objects_;
  std::map<std::string, RobotVisual> robots_;
  std::map<std::string, Track> tracks_;
  std::vector<std::string> all_ids_;  // sorted; top-level, nested and robot ids
};

/// Ids must be non-empty, free of control characters and ':' (reserved for
/// robot link names in sampled pose maps).
bool is_valid_id(std::string_view id);
void validate_object(const SceneObject& obj);
/// Checks every document invariant; throws InvalidArgument on the first breach.
void validate(const SceneDocument& doc);

/// Sample-and-hold pose of `id` at time t: the last key with key_t <= t, or
/// the initial pose when no such key exists.
Htm pose_at(const SceneDocument& doc, const std::string& id, double t);
VecX config_at(const SceneDocument& doc, const std::string& robot_id, double t);

/// World pose of every renderable at time t. Group children appear under
/// their own ids; robots expand to "<id>:link0" ... "<id>:link<n>" and
/// "<id>:eef". Requires 0 <= t <= duration.
std::map<std::string, Htm> sample(const SceneDocument& doc, double t);

/// Link-name helpers for sampled robot poses.
std::string robot_link_key(const std::string& robot_id, std::size_t link);
std::string robot_eef_key(const std::string& robot_id);

}  // namespace kinesim

#endif  // KINESIM_SCENE_HPP_
