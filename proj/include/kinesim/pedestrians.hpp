#ifndef KINESIM_PEDESTRIANS_HPP_
#define KINESIM_PEDESTRIANS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kinesim/linalg.hpp"
#include "kinesim/scene.hpp"

namespace kinesim {

/// Social-force coefficients. Planar dynamics on z = 0.
struct SfmParams {
  double relax_time{0.5};          // tau, s
  double repulsion_strength{2000};  // A, N
  double repulsion_range{0.08};     // B, m
  double body_stiffness{0};         // k, N/m; 0 disables the contact term
  double wall_strength{2000};       // A_w, N
  double wall_range{0.08};          // B_w, m
  double desired_speed_default{1.0};
  double mass_default{80.0};
  double max_speed_factor{1.3};

  void validate() const;
};

struct Pedestrian {
  std::string id;
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
  double radius{0.25};
  double mass{80.0};
  double desired_speed{1.0};
  std::vector<Vec3> waypoints;
  std::size_t waypoint_index{0};
  bool active{true};

  bool operator==(const Pedestrian&) const = default;
};

struct WallSegment {
  Vec3 p0{Vec3::Zero()};
  Vec3 p1{Vec3::UnitX()};
  bool operator==(const WallSegment&) const = default;
};

struct Exit {
  WallSegment segment;
  bool absorbing{true};
  bool operator==(const Exit&) const = default;
};

struct CrowdWorld {
  std::vector<Pedestrian> pedestrians;
  std::vector<WallSegment> walls;
  std::vector<Exit> exits;
  SfmParams params{};
  double t{0};

  std::size_t active_count() const;
};

/// Waypoint-arrival radius, m.
inline constexpr double kWaypointReach = 0.3;

/// Closest point of the segment to p.
Vec3 closest_point(const WallSegment& w, const Vec3& p);
/// True if segment a0-a1 and segment b0-b1 intersect (planar, z ignored).
bool segments_cross(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1);

/// Total social force on `ped`: goal relaxation, pairwise exponential
/// repulsion (+ optional body contact) and wall repulsion.
Vec3 social_force(const Pedestrian& ped, const CrowdWorld& world);

/// One semi-implicit Euler step for all active pedestrians, computed from the
/// forces at the start of the step.
void step(CrowdWorld& world, double dt);

struct RoomSpec {
  double width{8.0};
  double height{8.0};
};

/// Rectangular room [0, width] x [0, height] with four wall segments. The
/// x = width wall stops door_width short of the top corner; that gap is the
/// absorbing exit.
CrowdWorld make_evacuation(std::size_t n, RoomSpec room, double door_width, std::uint64_t seed,
                           const SfmParams& params = {});

struct ExitEvent {
  std::string id;
  double t{0};
};

struct CrowdRecording {
  /// Per-pedestrian keys, t = 0 first.
  std::map<std::string, std::vector<PoseKey>> tracks;
  /// In the order pedestrians left the room.
  std::vector<ExitEvent> exits;
  double t_end{0};
};

/// Keyframe stride used by the evacuation demo: one key per 0.05 s at
/// dt = 0.01, which keeps the exported page well under 5 MB.
inline constexpr std::size_t kDefaultRecordStride = 5;

/// Runs `step` until t_end, emitting a keyframe for every active pedestrian
/// every `stride` steps (including t = 0).
CrowdRecording record_crowd(CrowdWorld& world, double dt, double t_end, std::size_t stride);

/// Scene document with one cylinder per pedestrian, boxes for the walls and
/// the recorded tracks.
SceneDocument crowd_document(const CrowdWorld& initial, const CrowdRecording& recording);

}  // namespace kinesim

#endif  // KINESIM_PEDESTRIANS_HPP_
