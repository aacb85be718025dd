#ifndef KINESIM_LIVE_BRIDGE_HPP_
#define KINESIM_LIVE_BRIDGE_HPP_

#include <map>
#include <string>
#include <vector>

#include "kinesim/kinematics.hpp"
#include "kinesim/scene.hpp"
#include "kinesim/serialization.hpp"

namespace kinesim {

/// Linear configuration-space motion of one robot, on the session clock.
struct LiveMotion {
  VecX from;
  VecX to;
  double start{0};
  double duration{0};
};

/// Everything the simulation loop owns. Robots start from the document's
/// models; once a command touches a robot its live configuration replaces
/// the document's configuration track.
struct LiveState {
  explicit LiveState(SceneDocument document);

  SceneDocument doc;
  std::map<std::string, RobotModel> robots;
  std::map<std::string, bool> overridden;
  std::map<std::string, LiveMotion> motions;
  double t{0};
  /// Advances with t while playing but is not clamped to the duration.
  double clock{0};
  bool playing{true};
  double motion_duration{2.0};
  IkParams ik{};
};

struct HandleResult {
  /// Exactly one ack or error for the sender.
  Json reply;
  /// True when the visible state changed (paused clients then get a frame).
  bool changed{false};
};

/// Applies one client message. Malformed input never throws; it produces an
/// error reply carrying whatever request id could be read (null otherwise).
HandleResult handle_text(LiveState& state, std::string_view text);
HandleResult handle(LiveState& state, const Json& msg);

/// Advances the timeline and running motions by dt while playing. The
/// timeline holds at the document duration.
void tick(LiveState& state, double dt);

/// Current configuration of a robot as broadcast in frames.
VecX live_config(const LiveState& state, const std::string& robot_id);

Json hello_message(const LiveState& state);
/// t, playing flag, the pose of every top-level object (attached objects
/// follow their robot) and the configuration of every robot.
Json frame_message(const LiveState& state);

}  // namespace kinesim

#endif  // KINESIM_LIVE_BRIDGE_HPP_
