#include "kinesim/live_bridge.hpp"

#include <algorithm>
#include <cmath>

namespace kinesim {

namespace {

Json ack(const Json& id) { return {{"type", "ack"}, {"request_id", id}, {"ok", true}}; }

Json error_reply(const Json& id, const std::string& message) {
  return {{"type", "error"}, {"request_id", id}, {"message", message}};
}

// Reply-building failure inside a request: becomes the error message.
struct Reject {
  std::string message;
};

const Json& field(const Json& msg, const char* key) {
  if (!msg.contains(key)) throw Reject{std::string("missing field '") + key + "'"};
  return msg[key];
}

std::string robot_field(const LiveState& s, const Json& msg) {
  const Json& v = field(msg, "robot");
  if (!v.is_string()) throw Reject{"'robot' must be a string"};
  const std::string id = v.get<std::string>();
  if (!s.robots.count(id)) throw Reject{"unknown robot '" + id + "'"};
  return id;
}

// First touch hands the robot over from its document track to live control.
RobotModel& take_over(LiveState& s, const std::string& id) {
  RobotModel& model = s.robots.at(id);
  if (!s.overridden[id]) {
    model.set_config(config_at(s.doc, id, s.t));
    s.overridden[id] = true;
  }
  return model;
}

VecX config_field(const Json& v, const RobotModel& model, const char* name) {
  VecX q;
  try {
    q = vec_from_value(v, name);
  } catch (const SchemaError& e) {
    throw Reject{e.what()};
  }
  if (q.size() != static_cast<Eigen::Index>(model.dof())) {
    throw Reject{std::string(name) + ": expected " + std::to_string(model.dof()) + " joint values"};
  }
  try {
    model.check_config(q);
  } catch (const JointLimitError& e) {
    throw Reject{e.what()};
  }
  return q;
}

}  // namespace

LiveState::LiveState(SceneDocument document) : doc(std::move(document)) {
  for (const auto& [id, rv] : doc.robots()) {
    robots.emplace(id, rv.model);
    overridden[id] = false;
  }
}

VecX live_config(const LiveState& s, const std::string& robot_id) {
  auto it = s.overridden.find(robot_id);
  if (it == s.overridden.end()) throw UnknownId("no robot '" + robot_id + "'");
  return it->second ? s.robots.at(robot_id).q() : config_at(s.doc, robot_id, s.t);
}

HandleResult handle_text(LiveState& state, std::string_view text) {
  Json msg;
  try {
    msg = Json::parse(text.begin(), text.end());
  } catch (const Json::exception&) {
    return {error_reply(nullptr, "malformed JSON"), false};
  }
  return handle(state, msg);
}

HandleResult handle(LiveState& s, const Json& msg) {
  if (!msg.is_object()) return {error_reply(nullptr, "message must be a JSON object"), false};
  const Json id = msg.contains("request_id") ? msg["request_id"] : Json(nullptr);
  if (!id.is_string() && !id.is_number_integer() && !id.is_number_unsigned()) {
    return {error_reply(nullptr, "missing or invalid request_id"), false};
  }
  if (!msg.contains("type") || !msg["type"].is_string()) return {error_reply(id, "missing message type"), false};
  const std::string type = msg["type"].get<std::string>();

  try {
    if (type == "set_config") {
      const std::string robot = robot_field(s, msg);
      const VecX q = config_field(field(msg, "q"), s.robots.at(robot), "q");
      RobotModel& model = take_over(s, robot);
      s.motions.erase(robot);
      model.set_config(q);
      return {ack(id), true};
    }
    if (type == "move_to_pose") {
      const std::string robot = robot_field(s, msg);
      const Json& space_v = field(msg, "space");
      const std::string space = space_v.is_string() ? space_v.get<std::string>() : "";
      VecX goal;
      if (space == "joint") {
        goal = config_field(field(msg, "target"), s.robots.at(robot), "target");
      } else if (space == "task") {
        Htm target;
        try {
          target = htm_from_value(field(msg, "target"), "target");
        } catch (const SchemaError& e) {
          throw Reject{e.what()};
        }
        IkParams params = s.ik;
        if (msg.contains("ik_mode")) {
          const Json& m = msg["ik_mode"];
          if (m == "position") params.task = IkTask::position;
          else if (m == "pose") params.task = IkTask::pose;
          else throw Reject{"ik_mode must be \"pose\" or \"position\""};
        }
        const VecX start = live_config(s, robot);
        try {
          goal = ikm(s.robots.at(robot), target, start, params).q;
        } catch (const IkFailure& e) {
          throw Reject{e.what()};
        }
      } else {
        throw Reject{"space must be \"joint\" or \"task\""};
      }
      RobotModel& model = take_over(s, robot);
      if (goal == model.q()) {
        s.motions.erase(robot);
      } else {
        s.motions[robot] = {model.q(), goal, s.clock, s.motion_duration};
      }
      return {ack(id), true};
    }
    if (type == "play") {
      s.playing = true;
      return {ack(id), true};
    }
    if (type == "pause") {
      s.playing = false;
      return {ack(id), true};
    }
    if (type == "seek") {
      const Json& tv = field(msg, "t");
      if (!tv.is_number()) throw Reject{"'t' must be a number"};
      const double t = tv.get<double>();
      if (!(t >= 0 && t <= s.doc.duration())) {
        throw Reject{"seek time " + format_number(std::isfinite(t) ? t : 0) + " outside [0, " +
                     format_number(s.doc.duration()) + "]"};
      }
      s.t = t;
      return {ack(id), true};
    }
    throw Reject{"unsupported message type '" + type + "'"};
  } catch (const Reject& r) {
    return {error_reply(id, r.message), false};
  } catch (const Error& e) {
    return {error_reply(id, e.what()), false};
  }
}

void tick(LiveState& s, double dt) {
  if (!s.playing) return;
  s.t = std::min(s.t + dt, s.doc.duration());
  s.clock += dt;
  for (auto it = s.motions.begin(); it != s.motions.end();) {
    const LiveMotion& m = it->second;
    const double u = m.duration > 0 ? std::clamp((s.clock - m.start) / m.duration, 0.0, 1.0) : 1.0;
    RobotModel& model = s.robots.at(it->first);
    const VecX q = u >= 1.0 ? m.to : VecX(m.from + u * (m.to - m.from));
    model.set_config(model.clamp_to_limits(q));
    it = u >= 1.0 ? s.motions.erase(it) : std::next(it);
  }
}

Json hello_message(const LiveState& s) { return {{"type", "hello"}, {"document", document_value(s.doc)}}; }

Json frame_message(const LiveState& s) {
  std::map<std::string, Htm> poses;
  for (const auto& [id, obj] : s.doc.objects()) poses[id] = pose_at(s.doc, id, s.t);
  Json configs = Json::array();
  for (const auto& [id, model] : s.robots) {
    const VecX q = live_config(s, id);
    configs.push_back({{"id", id}, {"q", vec_value(q)}});
    if (model.attached().empty()) continue;
    const Htm eef = fkm(model, q);
    for (const Attachment& a : model.attached()) {
      if (poses.count(a.object_id)) poses[a.object_id] = eef * a.grasp;
    }
  }
  Json pose_list = Json::array();
  for (const auto& [id, pose] : poses) pose_list.push_back({{"id", id}, {"pose", htm_value(pose)}});
  return {{"type", "frame"},
          {"t", s.t},
          {"playing", s.playing},
          {"poses", std::move(pose_list)},
          {"configs", std::move(configs)}};
}

}  // namespace kinesim
