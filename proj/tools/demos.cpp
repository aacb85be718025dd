#include "demos.hpp"

#include <functional>
#include <random>

#include "kinesim/kinematics.hpp"

namespace kinesim::demos {

namespace {

constexpr const char* kArm = "arm";

Material solid(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Material m;
  m.color = {r, g, b};
  return m;
}

void stage(SceneDocument& doc, const RobotModel& robot) {
  Camera cam;
  cam.position = Vec3(1.4, 1.2, 0.9);
  cam.look_at = Vec3(0.0, 0.0, 0.35);
  doc.set_camera(cam);
  doc.add_robot({kArm, robot, LinkStyle::primitive_chain, solid(240, 140, 40)});
}

// Linear joint motion over one segment starting at t0, one key per 1/kKeyRate.
// `on_key` sees every key time and configuration; the t0 key is skipped
// unless `first` (the previous segment already wrote it).
double move(SceneDocument& doc, const VecX& from, const VecX& to, double t0, bool first,
            const std::function<void(double, const VecX&)>& on_key = {}) {
  const int n = static_cast<int>(kSegment * kKeyRate);
  for (int k = first ? 0 : 1; k <= n; ++k) {
    const double u = static_cast<double>(k) / n;
    const double t = t0 + k / kKeyRate;
    const VecX q = from + u * (to - from);
    doc.set_config_at(kArm, t, q);
    if (on_key) on_key(t, q);
  }
  return t0 + kSegment;
}

}  // namespace

SceneDocument dh_walkthrough() {
  SceneDocument doc;
  RobotModel robot = create_generic_6r();
  stage(doc, robot);
  const std::size_t n = robot.dof();
  const VecX home = robot.q();
  for (std::size_t i = 1; i <= n; ++i) {
    SceneObject f;
    f.id = "frame" + std::to_string(i);
    f.shape = Frame{0.12};
    f.initial_pose = fkm(robot, home, i);
    doc.add_object(std::move(f));
  }
  auto follow = [&](double t, const VecX& q) {
    for (std::size_t i = 1; i <= n; ++i) doc.set_pose_at("frame" + std::to_string(i), t, fkm(robot, q, i));
  };
  double t = 0;
  VecX q = home;
  for (std::size_t j = 0; j < n; ++j) {
    VecX bent = q;
    bent(static_cast<Eigen::Index>(j)) += 0.8;
    t = move(doc, q, bent, t, j == 0, follow);
    t = move(doc, bent, q, t, false, follow);
  }
  doc.set_duration(t);
  return doc;
}

SceneDocument ik_sequence(std::uint64_t seed) {
  SceneDocument doc;
  RobotModel robot = create_generic_6r();
  stage(doc, robot);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-1.2, 1.2);
  IkParams params;
  params.seed = seed;

  double t = 0;
  VecX q = robot.q();
  for (int k = 1; k <= 4; ++k) {
    VecX pick(static_cast<Eigen::Index>(robot.dof()));
    for (Eigen::Index j = 0; j < pick.size(); ++j) pick(j) = angle(rng);
    const Htm target = fkm(robot, pick);
    SceneObject marker;
    marker.id = "target" + std::to_string(k);
    marker.shape = Frame{0.08};
    marker.initial_pose = target;
    doc.add_object(std::move(marker));
    const VecX goal = ikm(robot, target, q, params).q;
    t = move(doc, q, goal, t, k == 1);
    q = goal;
  }
  doc.set_duration(t);
  return doc;
}

SceneDocument pick_and_place() {
  SceneDocument doc;
  RobotModel robot = create_generic_6r();
  stage(doc, robot);

  VecX q_pick(6), q_place(6);
  q_pick << 0.5, 0.6, 0.5, 0.0, 0.9, 0.0;
  q_place << -0.7, 0.5, 0.6, 0.0, 0.8, 0.3;
  const VecX home = robot.q();

  SceneObject crate;
  crate.id = "crate";
  crate.shape = Box{0.06, 0.06, 0.06};
  crate.material = solid(60, 120, 220);
  crate.initial_pose = fkm(robot, q_pick) * trn(0.0, 0.0, 0.03);
  doc.add_object(crate);

  // Reach the crate, grab it, carry it, let go, go home.
  double t = move(doc, home, q_pick, 0.0, true);
  robot.set_config(q_pick);
  robot.attach(crate.id, crate.initial_pose);
  t = move(doc, q_pick, q_place, t, false, [&](double tk, const VecX& q) {
    robot.set_config(q);
    doc.set_pose_at(crate.id, tk, robot.attachment(crate.id).world_pose);
  });
  robot.detach(crate.id);
  t = move(doc, q_place, home, t, false);
  doc.set_duration(t);
  return doc;
}

}  // namespace kinesim::demos
