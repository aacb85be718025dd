#ifndef KINESIM_KINEMATICS_HPP_
#define KINESIM_KINEMATICS_HPP_

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kinesim/errors.hpp"
#include "kinesim/linalg.hpp"

namespace kinesim {

enum class JointKind { revolute, prismatic };

/// One row of a standard (distal) Denavit-Hartenberg table.
/// Link transform: Rotz(theta) * Transz(d) * Transx(a) * Rotx(alpha), with
/// theta = theta_off + q for revolute joints and d = d_off + q for prismatic.
struct DhLink {
  double theta_off{0};
  double d_off{0};
  double alpha{0};
  double a{0};
  JointKind kind{JointKind::revolute};
  double q_min{-std::numbers::pi};
  double q_max{std::numbers::pi};

  bool operator==(const DhLink&) const = default;
};

/// Mass properties of one link, expressed in that link's DH frame.
struct LinkInertia {
  double mass{1};
  Vec3 com{Vec3::Zero()};
  /// About the COM.
  Mat3 inertia{Mat3::Zero()};

  bool operator==(const LinkInertia& o) const {
    return mass == o.mass && com == o.com && inertia == o.inertia;
  }
};

/// Object held by the end-effector. `grasp` is relative to the end-effector.
struct Attachment {
  std::string object_id;
  Htm grasp{Htm::Identity()};
  Htm world_pose{Htm::Identity()};

  bool operator==(const Attachment& o) const {
    return object_id == o.object_id && grasp == o.grasp && world_pose == o.world_pose;
  }
};

/// DH manipulator with its current configuration. The configuration always
/// lies within the joint limits.
class RobotModel {
 public:
  RobotModel(std::string name, std::vector<DhLink> links, Htm base = Htm::Identity(),
             Htm tool = Htm::Identity(),
             std::optional<std::vector<LinkInertia>> inertias = std::nullopt);

  const std::string& name() const { return name_; }
  const std::vector<DhLink>& links() const { return links_; }
  std::size_t dof() const { return links_.size(); }
  const Htm& base() const { return base_; }
  const Htm& tool() const { return tool_; }
  const std::optional<std::vector<LinkInertia>>& inertias() const { return inertias_; }
  const VecX& q() const { return q_; }
  const std::vector<Attachment>& attached() const { return attached_; }

  void set_base(const Htm& base);
  void set_inertias(std::optional<std::vector<LinkInertia>> inertias);

  /// Moves to `q` and carries attached objects along (eef_pose * grasp).
  void set_config(const VecX& q);
  /// Records grasp = inv(eef_pose) * object_pose.
  void attach(const std::string& object_id, const Htm& object_pose);
  /// Re-adds a stored attachment verbatim (grasp and world pose as given).
  void restore_attachment(const Attachment& a);
  /// Releases the object and returns its world pose at release.
  Htm detach(const std::string& object_id);
  const Attachment& attachment(const std::string& object_id) const;

  VecX lower_limits() const;
  VecX upper_limits() const;
  bool within_limits(const VecX& q) const;
  /// Throws JointLimitError naming the first offending joint.
  void check_config(const VecX& q) const;
  VecX clamp_to_limits(const VecX& q) const;

  bool operator==(const RobotModel& o) const;

 private:
  std::string name_;
  std::vector<DhLink> links_;
  Htm base_;
  Htm tool_;
  std::optional<std::vector<LinkInertia>> inertias_;
  VecX q_;
  std::vector<Attachment> attached_;
};

/// Sentinel for `upto`: the full chain including the tool transform.
inline constexpr std::size_t kEndEffector = std::numeric_limits<std::size_t>::max();

/// Transform of link i alone, given the joint value.
Htm dh_transform(const DhLink& link, double q);

/// base * T_1 * ... * T_upto (* tool for kEndEffector). upto = 0 is the base.
Htm fkm(const RobotModel& model, const VecX& q, std::size_t upto = kEndEffector);
inline Htm fkm(const RobotModel& model) { return fkm(model, model.q()); }

struct GeometricJacobian {
  /// 6 x n; rows 0-2 linear velocity, rows 3-5 angular velocity (world).
  Mat jac;
  /// frames[i] = fkm(q, i) for i = 0..n.
  std::vector<Htm> frames;
  Htm eef;
};

GeometricJacobian jac_geo(const RobotModel& model, const VecX& q);

struct TaskError {
  /// [p_e - p_d; -log(R_d R_e^T)].
  Eigen::Matrix<double, 6, 1> residual;
  Mat jac;
  Htm eef;

  double position_norm() const { return residual.head<3>().norm(); }
  double orientation_norm() const { return residual.tail<3>().norm(); }
};

TaskError task_error(const RobotModel& model, const VecX& q, const Htm& target);

enum class IkTask { pose, position };

struct IkParams {
  double eps{1e-3};
  double gain{1.0};
  int max_iters{200};
  double tol_pos{1e-4};
  double tol_ori{1e-3};
  double step_cap{0.2};
  int restarts{9};
  std::uint64_t seed{0};
  IkTask task{IkTask::pose};
};

struct IkResult {
  VecX q;
  int iterations{0};
  int restarts_used{0};
  double pos_error{0};
  double ori_error{0};
};

class IkFailure : public Error {
 public:
  IkFailure(const std::string& what, VecX best_q, double pos_error, double ori_error)
      : Error(what), best_q_(std::move(best_q)), pos_error_(pos_error), ori_error_(ori_error) {}
  const VecX& best_q() const { return best_q_; }
  double pos_error() const { return pos_error_; }
  double ori_error() const { return ori_error_; }

 private:
  VecX best_q_;
  double pos_error_;
  double ori_error_;
};

/// Damped-least-squares IK with hard joint-limit clamping and seeded random
/// restarts. Throws IkFailure carrying the best residual reached.
IkResult ikm(const RobotModel& model, const Htm& target, const VecX& q0,
             const IkParams& params = {});

// Factories. Geometry is representative, not vendor data. Default inertias
// are uniform 1 kg rods along each link's DH x-axis (see default_link_inertia).

RobotModel create_planar_2r(double l1 = 1.0, double l2 = 1.0);
RobotModel create_scara();
RobotModel create_generic_6r();
RobotModel create_kr5_like();

/// Uniform solid rod of `mass` spanning the link's a-offset (from the previous
/// frame origin to this frame origin along x), radius 0.03 m.
LinkInertia default_link_inertia(const DhLink& link, double mass = 1.0);

/// Factory lookup by stable name: planar2r, scara, generic6r, kr5.
RobotModel create_robot(const std::string& name);
std::vector<std::string> robot_names();

}  // namespace kinesim

#endif  // KINESIM_KINEMATICS_HPP_
