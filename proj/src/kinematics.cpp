#include "kinesim/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace kinesim {

namespace {

constexpr double kPi = std::numbers::pi;

void validate_link(const DhLink& link, std::size_t index) {
  const bool finite = std::isfinite(link.theta_off) && std::isfinite(link.d_off) &&
                      std::isfinite(link.alpha) && std::isfinite(link.a) &&
                      std::isfinite(link.q_min) && std::isfinite(link.q_max);
  if (!finite) {
    throw InvalidArgument("link " + std::to_string(index) + ": parameters must be finite");
  }
  if (!(link.q_min < link.q_max)) {
    throw InvalidArgument("link " + std::to_string(index) + ": q_min must be < q_max");
  }
}

void validate_inertia(const LinkInertia& in, std::size_t index) {
  const std::string where = "inertia " + std::to_string(index) + ": ";
  if (!(in.mass > 0) || !std::isfinite(in.mass)) throw InvalidArgument(where + "mass must be > 0");
  if (!in.com.allFinite() || !in.inertia.allFinite()) {
    throw InvalidArgument(where + "values must be finite");
  }
  if ((in.inertia - in.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidArgument(where + "tensor must be symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Mat3> es(in.inertia);
  const Vec3 moments = es.eigenvalues();
  const double tol = 1e-12 * std::max(1.0, moments.cwiseAbs().maxCoeff());
  if (moments.minCoeff() < -tol) throw InvalidArgument(where + "tensor must be PSD");
  for (int i = 0; i < 3; ++i) {
    if (moments(i) > moments((i + 1) % 3) + moments((i + 2) % 3) + tol) {
      throw InvalidArgument(where + "principal moments violate the triangle inequality");
    }
  }
}

}  // namespace

RobotModel::RobotModel(std::string name, std::vector<DhLink> links, Htm base, Htm tool,
                       std::optional<std::vector<LinkInertia>> inertias)
    : name_(std::move(name)), links_(std::move(links)), base_(base), tool_(tool) {
  if (links_.empty()) throw InvalidArgument("robot must have at least one link");
  for (std::size_t i = 0; i < links_.size(); ++i) validate_link(links_[i], i);
  require_valid_htm(base_, "robot base");
  require_valid_htm(tool_, "robot tool");
  set_inertias(std::move(inertias));
  q_ = clamp_to_limits(VecX::Zero(static_cast<Eigen::Index>(links_.size())));
}

void RobotModel::set_base(const Htm& base) {
  require_valid_htm(base, "robot base");
  base_ = base;
  set_config(q_);
}

void RobotModel::set_inertias(std::optional<std::vector<LinkInertia>> inertias) {
  if (inertias) {
    if (inertias->size() != links_.size()) {
      throw InvalidArgument("inertia list length must equal link count");
    }
    for (std::size_t i = 0; i < inertias->size(); ++i) validate_inertia((*inertias)[i], i);
  }
  inertias_ = std::move(inertias);
}

VecX RobotModel::lower_limits() const {
  VecX v(static_cast<Eigen::Index>(dof()));
  for (std::size_t i = 0; i < dof(); ++i) v(static_cast<Eigen::Index>(i)) = links_[i].q_min;
  return v;
}

VecX RobotModel::upper_limits() const {
  VecX v(static_cast<Eigen::Index>(dof()));
  for (std::size_t i = 0; i < dof(); ++i) v(static_cast<Eigen::Index>(i)) = links_[i].q_max;
  return v;
}

void RobotModel::check_config(const VecX& q) const {
  if (static_cast<std::size_t>(q.size()) != dof()) {
    throw InvalidArgument("configuration has " + std::to_string(q.size()) + " entries, robot '" +
                          name_ + "' expects " + std::to_string(dof()));
  }
  for (std::size_t i = 0; i < dof(); ++i) {
    const double v = q(static_cast<Eigen::Index>(i));
    if (!(v >= links_[i].q_min && v <= links_[i].q_max)) {
      std::ostringstream msg;
      msg << "joint " << i << " value " << v << " outside [" << links_[i].q_min << ", "
          << links_[i].q_max << "]";
      throw JointLimitError(i, msg.str());
    }
  }
}

bool RobotModel::within_limits(const VecX& q) const {
  if (static_cast<std::size_t>(q.size()) != dof()) return false;
  for (std::size_t i = 0; i < dof(); ++i) {
    const double v = q(static_cast<Eigen::Index>(i));
    if (!(v >= links_[i].q_min && v <= links_[i].q_max)) return false;
  }
  return true;
}

VecX RobotModel::clamp_to_limits(const VecX& q) const {
  return q.cwiseMax(lower_limits()).cwiseMin(upper_limits());
}

void RobotModel::set_config(const VecX& q) {
  check_config(q);
  const bool unchanged = q_.size() == q.size() && q_ == q;
  q_ = q;
  if (unchanged) return;
  const Htm eef = fkm(*this, q_);
  for (auto& a : attached_) a.world_pose = eef * a.grasp;
}

void RobotModel::attach(const std::string& object_id, const Htm& object_pose) {
  require_valid_htm(object_pose, "attach");
  for (const auto& a : attached_) {
    if (a.object_id == object_id) throw InvalidArgument("object '" + object_id + "' already attached");
  }
  const Htm grasp = inv_htm(fkm(*this, q_)) * object_pose;
  attached_.push_back({object_id, grasp, object_pose});
}

void RobotModel::restore_attachment(const Attachment& a) {
  require_valid_htm(a.grasp, "attachment grasp");
  require_valid_htm(a.world_pose, "attachment pose");
  for (const auto& b : attached_) {
    if (b.object_id == a.object_id) throw InvalidArgument("object '" + a.object_id + "' already attached");
  }
  attached_.push_back(a);
}

Htm RobotModel::detach(const std::string& object_id) {
  auto it = std::find_if(attached_.begin(), attached_.end(),
                         [&](const Attachment& a) { return a.object_id == object_id; });
  if (it == attached_.end()) throw InvalidArgument("object '" + object_id + "' is not attached");
  const Htm pose = it->world_pose;
  attached_.erase(it);
  return pose;
}

const Attachment& RobotModel::attachment(const std::string& object_id) const {
  for (const auto& a : attached_) {
    if (a.object_id == object_id) return a;
  }
  throw InvalidArgument("object '" + object_id + "' is not attached");
}

bool RobotModel::operator==(const RobotModel& o) const {
  return name_ == o.name_ && links_ == o.links_ && base_ == o.base_ && tool_ == o.tool_ &&
         inertias_ == o.inertias_ && q_.size() == o.q_.size() && q_ == o.q_ &&
         attached_ == o.attached_;
}

Htm dh_transform(const DhLink& link, double q) {
  const double theta = link.kind == JointKind::revolute ? link.theta_off + q : link.theta_off;
  const double d = link.kind == JointKind::prismatic ? link.d_off + q : link.d_off;
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(link.alpha), sa = std::sin(link.alpha);
  Htm t;
  t << ct, -st * ca, st * sa, link.a * ct,
       st, ct * ca, -ct * sa, link.a * st,
       0, sa, ca, d,
       0, 0, 0, 1;
  return t;
}

Htm fkm(const RobotModel& model, const VecX& q, std::size_t upto) {
  model.check_config(q);
  const std::size_t n = model.dof();
  if (upto != kEndEffector && upto > n) {
    throw InvalidArgument("fkm: link index " + std::to_string(upto) + " exceeds " +
                          std::to_string(n));
  }
  const std::size_t last = upto == kEndEffector ? n : upto;
  Htm h = model.base();
  for (std::size_t i = 0; i < last; ++i) {
    h = h * dh_transform(model.links()[i], q(static_cast<Eigen::Index>(i)));
  }
  if (upto == kEndEffector) h = h * model.tool();
  return h;
}

GeometricJacobian jac_geo(const RobotModel& model, const VecX& q) {
  model.check_config(q);
  const std::size_t n = model.dof();
  GeometricJacobian out;
  out.frames.reserve(n + 1);
  out.frames.push_back(model.base());
  for (std::size_t i = 0; i < n; ++i) {
    out.frames.push_back(out.frames.back() *
                         dh_transform(model.links()[i], q(static_cast<Eigen::Index>(i))));
  }
  out.eef = out.frames.back() * model.tool();
  const Vec3 pe = translation_of(out.eef);
  out.jac = Mat::Zero(6, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    const Vec3 z = rotation_of(out.frames[i]).col(2);
    if (model.links()[i].kind == JointKind::revolute) {
      const Vec3 p = translation_of(out.frames[i]);
      out.jac.block<3, 1>(0, col) = z.cross(pe - p);
      out.jac.block<3, 1>(3, col) = z;
    } else {
      out.jac.block<3, 1>(0, col) = z;
    }
  }
  return out;
}

TaskError task_error(const RobotModel& model, const VecX& q, const Htm& target) {
  require_valid_htm(target, "task_error target");
  GeometricJacobian gj = jac_geo(model, q);
  TaskError err;
  err.residual.head<3>() = translation_of(gj.eef) - translation_of(target);
  const Mat3 rel = rotation_of(target) * rotation_of(gj.eef).transpose();
  err.residual.tail<3>() = -rotation_vector<double>(rel);
  err.jac = std::move(gj.jac);
  err.eef = gj.eef;
  return err;
}

namespace {

struct Attempt {
  VecX q;
  int iterations{0};
  double pos{0};
  double ori{0};
  bool converged{false};
};

// A revolute joint whose range spans a full turn can re-enter from the other
// end instead of sticking to the limit; the pose is unchanged.
VecX wrap_full_turns(const RobotModel& model, VecX q) {
  constexpr double turn = 2.0 * kPi;
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const DhLink& l = model.links()[i];
    if (l.kind != JointKind::revolute || l.q_max - l.q_min < turn) continue;
    double& v = q(static_cast<Eigen::Index>(i));
    while (v < l.q_min && v + turn <= l.q_max) v += turn;
    while (v > l.q_max && v - turn >= l.q_min) v -= turn;
  }
  return q;
}

Attempt solve_from(const RobotModel& model, const Htm& target, VecX q, const IkParams& p) {
  const bool pose_task = p.task == IkTask::pose;
  const Eigen::Index rows = pose_task ? 6 : 3;
  const VecX lo = model.lower_limits(), hi = model.upper_limits();
  Attempt best;
  for (int iter = 0;; ++iter) {
    const TaskError e = task_error(model, q, target);
    const double pos = e.position_norm();
    const double ori = pose_task ? e.orientation_norm() : 0.0;
    if (iter == 0 || pos + ori < best.pos + best.ori) best = {q, iter, pos, ori, false};
    if (pos < p.tol_pos && (!pose_task || ori < p.tol_ori)) {
      return {q, iter, pos, ori, true};
    }
    if (iter >= p.max_iters) break;
    // Joints sitting on a limit and pushed outward are frozen and the step is
    // re-solved over the remaining joints.
    Mat jac = e.jac.topRows(rows);
    const VecX target_step = -p.gain * e.residual.head(rows);
    VecX dq;
    for (Eigen::Index pass = 0; pass <= q.size(); ++pass) {
      dq = dp_inv(jac, p.eps) * target_step;
      bool froze = false;
      for (Eigen::Index j = 0; j < q.size(); ++j) {
        const bool at_lo = q(j) <= lo(j) && dq(j) < 0;
        const bool at_hi = q(j) >= hi(j) && dq(j) > 0;
        if ((at_lo || at_hi) && !jac.col(j).isZero(0)) {
          jac.col(j).setZero();
          froze = true;
        }
      }
      if (!froze) break;
    }
    const double biggest = dq.cwiseAbs().maxCoeff();
    if (biggest > p.step_cap) dq *= p.step_cap / biggest;
    q = wrap_full_turns(model, q + dq);
    q = model.clamp_to_limits(q);
  }
  best.iterations = p.max_iters;
  return best;
}

}  // namespace

IkResult ikm(const RobotModel& model, const Htm& target, const VecX& q0, const IkParams& params) {
  if (!(params.eps >= 0) || !(params.gain > 0) || params.max_iters < 0 || !(params.tol_pos > 0) ||
      !(params.tol_ori > 0) || !(params.step_cap > 0) || params.restarts < 0) {
    throw InvalidArgument("ikm: invalid solver parameters");
  }
  require_valid_htm(target, "ikm target");
  model.check_config(q0);

  std::mt19937_64 rng(params.seed);
  const VecX lo = model.lower_limits(), hi = model.upper_limits();
  Attempt best;
  for (int attempt = 0; attempt <= params.restarts; ++attempt) {
    VecX start = q0;
    if (attempt > 0) {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (Eigen::Index i = 0; i < start.size(); ++i) start(i) = lo(i) + unit(rng) * (hi(i) - lo(i));
    }
    Attempt a = solve_from(model, target, start, params);
    if (a.converged) return {a.q, a.iterations, attempt, a.pos, a.ori};
    if (attempt == 0 || a.pos + a.ori < best.pos + best.ori) best = a;
  }
  std::ostringstream msg;
  msg << "ik-failure: no solution within tolerance after " << params.restarts + 1
      << " attempts (best position error " << best.pos << " m, orientation error " << best.ori
      << " rad)";
  throw IkFailure(msg.str(), best.q, best.pos, best.ori);
}

LinkInertia default_link_inertia(const DhLink& link, double mass) {
  constexpr double radius = 0.03;
  const double len = std::abs(link.a);
  LinkInertia in;
  in.mass = mass;
  in.com = Vec3(-link.a / 2.0, 0.0, 0.0);
  const double axial = mass * radius * radius / 2.0;
  const double transverse = mass * (3.0 * radius * radius + len * len) / 12.0;
  in.inertia = Vec3(axial, transverse, transverse).asDiagonal();
  return in;
}

namespace {

RobotModel with_default_inertias(std::string name, std::vector<DhLink> links,
                                 Htm base = Htm::Identity(), Htm tool = Htm::Identity()) {
  std::vector<LinkInertia> inertias;
  for (const auto& l : links) inertias.push_back(default_link_inertia(l));
  return RobotModel(std::move(name), std::move(links), base, tool, std::move(inertias));
}

DhLink revolute(double d, double a, double alpha, double qmin = -kPi, double qmax = kPi,
                double theta_off = 0) {
  return {theta_off, d, alpha, a, JointKind::revolute, qmin, qmax};
}

}  // namespace

RobotModel create_planar_2r(double l1, double l2) {
  if (!(l1 > 0) || !(l2 > 0)) throw InvalidArgument("planar 2R link lengths must be positive");
  return with_default_inertias("planar2r", {revolute(0, l1, 0), revolute(0, l2, 0)});
}

RobotModel create_scara() {
  DhLink z{0, 0.0, 0, 0, JointKind::prismatic, -0.2, 0.0};
  return with_default_inertias(
      "scara", {revolute(0.35, 0.325, 0, -2.5, 2.5), revolute(0, 0.275, kPi, -2.5, 2.5), z,
                revolute(0.0, 0, 0, -kPi, kPi)});
}

RobotModel create_generic_6r() {
  return with_default_inertias(
      "generic6r",
      {revolute(0.30, 0.05, kPi / 2), revolute(0.05, 0.35, 0), revolute(0.0, 0.08, kPi / 2),
       revolute(0.30, 0.02, -kPi / 2), revolute(0.03, 0.02, kPi / 2), revolute(0.08, 0.0, 0)});
}

RobotModel create_kr5_like() {
  return with_default_inertias(
      "kr5", {revolute(0.400, 0.180, kPi / 2, -2.70, 2.70),
              revolute(0.0, 0.600, 0, -kPi / 2 - 1.0, 1.1, -kPi / 2),
              revolute(0.0, 0.120, kPi / 2, -2.0, 2.6),
              revolute(0.620, 0.0, -kPi / 2, -3.2, 3.2), revolute(0.0, 0.0, kPi / 2, -2.1, 2.1),
              revolute(0.115, 0.0, 0, -kPi, kPi)});
}

RobotModel create_robot(const std::string& name) {
  if (name == "planar2r") return create_planar_2r();
  if (name == "scara") return create_scara();
  if (name == "generic6r") return create_generic_6r();
  if (name == "kr5") return create_kr5_like();
  throw InvalidArgument("unknown robot '" + name + "'");
}

std::vector<std::string> robot_names() { return {"planar2r", "scara", "generic6r", "kr5"}; }

}  // namespace kinesim
