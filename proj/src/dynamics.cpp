#include "kinesim/dynamics.hpp"

#include <cmath>
#include <vector>

namespace kinesim {

namespace {

const std::vector<LinkInertia>& require_inertias(const RobotModel& model) {
  if (!model.inertias()) {
    throw ConfigurationError("robot '" + model.name() + "' has no link inertias");
  }
  return *model.inertias();
}

void require_size(const RobotModel& model, const VecX& v, const char* what) {
  if (static_cast<std::size_t>(v.size()) != model.dof()) {
    throw InvalidArgument(std::string(what) + " has " + std::to_string(v.size()) +
                          " entries, expected " + std::to_string(model.dof()));
  }
}

}  // namespace

// Newton-Euler in link frames (Luh, Walker and Paul). For link i:
//   rot[i]   rotation of frame i relative to frame i-1
//   pstar[i] origin of frame i relative to frame i-1, expressed in frame i
// Gravity enters as a fictitious upward acceleration of the base.
VecX inverse_dynamics(const RobotModel& model, const VecX& q, const VecX& qdot,
                      const VecX& qddot, const Vec3& gravity) {
  const auto& inertias = require_inertias(model);
  require_size(model, q, "q");
  require_size(model, qdot, "qdot");
  require_size(model, qddot, "qddot");
  model.check_config(q);

  const std::size_t n = model.dof();
  const Vec3 z0 = Vec3::UnitZ();
  std::vector<Mat3> rot(n);
  std::vector<Vec3> pstar(n), force(n), moment(n);

  Vec3 w = Vec3::Zero();
  Vec3 wdot = Vec3::Zero();
  Vec3 acc = -(rotation_of(model.base()).transpose() * gravity);

  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    const DhLink& link = model.links()[i];
    const Htm t = dh_transform(link, q(idx));
    rot[i] = rotation_of(t);
    const Mat3 rt = rot[i].transpose();
    pstar[i] = rt * translation_of(t);

    if (link.kind == JointKind::revolute) {
      const Vec3 w_prev = w;
      w = rt * (w_prev + z0 * qdot(idx));
      wdot = rt * (wdot + z0 * qddot(idx) + w_prev.cross(z0 * qdot(idx)));
      acc = rt * acc + wdot.cross(pstar[i]) + w.cross(w.cross(pstar[i]));
    } else {
      w = rt * w;
      wdot = rt * wdot;
      acc = rt * (acc + z0 * qddot(idx)) + wdot.cross(pstar[i]) +
            2.0 * w.cross(rt * z0 * qdot(idx)) + w.cross(w.cross(pstar[i]));
    }

    const LinkInertia& in = inertias[i];
    const Vec3 acc_com = acc + wdot.cross(in.com) + w.cross(w.cross(in.com));
    force[i] = in.mass * acc_com;
    moment[i] = in.inertia * wdot + w.cross(in.inertia * w);
  }

  VecX tau(static_cast<Eigen::Index>(n));
  Vec3 f_next = Vec3::Zero();
  Vec3 n_next = Vec3::Zero();
  for (std::size_t k = n; k-- > 0;) {
    Vec3 f = force[k];
    Vec3 nm = moment[k] + (pstar[k] + inertias[k].com).cross(force[k]);
    if (k + 1 < n) {
      const Vec3 f_out = rot[k + 1] * f_next;
      f += f_out;
      nm += rot[k + 1] * n_next + pstar[k].cross(f_out);
    }
    const Vec3 axis = rot[k].transpose() * z0;
    tau(static_cast<Eigen::Index>(k)) =
        model.links()[k].kind == JointKind::revolute ? nm.dot(axis) : f.dot(axis);
    f_next = f;
    n_next = nm;
  }
  return tau;
}

Mat mass_matrix(const RobotModel& model, const VecX& q) {
  require_inertias(model);
  const auto n = static_cast<Eigen::Index>(model.dof());
  const VecX zero = VecX::Zero(n);
  Mat m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    m.col(j) = inverse_dynamics(model, q, zero, VecX::Unit(n, j), Vec3::Zero());
  }
  return m;
}

VecX gravity_vector(const RobotModel& model, const VecX& q, const Vec3& gravity) {
  const VecX zero = VecX::Zero(static_cast<Eigen::Index>(model.dof()));
  return inverse_dynamics(model, q, zero, zero, gravity);
}

VecX coriolis_vector(const RobotModel& model, const VecX& q, const VecX& qdot) {
  const VecX zero = VecX::Zero(static_cast<Eigen::Index>(model.dof()));
  return inverse_dynamics(model, q, qdot, zero, Vec3::Zero());
}

VecX forward_dynamics(const RobotModel& model, const VecX& q, const VecX& qdot, const VecX& tau,
                      const Vec3& gravity) {
  require_size(model, tau, "tau");
  const VecX zero = VecX::Zero(static_cast<Eigen::Index>(model.dof()));
  const VecX bias = inverse_dynamics(model, q, qdot, zero, gravity);
  const Eigen::LLT<Mat> llt(mass_matrix(model, q));
  if (llt.info() != Eigen::Success) throw NumericError("mass matrix is not positive definite");
  VecX qddot = llt.solve(tau - bias);
  if (!qddot.allFinite()) throw NumericError("forward dynamics produced non-finite accelerations");
  return qddot;
}

namespace {

// The integrator may probe slightly outside the limits inside a step; the
// dynamics themselves are evaluated at the clamped position.
VecX accel_at(const RobotModel& model, const VecX& q, const VecX& qdot, const VecX& tau,
              const Vec3& gravity) {
  return forward_dynamics(model, model.clamp_to_limits(q), qdot, tau, gravity);
}

}  // namespace

DynState forward_step(const RobotModel& model, const DynState& state, const VecX& tau,
                      const Vec3& gravity, double dt, Integrator integrator) {
  if (!(dt > 0) || !std::isfinite(dt)) throw InvalidArgument("forward_step: dt must be > 0");
  require_size(model, state.q, "q");
  require_size(model, state.qdot, "qdot");

  DynState next;
  next.t = state.t + dt;
  const VecX& q = state.q;
  const VecX& v = state.qdot;
  if (integrator == Integrator::semi_implicit_euler) {
    const VecX a = accel_at(model, q, v, tau, gravity);
    next.qdot = v + dt * a;
    next.q = q + dt * next.qdot;
  } else {
    const VecX a1 = accel_at(model, q, v, tau, gravity);
    const VecX v2 = v + 0.5 * dt * a1;
    const VecX a2 = accel_at(model, q + 0.5 * dt * v, v2, tau, gravity);
    const VecX v3 = v + 0.5 * dt * a2;
    const VecX a3 = accel_at(model, q + 0.5 * dt * v2, v3, tau, gravity);
    const VecX v4 = v + dt * a3;
    const VecX a4 = accel_at(model, q + dt * v3, v4, tau, gravity);
    next.q = q + dt / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4);
    next.qdot = v + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  }

  const VecX lo = model.lower_limits(), hi = model.upper_limits();
  for (Eigen::Index i = 0; i < next.q.size(); ++i) {
    if (next.q(i) < lo(i)) {
      next.q(i) = lo(i);
      next.qdot(i) = 0;
    } else if (next.q(i) > hi(i)) {
      next.q(i) = hi(i);
      next.qdot(i) = 0;
    }
  }
  if (!next.q.allFinite() || !next.qdot.allFinite()) {
    throw NumericError("forward_step produced non-finite state");
  }
  return next;
}

double kinetic_energy(const RobotModel& model, const VecX& q, const VecX& qdot) {
  require_size(model, qdot, "qdot");
  return 0.5 * qdot.dot(mass_matrix(model, q) * qdot);
}

double potential_energy(const RobotModel& model, const VecX& q, const Vec3& gravity) {
  const auto& inertias = require_inertias(model);
  double v = 0;
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const Htm frame = fkm(model, q, i + 1);
    const Vec3 com = rotation_of(frame) * inertias[i].com + translation_of(frame);
    v -= inertias[i].mass * gravity.dot(com);
  }
  return v;
}

}  // namespace kinesim
