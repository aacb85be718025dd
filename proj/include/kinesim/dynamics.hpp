#ifndef KINESIM_DYNAMICS_HPP_
#define KINESIM_DYNAMICS_HPP_

#include "kinesim/kinematics.hpp"

namespace kinesim {

/// Default gravity, world frame, m/s^2.
inline const Vec3 kStandardGravity{0.0, 0.0, -9.81};

struct DynState {
  VecX q;
  VecX qdot;
  double t{0};
};

enum class Integrator { semi_implicit_euler, rk4 };

/// Joint torques for (q, qdot, qddot) by recursive Newton-Euler.
/// Requires link inertias; throws ConfigurationError otherwise.
VecX inverse_dynamics(const RobotModel& model, const VecX& q, const VecX& qdot,
                      const VecX& qddot, const Vec3& gravity = kStandardGravity);

/// M(q), assembled column by column from unit-acceleration probes.
Mat mass_matrix(const RobotModel& model, const VecX& q);
VecX gravity_vector(const RobotModel& model, const VecX& q,
                    const Vec3& gravity = kStandardGravity);
VecX coriolis_vector(const RobotModel& model, const VecX& q, const VecX& qdot);

/// Solves M qddot = tau - c - g.
VecX forward_dynamics(const RobotModel& model, const VecX& q, const VecX& qdot, const VecX& tau,
                      const Vec3& gravity = kStandardGravity);

/// One integration step. Joints hitting a limit are clamped with their
/// velocity zeroed.
DynState forward_step(const RobotModel& model, const DynState& state, const VecX& tau,
                      const Vec3& gravity, double dt,
                      Integrator integrator = Integrator::rk4);

double kinetic_energy(const RobotModel& model, const VecX& q, const VecX& qdot);
/// -sum m_i g . p_com_i, zero at the world origin.
double potential_energy(const RobotModel& model, const VecX& q,
                        const Vec3& gravity = kStandardGravity);

}  // namespace kinesim

#endif  // KINESIM_DYNAMICS_HPP_
