#ifndef KINESIM_LINALG_HPP_
#define KINESIM_LINALG_HPP_

// Spatial-math helpers on Eigen dense types. Everything is templated on the
// scalar; the double aliases at the bottom are what the rest of the library
// uses.

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "kinesim/errors.hpp"

namespace kinesim {

template <typename Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3T = Eigen::Matrix<Scalar, 3, 3>;
/// Homogeneous transformation [[R, p], [0, 0, 0, 1]].
template <typename Scalar>
using HtmT = Eigen::Matrix<Scalar, 4, 4>;
template <typename Scalar>
using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecXT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct EulerAnglesT {
  Scalar roll{0};
  Scalar pitch{0};
  Scalar yaw{0};
};

namespace linalg_detail {
template <typename Scalar>
constexpr Scalar kOrthoTol = Scalar(1e-9);
}

template <typename Scalar>
HtmT<Scalar> identity_htm() {
  return HtmT<Scalar>::Identity();
}

template <typename Derived>
auto rotation_of(const Eigen::MatrixBase<Derived>& h) {
  return h.template topLeftCorner<3, 3>();
}

template <typename Derived>
auto translation_of(const Eigen::MatrixBase<Derived>& h) {
  return h.template topRightCorner<3, 1>();
}

/// Bottom row exactly (0,0,0,1), R orthonormal and det(R) = +1 within 1e-9.
template <typename Scalar>
bool is_valid_htm(const HtmT<Scalar>& h) {
  if (!h.allFinite()) return false;
  if (h(3, 0) != 0 || h(3, 1) != 0 || h(3, 2) != 0 || h(3, 3) != 1) return false;
  const Mat3T<Scalar> r = rotation_of(h);
  const Scalar ortho = (r.transpose() * r - Mat3T<Scalar>::Identity()).norm();
  if (!(ortho <= linalg_detail::kOrthoTol<Scalar>)) return false;
  return std::abs(r.determinant() - Scalar(1)) <= linalg_detail::kOrthoTol<Scalar>;
}

template <typename Scalar>
void require_valid_htm(const HtmT<Scalar>& h, const char* what) {
  if (!is_valid_htm(h)) {
    throw InvalidArgument(std::string(what) + ": not a rigid homogeneous transform");
  }
}

/// Skew-symmetric matrix with skew(v) * w == v.cross(w).
template <typename Derived>
Mat3T<typename Derived::Scalar> skew(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  Mat3T<Scalar> s;
  s << Scalar(0), -v(2), v(1),
       v(2), Scalar(0), -v(0),
       -v(1), v(0), Scalar(0);
  return s;
}

/// Rotation by `angle` about `axis` (normalized internally), via Rodrigues.
template <typename Derived>
HtmT<typename Derived::Scalar> rot(const Eigen::MatrixBase<Derived>& axis,
                                   typename Derived::Scalar angle) {
  using Scalar = typename Derived::Scalar;
  const Scalar n = axis.norm();
  if (!(n > Scalar(1e-12)) || !std::isfinite(n)) {
    throw InvalidArgument("rot: axis must be a finite, non-zero vector");
  }
  const Mat3T<Scalar> k = skew(Vec3T<Scalar>(axis / n));
  HtmT<Scalar> h = HtmT<Scalar>::Identity();
  h.template topLeftCorner<3, 3>() = Mat3T<Scalar>::Identity() + std::sin(angle) * k +
                                     (Scalar(1) - std::cos(angle)) * k * k;
  return h;
}

template <typename Scalar>
HtmT<Scalar> rotx(Scalar angle) {
  return rot(Vec3T<Scalar>::UnitX(), angle);
}

template <typename Scalar>
HtmT<Scalar> roty(Scalar angle) {
  return rot(Vec3T<Scalar>::UnitY(), angle);
}

template <typename Scalar>
HtmT<Scalar> rotz(Scalar angle) {
  return rot(Vec3T<Scalar>::UnitZ(), angle);
}

template <typename Derived>
HtmT<typename Derived::Scalar> trn(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  if (!v.allFinite()) throw InvalidArgument("trn: translation must be finite");
  HtmT<Scalar> h = HtmT<Scalar>::Identity();
  h.template topRightCorner<3, 1>() = v;
  return h;
}

template <typename Scalar>
HtmT<Scalar> trn(Scalar x, Scalar y, Scalar z) {
  return trn(Vec3T<Scalar>(x, y, z));
}

/// Closed-form inverse [[R^T, -R^T p], [0, 1]].
template <typename Scalar>
HtmT<Scalar> inv_htm(const HtmT<Scalar>& h) {
  require_valid_htm(h, "inv_htm");
  HtmT<Scalar> out = HtmT<Scalar>::Identity();
  const Mat3T<Scalar> rt = rotation_of(h).transpose();
  out.template topLeftCorner<3, 3>() = rt;
  out.template topRightCorner<3, 1>() = -rt * translation_of(h);
  return out;
}

/// Right-damped pseudoinverse M^T (M M^T + eps^2 I)^-1, shape cols x rows.
/// With eps == 0 the matrix must have full row rank.
template <typename Derived>
MatT<typename Derived::Scalar> dp_inv(const Eigen::MatrixBase<Derived>& m,
                                      typename Derived::Scalar eps) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() == 0 || m.cols() == 0) throw InvalidArgument("dp_inv: empty matrix");
  if (!(eps >= Scalar(0)) || !std::isfinite(eps)) {
    throw InvalidArgument("dp_inv: damping must be finite and non-negative");
  }
  const MatT<Scalar> mm = m;
  MatT<Scalar> gram = mm * mm.transpose();
  if (eps > Scalar(0)) {
    gram.diagonal().array() += eps * eps;
    Eigen::LLT<MatT<Scalar>> llt(gram);
    if (llt.info() != Eigen::Success) throw SingularMatrix("dp_inv: damped Gram matrix not SPD");
    return llt.solve(mm).transpose();
  }
  Eigen::FullPivLU<MatT<Scalar>> lu(gram);
  if (!lu.isInvertible()) throw SingularMatrix("dp_inv: M M^T is singular and eps = 0");
  return lu.solve(mm).transpose();
}

/// Central-difference Jacobian of `f` at `x`; column j is
/// (f(x + d e_j) - f(x - d e_j)) / 2d.
template <typename Func, typename Scalar>
MatT<Scalar> num_jac(Func&& f, const VecXT<Scalar>& x, Scalar delta = Scalar(1e-6)) {
  if (!(delta > Scalar(0))) throw InvalidArgument("num_jac: delta must be positive");
  const Eigen::Index n = x.size();
  MatT<Scalar> jac;
  VecXT<Scalar> probe = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    probe(j) = x(j) + delta;
    const VecXT<Scalar> fp = f(probe);
    probe(j) = x(j) - delta;
    const VecXT<Scalar> fm = f(probe);
    probe(j) = x(j);
    if (!fp.allFinite() || !fm.allFinite() || fp.size() != fm.size()) {
      throw NumericError("num_jac: function returned non-finite values");
    }
    if (j == 0) jac.resize(fp.size(), n);
    jac.col(j) = (fp - fm) / (Scalar(2) * delta);
  }
  return jac;
}

/// Roll, pitch, yaw with R = Rz(yaw) Ry(pitch) Rx(roll). At gimbal lock roll
/// is pinned to zero and the remaining rotation goes to yaw.
template <typename Scalar>
EulerAnglesT<Scalar> euler_angles(const HtmT<Scalar>& h) {
  require_valid_htm(h, "euler_angles");
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  const Mat3T<Scalar> r = rotation_of(h);
  auto wrap = [&](Scalar a) { return a <= -pi ? a + Scalar(2) * pi : a; };
  EulerAnglesT<Scalar> e;
  e.pitch = std::atan2(-r(2, 0), std::hypot(r(0, 0), r(1, 0)));
  if (pi / Scalar(2) - std::abs(e.pitch) < Scalar(1e-9)) {
    e.roll = Scalar(0);
    e.yaw = wrap(std::atan2(-r(0, 1), r(1, 1)));
  } else {
    e.roll = wrap(std::atan2(r(2, 1), r(2, 2)));
    e.yaw = wrap(std::atan2(r(1, 0), r(0, 0)));
  }
  return e;
}

/// Inverse of euler_angles.
template <typename Scalar>
HtmT<Scalar> from_euler(Scalar roll, Scalar pitch, Scalar yaw) {
  return rotz(yaw) * roty(pitch) * rotx(roll);
}

/// Random rigid transform. Translation components are uniform in
/// [-trn_range, trn_range]; the rotation is uniform on SO(3) (unit quaternion
/// sampled by Shoemake's method) when `rot_enabled`, identity otherwise.
template <typename Scalar = double, typename Rng>
HtmT<Scalar> htm_rand(Rng& rng, Scalar trn_range, bool rot_enabled) {
  if (!(trn_range >= Scalar(0))) throw InvalidArgument("htm_rand: trn_range must be >= 0");
  std::uniform_real_distribution<Scalar> unit(Scalar(0), Scalar(1));
  HtmT<Scalar> h = HtmT<Scalar>::Identity();
  for (int i = 0; i < 3; ++i) {
    h(i, 3) = trn_range * (Scalar(2) * unit(rng) - Scalar(1));
  }
  if (rot_enabled) {
    constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    const Scalar u1 = unit(rng), u2 = unit(rng), u3 = unit(rng);
    const Scalar a = std::sqrt(Scalar(1) - u1), b = std::sqrt(u1);
    Eigen::Quaternion<Scalar> q(b * std::cos(two_pi * u3), a * std::sin(two_pi * u2),
                                a * std::cos(two_pi * u2), b * std::sin(two_pi * u3));
    q.normalize();
    h.template topLeftCorner<3, 3>() = q.toRotationMatrix();
  }
  return h;
}

/// Rotation vector (axis * angle) of a rotation matrix.
template <typename Scalar>
Vec3T<Scalar> rotation_vector(const Mat3T<Scalar>& r) {
  const Eigen::AngleAxis<Scalar> aa(Eigen::Quaternion<Scalar>(r).normalized());
  return aa.axis() * aa.angle();
}

using Vec3 = Vec3T<double>;
using Mat3 = Mat3T<double>;
using Htm = HtmT<double>;
using Mat = MatT<double>;
using VecX = VecXT<double>;
using EulerAngles = EulerAnglesT<double>;

}  // namespace kinesim

#endif  // KINESIM_LINALG_HPP_
