#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

namespace edgeloc {

template <typename Scalar> using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Vector6 = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar> using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

/// se(3) twist, translation first: [rho; omega].
template <typename Scalar> using TwistT = Vector6<Scalar>;
using Twist = TwistT<double>;

class PointBehindCamera : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NearPiRotation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kMinProjectionDepth = 1e-6;
inline constexpr double kSmallAngle = 1e-8;
// Below this the cubic-cancelling Jacobian coefficients switch to series.
inline constexpr double kSeriesAngle = 1e-4;

/// Rigid transform p_out = rotation * p_in + translation.
///
/// A pose named T^a_b maps coordinates of frame b into frame a, so a camera
/// pose in the world is T^w_c.
template <typename Scalar>
struct PoseT {
  Matrix3<Scalar> rotation = Matrix3<Scalar>::Identity();
  Vector3<Scalar> translation = Vector3<Scalar>::Zero();

  PoseT() = default;
  PoseT(const Matrix3<Scalar>& r, const Vector3<Scalar>& t) : rotation(r), translation(t) {}

  static PoseT identity() { return PoseT(); }

  static PoseT from_quaternion(const Eigen::Quaternion<Scalar>& q, const Vector3<Scalar>& t) {
    return PoseT(q.normalized().toRotationMatrix(), t);
  }

  Eigen::Quaternion<Scalar> quaternion() const { return Eigen::Quaternion<Scalar>(rotation); }

  Vector3<Scalar> operator*(const Vector3<Scalar>& p) const { return rotation * p + translation; }

  template <typename Other>
  PoseT<Other> cast() const {
    return PoseT<Other>(rotation.template cast<Other>(), translation.template cast<Other>());
  }
};

using Pose = PoseT<double>;

template <typename Scalar>
PoseT<Scalar> compose(const PoseT<Scalar>& a, const PoseT<Scalar>& b) {
  return PoseT<Scalar>(a.rotation * b.rotation, a.translation + a.rotation * b.translation);
}

template <typename Scalar>
PoseT<Scalar> inverse(const PoseT<Scalar>& p) {
  const Matrix3<Scalar> rt = p.rotation.transpose();
  return PoseT<Scalar>(rt, -(rt * p.translation));
}

template <typename Scalar>
PoseT<Scalar> operator*(const PoseT<Scalar>& a, const PoseT<Scalar>& b) {
  return compose(a, b);
}

template <typename Derived>
Matrix3<typename Derived::Scalar> skew(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  Matrix3<Scalar> m;
  m << Scalar(0), -v(2), v(1),
       v(2), Scalar(0), -v(0),
       -v(1), v(0), Scalar(0);
  return m;
}

// (1 - cos t) / t^2 without the cancellation of the direct form.
template <typename Scalar>
Scalar half_angle_b(Scalar theta) {
  const Scalar s = std::sin(theta / Scalar(2)) / theta;
  return Scalar(2) * s * s;
}

/// Rodrigues exponential on SO(3).
template <typename Derived>
Matrix3<typename Derived::Scalar> so3_exp(const Eigen::MatrixBase<Derived>& omega) {
  using Scalar = typename Derived::Scalar;
  const Scalar theta = omega.norm();
  const Matrix3<Scalar> w = skew(omega);
  const Matrix3<Scalar> w2 = w * w;
  Scalar a, b;
  if (theta < Scalar(kSmallAngle)) {
    const Scalar t2 = theta * theta;
    a = Scalar(1) - t2 / Scalar(6);
    b = Scalar(0.5) - t2 / Scalar(24);
  } else {
    a = std::sin(theta) / theta;
    b = half_angle_b(theta);
  }
  return Matrix3<Scalar>::Identity() + a * w + b * w2;
}

template <typename Scalar>
Scalar rotation_angle(const Matrix3<Scalar>& r) {
  const Vector3<Scalar> axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const Scalar s = axis.norm() / Scalar(2);
  const Scalar c = (r.trace() - Scalar(1)) / Scalar(2);
  return std::atan2(s, c);
}

/// Inverse of so3_exp for angles below pi - 1e-6.
template <typename Scalar>
Vector3<Scalar> so3_log(const Matrix3<Scalar>& r) {
  const Scalar theta = rotation_angle(r);
  if (theta >= Scalar(std::numbers::pi - 1e-6)) {
    throw NearPiRotation("so3_log: rotation angle too close to pi");
  }
  const Vector3<Scalar> vee(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  if (theta < Scalar(kSmallAngle)) {
    return (Scalar(0.5) + theta * theta / Scalar(12)) * vee;
  }
  return theta / (Scalar(2) * std::sin(theta)) * vee;
}

/// Left Jacobian of SO(3); maps rho to the translation of exp(xi).
template <typename Derived>
Matrix3<typename Derived::Scalar> so3_left_jacobian(const Eigen::MatrixBase<Derived>& omega) {
  using Scalar = typename Derived::Scalar;
  const Scalar theta = omega.norm();
  const Matrix3<Scalar> w = skew(omega);
  Scalar b, c;
  const Scalar t2 = theta * theta;
  if (theta < Scalar(kSeriesAngle)) {
    b = Scalar(0.5) - t2 / Scalar(24) + t2 * t2 / Scalar(720);
    c = Scalar(1) / Scalar(6) - t2 / Scalar(120) + t2 * t2 / Scalar(5040);
  } else {
    b = half_angle_b(theta);
    c = (theta - std::sin(theta)) / (t2 * theta);
  }
  return Matrix3<Scalar>::Identity() + b * w + c * w * w;
}

template <typename Derived>
Matrix3<typename Derived::Scalar> so3_left_jacobian_inverse(const Eigen::MatrixBase<Derived>& omega) {
  using Scalar = typename Derived::Scalar;
  const Scalar theta = omega.norm();
  const Matrix3<Scalar> w = skew(omega);
  Scalar c;
  if (theta < Scalar(kSeriesAngle)) {
    const Scalar t2 = theta * theta;
    c = Scalar(1) / Scalar(12) + t2 / Scalar(720) + t2 * t2 / Scalar(30240);
  } else {
    const Scalar half = theta / Scalar(2);
    c = (Scalar(1) - half * std::cos(half) / std::sin(half)) / (theta * theta);
  }
  return Matrix3<Scalar>::Identity() - Scalar(0.5) * w + c * w * w;
}

template <typename Derived>
PoseT<typename Derived::Scalar> exp(const Eigen::MatrixBase<Derived>& xi) {
  using Scalar = typename Derived::Scalar;
  const Vector3<Scalar> rho = xi.template head<3>();
  const Vector3<Scalar> omega = xi.template tail<3>();
  return PoseT<Scalar>(so3_exp(omega), so3_left_jacobian(omega) * rho);
}

template <typename Scalar>
TwistT<Scalar> log(const PoseT<Scalar>& p) {
  const Vector3<Scalar> omega = so3_log(p.rotation);
  TwistT<Scalar> xi;
  xi.template head<3>() = so3_left_jacobian_inverse(omega) * p.translation;
  xi.template tail<3>() = omega;
  return xi;
}

/// Optimizer retraction: translation moves additively in the parent frame and
/// rotation is right-perturbed, R <- R Exp(dw), t <- t + dt. This is the
/// parameterization the alignment Jacobian block [-R^T | skew(p_c)] assumes.
template <typename Scalar>
PoseT<Scalar> retract(const PoseT<Scalar>& p, const TwistT<Scalar>& delta) {
  return PoseT<Scalar>(p.rotation * so3_exp(delta.template tail<3>().eval()),
                       p.translation + delta.template head<3>());
}

/// Nearest rotation in the Frobenius sense (polar decomposition).
template <typename Scalar>
Matrix3<Scalar> orthonormalize(const Matrix3<Scalar>& r) {
  Eigen::JacobiSVD<Matrix3<Scalar>> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3<Scalar> u = svd.matrixU();
  const Matrix3<Scalar> v = svd.matrixV();
  if ((u * v.transpose()).determinant() < Scalar(0)) u.col(2) = -u.col(2);
  return u * v.transpose();
}

/// Angle of the relative rotation between two poses (radians).
template <typename Scalar>
Scalar rotation_distance(const PoseT<Scalar>& a, const PoseT<Scalar>& b) {
  return rotation_angle<Scalar>(a.rotation.transpose() * b.rotation);
}

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  bool valid() const {
    return fx > 0.0 && fy > 0.0 && cx >= 0.0 && cx < width && cy >= 0.0 && cy < height;
  }

  bool contains(double u, double v) const {
    return u >= 0.0 && v >= 0.0 && u <= width - 1 && v <= height - 1;
  }

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

/// Pinhole projection. Throws PointBehindCamera when Z <= 1e-6 m.
template <typename Scalar>
Vector2<Scalar> project(const Vector3<Scalar>& p, const CameraIntrinsics& k) {
  if (!(p.z() > Scalar(kMinProjectionDepth))) {
    throw PointBehindCamera("project: point at or behind the camera");
  }
  return Vector2<Scalar>(Scalar(k.fx) * p.x() / p.z() + Scalar(k.cx),
                         Scalar(k.fy) * p.y() / p.z() + Scalar(k.cy));
}

/// Non-throwing variant for hot loops.
template <typename Scalar>
bool try_project(const Vector3<Scalar>& p, const CameraIntrinsics& k, Vector2<Scalar>& uv) {
  if (!(p.z() > Scalar(kMinProjectionDepth))) return false;
  uv = Vector2<Scalar>(Scalar(k.fx) * p.x() / p.z() + Scalar(k.cx),
                       Scalar(k.fy) * p.y() / p.z() + Scalar(k.cy));
  return true;
}

/// Z-Y-X Euler angles (yaw, pitch, roll) of a rotation, radians.
template <typename Scalar>
Vector3<Scalar> euler_zyx(const Matrix3<Scalar>& r) {
  const Scalar pitch = std::asin(std::clamp(-r(2, 0), Scalar(-1), Scalar(1)));
  const Scalar yaw = std::atan2(r(1, 0), r(0, 0));
  const Scalar roll = std::atan2(r(2, 1), r(2, 2));
  return Vector3<Scalar>(yaw, pitch, roll);
}

}  // namespace edgeloc
