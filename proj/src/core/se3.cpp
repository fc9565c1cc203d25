#include "core/se3.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "core/errors.hpp"

namespace gmp3 {

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = position;
  return m;
}

Pose Pose::operator*(const Pose& other) const {
  Pose out;
  out.rotation = rotation * other.rotation;
  out.position = rotation * other.position + position;
  return out;
}

namespace se3 {
namespace {

void require_finite(const Vec3& v, const char* what) {
  if (!v.allFinite()) {
    throw InvalidArgument(std::string(what) + " must be finite");
  }
}

}  // namespace

Mat3 skew(const Vec3& w) {
  Mat3 s;
  // clang-format off
  s <<     0.0, -w.z(),  w.y(),
         w.z(),    0.0, -w.x(),
        -w.y(),  w.x(),    0.0;
  // clang-format on
  return s;
}

Vec3 vee(const Mat3& omega_hat) {
  return {omega_hat(2, 1), omega_hat(0, 2), omega_hat(1, 0)};
}

Mat4 hat(const Twist& xi) {
  require_finite(xi.linear, "twist linear part");
  require_finite(xi.angular, "twist angular part");
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = skew(xi.angular);
  m.topRightCorner<3, 1>() = xi.linear;
  return m;
}

Mat3 exp_so3(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 k = skew(phi);
  if (theta < kSmallAngle) {
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  const double half = 0.5 * theta;
  const double sin_half = std::sin(half);
  // 1 - cos(theta) = 2 sin^2(theta/2) avoids cancellation at small angles.
  const double a = std::sin(theta) / theta;
  const double b = 2.0 * sin_half * sin_half / (theta * theta);
  return Mat3::Identity() + a * k + b * k * k;
}

Mat3 left_jacobian(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 k = skew(phi);
  if (theta < kSmallAngle) {
    return Mat3::Identity() + 0.5 * k + (1.0 / 6.0) * k * k;
  }
  const double sin_half = std::sin(0.5 * theta);
  const double theta2 = theta * theta;
  const double b = 2.0 * sin_half * sin_half / theta2;
  double c;
  if (theta < 1e-3) {
    c = 1.0 / 6.0 - theta2 / 120.0 + theta2 * theta2 / 5040.0;
  } else {
    c = (theta - std::sin(theta)) / (theta2 * theta);
  }
  return Mat3::Identity() + b * k + c * k * k;
}

Pose exp_se3(const Twist& xi, double dt) {
  require_finite(xi.linear, "twist linear part");
  require_finite(xi.angular, "twist angular part");
  if (!std::isfinite(dt) || dt < 0.0) {
    throw InvalidArgument("dt must be finite and non-negative");
  }
  const Vec3 phi = xi.angular * dt;
  Pose out;
  out.rotation = exp_so3(phi);
  out.position = left_jacobian(phi) * (xi.linear * dt);
  return out;
}

Pose step(const Pose& pose, const Twist& xi, double dt) {
  return pose * exp_se3(xi, dt);
}

Vec3 log_so3(const Mat3& rotation, PiBranch branch) {
  const Vec3 w = 0.5 * vee(rotation - rotation.transpose());  // sin(theta) * axis
  const double s = w.norm();
  const double c = 0.5 * (rotation.trace() - 1.0);
  const double theta = std::atan2(s, c);

  if (theta < kSmallAngle) {
    return w;
  }
  if (std::numbers::pi - theta >= kPiMargin) {
    return (theta / s) * w;
  }
  if (branch == PiBranch::kReject) {
    throw DegenerateRotation("rotation angle within 1e-6 of pi; logarithm is not unique");
  }

  // (R + R^T)/2 - cos(theta) I = (1 - cos(theta)) a a^T
  const Mat3 b = 0.5 * (rotation + rotation.transpose()) - c * Mat3::Identity();
  Eigen::Index k = 0;
  b.diagonal().maxCoeff(&k);
  Vec3 axis = b.col(k).normalized();
  if (s > 1e-14) {
    if (axis.dot(w) < 0.0) axis = -axis;
  } else {
    for (int i = 0; i < 3; ++i) {
      if (std::abs(axis[i]) > 1e-12) {
        if (axis[i] < 0.0) axis = -axis;
        break;
      }
    }
  }
  return theta * axis;
}

double geodesic_distance(const Mat3& r1, const Mat3& r2) {
  return log_so3(r1.transpose() * r2).norm();
}

Mat3 rot_x(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Mat3 rot_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Mat3 rot_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Mat3 euler_to_rot(const EulerAngles& e) {
  if (!std::isfinite(e.yaw) || !std::isfinite(e.pitch) || !std::isfinite(e.roll)) {
    throw InvalidArgument("Euler angles must be finite");
  }
  return rot_z(e.yaw) * rot_y(e.pitch) * rot_x(e.roll);
}

EulerAngles rot_to_euler(const Mat3& r) {
  EulerAngles e;
  e.pitch = std::atan2(-r(2, 0), std::hypot(r(0, 0), r(1, 0)));
  if (std::numbers::pi / 2 - std::abs(e.pitch) < kGimbalMargin) {
    e.roll = 0.0;
    e.yaw = std::atan2(-r(0, 1), r(1, 1));
  } else {
    e.roll = std::atan2(r(2, 1), r(2, 2));
    e.yaw = std::atan2(r(1, 0), r(0, 0));
  }
  return e;
}

bool is_rotation(const Mat3& rotation, double tol) {
  if (!rotation.allFinite()) return false;
  const Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

}  // namespace se3
}  // namespace gmp3
