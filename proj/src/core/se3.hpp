#pragma once

#include <Eigen/Core>

namespace gmp3 {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Body-frame velocity in se(3): linear (m/s) then angular (rad/s).
struct Twist {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();
};

/// Rigid-body pose in SE(3). `rotation` is kept as a matrix because the
/// rotational distance and logarithm are matrix-native.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 position = Vec3::Zero();

  static Pose identity() { return {}; }

  /// 4x4 homogeneous form.
  Mat4 matrix() const;

  /// Composition this * other.
  Pose operator*(const Pose& other) const;
};

/// ZYX (yaw-pitch-roll) Euler angles, radians.
struct EulerAngles {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
};

/// What log_so3 does when the rotation angle is within 1e-6 of pi.
enum class PiBranch {
  kReject,     ///< throw DegenerateRotation
  kCanonical,  ///< pick the axis whose leading non-zero component is positive
};

namespace se3 {

inline constexpr double kSmallAngle = 1e-8;
inline constexpr double kPiMargin = 1e-6;
inline constexpr double kGimbalMargin = 1e-9;

Mat3 skew(const Vec3& w);
Vec3 vee(const Mat3& omega_hat);

/// 4x4 matrix form of a twist. Throws InvalidArgument on non-finite input.
Mat4 hat(const Twist& xi);

/// Rodrigues formula; second-order series below kSmallAngle.
Mat3 exp_so3(const Vec3& phi);

/// Left Jacobian of SO(3) evaluated at phi.
Mat3 left_jacobian(const Vec3& phi);

/// exp(dt * hat(xi)). Throws InvalidArgument if dt < 0 or input is non-finite.
Pose exp_se3(const Twist& xi, double dt);

/// Right (body-frame) integration: pose * exp_se3(xi, dt).
Pose step(const Pose& pose, const Twist& xi, double dt);

/// Axis-angle vector of R. See PiBranch for behaviour near a half turn.
Vec3 log_so3(const Mat3& rotation, PiBranch branch = PiBranch::kReject);

/// Relative rotation angle (1/sqrt 2)||log(R1^T R2)||_F, in [0, pi).
double geodesic_distance(const Mat3& r1, const Mat3& r2);

Mat3 euler_to_rot(const EulerAngles& e);

/// Inverse of euler_to_rot. At gimbal lock (|pitch| within kGimbalMargin of
/// pi/2) roll is set to 0 and yaw carries the remaining rotation.
EulerAngles rot_to_euler(const Mat3& rotation);

Mat3 rot_x(double angle);
Mat3 rot_y(double angle);
Mat3 rot_z(double angle);

/// R^T R = I and det R = +1, each within tol.
bool is_rotation(const Mat3& rotation, double tol = 1e-9);

}  // namespace se3
}  // namespace gmp3
