#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "core/errors.hpp"
#include "core/se3.hpp"

using namespace gmp3;

constexpr double TOL = 1e-12;
constexpr double PI = std::numbers::pi;

TEST(Hat, ZeroTwistGivesZeroMatrix) {
  EXPECT_TRUE(se3::hat(Twist{}).isZero(0.0));
}

TEST(Hat, YawRateBlock) {
  Twist xi;
  xi.angular = Vec3(0, 0, 1);
  const Mat4 h = se3::hat(xi);
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  EXPECT_TRUE((h.topLeftCorner<3, 3>()).isApprox(expected));
  EXPECT_TRUE(h.col(3).isZero(0.0));
  EXPECT_TRUE(h.row(3).isZero(0.0));
}

TEST(Hat, GeneralSkewAndTranslation) {
  Twist xi;
  xi.angular = Vec3(1, 2, 3);
  xi.linear = Vec3(4, 5, 6);
  const Mat4 h = se3::hat(xi);
  Mat3 expected;
  expected << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  EXPECT_EQ((h.topLeftCorner<3, 3>()), expected);
  EXPECT_EQ((h.block<3, 1>(0, 3)), Vec3(4, 5, 6));
}

TEST(Hat, RejectsNonFinite) {
  Twist xi;
  xi.linear.x() = std::nan("");
  EXPECT_THROW(se3::hat(xi), InvalidArgument);
}

TEST(ExpSe3, ZeroTwistIsIdentity) {
  const Pose p = se3::exp_se3(Twist{}, 3.0);
  EXPECT_TRUE(p.rotation.isIdentity(0.0));
  EXPECT_TRUE(p.position.isZero(0.0));
}

TEST(ExpSe3, PureTranslation) {
  Twist xi;
  xi.linear = Vec3(1, 0, 0);
  const Pose p = se3::exp_se3(xi, 0.5);
  EXPECT_TRUE(p.rotation.isIdentity(0.0));
  EXPECT_NEAR(p.position.x(), 0.5, TOL);
  EXPECT_NEAR(p.position.norm() - 0.5, 0.0, TOL);
}

TEST(ExpSe3, QuarterTurnAboutZ) {
  Twist xi;
  xi.angular = Vec3(0, 0, PI / 2);
  const Pose p = se3::exp_se3(xi, 1.0);
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_TRUE(p.rotation.isApprox(expected, 1e-12));
  EXPECT_LT(p.position.norm(), TOL);
}

TEST(ExpSe3, NegativeDtRejected) {
  EXPECT_THROW(se3::exp_se3(Twist{}, -0.1), InvalidArgument);
}

TEST(ExpSe3, SmallAngleMatchesSeries) {
  Twist xi;
  xi.angular = Vec3(1e-10, -2e-10, 3e-10);
  xi.linear = Vec3(1, 2, 3);
  const Pose p = se3::exp_se3(xi, 1.0);
  EXPECT_TRUE(se3::is_rotation(p.rotation));
  EXPECT_NEAR((p.position - Vec3(1, 2, 3)).norm(), 0.0, 1e-9);
}

TEST(Step, IdentityAndTranslation) {
  Twist xi;
  EXPECT_TRUE(se3::step(Pose::identity(), xi, 1.0).matrix().isIdentity(0.0));
  xi.linear = Vec3(1, 0, 0);
  EXPECT_NEAR((se3::step(Pose::identity(), xi, 1.0).position - Vec3(1, 0, 0)).norm(), 0.0, TOL);
}

TEST(Step, BodyFrameVelocityRotatesIntoWorld) {
  Pose t;
  t.rotation = se3::rot_z(PI / 2);
  Twist xi;
  xi.linear = Vec3(1, 0, 0);
  const Pose out = se3::step(t, xi, 1.0);
  EXPECT_NEAR((out.position - Vec3(0, 1, 0)).norm(), 0.0, TOL);
}

TEST(Step, SplitIntegrationComposes) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    Twist xi;
    xi.linear = Vec3(u(rng), u(rng), u(rng));
    xi.angular = Vec3(u(rng), u(rng), u(rng));
    Pose t;
    t.rotation = se3::exp_so3(Vec3(u(rng), u(rng), u(rng)));
    t.position = Vec3(u(rng), u(rng), u(rng));
    const Pose whole = se3::step(t, xi, 0.7);
    const Pose split = se3::step(se3::step(t, xi, 0.3), xi, 0.4);
    EXPECT_LT((whole.matrix() - split.matrix()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_TRUE(se3::is_rotation(whole.rotation));
  }
}

TEST(LogSo3, ClosedForms) {
  EXPECT_LT(se3::log_so3(Mat3::Identity()).norm(), TOL);
  EXPECT_NEAR((se3::log_so3(se3::rot_z(0.3)) - Vec3(0, 0, 0.3)).norm(), 0.0, TOL);
  EXPECT_NEAR((se3::log_so3(se3::rot_x(1.0)) - Vec3(1, 0, 0)).norm(), 0.0, TOL);
}

TEST(LogSo3, HalfTurnIsDegenerateUnlessCanonical) {
  const Mat3 r = se3::rot_y(PI);
  EXPECT_THROW(se3::log_so3(r), DegenerateRotation);
  const Vec3 w = se3::log_so3(r, PiBranch::kCanonical);
  EXPECT_NEAR(w.norm(), PI, 1e-9);
  EXPECT_GT(w.y(), 0.0);
  EXPECT_TRUE(se3::exp_so3(w).isApprox(r, 1e-9));
}

TEST(LogSo3, RoundTripRandom) {
  std::mt19937 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> ang(0.0, PI - 0.01);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 axis = Vec3(n(rng), n(rng), n(rng)).normalized();
    const Vec3 w = axis * ang(rng);
    EXPECT_LT((se3::log_so3(se3::exp_so3(w)) - w).norm(), 1e-9);
  }
}

TEST(GeodesicDistance, Examples) {
  const Mat3 r = se3::euler_to_rot({0.3, -0.2, 0.9});
  EXPECT_NEAR(se3::geodesic_distance(r, r), 0.0, TOL);
  EXPECT_NEAR(se3::geodesic_distance(Mat3::Identity(), se3::rot_z(PI / 2)), PI / 2, TOL);
  EXPECT_NEAR(se3::geodesic_distance(se3::rot_z(0.2), se3::rot_z(0.5)), 0.3, TOL);
}

TEST(GeodesicDistance, SymmetricAndBounded) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-PI, PI);
  for (int k = 0; k < 200; ++k) {
    const Mat3 a = se3::euler_to_rot({u(rng), u(rng) / 2, u(rng)});
    const Mat3 b = se3::euler_to_rot({u(rng), u(rng) / 2, u(rng)});
    double ab, ba;
    try {
      ab = se3::geodesic_distance(a, b);
      ba = se3::geodesic_distance(b, a);
    } catch (const DegenerateRotation&) {
      continue;
    }
    EXPECT_NEAR(ab, ba, 1e-12);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, PI);
  }
}

TEST(Euler, IdentityAndYaw) {
  EXPECT_TRUE(se3::euler_to_rot({0, 0, 0}).isIdentity(0.0));
  EXPECT_TRUE(se3::euler_to_rot({PI / 2, 0, 0}).isApprox(se3::rot_z(PI / 2), 1e-15));
}

TEST(Euler, ZyxProductOrder) {
  const EulerAngles e{0.4, -0.3, 1.1};
  const Mat3 expected = se3::rot_z(e.yaw) * se3::rot_y(e.pitch) * se3::rot_x(e.roll);
  EXPECT_TRUE(se3::euler_to_rot(e).isApprox(expected, 1e-15));
}

TEST(Euler, RoundTripAwayFromGimbalLock) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> yaw(-PI + 1e-6, PI - 1e-6), pitch(-1.4, 1.4);
  for (int k = 0; k < 1000; ++k) {
    const EulerAngles e{yaw(rng), pitch(rng), yaw(rng)};
    const EulerAngles back = se3::rot_to_euler(se3::euler_to_rot(e));
    EXPECT_NEAR(back.yaw, e.yaw, 1e-9);
    EXPECT_NEAR(back.pitch, e.pitch, 1e-9);
    EXPECT_NEAR(back.roll, e.roll, 1e-9);
  }
}

TEST(Euler, GimbalLockPutsEverythingInYaw) {
  const Mat3 r = se3::euler_to_rot({0.5, PI / 2, 0.2});
  const EulerAngles e = se3::rot_to_euler(r);
  EXPECT_EQ(e.roll, 0.0);
  EXPECT_NEAR(e.pitch, PI / 2, 1e-9);
  EXPECT_TRUE(se3::euler_to_rot(e).isApprox(r, 1e-9));
}
