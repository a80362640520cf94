#include <gtest/gtest.h>

#include <numbers>

#include "edgeloc/geometry.hpp"
#include "edgeloc/random.hpp"

#include "support/oracles.hpp"

using namespace edgeloc;

namespace {

constexpr double kPi = std::numbers::pi;

CameraIntrinsics k640() { return {100.0, 100.0, 320.0, 200.0, 640, 400}; }

Twist random_twist(CounterRng& rng, double max_angle) {
  Twist xi;
  xi.head<3>() = Eigen::Vector3d(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
  xi.tail<3>() = oracle::random_unit(rng) * rng.uniform(0.0, max_angle);
  return xi;
}

// Textbook Rodrigues formula, written out independently of so3_exp.
Eigen::Matrix3d rodrigues(const Eigen::Vector3d& axis, double angle) {
  const Eigen::Vector3d n = axis.normalized();
  Eigen::Matrix3d k;
  k << 0, -n.z(), n.y(), n.z(), 0, -n.x(), -n.y(), n.x(), 0;
  return Eigen::Matrix3d::Identity() + std::sin(angle) * k + (1 - std::cos(angle)) * k * k;
}

}  // namespace

TEST(Project, OpticalAxisMapsToPrincipalPoint) {
  const Eigen::Vector2d uv = project(Eigen::Vector3d(0, 0, 2), k640());
  EXPECT_DOUBLE_EQ(uv.x(), 320.0);
  EXPECT_DOUBLE_EQ(uv.y(), 200.0);
}

TEST(Project, PinholeFormula) {
  EXPECT_DOUBLE_EQ(project(Eigen::Vector3d(1, 0, 2), k640()).x(), 370.0);
}

TEST(Project, BehindCameraThrows) {
  EXPECT_THROW(project(Eigen::Vector3d(0, 0, -1), k640()), PointBehindCamera);
  EXPECT_THROW(project(Eigen::Vector3d(0, 0, 1e-6), k640()), PointBehindCamera);
  Eigen::Vector2d uv;
  EXPECT_FALSE(try_project(Eigen::Vector3d(0, 0, 0), k640(), uv));
}

TEST(Project, ScaleInvariantAlongRay) {
  CounterRng rng(11, 0);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d p(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0.1, 50));
    const double lambda = rng.uniform(0.01, 100);
    EXPECT_LT((project(Eigen::Vector3d(lambda * p), k640()) - project(p, k640())).norm(), 1e-9);
  }
}

TEST(Intrinsics, Validity) {
  EXPECT_TRUE(k640().valid());
  CameraIntrinsics k = k640();
  k.cx = 640;
  EXPECT_FALSE(k.valid());
  k = k640();
  k.fy = 0;
  EXPECT_FALSE(k.valid());
}

TEST(Exp, ZeroIsIdentity) {
  const Pose p = edgeloc::exp(Twist(Twist::Zero()));
  EXPECT_TRUE(p.rotation.isIdentity(0));
  EXPECT_TRUE(p.translation.isZero(0));
}

TEST(Exp, PureTranslation) {
  Twist xi = Twist::Zero();
  xi(0) = 0.1;
  const Pose p = edgeloc::exp(xi);
  EXPECT_TRUE(p.rotation.isIdentity(0));
  EXPECT_TRUE(p.translation.isApprox(Eigen::Vector3d(0.1, 0, 0)));
}

TEST(Exp, QuarterTurnAboutZ) {
  Twist xi = Twist::Zero();
  xi(5) = kPi / 2;
  const Pose p = edgeloc::exp(xi);
  EXPECT_LT((p.rotation - rodrigues(Eigen::Vector3d::UnitZ(), kPi / 2)).norm(), 1e-15);
  EXPECT_LT((p.rotation * Eigen::Vector3d::UnitX() - Eigen::Vector3d::UnitY()).norm(), 1e-15);
}

TEST(Exp, MatchesRodriguesOracle) {
  CounterRng rng(12, 0);
  for (int i = 0; i < 500; ++i) {
    const Eigen::Vector3d axis = oracle::random_unit(rng);
    const double angle = rng.uniform(1e-6, 3.1);
    EXPECT_LT((so3_exp(Eigen::Vector3d(axis * angle)) - rodrigues(axis, angle)).norm(), 1e-12);
  }
}

TEST(Exp, SmallAngleSeriesIsContinuous) {
  const Eigen::Vector3d axis = Eigen::Vector3d(1, 2, 3).normalized();
  const Matrix3<double> below = so3_exp(Eigen::Vector3d(axis * 0.99e-8));
  const Matrix3<double> above = so3_exp(Eigen::Vector3d(axis * 1.01e-8));
  EXPECT_LT((below - above).norm(), 1e-9);
}

TEST(Log, IdentityIsZero) { EXPECT_TRUE(edgeloc::log(Pose::identity()).isZero(0)); }

TEST(Log, QuarterTurnAboutZ) {
  const Pose p(rodrigues(Eigen::Vector3d::UnitZ(), kPi / 2), Eigen::Vector3d::Zero());
  Twist want = Twist::Zero();
  want(5) = kPi / 2;
  EXPECT_LT((edgeloc::log(p) - want).norm(), 1e-12);
}

TEST(Log, NearPiThrows) {
  const Pose p(rodrigues(Eigen::Vector3d::UnitX(), kPi - 1e-9), Eigen::Vector3d::Zero());
  EXPECT_THROW(edgeloc::log(p), NearPiRotation);
}

TEST(Log, RoundTripUpToThreeRadians) {
  CounterRng rng(13, 0);
  for (int i = 0; i < 5000; ++i) {
    const Twist xi = random_twist(rng, 3.0);
    EXPECT_LT((edgeloc::log(edgeloc::exp(xi)) - xi).norm(), 1e-9) << "iteration " << i;
  }
}

TEST(Log, RoundTripTinyAngles) {
  CounterRng rng(14, 0);
  for (int i = 0; i < 1000; ++i) {
    const Twist xi = random_twist(rng, 1e-7);
    EXPECT_LT((edgeloc::log(edgeloc::exp(xi)) - xi).norm(), 1e-12);
  }
}

TEST(Compose, IdentityAndInverse) {
  CounterRng rng(15, 0);
  for (int i = 0; i < 200; ++i) {
    const Pose p = oracle::random_pose(rng, 100.0);
    const Pose a = compose(p, Pose::identity());
    EXPECT_TRUE(a.rotation == p.rotation && a.translation == p.translation);
    const Pose e = compose(p, inverse(p));
    EXPECT_LT((e.rotation - Eigen::Matrix3d::Identity()).norm(), 1e-9);
    EXPECT_LT(e.translation.norm(), 1e-9);
  }
}

TEST(Compose, PureTranslationsAdd) {
  const Pose a(Eigen::Matrix3d::Identity(), Eigen::Vector3d(1, 0, 0));
  const Pose b(Eigen::Matrix3d::Identity(), Eigen::Vector3d(0, 2, 0));
  EXPECT_TRUE(compose(a, b).translation.isApprox(Eigen::Vector3d(1, 2, 0)));
}

TEST(Compose, Associative) {
  CounterRng rng(16, 0);
  for (int i = 0; i < 1000; ++i) {
    const Pose a = oracle::random_pose(rng, 1.0), b = oracle::random_pose(rng, 1.0), c = oracle::random_pose(rng, 1.0);
    const Pose l = compose(compose(a, b), c);
    const Pose r = compose(a, compose(b, c));
    EXPECT_LT((l.rotation - r.rotation).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((l.translation - r.translation).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Compose, ActsLikePointMaps) {
  CounterRng rng(17, 0);
  const Pose a = oracle::random_pose(rng, 10.0), b = oracle::random_pose(rng, 10.0);
  const Eigen::Vector3d p(1, -2, 3);
  EXPECT_LT((compose(a, b) * p - a * (b * p)).norm(), 1e-12);
  EXPECT_LT((inverse(a) * (a * p) - p).norm(), 1e-12);
}

TEST(Compose, DeterminantStaysOneWithPeriodicOrthonormalization) {
  CounterRng rng(18, 0);
  Pose p;
  for (int i = 1; i <= 10000; ++i) {
    const Pose step(so3_exp(Eigen::Vector3d(oracle::random_unit(rng) * 0.3)), Eigen::Vector3d::Zero());
    p = compose(p, step);
    if (i % 100 == 0) p.rotation = orthonormalize(p.rotation);
  }
  EXPECT_NEAR(p.rotation.determinant(), 1.0, 1e-6);
  EXPECT_LT((p.rotation.transpose() * p.rotation - Eigen::Matrix3d::Identity()).norm(), 1e-9);
}

TEST(Orthonormalize, ReturnsNearestRotation) {
  CounterRng rng(19, 0);
  const Matrix3<double> r = oracle::random_pose(rng, 1.0).rotation;
  const Matrix3<double> noisy = r + 1e-4 * Eigen::Matrix3d::Random();
  const Matrix3<double> fixed = orthonormalize(noisy);
  EXPECT_NEAR(fixed.determinant(), 1.0, 1e-12);
  EXPECT_LT((fixed.transpose() * fixed - Eigen::Matrix3d::Identity()).norm(), 1e-12);
  EXPECT_LT((fixed - r).norm(), 1e-3);
}

TEST(Skew, Examples) {
  EXPECT_TRUE(skew(Eigen::Vector3d::Zero()).isZero(0));
  EXPECT_EQ(skew(Eigen::Vector3d::UnitX()) * Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitZ());
  CounterRng rng(20, 0);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d v(rng.normal(), rng.normal(), rng.normal());
    const Eigen::Vector3d w(rng.normal(), rng.normal(), rng.normal());
    EXPECT_TRUE((skew(v) + skew(v).transpose()).isZero(0));
    EXPECT_LT((skew(v) * w - v.cross(w)).norm(), 1e-12);
  }
}

TEST(LeftJacobian, InverseIsInverse) {
  CounterRng rng(21, 0);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d w = oracle::random_unit(rng) * rng.uniform(0.0, 3.0);
    EXPECT_LT((so3_left_jacobian(w) * so3_left_jacobian_inverse(w) - Eigen::Matrix3d::Identity()).norm(), 1e-9);
  }
}

TEST(Retract, TranslationAddsAndRotationRightMultiplies) {
  CounterRng rng(22, 0);
  const Pose p = oracle::random_pose(rng, 5.0);
  Twist d;
  d << 0.1, -0.2, 0.3, 0.01, 0.02, -0.03;
  const Pose q = retract(p, d);
  EXPECT_LT((q.translation - p.translation - d.head<3>()).norm(), 1e-15);
  EXPECT_LT((q.rotation - p.rotation * so3_exp(Eigen::Vector3d(d.tail<3>()))).norm(), 1e-15);
}

TEST(Euler, MatchesZyxConstruction) {
  CounterRng rng(23, 0);
  for (int i = 0; i < 200; ++i) {
    const double yaw = rng.uniform(-3, 3), pitch = rng.uniform(-1.5, 1.5), roll = rng.uniform(-3, 3);
    const Eigen::Matrix3d r = (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
                               Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
                               Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
                                  .toRotationMatrix();
    EXPECT_LT((euler_zyx(r) - Eigen::Vector3d(yaw, pitch, roll)).norm(), 1e-9);
  }
}

TEST(RotationAngle, MatchesAxisAngle) {
  CounterRng rng(24, 0);
  for (int i = 0; i < 200; ++i) {
    const double angle = rng.uniform(0.0, 3.1);
    EXPECT_NEAR(rotation_angle(rodrigues(oracle::random_unit(rng), angle)), angle, 1e-12);
  }
}

TEST(Pose, QuaternionRoundTrip) {
  CounterRng rng(25, 0);
  const Pose p = oracle::random_pose(rng, 3.0);
  const Pose q = Pose::from_quaternion(p.quaternion(), p.translation);
  EXPECT_LT((q.rotation - p.rotation).norm(), 1e-14);
}
