#include "ingrasp/pose.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support/oracles.hpp"

namespace ingrasp {
namespace {

TEST(WrapAngle, KnownValues) {
  EXPECT_DOUBLE_EQ(0.0, wrap_angle(0.0));
  EXPECT_DOUBLE_EQ(M_PI, wrap_angle(M_PI));
  EXPECT_DOUBLE_EQ(M_PI, wrap_angle(-M_PI));
  EXPECT_NEAR(-M_PI / 2.0, wrap_angle(3.0 * M_PI / 2.0), 1e-15);
  EXPECT_NEAR(0.0, wrap_angle(2.0 * M_PI), 1e-15);
  EXPECT_NEAR(0.1 - M_PI, wrap_angle(M_PI + 0.1), 1e-12);
}

TEST(WrapAngle, RangeAndEquivalence) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> big(-50.0, 50.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = big(rng);
    const double w = wrap_angle(a);
    EXPECT_GT(w, -M_PI);
    EXPECT_LE(w, M_PI);
    EXPECT_NEAR(std::sin(a), std::sin(w), 1e-9);
    EXPECT_NEAR(std::cos(a), std::cos(w), 1e-9);
  }
}

TEST(Rpy, MatchesExplicitMatrixProduct) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d rpy(ang(rng), ang(rng), ang(rng));
    const Eigen::Matrix3d expected =
        (oracle::rot_z(rpy.z()) * oracle::rot_y(rpy.y()) * oracle::rot_x(rpy.x()))
            .topLeftCorner<3, 3>();
    EXPECT_LT((rotation_from_rpy(rpy) - expected).norm(), 1e-14);
  }
}

TEST(Rpy, RoundTripAwayFromGimbal) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> rollyaw(-M_PI + 0.01, M_PI - 0.01);
  std::uniform_real_distribution<double> pitch(-M_PI / 2 + 0.01, M_PI / 2 - 0.01);
  for (int i = 0; i < 5000; ++i) {
    const Eigen::Vector3d rpy(rollyaw(rng), pitch(rng), rollyaw(rng));
    const Eigen::Vector3d back = rpy_from_rotation(rotation_from_rpy(rpy));
    EXPECT_LT((rpy - back).cwiseAbs().maxCoeff(), 1e-12) << rpy.transpose();
  }
}

TEST(Rpy, ReconstructsRotationEvenAtGimbal) {
  // At |pitch| = pi/2 the individual angles are not unique, but the
  // extracted triple must still reproduce the matrix.
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d rpy(ang(rng), M_PI / 2.0, ang(rng));
    const Eigen::Matrix3d r = rotation_from_rpy(rpy);
    const Eigen::Matrix3d back = rotation_from_rpy(rpy_from_rotation(r));
    EXPECT_LT((r - back).norm(), 1e-9);
  }
}

TEST(Rpy, OutputRanges) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    Eigen::Quaterniond q(u(rng), u(rng), u(rng), u(rng));
    if (q.norm() < 1e-3) continue;
    q.normalize();
    const Eigen::Vector3d rpy = rpy_from_rotation(q.toRotationMatrix());
    EXPECT_GT(rpy[0], -M_PI);
    EXPECT_LE(rpy[0], M_PI);
    EXPECT_GE(rpy[1], -M_PI / 2.0);
    EXPECT_LE(rpy[1], M_PI / 2.0);
    EXPECT_GT(rpy[2], -M_PI);
    EXPECT_LE(rpy[2], M_PI);
  }
}

TEST(Pose, ComposeWithIdentityIsNoOp) {
  const Pose p = Pose::from_xyz_rpy({0.1, -0.2, 0.3}, {0.4, 0.5, -0.6});
  const Pose q = p * Pose::identity();
  const Pose r = Pose::identity() * p;
  EXPECT_LT((q.position - p.position).norm(), 1e-12);
  EXPECT_LT(quaternion_angle(q.orientation, p.orientation), 1e-12);
  EXPECT_LT((r.position - p.position).norm(), 1e-12);
  EXPECT_LT(quaternion_angle(r.orientation, p.orientation), 1e-12);
}

TEST(Pose, QuaternionStaysNormalizedThroughLongChains) {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  Pose p = Pose::identity();
  for (int i = 0; i < 10000; ++i) {
    p = p * Pose::from_xyz_rpy({0.01, 0.0, 0.0}, {ang(rng), 0.0, ang(rng)});
    EXPECT_LT(std::abs(p.orientation.norm() - 1.0), 1e-9);
  }
}

TEST(Pose, InverseComposesToIdentity) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const Pose p = Pose::from_xyz_rpy({ang(rng), ang(rng), ang(rng)},
                                      {ang(rng), ang(rng) / 2.0, ang(rng)});
    const Pose e = p * p.inverse();
    EXPECT_LT(e.position.norm(), 1e-12);
    EXPECT_LT(quaternion_angle(e.orientation, Eigen::Quaterniond::Identity()),
              1e-12);
  }
}

TEST(Pose, CompositionMatchesMatrixProduct) {
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> ang(-2.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const Pose a = Pose::from_xyz_rpy({ang(rng), ang(rng), ang(rng)},
                                      {ang(rng), ang(rng) / 2.0, ang(rng)});
    const Pose b = Pose::from_xyz_rpy({ang(rng), ang(rng), ang(rng)},
                                      {ang(rng), ang(rng) / 2.0, ang(rng)});
    const Eigen::Isometry3d expected = a.transform() * b.transform();
    const Pose c = a * b;
    EXPECT_LT((c.transform().matrix() - expected.matrix()).norm(), 1e-12);
  }
}

TEST(RpyRates, InvertsTheRateMatrix) {
  // omega = B * rpy_dot with columns z_hat, Rz*y_hat, Rz*Ry*x_hat; check
  // that mapping omega back recovers rpy_dot.
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> ang(-1.4, 1.4);
  for (int i = 0; i < 2000; ++i) {
    const Eigen::Vector3d rpy(ang(rng), ang(rng), ang(rng));
    const Eigen::Vector3d rates(ang(rng), ang(rng), ang(rng));
    const double sy = std::sin(rpy.z()), cy = std::cos(rpy.z());
    const double sp = std::sin(rpy.y()), cp = std::cos(rpy.y());
    Eigen::Matrix3d b;
    b << cy * cp, -sy, 0.0, sy * cp, cy, 0.0, -sp, 0.0, 1.0;
    const Eigen::Vector3d omega = b * rates;
    EXPECT_LT((rpy_rates_from_angular(rpy, omega) - rates).norm(), 1e-9);
  }
}

TEST(RpyRates, MatchesFiniteDifferenceOfRpyExtraction) {
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> ang(-1.2, 1.2);
  for (int i = 0; i < 500; ++i) {
    const Eigen::Vector3d rpy(ang(rng), ang(rng), ang(rng));
    Eigen::Vector3d omega(ang(rng), ang(rng), ang(rng));
    const Eigen::Matrix3d r = rotation_from_rpy(rpy);
    const double h = 1e-7;
    Eigen::Matrix3d w;
    w << 0, -omega.z(), omega.y(), omega.z(), 0, -omega.x(), -omega.y(),
        omega.x(), 0;
    const Eigen::Matrix3d rp = (Eigen::Matrix3d::Identity() + h * w) * r;
    const Eigen::Vector3d drpy =
        (rpy_from_rotation(rp) - rpy_from_rotation(r)) / h;
    EXPECT_LT((rpy_rates_from_angular(rpy, omega) - drpy).norm(), 1e-5);
  }
}

TEST(QuaternionAngle, KnownValuesAndDoubleCover) {
  const Eigen::Quaterniond id = Eigen::Quaterniond::Identity();
  const Eigen::Quaterniond z90(Eigen::AngleAxisd(M_PI / 2, Eigen::Vector3d::UnitZ()));
  EXPECT_NEAR(M_PI / 2, quaternion_angle(id, z90), 1e-12);
  const Eigen::Quaterniond neg(-z90.w(), -z90.x(), -z90.y(), -z90.z());
  EXPECT_NEAR(quaternion_angle(id, z90), quaternion_angle(id, neg), 1e-12);
  EXPECT_NEAR(0.0, quaternion_angle(z90, neg), 1e-7);
}

}  // namespace
}  // namespace ingrasp
