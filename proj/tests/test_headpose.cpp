#include <algorithm>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "semmap/headpose.hpp"

using namespace semmap;

namespace {

const CameraIntrinsics kCam{500, 500, 320, 240, 640, 480};

struct Trial {
  Mat3 r;
  Vec3 t;
};

Trial random_head(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ang(-60.0, 60.0), xy(-0.15, 0.15), z(0.6, 1.5);
  return {oracle::euler_compose(ang(rng), ang(rng), ang(rng)), Vec3(xy(rng), xy(rng), z(rng))};
}

Vec6 params_of(const Mat3& r, const Vec3& t) {
  const Eigen::AngleAxisd aa(r);
  Vec6 p;
  p << aa.axis() * aa.angle(), t;
  return p;
}

}  // namespace

TEST_CASE("rodrigues matches the angle-axis rotation") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const Vec3 w(u(rng), u(rng), u(rng));
    const Mat3 expected = Eigen::AngleAxisd(w.norm(), w.normalized()).toRotationMatrix();
    CHECK((rotation_from_axis_angle(w) - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(rotation_from_axis_angle(Vec3::Zero()).isIdentity(0));
  CHECK((rotation_from_axis_angle(Vec3(1e-12, 0, 0)) - Mat3::Identity()).norm() < 1e-11);
}

TEST_CASE("euler examples") {
  const auto id = euler_from_rotation(Mat3::Identity());
  CHECK(id.yaw == 0.0);
  CHECK(id.pitch == 0.0);
  CHECK(id.roll == 0.0);
  const auto ry = euler_from_rotation(oracle::euler_compose(30, 0, 0));
  CHECK(ry.yaw == doctest::Approx(30.0));
  CHECK(ry.pitch == doctest::Approx(0.0));
  CHECK(ry.roll == doctest::Approx(0.0));
  CHECK((rotation_from_euler(10, 20, 30) - oracle::euler_compose(10, 20, 30)).norm() < 1e-14);
}

TEST_CASE("property: euler round trip away from gimbal lock") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> yr(-179.0, 179.0), p(-85.0, 85.0);
  for (int i = 0; i < 1000; ++i) {
    const double yaw = yr(rng), pitch = p(rng), roll = yr(rng);
    const auto e = euler_from_rotation(oracle::euler_compose(yaw, pitch, roll));
    CHECK(std::abs(e.yaw - yaw) < 1e-9);
    CHECK(std::abs(e.pitch - pitch) < 1e-9);
    CHECK(std::abs(e.roll - roll) < 1e-9);
  }
}

TEST_CASE("euler at gimbal lock sets roll to zero and still reconstructs the rotation") {
  for (double pitch : {90.0, -90.0}) {
    const Mat3 r = oracle::euler_compose(25, pitch, 40);
    const auto e = euler_from_rotation(r);
    CHECK(e.roll == 0.0);
    CHECK(std::abs(e.pitch - pitch) < 1e-6);
    CHECK((oracle::euler_compose(e.yaw, e.pitch, e.roll) - r).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("is_attending examples and roll invariance") {
  HeadPose p;
  CHECK(is_attending(p, 15));
  p.roll = 80;
  CHECK(is_attending(p, 15));
  p.yaw = 20;
  CHECK_FALSE(is_attending(p, 15));
  p.yaw = 9;
  p.pitch = 12;
  CHECK(is_attending(p, 15));
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> a(-40, 40);
  for (int i = 0; i < 200; ++i) {
    HeadPose q;
    q.yaw = a(rng);
    q.pitch = a(rng);
    const bool base = is_attending(q);
    q.roll = 4 * a(rng);
    CHECK(is_attending(q) == base);
  }
}

TEST_CASE("face model validation") {
  CHECK_NOTHROW(FaceModel3D::generic_six_point().validate());
  FaceModel3D five = FaceModel3D::generic_six_point();
  five.names.pop_back();
  five.points.pop_back();
  try {
    five.validate();
    FAIL("expected DegenerateConfiguration");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateConfiguration);
  }
  FaceModel3D dup = FaceModel3D::generic_six_point();
  dup.names[1] = dup.names[0];
  CHECK_THROWS_AS(dup.validate(), Error);
  FaceModel3D collinear = FaceModel3D::generic_six_point();
  for (std::size_t i = 0; i < collinear.points.size(); ++i) collinear.points[i] = Vec3(0.01 * double(i), 0, 0);
  CHECK_THROWS_AS(collinear.validate(), Error);
}

TEST_CASE("alignment by name") {
  const FaceModel3D model = FaceModel3D::generic_six_point();
  LandmarkSet2D obs;
  for (std::size_t i = model.names.size(); i-- > 0;) {
    obs.names.push_back(model.names[i]);
    obs.points.emplace_back(double(i), 0.0);
  }
  const auto c = align(obs, model);
  REQUIRE(c.model.size() == 6);
  for (std::size_t j = 0; j < c.names.size(); ++j) {
    const auto idx = model.find(c.names[j]);
    REQUIRE(idx.has_value());
    CHECK(c.model[j] == model.points[*idx]);
    CHECK(c.image[j].x() == double(*idx));
  }
  obs.names[0] = "left_ear";
  CHECK_THROWS_AS(align(obs, model), Error);
}

TEST_CASE("residuals vanish at the true pose and the jacobian matches finite differences") {
  const FaceModel3D model = FaceModel3D::generic_six_point();
  std::mt19937_64 rng(44);
  for (int i = 0; i < 100; ++i) {
    const Trial tr = random_head(rng);
    const auto c = oracle::synthesize(model, tr.r, tr.t, kCam);
    const Vec6 truth = params_of(tr.r, tr.t);
    const auto terms = residuals_and_jacobian(truth, c, kCam);
    CHECK(terms.residuals.cwiseAbs().maxCoeff() < 1e-9);

    std::uniform_real_distribution<double> perturb(-0.2, 0.2);
    Vec6 x = truth;
    for (int j = 0; j < 6; ++j) x(j) += perturb(rng) * (j < 3 ? 1.0 : 0.1);
    const auto at_x = residuals_and_jacobian(x, c, kCam);
    CHECK((at_x.jacobian - oracle::numeric_jacobian(x, c, kCam)).cwiseAbs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("translation column of the jacobian at zero rotation") {
  const FaceModel3D model = FaceModel3D::generic_six_point();
  const auto c = oracle::synthesize(model, Mat3::Identity(), Vec3(0, 0, 1), kCam);
  Vec6 x = Vec6::Zero();
  x(5) = 1.0;
  const auto terms = residuals_and_jacobian(x, c, kCam);
  for (std::size_t j = 0; j < c.model.size(); ++j) {
    const double z = c.model[j].z() + 1.0;
    CHECK(terms.jacobian(2 * Eigen::Index(j), 3) == doctest::Approx(kCam.fx / z).epsilon(1e-12));
    CHECK(terms.jacobian(2 * Eigen::Index(j), 4) == 0.0);
    CHECK(terms.jacobian(2 * Eigen::Index(j) + 1, 4) == doctest::Approx(kCam.fy / z).epsilon(1e-12));
  }
}

TEST_CASE("points behind the camera are rejected") {
  const FaceModel3D model = FaceModel3D::generic_six_point();
  const auto c = oracle::synthesize(model, Mat3::Identity(), Vec3(0, 0, 1), kCam);
  Vec6 x = Vec6::Zero();
  x(5) = -1.0;
  try {
    residuals_and_jacobian(x, c, kCam);
    FAIL("expected PointBehindCamera");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PointBehindCamera);
  }
}

TEST_CASE("solver started at the optimum stops immediately") {
  const FaceModel3D model = FaceModel3D::generic_six_point();
  const Mat3 r = oracle::euler_compose(10, -5, 3);
  const Vec3 t(0.02, -0.01, 0.9);
  const auto c = oracle::synthesize(model, r, t, kCam);
  const HeadPose pose = lm_solve_pose(c, kCam, params_of(r, t));
  CHECK(pose.rms_residual < 1e-9);
  CHECK(pose.iterations <= 3);
}

TEST_CASE("noise-free synthesize-then-solve recovers the pose") {
  const FaceModel3D model = FaceModel3D::generic_six_point();
  std::mt19937_64 rng(45);
  int ok = 0;
  for (int i = 0; i < 100; ++i) {
    const Trial tr = random_head(rng);
    const HeadPose pose = lm_solve_pose(oracle::synthesize(model, tr.r, tr.t, kCam), kCam);
    if (oracle::rotation_error_deg(pose.rotation, tr.r) <= 0.1 && (pose.translation - tr.t).norm() <= 1e-4) ++ok;
    const auto e = euler_from_rotation(pose.rotation);
    CHECK(pose.yaw == e.yaw);
  }
  CHECK(ok >= 99);
}

TEST_CASE("pixel noise keeps the median rotation error small") {
  const FaceModel3D model = FaceModel3D::generic_six_point();
  std::mt19937_64 rng(46);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> errs;
  for (int i = 0; i < 100; ++i) {
    const Trial tr = random_head(rng);
    auto c = oracle::synthesize(model, tr.r, tr.t, kCam);
    for (auto& p : c.image) p += Vec2(noise(rng), noise(rng));
    try {
      errs.push_back(oracle::rotation_error_deg(lm_solve_pose(c, kCam).rotation, tr.r));
    } catch (const Error&) {
      errs.push_back(180.0);
    }
  }
  std::nth_element(errs.begin(), errs.begin() + 50, errs.end());
  CHECK(errs[50] <= 3.0);
}

TEST_CASE("accepted steps never raise the cost over the start") {
  const FaceModel3D model = FaceModel3D::generic_six_point();
  std::mt19937_64 rng(47);
  std::normal_distribution<double> noise(0.0, 2.0);
  for (int i = 0; i < 30; ++i) {
    const Trial tr = random_head(rng);
    auto c = oracle::synthesize(model, tr.r, tr.t, kCam);
    for (auto& p : c.image) p += Vec2(noise(rng), noise(rng));
    const Vec6 init = initial_guess(c, kCam);
    const double start = residuals_and_jacobian(init, c, kCam).residuals.squaredNorm();
    const HeadPose pose = lm_solve_pose(c, kCam, init);
    CHECK(pose.rms_residual * pose.rms_residual * double(c.model.size()) <= start + 1e-9);
  }
}

TEST_CASE("initial guess scales depth from the eye corners") {
  const FaceModel3D model = FaceModel3D::generic_six_point();
  const auto c = oracle::synthesize(model, Mat3::Identity(), Vec3(0, 0, 1.2), kCam);
  const Vec6 g = initial_guess(c, kCam);
  CHECK(g.head<3>().norm() == 0.0);
  CHECK(g(5) == doctest::Approx(1.2).epsilon(1e-9));
}

TEST_CASE("lm options validation") {
  LmOptions o;
  o.max_iterations = 0;
  CHECK_THROWS_AS(o.validate(), Error);
}
