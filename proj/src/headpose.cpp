#include "semmap/headpose.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

namespace semmap {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return s;
}

double wrap_degrees(double a) {
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

}  // namespace

void FaceModel3D::validate() const {
  if (names.size() != points.size()) throw Error(ErrorCode::SchemaError, "face model names/points size mismatch");
  if (points.size() < 6) {
    throw Error(ErrorCode::DegenerateConfiguration, "face model needs at least 6 landmarks");
  }
  if (std::set<std::string>(names.begin(), names.end()).size() != names.size()) {
    throw Error(ErrorCode::SchemaError, "face model landmark names must be unique");
  }
  Vec3 mean = Vec3::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : points) cov += (p - mean) * (p - mean).transpose();
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 ev = eig.eigenvalues();
  if (!(ev(2) > 0.0) || ev(0) / ev(2) < 1e-6) {
    throw Error(ErrorCode::DegenerateConfiguration, "face model landmarks are (nearly) coplanar");
  }
}

std::optional<std::size_t> FaceModel3D::find(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

FaceModel3D FaceModel3D::generic_six_point() {
  // Keep in sync with data/face_model_6pt.json.
  FaceModel3D m;
  m.names = {"nose_tip", "chin", "left_eye_outer", "right_eye_outer", "left_mouth", "right_mouth"};
  m.points = {
      {0.0, 0.035, -0.040},  {0.0, 0.100, -0.010},   {-0.045, 0.0, 0.0},
      {0.045, 0.0, 0.0},     {-0.028, 0.065, -0.015}, {0.028, 0.065, -0.015},
  };
  return m;
}

Mat3 rotation_from_axis_angle(const Vec3& omega) {
  const double theta = omega.norm();
  if (theta < 1e-12) return Mat3::Identity() + skew(omega);
  return Eigen::AngleAxisd(theta, omega / theta).toRotationMatrix();
}

Mat3 rotation_from_euler(double yaw_deg, double pitch_deg, double roll_deg) {
  return (Eigen::AngleAxisd(yaw_deg / kDeg, Vec3::UnitY()) * Eigen::AngleAxisd(pitch_deg / kDeg, Vec3::UnitX()) *
          Eigen::AngleAxisd(roll_deg / kDeg, Vec3::UnitZ()))
      .toRotationMatrix();
}

EulerAngles euler_from_rotation(const Mat3& r) {
  // R = Ry(a) Rx(b) Rz(c):
  //   R(0,2) = sin a cos b, R(2,2) = cos a cos b, R(1,2) = -sin b,
  //   R(1,0) = cos b sin c, R(1,1) = cos b cos c.
  const double cos_pitch = std::hypot(r(1, 0), r(1, 1));
  EulerAngles e;
  e.pitch = std::atan2(-r(1, 2), cos_pitch) * kDeg;
  if (cos_pitch < 1e-12) {
    e.roll = 0.0;
    e.yaw = wrap_degrees(std::atan2(-r(2, 0), r(0, 0)) * kDeg);
  } else {
    e.yaw = wrap_degrees(std::atan2(r(0, 2), r(2, 2)) * kDeg);
    e.roll = wrap_degrees(std::atan2(r(1, 0), r(1, 1)) * kDeg);
  }
  return e;
}

Correspondences align(const LandmarkSet2D& obs, const FaceModel3D& model) {
  if (obs.names.size() != obs.points.size()) throw Error(ErrorCode::SchemaError, "landmark names/points mismatch");
  Correspondences c;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < obs.names.size(); ++i) {
    const auto idx = model.find(obs.names[i]);
    if (!idx) throw Error(ErrorCode::SchemaError, "landmark '" + obs.names[i] + "' is not in the face model");
    if (!seen.insert(obs.names[i]).second) {
      throw Error(ErrorCode::SchemaError, "landmark '" + obs.names[i] + "' given twice");
    }
    c.names.push_back(obs.names[i]);
    c.model.push_back(model.points[*idx]);
    c.image.push_back(obs.points[i]);
  }
  return c;
}

ReprojectionTerms residuals_and_jacobian(const Vec6& params, const Correspondences& c, const CameraIntrinsics& k) {
  const Vec3 omega = params.head<3>();
  const Vec3 t = params.tail<3>();
  const Mat3 r = rotation_from_axis_angle(omega);
  const double theta2 = omega.squaredNorm();
  const auto n = static_cast<Eigen::Index>(c.model.size());

  ReprojectionTerms out;
  out.residuals.resize(2 * n);
  out.jacobian.resize(2 * n, 6);

  // d(RX)/d(omega_i) = (w_i (w x RX) + (w x (I - R) e_i) x RX) / |w|^2
  Mat3 basis_terms;
  if (theta2 > 1e-16) {
    const Mat3 i_minus_r = Mat3::Identity() - r;
    for (int i = 0; i < 3; ++i) basis_terms.col(i) = omega.cross(i_minus_r.col(i));
  }

  for (Eigen::Index j = 0; j < n; ++j) {
    const Vec3 rx = r * c.model[static_cast<std::size_t>(j)];
    const Vec3 p = rx + t;
    if (!(p.z() > 1e-9)) throw Error(ErrorCode::PointBehindCamera, "landmark " + std::to_string(j));
    const double inv_z = 1.0 / p.z();
    const Vec2& obs = c.image[static_cast<std::size_t>(j)];
    out.residuals(2 * j) = k.cx + k.fx * p.x() * inv_z - obs.x();
    out.residuals(2 * j + 1) = k.cy + k.fy * p.y() * inv_z - obs.y();

    Eigen::Matrix<double, 2, 3> dproj;
    dproj << k.fx * inv_z, 0.0, -k.fx * p.x() * inv_z * inv_z, 0.0, k.fy * inv_z, -k.fy * p.y() * inv_z * inv_z;

    Mat3 drot;
    if (theta2 > 1e-16) {
      const Vec3 w_cross_rx = omega.cross(rx);
      for (int i = 0; i < 3; ++i) drot.col(i) = (omega(i) * w_cross_rx + basis_terms.col(i).cross(rx)) / theta2;
    } else {
      drot = -skew(rx);
    }
    out.jacobian.block<2, 3>(2 * j, 0) = dproj * drot;
    out.jacobian.block<2, 3>(2 * j, 3) = dproj;
  }
  return out;
}

void LmOptions::validate() const {
  if (max_iterations < 1) throw Error(ErrorCode::ConfigError, "lm_max_iterations must be >= 1");
  if (!(initial_damping > 0.0)) throw Error(ErrorCode::ConfigError, "lm_initial_damping must be positive");
  if (!(step_tolerance > 0.0)) throw Error(ErrorCode::ConfigError, "lm_step_tolerance must be positive");
  if (!(cost_tolerance > 0.0)) throw Error(ErrorCode::ConfigError, "lm_cost_tolerance must be positive");
  if (!(accept_rms > 0.0)) throw Error(ErrorCode::ConfigError, "lm_accept_rms must be positive");
}

Vec6 initial_guess(const Correspondences& c, const CameraIntrinsics& k) {
  double model_span = 0.0;
  double pixel_span = 0.0;

  std::optional<std::size_t> li, ri;
  for (std::size_t i = 0; i < c.names.size(); ++i) {
    if (c.names[i] == "left_eye_outer") li = i;
    if (c.names[i] == "right_eye_outer") ri = i;
  }
  if (li && ri) {
    model_span = (c.model[*li] - c.model[*ri]).head<2>().norm();
    pixel_span = (c.image[*li] - c.image[*ri]).norm();
  }
  if (!(model_span > 0.0 && pixel_span > 0.0)) {
    Vec2 mm = Vec2::Zero(), pm = Vec2::Zero();
    for (std::size_t i = 0; i < c.model.size(); ++i) {
      mm += c.model[i].head<2>();
      pm += c.image[i];
    }
    mm /= static_cast<double>(c.model.size());
    pm /= static_cast<double>(c.model.size());
    for (std::size_t i = 0; i < c.model.size(); ++i) {
      model_span += (c.model[i].head<2>() - mm).squaredNorm();
      pixel_span += (c.image[i] - pm).squaredNorm();
    }
    model_span = std::sqrt(model_span);
    pixel_span = std::sqrt(pixel_span);
  }
  if (!(pixel_span > 0.0)) throw Error(ErrorCode::DegenerateConfiguration, "all landmarks coincide");
  Vec6 x = Vec6::Zero();
  x(5) = k.fx * model_span / pixel_span;
  return x;
}

namespace {

// Normal matrices whose Jacobi-scaled spectrum spans more than this are treated as singular.
constexpr double kMaxCondition = 1e14;

void check_conditioning(const Eigen::Matrix<double, 6, 6>& a) {
  const Vec6 d = a.diagonal();
  if ((d.array() <= 0.0).any() || !d.allFinite()) {
    throw Error(ErrorCode::DegenerateConfiguration, "normal equations have an unobservable parameter");
  }
  const Vec6 s = d.cwiseSqrt().cwiseInverse();
  const Eigen::Matrix<double, 6, 6> scaled = s.asDiagonal() * a * s.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(scaled);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(5);
  if (!(lo > 0.0) || hi / lo > kMaxCondition) {
    throw Error(ErrorCode::DegenerateConfiguration, "normal equations are singular");
  }
}

HeadPose make_pose(const Vec6& x, double cost, std::size_t n, int iterations) {
  HeadPose pose;
  pose.rotation = rotation_from_axis_angle(x.head<3>());
  pose.translation = x.tail<3>();
  const EulerAngles e = euler_from_rotation(pose.rotation);
  pose.yaw = e.yaw;
  pose.pitch = e.pitch;
  pose.roll = e.roll;
  pose.rms_residual = std::sqrt(cost / static_cast<double>(n));
  pose.iterations = iterations;
  return pose;
}

}  // namespace

HeadPose lm_solve_pose(const Correspondences& c, const CameraIntrinsics& k, const std::optional<Vec6>& init,
                       const LmOptions& opts) {
  opts.validate();
  if (c.model.size() != c.image.size()) throw Error(ErrorCode::SchemaError, "correspondence size mismatch");
  if (c.model.size() < 6) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "need at least 6 landmarks, got " + std::to_string(c.model.size()));
  }

  Vec6 x = init ? *init : initial_guess(c, k);
  ReprojectionTerms terms = residuals_and_jacobian(x, c, k);
  double cost = terms.residuals.squaredNorm();
  double lambda = opts.initial_damping;

  Eigen::Matrix<double, 6, 6> a = terms.jacobian.transpose() * terms.jacobian;
  check_conditioning(a);

  int iterations = 0;
  bool converged = false;
  while (!converged && iterations < opts.max_iterations) {
    ++iterations;
    a = terms.jacobian.transpose() * terms.jacobian;
    const Vec6 g = terms.jacobian.transpose() * terms.residuals;
    const Vec6 diag = a.diagonal().cwiseMax(1e-12 * a.diagonal().maxCoeff());

    for (;;) {
      Eigen::Matrix<double, 6, 6> damped = a;
      damped.diagonal() += lambda * diag;
      const Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(damped);
      const Vec6 delta = ldlt.solve(-g);
      if (ldlt.info() != Eigen::Success || !delta.allFinite()) {
        lambda *= 10.0;
        if (lambda > 1e16) throw Error(ErrorCode::DegenerateConfiguration, "damping cannot rescue the system");
        continue;
      }
      if (delta.norm() < opts.step_tolerance) {
        converged = true;
        break;
      }
      const Vec6 candidate = x + delta;
      std::optional<ReprojectionTerms> next;
      try {
        next = residuals_and_jacobian(candidate, c, k);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::PointBehindCamera) throw;
      }
      const double next_cost = next ? next->residuals.squaredNorm() : std::numeric_limits<double>::infinity();
      if (next_cost < cost) {
        const double decrease = cost - next_cost;
        x = candidate;
        terms = std::move(*next);
        cost = next_cost;
        lambda = std::max(lambda / 10.0, 1e-15);
        if (decrease < opts.cost_tolerance) converged = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e16) {
        // No step, however short, improves the cost: numerically at the minimum.
        converged = true;
        break;
      }
    }
  }

  HeadPose pose = make_pose(x, cost, c.model.size(), iterations);
  if (!converged && pose.rms_residual > opts.accept_rms) {
    throw Error(ErrorCode::NoConvergence, "rms " + std::to_string(pose.rms_residual) + " px after " +
                                              std::to_string(iterations) + " iterations");
  }
  return pose;
}

HeadPose lm_solve_pose(const LandmarkSet2D& obs, const FaceModel3D& model, const CameraIntrinsics& k,
                       const std::optional<Vec6>& init, const LmOptions& opts) {
  return lm_solve_pose(align(obs, model), k, init, opts);
}

bool is_attending(const HeadPose& pose, double cone_deg) {
  return std::sqrt(pose.yaw * pose.yaw + pose.pitch * pose.pitch) <= cone_deg;
}

}  // namespace semmap
