#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "semmap/geometry.hpp"

namespace semmap {

using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Canonical head frame: origin between the eyes, x right, y down, z pointing
/// away from a camera the face is looking into. A frontal face therefore has
/// identity rotation.
struct FaceModel3D {
  std::vector<std::string> names;
  std::vector<Vec3> points;

  /// Checks size >= 6, unique names and a non-planar point spread.
  void validate() const;
  std::optional<std::size_t> find(const std::string& name) const;

  static FaceModel3D generic_six_point();
  static FaceModel3D load(const std::filesystem::path& path);
};

struct LandmarkSet2D {
  std::int64_t frame = 0;
  std::int64_t face_id = 0;
  std::vector<std::string> names;
  std::vector<Vec2> points;
};

struct HeadPose {
  Mat3 rotation = Mat3::Identity();  // model to camera
  Vec3 translation = Vec3::Zero();
  double yaw = 0.0;  // degrees
  double pitch = 0.0;
  double roll = 0.0;
  double rms_residual = 0.0;  // pixels
  int iterations = 0;
};

struct EulerAngles {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
};

/// Rotation from axis-angle (Rodrigues) vector.
Mat3 rotation_from_axis_angle(const Vec3& omega);

/// Decomposes R = Ry(yaw) * Rx(pitch) * Rz(roll), angles in degrees.
/// At |pitch| = 90 the roll is pinned to 0.
EulerAngles euler_from_rotation(const Mat3& rotation);
Mat3 rotation_from_euler(double yaw_deg, double pitch_deg, double roll_deg);

/// Model points paired with observed pixels by landmark name.
struct Correspondences {
  std::vector<std::string> names;
  std::vector<Vec3> model;
  std::vector<Vec2> image;
};

/// Throws SchemaError for names unknown to the model.
Correspondences align(const LandmarkSet2D& obs, const FaceModel3D& model);

struct ReprojectionTerms {
  Eigen::VectorXd residuals;  // 2N, (u_proj - u_obs, v_proj - v_obs) per point
  Eigen::MatrixXd jacobian;   // 2N x 6, columns (omega, t)
};

ReprojectionTerms residuals_and_jacobian(const Vec6& params, const Correspondences& c,
                                         const CameraIntrinsics& k);

struct LmOptions {
  int max_iterations = 100;
  double initial_damping = 1e-3;
  double step_tolerance = 1e-8;
  double cost_tolerance = 1e-12;
  double accept_rms = 5.0;  // px, NoConvergence threshold at the iteration cap

  void validate() const;
};

HeadPose lm_solve_pose(const Correspondences& c, const CameraIntrinsics& k,
                       const std::optional<Vec6>& init = std::nullopt, const LmOptions& opts = {});

HeadPose lm_solve_pose(const LandmarkSet2D& obs, const FaceModel3D& model, const CameraIntrinsics& k,
                       const std::optional<Vec6>& init = std::nullopt, const LmOptions& opts = {});

/// Frontal-facing initialization: zero rotation, depth from the outer-eye-corner
/// distance ratio (RMS landmark spread when either corner is missing).
Vec6 initial_guess(const Correspondences& c, const CameraIntrinsics& k);

/// True when the facing direction is within `cone_deg` of the optical axis. Roll is ignored.
bool is_attending(const HeadPose& pose, double cone_deg = 15.0);

}  // namespace semmap
