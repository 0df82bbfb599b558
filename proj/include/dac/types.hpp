#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>

#include "dac/errors.hpp"

namespace dac {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec10 = Eigen::Matrix<double, 10, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat64 = Eigen::Matrix<double, 6, 4>;

// ft/s^2, all forces in lbf, moments in lbf*ft, mass in slugs internally.
inline constexpr double kGravity = 32.174;

// Conversion for configs that tag mass values in pounds.
inline constexpr double kLbToSlug = 1.0 / kGravity;

// Actuator vector order: [thrust, rudder, aileron, elevator].
inline constexpr int kNumActuators = 4;
inline constexpr int kRudderIndex = 1;

// Sanity ceiling on airspeed magnitude; anything beyond this is treated as a
// diverged simulation rather than a physical state.
inline constexpr double kAirspeedCeiling = 500.0;

inline double wrap_angle(double a) {
  // Wrap to (-pi, pi].
  a = std::remainder(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

// Body-frame twist: linear velocity V and angular velocity omega.
struct GeneralizedVelocity {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();

  Vec6 vec() const {
    Vec6 v;
    v << linear, angular;
    return v;
  }
  static GeneralizedVelocity from_vec(const Vec6& v) {
    return {v.head<3>(), v.tail<3>()};
  }
};

// Earth-fixed position plus Z-Y-X Euler attitude [phi, theta, psi].
struct Pose {
  Vec3 position = Vec3::Zero();
  Vec3 euler = Vec3::Zero();

  double phi() const { return euler.x(); }
  double theta() const { return euler.y(); }
  double psi() const { return euler.z(); }
};

// Rigid-body inertial parameter set. rho is the offset from the body frame
// origin to the center of gravity, which is nonzero after damage.
struct InertialParams {
  double m = 0.0;
  double Ixx = 0.0, Iyy = 0.0, Izz = 0.0;
  double Ixz = 0.0, Iyz = 0.0, Ixy = 0.0;
  Vec3 rho = Vec3::Zero();

  Mat3 inertia_tensor() const {
    Mat3 I;
    I << Ixx, -Ixy, -Ixz,
        -Ixy, Iyy, -Iyz,
        -Ixz, -Iyz, Izz;
    return I;
  }

  bool valid() const {
    if (!(m > 0.0)) return false;
    Eigen::LLT<Mat3> llt(inertia_tensor());
    return llt.info() == Eigen::Success;
  }

  // Flat layout [m, Ixx, Iyy, Izz, Ixz, Iyz, Ixy, rho_x, rho_y, rho_z],
  // shared with the estimator's parameter block.
  Vec10 flatten() const {
    Vec10 p;
    p << m, Ixx, Iyy, Izz, Ixz, Iyz, Ixy, rho.x(), rho.y(), rho.z();
    return p;
  }
  static InertialParams unflatten(const Vec10& p) {
    InertialParams out;
    out.m = p[0];
    out.Ixx = p[1];
    out.Iyy = p[2];
    out.Izz = p[3];
    out.Ixz = p[4];
    out.Iyz = p[5];
    out.Ixy = p[6];
    out.rho = Vec3(p[7], p[8], p[9]);
    return out;
  }
};

// Affine force model tau = tau0 + B*delta + D*v. tauR is the known residual
// wrench of the reference flight condition. B_negative, when present, is used
// column-wise for negative deflections.
struct RegressorSet {
  Mat64 B = Mat64::Zero();
  Mat6 D = Mat6::Zero();
  Vec6 tau0 = Vec6::Zero();
  Vec6 tauR = Vec6::Zero();
  std::optional<Mat64> B_negative;
};

// Unmodeled disturbance appended to one wrench row once activated:
//   amplitude * sin(frequency_gain * r) * delta_rudder, faded in with an
//   exponential ramp of the given time constant.
struct ExtraTermSpec {
  double amplitude = 5.0;
  double frequency_gain = 10.0;
  int target_channel = 5;  // yaw moment row
  double ramp_time_constant = 2.0;
  double activation_time = 30.0;
  bool enabled = false;
};

// Abrupt airframe change: additive mass/inertia deltas, a replacement CG
// offset, and an optional additive change to the control effectiveness B.
struct DamageCase {
  double delta_m = 0.0;  // slugs
  double delta_Ixx = 0.0, delta_Iyy = 0.0, delta_Izz = 0.0;
  double delta_Ixz = 0.0, delta_Iyz = 0.0, delta_Ixy = 0.0;
  Vec3 new_rho = Vec3::Zero();
  std::optional<Mat64> delta_B;
};

}  // namespace dac
