#pragma once

#include "dac/types.hpp"

namespace dac {

// Pitch magnitude at which Euler-angle kinematics are abandoned.
inline constexpr double kGimbalGuard = M_PI / 2.0 - 0.01;

Mat3 skew(const Vec3& a);

// Body-to-earth rotation for Z-Y-X Euler angles.
Mat3 body_to_earth(const Vec3& euler);

// Euler angle rates from body angular velocity. Throws numeric_error at the
// gimbal guard.
Mat3 euler_rate_matrix(const Vec3& euler);

// Gravity wrench G(eta) with W expressed in the body frame:
//   W = [-m g sin(theta), m g cos(theta) sin(phi), m g cos(theta) cos(phi)]
//   G = [-W; -S(rho) W]
Vec6 gravity_wrench(const Vec3& euler, const InertialParams& p,
                    double g = kGravity);

// M = [[m I, -m S(rho)], [m S(rho), I_M]]. Throws numeric_error when the
// result is not positive definite.
Mat6 mass_matrix(const InertialParams& p);

// C(v) = [[ m S(w),          -m S(S(w) rho)              ],
//         [-m S(S(w) rho),   -S(I_M w) + m S(S(V) rho)   ]]
// Skew-symmetric by construction, which makes d/dt(M) - 2C skew for fixed M.
Mat6 coriolis_matrix(const GeneralizedVelocity& v, const InertialParams& p);

// tau = tau0 + B delta + D v, plus the extra term on its target row when
// active at time t. delta is assumed already saturated by the caller.
Vec6 generalized_force(const Vec4& delta, const GeneralizedVelocity& v,
                       double t, const RegressorSet& reg,
                       const ExtraTermSpec& extra);

// vdot = M^-1 (tau + tauR - C v - G).
Vec6 acceleration(const GeneralizedVelocity& v, const Pose& pose,
                  const Vec6& tau, const InertialParams& p, const Vec6& tauR,
                  double g = kGravity);

struct PlantState {
  GeneralizedVelocity v;
  Pose pose;
};

// One RK4 step of the full rigid-body state under zero-order-hold delta.
// Angles are wrapped after the step; NaN or airspeed blowup throws.
PlantState step_plant(const PlantState& s, const Vec4& delta, double t,
                      double dt, const InertialParams& p,
                      const RegressorSet& reg, const ExtraTermSpec& extra,
                      double g = kGravity);

// Applies additive deltas and replaces the CG offset. Throws numeric_error
// when the damaged parameter set is invalid.
InertialParams apply_damage(const InertialParams& p, const DamageCase& d);

}  // namespace dac
