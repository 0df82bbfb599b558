#include "dac/airframe.hpp"

#include <sstream>

#include "dac/integrate.hpp"

namespace dac {

Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
      -a.y(), a.x(), 0.0;
  return s;
}

Mat3 body_to_earth(const Vec3& euler) {
  const double cphi = std::cos(euler.x()), sphi = std::sin(euler.x());
  const double cth = std::cos(euler.y()), sth = std::sin(euler.y());
  const double cpsi = std::cos(euler.z()), spsi = std::sin(euler.z());
  Mat3 r;
  r << cth * cpsi, sphi * sth * cpsi - cphi * spsi, cphi * sth * cpsi + sphi * spsi,
       cth * spsi, sphi * sth * spsi + cphi * cpsi, cphi * sth * spsi - sphi * cpsi,
      -sth,        sphi * cth,                      cphi * cth;
  return r;
}

Mat3 euler_rate_matrix(const Vec3& euler) {
  if (std::abs(euler.y()) >= kGimbalGuard) {
    std::ostringstream os;
    os << "pitch " << euler.y() << " rad at the gimbal guard";
    throw numeric_error(os.str());
  }
  const double cphi = std::cos(euler.x()), sphi = std::sin(euler.x());
  const double cth = std::cos(euler.y()), tth = std::tan(euler.y());
  Mat3 e;
  e << 1.0, sphi * tth, cphi * tth,
       0.0, cphi, -sphi,
       0.0, sphi / cth, cphi / cth;
  return e;
}

Vec6 gravity_wrench(const Vec3& euler, const InertialParams& p, double g) {
  const double mg = p.m * g;
  const Vec3 W(-mg * std::sin(euler.y()),
               mg * std::cos(euler.y()) * std::sin(euler.x()),
               mg * std::cos(euler.y()) * std::cos(euler.x()));
  Vec6 G;
  G << -W, -skew(p.rho) * W;
  return G;
}

Mat6 mass_matrix(const InertialParams& p) {
  Mat6 M;
  M.topLeftCorner<3, 3>() = p.m * Mat3::Identity();
  M.topRightCorner<3, 3>() = -p.m * skew(p.rho);
  M.bottomLeftCorner<3, 3>() = p.m * skew(p.rho);
  M.bottomRightCorner<3, 3>() = p.inertia_tensor();
  Eigen::LLT<Mat6> llt(M);
  if (llt.info() != Eigen::Success) {
    throw numeric_error("mass matrix is not positive definite");
  }
  return M;
}

Mat6 coriolis_matrix(const GeneralizedVelocity& v, const InertialParams& p) {
  const Mat3 off = -p.m * skew(skew(v.angular) * p.rho);
  Mat6 C;
  C.topLeftCorner<3, 3>() = p.m * skew(v.angular);
  C.topRightCorner<3, 3>() = off;
  C.bottomLeftCorner<3, 3>() = off;
  C.bottomRightCorner<3, 3>() =
      -skew(p.inertia_tensor() * v.angular) + p.m * skew(skew(v.linear) * p.rho);
  return C;
}

Vec6 generalized_force(const Vec4& delta, const GeneralizedVelocity& v,
                       double t, const RegressorSet& reg,
                       const ExtraTermSpec& extra) {
  Vec6 tau = reg.tau0 + reg.D * v.vec();
  if (reg.B_negative) {
    for (int i = 0; i < kNumActuators; ++i) {
      const Mat64& B = delta[i] < 0.0 ? *reg.B_negative : reg.B;
      tau += B.col(i) * delta[i];
    }
  } else {
    tau += reg.B * delta;
  }
  if (extra.enabled && t >= extra.activation_time) {
    const double ramp =
        1.0 - std::exp(-(t - extra.activation_time) / extra.ramp_time_constant);
    tau[extra.target_channel] += extra.amplitude *
                                 std::sin(extra.frequency_gain * v.angular.z()) *
                                 delta[kRudderIndex] * ramp;
  }
  return tau;
}

Vec6 acceleration(const GeneralizedVelocity& v, const Pose& pose,
                  const Vec6& tau, const InertialParams& p, const Vec6& tauR,
                  double g) {
  const Mat6 M = mass_matrix(p);
  const Vec6 rhs = tau + tauR - coriolis_matrix(v, p) * v.vec() -
                   gravity_wrench(pose.euler, p, g);
  return M.llt().solve(rhs);
}

namespace {

using State12 = Eigen::Matrix<double, 12, 1>;

State12 pack(const PlantState& s) {
  State12 x;
  x << s.v.vec(), s.pose.position, s.pose.euler;
  return x;
}

PlantState unpack(const State12& x) {
  PlantState s;
  s.v = GeneralizedVelocity::from_vec(x.head<6>());
  s.pose.position = x.segment<3>(6);
  s.pose.euler = x.tail<3>();
  return s;
}

}  // namespace

PlantState step_plant(const PlantState& s, const Vec4& delta, double t,
                      double dt, const InertialParams& p,
                      const RegressorSet& reg, const ExtraTermSpec& extra,
                      double g) {
  auto rhs = [&](double ti, const State12& x) -> State12 {
    const PlantState si = unpack(x);
    const Vec6 tau = generalized_force(delta, si.v, ti, reg, extra);
    State12 dx;
    dx << acceleration(si.v, si.pose, tau, p, reg.tauR, g),
        body_to_earth(si.pose.euler) * si.v.linear,
        euler_rate_matrix(si.pose.euler) * si.v.angular;
    return dx;
  };
  State12 x = rk4_step(rhs, t, pack(s), dt);
  for (int i = 9; i < 12; ++i) x[i] = wrap_angle(x[i]);
  if (!x.allFinite()) {
    throw numeric_error("non-finite plant state after integration step");
  }
  PlantState out = unpack(x);
  if (out.v.linear.norm() > kAirspeedCeiling) {
    throw numeric_error("airspeed exceeded sanity ceiling");
  }
  return out;
}

InertialParams apply_damage(const InertialParams& p, const DamageCase& d) {
  InertialParams out = p;
  out.m += d.delta_m;
  out.Ixx += d.delta_Ixx;
  out.Iyy += d.delta_Iyy;
  out.Izz += d.delta_Izz;
  out.Ixz += d.delta_Ixz;
  out.Iyz += d.delta_Iyz;
  out.Ixy += d.delta_Ixy;
  out.rho = d.new_rho;
  if (!out.valid()) {
    throw numeric_error("damaged inertial parameter set is not physical");
  }
  return out;
}

}  // namespace dac
