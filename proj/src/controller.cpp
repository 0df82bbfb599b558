#include "dac/controller.hpp"

#include <algorithm>

namespace dac {

Vec6 control_wrench(const GeneralizedVelocity& v, const Pose& pose,
                    const DesiredMotion& desired, const BlendedModel& model,
                    const ControllerGains& gains) {
  const Vec6 vtilde = v.vec() - desired.v_d.vec();
  Vec6 tau_c = model.G(pose) + model.C(v) * desired.v_d.vec() +
               model.M * desired.vdot_d - gains.Gamma.cwiseProduct(vtilde) -
               model.tauR - model.tau0 - model.D * v.vec();
  for (int i = 0; i < 6; ++i) {
    tau_c[i] -= gains.chi[i] * std::tanh(vtilde[i] / gains.epsilon);
  }
  return tau_c;
}

AllocationResult allocate(const Vec6& tau_c, const Eigen::MatrixXd& B,
                          double eps_delta, const Eigen::VectorXd& hold) {
  const int k = static_cast<int>(B.cols());
  AllocationResult out;
  out.delta = hold.size() == k ? hold : Eigen::VectorXd::Zero(k);

  std::vector<int> survivors;
  for (int i = 0; i < k; ++i) {
    if (B.col(i).norm() <= eps_delta) {
      out.redacted.push_back(i);
    } else {
      survivors.push_back(i);
    }
  }
  if (survivors.empty()) {
    throw allocation_error("all actuator columns redacted");
  }

  Eigen::MatrixXd Bs(6, survivors.size());
  for (size_t j = 0; j < survivors.size(); ++j) Bs.col(j) = B.col(survivors[j]);

  const Eigen::MatrixXd N = Bs.transpose() * Bs;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(N);
  if (!lu.isInvertible()) {
    throw allocation_error("normal matrix singular after redaction");
  }
  const Eigen::VectorXd ds = lu.solve(Bs.transpose() * tau_c);
  for (size_t j = 0; j < survivors.size(); ++j) out.delta[survivors[j]] = ds[j];
  return out;
}

SaturationResult saturate(const Vec4& delta, const ActuatorLimits& limits) {
  SaturationResult out;
  for (int i = 0; i < 4; ++i) {
    out.delta[i] = std::clamp(delta[i], limits.lower[i], limits.upper[i]);
    out.clipped[i] = out.delta[i] != delta[i];
  }
  return out;
}

ExcitationConfig ExcitationConfig::standard(const ActuatorLimits& limits) {
  const Vec4 range = limits.range();
  ExcitationConfig cfg;
  cfg.tones = {{1, 0.01 * range[1], 0.7},
               {2, 0.01 * range[2], 1.3},
               {3, 0.01 * range[3], 2.1}};
  cfg.noise_amplitude = 0.002 * range;
  return cfg;
}

Vec4 ExcitationSource::at(double t) {
  Vec4 e = Vec4::Zero();
  for (const auto& tone : cfg_.tones) {
    e[tone.channel] += tone.amplitude * std::sin(tone.frequency * t);
  }
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 4; ++i) {
    e[i] += cfg_.noise_amplitude[i] * u(rng_);
  }
  return e;
}

}  // namespace dac
