#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "dac/blend.hpp"
#include "dac/types.hpp"

namespace dac {

// Desired twist with its time derivative for feedforward.
struct DesiredMotion {
  GeneralizedVelocity v_d;
  Vec6 vdot_d = Vec6::Zero();
};

struct ControllerGains {
  Vec6 Gamma = (Vec6() << 2, 2, 2, 4, 4, 4).finished();
  Vec6 chi = Vec6::Zero();       // robust term amplitude per channel
  double epsilon = 0.05;         // tanh boundary layer width
};

struct ActuatorLimits {
  Vec4 lower = (Vec4() << -0.5, -0.5236, -0.5236, -0.5236).finished();
  Vec4 upper = (Vec4() << 0.5, 0.5236, 0.5236, 0.5236).finished();

  Vec4 range() const { return upper - lower; }
};

// Robust velocity regulation wrench:
//   tau_c = G + C v_d + M vdot_d - Gamma vtilde - tauR - tau0 - D v
//           - chi .* tanh(vtilde / eps)
Vec6 control_wrench(const GeneralizedVelocity& v, const Pose& pose,
                    const DesiredMotion& desired, const BlendedModel& model,
                    const ControllerGains& gains);

struct AllocationResult {
  Eigen::VectorXd delta;
  std::vector<int> redacted;
};

// Least-squares allocation delta = (B^T B)^-1 B^T tau_c with columns whose
// norm falls at or below eps_delta redacted first. Redacted channels keep
// their entry from hold. Throws allocation_error when the surviving normal
// matrix is singular.
AllocationResult allocate(const Vec6& tau_c, const Eigen::MatrixXd& B,
                          double eps_delta,
                          const Eigen::VectorXd& hold = Eigen::VectorXd());

struct SaturationResult {
  Vec4 delta;
  std::array<bool, 4> clipped{};
  bool any() const {
    return clipped[0] || clipped[1] || clipped[2] || clipped[3];
  }
};

SaturationResult saturate(const Vec4& delta, const ActuatorLimits& limits);

// Persistent excitation: per-channel sinusoids plus bounded uniform noise,
// reproducible from the seed. Amplitudes are absolute deflections.
struct ExcitationConfig {
  struct Tone {
    int channel = 0;
    double amplitude = 0.0;
    double frequency = 0.0;  // rad/s
  };
  std::vector<Tone> tones;
  Vec4 noise_amplitude = Vec4::Zero();
  std::uint64_t seed = 0;
  bool pre_allocation = false;  // add B*e to tau_c instead of e to delta

  // Reference defaults: three sinusoids at 1 percent of each surface range
  // and noise at 0.2 percent of range on every channel.
  static ExcitationConfig standard(const ActuatorLimits& limits);
};

class ExcitationSource {
 public:
  explicit ExcitationSource(const ExcitationConfig& cfg)
      : cfg_(cfg), rng_(cfg.seed) {}

  // Draws the noise component, so call exactly once per control step.
  Vec4 at(double t);

  const ExcitationConfig& config() const { return cfg_; }

 private:
  ExcitationConfig cfg_;
  std::mt19937_64 rng_;
};

}  // namespace dac
