#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dac/controller.hpp"
#include "dac/estimator.hpp"
#include "dac/supervisor.hpp"
#include "dac/types.hpp"

namespace dac {

enum class RunMode { kMbc, kDac };

RunMode parse_mode(const std::string& s);
std::string mode_name(RunMode m);

struct Event {
  enum class Kind {
    kDisturbance,
    kDamage,
    kExtraTermOn,
    kManualLambda,
    kManualRelease,
    kSetpoint,
  };
  double time = 0.0;
  Kind kind = Kind::kDisturbance;
  std::string damage_id;          // kDamage
  double lambda_value = 0.0;      // kManualLambda
  Vec6 v_d = Vec6::Zero();        // kSetpoint
};

struct DisturbanceSpec {
  double duration = 0.5;
  double fraction = 0.02;  // of actuator range, applied to rudder + elevator
};

struct NoiseSpec {
  double sigma_v = 0.05;
  double sigma_omega = 0.002;
};

struct TrimSpec {
  double airspeed = 126.586;  // 75 knots true in ft/s
  double alpha = 0.0698132;   // rad, also the level-flight pitch attitude
  double altitude = 800.0;    // ft
};

struct OverlayTone {
  int channel = 0;
  double amplitude = 0.0;
  double frequency = 0.0;
};

struct IdentifierConfig {
  int window = 400;
  double fit_period = 0.1;
  double rls_forgetting = 0.995;
  double cond_threshold = 1e8;
  double cond_ceiling = 1e12;
  // Fits whose window residual exceeds this carry no decision credit; the
  // supervisor holds its previous optimum rather than chase a bad model.
  double credibility_rms = 1.0;
  // Seconds the actuator and velocity regressors lag the wrench estimate,
  // compensating the estimator's group delay at the excitation tones.
  double pair_delay = 0.0;
  // Ridge strength as a fraction of the equilibrated Gram trace / 11.
  double ridge_scale = 1e-8;
  // Shrink ridged fits toward the model-side [B D tau0] instead of zero.
  bool anchor_to_model = false;
};

// Full run configuration. Everything carries a usable default; load_scenario
// overlays a JSON file on top and validates the result.
struct Scenario {
  std::string name = "nominal";
  double duration = 90.0;
  double dt = 0.005;
  std::uint64_t seed = 1;
  double gravity = kGravity;

  InertialParams inertial;
  RegressorSet regressors;
  std::map<std::string, DamageCase> damage_cases;
  ExtraTermSpec extra_term;

  TrimSpec trim;
  std::vector<OverlayTone> desired_overlay;
  NoiseSpec noise;
  DisturbanceSpec disturbance;

  ControllerGains gains;
  bool chi_explicit = false;     // gains.chi authoritative when set
  double chi_scale = 0.1;        // else chi_i = chi_scale * ||tau0||
  double eps_delta_scale = 1e-4; // of the largest baseline B column norm
  ActuatorLimits limits;
  ExcitationConfig excitation;

  UkfConfig ukf;
  IdentifierConfig identifier;
  CostConfig decision;

  std::vector<Event> events;

  // Derived quantities.
  GeneralizedVelocity trim_velocity() const;
  Pose trim_pose() const;
  double eps_delta() const;
  Vec6 chi() const;

  // GTM-scale baseline airframe with the static wrench solved from the trim
  // balance tau0 = G(trim) - D v_trim - tauR at zero deflection.
  static Scenario defaults();

  // The standard damaged-flight timeline: disturbance at 4 s, abrupt damage
  // at 10 s, extra yaw term from 30 s, manual factor 0 at 50 s, release 55 s.
  static Scenario paper_damage1();
};

// Recomputes tau0 from the trim balance. Called by defaults() and whenever a
// config overrides D, tauR or the trim point without pinning tau0.
void solve_trim(Scenario& sc);

// Reads a JSON scenario over the defaults. Unknown keys and violated
// constraints throw config_error naming the field.
Scenario load_scenario(const std::string& path);
Scenario scenario_from_json_text(const std::string& text);

// Serializes the fully resolved configuration, stable key order.
std::string scenario_to_json(const Scenario& sc);

}  // namespace dac
