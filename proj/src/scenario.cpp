#include "dac/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dac/airframe.hpp"
#include "dac/identifier.hpp"

namespace dac {

using Json = nlohmann::ordered_json;

RunMode parse_mode(const std::string& s) {
  if (s == "mbc") return RunMode::kMbc;
  if (s == "dac") return RunMode::kDac;
  throw config_error("mode must be 'mbc' or 'dac', got '" + s + "'");
}

std::string mode_name(RunMode m) {
  return m == RunMode::kMbc ? "mbc" : "dac";
}

GeneralizedVelocity Scenario::trim_velocity() const {
  GeneralizedVelocity v;
  v.linear = Vec3(trim.airspeed * std::cos(trim.alpha), 0.0,
                  trim.airspeed * std::sin(trim.alpha));
  return v;
}

Pose Scenario::trim_pose() const {
  Pose p;
  p.position = Vec3(0.0, 0.0, -trim.altitude);
  p.euler = Vec3(0.0, trim.alpha, 0.0);
  return p;
}

double Scenario::eps_delta() const {
  double largest = 0.0;
  for (int i = 0; i < kNumActuators; ++i) {
    largest = std::max(largest, regressors.B.col(i).norm());
  }
  return eps_delta_scale * largest;
}

Vec6 Scenario::chi() const {
  if (chi_explicit) return gains.chi;
  return Vec6::Constant(chi_scale * regressors.tau0.norm());
}

void solve_trim(Scenario& sc) {
  // Zero-deflection balance at the reference condition: with omega = 0 the
  // Coriolis wrench vanishes, so tau0 + D v_t + tauR = G(eta_t).
  const Vec6 v_t = sc.trim_velocity().vec();
  const Vec6 G = gravity_wrench(sc.trim_pose().euler, sc.inertial, sc.gravity);
  sc.regressors.tau0 = G - sc.regressors.D * v_t - sc.regressors.tauR;
}

Scenario Scenario::defaults() {
  Scenario sc;
  sc.inertial.m = 1.5418;  // slugs, about a 49.6 lb airframe
  sc.inertial.Ixx = 1.3270;
  sc.inertial.Iyy = 4.2540;
  sc.inertial.Izz = 5.4540;
  sc.inertial.Ixz = 0.1204;
  sc.inertial.Iyz = 0.0;
  sc.inertial.Ixy = 0.0;
  sc.inertial.rho = Vec3::Zero();

  // Control effectiveness, columns [thrust, rudder, aileron, elevator].
  sc.regressors.B << 20.0, 0.0, 0.0, 0.0,
                     0.0, 20.0, 0.0, 0.0,
                    -1.0, 0.0, 0.0, -50.0,
                     0.0, 4.0, 110.0, 0.0,
                     2.0, 0.0, 0.0, -105.0,
                     0.0, -70.0, -8.0, 0.0;

  // Damping and static-stability derivatives at the reference condition.
  sc.regressors.D << -0.085, 0.0, 0.12, 0.0, 0.0, 0.0,
                      0.0, -0.67, 0.0, 0.10, 0.0, 1.40,
                     -0.30, 0.0, -4.20, 0.0, -2.00, 0.0,
                      0.0, -0.29, 0.0, -5.90, 0.0, 1.20,
                      0.02, 0.0, -0.50, 0.0, -1.55, 0.0,
                      0.0, 0.34, 0.0, -0.40, 0.0, -2.35;

  sc.regressors.tauR << 1.8, -0.7, 2.5, 0.35, -0.25, 0.18;
  solve_trim(sc);

  DamageCase case1;
  case1.delta_m = -0.13 * kLbToSlug;
  case1.delta_Ixx = -0.00346;
  case1.delta_Iyy = -0.06698;
  case1.delta_Izz = -0.06352;
  case1.delta_Ixz = -0.01409;
  case1.delta_Iyz = 0.00001;
  case1.delta_Ixy = 0.00003;
  case1.new_rho = Vec3(0.0105, 0.0, 0.0023);
  Mat64 dB;
  dB << 0.0, 0.0, 0.0, 0.0,
        0.0, -4.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 6.0,
        0.0, -1.0, -22.0, 0.0,
        0.0, 0.0, 0.0, 12.0,
        0.0, 14.0, 3.0, 0.0;
  case1.delta_B = dB;
  sc.damage_cases["case1"] = case1;

  // The thrust channel needs enough reserve to hold airspeed across the
  // pitch-attitude offsets that disturbance and damage transients leave
  // behind; velocity regulation never steers theta back by itself.
  sc.limits.lower[0] = -1.0;
  sc.limits.upper[0] = 1.0;

  // Stiff rate gains bound the attitude displacement each torque transient
  // integrates into; the linear channels stay at the softer reference gains.
  sc.gains.Gamma << 2.0, 2.0, 2.0, 8.0, 12.0, 8.0;
  sc.gains.chi << 0.3, 0.3, 0.3, 0.05, 0.05, 0.05;
  sc.chi_explicit = true;
  // Inside the boundary layer the robust term acts as an extra linear gain
  // chi/epsilon; a narrow layer turns that into enough loop gain to cancel
  // the identification tones on the linear channels.
  sc.gains.epsilon = 0.25;

  sc.excitation = ExcitationConfig::standard(sc.limits);
  // An angular tone at omega leaves a u*tau/(J*omega^2) linear-velocity
  // ripple, so the pitch and yaw tones sit above 10 rad/s where that ripple
  // is negligible; thrust can stay slow because its ripple is direct and
  // small. One tone per actuator, spaced so no pair aliases within a window.
  sc.excitation.tones = {{0, 0.008, 2.9},
                         {1, 0.010, 12.6},
                         {2, 0.006, 10.4},
                         {3, 0.010, 14.8}};
  // Broadband dither never survives the wrench smoother, so it carries no
  // identification value; keep it at a token level.
  sc.excitation.noise_amplitude *= 0.25;
  // Two seconds of sampled motion per fit: long enough to separate the
  // tones, short enough that a post-damage window turns over quickly.
  sc.identifier.window = 400;
  // Always-on ridge shrinking toward the model side. Trim motion leaves the
  // {u, w, 1} directions nearly unexcited; anchored shrinkage keeps their
  // coefficients at the model instead of amplifying estimate noise.
  sc.identifier.cond_threshold = 1.0;
  sc.identifier.ridge_scale = 3e-2;
  sc.identifier.anchor_to_model = true;
  // Five steps of regressor lag matches the wrench estimator's group delay
  // at the tone frequencies.
  sc.identifier.pair_delay = 0.025;

  // Covariance adaptation re-tunes the wrench chain toward a resonant
  // response at the tone frequencies, so the flight configuration freezes it
  // and sets the chain spectra explicitly: angular channels track the fast
  // tones, linear channels only need the slow thrust tone.
  sc.ukf.alpha_forget = 1.0;
  sc.ukf.q_tau << 0.05, 0.05, 0.05, 0.3, 0.3, 0.3;
  sc.ukf.q_zeta1 << 0.5, 0.5, 0.5, 3.0, 3.0, 3.0;
  sc.ukf.q_zeta2 << 5.0, 5.0, 5.0, 30.0, 30.0, 30.0;

  // Fast factor motion: a decision tick moves the target by gamma, and the
  // actual factor slews at rate_limit once the estimator has converged.
  sc.decision.gamma = 0.2;
  sc.decision.rate_limit = 1.0;

  sc.desired_overlay = {{0, 0.5, 0.4}, {2, 0.10, 0.7}, {4, 0.012, 1.0}};
  return sc;
}

Scenario Scenario::paper_damage1() {
  Scenario sc = defaults();
  sc.name = "paper_damage1";
  sc.duration = 90.0;

  Event e;
  e.time = 4.0;
  e.kind = Event::Kind::kDisturbance;
  sc.events.push_back(e);
  e = {};
  e.time = 10.0;
  e.kind = Event::Kind::kDamage;
  e.damage_id = "case1";
  sc.events.push_back(e);
  e = {};
  e.time = 30.0;
  e.kind = Event::Kind::kExtraTermOn;
  sc.events.push_back(e);
  e = {};
  e.time = 50.0;
  e.kind = Event::Kind::kManualLambda;
  e.lambda_value = 0.0;
  sc.events.push_back(e);
  e = {};
  e.time = 55.0;
  e.kind = Event::Kind::kManualRelease;
  sc.events.push_back(e);
  return sc;
}

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw config_error("scenario field '" + field + "': " + what);
}

void check_keys(const Json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) fail(section.empty() ? item.key() : section + "." + item.key(),
                  "unknown field");
  }
}

double num(const Json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  return j.get<double>();
}

template <class Vec>
void read_vector(const Json& j, const std::string& field, Vec& out) {
  if (!j.is_array() || static_cast<long>(j.size()) != out.size()) {
    fail(field, "expected an array of " + std::to_string(out.size()));
  }
  for (long i = 0; i < out.size(); ++i) {
    out[i] = num(j[i], field + "[" + std::to_string(i) + "]");
  }
}

template <class Mat>
void read_matrix(const Json& j, const std::string& field, Mat& out) {
  if (!j.is_array() || static_cast<long>(j.size()) != out.rows()) {
    fail(field, "expected " + std::to_string(out.rows()) + " rows");
  }
  for (long r = 0; r < out.rows(); ++r) {
    const Json& row = j[r];
    if (!row.is_array() || static_cast<long>(row.size()) != out.cols()) {
      fail(field + "[" + std::to_string(r) + "]",
           "expected " + std::to_string(out.cols()) + " columns");
    }
    for (long c = 0; c < out.cols(); ++c) {
      out(r, c) = num(row[c], field + " entry");
    }
  }
}

template <class Vec>
Json vector_json(const Vec& v) {
  Json a = Json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

template <class Mat>
Json matrix_json(const Mat& m) {
  Json rows = Json::array();
  for (long r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

double mass_in_slugs(const Json& parent, const std::string& field,
                     const std::string& unit_key, const std::string& prefix) {
  double value = num(parent.at(field), prefix + field);
  std::string unit = "slug";
  if (parent.contains(unit_key)) {
    unit = parent.at(unit_key).get<std::string>();
  }
  if (unit == "lb" || unit == "lbs") return value * kLbToSlug;
  if (unit == "slug" || unit == "slugs") return value;
  fail(prefix + unit_key, "unit must be 'slug' or 'lb'");
}

void parse_inertial(const Json& j, InertialParams& p) {
  check_keys(j, "plant.inertial",
             {"mass", "mass_unit", "Ixx", "Iyy", "Izz", "Ixz", "Iyz", "Ixy",
              "rho"});
  if (j.contains("mass")) {
    p.m = mass_in_slugs(j, "mass", "mass_unit", "plant.inertial.");
  }
  auto grab = [&](const char* k, double& out) {
    if (j.contains(k)) out = num(j.at(k), std::string("plant.inertial.") + k);
  };
  grab("Ixx", p.Ixx);
  grab("Iyy", p.Iyy);
  grab("Izz", p.Izz);
  grab("Ixz", p.Ixz);
  grab("Iyz", p.Iyz);
  grab("Ixy", p.Ixy);
  if (j.contains("rho")) read_vector(j.at("rho"), "plant.inertial.rho", p.rho);
  if (!p.valid()) fail("plant.inertial", "mass and inertia must be physical");
}

DamageCase parse_damage(const Json& j, const std::string& id) {
  const std::string prefix = "plant.damage_cases." + id;
  check_keys(j, prefix,
             {"delta_m", "delta_m_unit", "delta_Ixx", "delta_Iyy", "delta_Izz",
              "delta_Ixz", "delta_Iyz", "delta_Ixy", "new_rho", "delta_B"});
  DamageCase d;
  if (j.contains("delta_m")) {
    d.delta_m = mass_in_slugs(j, "delta_m", "delta_m_unit", prefix + ".");
  }
  auto grab = [&](const char* k, double& out) {
    if (j.contains(k)) out = num(j.at(k), prefix + "." + k);
  };
  grab("delta_Ixx", d.delta_Ixx);
  grab("delta_Iyy", d.delta_Iyy);
  grab("delta_Izz", d.delta_Izz);
  grab("delta_Ixz", d.delta_Ixz);
  grab("delta_Iyz", d.delta_Iyz);
  grab("delta_Ixy", d.delta_Ixy);
  if (j.contains("new_rho")) {
    read_vector(j.at("new_rho"), prefix + ".new_rho", d.new_rho);
  }
  if (j.contains("delta_B")) {
    Mat64 dB = Mat64::Zero();
    read_matrix(j.at("delta_B"), prefix + ".delta_B", dB);
    d.delta_B = dB;
  }
  return d;
}

void parse_plant(const Json& j, Scenario& sc, bool& tau0_given) {
  check_keys(j, "plant",
             {"inertial", "B", "D", "tau0", "tauR", "B_negative",
              "damage_cases", "extra_term"});
  if (j.contains("inertial")) parse_inertial(j.at("inertial"), sc.inertial);
  if (j.contains("B")) read_matrix(j.at("B"), "plant.B", sc.regressors.B);
  if (j.contains("D")) read_matrix(j.at("D"), "plant.D", sc.regressors.D);
  if (j.contains("tauR")) {
    read_vector(j.at("tauR"), "plant.tauR", sc.regressors.tauR);
  }
  if (j.contains("tau0")) {
    read_vector(j.at("tau0"), "plant.tau0", sc.regressors.tau0);
    tau0_given = true;
  }
  if (j.contains("B_negative")) {
    Mat64 bn = Mat64::Zero();
    read_matrix(j.at("B_negative"), "plant.B_negative", bn);
    sc.regressors.B_negative = bn;
  }
  if (j.contains("damage_cases")) {
    sc.damage_cases.clear();
    for (const auto& item : j.at("damage_cases").items()) {
      sc.damage_cases[item.key()] = parse_damage(item.value(), item.key());
    }
  }
  if (j.contains("extra_term")) {
    const Json& e = j.at("extra_term");
    check_keys(e, "plant.extra_term",
               {"amplitude", "frequency_gain", "target_channel",
                "ramp_time_constant"});
    auto grab = [&](const char* k, double& out) {
      if (e.contains(k)) out = num(e.at(k), std::string("plant.extra_term.") + k);
    };
    grab("amplitude", sc.extra_term.amplitude);
    grab("frequency_gain", sc.extra_term.frequency_gain);
    grab("ramp_time_constant", sc.extra_term.ramp_time_constant);
    if (e.contains("target_channel")) {
      const double ch = num(e.at("target_channel"), "plant.extra_term.target_channel");
      if (ch < 0 || ch > 5 || ch != std::floor(ch)) {
        fail("plant.extra_term.target_channel", "must be an integer in [0, 5]");
      }
      sc.extra_term.target_channel = static_cast<int>(ch);
    }
    if (!(sc.extra_term.ramp_time_constant > 0.0)) {
      fail("plant.extra_term.ramp_time_constant", "must be positive");
    }
  }
}

std::vector<ExcitationConfig::Tone> parse_tones(const Json& j,
                                                const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of tones");
  std::vector<ExcitationConfig::Tone> tones;
  for (size_t i = 0; i < j.size(); ++i) {
    const Json& t = j[i];
    const std::string p = field + "[" + std::to_string(i) + "]";
    check_keys(t, p, {"channel", "amplitude", "frequency"});
    ExcitationConfig::Tone tone;
    const double ch = num(t.at("channel"), p + ".channel");
    if (ch < 0 || ch >= kNumActuators || ch != std::floor(ch)) {
      fail(p + ".channel", "must be an actuator index in [0, 3]");
    }
    tone.channel = static_cast<int>(ch);
    tone.amplitude = num(t.at("amplitude"), p + ".amplitude");
    tone.frequency = num(t.at("frequency"), p + ".frequency");
    tones.push_back(tone);
  }
  return tones;
}

void parse_controller(const Json& j, Scenario& sc) {
  check_keys(j, "controller",
             {"Gamma", "chi", "chi_scale", "epsilon", "eps_delta_scale",
              "limits", "excitation"});
  if (j.contains("Gamma")) {
    read_vector(j.at("Gamma"), "controller.Gamma", sc.gains.Gamma);
    if (sc.gains.Gamma.minCoeff() <= 0.0) {
      fail("controller.Gamma", "entries must be positive");
    }
  }
  if (j.contains("chi")) {
    read_vector(j.at("chi"), "controller.chi", sc.gains.chi);
    if (sc.gains.chi.minCoeff() < 0.0) {
      fail("controller.chi", "entries must be nonnegative");
    }
    sc.chi_explicit = true;
  }
  auto grab = [&](const char* k, double& out) {
    if (j.contains(k)) out = num(j.at(k), std::string("controller.") + k);
  };
  grab("chi_scale", sc.chi_scale);
  grab("epsilon", sc.gains.epsilon);
  grab("eps_delta_scale", sc.eps_delta_scale);
  if (!(sc.gains.epsilon > 0.0)) fail("controller.epsilon", "must be positive");
  if (j.contains("limits")) {
    const Json& l = j.at("limits");
    check_keys(l, "controller.limits", {"lower", "upper"});
    if (l.contains("lower")) {
      read_vector(l.at("lower"), "controller.limits.lower", sc.limits.lower);
    }
    if (l.contains("upper")) {
      read_vector(l.at("upper"), "controller.limits.upper", sc.limits.upper);
    }
    if ((sc.limits.upper - sc.limits.lower).minCoeff() <= 0.0) {
      fail("controller.limits", "upper must exceed lower on every channel");
    }
  }
  if (j.contains("excitation")) {
    const Json& e = j.at("excitation");
    check_keys(e, "controller.excitation",
               {"tones", "noise_amplitude", "pre_allocation"});
    if (e.contains("tones")) {
      sc.excitation.tones = parse_tones(e.at("tones"), "controller.excitation.tones");
    }
    if (e.contains("noise_amplitude")) {
      read_vector(e.at("noise_amplitude"), "controller.excitation.noise_amplitude",
                  sc.excitation.noise_amplitude);
    }
    if (e.contains("pre_allocation")) {
      if (!e.at("pre_allocation").is_boolean()) {
        fail("controller.excitation.pre_allocation", "expected a boolean");
      }
      sc.excitation.pre_allocation = e.at("pre_allocation").get<bool>();
    }
  }
}

void parse_estimator(const Json& j, UkfConfig& u) {
  check_keys(j, "estimator",
             {"kappa", "alpha_forget", "sigma_v", "sigma_omega",
              "mahalanobis_gate", "r_floor", "fd_step", "obs_check_period",
              "p0_v", "p0_tau", "p0_zeta1", "p0_zeta2", "p0_params", "q_v",
              "q_tau", "q_zeta1", "q_zeta2", "q_params"});
  auto grab = [&](const char* k, double& out) {
    if (j.contains(k)) out = num(j.at(k), std::string("estimator.") + k);
  };
  grab("kappa", u.kappa);
  grab("alpha_forget", u.alpha_forget);
  grab("sigma_v", u.sigma_v);
  grab("sigma_omega", u.sigma_omega);
  grab("mahalanobis_gate", u.mahalanobis_gate);
  grab("r_floor", u.r_floor);
  grab("fd_step", u.fd_step);
  if (j.contains("obs_check_period")) {
    u.obs_check_period = static_cast<int>(
        num(j.at("obs_check_period"), "estimator.obs_check_period"));
  }
  if (!(u.alpha_forget > 0.0 && u.alpha_forget <= 1.0)) {
    fail("estimator.alpha_forget", "must lie in (0, 1]");
  }
  auto grab6 = [&](const char* k, Vec6& out) {
    if (j.contains(k)) read_vector(j.at(k), std::string("estimator.") + k, out);
  };
  grab6("p0_v", u.p0_v);
  grab6("p0_tau", u.p0_tau);
  grab6("p0_zeta1", u.p0_zeta1);
  grab6("p0_zeta2", u.p0_zeta2);
  grab6("q_v", u.q_v);
  grab6("q_tau", u.q_tau);
  grab6("q_zeta1", u.q_zeta1);
  grab6("q_zeta2", u.q_zeta2);
  if (j.contains("p0_params")) {
    read_vector(j.at("p0_params"), "estimator.p0_params", u.p0_params);
  }
  if (j.contains("q_params")) {
    read_vector(j.at("q_params"), "estimator.q_params", u.q_params);
  }
}

void parse_identifier(const Json& j, IdentifierConfig& c) {
  check_keys(j, "identifier",
             {"window", "fit_period", "rls_forgetting", "cond_threshold",
              "cond_ceiling", "credibility_rms", "pair_delay", "ridge_scale",
              "anchor_to_model"});
  if (j.contains("window")) {
    const double w = num(j.at("window"), "identifier.window");
    if (w < kDictionary || w != std::floor(w)) {
      fail("identifier.window", "must be an integer of at least 11");
    }
    c.window = static_cast<int>(w);
  }
  auto grab = [&](const char* k, double& out) {
    if (j.contains(k)) out = num(j.at(k), std::string("identifier.") + k);
  };
  grab("fit_period", c.fit_period);
  grab("rls_forgetting", c.rls_forgetting);
  grab("cond_threshold", c.cond_threshold);
  grab("cond_ceiling", c.cond_ceiling);
  grab("credibility_rms", c.credibility_rms);
  grab("pair_delay", c.pair_delay);
  grab("ridge_scale", c.ridge_scale);
  if (j.contains("anchor_to_model")) {
    const Json& a = j.at("anchor_to_model");
    if (!a.is_boolean()) fail("identifier.anchor_to_model", "expected a bool");
    c.anchor_to_model = a.get<bool>();
  }
  if (!(c.rls_forgetting > 0.0 && c.rls_forgetting <= 1.0)) {
    fail("identifier.rls_forgetting", "must lie in (0, 1]");
  }
  if (!(c.fit_period > 0.0)) fail("identifier.fit_period", "must be positive");
  if (!(c.credibility_rms > 0.0)) {
    fail("identifier.credibility_rms", "must be positive");
  }
  if (!(c.pair_delay >= 0.0 && c.pair_delay < 1.0)) {
    fail("identifier.pair_delay", "must lie in [0, 1) seconds");
  }
  if (!(c.ridge_scale > 0.0)) {
    fail("identifier.ridge_scale", "must be positive");
  }
}

void parse_decision(const Json& j, CostConfig& c) {
  check_keys(j, "decision",
             {"horizon", "H_diag", "Q_diag", "gamma", "fd_h", "grad_tol",
              "rate_limit", "lag", "decision_period", "conv_threshold",
              "conv_window"});
  auto grab = [&](const char* k, double& out) {
    if (j.contains(k)) out = num(j.at(k), std::string("decision.") + k);
  };
  grab("horizon", c.horizon);
  grab("gamma", c.gamma);
  grab("fd_h", c.fd_h);
  grab("grad_tol", c.grad_tol);
  grab("rate_limit", c.rate_limit);
  grab("lag", c.lag);
  grab("decision_period", c.decision_period);
  grab("conv_threshold", c.conv_threshold);
  grab("conv_window", c.conv_window);
  if (j.contains("H_diag")) {
    Vec6 d;
    read_vector(j.at("H_diag"), "decision.H_diag", d);
    c.H = d.asDiagonal();
  }
  if (j.contains("Q_diag")) {
    Vec6 d;
    read_vector(j.at("Q_diag"), "decision.Q_diag", d);
    c.Q = d.asDiagonal();
  }
  if (!(c.rate_limit > 0.0)) fail("decision.rate_limit", "must be positive");
  if (!(c.horizon > 0.0)) fail("decision.horizon", "must be positive");
}

Event parse_event(const Json& j, size_t index) {
  const std::string p = "events[" + std::to_string(index) + "]";
  check_keys(j, p, {"time", "kind", "case", "value", "v_d"});
  Event e;
  if (!j.contains("time") || !j.contains("kind")) {
    fail(p, "needs 'time' and 'kind'");
  }
  e.time = num(j.at("time"), p + ".time");
  if (e.time < 0.0) fail(p + ".time", "must be nonnegative");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "disturbance") {
    e.kind = Event::Kind::kDisturbance;
  } else if (kind == "damage") {
    e.kind = Event::Kind::kDamage;
    if (!j.contains("case")) fail(p, "damage event needs 'case'");
    e.damage_id = j.at("case").get<std::string>();
  } else if (kind == "extra_term_on") {
    e.kind = Event::Kind::kExtraTermOn;
  } else if (kind == "manual_lambda") {
    e.kind = Event::Kind::kManualLambda;
    if (!j.contains("value")) fail(p, "manual_lambda event needs 'value'");
    e.lambda_value = num(j.at("value"), p + ".value");
    if (e.lambda_value < 0.0 || e.lambda_value > 1.0) {
      fail(p + ".value", "must lie in [0, 1]");
    }
  } else if (kind == "manual_release") {
    e.kind = Event::Kind::kManualRelease;
  } else if (kind == "setpoint") {
    e.kind = Event::Kind::kSetpoint;
    if (!j.contains("v_d")) fail(p, "setpoint event needs 'v_d'");
    read_vector(j.at("v_d"), p + ".v_d", e.v_d);
  } else {
    fail(p + ".kind", "unknown event kind '" + kind + "'");
  }
  return e;
}

std::vector<OverlayTone> parse_overlay(const Json& j) {
  if (!j.is_array()) fail("desired_overlay", "expected an array");
  std::vector<OverlayTone> out;
  for (size_t i = 0; i < j.size(); ++i) {
    const std::string p = "desired_overlay[" + std::to_string(i) + "]";
    check_keys(j[i], p, {"channel", "amplitude", "frequency"});
    OverlayTone t;
    const double ch = num(j[i].at("channel"), p + ".channel");
    if (ch < 0 || ch > 5 || ch != std::floor(ch)) {
      fail(p + ".channel", "must be a twist index in [0, 5]");
    }
    t.channel = static_cast<int>(ch);
    t.amplitude = num(j[i].at("amplitude"), p + ".amplitude");
    t.frequency = num(j[i].at("frequency"), p + ".frequency");
    out.push_back(t);
  }
  return out;
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw config_error(std::string("scenario is not valid JSON: ") + e.what());
  }
  Scenario sc = Scenario::defaults();
  bool tau0_given = false;
  bool plant_touched = false;

  check_keys(j, "",
             {"name", "duration", "dt", "seed", "gravity", "plant", "trim",
              "desired_overlay", "noise", "disturbance", "controller",
              "estimator", "identifier", "decision", "events"});
  if (j.contains("name")) sc.name = j.at("name").get<std::string>();
  if (j.contains("duration")) sc.duration = num(j.at("duration"), "duration");
  if (!(sc.duration > 0.0)) fail("duration", "must be positive");
  if (j.contains("dt")) sc.dt = num(j.at("dt"), "dt");
  if (!(sc.dt > 0.0 && sc.dt <= 0.1)) fail("dt", "must lie in (0, 0.1]");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) {
      fail("seed", "must be a nonnegative integer");
    }
    sc.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("gravity")) sc.gravity = num(j.at("gravity"), "gravity");
  if (j.contains("trim")) {
    const Json& t = j.at("trim");
    check_keys(t, "trim", {"airspeed", "alpha", "altitude"});
    auto grab = [&](const char* k, double& out) {
      if (t.contains(k)) out = num(t.at(k), std::string("trim.") + k);
    };
    grab("airspeed", sc.trim.airspeed);
    grab("alpha", sc.trim.alpha);
    grab("altitude", sc.trim.altitude);
    if (!(sc.trim.airspeed > 0.0)) fail("trim.airspeed", "must be positive");
    plant_touched = true;
  }
  if (j.contains("plant")) {
    parse_plant(j.at("plant"), sc, tau0_given);
    plant_touched = true;
  }
  if (j.contains("desired_overlay")) {
    sc.desired_overlay = parse_overlay(j.at("desired_overlay"));
  }
  if (j.contains("noise")) {
    const Json& n = j.at("noise");
    check_keys(n, "noise", {"sigma_v", "sigma_omega"});
    if (n.contains("sigma_v")) sc.noise.sigma_v = num(n.at("sigma_v"), "noise.sigma_v");
    if (n.contains("sigma_omega")) {
      sc.noise.sigma_omega = num(n.at("sigma_omega"), "noise.sigma_omega");
    }
    if (sc.noise.sigma_v < 0.0 || sc.noise.sigma_omega < 0.0) {
      fail("noise", "standard deviations must be nonnegative");
    }
  }
  if (j.contains("disturbance")) {
    const Json& d = j.at("disturbance");
    check_keys(d, "disturbance", {"duration", "fraction"});
    if (d.contains("duration")) {
      sc.disturbance.duration = num(d.at("duration"), "disturbance.duration");
    }
    if (d.contains("fraction")) {
      sc.disturbance.fraction = num(d.at("fraction"), "disturbance.fraction");
    }
  }
  if (j.contains("controller")) parse_controller(j.at("controller"), sc);
  if (j.contains("estimator")) parse_estimator(j.at("estimator"), sc.ukf);
  if (j.contains("identifier")) parse_identifier(j.at("identifier"), sc.identifier);
  if (j.contains("decision")) parse_decision(j.at("decision"), sc.decision);
  if (j.contains("events")) {
    if (!j.at("events").is_array()) fail("events", "expected an array");
    sc.events.clear();
    for (size_t i = 0; i < j.at("events").size(); ++i) {
      sc.events.push_back(parse_event(j.at("events")[i], i));
    }
  }
  for (const Event& e : sc.events) {
    if (e.kind == Event::Kind::kDamage && !sc.damage_cases.count(e.damage_id)) {
      fail("events", "damage case '" + e.damage_id + "' is not defined");
    }
  }
  std::stable_sort(sc.events.begin(), sc.events.end(),
                   [](const Event& a, const Event& b) { return a.time < b.time; });

  if (plant_touched && !tau0_given) solve_trim(sc);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return scenario_from_json_text(ss.str());
}

std::string scenario_to_json(const Scenario& sc) {
  Json j;
  j["name"] = sc.name;
  j["duration"] = sc.duration;
  j["dt"] = sc.dt;
  j["seed"] = sc.seed;
  j["gravity"] = sc.gravity;

  Json inertial;
  inertial["mass"] = sc.inertial.m;
  inertial["mass_unit"] = "slug";
  inertial["Ixx"] = sc.inertial.Ixx;
  inertial["Iyy"] = sc.inertial.Iyy;
  inertial["Izz"] = sc.inertial.Izz;
  inertial["Ixz"] = sc.inertial.Ixz;
  inertial["Iyz"] = sc.inertial.Iyz;
  inertial["Ixy"] = sc.inertial.Ixy;
  inertial["rho"] = vector_json(sc.inertial.rho);

  Json plant;
  plant["inertial"] = inertial;
  plant["B"] = matrix_json(sc.regressors.B);
  plant["D"] = matrix_json(sc.regressors.D);
  plant["tau0"] = vector_json(sc.regressors.tau0);
  plant["tauR"] = vector_json(sc.regressors.tauR);
  if (sc.regressors.B_negative) {
    plant["B_negative"] = matrix_json(*sc.regressors.B_negative);
  }
  Json cases;
  for (const auto& [id, d] : sc.damage_cases) {
    Json c;
    c["delta_m"] = d.delta_m;
    c["delta_m_unit"] = "slug";
    c["delta_Ixx"] = d.delta_Ixx;
    c["delta_Iyy"] = d.delta_Iyy;
    c["delta_Izz"] = d.delta_Izz;
    c["delta_Ixz"] = d.delta_Ixz;
    c["delta_Iyz"] = d.delta_Iyz;
    c["delta_Ixy"] = d.delta_Ixy;
    c["new_rho"] = vector_json(d.new_rho);
    if (d.delta_B) c["delta_B"] = matrix_json(*d.delta_B);
    cases[id] = c;
  }
  plant["damage_cases"] = cases;
  Json extra;
  extra["amplitude"] = sc.extra_term.amplitude;
  extra["frequency_gain"] = sc.extra_term.frequency_gain;
  extra["target_channel"] = sc.extra_term.target_channel;
  extra["ramp_time_constant"] = sc.extra_term.ramp_time_constant;
  plant["extra_term"] = extra;
  j["plant"] = plant;

  Json trim;
  trim["airspeed"] = sc.trim.airspeed;
  trim["alpha"] = sc.trim.alpha;
  trim["altitude"] = sc.trim.altitude;
  j["trim"] = trim;

  Json overlay = Json::array();
  for (const OverlayTone& t : sc.desired_overlay) {
    Json o;
    o["channel"] = t.channel;
    o["amplitude"] = t.amplitude;
    o["frequency"] = t.frequency;
    overlay.push_back(o);
  }
  j["desired_overlay"] = overlay;

  Json noise;
  noise["sigma_v"] = sc.noise.sigma_v;
  noise["sigma_omega"] = sc.noise.sigma_omega;
  j["noise"] = noise;

  Json dist;
  dist["duration"] = sc.disturbance.duration;
  dist["fraction"] = sc.disturbance.fraction;
  j["disturbance"] = dist;

  Json ctrl;
  ctrl["Gamma"] = vector_json(sc.gains.Gamma);
  ctrl["chi"] = vector_json(sc.chi());
  ctrl["chi_scale"] = sc.chi_scale;
  ctrl["epsilon"] = sc.gains.epsilon;
  ctrl["eps_delta_scale"] = sc.eps_delta_scale;
  Json limits;
  limits["lower"] = vector_json(sc.limits.lower);
  limits["upper"] = vector_json(sc.limits.upper);
  ctrl["limits"] = limits;
  Json exc;
  Json tones = Json::array();
  for (const auto& t : sc.excitation.tones) {
    Json tone;
    tone["channel"] = t.channel;
    tone["amplitude"] = t.amplitude;
    tone["frequency"] = t.frequency;
    tones.push_back(tone);
  }
  exc["tones"] = tones;
  exc["noise_amplitude"] = vector_json(sc.excitation.noise_amplitude);
  exc["pre_allocation"] = sc.excitation.pre_allocation;
  ctrl["excitation"] = exc;
  j["controller"] = ctrl;

  Json est;
  est["kappa"] = sc.ukf.kappa;
  est["alpha_forget"] = sc.ukf.alpha_forget;
  est["sigma_v"] = sc.ukf.sigma_v;
  est["sigma_omega"] = sc.ukf.sigma_omega;
  est["mahalanobis_gate"] = sc.ukf.mahalanobis_gate;
  est["r_floor"] = sc.ukf.r_floor;
  est["fd_step"] = sc.ukf.fd_step;
  est["obs_check_period"] = sc.ukf.obs_check_period;
  est["p0_v"] = vector_json(sc.ukf.p0_v);
  est["p0_tau"] = vector_json(sc.ukf.p0_tau);
  est["p0_zeta1"] = vector_json(sc.ukf.p0_zeta1);
  est["p0_zeta2"] = vector_json(sc.ukf.p0_zeta2);
  est["p0_params"] = vector_json(sc.ukf.p0_params);
  est["q_v"] = vector_json(sc.ukf.q_v);
  est["q_tau"] = vector_json(sc.ukf.q_tau);
  est["q_zeta1"] = vector_json(sc.ukf.q_zeta1);
  est["q_zeta2"] = vector_json(sc.ukf.q_zeta2);
  est["q_params"] = vector_json(sc.ukf.q_params);
  j["estimator"] = est;

  Json ident;
  ident["window"] = sc.identifier.window;
  ident["fit_period"] = sc.identifier.fit_period;
  ident["rls_forgetting"] = sc.identifier.rls_forgetting;
  ident["cond_threshold"] = sc.identifier.cond_threshold;
  ident["cond_ceiling"] = sc.identifier.cond_ceiling;
  ident["credibility_rms"] = sc.identifier.credibility_rms;
  ident["pair_delay"] = sc.identifier.pair_delay;
  ident["ridge_scale"] = sc.identifier.ridge_scale;
  ident["anchor_to_model"] = sc.identifier.anchor_to_model;
  j["identifier"] = ident;

  Json dec;
  dec["horizon"] = sc.decision.horizon;
  dec["H_diag"] = vector_json(Vec6(sc.decision.H.diagonal()));
  dec["Q_diag"] = vector_json(Vec6(sc.decision.Q.diagonal()));
  dec["gamma"] = sc.decision.gamma;
  dec["fd_h"] = sc.decision.fd_h;
  dec["grad_tol"] = sc.decision.grad_tol;
  dec["rate_limit"] = sc.decision.rate_limit;
  dec["lag"] = sc.decision.lag;
  dec["decision_period"] = sc.decision.decision_period;
  dec["conv_threshold"] = sc.decision.conv_threshold;
  dec["conv_window"] = sc.decision.conv_window;
  j["decision"] = dec;

  Json events = Json::array();
  for (const Event& e : sc.events) {
    Json ev;
    ev["time"] = e.time;
    switch (e.kind) {
      case Event::Kind::kDisturbance:
        ev["kind"] = "disturbance";
        break;
      case Event::Kind::kDamage:
        ev["kind"] = "damage";
        ev["case"] = e.damage_id;
        break;
      case Event::Kind::kExtraTermOn:
        ev["kind"] = "extra_term_on";
        break;
      case Event::Kind::kManualLambda:
        ev["kind"] = "manual_lambda";
        ev["value"] = e.lambda_value;
        break;
      case Event::Kind::kManualRelease:
        ev["kind"] = "manual_release";
        break;
      case Event::Kind::kSetpoint:
        ev["kind"] = "setpoint";
        ev["v_d"] = vector_json(e.v_d);
        break;
    }
    events.push_back(ev);
  }
  j["events"] = events;

  return j.dump(2) + "\n";
}

}  // namespace dac
