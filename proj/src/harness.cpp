#include "dac/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <limits>
#include <random>

#include "dac/airframe.hpp"
#include "dac/blend.hpp"
#include "dac/identifier.hpp"

namespace dac {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Stream separation salts so reordering one consumer never shifts another.
constexpr std::uint64_t kMeasSalt = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kExcSalt = 0xD1B54A32D192ED03ull;

double extra_term_value(const ExtraTermSpec& spec, double t, double r,
                        double delta_rudder) {
  if (!spec.enabled || t < spec.activation_time) return 0.0;
  const double ramp =
      1.0 - std::exp(-(t - spec.activation_time) / spec.ramp_time_constant);
  return spec.amplitude * std::sin(spec.frequency_gain * r) * delta_rudder *
         ramp;
}

}  // namespace

RunResult run_scenario(const Scenario& sc, RunMode mode) {
  if (!sc.inertial.valid()) {
    throw config_error("scenario baseline inertial parameters are not physical");
  }

  RunResult result;
  result.mode = mode;

  // Truth plant, mutated by events.
  InertialParams p_true = sc.inertial;
  RegressorSet reg_true = sc.regressors;
  ExtraTermSpec extra = sc.extra_term;
  extra.enabled = false;
  PlantState state{sc.trim_velocity(), sc.trim_pose()};

  const ModelSide model{sc.inertial, sc.regressors};
  ModelSide data = model;
  bool data_ready = false;

  ControllerGains gains = sc.gains;
  gains.chi = sc.chi();
  const double eps_delta = sc.eps_delta();

  DualEstimator est(sc.ukf, sc.inertial, sc.regressors.tauR, sc.gravity);
  const Vec6 tau_init =
      gravity_wrench(sc.trim_pose().euler, sc.inertial, sc.gravity) -
      sc.regressors.tauR;
  est.initialize(sc.trim_velocity().vec(), tau_init);

  SampleWindow window(sc.identifier.window);
  RlsState rls = RlsState::start(sc.identifier.rls_forgetting);
  std::optional<RegressorEstimate> koop;
  double last_fit = -1e9;
  double rls_resid_last = kNan;
  const int pair_lag =
      static_cast<int>(std::lround(sc.identifier.pair_delay / sc.dt));
  std::deque<std::pair<Vec4, Vec6>> pair_ring;
  Eigen::Matrix<double, 6, kDictionary> anchor;
  anchor << model.reg.B, model.reg.D, model.reg.tau0;
  const Eigen::Matrix<double, 6, kDictionary>* anchor_ptr =
      sc.identifier.anchor_to_model ? &anchor : nullptr;

  DecisionState dec;
  ConvergenceMonitor monitor(sc.decision.conv_threshold, sc.decision.conv_window,
                             sc.dt);
  std::deque<WindowSample> history;
  const int history_cap =
      std::max(2, static_cast<int>(std::lround(sc.decision.horizon / sc.dt)));
  double last_decision = -1e9;
  DescentResult last_desc;
  bool desc_valid = false;

  std::mt19937_64 meas_rng(sc.seed ^ kMeasSalt);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ExcitationConfig exc_cfg = sc.excitation;
  exc_cfg.seed = sc.seed ^ kExcSalt;
  ExcitationSource excitation(exc_cfg);

  std::size_t next_event = 0;
  GeneralizedVelocity base_vd = sc.trim_velocity();
  double dist_until = -1.0;
  Vec4 delta_prev = Vec4::Zero();
  int obs_rank = -1;
  double obs_sv_min = kNan;
  double obs_sv_med = kNan;
  double obs_sv_max = kNan;
  double rls_win_resid = kNan;

  const long steps = std::lround(sc.duration / sc.dt);
  result.records.reserve(steps);

  for (long k = 0; k < steps; ++k) {
    const double t = k * sc.dt;
    RunRecord rec;
    rec.t = t;
    rec.J_minus = kNan;
    rec.J_plus = kNan;
    rec.grad_J = kNan;
    rec.koop_cond = kNan;
    rec.koop_resid = kNan;
    rec.rls_resid = kNan;
    rec.rls_win_resid = kNan;
    rec.obs_sv_min = kNan;
    rec.obs_sv_med = kNan;
    rec.obs_sv_max = kNan;

    while (next_event < sc.events.size() &&
           sc.events[next_event].time <= t + 1e-9) {
      const Event& ev = sc.events[next_event++];
      switch (ev.kind) {
        case Event::Kind::kDisturbance:
          dist_until = t + sc.disturbance.duration;
          rec.events |= kEvDisturbance;
          break;
        case Event::Kind::kDamage: {
          const DamageCase& d = sc.damage_cases.at(ev.damage_id);
          p_true = apply_damage(p_true, d);
          if (d.delta_B) reg_true.B += *d.delta_B;
          rec.events |= kEvDamage;
          break;
        }
        case Event::Kind::kExtraTermOn:
          extra.enabled = true;
          extra.activation_time = ev.time;
          rec.events |= kEvExtraTerm;
          break;
        case Event::Kind::kManualLambda:
          if (mode == RunMode::kDac) manual_override(dec, t, ev.lambda_value);
          rec.events |= kEvManual;
          break;
        case Event::Kind::kManualRelease:
          if (mode == RunMode::kDac) manual_release(dec, t);
          rec.events |= kEvRelease;
          break;
        case Event::Kind::kSetpoint:
          base_vd = GeneralizedVelocity::from_vec(ev.v_d);
          rec.events |= kEvSetpoint;
          break;
      }
    }

    Vec6 v_d = base_vd.vec();
    Vec6 vdot_d = Vec6::Zero();
    for (const OverlayTone& tone : sc.desired_overlay) {
      v_d[tone.channel] += tone.amplitude * std::sin(tone.frequency * t);
      vdot_d[tone.channel] +=
          tone.amplitude * tone.frequency * std::cos(tone.frequency * t);
    }

    // Six draws per step regardless of the noise level keeps every stream
    // aligned between configurations that differ only in sigma.
    Vec6 y = state.v.vec();
    for (int i = 0; i < 3; ++i) y[i] += sc.noise.sigma_v * gauss(meas_rng);
    for (int i = 3; i < 6; ++i) y[i] += sc.noise.sigma_omega * gauss(meas_rng);

    EstimatorStep es = est.step(y, state.pose, sc.dt);
    if (!es.x_hat.pack().allFinite()) {
      result.aborted = true;
      result.abort_message = "estimator state became non-finite";
      break;
    }
    if (es.obs_checked && es.obs_sv.size() > 0) {
      obs_sv_min = es.obs_sv[es.obs_sv.size() - 1];
      obs_sv_med = es.obs_sv[es.obs_sv.size() / 2];
      obs_sv_max = es.obs_sv[0];
      const double tol = 1e-12 * es.obs_sv[0];
      obs_rank = 0;
      for (long i = 0; i < es.obs_sv.size(); ++i) {
        if (es.obs_sv[i] > tol) ++obs_rank;
      }
    }

    if (koop) {
      data.params = InertialParams::unflatten(project_to_physical(es.x_hat.p));
      data.reg.B = koop->B();
      data.reg.D = koop->D();
      data.reg.tau0 = koop->tau0();
      data.reg.tauR = sc.regressors.tauR;
      data_ready = true;
    }

    monitor.push(t, es.innovation.norm(), dec);
    if (mode == RunMode::kDac) {
      WindowSample ws;
      ws.t = t;
      ws.v = es.x_hat.v;
      ws.pose = state.pose;
      ws.v_d = v_d;
      ws.vdot_d = vdot_d;
      history.push_back(ws);
      if (static_cast<int>(history.size()) > history_cap) history.pop_front();

      if (t - last_decision >= sc.decision.decision_period - 1e-9) {
        last_decision = t;
        const bool credible =
            koop && koop->residual_rms < sc.identifier.credibility_rms;
        // The rollout surrogate is the data side, so the descent certifies
        // it against itself; run it only while the fitted model explains the
        // window distinctly better than the nominal one, else walk home.
        const bool credited =
            credible && koop->residual_rms <
                            sc.decision.credit_margin * model_resid_last;
        if (dec.mode == DecisionMode::kAuto) {
          if (data_ready && credited &&
              static_cast<int>(history.size()) >= history_cap) {
            const std::vector<WindowSample> win(history.begin(),
                                                history.end());
            last_desc = descend(dec.lambda_opt, win, model, data, gains,
                                sc.limits, eps_delta, sc.dt, sc.decision);
            dec.lambda_opt = last_desc.lambda_opt;
            desc_valid = true;
          } else {
            dec.lambda_opt =
                std::max(0.0, dec.lambda_opt - sc.decision.gamma);
          }
        }
      }
      advance_lambda(dec, t, sc.dt, sc.decision);
    }

    BlendedModel blended =
        (mode == RunMode::kDac && data_ready)
            ? blend(model, data, dec.lambda_actual, sc.gravity)
            : blend(model, model, 0.0, sc.gravity);
    if (blended.lambda_clamped) dec.lambda_actual = blended.lambda_used;

    const DesiredMotion desired{GeneralizedVelocity::from_vec(v_d), vdot_d};
    const GeneralizedVelocity v_hat = GeneralizedVelocity::from_vec(es.x_hat.v);
    Vec6 tau_cmd = control_wrench(v_hat, state.pose, desired, blended, gains);
    const Vec4 probe = excitation.at(t);
    if (exc_cfg.pre_allocation) tau_cmd += blended.B * probe;

    Eigen::VectorXd delta_alloc;
    try {
      delta_alloc = allocate(tau_cmd, blended.B, eps_delta, delta_prev).delta;
    } catch (const allocation_error&) {
      // Data-side effectiveness degenerated; fall back to the model blend
      // for this step and walk the factor down.
      ++result.allocation_fallbacks;
      dec.lambda_actual = 0.0;
      blended = blend(model, model, 0.0, sc.gravity);
      tau_cmd = control_wrench(v_hat, state.pose, desired, blended, gains);
      delta_alloc = allocate(tau_cmd, blended.B, eps_delta, delta_prev).delta;
    }
    Vec4 delta_cmd = delta_alloc;
    if (!exc_cfg.pre_allocation) delta_cmd += probe;
    const bool dist_active = t < dist_until;
    if (dist_active) {
      const Vec4 range = sc.limits.range();
      delta_cmd[1] += sc.disturbance.fraction * range[1];
      delta_cmd[3] += sc.disturbance.fraction * range[3];
    }
    const SaturationResult sat = saturate(delta_cmd, sc.limits);

    // Identification samples pair the wrench estimate with the actuator and
    // velocity rows from pair_lag steps earlier, cancelling the estimator's
    // group delay; an uncompensated skew acts as regressor noise and biases
    // the fitted effectiveness toward zero. The velocity rows carry the raw
    // measurement so their noise stays independent of the estimator's. Both
    // the batch window and the recursive baseline consume the same pairing.
    pair_ring.emplace_back(sat.delta, y);
    FitSample sample;
    bool have_sample = false;
    if (static_cast<int>(pair_ring.size()) > pair_lag) {
      sample.t = t;
      sample.tau_hat = es.x_hat.tau();
      sample.delta = pair_ring.front().first;
      sample.v = pair_ring.front().second;
      pair_ring.pop_front();
      have_sample = true;
      window.push(sample);
      {
        Eigen::Matrix<double, kDictionary, 1> phi;
        phi << sample.delta, sample.v, 1.0;
        rls_resid_last = (sample.tau_hat - rls.estimate() * phi).norm();
      }
      rls_update(rls, sample);
    }

    if (t - last_fit >= sc.identifier.fit_period - 1e-9 &&
        window.size() >= 3 * kDictionary) {
      last_fit = t;
      Stacks stacks = build_stacks(window);
      auto fit = koopman_fit(stacks.T, stacks.Y,
                             scaled_ridge(stacks.Y, sc.identifier.ridge_scale),
                             sc.identifier.cond_threshold,
                             sc.identifier.cond_ceiling, anchor_ptr);
      if (fit) {
        koop = fit;
        rls_win_resid = reconstruction_rms(rls.estimate(), stacks);
        rec.fit_now = 1;
      } else {
        ++result.koopman_rejections;
      }
    }
    if (koop) {
      rec.koop_cond = koop->condition;
      rec.koop_resid = koop->residual_rms;
      rec.koop_ridge = koop->ridge_used;
    }

    rec.v = state.v.vec();
    rec.pose << state.pose.position, state.pose.euler;
    rec.v_d = v_d;
    rec.v_err = state.v.vec() - v_d;
    rec.v_hat = es.x_hat.v;
    rec.tau_true = generalized_force(sat.delta, state.v, t, reg_true, extra);
    rec.tau_hat = es.x_hat.tau();
    rec.tau_cmd = tau_cmd;
    rec.delta_cmd = delta_cmd;
    rec.delta = sat.delta;
    rec.sat_mask = (sat.clipped[0] ? 1 : 0) | (sat.clipped[1] ? 2 : 0) |
                   (sat.clipped[2] ? 4 : 0) | (sat.clipped[3] ? 8 : 0);
    rec.lambda = dec.lambda_actual;
    rec.lambda_opt = dec.lambda_opt;
    rec.lambda_sel = dec.lambda_sel;
    rec.manual = dec.mode == DecisionMode::kManual ? 1 : 0;
    rec.converged = dec.converged ? 1 : 0;
    if (desc_valid) {
      rec.J_minus = last_desc.J_minus;
      rec.J_plus = last_desc.J_plus;
      rec.grad_J = last_desc.gradient;
    }
    rec.innov_norm = es.innovation.norm();
    rec.innov_rejected = es.rejected ? 1 : 0;
    rec.p_hat = es.x_hat.p;
    rec.rls_resid = rls_resid_last;
    rec.rls_win_resid = rls_win_resid;
    rec.obs_rank = obs_rank;
    rec.obs_sv_min = obs_sv_min;
    rec.obs_sv_med = obs_sv_med;
    rec.obs_sv_max = obs_sv_max;
    if (koop && have_sample) {
      Eigen::Matrix<double, kDictionary, 1> phi;
      phi << sample.delta, sample.v, 1.0;
      rec.extra_resid = sample.tau_hat - koop->P * phi;
    }
    rec.extra_true =
        extra_term_value(extra, t, state.v.angular.z(), sat.delta[kRudderIndex]);
    rec.ukf_resets = est.reset_events();
    rec.id_window = window.size();
    rec.dist_active = dist_active ? 1 : 0;

    try {
      state = step_plant(state, sat.delta, t, sc.dt, p_true, reg_true, extra,
                         sc.gravity);
    } catch (const numeric_error& e) {
      result.records.push_back(rec);
      result.aborted = true;
      result.abort_message = e.what();
      break;
    }
    delta_prev = sat.delta;
    result.records.push_back(rec);
  }

  result.p_true_final = p_true;
  return result;
}

double error_rms(const std::vector<RunRecord>& records, double t0, double t1) {
  double sum = 0.0;
  long n = 0;
  for (const RunRecord& r : records) {
    if (r.t < t0 || r.t >= t1) continue;
    sum += r.v_err.squaredNorm();
    ++n;
  }
  return n == 0 ? 0.0 : std::sqrt(sum / n);
}

namespace {

double channel_rms(const std::vector<RunRecord>& records, double t0, double t1,
                   int channel) {
  double sum = 0.0;
  long n = 0;
  for (const RunRecord& r : records) {
    if (r.t < t0 || r.t >= t1) continue;
    sum += r.extra_resid[channel] * r.extra_resid[channel];
    ++n;
  }
  return n == 0 ? 0.0 : std::sqrt(sum / n);
}

double event_time(const Scenario& sc, Event::Kind kind) {
  for (const Event& e : sc.events) {
    if (e.kind == kind) return e.time;
  }
  return kNan;
}

double tail_mean(const std::vector<RunRecord>& records, double seconds,
                 const std::function<double(const RunRecord&)>& f) {
  if (records.empty()) return kNan;
  const double t_end = records.back().t;
  double sum = 0.0;
  long n = 0;
  for (const RunRecord& r : records) {
    if (r.t < t_end - seconds) continue;
    sum += f(r);
    ++n;
  }
  return n == 0 ? kNan : sum / n;
}

}  // namespace

Metrics summarize(const Scenario& sc, const RunResult& result) {
  Metrics m;
  const auto& rec = result.records;
  const double t_end = rec.empty() ? 0.0 : rec.back().t + sc.dt;
  const double t_damage = event_time(sc, Event::Kind::kDamage);
  const double t_extra = event_time(sc, Event::Kind::kExtraTermOn);
  const double t_manual = event_time(sc, Event::Kind::kManualLambda);
  const double t_release = event_time(sc, Event::Kind::kManualRelease);

  m.emplace_back("steps", static_cast<double>(rec.size()));
  m.emplace_back("dt", sc.dt);
  m.emplace_back("duration_run", t_end);
  m.emplace_back("aborted", result.aborted ? 1.0 : 0.0);
  m.emplace_back("mode_dac", result.mode == RunMode::kDac ? 1.0 : 0.0);

  m.emplace_back("rms_total", error_rms(rec, 0.0, t_end));
  if (std::isfinite(t_damage)) {
    m.emplace_back("rms_pre_fault", error_rms(rec, 0.0, t_damage));
    m.emplace_back("rms_fault_transient",
                   error_rms(rec, t_damage, std::min(t_damage + 10.0, t_end)));
    const double adapted_end = std::isfinite(t_manual) ? t_manual : t_end;
    m.emplace_back("rms_adapted", error_rms(rec, t_damage + 10.0, adapted_end));
  }
  if (std::isfinite(t_manual) && std::isfinite(t_release)) {
    m.emplace_back("rms_manual_window", error_rms(rec, t_manual, t_release));
  }
  m.emplace_back("rms_final_5s", error_rms(rec, t_end - 5.0, t_end));

  double lambda_final = rec.empty() ? 0.0 : rec.back().lambda;
  double lambda_max = 0.0;
  double t_lambda_one = kNan;
  double t_lambda_moving = kNan;
  double t_fault_flag = kNan;
  bool was_converged = false;
  for (const RunRecord& r : rec) {
    lambda_max = std::max(lambda_max, r.lambda);
    if (std::isfinite(t_damage) && r.t >= t_damage) {
      if (!std::isfinite(t_lambda_one) && r.lambda >= 0.999) t_lambda_one = r.t;
      if (!std::isfinite(t_lambda_moving) && r.lambda > 0.01) {
        t_lambda_moving = r.t;
      }
      if (!std::isfinite(t_fault_flag) && was_converged && r.converged == 0) {
        t_fault_flag = r.t;
      }
    }
    was_converged = r.converged != 0;
  }
  m.emplace_back("lambda_final", lambda_final);
  m.emplace_back("lambda_max", lambda_max);
  m.emplace_back("t_lambda_one", t_lambda_one);
  m.emplace_back("t_lambda_moving", t_lambda_moving);
  m.emplace_back("t_fault_flag", t_fault_flag);

  const double m_hat =
      tail_mean(rec, 2.0, [](const RunRecord& r) { return r.p_hat[0]; });
  const double iyy_hat =
      tail_mean(rec, 2.0, [](const RunRecord& r) { return r.p_hat[2]; });
  m.emplace_back("m_hat_final", m_hat);
  m.emplace_back("Iyy_hat_final", iyy_hat);
  m.emplace_back("m_true_final", result.p_true_final.m);
  m.emplace_back("Iyy_true_final", result.p_true_final.Iyy);
  if (result.p_true_final.m > 0.0) {
    m.emplace_back("m_hat_rel_err",
                   std::abs(m_hat - result.p_true_final.m) /
                       result.p_true_final.m);
    m.emplace_back("Iyy_hat_rel_err",
                   std::abs(iyy_hat - result.p_true_final.Iyy) /
                       result.p_true_final.Iyy);
  }

  m.emplace_back("koop_resid_mean_5s", tail_mean(rec, 5.0, [](const RunRecord& r) {
                   return std::isfinite(r.koop_resid) ? r.koop_resid : 0.0;
                 }));
  m.emplace_back("rls_resid_mean_5s", tail_mean(rec, 5.0, [](const RunRecord& r) {
                   return std::isfinite(r.rls_resid) ? r.rls_resid : 0.0;
                 }));
  m.emplace_back("obs_rank_last", rec.empty() ? -1.0 : rec.back().obs_rank);
  m.emplace_back("obs_sv_min_last", rec.empty() ? kNan : rec.back().obs_sv_min);

  long sat_steps = 0, reject_steps = 0;
  for (const RunRecord& r : rec) {
    if (r.sat_mask != 0) ++sat_steps;
    if (r.innov_rejected != 0) ++reject_steps;
  }
  const double denom = rec.empty() ? 1.0 : static_cast<double>(rec.size());
  m.emplace_back("sat_fraction", sat_steps / denom);
  m.emplace_back("innov_reject_fraction", reject_steps / denom);
  m.emplace_back("ukf_resets", rec.empty() ? 0.0 : rec.back().ukf_resets);
  m.emplace_back("koopman_rejections", result.koopman_rejections);
  m.emplace_back("allocation_fallbacks", result.allocation_fallbacks);

  if (std::isfinite(t_extra)) {
    const int ch = sc.extra_term.target_channel;
    m.emplace_back("extra_resid_pre",
                   channel_rms(rec, std::max(0.0, t_extra - 10.0), t_extra, ch));
    m.emplace_back("extra_resid_post",
                   channel_rms(rec, t_extra + 5.0,
                               std::min(t_extra + 15.0, t_end), ch));
  }
  return m;
}

namespace {

void append_num(std::string& out, double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  out += buf;
}

void append_row(std::string& out, const RunRecord& r) {
  auto num = [&out](double x) {
    out += ',';
    append_num(out, x);
  };
  auto integer = [&out](int x) {
    out += ',';
    out += std::to_string(x);
  };
  append_num(out, r.t);
  for (int i = 0; i < 6; ++i) num(r.v[i]);
  for (int i = 0; i < 6; ++i) num(r.pose[i]);
  for (int i = 0; i < 6; ++i) num(r.v_d[i]);
  for (int i = 0; i < 6; ++i) num(r.v_err[i]);
  for (int i = 0; i < 6; ++i) num(r.v_hat[i]);
  for (int i = 0; i < 6; ++i) num(r.tau_true[i]);
  for (int i = 0; i < 6; ++i) num(r.tau_hat[i]);
  for (int i = 0; i < 6; ++i) num(r.tau_cmd[i]);
  for (int i = 0; i < 4; ++i) num(r.delta_cmd[i]);
  for (int i = 0; i < 4; ++i) num(r.delta[i]);
  integer(r.sat_mask);
  num(r.lambda);
  num(r.lambda_opt);
  num(r.lambda_sel);
  integer(r.manual);
  integer(r.converged);
  num(r.J_minus);
  num(r.J_plus);
  num(r.grad_J);
  num(r.innov_norm);
  integer(r.innov_rejected);
  for (int i = 0; i < 10; ++i) num(r.p_hat[i]);
  num(r.koop_cond);
  num(r.koop_resid);
  num(r.rls_resid);
  num(r.rls_win_resid);
  num(r.koop_ridge);
  integer(r.obs_rank);
  num(r.obs_sv_min);
  num(r.obs_sv_med);
  num(r.obs_sv_max);
  for (int i = 0; i < 6; ++i) num(r.extra_resid[i]);
  num(r.extra_true);
  integer(r.fit_now);
  integer(r.ukf_resets);
  integer(r.id_window);
  integer(r.events);
  integer(r.dist_active);
  out += '\n';
}

}  // namespace

std::string csv_header() {
  return "t,u,v,w,p,q,r,"
         "x,y,z,phi,theta,psi,"
         "u_d,v_d,w_d,p_d,q_d,r_d,"
         "eu,ev,ew,ep,eq,er,"
         "u_hat,v_hat,w_hat,p_hat,q_hat,r_hat,"
         "tau_x,tau_y,tau_z,tau_l,tau_m,tau_n,"
         "tauhat_x,tauhat_y,tauhat_z,tauhat_l,tauhat_m,tauhat_n,"
         "taucmd_x,taucmd_y,taucmd_z,taucmd_l,taucmd_m,taucmd_n,"
         "dcmd_thr,dcmd_rud,dcmd_ail,dcmd_ele,"
         "d_thr,d_rud,d_ail,d_ele,"
         "sat_mask,lambda,lambda_opt,lambda_sel,manual,converged,"
         "J_minus,J_plus,grad_J,innov_norm,innov_rejected,"
         "mhat,Ixxhat,Iyyhat,Izzhat,Ixzhat,Iyzhat,Ixyhat,"
         "rhoxhat,rhoyhat,rhozhat,"
         "koop_cond,koop_resid,rls_resid,rls_win_resid,koop_ridge,"
         "obs_rank,obs_sv_min,obs_sv_med,obs_sv_max,"
         "resid_x,resid_y,resid_z,resid_l,resid_m,resid_n,"
         "extra_true,fit_now,ukf_resets,id_window,events,dist_active";
}

void write_csv(const std::string& path, const std::vector<RunRecord>& records) {
  std::string out = csv_header();
  out += '\n';
  out.reserve(out.size() + records.size() * 1024);
  for (const RunRecord& r : records) append_row(out, r);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot open '" + path + "' for writing");
  f << out;
}

void write_csv_tail(const std::string& path,
                    const std::vector<RunRecord>& records, int tail_rows) {
  std::string out = csv_header();
  out += '\n';
  const std::size_t start =
      records.size() > static_cast<std::size_t>(tail_rows)
          ? records.size() - tail_rows
          : 0;
  for (std::size_t i = start; i < records.size(); ++i) {
    append_row(out, records[i]);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot open '" + path + "' for writing");
  f << out;
}

void write_metrics(const std::string& path, const Metrics& metrics) {
  std::string out;
  for (const auto& [key, value] : metrics) {
    out += key;
    out += '=';
    append_num(out, value);
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot open '" + path + "' for writing");
  f << out;
}

}  // namespace dac
