#include "dac/supervisor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dac/integrate.hpp"

namespace dac {

double window_cost(const std::vector<WindowSample>& window, double lambda,
                   const ModelSide& model, const ModelSide& data,
                   const ControllerGains& gains, const ActuatorLimits& limits,
                   double eps_delta, double dt, const CostConfig& cfg) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (window.size() < 2) return kInf;

  BlendedModel ctrl;
  BlendedModel plant;
  try {
    ctrl = blend(model, data, lambda);
    plant = blend(model, data, 1.0);
  } catch (const error&) {
    return kInf;
  }

  Vec6 v = window.front().v;
  Pose pose = window.front().pose;
  Eigen::VectorXd hold = Eigen::VectorXd::Zero(kNumActuators);
  double integral = 0.0;
  double prev_q = 0.0;
  Vec6 vtilde = Vec6::Zero();

  for (size_t i = 0; i < window.size(); ++i) {
    const WindowSample& ws = window[i];
    vtilde = v - ws.v_d;
    const double qcost = vtilde.dot(cfg.Q * vtilde);
    if (i > 0) integral += 0.5 * dt * (prev_q + qcost);
    prev_q = qcost;
    if (i + 1 == window.size()) break;

    const GeneralizedVelocity gv = GeneralizedVelocity::from_vec(v);
    DesiredMotion des{GeneralizedVelocity::from_vec(ws.v_d), ws.vdot_d};
    Vec4 delta;
    try {
      const Vec6 tau_c = control_wrench(gv, pose, des, ctrl, gains);
      AllocationResult alloc = allocate(tau_c, ctrl.B, eps_delta, hold);
      hold = alloc.delta;
      delta = saturate(Vec4(alloc.delta.head<4>()), limits).delta;
    } catch (const error&) {
      return kInf;
    }

    // Deterministic surrogate rollout: data-side forces, no excitation.
    auto rhs = [&](double, const Vec6& vi) -> Vec6 {
      const GeneralizedVelocity gvi = GeneralizedVelocity::from_vec(vi);
      const Vec6 tau = plant.tau0 + plant.B * delta + plant.D * vi;
      const Mat6 M = plant.M;
      const Vec6 f =
          tau + plant.tauR - plant.C(gvi) * vi - plant.G(pose);
      return M.ldlt().solve(f);
    };
    v = rk4_step(rhs, ws.t, v, dt);
    if (!v.allFinite() || v.head<3>().norm() > kAirspeedCeiling) return kInf;

    // Attitude follows the rolled-out rates so gravity stays consistent.
    try {
      pose.euler += dt * euler_rate_matrix(pose.euler) * v.tail<3>();
    } catch (const error&) {
      return kInf;
    }
    for (int a = 0; a < 3; ++a) pose.euler[a] = wrap_angle(pose.euler[a]);
  }

  const double terminal = 0.5 * vtilde.dot(cfg.H * vtilde);
  return terminal + 0.5 * integral;
}

DescentResult descend(double lambda_prev,
                      const std::vector<WindowSample>& window,
                      const ModelSide& model, const ModelSide& data,
                      const ControllerGains& gains,
                      const ActuatorLimits& limits, double eps_delta,
                      double dt, const CostConfig& cfg) {
  auto J = [&](double lam) {
    return window_cost(window, std::clamp(lam, 0.0, 1.0), model, data, gains,
                       limits, eps_delta, dt, cfg);
  };
  const double lo = std::max(0.0, lambda_prev - cfg.fd_h);
  const double hi = std::min(1.0, lambda_prev + cfg.fd_h);

  DescentResult out;
  out.lambda_opt = lambda_prev;
  out.J_minus = J(lo);
  out.J_plus = J(hi);
  if (hi == lo) return out;
  if (!std::isfinite(out.J_minus) || !std::isfinite(out.J_plus)) {
    // A diverging probe is treated as an uphill direction.
    if (std::isfinite(out.J_minus)) {
      out.lambda_opt = std::clamp(lambda_prev - cfg.gamma, 0.0, 1.0);
      out.moved = out.lambda_opt != lambda_prev;
    } else if (std::isfinite(out.J_plus)) {
      out.lambda_opt = std::clamp(lambda_prev + cfg.gamma, 0.0, 1.0);
      out.moved = out.lambda_opt != lambda_prev;
    }
    return out;
  }
  out.gradient = (out.J_plus - out.J_minus) / (hi - lo);
  if (std::abs(out.gradient) < cfg.grad_tol) return out;
  // Normalized direction: the scalar gradient reduces to its sign.
  const double step = out.gradient > 0.0 ? -cfg.gamma : cfg.gamma;
  out.lambda_opt = std::clamp(lambda_prev + step, 0.0, 1.0);
  out.moved = out.lambda_opt != lambda_prev;
  return out;
}

ConvergenceMonitor::ConvergenceMonitor(double threshold, double window_s,
                                       double dt)
    : threshold_(threshold),
      capacity_(std::max(1, static_cast<int>(std::lround(window_s / dt)))),
      window_s_(window_s) {}

bool ConvergenceMonitor::push(double t, double innovation_norm,
                              DecisionState& state) {
  buf_.push_back(innovation_norm);
  sum_ += innovation_norm;
  if (static_cast<int>(buf_.size()) > capacity_) {
    sum_ -= buf_.front();
    buf_.pop_front();
  }
  samples_ = static_cast<int>(buf_.size());

  const bool filled = samples_ == capacity_;
  const bool below = filled && average() < threshold_;
  if (below) {
    if (below_since_ < 0.0) below_since_ = t;
  } else {
    below_since_ = -1.0;
  }
  const bool flag = below && (t - below_since_) >= 0.0;
  if (flag && !state.converged) state.converged_since = t;
  if (!flag) state.converged_since = -1.0;
  state.converged = flag;
  return flag;
}

void advance_lambda(DecisionState& state, double t, double dt,
                    const CostConfig& cfg) {
  if (t - state.last_mode_switch < cfg.lag) return;
  if (state.mode == DecisionMode::kAuto) {
    if (!state.converged || t - state.converged_since < cfg.lag) return;
  }
  const double target = state.target();
  const double max_step = cfg.rate_limit * dt;
  const double err = target - state.lambda_actual;
  state.lambda_actual += std::clamp(err, -max_step, max_step);
  state.lambda_actual = std::clamp(state.lambda_actual, 0.0, 1.0);
}

void manual_override(DecisionState& state, double t, double lambda_sel) {
  if (!(lambda_sel >= 0.0 && lambda_sel <= 1.0)) {
    throw config_error("manual decision factor outside [0, 1]");
  }
  state.lambda_sel = lambda_sel;
  state.mode = DecisionMode::kManual;
  state.last_mode_switch = t;
}

void manual_release(DecisionState& state, double t) {
  state.mode = DecisionMode::kAuto;
  state.last_mode_switch = t;
}

}  // namespace dac
