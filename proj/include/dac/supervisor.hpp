#pragma once

#include <deque>
#include <vector>

#include "dac/controller.hpp"

namespace dac {

enum class DecisionMode { kAuto, kManual };

// Decision factor bookkeeping. lambda_actual is the value applied to the
// blend, lambda_opt the optimizer output, lambda_sel the manual target.
struct DecisionState {
  double lambda_actual = 0.0;
  double lambda_opt = 0.0;
  double lambda_sel = 0.0;
  DecisionMode mode = DecisionMode::kAuto;

  // Gate bookkeeping for the intentional lag between target and motion.
  double converged_since = -1.0;  // time the convergence flag last turned on
  bool converged = false;
  double last_mode_switch = 0.0;

  double target() const {
    return mode == DecisionMode::kManual ? lambda_sel : lambda_opt;
  }
};

struct CostConfig {
  double horizon = 2.0;          // seconds of history per evaluation
  Mat6 H = Mat6::Identity();     // terminal weight
  Mat6 Q = Mat6::Identity();     // running weight
  double gamma = 0.05;           // descent step
  double fd_h = 0.02;            // central difference probe offset
  double grad_tol = 0.02;        // below this the optimum is left in place
  double rate_limit = 0.25;      // 1/s bound on lambda_actual motion
  double lag = 1.5;              // seconds between trigger and motion
  double decision_period = 0.1;  // seconds between descent iterations
  double conv_threshold = 0.25;  // innovation norm moving-average bound
  double conv_window = 1.0;      // seconds the average must stay below it
  // The descent runs only while the identified model reconstructs the fit
  // window this much better than the nominal one; otherwise the target walks
  // back toward the model. Keeps the rollout, whose surrogate plant is the
  // data side, from certifying the data side against itself.
  double credit_margin = 0.8;
};

// One recorded step of closed-loop history used by the rollout.
struct WindowSample {
  double t = 0.0;
  Vec6 v = Vec6::Zero();
  Pose pose;
  Vec6 v_d = Vec6::Zero();
  Vec6 vdot_d = Vec6::Zero();
};

// Quadratic tracking cost of re-flying the recorded window: the control law
// is blended at lambda while the plant surrogate is the full data-side model.
// Terminal term 1/2 vtilde' H vtilde plus trapezoidal 1/2 integral of
// vtilde' Q vtilde. Returns +inf when the rollout diverges.
double window_cost(const std::vector<WindowSample>& window, double lambda,
                   const ModelSide& model, const ModelSide& data,
                   const ControllerGains& gains, const ActuatorLimits& limits,
                   double eps_delta, double dt, const CostConfig& cfg);

struct DescentResult {
  double lambda_opt = 0.0;
  double J_minus = 0.0;
  double J_plus = 0.0;
  double gradient = 0.0;
  bool moved = false;
};

// One normalized steepest-descent iteration on the window cost with probes
// clamped to [0, 1] and one-sided differences at the boundary.
DescentResult descend(double lambda_prev,
                      const std::vector<WindowSample>& window,
                      const ModelSide& model, const ModelSide& data,
                      const ControllerGains& gains,
                      const ActuatorLimits& limits, double eps_delta,
                      double dt, const CostConfig& cfg);

// Tracks the innovation-norm moving average behind the convergence flag.
class ConvergenceMonitor {
 public:
  ConvergenceMonitor(double threshold, double window_s, double dt);

  // Returns the flag state after folding in one innovation norm.
  bool push(double t, double innovation_norm, DecisionState& state);

  double average() const { return samples_ == 0 ? 0.0 : sum_ / samples_; }

 private:
  double threshold_;
  int capacity_;
  std::deque<double> buf_;
  double sum_ = 0.0;
  int samples_ = 0;
  double below_since_ = -1.0;
  double window_s_;
};

// Rate-limited motion of lambda_actual toward the current target, gated on
// the lag since convergence (auto mode) and since the last mode switch.
void advance_lambda(DecisionState& state, double t, double dt,
                    const CostConfig& cfg);

// Pilot override: engage manual mode at the given value or release back to
// the optimizer. Values outside [0, 1] throw config_error.
void manual_override(DecisionState& state, double t, double lambda_sel);
void manual_release(DecisionState& state, double t);

}  // namespace dac
