#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dac/scenario.hpp"

namespace dac {

// One CSV row. Values describe the state at t and the commands applied over
// [t, t + dt); the truth state is sampled before integration.
struct RunRecord {
  double t = 0.0;
  Vec6 v = Vec6::Zero();
  Vec6 pose = Vec6::Zero();  // [x, y, z, phi, theta, psi]
  Vec6 v_d = Vec6::Zero();
  Vec6 v_err = Vec6::Zero();  // truth minus desired
  Vec6 v_hat = Vec6::Zero();
  Vec6 tau_true = Vec6::Zero();  // applied plant wrench, extra term included
  Vec6 tau_hat = Vec6::Zero();
  Vec6 tau_cmd = Vec6::Zero();
  Vec4 delta_cmd = Vec4::Zero();  // pre-saturation
  Vec4 delta = Vec4::Zero();      // applied
  int sat_mask = 0;

  double lambda = 0.0;
  double lambda_opt = 0.0;
  double lambda_sel = 0.0;
  int manual = 0;
  int converged = 0;
  double J_minus = 0.0;
  double J_plus = 0.0;
  double grad_J = 0.0;

  double innov_norm = 0.0;
  int innov_rejected = 0;
  Vec10 p_hat = Vec10::Zero();

  double koop_cond = 0.0;
  double koop_resid = 0.0;      // batch fit, at fit instants
  double rls_resid = 0.0;       // one-step prediction error, every step
  double rls_win_resid = 0.0;   // recursive estimate scored on the fit window
  double koop_ridge = 0.0;
  int obs_rank = -1;
  double obs_sv_min = 0.0;
  double obs_sv_med = 0.0;
  double obs_sv_max = 0.0;

  Vec6 extra_resid = Vec6::Zero();  // tau_hat minus the fitted regression
  double extra_true = 0.0;          // injected value on the target row
  int fit_now = 0;                  // a batch fit succeeded this step
  int ukf_resets = 0;
  int id_window = 0;
  int events = 0;  // bitmask of events fired this step
  int dist_active = 0;
};

// Bit assignments for RunRecord::events.
enum EventBit : int {
  kEvDisturbance = 1,
  kEvDamage = 2,
  kEvExtraTerm = 4,
  kEvManual = 8,
  kEvRelease = 16,
  kEvSetpoint = 32,
};

struct RunResult {
  RunMode mode = RunMode::kDac;
  std::vector<RunRecord> records;
  bool aborted = false;         // a step threw numeric_error
  std::string abort_message;
  InertialParams p_true_final;  // truth parameters after all events
  int koopman_rejections = 0;   // fits dropped for conditioning
  int allocation_fallbacks = 0; // blends abandoned for the model side
};

// Closed-loop simulation of one scenario. In kMbc the decision factor is
// pinned to zero and the optimizer never runs; estimation and identification
// run in both modes. Divergence is reported through RunResult::aborted
// rather than an exception so callers can still dump the tail.
RunResult run_scenario(const Scenario& sc, RunMode mode);

using Metrics = std::vector<std::pair<std::string, double>>;

// Scalar summary of a finished run, keyed for metrics.kv. Phase boundaries
// come from the scenario's event times.
Metrics summarize(const Scenario& sc, const RunResult& result);

// RMS of the full twist error over records with t in [t0, t1).
double error_rms(const std::vector<RunRecord>& records, double t0, double t1);

std::string csv_header();
void write_csv(const std::string& path, const std::vector<RunRecord>& records);

// Last tail_rows rows only, same schema. Used for post-mortem dumps.
void write_csv_tail(const std::string& path,
                    const std::vector<RunRecord>& records, int tail_rows);

void write_metrics(const std::string& path, const Metrics& metrics);

}  // namespace dac
