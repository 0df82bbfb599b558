#pragma once

#include <functional>

#include "dac/airframe.hpp"
#include "dac/types.hpp"

namespace dac {

using Vec18 = Eigen::Matrix<double, 18, 1>;
using Vec34 = Eigen::Matrix<double, 34, 1>;

// Filter state: twist, force-moment chain [tau, zeta1, zeta2], parameters.
// The chain is a triple integrator, tau' = zeta1, zeta1' = zeta2, zeta2' = 0.
struct AugmentedState {
  Vec6 v = Vec6::Zero();
  Vec18 tau_a = Vec18::Zero();
  Vec10 p = Vec10::Zero();

  Vec34 pack() const {
    Vec34 x;
    x << v, tau_a, p;
    return x;
  }
  static AugmentedState unpack(const Vec34& x) {
    AugmentedState s;
    s.v = x.head<6>();
    s.tau_a = x.segment<18>(6);
    s.p = x.tail<10>();
    return s;
  }
  Vec6 tau() const { return tau_a.head<6>(); }
};

struct SigmaPoints {
  Eigen::MatrixXd points;   // n x (2n+1), column 0 is the mean
  Eigen::VectorXd weights;  // 2n+1
};

struct UkfUpdate {
  Eigen::VectorXd innovation;  // y - y_pred before the state update
  Eigen::VectorXd residual;    // y - H x after the state update
  Eigen::MatrixXd gain;
  Eigen::MatrixXd P_prior;
  Eigen::MatrixXd S;
  double mahalanobis = 0.0;
  bool rejected = false;
};

// Unscented filter over a runtime-sized state with the simplest symmetric
// 2n+1 sigma set: offsets sqrt(n + kappa) L_i, center weight kappa/(n+kappa).
class UkfCore {
 public:
  UkfCore(Eigen::VectorXd x0, Eigen::MatrixXd P0, Eigen::MatrixXd Q0,
          Eigen::MatrixXd R0, double kappa = 0.0);

  SigmaPoints sigma_points(const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov);

  // Propagates every sigma point one RK4 step of xdot = rhs(x) and adds Q.
  void predict(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& rhs,
               double dt);

  // Measurement y = H x + noise. Innovations whose squared Mahalanobis
  // distance exceeds gate are rejected and leave the state untouched.
  UkfUpdate update(const Eigen::VectorXd& y, const Eigen::MatrixXd& H,
                   double gate);

  // Innovation-based forgetting-factor adaptation. R keeps a spectral floor.
  // Only the leading adapt_dim states adapt their process noise (0 = all);
  // the remainder keeps its configured diagonal.
  void adapt(const UkfUpdate& u, const Eigen::MatrixXd& H, double alpha,
             double r_floor, long adapt_dim = 0);

  const Eigen::VectorXd& x() const { return x_; }
  Eigen::VectorXd& x() { return x_; }
  const Eigen::MatrixXd& P() const { return P_; }
  Eigen::MatrixXd& P() { return P_; }
  const Eigen::MatrixXd& Q() const { return Q_; }
  Eigen::MatrixXd& Q() { return Q_; }
  const Eigen::MatrixXd& R() const { return R_; }
  Eigen::MatrixXd& R() { return R_; }
  int resets() const { return resets_; }

 private:
  Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& cov);

  Eigen::VectorXd x_;
  Eigen::MatrixXd P_, Q_, R_;
  double kappa_;
  int resets_ = 0;
};

struct UkfConfig {
  double kappa = 0.0;
  double alpha_forget = 0.98;
  double sigma_v = 0.05;        // ft/s measurement noise per linear axis
  double sigma_omega = 0.002;   // rad/s measurement noise per angular axis
  double mahalanobis_gate = 40.0;
  double r_floor = 1e-10;
  double fd_step = 1e-6;
  int obs_check_period = 50;    // steps between observability scans

  // Initial / process standard deviations, expanded onto the diagonal.
  Vec6 p0_v = Vec6::Constant(0.05);
  Vec6 p0_tau = Vec6::Constant(1.0);
  Vec6 p0_zeta1 = Vec6::Constant(2.0);
  Vec6 p0_zeta2 = Vec6::Constant(5.0);
  Vec10 p0_params =
      (Vec10() << 0.01, 0.01, 0.02, 0.02, 0.005, 0.005, 0.005, 0.01, 0.01,
       0.01)
          .finished();
  Vec6 q_v = Vec6::Constant(1e-4);
  // The wrench chain must track the identification tones with near-unity
  // gain or the fitted effectiveness columns collapse; per-channel values
  // let the angular rows follow much faster tones than the linear rows.
  Vec6 q_tau = Vec6::Constant(2e-2);
  Vec6 q_zeta1 = Vec6::Constant(2e-1);
  Vec6 q_zeta2 = Vec6::Constant(2.0);
  // Parameters walk slowly; abrupt force changes belong to the tau chain.
  Vec10 q_params =
      (Vec10() << 1e-5, 2e-6, 4e-6, 4e-6, 1e-6, 1e-6, 1e-6, 2e-6, 2e-6, 2e-6)
          .finished();

  Eigen::VectorXd initial_sigma() const;
  Eigen::VectorXd process_sigma() const;
};

struct JacobianBlocks {
  Mat6 df_dv = Mat6::Zero();
  Eigen::Matrix<double, 6, 18> df_dtau_a = Eigen::Matrix<double, 6, 18>::Zero();
  Eigen::Matrix<double, 6, 10> df_dp = Eigen::Matrix<double, 6, 10>::Zero();
};

struct ObservabilityResult {
  Eigen::MatrixXd O;           // 204 x 34, block rows balanced
  Eigen::VectorXd sv;          // 34 singular values, descending
  int numerical_rank = 0;
};

struct EstimatorStep {
  AugmentedState x_hat;
  Vec6 innovation = Vec6::Zero();
  Vec6 residual = Vec6::Zero();
  bool rejected = false;
  bool obs_checked = false;
  Eigen::VectorXd obs_sv;
};

// vdot jacobians of the filter process model at the given state. df/dtau_a is
// the analytic [M^-1 0]; the v and p blocks use scaled central differences.
JacobianBlocks estimator_jacobians(const AugmentedState& x, const Pose& pose,
                                   const Vec6& tauR, double fd_step,
                                   double g = kGravity);

// Continuous-time pair (A, C) of the augmented model, stacked through n-1
// powers into the observability matrix with per-block-row balancing.
ObservabilityResult observability_from_jacobians(const JacobianBlocks& jac);

// Joint 34-state filter over twist, force-moment chain and parameters.
class DualEstimator {
 public:
  DualEstimator(const UkfConfig& cfg, const InertialParams& p0,
                const Vec6& tauR, double g = kGravity);

  // Seeds the twist block from the first measurement and tau from the model.
  void initialize(const Vec6& v0, const Vec6& tau0);

  EstimatorStep step(const Vec6& y, const Pose& pose, double dt);

  AugmentedState state() const { return AugmentedState::unpack(core_.x()); }
  const Eigen::MatrixXd& covariance() const { return core_.P(); }
  InertialParams params_hat() const {
    return InertialParams::unflatten(state().p);
  }
  const UkfConfig& config() const { return cfg_; }
  int projection_events() const { return projections_; }
  int reset_events() const { return core_.resets(); }
  int rejected_measurements() const { return rejected_; }

  ObservabilityResult observability() const;

 private:
  Vec34 process_rhs(const Vec34& x, const Pose& pose) const;

  UkfConfig cfg_;
  Vec6 tauR_;
  double g_;
  UkfCore core_;
  Eigen::MatrixXd H_;
  long steps_ = 0;
  int rejected_ = 0;
  mutable int projections_ = 0;
};

// Clamps mass and inertia eigenvalues so the mass matrix stays invertible.
// Used on sigma points that wander outside the physical set.
Vec10 project_to_physical(const Vec10& p, bool* changed = nullptr);

}  // namespace dac
