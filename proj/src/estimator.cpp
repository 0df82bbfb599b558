#include "dac/estimator.hpp"

#include <algorithm>

#include "dac/integrate.hpp"

namespace dac {

UkfCore::UkfCore(Eigen::VectorXd x0, Eigen::MatrixXd P0, Eigen::MatrixXd Q0,
                 Eigen::MatrixXd R0, double kappa)
    : x_(std::move(x0)),
      P_(std::move(P0)),
      Q_(std::move(Q0)),
      R_(std::move(R0)),
      kappa_(kappa) {}

Eigen::MatrixXd UkfCore::cholesky_with_jitter(const Eigen::MatrixXd& cov) {
  const long n = cov.rows();
  const double scale = std::max(cov.trace() / static_cast<double>(n), 1e-30);
  double jitter = 0.0;
  for (int attempt = 0; attempt < 5; ++attempt) {
    Eigen::MatrixXd c = cov;
    if (jitter > 0.0) c += jitter * Eigen::MatrixXd::Identity(n, n);
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() == Eigen::Success) {
      if (attempt > 0) P_ = c;
      return llt.matrixL();
    }
    jitter = jitter == 0.0 ? 1e-12 * scale : jitter * 1e3;
  }
  // Last resort: drop correlations and keep a floored diagonal.
  ++resets_;
  Eigen::VectorXd d = cov.diagonal().cwiseMax(1e-12 * scale);
  P_ = d.asDiagonal();
  return d.cwiseSqrt().asDiagonal();
}

SigmaPoints UkfCore::sigma_points(const Eigen::VectorXd& mean,
                                  const Eigen::MatrixXd& cov) {
  const long n = mean.size();
  const double spread = std::sqrt(static_cast<double>(n) + kappa_);
  const Eigen::MatrixXd L = cholesky_with_jitter(cov);
  SigmaPoints sp;
  sp.points.resize(n, 2 * n + 1);
  sp.weights.resize(2 * n + 1);
  sp.points.col(0) = mean;
  sp.weights[0] = kappa_ / (static_cast<double>(n) + kappa_);
  for (long i = 0; i < n; ++i) {
    sp.points.col(1 + i) = mean + spread * L.col(i);
    sp.points.col(1 + n + i) = mean - spread * L.col(i);
    sp.weights[1 + i] = sp.weights[1 + n + i] =
        0.5 / (static_cast<double>(n) + kappa_);
  }
  return sp;
}

void UkfCore::predict(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& rhs,
    double dt) {
  const long n = x_.size();
  SigmaPoints sp = sigma_points(x_, P_);
  auto f = [&rhs](double, const Eigen::VectorXd& x) { return rhs(x); };
  for (long i = 0; i < sp.points.cols(); ++i) {
    sp.points.col(i) =
        rk4_step(f, 0.0, Eigen::VectorXd(sp.points.col(i)), dt);
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (long i = 0; i < sp.points.cols(); ++i) {
    mean += sp.weights[i] * sp.points.col(i);
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  for (long i = 0; i < sp.points.cols(); ++i) {
    const Eigen::VectorXd d = sp.points.col(i) - mean;
    cov.noalias() += sp.weights[i] * d * d.transpose();
  }
  x_ = mean;
  P_ = 0.5 * (cov + cov.transpose()) + Q_;
}

UkfUpdate UkfCore::update(const Eigen::VectorXd& y, const Eigen::MatrixXd& H,
                          double gate) {
  const long n = x_.size();
  const long ny = y.size();
  UkfUpdate out;
  out.P_prior = P_;

  SigmaPoints sp = sigma_points(x_, P_);
  Eigen::MatrixXd Y(ny, sp.points.cols());
  for (long i = 0; i < sp.points.cols(); ++i) {
    Y.col(i) = H * sp.points.col(i);
  }
  Eigen::VectorXd y_pred = Eigen::VectorXd::Zero(ny);
  for (long i = 0; i < Y.cols(); ++i) y_pred += sp.weights[i] * Y.col(i);
  Eigen::MatrixXd Pyy = Eigen::MatrixXd::Zero(ny, ny);
  Eigen::MatrixXd Pxy = Eigen::MatrixXd::Zero(n, ny);
  for (long i = 0; i < Y.cols(); ++i) {
    const Eigen::VectorXd dy = Y.col(i) - y_pred;
    const Eigen::VectorXd dx = sp.points.col(i) - x_;
    Pyy.noalias() += sp.weights[i] * dy * dy.transpose();
    Pxy.noalias() += sp.weights[i] * dx * dy.transpose();
  }
  out.S = Pyy + R_;
  Eigen::LDLT<Eigen::MatrixXd> S_ldlt(out.S);
  out.innovation = y - y_pred;
  out.mahalanobis = out.innovation.dot(S_ldlt.solve(out.innovation));
  if (out.mahalanobis > gate) {
    out.rejected = true;
    out.gain = Eigen::MatrixXd::Zero(n, ny);
    out.residual = out.innovation;
    return out;
  }
  out.gain = S_ldlt.solve(Pxy.transpose()).transpose();
  x_ += out.gain * out.innovation;
  Eigen::MatrixXd P = P_ - out.gain * out.S * out.gain.transpose();
  P_ = 0.5 * (P + P.transpose());
  out.residual = y - H * x_;
  return out;
}

void UkfCore::adapt(const UkfUpdate& u, const Eigen::MatrixXd& H, double alpha,
                    double r_floor, long adapt_dim) {
  if (u.rejected) return;
  const long d = adapt_dim > 0 ? std::min(adapt_dim, x_.size()) : x_.size();
  const Eigen::VectorXd kd = u.gain.topRows(d) * u.innovation;
  Eigen::MatrixXd Qd =
      alpha * Q_.topLeftCorner(d, d) + (1.0 - alpha) * kd * kd.transpose();
  Q_.topLeftCorner(d, d) = 0.5 * (Qd + Qd.transpose());

  Eigen::MatrixXd R =
      alpha * R_ + (1.0 - alpha) * (u.residual * u.residual.transpose() +
                                    H * P_ * H.transpose());
  R = 0.5 * (R + R.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(r_floor);
  R_ = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::VectorXd UkfConfig::initial_sigma() const {
  Eigen::VectorXd s(34);
  s << p0_v, p0_tau, p0_zeta1, p0_zeta2, p0_params;
  return s;
}

Eigen::VectorXd UkfConfig::process_sigma() const {
  Eigen::VectorXd s(34);
  s << q_v, q_tau, q_zeta1, q_zeta2, q_params;
  return s;
}

Vec10 project_to_physical(const Vec10& p, bool* changed) {
  Vec10 out = p;
  bool touched = false;
  if (out[0] < 0.05) {
    out[0] = 0.05;
    touched = true;
  }
  InertialParams ip = InertialParams::unflatten(out);
  Eigen::SelfAdjointEigenSolver<Mat3> es(ip.inertia_tensor());
  double j_min = es.eigenvalues().minCoeff();
  if (j_min < 1e-6) {
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(1e-6);
    const Mat3 T =
        es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    out[1] = T(0, 0);
    out[2] = T(1, 1);
    out[3] = T(2, 2);
    out[4] = -T(0, 2);
    out[5] = -T(1, 2);
    out[6] = -T(0, 1);
    j_min = 1e-6;
    touched = true;
  }
  // The 6x6 mass matrix stays positive definite only while m |rho|^2 is
  // below the smallest inertia eigenvalue (Schur complement bound).
  const double rho_sq = out.tail<3>().squaredNorm();
  const double rho_cap_sq = 0.5 * j_min / out[0];
  if (rho_sq > rho_cap_sq) {
    out.tail<3>() *= std::sqrt(rho_cap_sq / rho_sq);
    touched = true;
  }
  if (changed) *changed = touched;
  return out;
}

DualEstimator::DualEstimator(const UkfConfig& cfg, const InertialParams& p0,
                             const Vec6& tauR, double g)
    : cfg_(cfg),
      tauR_(tauR),
      g_(g),
      core_(Eigen::VectorXd::Zero(34),
            cfg.initial_sigma().cwiseAbs2().asDiagonal(),
            cfg.process_sigma().cwiseAbs2().asDiagonal(),
            Eigen::MatrixXd::Zero(6, 6), cfg.kappa) {
  Vec6 r_diag;
  r_diag << Vec3::Constant(cfg.sigma_v * cfg.sigma_v),
      Vec3::Constant(cfg.sigma_omega * cfg.sigma_omega);
  core_.R() = r_diag.asDiagonal();
  H_ = Eigen::MatrixXd::Zero(6, 34);
  H_.leftCols<6>() = Mat6::Identity();
  AugmentedState x0;
  x0.p = p0.flatten();
  core_.x() = x0.pack();
}

void DualEstimator::initialize(const Vec6& v0, const Vec6& tau0) {
  AugmentedState x = state();
  x.v = v0;
  x.tau_a.setZero();
  x.tau_a.head<6>() = tau0;
  core_.x() = x.pack();
}

Vec34 DualEstimator::process_rhs(const Vec34& x, const Pose& pose) const {
  AugmentedState s = AugmentedState::unpack(x);
  bool touched = false;
  const Vec10 p = project_to_physical(s.p, &touched);
  if (touched) ++projections_;
  const InertialParams ip = InertialParams::unflatten(p);
  const GeneralizedVelocity v = GeneralizedVelocity::from_vec(s.v);

  Vec34 dx = Vec34::Zero();
  dx.head<6>() = acceleration(v, pose, s.tau(), ip, tauR_, g_);
  // Force-moment chain block shift.
  dx.segment<6>(6) = s.tau_a.segment<6>(6);
  dx.segment<6>(12) = s.tau_a.segment<6>(12);
  return dx;
}

EstimatorStep DualEstimator::step(const Vec6& y, const Pose& pose, double dt) {
  core_.predict(
      [this, &pose](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return process_rhs(Vec34(x), pose);
      },
      dt);
  UkfUpdate u = core_.update(y, H_, cfg_.mahalanobis_gate);
  if (u.rejected) ++rejected_;
  // Adaptation covers velocity and the wrench chain only; the parameter
  // block keeps its configured slow walk.
  core_.adapt(u, H_, cfg_.alpha_forget, cfg_.r_floor, 24);

  EstimatorStep out;
  out.x_hat = state();
  out.innovation = u.innovation;
  out.residual = u.residual;
  out.rejected = u.rejected;
  ++steps_;
  if (cfg_.obs_check_period > 0 && steps_ % cfg_.obs_check_period == 0) {
    const JacobianBlocks jac =
        estimator_jacobians(out.x_hat, pose, tauR_, cfg_.fd_step, g_);
    const ObservabilityResult obs = observability_from_jacobians(jac);
    out.obs_checked = true;
    out.obs_sv = obs.sv;
  }
  return out;
}

ObservabilityResult DualEstimator::observability() const {
  const JacobianBlocks jac =
      estimator_jacobians(state(), Pose{}, tauR_, cfg_.fd_step, g_);
  return observability_from_jacobians(jac);
}

namespace {

Vec6 vdot_of(const Vec6& v, const Vec6& tau, const Vec10& p, const Pose& pose,
             const Vec6& tauR, double g) {
  const InertialParams ip = InertialParams::unflatten(project_to_physical(p));
  return acceleration(GeneralizedVelocity::from_vec(v), pose, tau, ip, tauR, g);
}

}  // namespace

JacobianBlocks estimator_jacobians(const AugmentedState& x, const Pose& pose,
                                   const Vec6& tauR, double fd_step,
                                   double g) {
  JacobianBlocks out;
  const InertialParams ip =
      InertialParams::unflatten(project_to_physical(x.p));
  const Vec6 tau = x.tau();

  // vdot is linear in tau through M^-1; the chain tail does not enter.
  out.df_dtau_a.leftCols<6>() =
      mass_matrix(ip).llt().solve(Mat6::Identity());

  for (int i = 0; i < 6; ++i) {
    const double h = fd_step * std::max(1.0, std::abs(x.v[i]));
    Vec6 vp = x.v, vm = x.v;
    vp[i] += h;
    vm[i] -= h;
    out.df_dv.col(i) = (vdot_of(vp, tau, x.p, pose, tauR, g) -
                        vdot_of(vm, tau, x.p, pose, tauR, g)) /
                       (2.0 * h);
  }
  for (int i = 0; i < 10; ++i) {
    const double h = fd_step * std::max(1.0, std::abs(x.p[i]));
    Vec10 pp = x.p, pm = x.p;
    pp[i] += h;
    pm[i] -= h;
    out.df_dp.col(i) = (vdot_of(x.v, tau, pp, pose, tauR, g) -
                        vdot_of(x.v, tau, pm, pose, tauR, g)) /
                       (2.0 * h);
  }
  return out;
}

ObservabilityResult observability_from_jacobians(const JacobianBlocks& jac) {
  constexpr int n = 34;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  A.block<6, 6>(0, 0) = jac.df_dv;
  A.block<6, 18>(0, 6) = jac.df_dtau_a;
  A.block<6, 10>(0, 24) = jac.df_dp;
  // Chain shift: tau <- zeta1 <- zeta2.
  A.block<6, 6>(6, 12).setIdentity();
  A.block<6, 6>(12, 18).setIdentity();

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(6, n);
  C.leftCols<6>().setIdentity();

  ObservabilityResult out;
  out.O.resize(6 * n, n);
  Eigen::MatrixXd block = C;
  for (int i = 0; i < n; ++i) {
    const double scale = block.norm();
    out.O.middleRows<6>(6 * i) = scale > 0.0 ? (block / scale).eval() : block;
    block = block * A;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.O);
  out.sv = svd.singularValues();
  const double tol = 1e-12 * out.sv[0];
  out.numerical_rank =
      static_cast<int>((out.sv.array() > tol).count());
  return out;
}

}  // namespace dac
