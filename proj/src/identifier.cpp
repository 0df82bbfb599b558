#include "dac/identifier.hpp"

#include <cmath>
#include <limits>

namespace dac {

Stacks build_stacks(const std::deque<FitSample>& samples) {
  const int m = static_cast<int>(samples.size());
  if (m < kDictionary) {
    throw config_error("need at least 11 samples to build regression stacks");
  }
  Stacks st;
  st.T.resize(6, m);
  st.Y.resize(kDictionary, m);
  int j = 0;
  for (const FitSample& s : samples) {
    st.T.col(j) = s.tau_hat;
    st.Y.col(j) << s.delta, s.v, 1.0;
    ++j;
  }
  return st;
}

Stacks build_stacks(const SampleWindow& window) {
  return build_stacks(window.samples());
}

// Dictionary rows mix units (airspeed ~1e2, actuator dither ~1e-3), so the
// raw Gram's condition number measures unit disparity, not excitation. Row
// scales are divided out before conditioning and solving; the exact
// least-squares solution is invariant under this.
static Eigen::VectorXd row_scales(const Eigen::MatrixXd& Y) {
  Eigen::VectorXd s(kDictionary);
  const double m = static_cast<double>(Y.cols());
  for (int i = 0; i < kDictionary; ++i) {
    const double rms = std::sqrt(Y.row(i).squaredNorm() / m);
    s[i] = rms > 0.0 ? rms : 1.0;
  }
  return s;
}

double scaled_ridge(const Eigen::MatrixXd& Y, double scale) {
  const Eigen::VectorXd s = row_scales(Y);
  const Eigen::MatrixXd Yeq = s.cwiseInverse().asDiagonal() * Y;
  return scale * (Yeq * Yeq.transpose()).trace() / kDictionary;
}

double default_ridge(const Eigen::MatrixXd& Y) {
  return scaled_ridge(Y, 1e-8);
}

std::optional<RegressorEstimate> koopman_fit(
    const Eigen::MatrixXd& T, const Eigen::MatrixXd& Y, double ridge,
    double cond_threshold, double cond_ceiling,
    const Eigen::Matrix<double, 6, kDictionary>* anchor) {
  const Eigen::VectorXd s = row_scales(Y);
  const Eigen::MatrixXd Yeq = s.cwiseInverse().asDiagonal() * Y;
  const Eigen::MatrixXd G = Yeq * Yeq.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  const double ev_min = es.eigenvalues().minCoeff();
  const double ev_max = es.eigenvalues().maxCoeff();
  const double cond =
      ev_min > 0.0 ? ev_max / ev_min : std::numeric_limits<double>::infinity();
  if (!(cond < cond_ceiling)) return std::nullopt;

  RegressorEstimate out;
  out.condition = cond;
  out.ridge_used = cond < cond_threshold ? 0.0 : ridge;
  Eigen::MatrixXd Greg = G;
  if (out.ridge_used > 0.0) {
    Greg += out.ridge_used *
            Eigen::MatrixXd::Identity(kDictionary, kDictionary);
  }
  // Solve in scaled coordinates, then map back: P = P_eq * S^{-1}. With an
  // anchor the targets are its residuals, so poorly excited directions keep
  // the anchor's coefficients rather than collapsing toward zero.
  const Eigen::MatrixXd Teff = anchor != nullptr ? (T - *anchor * Y).eval() : T;
  out.P = Greg.ldlt().solve(Yeq * Teff.transpose()).transpose() *
          s.cwiseInverse().asDiagonal();
  if (anchor != nullptr) out.P += *anchor;
  out.residual_rms = reconstruction_rms(out.P, {T, Y});
  return out;
}

double reconstruction_rms(const Eigen::Matrix<double, 6, kDictionary>& P,
                          const Stacks& stacks) {
  const Eigen::MatrixXd R = stacks.T - P * stacks.Y;
  return R.norm() / std::sqrt(static_cast<double>(R.size()));
}

RlsState RlsState::start(double forgetting, double p0) {
  RlsState s;
  s.theta.setZero();
  s.P_cov = p0 * Eigen::Matrix<double, kDictionary, kDictionary>::Identity();
  s.forgetting = forgetting;
  return s;
}

void rls_update(RlsState& state, const FitSample& s) {
  Eigen::Matrix<double, kDictionary, 1> phi;
  phi << s.delta, s.v, 1.0;
  const double mu = state.forgetting;
  const Eigen::Matrix<double, kDictionary, 1> Pphi = state.P_cov * phi;
  const Eigen::Matrix<double, kDictionary, 1> k = Pphi / (mu + phi.dot(Pphi));
  state.theta += k * (s.tau_hat.transpose() - phi.transpose() * state.theta);
  Eigen::Matrix<double, kDictionary, kDictionary> P =
      (state.P_cov - k * Pphi.transpose()) / mu;
  state.P_cov = 0.5 * (P + P.transpose());
}

Eigen::MatrixXd estimate_extra_term(const SampleWindow& window,
                                    const RegressorEstimate& est) {
  const Stacks st = build_stacks(window);
  return st.T - est.P * st.Y;
}

}  // namespace dac
