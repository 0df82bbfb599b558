#pragma once

#include <deque>
#include <optional>

#include "dac/types.hpp"

namespace dac {

// Regressor dictionary dimension: 4 actuators + 6 twist states + bias.
inline constexpr int kDictionary = 11;

struct FitSample {
  double t = 0.0;
  Vec6 tau_hat = Vec6::Zero();
  Vec4 delta = Vec4::Zero();
  Vec6 v = Vec6::Zero();
};

// Fixed-capacity ring of recent samples for windowed fits.
class SampleWindow {
 public:
  explicit SampleWindow(int capacity) : capacity_(capacity) {
    if (capacity < kDictionary) {
      throw config_error("sample window shorter than the dictionary size");
    }
  }

  void push(const FitSample& s) {
    if (static_cast<int>(buf_.size()) == capacity_) buf_.pop_front();
    buf_.push_back(s);
  }
  bool full() const { return static_cast<int>(buf_.size()) == capacity_; }
  int size() const { return static_cast<int>(buf_.size()); }
  int capacity() const { return capacity_; }
  const std::deque<FitSample>& samples() const { return buf_; }

 private:
  int capacity_;
  std::deque<FitSample> buf_;
};

struct Stacks {
  Eigen::MatrixXd T;  // 6 x m wrench estimates
  Eigen::MatrixXd Y;  // 11 x m columns [delta; v; 1]
};

// Throws config_error with fewer than kDictionary samples.
Stacks build_stacks(const SampleWindow& window);
Stacks build_stacks(const std::deque<FitSample>& samples);

// Batch least-squares estimate P = [B D tau0] of tau ~ P [delta; v; 1].
struct RegressorEstimate {
  Eigen::Matrix<double, 6, kDictionary> P;
  double condition = 0.0;      // of Y Y^T
  double residual_rms = 0.0;
  double ridge_used = 0.0;

  Mat64 B() const { return P.leftCols<4>(); }
  Mat6 D() const { return P.middleCols<6>(4); }
  Vec6 tau0() const { return P.col(kDictionary - 1); }
};

// P = T Y^T (Y Y^T + ridge I)^-1. The ridge is applied only when the
// condition number of Y Y^T passes cond_threshold; past cond_ceiling the fit
// is rejected and nullopt returned. With an anchor the ridge shrinks the
// solution toward it instead of toward zero: the residual system
// T - anchor Y is solved and the correction added back, which leaves the
// ridge-free solution unchanged.
std::optional<RegressorEstimate> koopman_fit(
    const Eigen::MatrixXd& T, const Eigen::MatrixXd& Y, double ridge,
    double cond_threshold = 1e8, double cond_ceiling = 1e12,
    const Eigen::Matrix<double, 6, kDictionary>* anchor = nullptr);

// Ridge magnitude tied to the data scale: scale * trace of the row-equilibrated
// Gram / kDictionary.
double scaled_ridge(const Eigen::MatrixXd& Y, double scale);

// Default ridge magnitude tied to the data scale.
double default_ridge(const Eigen::MatrixXd& Y);

// Exponentially weighted recursive least squares sharing one regressor
// covariance across the six wrench channels.
struct RlsState {
  Eigen::Matrix<double, kDictionary, 6> theta;
  Eigen::Matrix<double, kDictionary, kDictionary> P_cov;
  double forgetting = 1.0;

  static RlsState start(double forgetting, double p0 = 1e9);
  Eigen::Matrix<double, 6, kDictionary> estimate() const {
    return theta.transpose();
  }
};

void rls_update(RlsState& state, const FitSample& s);

// Per-channel reconstruction residual time series tau_hat - P [delta; v; 1].
Eigen::MatrixXd estimate_extra_term(const SampleWindow& window,
                                    const RegressorEstimate& est);

double reconstruction_rms(const Eigen::Matrix<double, 6, kDictionary>& P,
                          const Stacks& stacks);

}  // namespace dac
