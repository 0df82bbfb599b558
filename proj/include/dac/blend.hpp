#pragma once

#include "dac/airframe.hpp"
#include "dac/types.hpp"

namespace dac {

// One side of the decision blend: inertial parameters plus force regressors.
struct ModelSide {
  InertialParams params;
  RegressorSet reg;
};

// Convex combination of the model side and the data side at a given decision
// factor. M, B, D and tau0 are element-wise blends; C and G are rebuilt from
// blended parameters so skew symmetry and the gravity structure survive.
struct BlendedModel {
  Mat6 M = Mat6::Zero();
  InertialParams params;  // blended, used for C and G
  Mat64 B = Mat64::Zero();
  Mat6 D = Mat6::Zero();
  Vec6 tau0 = Vec6::Zero();
  Vec6 tauR = Vec6::Zero();
  double lambda_used = 0.0;
  bool lambda_clamped = false;
  double g = kGravity;

  Mat6 C(const GeneralizedVelocity& v) const {
    return coriolis_matrix(v, params);
  }
  Vec6 G(const Pose& pose) const {
    return gravity_wrench(pose.euler, params, g);
  }
};

// Builds the blend at lambda in [0, 1]. If the blended mass matrix is not
// positive definite, lambda is stepped toward the model side until it is and
// lambda_clamped is set. lambda outside [0, 1] throws config_error.
BlendedModel blend(const ModelSide& model, const ModelSide& data,
                   double lambda, double g = kGravity);

}  // namespace dac
