#include "dac/blend.hpp"

namespace dac {

namespace {

InertialParams blend_params(const InertialParams& a, const InertialParams& b,
                            double lambda) {
  const Vec10 p = (1.0 - lambda) * a.flatten() + lambda * b.flatten();
  return InertialParams::unflatten(p);
}

BlendedModel assemble(const ModelSide& model, const ModelSide& data,
                      double lambda, double g) {
  BlendedModel out;
  out.g = g;
  out.lambda_used = lambda;
  // Exact endpoints bypass the arithmetic so the pure sides are bit-identical.
  if (lambda == 0.0) {
    out.M = mass_matrix(model.params);
    out.params = model.params;
    out.B = model.reg.B;
    out.D = model.reg.D;
    out.tau0 = model.reg.tau0;
  } else if (lambda == 1.0) {
    out.M = mass_matrix(data.params);
    out.params = data.params;
    out.B = data.reg.B;
    out.D = data.reg.D;
    out.tau0 = data.reg.tau0;
  } else {
    out.M = (1.0 - lambda) * mass_matrix(model.params) +
            lambda * mass_matrix(data.params);
    out.params = blend_params(model.params, data.params, lambda);
    out.B = (1.0 - lambda) * model.reg.B + lambda * data.reg.B;
    out.D = (1.0 - lambda) * model.reg.D + lambda * data.reg.D;
    out.tau0 = (1.0 - lambda) * model.reg.tau0 + lambda * data.reg.tau0;
  }
  out.tauR = model.reg.tauR;
  return out;
}

bool positive_definite(const Mat6& M) {
  return Eigen::LLT<Mat6>(M).info() == Eigen::Success &&
         Eigen::LLT<Mat3>(Mat3(M.bottomRightCorner<3, 3>())).info() ==
             Eigen::Success;
}

}  // namespace

BlendedModel blend(const ModelSide& model, const ModelSide& data,
                   double lambda, double g) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw config_error("decision factor outside [0, 1]");
  }
  double lam = lambda;
  bool clamped = false;
  for (int i = 0; i < 32; ++i) {
    BlendedModel out = assemble(model, data, lam, g);
    if (positive_definite(out.M) && out.params.m > 0.0) {
      out.lambda_clamped = clamped;
      return out;
    }
    clamped = true;
    lam = std::max(0.0, lam - 0.05);
    if (lam == 0.0) {
      BlendedModel base = assemble(model, data, 0.0, g);
      base.lambda_clamped = true;
      return base;
    }
  }
  throw numeric_error("could not recover a positive definite blend");
}

}  // namespace dac
