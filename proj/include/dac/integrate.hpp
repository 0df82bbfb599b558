#pragma once

namespace dac {

// Classic fixed-step RK4. Works for any vector type with +, scalar *.
template <class Vec, class Rhs>
Vec rk4_step(Rhs&& f, double t, const Vec& x, double dt) {
  const Vec k1 = f(t, x);
  const Vec k2 = f(t + 0.5 * dt, Vec(x + 0.5 * dt * k1));
  const Vec k3 = f(t + 0.5 * dt, Vec(x + 0.5 * dt * k2));
  const Vec k4 = f(t + dt, Vec(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace dac
