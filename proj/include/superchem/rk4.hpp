#pragma once

namespace superchem {

/// One classical fixed-step RK4 stage.  State needs operator+ and
/// operator*(double); the derivative functor is called four times.
template <class State, class Deriv>
State rk4_step(const State& y, double dt, Deriv&& f) {
  const State k1 = f(y);
  const State k2 = f(y + k1 * (0.5 * dt));
  const State k3 = f(y + k2 * (0.5 * dt));
  const State k4 = f(y + k3 * dt);
  return y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
}

}  // namespace superchem
