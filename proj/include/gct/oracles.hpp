#pragma once

#include "gct/state_space.hpp"

namespace gct {

/// Time-domain rollout of x+ = A x + B w from x0 = 0, z = C x + D w.
struct Trajectory {
  StateSpace sys;
  Signal inputs;
  CMatrix states;   // n x (K+1); column k is x_k, column 0 is zero
  CMatrix outputs;  // p x K

  int horizon() const { return static_cast<int>(outputs.cols()); }
};

/// Simulates through the input support plus extra_settle further steps.
Trajectory simulate(const StateSpace& sys, const Signal& w, int extra_settle = 0);

/// Block gramian sum_k [x_k; w_k][x_k; w_k]* of a finite-support rollout.
/// The horizon is extended until the appended-tail estimate
/// |x_end|^2 * sum_k |A^k|^2 drops below tail_tol. Throws SolverFailure with a
/// decay diagnostic if the cap is hit first.
CMatrix gramian_of(const Trajectory& traj, double tail_tol = tol::tail);

struct FreqGridResult {
  double lower = 0.0;         // max over the grid of sigma_max(G)^2
  double argmax_theta = 0.0;  // in [0, 2*pi)
  bool conditioning_warning = false;
};

/// Frequency response lower bound for the squared worst-case gain, from a
/// uniform grid over the unit circle: G(theta) = C (e^{j theta} I - A)^{-1} B + D.
FreqGridResult freq_grid_hinf(const StateSpace& sys, int grid_points);

/// Resolvent evaluation (e^{j theta} I - A)^{-1} B by direct solve.
CMatrix resolvent_input_map(const StateSpace& sys, double theta);

}  // namespace gct
