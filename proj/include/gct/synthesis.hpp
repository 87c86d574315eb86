#pragma once

#include <utility>
#include <vector>

#include "gct/gramian.hpp"

namespace gct {

struct ErrorBoundConstants {
  double C = 0.0;   // sum_k (2 |A^k|_2 + |A^k|_2^2)
  double C1 = 0.0;  // sum_k |A^k|_2^2
};

/// Partial sums of the power-norm series, tail-bounded to relative 1e-12.
ErrorBoundConstants error_bound_constants(const StateSpace& sys);

/// Windowed sinusoid w_k = sqrt(weight/N) e^{j theta k} w_s for k < N.
/// Realizes the component's input block exactly; the full gramian error
/// decays like 1/N.
Signal synth_rank_one(const RankOneComponent& comp, const StateSpace& sys,
                      int window);

/// Analytic error ceiling C3/N for the windowed realization.
double rank_one_error_bound(const RankOneComponent& comp,
                            const StateSpace& sys, int window,
                            const ErrorBoundConstants& consts);

/// Smallest power-of-two window whose measured gramian error is below
/// target_err. Throws SolverFailure past 2^24 (slow state decay).
int choose_window(const RankOneComponent& comp, const StateSpace& sys,
                  double target_err);

struct SynthesisReport {
  double achieved_error = 0.0;  // |gramian(Mw, w) - V|_F, measured
  double w_residual = 0.0;      // |sum_k w_k w_k* - W|_F, exact sum
  std::vector<int> windows;     // per component, weight order
  std::vector<int> gaps;        // settling zeros before components 2..r
  int support = 0;
};

struct SynthOptions {
  double membership_tol = 1e-6;  // scaled by 1 + |V|_F
  int max_budget_halvings = 20;
};

/// Finite-support signal whose gramian approximates a cone element within
/// eps, with the input block reproduced exactly: rank-one pieces realized by
/// windowed sinusoids, concatenated with measured settling gaps.
std::pair<Signal, SynthesisReport> synth(const GramianMatrix& v,
                                         const StateSpace& sys, double eps,
                                         const SynthOptions& opts = {});

}  // namespace gct
