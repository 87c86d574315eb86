#pragma once

#include <cstdint>
#include <vector>

#include "gct/oracles.hpp"
#include "gct/state_space.hpp"

namespace gct {

/// Hermitian PSD block matrix V = [X R; R* W] partitioned by state and input
/// dimensions of an owning system.
struct GramianMatrix {
  int n = 0, m = 0;
  CMatrix V;

  GramianMatrix() = default;
  GramianMatrix(int n_, int m_, CMatrix v);

  int dim() const { return n + m; }
  CMatrix X() const { return V.topLeftCorner(n, n); }
  CMatrix R() const { return V.topRightCorner(n, m); }
  CMatrix W() const { return V.bottomRightCorner(m, m); }
};

struct MembershipResult {
  double subspace_residual = 0.0;  // |[A B] V [A B]* - X|_F
  double min_eig = 0.0;            // smallest eigenvalue of V
};

MembershipResult membership_residual(const GramianMatrix& v,
                                     const StateSpace& sys);

inline bool in_cone(const MembershipResult& r, double tol) {
  return r.subspace_residual <= tol && r.min_eig >= -tol;
}

/// Controllability via positive definiteness of dlyap(A, B B*).
bool is_controllable(const StateSpace& sys);

/// One rank-one element of the cone: weight * vv* with v = [x_s; w_s],
/// |v| = 1 and e^{j theta} x_s = A x_s + B w_s.
struct RankOneComponent {
  CVector x_s;
  CVector w_s;
  double theta = 0.0;   // in [0, 2*pi)
  double weight = 0.0;  // descending across a decomposition
  CVector stacked() const;
};

/// Splits a cone element into at most rank(V) rank-one cone elements whose
/// weighted sum reproduces V. Throws std::invalid_argument when the
/// membership residual exceeds membership_tol (scaled by 1 + |V|_F).
std::vector<RankOneComponent> rank_one_decompose(
    const GramianMatrix& v, const StateSpace& sys,
    double membership_tol = 1e-6);

/// Deterministic cone element: a mix of exact gramians of random finite
/// signals and the controllability-gramian block diagonal, trace-normalized.
/// Requires (A, B) controllable.
GramianMatrix random_cone_element(const StateSpace& sys, uint64_t seed);

/// Exact gramian of a finite-support signal: finite sums plus the closed-form
/// decay tail of the state block.
GramianMatrix exact_signal_gramian(const StateSpace& sys, const Signal& w);

/// Structured refinement onto the cone: recomputes the state block from
/// (R, W) through the stationarity equation and shrinks R until PSD. The
/// result satisfies the subspace equation to solver precision. When
/// normalize_trace is set, W is rescaled to unit trace first.
GramianMatrix snap_to_cone(const StateSpace& sys, const CMatrix& v,
                           bool normalize_trace);

}  // namespace gct
