#pragma once

#include "gct/linalg.hpp"
#include "gct/types.hpp"

namespace gct {

/// Discrete-time complex LTI model x+ = A x + B w, z = C x + D w with x0 = 0.
struct StateSpace {
  CMatrix A, B, C, D;

  StateSpace() = default;
  /// Validates dimensions and (unless allow_unstable) Schur stability of A.
  StateSpace(CMatrix a, CMatrix b, CMatrix c, CMatrix d,
             bool allow_unstable = false);

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int p() const { return static_cast<int>(C.rows()); }

  bool stable() const { return is_schur_stable(A); }

  /// [A B] as one n x (n+m) matrix.
  CMatrix AB() const;
  /// [C D; 0 I] as one (p+m) x (n+m) matrix.
  CMatrix CD0I() const;
  /// [C*C C*D; D*C D*D], the output-energy weight on gramians.
  CMatrix output_weight() const;
};

/// Finite-support vector-valued sequence; column k is the sample at time k.
struct Signal {
  CMatrix samples;  // m x L, zero beyond column L-1

  Signal() = default;
  Signal(int m, int support) : samples(CMatrix::Zero(m, support)) {}
  explicit Signal(CMatrix s) : samples(std::move(s)) {}

  int channels() const { return static_cast<int>(samples.rows()); }
  int support() const { return static_cast<int>(samples.cols()); }
  CVector at(int k) const {
    return k < support() ? CVector(samples.col(k))
                         : CVector(CVector::Zero(channels()));
  }
  double energy() const { return samples.squaredNorm(); }
};

}  // namespace gct
