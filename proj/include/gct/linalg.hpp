#pragma once

#include <utility>
#include <vector>

#include "gct/types.hpp"

namespace gct {

/// Hermitian part (H + H*)/2 of a square expression.
template <typename Derived>
CMatrix herm_part(const Eigen::MatrixBase<Derived>& m) {
  CMatrix h = m.template cast<Complex>();
  return 0.5 * (h + h.adjoint());
}

template <typename DerivedA, typename DerivedB>
double frobenius_distance(const Eigen::MatrixBase<DerivedA>& x,
                          const Eigen::MatrixBase<DerivedB>& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw std::invalid_argument("frobenius_distance: shape mismatch");
  return (x.template cast<Complex>() - y.template cast<Complex>()).norm();
}

bool is_hermitian(const CMatrix& h, double rel_tol = tol::hermitian);

struct HermEig {
  RVector eigenvalues;   // ascending
  CMatrix eigenvectors;  // unitary, columns match eigenvalues
};

/// Eigendecomposition of a Hermitian matrix. Throws std::invalid_argument on
/// non-Hermitian input, SolverFailure if the backend does not converge.
HermEig herm_eig(const CMatrix& h);

double min_eigenvalue(const CMatrix& h);

/// Hermitian PSD square root (negative eigenvalues clipped at zero).
CMatrix herm_sqrt(const CMatrix& h);

double spectral_radius(const CMatrix& a);

bool is_schur_stable(const CMatrix& a, double margin = 0.0);

/// Solves A X A* - X + Q = 0 for Hermitian Q and rho(A) < 1.
CMatrix dlyap(const CMatrix& a, const CMatrix& q);

/// Real symmetric embedding [Re(H) -Im(H); Im(H) Re(H)] of a Hermitian matrix.
RMatrix realify(const CMatrix& h);

/// Inverse of realify; averages the redundant copies.
CMatrix unrealify(const RMatrix& m);

/// Orthonormal basis of the n x n Hermitian matrices under Re<X,Y> = Re tr(X*Y).
std::vector<CMatrix> hermitian_basis(int n);

/// Real coordinates of H in hermitian_basis(n) order (length n^2).
RVector hermitian_coords(const CMatrix& h);
CMatrix hermitian_from_coords(const RVector& c, int n);

}  // namespace gct
