#include "gct/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace gct {

bool is_hermitian(const CMatrix& h, double rel_tol) {
  if (h.rows() != h.cols()) return false;
  return (h - h.adjoint()).norm() <= rel_tol * (1.0 + h.norm());
}

HermEig herm_eig(const CMatrix& h) {
  if (!is_hermitian(h))
    throw std::invalid_argument("herm_eig: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm_part(h));
  if (es.info() != Eigen::Success)
    throw SolverFailure("herm_eig: eigensolver did not converge");
  return HermEig{es.eigenvalues(), es.eigenvectors()};
}

double min_eigenvalue(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm_part(h));
  if (es.info() != Eigen::Success)
    throw SolverFailure("min_eigenvalue: eigensolver did not converge");
  return es.eigenvalues()(0);
}

CMatrix herm_sqrt(const CMatrix& h) {
  HermEig e = herm_eig(h);
  RVector s = e.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return e.eigenvectors * s.asDiagonal() * e.eigenvectors.adjoint();
}

double spectral_radius(const CMatrix& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("spectral_radius: matrix must be square");
  if (a.rows() == 0) return 0.0;
  Eigen::ComplexEigenSolver<CMatrix> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw SolverFailure("spectral_radius: eigensolver did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_schur_stable(const CMatrix& a, double margin) {
  return spectral_radius(a) < 1.0 - margin;
}

CMatrix dlyap(const CMatrix& a, const CMatrix& q) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || q.rows() != n || q.cols() != n)
    throw std::invalid_argument("dlyap: dimension mismatch");
  if (!is_schur_stable(a))
    throw std::invalid_argument("dlyap: A is not Schur stable");
  // Vectorized solve of (I - conj(A) kron A) vec(X) = vec(Q).
  CMatrix k = CMatrix::Identity(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      k.block(i * n, j * n, n, n) -= std::conj(a(i, j)) * a;
  CVector x = k.partialPivLu().solve(
      Eigen::Map<const CVector>(q.data(), n * n));
  return herm_part(Eigen::Map<const CMatrix>(x.data(), n, n));
}

RMatrix realify(const CMatrix& h) {
  const int n = static_cast<int>(h.rows());
  RMatrix m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = h.real();
  m.topRightCorner(n, n) = -h.imag();
  m.bottomLeftCorner(n, n) = h.imag();
  m.bottomRightCorner(n, n) = h.real();
  return m;
}

CMatrix unrealify(const RMatrix& m) {
  const int n2 = static_cast<int>(m.rows());
  if (n2 % 2 != 0 || m.cols() != n2)
    throw std::invalid_argument("unrealify: expected square matrix of even dim");
  const int n = n2 / 2;
  RMatrix re = 0.5 * (m.topLeftCorner(n, n) + m.bottomRightCorner(n, n));
  RMatrix im = 0.5 * (m.bottomLeftCorner(n, n) - m.topRightCorner(n, n));
  return re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>();
}

std::vector<CMatrix> hermitian_basis(int n) {
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<CMatrix> basis;
  basis.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    CMatrix e = CMatrix::Zero(n, n);
    e(i, i) = 1.0;
    basis.push_back(e);
  }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < j; ++i) {
      CMatrix e = CMatrix::Zero(n, n);
      e(i, j) = s;
      e(j, i) = s;
      basis.push_back(e);
      e(i, j) = Complex(0, -s);
      e(j, i) = Complex(0, s);
      basis.push_back(e);
    }
  return basis;
}

RVector hermitian_coords(const CMatrix& h) {
  const int n = static_cast<int>(h.rows());
  const double s = std::sqrt(2.0);
  RVector c(n * n);
  int k = 0;
  for (int i = 0; i < n; ++i) c(k++) = h(i, i).real();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < j; ++i) {
      c(k++) = s * h(i, j).real();
      c(k++) = -s * h(i, j).imag();
    }
  return c;
}

CMatrix hermitian_from_coords(const RVector& c, int n) {
  if (c.size() != n * n)
    throw std::invalid_argument("hermitian_from_coords: wrong length");
  const double s = 1.0 / std::sqrt(2.0);
  CMatrix h = CMatrix::Zero(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) h(i, i) = c(k++);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < j; ++i) {
      double re = c(k++) * s;
      double im = -c(k++) * s;
      h(i, j) = Complex(re, im);
      h(j, i) = Complex(re, -im);
    }
  return h;
}

}  // namespace gct
