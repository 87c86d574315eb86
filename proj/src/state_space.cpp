#include "gct/state_space.hpp"

namespace gct {

StateSpace::StateSpace(CMatrix a, CMatrix b, CMatrix c, CMatrix d,
                       bool allow_unstable)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
  const int n_ = static_cast<int>(A.rows());
  const int m_ = static_cast<int>(B.cols());
  const int p_ = static_cast<int>(C.rows());
  if (A.cols() != n_ || B.rows() != n_ || C.cols() != n_ || D.rows() != p_ ||
      D.cols() != m_)
    throw std::invalid_argument("StateSpace: inconsistent dimensions");
  if (!allow_unstable && !is_schur_stable(A))
    throw std::invalid_argument("StateSpace: A is not Schur stable");
}

CMatrix StateSpace::AB() const {
  CMatrix ab(n(), n() + m());
  ab << A, B;
  return ab;
}

CMatrix StateSpace::CD0I() const {
  CMatrix g = CMatrix::Zero(p() + m(), n() + m());
  g.topLeftCorner(p(), n()) = C;
  g.topRightCorner(p(), m()) = D;
  g.bottomRightCorner(m(), m()) = CMatrix::Identity(m(), m());
  return g;
}

CMatrix StateSpace::output_weight() const {
  CMatrix cd(p(), n() + m());
  cd << C, D;
  return cd.adjoint() * cd;
}

}  // namespace gct
