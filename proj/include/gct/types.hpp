#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace gct {

using Complex = std::complex<double>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using CMatrix = MatrixX<Complex>;
using CVector = VectorX<Complex>;
using RMatrix = MatrixX<double>;
using RVector = VectorX<double>;

/// Raised when an iterative kernel fails to converge or breaks down.
class SolverFailure : public std::runtime_error {
 public:
  explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

// Shared default tolerances. Solver-level tolerances are parameters of the
// respective routines; these are the library-wide defaults.
namespace tol {
inline constexpr double hermitian = 1e-10;  // relative Hermitian symmetry slack
inline constexpr double eig = 1e-10;        // eigendecomposition reconstruction
inline constexpr double lyap = 1e-9;        // relative Lyapunov residual
inline constexpr double rank = 1e-9;        // eigenvalue cut for numerical rank
inline constexpr double phase_merge = 1e-8; // radians; merge indistinct phases
inline constexpr double ctrb = 1e-9;        // controllability min-eig threshold
inline constexpr double solver = 1e-6;      // conic solver residual target
inline constexpr double gap = 1e-5;         // primal/dual agreement
inline constexpr double nonzero_cert = 1e-7;// "nonzero" acceptance in searches
inline constexpr double tail = 1e-12;       // gramian accumulation tail
inline constexpr double w_exact = 1e-10;    // input-block exactness in synthesis
}  // namespace tol

}  // namespace gct
