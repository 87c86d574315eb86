#include "gct/oracles.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gct {

Trajectory simulate(const StateSpace& sys, const Signal& w, int extra_settle) {
  if (w.channels() != sys.m())
    throw std::invalid_argument("simulate: channel count does not match m");
  if (extra_settle < 0)
    throw std::invalid_argument("simulate: negative settle length");
  const int k_end = w.support() + extra_settle;
  Trajectory traj;
  traj.sys = sys;
  traj.inputs = w;
  traj.states = CMatrix::Zero(sys.n(), k_end + 1);
  traj.outputs = CMatrix::Zero(sys.p(), k_end);
  for (int k = 0; k < k_end; ++k) {
    CVector wk = w.at(k);
    traj.states.col(k + 1) = sys.A * traj.states.col(k) + sys.B * wk;
    traj.outputs.col(k) = sys.C * traj.states.col(k) + sys.D * wk;
  }
  return traj;
}

namespace {

double sum_sq_power_norms(const CMatrix& a) {
  // sum_k |A^k|_2^2; finite for rho(A) < 1
  const int n = static_cast<int>(a.rows());
  CMatrix p = CMatrix::Identity(n, n);
  double acc = 0.0;
  for (int k = 0; k < (1 << 22); ++k) {
    double nrm = p.operatorNorm();
    acc += nrm * nrm;
    if (nrm * nrm < 1e-16 * (1.0 + acc) && k > n) return acc;
    p = a * p;
  }
  throw SolverFailure("sum_sq_power_norms: powers of A decay too slowly");
}

}  // namespace

CMatrix gramian_of(const Trajectory& traj, double tail_tol) {
  const StateSpace& sys = traj.sys;
  const int n = sys.n();
  const int m = sys.m();
  if (!sys.stable())
    throw SolverFailure("gramian_of: A is not Schur stable, gramian diverges");
  const double c1 = sum_sq_power_norms(sys.A);

  CMatrix v = CMatrix::Zero(n + m, n + m);
  CVector xw(n + m);
  CVector x = CVector::Zero(n);
  const int K = traj.horizon();
  const int cap = 1 << 24;
  for (int k = 0;; ++k) {
    if (k <= K)
      x = traj.states.col(k);
    else
      x = sys.A * x;
    if (k >= traj.inputs.support() && x.squaredNorm() * c1 < tail_tol) break;
    if (k >= cap) {
      std::ostringstream msg;
      msg << "gramian_of: horizon cap hit; tail estimate "
          << x.squaredNorm() * c1 << " with rho(A) = " << spectral_radius(sys.A);
      throw SolverFailure(msg.str());
    }
    xw.head(n) = x;
    xw.tail(m) = traj.inputs.at(k);
    v += xw * xw.adjoint();
  }
  return herm_part(v);
}

CMatrix resolvent_input_map(const StateSpace& sys, double theta) {
  const int n = sys.n();
  CMatrix shift =
      std::polar(1.0, theta) * CMatrix::Identity(n, n) - sys.A;
  return shift.partialPivLu().solve(sys.B);
}

FreqGridResult freq_grid_hinf(const StateSpace& sys, int grid_points) {
  if (grid_points < 2)
    throw std::invalid_argument("freq_grid_hinf: need at least two points");
  FreqGridResult out;
  out.conditioning_warning = spectral_radius(sys.A) > 1.0 - 1e-6;
  const double step = 2.0 * std::numbers::pi / grid_points;
  for (int j = 0; j < grid_points; ++j) {
    const double theta = j * step;
    CMatrix g = sys.n() > 0 ? CMatrix(sys.C * resolvent_input_map(sys, theta) +
                                      sys.D)
                            : sys.D;
    double smax = g.jacobiSvd().singularValues()(0);
    if (smax * smax > out.lower) {
      out.lower = smax * smax;
      out.argmax_theta = theta;
    }
  }
  return out;
}

}  // namespace gct
