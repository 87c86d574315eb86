#include "gct/gramian.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gct/rng.hpp"

namespace gct {

GramianMatrix::GramianMatrix(int n_, int m_, CMatrix v)
    : n(n_), m(m_), V(std::move(v)) {
  if (n < 0 || m < 0 || V.rows() != n + m || V.cols() != n + m)
    throw std::invalid_argument("GramianMatrix: partition does not match size");
  if (!is_hermitian(V, 1e-8))
    throw std::invalid_argument("GramianMatrix: matrix is not Hermitian");
  V = herm_part(V);
}

MembershipResult membership_residual(const GramianMatrix& v,
                                     const StateSpace& sys) {
  if (v.n != sys.n() || v.m != sys.m())
    throw std::invalid_argument("membership_residual: partition mismatch");
  CMatrix ab = sys.AB();
  MembershipResult r;
  r.subspace_residual = (ab * v.V * ab.adjoint() - v.X()).norm();
  r.min_eig = min_eigenvalue(v.V);
  return r;
}

bool is_controllable(const StateSpace& sys) {
  CMatrix wc = dlyap(sys.A, sys.B * sys.B.adjoint());
  double tr = wc.real().trace();
  if (tr <= 0.0) return false;
  return min_eigenvalue(wc) > tol::ctrb * tr / sys.n();
}

CVector RankOneComponent::stacked() const {
  CVector v(x_s.size() + w_s.size());
  v << x_s, w_s;
  return v;
}

std::vector<RankOneComponent> rank_one_decompose(const GramianMatrix& v,
                                                 const StateSpace& sys,
                                                 double membership_tol) {
  MembershipResult mem = membership_residual(v, sys);
  const double scale = 1.0 + v.V.norm();
  if (!in_cone(mem, membership_tol * scale)) {
    std::ostringstream msg;
    msg << "rank_one_decompose: matrix is not in the cone (subspace residual "
        << mem.subspace_residual << ", min eigenvalue " << mem.min_eig << ")";
    throw std::invalid_argument(msg.str());
  }

  HermEig eig = herm_eig(v.V);
  const double lmax = eig.eigenvalues.size() > 0
                          ? std::max(eig.eigenvalues.maxCoeff(), 0.0)
                          : 0.0;
  const double cut = tol::rank * lmax;
  int rank = 0;
  for (int i = 0; i < eig.eigenvalues.size(); ++i)
    if (eig.eigenvalues(i) > cut && eig.eigenvalues(i) > 0) ++rank;
  if (rank == 0) return {};

  CMatrix t = eig.eigenvectors.rightCols(rank) *
              eig.eigenvalues.tail(rank).cwiseSqrt().asDiagonal();
  CMatrix f = sys.AB() * t;                          // n x r
  CMatrix g = t.topRows(sys.n());                    // n x r
  // F F* = G G* on the cone, so F = G U for a unitary U; the polar factor of
  // G* F realizes one such U, with the null directions completed unitarily.
  Eigen::JacobiSVD<CMatrix> svd(g.adjoint() * f,
                                Eigen::ComputeFullU | Eigen::ComputeFullV);
  CMatrix u = svd.matrixU() * svd.matrixV().adjoint();

  // U is unitary hence normal: its Schur form is diagonal and the Schur basis
  // is an orthonormal eigenbasis, which keeps the re-summation exact.
  Eigen::ComplexSchur<CMatrix> schur(u);
  const CMatrix& q = schur.matrixU();

  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<RankOneComponent> comps;
  comps.reserve(rank);
  for (int i = 0; i < rank; ++i) {
    CVector vi = t * q.col(i);
    double w = vi.squaredNorm();
    if (w <= lmax * 1e-15) continue;
    RankOneComponent c;
    double theta = std::arg(schur.matrixT()(i, i));
    if (theta < 0) theta += two_pi;
    c.theta = theta;
    c.weight = w;
    vi /= std::sqrt(w);
    c.x_s = vi.head(sys.n());
    c.w_s = vi.tail(sys.m());
    comps.push_back(std::move(c));
  }

  // merge numerically indistinct phases onto a common value
  std::vector<int> order(comps.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return comps[a].theta < comps[b].theta;
  });
  size_t start = 0;
  while (start < order.size()) {
    size_t end = start + 1;
    while (end < order.size() && comps[order[end]].theta -
                                     comps[order[end - 1]].theta <
                                 tol::phase_merge)
      ++end;
    if (end - start > 1) {
      double mean = 0.0;
      for (size_t i = start; i < end; ++i) mean += comps[order[i]].theta;
      mean /= static_cast<double>(end - start);
      for (size_t i = start; i < end; ++i) comps[order[i]].theta = mean;
    }
    start = end;
  }
  if (order.size() > 1) {
    // wrap-around: phases just below 2*pi join a cluster at 0
    double lo = comps[order.front()].theta;
    if (lo + (two_pi - comps[order.back()].theta) < tol::phase_merge)
      for (int idx : order)
        if (two_pi - comps[idx].theta < tol::phase_merge)
          comps[idx].theta = lo;
  }

  std::stable_sort(comps.begin(), comps.end(),
                   [](const RankOneComponent& a, const RankOneComponent& b) {
                     return a.weight > b.weight;
                   });
  return comps;
}

GramianMatrix exact_signal_gramian(const StateSpace& sys, const Signal& w) {
  Trajectory traj = simulate(sys, w, 0);
  const int n = sys.n();
  const int m = sys.m();
  const int L = w.support();
  CMatrix v = CMatrix::Zero(n + m, n + m);
  CVector xw(n + m);
  for (int k = 0; k < L; ++k) {
    xw.head(n) = traj.states.col(k);
    xw.tail(m) = w.samples.col(k);
    v += xw * xw.adjoint();
  }
  CVector xT = traj.states.col(L);
  v.topLeftCorner(n, n) += dlyap(sys.A, xT * xT.adjoint());
  return GramianMatrix(n, m, herm_part(v));
}

GramianMatrix random_cone_element(const StateSpace& sys, uint64_t seed) {
  if (!is_controllable(sys))
    throw std::invalid_argument("random_cone_element: (A, B) not controllable");
  Rng rng(seed);
  const int n = sys.n();
  const int m = sys.m();
  CMatrix wc = dlyap(sys.A, sys.B * sys.B.adjoint());
  CMatrix v = CMatrix::Zero(n + m, n + m);
  double alpha = 0.2 + std::abs(rng.normal());
  v.topLeftCorner(n, n) = alpha * wc;
  v.bottomRightCorner(m, m) = alpha * CMatrix::Identity(m, m);
  for (int s = 0; s < 2; ++s) {
    Signal w(m, 2 * n + 2);
    w.samples = rng.cmatrix(m, 2 * n + 2) / std::sqrt(2.0 * (2 * n + 2) * m);
    v += exact_signal_gramian(sys, w).V;
  }
  double tr = v.real().trace();
  return GramianMatrix(n, m, v / tr);
}

GramianMatrix snap_to_cone(const StateSpace& sys, const CMatrix& v,
                           bool normalize_trace) {
  const int n = sys.n();
  const int m = sys.m();
  if (v.rows() != n + m || v.cols() != n + m)
    throw std::invalid_argument("snap_to_cone: size mismatch");
  CMatrix w = herm_part(v.bottomRightCorner(m, m));
  {
    HermEig e = herm_eig(w);
    w = e.eigenvectors * e.eigenvalues.cwiseMax(0.0).asDiagonal() *
        e.eigenvectors.adjoint();
  }
  double tr = w.real().trace();
  if (normalize_trace) {
    if (tr <= 1e-14)
      throw SolverFailure("snap_to_cone: input block has vanishing trace");
    w /= tr;
  }
  CMatrix r = v.topRightCorner(n, m);
  if (normalize_trace && tr > 1e-14) r /= tr;

  CMatrix lw = dlyap(sys.A, sys.B * w * sys.B.adjoint());
  CMatrix lr = dlyap(sys.A, sys.B * r.adjoint() * sys.A.adjoint() +
                                sys.A * r * sys.B.adjoint());
  auto assemble = [&](double t) {
    CMatrix out(n + m, n + m);
    out.topLeftCorner(n, n) = t * lr + lw;
    out.topRightCorner(n, m) = t * r;
    out.bottomLeftCorner(m, n) = t * r.adjoint();
    out.bottomRightCorner(m, m) = w;
    return herm_part(out);
  };
  auto psd_ok = [&](const CMatrix& cand) {
    return min_eigenvalue(cand) >= -1e-12 * (1.0 + cand.norm());
  };
  CMatrix cand = assemble(1.0);
  if (!psd_ok(cand)) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 70; ++it) {
      double mid = 0.5 * (lo + hi);
      if (psd_ok(assemble(mid)))
        lo = mid;
      else
        hi = mid;
    }
    cand = assemble(lo);
  }
  return GramianMatrix(n, m, cand);
}

}  // namespace gct
