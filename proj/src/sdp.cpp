#include "gct/sdp.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace gct::sdp {

namespace {

constexpr double kTiny = 1e-300;

int svec_len(int s) { return s * (s + 1) / 2; }

void svec_into(const RMatrix& m, double* out) {
  const int s = static_cast<int>(m.rows());
  const double r2 = std::sqrt(2.0);
  int k = 0;
  for (int j = 0; j < s; ++j) {
    out[k++] = m(j, j);
    for (int i = j + 1; i < s; ++i) out[k++] = r2 * m(i, j);
  }
}

RMatrix unsvec(const double* v, int s) {
  const double r2 = 1.0 / std::sqrt(2.0);
  RMatrix m(s, s);
  int k = 0;
  for (int j = 0; j < s; ++j) {
    m(j, j) = v[k++];
    for (int i = j + 1; i < s; ++i) {
      m(i, j) = v[k] * r2;
      m(j, i) = v[k] * r2;
      ++k;
    }
  }
  return m;
}

struct CBlock {
  BlockKind kind;
  int cdim;    // declared dimension
  int sdim;    // working symmetric dimension (2*cdim for complex blocks)
  int offset;  // start within the coordinate vector
  int len;     // svec length
};

struct Compiled {
  std::vector<CBlock> blocks;
  int cone_len = 0;
  int nfree = 0;
  int N = 0;
  int M = 0;
  RMatrix A;          // row-normalized
  RVector b;
  RVector row_scale;
  RVector c;          // internal minimize objective
  double obj_sign = 1.0;
  int n_eq = 0;
  int n_ineq = 0;
};

// Coefficient representation of a Hermitian functional: svec(realify(G))/2
// for complex blocks so that <flat(G), svec(realify(V))> = Re tr(G* V).
void pack_coeff(const CBlock& blk, const CMatrix& g, double* out) {
  if (g.size() == 0) {
    std::fill(out, out + blk.len, 0.0);
    return;
  }
  if (g.rows() != blk.cdim || g.cols() != blk.cdim)
    throw std::invalid_argument("sdp: coefficient dimension mismatch");
  if (blk.kind == BlockKind::ComplexHermitian) {
    RMatrix r = 0.5 * realify(herm_part(g));
    svec_into(r, out);
  } else {
    if (g.imag().norm() > 1e-12 * (1.0 + g.norm()))
      throw std::invalid_argument("sdp: real block coefficient has imaginary part");
    RMatrix r = 0.5 * (g.real() + g.real().transpose());
    svec_into(r, out);
  }
}

RVector flatten(const Compiled& cp, const LinExpr& e, int slack_coord = -1) {
  RVector row = RVector::Zero(cp.N);
  const int nblocks_user = static_cast<int>(e.block_coeff.size());
  for (int b = 0; b < nblocks_user; ++b)
    pack_coeff(cp.blocks[b], e.block_coeff[b], row.data() + cp.blocks[b].offset);
  if (e.free_coeff.size() > 0)
    row.segment(cp.cone_len, cp.nfree) = e.free_coeff;
  if (slack_coord >= 0) row(slack_coord) = 1.0;
  return row;
}

Compiled compile(const Program& prog) {
  Compiled cp;
  cp.obj_sign = prog.sense() == Sense::Maximize ? -1.0 : 1.0;
  cp.n_eq = prog.num_equalities();
  cp.n_ineq = prog.num_inequalities();
  int off = 0;
  for (int b = 0; b < prog.num_blocks(); ++b) {
    CBlock blk;
    blk.kind = prog.block_kind(b);
    blk.cdim = prog.block_dim(b);
    blk.sdim = blk.kind == BlockKind::ComplexHermitian ? 2 * blk.cdim : blk.cdim;
    blk.offset = off;
    blk.len = svec_len(blk.sdim);
    off += blk.len;
    cp.blocks.push_back(blk);
  }
  // one nonnegative slack per inequality
  std::vector<int> slack_coord(cp.n_ineq);
  for (int i = 0; i < cp.n_ineq; ++i) {
    CBlock blk{BlockKind::RealSymmetric, 1, 1, off, 1};
    slack_coord[i] = off;
    off += 1;
    cp.blocks.push_back(blk);
  }
  cp.cone_len = off;
  cp.nfree = prog.num_free();
  cp.N = cp.cone_len + cp.nfree;
  cp.M = cp.n_eq + cp.n_ineq;
  if (cp.N == 0) throw std::invalid_argument("sdp: program has no variables");

  cp.A.resize(cp.M, cp.N);
  cp.b.resize(cp.M);
  cp.row_scale.resize(cp.M);
  for (int k = 0; k < cp.n_eq; ++k) {
    const auto& [e, rhs] = prog.equality(k);
    cp.A.row(k) = flatten(cp, e).transpose();
    cp.b(k) = rhs;
  }
  for (int i = 0; i < cp.n_ineq; ++i) {
    const auto& [e, rhs] = prog.inequality(i);
    cp.A.row(cp.n_eq + i) = flatten(cp, e, slack_coord[i]).transpose();
    cp.b(cp.n_eq + i) = rhs;
  }
  for (int k = 0; k < cp.M; ++k) {
    if (!cp.b.allFinite() || !cp.A.row(k).allFinite())
      throw std::invalid_argument("sdp: non-finite constraint data");
    double s = cp.A.row(k).norm();
    cp.row_scale(k) = s > kTiny ? s : 1.0;
    cp.A.row(k) /= cp.row_scale(k);
    cp.b(k) /= cp.row_scale(k);
  }
  cp.c = cp.obj_sign * flatten(cp, prog.objective());
  return cp;
}

// Projection of the coordinate vector onto the cone (PSD blocks; frees pass).
void project_cone(const Compiled& cp, RVector& v) {
  for (const auto& blk : cp.blocks) {
    double* seg = v.data() + blk.offset;
    if (blk.sdim == 1) {
      seg[0] = std::max(0.0, seg[0]);
      continue;
    }
    if (blk.kind == BlockKind::ComplexHermitian) {
      CMatrix h = unrealify(unsvec(seg, blk.sdim));
      Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
      RVector lam = es.eigenvalues().cwiseMax(0.0);
      CMatrix proj =
          es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
      svec_into(realify(proj), seg);
    } else {
      RMatrix h = unsvec(seg, blk.sdim);
      Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
      RVector lam = es.eigenvalues().cwiseMax(0.0);
      RMatrix proj =
          es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
      svec_into(proj, seg);
    }
  }
}

// Distance of the block part of v from the cone (frees ignored).
double cone_distance(const Compiled& cp, const RVector& v) {
  RVector w = v;
  project_cone(cp, w);
  return (w.head(cp.cone_len) - v.head(cp.cone_len)).norm();
}

CMatrix extract_block(const Compiled& cp, const RVector& v, int b,
                      bool coefficient_rep) {
  const CBlock& blk = cp.blocks[b];
  RMatrix m = unsvec(v.data() + blk.offset, blk.sdim);
  if (blk.kind == BlockKind::ComplexHermitian) {
    // coefficient representation carries a 1/2 on complex blocks
    if (coefficient_rep) m *= 2.0;
    return unrealify(m);
  }
  return m.cast<Complex>();
}

struct Workspace {
  RVector x, z, u, zprev;
  Eigen::CompleteOrthogonalDecomposition<RMatrix> cod;
  RMatrix pinv;  // N x M
  bool has_rows = false;
};

RVector affine_project(const Workspace& ws, const Compiled& cp,
                       const RVector& w) {
  if (!ws.has_rows) return w;
  return w - ws.pinv * (cp.A * w - cp.b);
}

struct Residuals {
  double primal = 0, dual = 0, gap = 0;
  double pobj = 0, dobj = 0;
  RVector y;      // least-squares multipliers (internal sense, normalized rows)
  RVector s;      // dual slack candidate
};

Residuals compute_residuals(const Workspace& ws, const Compiled& cp,
                            double rho) {
  Residuals r;
  r.s = -rho * ws.u;
  if (ws.has_rows)
    r.y = ws.pinv.transpose() * (cp.c - r.s);
  else
    r.y = RVector::Zero(0);
  RVector stat = cp.c - r.s;
  if (ws.has_rows) stat -= cp.A.transpose() * r.y;
  // c - A'y = s with s PSD on blocks and zero on free coordinates
  double s_cone = cone_distance(cp, r.s);
  double s_free = r.s.tail(cp.nfree).norm();
  double aff = ws.has_rows ? (cp.A * ws.z - cp.b).norm() : 0.0;
  double split = (ws.x - ws.z).norm();
  double scale_x = std::max(ws.x.norm(), ws.z.norm());
  r.primal = std::max(aff / (1.0 + cp.b.norm()), split / (1.0 + scale_x));
  r.dual = (stat.norm() + s_cone + s_free) / (1.0 + cp.c.norm());
  r.pobj = cp.c.dot(ws.z);
  r.dobj = ws.has_rows ? cp.b.dot(r.y) : 0.0;
  r.gap = std::abs(r.pobj - r.dobj) /
          (1.0 + std::abs(r.pobj) + std::abs(r.dobj));
  return r;
}

// Rank-face Gauss-Newton polish: factor each block on its detected face,
// V_b = F_b F_b*, and drive the affine residual to zero with Levenberg-
// Marquardt over (F, free vars). Quadratic near a well-identified face;
// rejected (returns false) whenever it does not strictly improve.
bool try_polish(const Compiled& cp, RVector& z) {
  if (cp.M == 0) return false;
  struct Face {
    CMatrix fc;  // complex factor (cdim x r)
    RMatrix fr;  // real factor (sdim x r)
    int r = 0;
    int voff = 0;  // offset into the GN variable vector
  };
  const int nblocks = static_cast<int>(cp.blocks.size());
  std::vector<Face> faces(nblocks);
  int q = 0;
  for (int b = 0; b < nblocks; ++b) {
    const CBlock& blk = cp.blocks[b];
    Face& f = faces[b];
    f.voff = q;
    if (blk.kind == BlockKind::ComplexHermitian) {
      CMatrix h = unrealify(unsvec(z.data() + blk.offset, blk.sdim));
      Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
      double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
      double cut = std::max(1e-9, 1e-3 * lmax);
      for (int i = 0; i < blk.cdim; ++i)
        if (es.eigenvalues()(i) > cut) ++f.r;
      f.fc = es.eigenvectors().rightCols(f.r) *
             es.eigenvalues().tail(f.r).cwiseMax(0.0).cwiseSqrt().asDiagonal();
      q += 2 * blk.cdim * f.r;
    } else {
      RMatrix h = unsvec(z.data() + blk.offset, blk.sdim);
      Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
      double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
      double cut = std::max(1e-9, 1e-3 * lmax);
      for (int i = 0; i < blk.sdim; ++i)
        if (es.eigenvalues()(i) > cut) ++f.r;
      f.fr = es.eigenvectors().rightCols(f.r) *
             es.eigenvalues().tail(f.r).cwiseMax(0.0).cwiseSqrt().asDiagonal();
      q += blk.sdim * f.r;
    }
  }
  const int nv = q + cp.nfree;
  if (nv == 0) return false;

  // Hermitian row coefficients per (row, block), extracted once.
  std::vector<std::vector<CMatrix>> gc(cp.M, std::vector<CMatrix>(nblocks));
  std::vector<std::vector<RMatrix>> gr(cp.M, std::vector<RMatrix>(nblocks));
  for (int k = 0; k < cp.M; ++k) {
    RVector rowk = cp.A.row(k);  // materialize: rows are strided views
    for (int b = 0; b < nblocks; ++b) {
      const CBlock& blk = cp.blocks[b];
      if (blk.kind == BlockKind::ComplexHermitian)
        gc[k][b] = unrealify(2.0 * unsvec(rowk.data() + blk.offset, blk.sdim));
      else
        gr[k][b] = unsvec(rowk.data() + blk.offset, blk.sdim);
    }
  }

  RVector frees = z.tail(cp.nfree);
  auto residual = [&](const std::vector<Face>& fs, const RVector& fr) {
    RVector r(cp.M);
    for (int k = 0; k < cp.M; ++k) {
      double v = cp.A.row(k).tail(cp.nfree).dot(fr) - cp.b(k);
      for (int b = 0; b < nblocks; ++b) {
        const Face& f = fs[b];
        if (f.r == 0) continue;
        if (cp.blocks[b].kind == BlockKind::ComplexHermitian)
          v += (f.fc.adjoint() * gc[k][b] * f.fc).trace().real();
        else
          v += (f.fr.transpose() * gr[k][b] * f.fr).trace();
      }
      r(k) = v;
    }
    return r;
  };

  RVector res = residual(faces, frees);
  const double res0 = res.norm();
  const double target = 1e-13 * (1.0 + cp.b.norm());
  double lm = 1e-10;
  auto fs = faces;
  RVector fr = frees;
  for (int it = 0; it < 60 && res.norm() > target; ++it) {
    RMatrix jac(cp.M, nv);
    for (int k = 0; k < cp.M; ++k) {
      for (int b = 0; b < nblocks; ++b) {
        const Face& f = fs[b];
        if (f.r == 0) continue;
        const CBlock& blk = cp.blocks[b];
        if (blk.kind == BlockKind::ComplexHermitian) {
          CMatrix gf = 2.0 * gc[k][b] * f.fc;  // d x r
          const int nre = blk.cdim * f.r;
          for (int j = 0; j < f.r; ++j)
            for (int i = 0; i < blk.cdim; ++i) {
              int idx = j * blk.cdim + i;
              jac(k, f.voff + idx) = gf(i, j).real();
              jac(k, f.voff + nre + idx) = gf(i, j).imag();
            }
        } else {
          RMatrix gf = 2.0 * gr[k][b] * f.fr;
          for (int j = 0; j < f.r; ++j)
            for (int i = 0; i < blk.sdim; ++i)
              jac(k, f.voff + j * blk.sdim + i) = gf(i, j);
        }
      }
      jac.row(k).tail(cp.nfree) = cp.A.row(k).tail(cp.nfree);
    }
    auto apply_step = [&](const RVector& dv, std::vector<Face>& ft,
                          RVector& frt) {
      ft = fs;
      frt = fr + dv.tail(cp.nfree);
      for (int b = 0; b < nblocks; ++b) {
        Face& f = ft[b];
        if (f.r == 0) continue;
        const CBlock& blk = cp.blocks[b];
        if (blk.kind == BlockKind::ComplexHermitian) {
          const int nre = blk.cdim * f.r;
          for (int j = 0; j < f.r; ++j)
            for (int i = 0; i < blk.cdim; ++i) {
              int idx = j * blk.cdim + i;
              f.fc(i, j) += Complex(dv(f.voff + idx), dv(f.voff + nre + idx));
            }
        } else {
          for (int j = 0; j < f.r; ++j)
            for (int i = 0; i < blk.sdim; ++i)
              f.fr(i, j) += dv(f.voff + j * blk.sdim + i);
        }
      }
    };

    bool stepped = false;
    {
      // plain Gauss-Newton minimum-norm step
      Eigen::CompleteOrthogonalDecomposition<RMatrix> jcod(jac);
      RVector dv = jcod.solve(-res);
      std::vector<Face> ft;
      RVector frt;
      apply_step(dv, ft, frt);
      RVector rest = residual(ft, frt);
      if (rest.norm() < res.norm()) {
        fs = std::move(ft);
        fr = std::move(frt);
        res = std::move(rest);
        stepped = true;
      }
    }
    if (!stepped) {
      RMatrix h = jac.transpose() * jac;
      RVector g = jac.transpose() * res;
      double dmean = std::max(h.diagonal().mean(), 1e-14);
      lm = std::max(lm, 1e-4 * dmean);
      for (int inner = 0; inner < 12; ++inner) {
        RMatrix hl = h;
        hl.diagonal().array() += lm;
        RVector dv = hl.ldlt().solve(-g);
        std::vector<Face> ft;
        RVector frt;
        apply_step(dv, ft, frt);
        RVector rest = residual(ft, frt);
        if (rest.norm() < res.norm()) {
          fs = std::move(ft);
          fr = std::move(frt);
          res = std::move(rest);
          lm = std::max(lm / 3.0, 1e-4 * dmean);
          stepped = true;
          break;
        }
        lm *= 10.0;
      }
    }
    if (!stepped) break;
  }
  if (res.norm() >= res0) return false;

  RVector zc = z;
  for (int b = 0; b < nblocks; ++b) {
    const CBlock& blk = cp.blocks[b];
    const Face& f = fs[b];
    if (blk.kind == BlockKind::ComplexHermitian) {
      CMatrix v = f.r > 0 ? CMatrix(f.fc * f.fc.adjoint())
                          : CMatrix(CMatrix::Zero(blk.cdim, blk.cdim));
      svec_into(realify(v), zc.data() + blk.offset);
    } else {
      RMatrix v = f.r > 0 ? RMatrix(f.fr * f.fr.transpose())
                          : RMatrix(RMatrix::Zero(blk.sdim, blk.sdim));
      svec_into(v, zc.data() + blk.offset);
    }
  }
  zc.tail(cp.nfree) = fr;
  z = zc;
  return true;
}

}  // namespace

int Program::add_psd_block(int dim) {
  if (dim <= 0) throw std::invalid_argument("sdp: block dim must be positive");
  blocks_.push_back(Block{BlockKind::ComplexHermitian, dim});
  return static_cast<int>(blocks_.size()) - 1;
}

int Program::add_real_psd_block(int dim) {
  if (dim <= 0) throw std::invalid_argument("sdp: block dim must be positive");
  blocks_.push_back(Block{BlockKind::RealSymmetric, dim});
  return static_cast<int>(blocks_.size()) - 1;
}

int Program::add_free_vars(int count) {
  if (count < 0) throw std::invalid_argument("sdp: negative free var count");
  int first = num_free_;
  num_free_ += count;
  return first;
}

LinExpr Program::expr() const {
  LinExpr e;
  e.block_coeff.resize(blocks_.size());
  e.free_coeff = RVector::Zero(num_free_);
  return e;
}

void Program::validate_expr(const LinExpr& e) const {
  if (e.block_coeff.size() != blocks_.size())
    throw std::invalid_argument("sdp: expression block count mismatch");
  for (size_t b = 0; b < blocks_.size(); ++b) {
    const CMatrix& g = e.block_coeff[b];
    if (g.size() != 0 &&
        (g.rows() != blocks_[b].dim || g.cols() != blocks_[b].dim))
      throw std::invalid_argument("sdp: expression coefficient dim mismatch");
  }
  if (e.free_coeff.size() != num_free_)
    throw std::invalid_argument("sdp: expression free-var count mismatch");
}

void Program::set_objective(const LinExpr& e) {
  validate_expr(e);
  objective_ = e;
}

void Program::add_equality(const LinExpr& e, double rhs) {
  validate_expr(e);
  if (!std::isfinite(rhs)) throw std::invalid_argument("sdp: non-finite rhs");
  equalities_.emplace_back(e, rhs);
}

void Program::add_inequality_le(const LinExpr& e, double rhs) {
  validate_expr(e);
  if (!std::isfinite(rhs)) throw std::invalid_argument("sdp: non-finite rhs");
  inequalities_.emplace_back(e, rhs);
}

Solution solve(const Program& prog, const Params& params) {
  Compiled cp = compile(prog);

  Workspace ws;
  ws.x = RVector::Zero(cp.N);
  ws.z = RVector::Zero(cp.N);
  ws.u = RVector::Zero(cp.N);
  ws.has_rows = cp.M > 0;
  if (ws.has_rows) {
    ws.cod.compute(cp.A);
    ws.pinv = ws.cod.pseudoInverse();
  }

  double rho = params.rho;
  Solution sol;
  sol.note = "";
  Residuals res;
  bool have_res = false;

  RVector y_prev_sample;
  RVector z_prev_sample = ws.z;
  bool have_sample = false;
  int last_iter = 0;
  const double cert_tol = std::max(1e-9, 0.01 * params.tol);
  // residual balancing with exponential backoff: the u-rescaling transient
  // disturbs late convergence if repeated at a fixed cadence
  int balance_interval = params.balance_every;
  int next_balance = params.balance_every;

  for (int it = 1; it <= params.max_iter; ++it) {
    last_iter = it;
    RVector w = ws.z - ws.u - cp.c / rho;
    ws.x = affine_project(ws, cp, w);
    RVector xh = params.alpha * ws.x + (1.0 - params.alpha) * ws.z;
    ws.zprev = ws.z;
    ws.z = xh + ws.u;
    project_cone(cp, ws.z);
    ws.u += xh - ws.z;

    if (!ws.z.allFinite() || !ws.u.allFinite()) {
      sol.note = "numerical breakdown (non-finite iterates)";
      break;
    }

    const double rp = (ws.x - ws.z).norm();
    const double rd = rho * (ws.z - ws.zprev).norm();

    if (it % params.check_every == 0 || it == params.max_iter) {
      res = compute_residuals(ws, cp, rho);
      have_res = true;
      if (res.primal <= params.tol && res.dual <= params.tol &&
          res.gap <= params.tol) {
        sol.status = Status::Optimal;
        sol.iterations = it;
        break;
      }
    }

    if (it % params.sample_every == 0) {
      if (!have_res) {
        res = compute_residuals(ws, cp, rho);
        have_res = true;
      }
      // primal infeasibility candidate from the drift of the multipliers
      if (have_sample && ws.has_rows) {
        RVector dy = res.y - y_prev_sample;
        for (double sgn : {1.0, -1.0}) {
          RVector yh = sgn * dy;
          double t = cp.b.dot(yh);
          if (t > 1e-12) {
            yh /= t;
            RVector v = -(cp.A.transpose() * yh);
            double dist = cone_distance(cp, v) + v.tail(cp.nfree).norm();
            double rel = dist / (1.0 + v.norm());
            if (rel <= cert_tol) {
              sol.status = Status::InfeasibleDetected;
              sol.iterations = it;
              sol.certificate_residual = rel;
              sol.eq_dual = RVector(yh.head(cp.n_eq));
              sol.ineq_dual = RVector(yh.tail(cp.n_ineq));
              for (int k = 0; k < cp.M; ++k) {
                double& ref = k < cp.n_eq ? sol.eq_dual(k)
                                          : sol.ineq_dual(k - cp.n_eq);
                ref /= cp.row_scale(k);
              }
              int nb = prog.num_blocks();
              sol.dual_slack.reserve(nb);
              for (int b = 0; b < nb; ++b)
                sol.dual_slack.push_back(extract_block(cp, v, b, true));
              sol.note = "primal infeasibility certificate from iterate drift";
              return sol;
            }
          }
        }
      }
      // unbounded-direction candidate from the drift of the cone iterate
      if (have_sample) {
        RVector dz = ws.z - z_prev_sample;
        RVector q = dz;
        if (ws.has_rows) q -= ws.pinv * (cp.A * dz);
        double g = cp.c.dot(q);
        if (g < -1e-12) {
          q /= -g;
          double dist = cone_distance(cp, q);
          double rel = dist / (1.0 + q.norm());
          if (rel <= cert_tol) {
            sol.status = Status::UnboundedDetected;
            sol.iterations = it;
            sol.certificate_residual = rel;
            int nb = prog.num_blocks();
            for (int b = 0; b < nb; ++b)
              sol.block_value.push_back(extract_block(cp, q, b, false));
            sol.free_value = q.tail(cp.nfree);
            sol.note = "improving ray certificate from iterate drift";
            return sol;
          }
        }
      }
      y_prev_sample = res.y;
      z_prev_sample = ws.z;
      have_sample = true;

      if (params.observer) {
        RVector zfree = ws.z.tail(cp.nfree);
        double pobj_user = cp.obj_sign * cp.c.dot(ws.z);
        IterateSample smp{it, pobj_user, zfree};
        if (!params.observer(smp)) {
          sol.note = "halted by observer";
          sol.iterations = it;
          break;
        }
      }
    }

    if (it >= next_balance) {
      if (rp > params.balance_ratio * rd && rho < 1e8) {
        rho *= 2.0;
        ws.u *= 0.5;
      } else if (rd > params.balance_ratio * rp && rho > 1e-6) {
        rho *= 0.5;
        ws.u *= 2.0;
      }
      balance_interval *= 2;
      next_balance = it + balance_interval;
    }
    have_res = false;
  }

  if (sol.status != Status::Optimal && sol.iterations == 0)
    sol.iterations = last_iter;
  if (!have_res) res = compute_residuals(ws, cp, rho);

  if (params.polish && ws.has_rows) {
    RVector zp = ws.z;
    if (try_polish(cp, zp)) {
      Workspace w2 = ws;
      w2.z = zp;
      w2.x = affine_project(w2, cp, zp);
      Residuals r2 = compute_residuals(w2, cp, rho);
      // accept on a clear feasibility win; the objective is expected to move
      // toward the optimum as the iterate lands on the face, so only wild
      // jumps are rejected
      bool feas_better =
          r2.primal <= 0.5 * res.primal || r2.primal <= 0.01 * params.tol;
      bool sane =
          std::abs(r2.pobj - res.pobj) <= 0.1 * (1.0 + std::abs(res.pobj));
      if (feas_better && sane) {
        ws = std::move(w2);
        res = r2;
      }
    }
  }
  if (sol.status != Status::Optimal && res.primal <= params.tol &&
      res.dual <= params.tol && res.gap <= params.tol)
    sol.status = Status::Optimal;
  sol.dual_unattainment_hint =
      res.primal <= 10 * params.tol && res.gap > 10 * params.tol &&
      res.y.size() > 0 &&
      res.y.norm() > 10.0 * (1.0 + cp.b.norm() + cp.c.norm());
  if (sol.dual_unattainment_hint && sol.note.empty())
    sol.note = "primal settled while multipliers grow; dual may be unattained";

  sol.primal_residual = res.primal;
  sol.dual_residual = res.dual;
  sol.gap_residual = res.gap;
  sol.primal_objective = cp.obj_sign * res.pobj;
  sol.dual_objective = cp.obj_sign * res.dobj;
  const int nb = prog.num_blocks();
  sol.block_value.clear();
  for (int b = 0; b < nb; ++b)
    sol.block_value.push_back(extract_block(cp, ws.z, b, false));
  sol.free_value = ws.z.tail(cp.nfree);
  sol.eq_dual = RVector::Zero(cp.n_eq);
  sol.ineq_dual = RVector::Zero(cp.n_ineq);
  for (int k = 0; k < cp.M; ++k) {
    double yk = res.y.size() > 0 ? res.y(k) / cp.row_scale(k) : 0.0;
    yk *= cp.obj_sign;
    if (k < cp.n_eq)
      sol.eq_dual(k) = yk;
    else
      sol.ineq_dual(k - cp.n_eq) = yk;
  }
  sol.dual_slack.clear();
  for (int b = 0; b < nb; ++b)
    sol.dual_slack.push_back(extract_block(cp, res.s, b, true));
  return sol;
}

FeasResult check_feasibility(const Program& prog, double strictness_margin,
                             const Params& params) {
  Compiled cp = compile(prog);
  FeasResult out;

  // Phase A: search for a (margin-shifted) feasible point.
  {
    Program shifted = prog;  // same structure; shift enters via rhs
    Params p = params;
    if (strictness_margin != 0.0) {
      // x = x~ + margin*I on every PSD block: adjust all rhs accordingly.
      RVector shift = RVector::Zero(cp.N);
      for (const auto& blk : cp.blocks) {
        RMatrix id = RMatrix::Identity(blk.sdim, blk.sdim);
        svec_into(id * strictness_margin, shift.data() + blk.offset);
      }
      RVector db = cp.A * shift;  // normalized rows
      Program sh(prog.sense());
      for (int b = 0; b < prog.num_blocks(); ++b) {
        if (prog.block_kind(b) == BlockKind::ComplexHermitian)
          sh.add_psd_block(prog.block_dim(b));
        else
          sh.add_real_psd_block(prog.block_dim(b));
      }
      sh.add_free_vars(prog.num_free());
      for (int k = 0; k < prog.num_equalities(); ++k) {
        auto [e, rhs] = prog.equality(k);
        sh.add_equality(e, rhs - db(k) * cp.row_scale(k));
      }
      for (int i = 0; i < prog.num_inequalities(); ++i) {
        auto [e, rhs] = prog.inequality(i);
        int k = prog.num_equalities() + i;
        sh.add_inequality_le(e, rhs - db(k) * cp.row_scale(k));
      }
      shifted = std::move(sh);
    }
    Solution s = solve(shifted, p);
    if (s.status == Status::Optimal) {
      out.status = FeasStatus::Feasible;
      out.block_value = s.block_value;
      for (int b = 0; b < prog.num_blocks(); ++b)
        out.block_value[b] += strictness_margin *
                              CMatrix::Identity(prog.block_dim(b),
                                                prog.block_dim(b));
      out.free_value = s.free_value;
      out.residual = std::max(s.primal_residual, s.dual_residual);
      return out;
    }
    if (s.status == Status::InfeasibleDetected) {
      out.status = FeasStatus::Infeasible;
      out.farkas_y = RVector(cp.M);
      out.farkas_y.head(cp.n_eq) = s.eq_dual;
      out.farkas_y.tail(cp.n_ineq) = s.ineq_dual;
      out.farkas_Z = s.dual_slack;
      out.residual = s.certificate_residual;
      out.note = "certificate from in-loop detection";
      return out;
    }
  }

  // Phase B: explicit alternative system  s + A'y = 0 on cone coordinates,
  // (A'y) = 0 on free coordinates, b'y = 1, s in the cone.
  {
    RVector b_sh = cp.b;
    if (strictness_margin != 0.0) {
      RVector shift = RVector::Zero(cp.N);
      for (const auto& blk : cp.blocks) {
        RMatrix id = RMatrix::Identity(blk.sdim, blk.sdim);
        svec_into(id * strictness_margin, shift.data() + blk.offset);
      }
      b_sh -= cp.A * shift;
    }
    Program alt(Sense::Minimize);
    std::vector<int> mirror(cp.blocks.size());
    for (size_t b = 0; b < cp.blocks.size(); ++b)
      mirror[b] = cp.blocks[b].kind == BlockKind::ComplexHermitian
                      ? alt.add_psd_block(cp.blocks[b].cdim)
                      : alt.add_real_psd_block(cp.blocks[b].cdim);
    int y0 = alt.add_free_vars(cp.M);
    (void)y0;
    // cone-coordinate rows: use the coefficient representation directly.
    // For block entry (i,j) of block b, constraint: S_b(i,j) + (A'y)(i,j) = 0.
    // Expressed against the Hermitian basis of the block.
    for (size_t b = 0; b < cp.blocks.size(); ++b) {
      const CBlock& blk = cp.blocks[b];
      if (blk.kind == BlockKind::ComplexHermitian) {
        auto basis = hermitian_basis(blk.cdim);
        for (const auto& e : basis) {
          LinExpr ex = alt.expr();
          ex.block_coeff[mirror[b]] = e;
          RVector pack(blk.len);
          pack_coeff(blk, e, pack.data());
          for (int k = 0; k < cp.M; ++k)
            ex.free_coeff(k) =
                2.0 * cp.A.row(k).segment(blk.offset, blk.len).dot(pack);
          alt.add_equality(ex, 0.0);
        }
      } else {
        // real symmetric basis via svec coordinates
        for (int coord = 0; coord < blk.len; ++coord) {
          RVector unit = RVector::Zero(blk.len);
          unit(coord) = 1.0;
          RMatrix e = unsvec(unit.data(), blk.sdim);
          LinExpr ex = alt.expr();
          ex.block_coeff[mirror[b]] = e.cast<Complex>();
          for (int k = 0; k < cp.M; ++k)
            ex.free_coeff(k) = cp.A(k, blk.offset + coord);
          alt.add_equality(ex, 0.0);
        }
      }
    }
    for (int j = 0; j < cp.nfree; ++j) {
      LinExpr ex = alt.expr();
      for (int k = 0; k < cp.M; ++k) ex.free_coeff(k) = cp.A(k, cp.cone_len + j);
      alt.add_equality(ex, 0.0);
    }
    LinExpr norm = alt.expr();
    for (int k = 0; k < cp.M; ++k) norm.free_coeff(k) = b_sh(k);
    alt.add_equality(norm, 1.0);
    alt.set_objective(alt.expr());

    Solution s = solve(alt, params);
    if (s.status == Status::Optimal) {
      out.status = FeasStatus::Infeasible;
      out.farkas_y = RVector(cp.M);
      for (int k = 0; k < cp.M; ++k)
        out.farkas_y(k) = s.free_value(k) / cp.row_scale(k);
      out.farkas_Z.assign(s.block_value.begin(),
                          s.block_value.begin() + prog.num_blocks());
      out.residual = std::max(s.primal_residual, s.dual_residual);
      out.note = "certificate from alternative-system search";
      return out;
    }
    out.status = FeasStatus::Undecided;
    out.residual = std::max(s.primal_residual, s.dual_residual);
    out.note = "both feasibility searches hit the iteration cap";
  }
  return out;
}

}  // namespace gct::sdp
