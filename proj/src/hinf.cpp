#include "gct/hinf.hpp"

#include <cmath>

namespace gct {

namespace {

// multipliers of the cone rows, mapped back to the matrix P of the dual LMI
CMatrix dual_p_from_multipliers(const RVector& eq_dual, int n) {
  return -hermitian_from_coords(eq_dual.head(n * n), n);
}

}  // namespace

namespace {

// conditioning: run the programs with the output scaled so the optimum is
// near one (coarse frequency-grid estimate); values and multipliers scale
// back linearly and exactly
double output_scale(const StateSpace& sys) {
  return std::max(freq_grid_hinf(sys, 256).lower, 1e-8);
}

StateSpace normalize_output(const StateSpace& sys, double q) {
  const double s = 1.0 / std::sqrt(q);
  return StateSpace(sys.A, sys.B, s * sys.C, s * sys.D);
}

}  // namespace

HinfResult hinf_primal(const StateSpace& sys, const sdp::Params& params) {
  const int n = sys.n();
  const int m = sys.m();
  const double q = output_scale(sys);
  const StateSpace scaled = normalize_output(sys, q);
  sdp::Program prog(sdp::Sense::Maximize);
  int v = prog.add_psd_block(n + m);
  sdp::LinExpr obj = prog.expr();
  obj.block_coeff[v] = scaled.output_weight();
  prog.set_objective(obj);
  add_cone_constraints(prog, v, scaled);
  add_input_trace_row(prog, v, scaled, 1.0);

  sdp::Solution sol = sdp::solve(prog, params);
  HinfResult out;
  out.controllable = is_controllable(sys);
  out.solver_primal_residual = sol.primal_residual;
  out.conclusive = sol.status == sdp::Status::Optimal ||
                   sol.primal_residual <= 100.0 * params.tol;
  if (!out.conclusive) {
    out.V_opt = GramianMatrix(n, m, herm_part(sol.block_value[0]));
    return out;
  }
  out.V_opt = snap_to_cone(sys, sol.block_value[0], /*normalize_trace=*/true);
  out.mu_inf = real_inner(sys.output_weight(), out.V_opt.V);
  out.dual_lambda = q * sol.eq_dual(n * n);
  out.dual_P = CMatrix(q * dual_p_from_multipliers(sol.eq_dual, n));
  out.dual_P_norm = out.dual_P->norm();
  out.dual_attained = !sol.dual_unattainment_hint;
  out.gap = out.dual_lambda - out.mu_inf;
  return out;
}

HinfDualResult hinf_dual(const StateSpace& sys, const sdp::Params& params) {
  const int n = sys.n();
  const int m = sys.m();
  const int d = n + m;
  const double qscale = output_scale(sys);
  const StateSpace scaled = normalize_output(sys, qscale);
  sdp::Program prog(sdp::Sense::Minimize);
  int s = prog.add_psd_block(d);
  HermVar pvar = add_hermitian_var(prog, n);
  int lam = prog.add_free_vars(1);

  CMatrix q = scaled.output_weight();
  CMatrix t = embed_input(sys, CMatrix::Identity(m, m));
  std::vector<CMatrix> mapped = map_hermitian_basis(
      n, [&](const CMatrix& f) { return kyp_map(sys, f); });
  auto basis_d = hermitian_basis(d);
  for (const CMatrix& e : basis_d) {
    sdp::LinExpr ex = prog.expr();
    ex.block_coeff[s] = e;
    for (int j = 0; j < n * n; ++j)
      ex.free_coeff(pvar.first + j) = real_inner(e, mapped[j]);
    ex.free_coeff(lam) = -real_inner(e, t);
    prog.add_equality(ex, -real_inner(e, q));
  }
  sdp::LinExpr obj = prog.expr();
  obj.free_coeff(lam) = 1.0;
  prog.set_objective(obj);

  // non-attainment watch: lambda settles while |P| keeps growing
  const double p_cap = 1e6 * (1.0 + sys.A.squaredNorm());
  const double p_large = 1e3 * (1.0 + sys.A.squaredNorm());
  struct Snap {
    int iter;
    double lambda;
    double pnorm;
  };
  std::vector<Snap> history;
  bool flagged = false;
  sdp::Params p = params;
  p.observer = [&](const sdp::IterateSample& smp) {
    double lambda = smp.free_values(pvar.dim * pvar.dim);
    double pnorm = smp.free_values.head(pvar.dim * pvar.dim).norm();
    history.push_back({smp.iteration, lambda, pnorm});
    // settled-lambda test over roughly the last 1000 iterations
    size_t lookback = history.size();
    for (size_t i = history.size(); i-- > 0;) {
      if (history.back().iter - history[i].iter >= 1000) {
        lookback = i;
        break;
      }
    }
    if (lookback < history.size() && pnorm > p_cap &&
        std::abs(lambda - history[lookback].lambda) < 1e-8) {
      flagged = true;
      return false;
    }
    return true;
  };
  sdp::Solution sol = sdp::solve(prog, p);

  HinfDualResult out;
  out.status = sol.status;
  out.lambda = qscale * sol.free_value(pvar.dim * pvar.dim);
  out.P = CMatrix(qscale * hermitian_value(pvar, sol.free_value));
  out.P_norm = out.P.norm();
  CMatrix lmi = kyp_map(sys, out.P) + sys.output_weight() - out.lambda * t;
  HermEig eig = herm_eig(lmi);
  out.lmi_residual = eig.eigenvalues(eig.eigenvalues.size() - 1);
  if (flagged) {
    out.attained = false;
    return out;
  }
  if (sol.status == sdp::Status::Optimal && !sol.dual_unattainment_hint) {
    out.attained = true;
    return out;
  }
  // growth-trend fallback: |P| reached a clearly unphysical magnitude and
  // kept growing while lambda had settled
  if (history.size() >= 8) {
    const Snap& early = history[history.size() / 4];
    const Snap& late = history.back();
    double lam_span = 0.0;
    for (size_t i = history.size() / 2; i < history.size(); ++i) {
      lam_span = std::max(lam_span,
                          std::abs(history[i].lambda - late.lambda));
    }
    if (late.pnorm > p_large && late.pnorm > 32.0 * (early.pnorm + 1.0) &&
        lam_span <= 1e-6 * (1.0 + std::abs(late.lambda))) {
      out.attained = false;
      return out;
    }
  }
  out.attained = true;
  return out;
}

HinfResult hinf_analyze(const StateSpace& sys, const sdp::Params& params) {
  HinfResult out = hinf_primal(sys, params);
  HinfDualResult dual = hinf_dual(sys, params);
  out.dual_lambda = dual.lambda;
  out.dual_P = dual.P;
  out.dual_P_norm = dual.P_norm;
  out.dual_attained = dual.attained;
  out.gap = dual.lambda - out.mu_inf;
  return out;
}

namespace {

// alternative search: maximize <Q - diag(0,I), V> over the cone slice tr V = 1
sdp::Solution solve_alternative(const StateSpace& sys, const CMatrix& qt,
                                const sdp::Params& params) {
  const int d = sys.n() + sys.m();
  sdp::Program prog(sdp::Sense::Maximize);
  int v = prog.add_psd_block(d);
  sdp::LinExpr obj = prog.expr();
  obj.block_coeff[v] = qt;
  prog.set_objective(obj);
  add_cone_constraints(prog, v, sys);
  sdp::LinExpr tr = prog.expr();
  tr.block_coeff[v] = CMatrix::Identity(d, d);
  prog.add_equality(tr, 1.0);
  return sdp::solve(prog, params);
}

std::optional<CMatrix> search_strict_multiplier(const StateSpace& sys,
                                                const CMatrix& qt,
                                                double delta,
                                                const sdp::Params& params) {
  const int n = sys.n();
  const int d = n + sys.m();
  sdp::Program prog(sdp::Sense::Minimize);
  int s = prog.add_psd_block(d);
  HermVar pvar = add_hermitian_var(prog, n);
  std::vector<CMatrix> mapped = map_hermitian_basis(
      n, [&](const CMatrix& f) { return kyp_map(sys, f); });
  CMatrix rhs_mat = qt + delta * CMatrix::Identity(d, d);
  for (const CMatrix& e : hermitian_basis(d)) {
    sdp::LinExpr ex = prog.expr();
    ex.block_coeff[s] = e;
    for (int j = 0; j < n * n; ++j)
      ex.free_coeff(pvar.first + j) = real_inner(e, mapped[j]);
    prog.add_equality(ex, -real_inner(e, rhs_mat));
  }
  prog.set_objective(prog.expr());
  sdp::FeasResult feas = sdp::check_feasibility(prog, 0.0, params);
  if (feas.status != sdp::FeasStatus::Feasible) return std::nullopt;
  CMatrix pmat = hermitian_value(pvar, feas.free_value);
  // validate against the exact strict form
  CMatrix lmi = kyp_map(sys, pmat) + qt;
  HermEig eig = herm_eig(lmi);
  if (eig.eigenvalues(eig.eigenvalues.size() - 1) > -0.25 * delta)
    return std::nullopt;
  return pmat;
}

}  // namespace

KypResult kyp_strict(const StateSpace& sys, const sdp::Params& params) {
  const int m = sys.m();
  CMatrix qt = sys.output_weight() -
               embed_input(sys, CMatrix::Identity(m, m));
  KypResult out;
  sdp::Solution cert = solve_alternative(sys, qt, params);
  if (cert.status != sdp::Status::Optimal &&
      cert.primal_residual > 100.0 * params.tol)
    return out;  // inconclusive

  GramianMatrix vr = snap_to_cone(sys, cert.block_value[0], false);
  double trv = vr.V.real().trace();
  double g = trv > 1e-12 ? real_inner(qt, vr.V) / trv : -1.0;
  out.cert_value = g;
  const double band = 1e-5 * (1.0 + qt.norm());
  if (g > band) {
    out.status = KypStatus::Fails;
    out.V_cert = GramianMatrix(sys.n(), m, vr.V / trv);
    return out;
  }
  if (g < -band) {
    const double delta = 1e-7 * (1.0 + qt.norm() + sys.A.norm());
    if (auto pmat = search_strict_multiplier(sys, qt, delta, params)) {
      out.status = KypStatus::Holds;
      out.P = *pmat;
    }
    return out;
  }
  return out;  // boundary band: inconclusive
}

KypResult kyp_nonstrict(const StateSpace& sys, const sdp::Params& params) {
  if (!is_controllable(sys))
    throw std::invalid_argument(
        "kyp_nonstrict: requires a controllable pair (A, B)");
  const int m = sys.m();
  CMatrix qt = sys.output_weight() -
               embed_input(sys, CMatrix::Identity(m, m));
  KypResult out;
  HinfResult primal = hinf_primal(sys, params);
  if (!primal.conclusive) return out;
  const double band = 1e-5 * (1.0 + primal.mu_inf);
  out.cert_value = primal.mu_inf - 1.0;
  if (primal.mu_inf > 1.0 + band) {
    out.status = KypStatus::Fails;
    out.V_cert = primal.V_opt;
    return out;
  }
  HinfDualResult dual = hinf_dual(sys, params);
  if (dual.status == sdp::Status::Optimal && dual.attained) {
    CMatrix lmi = kyp_map(sys, dual.P) + qt;
    HermEig eig = herm_eig(lmi);
    double top = eig.eigenvalues(eig.eigenvalues.size() - 1);
    if (top <= 100.0 * params.tol * (1.0 + qt.norm())) {
      out.status = KypStatus::Holds;
      out.P = dual.P;
      return out;
    }
  }
  return out;
}

}  // namespace gct
