#include "gct/synthesis.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace gct {

namespace {
constexpr int kWindowCap = 1 << 24;
}

ErrorBoundConstants error_bound_constants(const StateSpace& sys) {
  if (!sys.stable())
    throw std::invalid_argument("error_bound_constants: A not Schur stable");
  const int n = sys.n();
  CMatrix p = CMatrix::Identity(n, n);
  ErrorBoundConstants out;
  for (int k = 0; k < 1000000; ++k) {
    double a = p.operatorNorm();
    out.C += 2.0 * a + a * a;
    out.C1 += a * a;
    // submultiplicativity: the remaining tail is at most a/(1-a) of the
    // whole series, so a <= 1e-12 pins the relative tail
    if (a <= 1e-12) return out;
    p = sys.A * p;
  }
  throw SolverFailure("error_bound_constants: power norms decay too slowly");
}

Signal synth_rank_one(const RankOneComponent& comp, const StateSpace& sys,
                      int window) {
  if (window < 1)
    throw std::invalid_argument("synth_rank_one: window must be positive");
  const int m = sys.m();
  if (comp.w_s.size() != m)
    throw std::invalid_argument("synth_rank_one: channel mismatch");
  Signal w(m, window);
  const double scale = std::sqrt(comp.weight / window);
  for (int k = 0; k < window; ++k)
    w.samples.col(k) = scale * std::polar(1.0, comp.theta * k) * comp.w_s;
  return w;
}

double rank_one_error_bound(const RankOneComponent& comp,
                            const StateSpace& sys, int window,
                            const ErrorBoundConstants& consts) {
  (void)sys;
  const double sw = std::sqrt(comp.weight);
  const double xs = sw * comp.x_s.norm();
  const double ws = sw * comp.w_s.norm();
  return (consts.C1 * xs * xs + consts.C * xs * (xs + ws)) / window;
}

namespace {

double measured_error(const RankOneComponent& comp, const StateSpace& sys,
                      int window, double tail_tol) {
  Signal w = synth_rank_one(comp, sys, window);
  CMatrix target = comp.weight * comp.stacked() * comp.stacked().adjoint();
  CMatrix got = gramian_of(simulate(sys, w), tail_tol).cast<Complex>();
  return (got - target).norm();
}

}  // namespace

int choose_window(const RankOneComponent& comp, const StateSpace& sys,
                  double target_err) {
  if (!(target_err > 0))
    throw std::invalid_argument("choose_window: target must be positive");
  if (comp.weight * comp.stacked().squaredNorm() == 0.0) return 1;
  if (std::isinf(target_err)) return 1;
  const double tail = std::min(tol::tail, 1e-4 * target_err);
  for (int w = 1; w <= kWindowCap; w *= 2)
    if (measured_error(comp, sys, w, tail) < target_err) return w;
  std::ostringstream msg;
  msg << "choose_window: cap " << kWindowCap
      << " exceeded for target " << target_err
      << "; rho(A) = " << spectral_radius(sys.A) << " may be too close to 1";
  throw SolverFailure(msg.str());
}

std::pair<Signal, SynthesisReport> synth(const GramianMatrix& v,
                                         const StateSpace& sys, double eps,
                                         const SynthOptions& opts) {
  if (!(eps > 0)) throw std::invalid_argument("synth: eps must be positive");
  const int n = sys.n();
  const int m = sys.m();
  SynthesisReport report;
  if (v.V.norm() <= 1e-14 * (1.0 + static_cast<double>(v.dim()))) {
    return {Signal(m, 0), report};
  }
  std::vector<RankOneComponent> comps =
      rank_one_decompose(v, sys, opts.membership_tol);
  if (comps.empty()) return {Signal(m, 0), report};
  const int r = static_cast<int>(comps.size());
  const double tail = std::min(tol::tail, 1e-4 * eps);
  const CMatrix s_obs = dlyap(sys.A.adjoint(), CMatrix::Identity(n, n));

  // full-rollout energy of each isolated component window, for the
  // carry-over bound at the junctions
  double budget = eps / (4.0 * r);
  for (int attempt = 0;; ++attempt) {
    report.windows.clear();
    report.gaps.clear();
    std::vector<Signal> segs(r);
    std::vector<double> seg_energy(r);
    for (int i = 0; i < r; ++i) {
      int w = choose_window(comps[i], sys, budget);
      report.windows.push_back(w);
      segs[i] = synth_rank_one(comps[i], sys, w);
      seg_energy[i] = exact_signal_gramian(sys, segs[i]).V.real().trace();
    }
    std::vector<double> suffix_sqrt(r + 1, 0.0);
    for (int i = r - 1; i >= 0; --i)
      suffix_sqrt[i] = suffix_sqrt[i + 1] + std::sqrt(seg_energy[i]);

    std::vector<CVector> cols;
    CVector x_cur = CVector::Zero(n);
    for (int i = 0; i < r; ++i) {
      if (i > 0) {
        // extend the settling gap until both the discarded decay tail of the
        // prefix and its interference with the suffix fit the budget
        int gap = 0;
        CVector y = x_cur;
        const double e_suffix = suffix_sqrt[i] * suffix_sqrt[i];
        while (true) {
          double ytail = std::real((y.adjoint() * s_obs * y)(0, 0));
          double trunc = dlyap(sys.A, y * y.adjoint()).norm();
          double cross = 2.0 * std::sqrt(ytail * e_suffix) + ytail;
          if (trunc <= budget && cross <= budget) break;
          y = sys.A * y;
          ++gap;
          if (gap > kWindowCap)
            throw SolverFailure("synth: settling gap cap exceeded");
        }
        report.gaps.push_back(gap);
        for (int k = 0; k < gap; ++k) {
          cols.push_back(CVector::Zero(m));
        }
        x_cur = y;
      }
      for (int k = 0; k < segs[i].support(); ++k) {
        CVector wk = segs[i].samples.col(k);
        cols.push_back(wk);
        x_cur = sys.A * x_cur + sys.B * wk;
      }
    }

    Signal out(m, static_cast<int>(cols.size()));
    for (size_t k = 0; k < cols.size(); ++k)
      out.samples.col(static_cast<int>(k)) = cols[k];

    CMatrix measured = gramian_of(simulate(sys, out), tail);
    report.achieved_error = (measured - v.V).norm();
    CMatrix w_sum = out.samples * out.samples.adjoint();
    report.w_residual = (w_sum - v.W()).norm();
    report.support = out.support();
    if (report.achieved_error < eps) return {out, report};
    if (attempt >= opts.max_budget_halvings)
      throw SolverFailure("synth: could not reach the requested error");
    budget *= 0.5;
  }
}

}  // namespace gct
