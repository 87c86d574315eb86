#include "gct/sdp.hpp"

#include "doctest.h"
#include "test_support.hpp"

using namespace gct;
using namespace gct::sdp;

namespace {

// The worst-gain program for the scalar uncontrollable pair A=1/2, B=0,
// C=D=1: maximize <[[1,1],[1,1]], V> over V >= 0 with X-block stationarity
// and unit input energy. Optimum 1 at V = [[0,0],[0,1]].
Program uncontrollable_gain_program() {
  Program prog(Sense::Maximize);
  int v = prog.add_psd_block(2);
  LinExpr obj = prog.expr();
  obj.block_coeff[v] = CMatrix::Ones(2, 2);
  prog.set_objective(obj);

  LinExpr stat = prog.expr();
  CMatrix g(2, 2);
  g << -0.75, 0, 0, 0;
  stat.block_coeff[v] = g;
  prog.add_equality(stat, 0.0);

  LinExpr tr = prog.expr();
  CMatrix w = CMatrix::Zero(2, 2);
  w(1, 1) = 1.0;
  tr.block_coeff[v] = w;
  prog.add_equality(tr, 1.0);
  return prog;
}

}  // namespace

TEST_CASE("forced trace value") {
  Program prog(Sense::Maximize);
  int v = prog.add_psd_block(2);
  LinExpr obj = prog.expr();
  obj.block_coeff[v] = CMatrix::Identity(2, 2);
  prog.set_objective(obj);
  prog.add_equality(obj, 1.0);

  Solution s = solve(prog);
  CHECK(s.status == Status::Optimal);
  CHECK(s.primal_objective == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(min_eigenvalue(s.block_value[0]) >=
        -tol::solver * (1 + s.block_value[0].norm()));
}

TEST_CASE("scalar lower bound via inequality slack") {
  Program prog(Sense::Minimize);
  int l = prog.add_free_vars(1);
  LinExpr obj = prog.expr();
  obj.free_coeff(l) = 1.0;
  prog.set_objective(obj);
  LinExpr le = prog.expr();
  le.free_coeff(l) = -1.0;
  prog.add_inequality_le(le, -3.0);  // -lambda <= -3

  Solution s = solve(prog);
  CHECK(s.status == Status::Optimal);
  CHECK(s.primal_objective == doctest::Approx(3.0).epsilon(1e-5));
  CHECK(s.free_value(0) == doctest::Approx(3.0).epsilon(1e-5));
}

TEST_CASE("uncontrollable worst-gain instance attains 1 with pinned optimum") {
  Solution s = solve(uncontrollable_gain_program());
  // The dual optimum of this instance is not attained, so the gap cannot
  // certify optimality; the polished primal must still be exact and the
  // solver must point at the growing multipliers.
  CHECK(s.primal_objective == doctest::Approx(1.0).epsilon(1e-6));
  CMatrix expect = CMatrix::Zero(2, 2);
  expect(1, 1) = 1.0;
  CHECK((s.block_value[0] - expect).norm() <= 1e-6);
  CHECK(s.primal_residual <= 1e-5);
  CHECK(s.dual_unattainment_hint);
  // weak duality for a maximize problem
  CHECK(s.primal_objective <= s.dual_objective + 1e-6);
}

TEST_CASE("solver is deterministic") {
  Solution a = solve(uncontrollable_gain_program());
  Solution b = solve(uncontrollable_gain_program());
  CHECK(a.iterations == b.iterations);
  CHECK(a.primal_objective == b.primal_objective);
  CHECK((a.block_value[0] - b.block_value[0]).norm() == 0.0);
  CHECK((a.eq_dual - b.eq_dual).norm() == 0.0);
}

TEST_CASE("random equality-constrained SDP: duality and slackness") {
  testing::Rng rng(42);
  Program prog(Sense::Maximize);
  int v = prog.add_psd_block(3);
  LinExpr obj = prog.expr();
  obj.block_coeff[v] = rng.hermitian(3);
  prog.set_objective(obj);
  LinExpr tr = prog.expr();
  tr.block_coeff[v] = CMatrix::Identity(3, 3);
  prog.add_equality(tr, 1.0);
  LinExpr other = prog.expr();
  other.block_coeff[v] = rng.hermitian(3) * 0.2;
  prog.add_equality(other, 0.1);

  Solution s = solve(prog);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.primal_objective <= s.dual_objective + 1e-4);
  // complementary slackness |<V, S>| small
  double cs = std::abs(
      (s.block_value[0].adjoint() * s.dual_slack[0]).trace().real());
  double scale = 1 + s.block_value[0].norm() * s.dual_slack[0].norm();
  CHECK(cs <= 10 * tol::solver * scale);
  // dual slack is PSD up to tolerance
  CHECK(min_eigenvalue(s.dual_slack[0]) >= -1e-5);
}

TEST_CASE("feasibility: PSD with negative trace is infeasible with certificate") {
  Program prog(Sense::Minimize);
  int v = prog.add_psd_block(2);
  LinExpr tr = prog.expr();
  tr.block_coeff[v] = CMatrix::Identity(2, 2);
  prog.add_equality(tr, -1.0);
  prog.set_objective(prog.expr());

  FeasResult r = check_feasibility(prog, 0.0);
  CHECK(r.status == FeasStatus::Infeasible);
  // certificate: -A'y PSD on the block, b'y = 1
  REQUIRE(r.farkas_Z.size() >= 1);
  CHECK(min_eigenvalue(r.farkas_Z[0]) >= -1e-5);
  CHECK(r.farkas_Z[0].norm() > 1e-8);
}

TEST_CASE("feasibility: PSD with unit trace is feasible") {
  Program prog(Sense::Minimize);
  int v = prog.add_psd_block(2);
  LinExpr tr = prog.expr();
  tr.block_coeff[v] = CMatrix::Identity(2, 2);
  prog.add_equality(tr, 1.0);
  prog.set_objective(prog.expr());

  FeasResult r = check_feasibility(prog, 0.0);
  CHECK(r.status == FeasStatus::Feasible);
  CHECK(r.block_value[0].trace().real() == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(min_eigenvalue(r.block_value[0]) >= -1e-6);
}

TEST_CASE("unbounded objective is detected") {
  Program prog(Sense::Maximize);
  int v = prog.add_psd_block(2);
  LinExpr obj = prog.expr();
  obj.block_coeff[v] = CMatrix::Identity(2, 2);
  prog.set_objective(obj);

  Solution s = solve(prog);
  CHECK(s.status == Status::UnboundedDetected);
}

TEST_CASE("malformed programs are rejected") {
  Program prog(Sense::Minimize);
  CHECK_THROWS_AS(prog.add_psd_block(0), std::invalid_argument);
  int v = prog.add_psd_block(2);
  LinExpr e = prog.expr();
  e.block_coeff[v] = CMatrix::Identity(3, 3);
  CHECK_THROWS_AS(prog.add_equality(e, 0.0), std::invalid_argument);
  Program empty(Sense::Minimize);
  empty.set_objective(empty.expr());
  CHECK_THROWS_AS(solve(empty), std::invalid_argument);
}
