#include "gct/gramian.hpp"

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gct/oracles.hpp"
#include "test_support.hpp"

using namespace gct;

namespace {

StateSpace scalar_lag(double a, double b) {
  CMatrix A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << a;
  B << b;
  C << 1.0;
  D << 0.0;
  return StateSpace(A, B, C, D);
}

// 1/(1-a) stacked with 1: rank-one element of the cone at zero frequency
GramianMatrix geometric_element(double a) {
  CVector v(2);
  v << 1.0 / (1.0 - a), 1.0;
  return GramianMatrix(1, 1, v * v.adjoint());
}

// rank-one cone element at a chosen frequency, by construction
GramianMatrix frequency_element(const StateSpace& sys, double theta,
                                const CVector& ws) {
  CVector xs = resolvent_input_map(sys, theta) * ws;
  CVector v(sys.n() + sys.m());
  v << xs, ws;
  return GramianMatrix(sys.n(), sys.m(), v * v.adjoint());
}

}  // namespace

TEST_CASE("geometric rank-one element is in the cone") {
  GramianMatrix v = geometric_element(0.5);
  MembershipResult r = membership_residual(v, scalar_lag(0.5, 1.0));
  CHECK(r.subspace_residual <= 1e-12);
  CHECK(r.min_eig >= -1e-12);
  HermEig e = herm_eig(v.V);
  CHECK(e.eigenvalues(0) <= 1e-12);  // rank one
  CHECK(e.eigenvalues(1) > 1.0);
}

TEST_CASE("zero matrix is in the cone") {
  StateSpace sys = scalar_lag(0.5, 1.0);
  MembershipResult r =
      membership_residual(GramianMatrix(1, 1, CMatrix::Zero(2, 2)), sys);
  CHECK(r.subspace_residual == 0.0);
  CHECK(r.min_eig == 0.0);
}

TEST_CASE("controllability-gramian block diagonal is in the cone") {
  StateSpace sys = testing::random_system(3, 3, 2, 2);
  CMatrix wc = dlyap(sys.A, sys.B * sys.B.adjoint());
  CMatrix v = CMatrix::Zero(5, 5);
  v.topLeftCorner(3, 3) = wc;
  v.bottomRightCorner(2, 2) = CMatrix::Identity(2, 2);
  MembershipResult r = membership_residual(GramianMatrix(3, 2, v), sys);
  CHECK(r.subspace_residual <= 1e-10 * (1 + v.norm()));
  CHECK(r.min_eig >= -1e-12);
}

TEST_CASE("membership rejects a random PSD matrix off the subspace") {
  testing::Rng rng(9);
  StateSpace sys = scalar_lag(0.5, 1.0);
  CMatrix p = rng.psd(2) + CMatrix::Identity(2, 2);
  MembershipResult r = membership_residual(GramianMatrix(1, 1, p), sys);
  CHECK(r.subspace_residual > 1e-3);
}

TEST_CASE("controllability via the gramian") {
  CHECK(is_controllable(scalar_lag(0.5, 1.0)));
  CHECK_FALSE(is_controllable(scalar_lag(0.5, 0.0)));

  CMatrix A = CMatrix::Zero(2, 2);
  A(0, 0) = 0.5;
  A(1, 1) = 0.3;
  CMatrix B = CMatrix::Zero(2, 1);
  B(0, 0) = 1.0;
  StateSpace sys(A, B, CMatrix::Identity(1, 2), CMatrix::Zero(1, 1));
  CHECK_FALSE(is_controllable(sys));
}

TEST_CASE("decomposition of the geometric element") {
  StateSpace sys = scalar_lag(0.5, 1.0);
  auto comps = rank_one_decompose(geometric_element(0.5), sys);
  REQUIRE(comps.size() == 1);
  const RankOneComponent& c = comps[0];
  CHECK(c.theta == doctest::Approx(0.0));
  CHECK(c.weight == doctest::Approx(5.0));
  CHECK(std::abs(c.x_s(0) / c.w_s(0) - 2.0) <= 1e-10);
  // phase relation e^{j theta} x = A x + B w
  CVector lhs = std::polar(1.0, c.theta) * c.x_s;
  CVector rhs = sys.A * c.x_s + sys.B * c.w_s;
  CHECK((lhs - rhs).norm() <= 1e-10);
}

TEST_CASE("decomposition is idempotent on rank-one elements") {
  StateSpace sys = testing::random_system(21, 3, 2, 1);
  testing::Rng rng(22);
  CVector ws = rng.cmatrix(2, 1);
  GramianMatrix v = frequency_element(sys, 2.2, ws);
  auto comps = rank_one_decompose(v, sys);
  REQUIRE(comps.size() == 1);
  CMatrix rebuilt =
      comps[0].weight * comps[0].stacked() * comps[0].stacked().adjoint();
  CHECK((rebuilt - v.V).norm() <= 1e-9 * (1 + v.V.norm()));
  CHECK(comps[0].theta == doctest::Approx(2.2).epsilon(1e-9));
}

TEST_CASE("block-diagonal element splits into at most two components") {
  StateSpace sys = scalar_lag(0.5, 1.0);
  CMatrix wc = dlyap(sys.A, sys.B * sys.B.adjoint());
  CMatrix v = CMatrix::Zero(2, 2);
  v.topLeftCorner(1, 1) = wc;
  v(1, 1) = 1.0;
  GramianMatrix g(1, 1, v);
  auto comps = rank_one_decompose(g, sys);
  CHECK(comps.size() <= 2);
  CMatrix sum = CMatrix::Zero(2, 2);
  for (const auto& c : comps)
    sum += c.weight * c.stacked() * c.stacked().adjoint();
  CHECK((sum - v).norm() <= 1e-8);
}

TEST_CASE("decomposition round-trip, soundness and completeness") {
  for (uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    StateSpace sys = testing::random_system(100 + seed, 3, 2, 1);
    GramianMatrix v = random_cone_element(sys, seed);
    auto comps = rank_one_decompose(v, sys);
    CHECK(static_cast<int>(comps.size()) <= v.dim());
    CMatrix sum = CMatrix::Zero(v.dim(), v.dim());
    double wprev = std::numeric_limits<double>::infinity();
    for (const auto& c : comps) {
      CHECK(c.weight <= wprev);
      wprev = c.weight;
      CMatrix vi = c.weight * c.stacked() * c.stacked().adjoint();
      sum += vi;
      MembershipResult mr =
          membership_residual(GramianMatrix(v.n, v.m, vi), sys);
      CHECK(mr.subspace_residual <= 1e-8 * (1 + vi.norm()));
      CHECK(mr.min_eig >= -1e-12);
    }
    CHECK((sum - v.V).norm() <= 1e-7 * v.V.norm());
  }
}

TEST_CASE("random cone elements are members and deterministic") {
  StateSpace sys = testing::random_system(31, 2, 1, 1);
  GramianMatrix a = random_cone_element(sys, 77);
  GramianMatrix b = random_cone_element(sys, 77);
  CHECK((a.V - b.V).norm() == 0.0);
  MembershipResult r = membership_residual(a, sys);
  CHECK(r.subspace_residual <= 1e-9);
  CHECK(r.min_eig >= -1e-12);

  GramianMatrix c = random_cone_element(sys, 78);
  CHECK((a.V - c.V).norm() > 1e-6);
}

TEST_CASE("cone is closed under conic combinations") {
  StateSpace sys = testing::random_system(41, 2, 2, 1);
  GramianMatrix a = random_cone_element(sys, 1);
  GramianMatrix b = random_cone_element(sys, 2);
  GramianMatrix mix(2, 2, 0.7 * a.V + 2.5 * b.V);
  MembershipResult r = membership_residual(mix, sys);
  CHECK(r.subspace_residual <= 1e-9 * (1 + mix.V.norm()));
  CHECK(r.min_eig >= -1e-12);
}

TEST_CASE("random_cone_element requires controllability") {
  CHECK_THROWS_AS(random_cone_element(scalar_lag(0.5, 0.0), 1),
                  std::invalid_argument);
}

TEST_CASE("decomposition rejects non-members") {
  testing::Rng rng(50);
  StateSpace sys = scalar_lag(0.5, 1.0);
  GramianMatrix bad(1, 1, rng.psd(2) + CMatrix::Identity(2, 2));
  CHECK_THROWS_AS(rank_one_decompose(bad, sys), std::invalid_argument);
}

TEST_CASE("simulated gramians of finite signals satisfy membership") {
  for (uint64_t seed : {11u, 12u, 13u}) {
    StateSpace sys = testing::random_system(seed, 3, 2, 2, 0.8);
    testing::Rng rng(seed * 13);
    Signal w(2, 6);
    w.samples = rng.cmatrix(2, 6) / 3.0;
    const double tail = 1e-12;
    CMatrix v = gramian_of(simulate(sys, w), tail);
    MembershipResult r = membership_residual(GramianMatrix(3, 2, v), sys);
    double lipschitz = sys.AB().operatorNorm();
    CHECK(r.subspace_residual <= 10 * tail * (1 + lipschitz * lipschitz));
    CHECK(r.min_eig >= -1e-12);
  }
}

TEST_CASE("exact signal gramians have machine-level membership") {
  StateSpace sys = testing::random_system(61, 3, 2, 1, 0.9);
  testing::Rng rng(62);
  Signal w(2, 8);
  w.samples = rng.cmatrix(2, 8);
  GramianMatrix v = exact_signal_gramian(sys, w);
  MembershipResult r = membership_residual(v, sys);
  CHECK(r.subspace_residual <= 1e-10 * (1 + v.V.norm()));
}

TEST_CASE("snap_to_cone restores membership after perturbation") {
  StateSpace sys = testing::random_system(71, 3, 2, 1);
  GramianMatrix v = random_cone_element(sys, 5);
  testing::Rng rng(72);
  CMatrix noisy = v.V + 1e-5 * rng.hermitian(5);
  GramianMatrix snapped = snap_to_cone(sys, noisy, false);
  MembershipResult r = membership_residual(snapped, sys);
  CHECK(r.subspace_residual <= 1e-11 * (1 + snapped.V.norm()));
  CHECK(r.min_eig >= -1e-10 * (1 + snapped.V.norm()));
  CHECK((snapped.V - v.V).norm() <= 1e-3);

  GramianMatrix normalized = snap_to_cone(sys, noisy, true);
  CHECK(normalized.W().real().trace() == doctest::Approx(1.0).epsilon(1e-12));
}
