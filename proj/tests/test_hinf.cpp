#include "gct/hinf.hpp"

#include "doctest.h"
#include "gct/oracles.hpp"
#include "test_support.hpp"

using namespace gct;

namespace {

StateSpace scalar_sys(double a, double b, double c, double d) {
  CMatrix A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << a;
  B << b;
  C << c;
  D << d;
  return StateSpace(A, B, C, D);
}

StateSpace scaled_output(const StateSpace& sys, double gamma) {
  return StateSpace(sys.A, sys.B, gamma * sys.C, gamma * sys.D);
}

}  // namespace

TEST_CASE("uncontrollable feedthrough pair: primal attains 1, dual does not") {
  StateSpace sys = scalar_sys(0.5, 0.0, 1.0, 1.0);
  HinfResult r = hinf_analyze(sys);
  CHECK(r.conclusive);
  CHECK_FALSE(r.controllable);
  CHECK(r.mu_inf == doctest::Approx(1.0).epsilon(1e-6));
  CMatrix expect = CMatrix::Zero(2, 2);
  expect(1, 1) = 1.0;
  CHECK((r.V_opt.V - expect).norm() <= 1e-6);
  CHECK_FALSE(r.dual_attained);
  CHECK(r.dual_lambda >= 1.0 - 1e-5);
}

TEST_CASE("unit delay has unit gain with attained dual at P = 1") {
  StateSpace sys = scalar_sys(0.0, 1.0, 1.0, 0.0);
  HinfResult r = hinf_analyze(sys);
  CHECK(r.mu_inf == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.controllable);
  CHECK(r.dual_attained);
  CHECK(r.dual_lambda == doctest::Approx(1.0).epsilon(1e-4));
  REQUIRE(r.dual_P.has_value());
  CHECK(std::abs((*r.dual_P)(0, 0) - Complex(1.0)) <= 1e-3);
}

TEST_CASE("scalar lag worst gain is 4 at zero frequency") {
  StateSpace sys = scalar_sys(0.5, 1.0, 1.0, 0.0);
  HinfResult r = hinf_primal(sys);
  CHECK(r.mu_inf == doctest::Approx(4.0).epsilon(1e-5));
  // optimal gramian is the geometric rank-one element
  CMatrix v(2, 2);
  v << 4, 2, 2, 1;
  CHECK((r.V_opt.V - v).norm() <= 1e-3);
  MembershipResult mem = membership_residual(r.V_opt, sys);
  CHECK(mem.subspace_residual <= 1e-10 * (1 + r.V_opt.V.norm()));
  CHECK(r.V_opt.W().real().trace() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dual is feasible and tight for the scalar lag") {
  StateSpace sys = scalar_sys(0.5, 1.0, 1.0, 0.0);
  HinfDualResult d = hinf_dual(sys);
  CHECK(d.status == sdp::Status::Optimal);
  CHECK(d.attained);
  CHECK(d.lambda == doctest::Approx(4.0).epsilon(1e-4));
  CHECK(d.lmi_residual <= 1e-6 * 5.0);
}

TEST_CASE("zero output map has zero gain") {
  StateSpace sys = scalar_sys(0.5, 1.0, 0.0, 0.0);
  HinfResult r = hinf_analyze(sys);
  CHECK(r.mu_inf <= 1e-8);
  CHECK(std::abs(r.dual_lambda) <= 1e-5);
}

TEST_CASE("oracle agreement and strong duality on random systems") {
  for (uint64_t seed : {3u, 4u, 5u}) {
    StateSpace sys = testing::random_system(seed, 3, 2, 2, 0.85);
    HinfResult r = hinf_analyze(sys);
    REQUIRE(r.conclusive);
    double grid = freq_grid_hinf(sys, 10000).lower;
    CHECK(std::abs(r.mu_inf - grid) <= 1e-3 * (1.0 + r.mu_inf));
    CHECK(r.controllable);
    CHECK(std::abs(r.gap) <= 1e-5 * (1.0 + r.mu_inf));
    CHECK(r.dual_attained);
  }
}

TEST_CASE("quadratic scaling of the gain in the output map") {
  StateSpace sys = testing::random_system(11, 2, 1, 1, 0.8);
  double base = hinf_primal(sys).mu_inf;
  double scaled = hinf_primal(scaled_output(sys, 2.0)).mu_inf;
  CHECK(scaled == doctest::Approx(4.0 * base).epsilon(1e-4));
}

TEST_CASE("strict bounded-realness on hand-checked scalars") {
  // gain 0.8 < 1
  KypResult hold = kyp_strict(scalar_sys(0.5, 1.0, 0.4, 0.0));
  CHECK(hold.status == KypStatus::Holds);
  REQUIRE(hold.P.has_value());

  // gain 2 > 1: certificate branch
  KypResult fail = kyp_strict(scalar_sys(0.5, 1.0, 1.0, 0.0));
  CHECK(fail.status == KypStatus::Fails);
  REQUIRE(fail.V_cert.has_value());
  CHECK(fail.cert_value > 0.0);

  // zero map
  KypResult zero = kyp_strict(scalar_sys(0.5, 1.0, 0.0, 0.0));
  CHECK(zero.status == KypStatus::Holds);
}

TEST_CASE("strict test certificates are mutually exclusive and valid") {
  for (uint64_t seed : {21u, 22u, 23u, 24u}) {
    StateSpace base = testing::random_system(seed, 2, 2, 2, 0.8);
    double mu = hinf_primal(base).mu_inf;
    for (double target : {0.25, 0.8, 1.3, 4.0}) {
      StateSpace sys = scaled_output(base, std::sqrt(target / mu));
      KypResult r = kyp_strict(sys);
      double mu_scaled = hinf_primal(sys).mu_inf;
      if (std::abs(mu_scaled - 1.0) <= 1e-3) continue;  // boundary band
      if (mu_scaled < 1.0) {
        CHECK(r.status == KypStatus::Holds);
        REQUIRE(r.P.has_value());
        CMatrix lmi = kyp_map(sys, *r.P) + sys.output_weight() -
                      embed_input(sys, CMatrix::Identity(2, 2));
        CHECK(min_eigenvalue(-lmi) > 0.0);
        CHECK_FALSE(r.V_cert.has_value());
      } else {
        CHECK(r.status == KypStatus::Fails);
        REQUIRE(r.V_cert.has_value());
        CHECK_FALSE(r.P.has_value());
        MembershipResult mem = membership_residual(*r.V_cert, sys);
        CHECK(mem.subspace_residual <= 1e-6);
        CHECK(mem.min_eig >= -1e-8);
        CMatrix qt = sys.output_weight() -
                     embed_input(sys, CMatrix::Identity(2, 2));
        CHECK(real_inner(qt, r.V_cert->V) >= -1e-8);
      }
    }
  }
}

TEST_CASE("non-strict test at the boundary and its precondition") {
  // unit delay sits exactly at mu = 1 and is controllable
  KypResult r = kyp_nonstrict(scalar_sys(0.0, 1.0, 1.0, 0.0));
  CHECK(r.status == KypStatus::Holds);
  REQUIRE(r.P.has_value());

  KypResult below = kyp_nonstrict(scalar_sys(0.5, 1.0, 0.4, 0.0));
  CHECK(below.status == KypStatus::Holds);

  CHECK_THROWS_AS(kyp_nonstrict(scalar_sys(0.5, 0.0, 1.0, 1.0)),
                  std::invalid_argument);
}
