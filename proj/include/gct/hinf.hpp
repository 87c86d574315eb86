#pragma once

#include <optional>

#include "gct/gramian.hpp"
#include "gct/sdp_builders.hpp"

namespace gct {

struct HinfResult {
  double mu_inf = 0.0;     // squared worst-case gain, from the refined primal
  GramianMatrix V_opt;     // exactly on the subspace, input trace one
  bool controllable = false;
  bool conclusive = true;  // solver produced a usable primal
  double dual_lambda = 0.0;
  std::optional<CMatrix> dual_P;
  bool dual_attained = true;
  double dual_P_norm = 0.0;
  double gap = 0.0;  // dual_lambda - mu_inf
  double solver_primal_residual = 0.0;
};

/// Worst-case squared gain as the gramian-cone program: maximize the output
/// energy over V in the cone with unit input energy. The returned V_opt is
/// refined onto the cone, so mu_inf is a certified achievable value.
HinfResult hinf_primal(const StateSpace& sys, const sdp::Params& params = {});

struct HinfDualResult {
  double lambda = 0.0;
  CMatrix P;
  bool attained = true;
  double P_norm = 0.0;
  double lmi_residual = 0.0;  // max eigenvalue of the dual constraint
  sdp::Status status = sdp::Status::MaxIter;
};

/// Multiplier program: minimize lambda subject to
/// [A B]* P [A B] - diag(P,0) + [C D]*[C D] - lambda diag(0,I) <= 0.
/// Flags non-attainment when lambda settles while |P| keeps growing.
HinfDualResult hinf_dual(const StateSpace& sys, const sdp::Params& params = {});

/// Primal and dual together with controllability and gap diagnostics.
HinfResult hinf_analyze(const StateSpace& sys, const sdp::Params& params = {});

enum class KypStatus { Holds, Fails, Inconclusive };

struct KypResult {
  KypStatus status = KypStatus::Inconclusive;
  std::optional<CMatrix> P;             // certificate when Holds
  std::optional<GramianMatrix> V_cert;  // alternative certificate when Fails
  double cert_value = 0.0;  // optimum of the alternative search (normalized)
};

/// Strict bounded-realness test: mu_inf < 1 iff the strict multiplier LMI is
/// feasible. Decided through the alternative system, with exactly one of a
/// P-certificate and a cone certificate returned away from the boundary.
KypResult kyp_strict(const StateSpace& sys, const sdp::Params& params = {});

/// Non-strict counterpart; requires (A, B) controllable so the multiplier
/// exists whenever mu_inf <= 1.
KypResult kyp_nonstrict(const StateSpace& sys, const sdp::Params& params = {});

}  // namespace gct
