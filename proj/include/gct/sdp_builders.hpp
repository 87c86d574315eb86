#pragma once

#include <functional>

#include "gct/sdp.hpp"
#include "gct/state_space.hpp"

namespace gct {

/// Free Hermitian matrix variable, parameterized over hermitian_basis(dim).
struct HermVar {
  int first = 0;
  int dim = 0;
};

HermVar add_hermitian_var(sdp::Program& prog, int dim);

CMatrix hermitian_value(const HermVar& var, const RVector& free_values);

/// Images of the Hermitian basis under a linear matrix map, for assembling
/// LMI rows coefficient by coefficient.
std::vector<CMatrix> map_hermitian_basis(
    int dim, const std::function<CMatrix(const CMatrix&)>& map);

/// Stationarity rows [A B] V [A B]* = X of the gramian cone.
void add_cone_constraints(sdp::Program& prog, int v_block,
                          const StateSpace& sys);

/// trace(W) = rhs on the input block of a gramian variable.
void add_input_trace_row(sdp::Program& prog, int v_block,
                         const StateSpace& sys, double rhs);

/// [A B]* P [A B] - diag(P, 0): the state-feedback form every dual LMI in
/// this toolkit is built from.
CMatrix kyp_map(const StateSpace& sys, const CMatrix& p);

/// Embeds an input-space matrix into the (n+m) frame: diag(0, Y).
CMatrix embed_input(const StateSpace& sys, const CMatrix& y);

inline double real_inner(const CMatrix& a, const CMatrix& b) {
  return (a.adjoint() * b).trace().real();
}

}  // namespace gct
