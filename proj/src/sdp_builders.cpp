#include "gct/sdp_builders.hpp"

namespace gct {

HermVar add_hermitian_var(sdp::Program& prog, int dim) {
  return HermVar{prog.add_free_vars(dim * dim), dim};
}

CMatrix hermitian_value(const HermVar& var, const RVector& free_values) {
  return hermitian_from_coords(free_values.segment(var.first, var.dim * var.dim),
                               var.dim);
}

std::vector<CMatrix> map_hermitian_basis(
    int dim, const std::function<CMatrix(const CMatrix&)>& map) {
  std::vector<CMatrix> out;
  for (const CMatrix& e : hermitian_basis(dim)) out.push_back(map(e));
  return out;
}

void add_cone_constraints(sdp::Program& prog, int v_block,
                          const StateSpace& sys) {
  CMatrix ab = sys.AB();
  CMatrix sel = CMatrix::Zero(sys.n(), sys.n() + sys.m());
  sel.leftCols(sys.n()) = CMatrix::Identity(sys.n(), sys.n());
  for (const CMatrix& e : hermitian_basis(sys.n())) {
    sdp::LinExpr ex = prog.expr();
    ex.block_coeff[v_block] =
        ab.adjoint() * e * ab - sel.adjoint() * e * sel;
    prog.add_equality(ex, 0.0);
  }
}

void add_input_trace_row(sdp::Program& prog, int v_block,
                         const StateSpace& sys, double rhs) {
  sdp::LinExpr ex = prog.expr();
  ex.block_coeff[v_block] =
      embed_input(sys, CMatrix::Identity(sys.m(), sys.m()));
  prog.add_equality(ex, rhs);
}

CMatrix kyp_map(const StateSpace& sys, const CMatrix& p) {
  CMatrix ab = sys.AB();
  CMatrix out = ab.adjoint() * p * ab;
  out.topLeftCorner(sys.n(), sys.n()) -= p;
  return out;
}

CMatrix embed_input(const StateSpace& sys, const CMatrix& y) {
  CMatrix out = CMatrix::Zero(sys.n() + sys.m(), sys.n() + sys.m());
  out.bottomRightCorner(sys.m(), sys.m()) = y;
  return out;
}

}  // namespace gct
