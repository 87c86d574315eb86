#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gct/linalg.hpp"
#include "gct/types.hpp"

namespace gct::sdp {

enum class Sense { Minimize, Maximize };

enum class BlockKind { ComplexHermitian, RealSymmetric };

/// Linear functional on the variable space: one Hermitian (or real symmetric)
/// coefficient per declared block plus coefficients on the free scalars.
/// Empty matrices stand for zero coefficients.
struct LinExpr {
  std::vector<CMatrix> block_coeff;
  RVector free_coeff;
};

/// Standard-form conic program: PSD blocks, free scalars, linear equality and
/// (slack-converted) inequality constraints, linear objective.
class Program {
 public:
  explicit Program(Sense sense) : sense_(sense) {}

  /// PSD block of complex Hermitian matrices of the given dimension.
  int add_psd_block(int dim);
  /// PSD block of real symmetric matrices (dim 1 = nonnegative scalar).
  int add_real_psd_block(int dim);
  int add_free_vars(int count);

  /// Zero expression sized for the current variables.
  LinExpr expr() const;

  void set_objective(const LinExpr& e);
  void add_equality(const LinExpr& e, double rhs);
  /// Adds <e, x> <= rhs (converted internally to an equality plus slack).
  void add_inequality_le(const LinExpr& e, double rhs);

  Sense sense() const { return sense_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  BlockKind block_kind(int b) const { return blocks_[b].kind; }
  int block_dim(int b) const { return blocks_[b].dim; }
  int num_free() const { return num_free_; }
  int num_equalities() const { return static_cast<int>(equalities_.size()); }
  int num_inequalities() const { return static_cast<int>(inequalities_.size()); }
  const LinExpr& objective() const { return objective_; }
  const std::pair<LinExpr, double>& equality(int i) const {
    return equalities_[i];
  }
  const std::pair<LinExpr, double>& inequality(int i) const {
    return inequalities_[i];
  }

 private:
  struct Block {
    BlockKind kind;
    int dim;
  };
  void validate_expr(const LinExpr& e) const;

  Sense sense_;
  std::vector<Block> blocks_;
  int num_free_ = 0;
  LinExpr objective_;
  std::vector<std::pair<LinExpr, double>> equalities_;
  std::vector<std::pair<LinExpr, double>> inequalities_;
};

enum class Status { Optimal, InfeasibleDetected, UnboundedDetected, MaxIter };

struct Solution {
  Status status = Status::MaxIter;
  std::vector<CMatrix> block_value;  // cone-projected primal per block
  RVector free_value;
  RVector eq_dual;    // multiplier per equality (user-sense convention)
  RVector ineq_dual;  // multiplier per inequality, >= 0 at optimality
  std::vector<CMatrix> dual_slack;  // S per block with c - A'y = S on blocks
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;  // normalized affine + splitting violation
  double dual_residual = 0.0;    // normalized stationarity violation
  double gap_residual = 0.0;     // normalized |primal - dual|
  int iterations = 0;
  // For InfeasibleDetected: Farkas certificate y in eq_dual/ineq_dual with
  // -A'y PSD on blocks (in dual_slack) and b'y = 1 within farkas_residual.
  // For UnboundedDetected: improving ray in block_value/free_value.
  double certificate_residual = 0.0;
  // Primal residuals settled while the multipliers keep growing: the dual
  // optimum is likely not attained (the gap cannot certify below tolerance).
  bool dual_unattainment_hint = false;
  std::string note;
};

/// Observer sampled every params.sample_every iterations. Return false to
/// halt the solve (status MaxIter with the current iterate).
struct IterateSample {
  int iteration;
  double objective;        // user-sense objective of current iterate
  const RVector& free_values;
};
using Observer = std::function<bool(const IterateSample&)>;

struct Params {
  double tol = tol::solver;
  int max_iter = 50000;
  double rho = 1.0;
  double alpha = 1.6;          // over-relaxation
  int balance_every = 100;     // initial balancing interval, doubles per check
  double balance_ratio = 10.0;
  int check_every = 25;        // convergence test cadence
  int sample_every = 100;      // observer + certificate test cadence
  bool polish = true;
  Observer observer;
};

/// Deterministic operator-splitting solve. Throws std::invalid_argument on a
/// malformed program; numerical breakdown surfaces as MaxIter with residuals.
Solution solve(const Program& prog, const Params& params = {});

enum class FeasStatus { Feasible, Infeasible, Undecided };

struct FeasResult {
  FeasStatus status = FeasStatus::Undecided;
  // Feasible branch: a point satisfying the constraints (blocks shifted back).
  std::vector<CMatrix> block_value;
  RVector free_value;
  // Infeasible branch: Farkas certificate y with -A'y in the dual cone and
  // b'y = 1; Z holds the PSD block images of -A'y.
  RVector farkas_y;
  std::vector<CMatrix> farkas_Z;
  double residual = 0.0;  // residual of whichever certificate is returned
  std::string note;
};

/// Two-sided feasibility search for a program with zero objective: attempts a
/// (margin-strict) feasible point, then the alternative-system certificate.
FeasResult check_feasibility(const Program& prog, double strictness_margin,
                             const Params& params = {});

}  // namespace gct::sdp
