#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <string>
#include <vector>

#include "specdec/config.hpp"
#include "specdec/signal.hpp"

namespace specdec {

enum class TriState { holds, fails, unknown };

/// Grouped dual vector q certifying a subgradient p = K^T q.
/// Feasible when every group satisfies ||q_g||_2 <= 1.
struct DualCertificate {
  Vector q;
};

/// An absolutely one-homogeneous functional J(u) = sum_g ||(K u)_g||_2 given
/// by an analysis operator K and a partition of its rows into groups.
/// All groups of size one yields the polyhedral l1-analysis case J = ||Ku||_1;
/// larger groups give isotropic-type (non-polyhedral) functionals.
///
/// Instances are immutable after construction and safe to share across
/// threads; every operation below is a pure function of its inputs.
class Regularizer {
 public:
  Regularizer(Eigen::SparseMatrix<double> op, std::vector<std::vector<int>> groups,
              Shape signal_shape, std::string kind = "custom");

  int signal_dim() const { return static_cast<int>(op_.cols()); }
  int dual_dim() const { return static_cast<int>(op_.rows()); }
  const Shape& signal_shape() const { return shape_; }
  const std::string& kind() const { return kind_; }

  const Eigen::SparseMatrix<double>& op() const { return op_; }
  const Eigen::SparseMatrix<double>& gram() const { return gram_; }  // K K^T
  const std::vector<std::vector<int>>& groups() const { return groups_; }
  bool all_singleton_groups() const { return all_singletons_; }

  bool is_polyhedral() const { return all_singletons_; }
  TriState ddl1() const { return ddl1_; }
  double operator_norm_sq() const { return op_norm_sq_; }

  /// Orthonormal basis of N(J) = ker(K), one column per basis vector.
  const Eigen::MatrixXd& nullspace_basis() const { return nullspace_basis_; }

  Vector apply(const Vector& u) const { return op_ * u; }
  Vector apply_transpose(const Vector& w) const { return op_.transpose() * w; }

  /// Per-group Euclidean norms of a dual-space vector.
  Vector group_norms(const Vector& w) const;

 private:
  Eigen::SparseMatrix<double> op_;
  Eigen::SparseMatrix<double> gram_;
  std::vector<std::vector<int>> groups_;
  Eigen::MatrixXd nullspace_basis_;
  Shape shape_;
  std::string kind_;
  bool all_singletons_ = true;
  TriState ddl1_ = TriState::unknown;
  double op_norm_sq_ = 0.0;

  friend Regularizer make_tv1d(int n);
};

// Factories for the built-in operator kinds.
Regularizer make_tv1d(int n);
Regularizer make_tv2d_aniso(int rows, int cols);
Regularizer make_tv2d_iso(int rows, int cols);
Regularizer make_l1(int n);
Regularizer make_matrix(const Eigen::MatrixXd& K);

/// J(u) = sum_g ||(K u)_g||.
double eval_j(const Regularizer& reg, const Signal& u);

/// Splits u = p0 + q0 with p0 the orthogonal projection onto N(J) and
/// q0 = u - p0 perpendicular to it. J(u) = J(q0).
std::pair<Signal, Signal> project_nullspace(const Regularizer& reg, const Signal& u);

struct SubgradientResult {
  Signal p;
  DualCertificate cert;
  SolverDiagnostics diag;
};

/// Minimal-norm element of the subdifferential dJ(u): p = K^T q minimizing
/// ||p||^2 subject to q feasible for dJ(u) (active groups fixed to
/// (Ku)_g / ||(Ku)_g||, inactive groups inside the unit ball).
SubgradientResult min_norm_subgradient(const Regularizer& reg, const Signal& u,
                                       const SolverConfig& cfg = {});

/// Internal entry point used by the exact flow engine: the sign pattern sigma
/// (per dual row: +-1 active with that sign, 0 inactive) determines dJ(u) for
/// polyhedral regularizers, so the minimizer depends only on sigma.
SubgradientResult min_norm_subgradient_signs(const Regularizer& reg, const Vector& sigma,
                                             const SolverConfig& cfg = {});

struct SubgradientCheck {
  bool ok = false;
  double membership_residual = 0.0;  // min over q in B of ||K^T q - p||
  double gap_residual = 0.0;         // |<p,u> - J(u)|
};

/// True iff p is in dJ(u): J*(p) = 0 (dual-ball membership within tol_member)
/// and <p,u> = J(u) within tol_gap * (1 + J(u)).
SubgradientCheck is_subgradient(const Regularizer& reg, const Signal& u, const Signal& p,
                                const SolverConfig& cfg = {});

struct Ddl1Report {
  TriState status = TriState::unknown;
  int worst_row = -1;       // row with the smallest dominance margin
  double worst_margin = 0;  // (KK^T)(l,l) - sum_{j != l} |(KK^T)(l,j)|
  bool weakly_dominant = false;  // some row has margin exactly ~0
};

/// Diagonal dominance of K K^T, row by row. Equality rows count as holding
/// (weakly dominant, flagged in the report). Refuses non-polyhedral input.
Ddl1Report check_ddl1(const Regularizer& reg);

/// Certified upper bound C on ||K^T q|| over the dual ball; bounds the
/// Lipschitz constant of all flow trajectories.
double dual_ball_bound(const Regularizer& reg);

}  // namespace specdec
