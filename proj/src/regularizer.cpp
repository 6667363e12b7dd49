#include "specdec/regularizer.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace specdec {

namespace {

bool singletons_only(const std::vector<std::vector<int>>& groups) {
  return std::all_of(groups.begin(), groups.end(),
                     [](const auto& g) { return g.size() == 1; });
}

// Upper estimate of ||K||^2. Small operators get the exact top eigenvalue of
// the dense Gram matrix; large ones a power iteration from a pseudo-random
// start (a structured start can be exactly orthogonal to the top mode) with a
// 1.01 safety factor, capped by the certified Hoelder bound ||K||_1 ||K||_inf.
double estimate_op_norm_sq(const Eigen::SparseMatrix<double>& K) {
  const int m = static_cast<int>(K.rows());
  const int n = static_cast<int>(K.cols());
  if (m == 0 || n == 0 || K.nonZeros() == 0) return 0.0;

  if (std::min(m, n) <= 512) {
    const bool use_cols = n <= m;
    Eigen::MatrixXd gram =
        use_cols ? Eigen::MatrixXd(Eigen::SparseMatrix<double>(K.transpose() * K))
                 : Eigen::MatrixXd(Eigen::SparseMatrix<double>(K * K.transpose()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff() * (1.0 + 1e-10);
  }

  Vector row_sums = Vector::Zero(m), col_sums = Vector::Zero(n);
  for (int j = 0; j < K.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, j); it; ++it) {
      row_sums[it.row()] += std::abs(it.value());
      col_sums[it.col()] += std::abs(it.value());
    }
  const double holder = row_sums.maxCoeff() * col_sums.maxCoeff();

  std::mt19937_64 gen(0x5eed5eed);
  Vector v(n);
  for (int i = 0; i < n; ++i)
    v[i] = static_cast<double>(gen() >> 11) * (1.0 / 9007199254740992.0) - 0.5;
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    Vector w = K.transpose() * (K * v);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    w /= nw;
    const double next = (K * w).squaredNorm();
    const bool settled = std::abs(next - lambda) <= 1e-13 * next;
    lambda = next;
    v.swap(w);
    if (settled && it > 8) break;
  }
  return std::min(1.01 * lambda, holder);
}

Eigen::MatrixXd constant_basis(int n) {
  Eigen::MatrixXd b(n, 1);
  b.setConstant(1.0 / std::sqrt(static_cast<double>(n)));
  return b;
}

// Kernel basis by singular-value thresholding at 1e-12 * sigma_max.
Eigen::MatrixXd kernel_basis_svd(const Eigen::SparseMatrix<double>& K) {
  Eigen::MatrixXd dense = Eigen::MatrixXd(K);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double thresh = 1e-12 * smax;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++rank;
  const int n = static_cast<int>(K.cols());
  return svd.matrixV().rightCols(n - rank);
}

std::vector<std::vector<int>> singleton_groups(int m) {
  std::vector<std::vector<int>> g(m);
  for (int i = 0; i < m; ++i) g[i] = {i};
  return g;
}

}  // namespace

Regularizer::Regularizer(Eigen::SparseMatrix<double> op, std::vector<std::vector<int>> groups,
                         Shape signal_shape, std::string kind)
    : op_(std::move(op)), groups_(std::move(groups)), shape_(signal_shape),
      kind_(std::move(kind)) {
  if (shape_.size() != op_.cols())
    throw std::invalid_argument("Regularizer: shape does not match operator columns");

  std::vector<char> seen(op_.rows(), 0);
  for (const auto& g : groups_)
    for (int r : g) {
      if (r < 0 || r >= op_.rows() || seen[r])
        throw std::invalid_argument("Regularizer: groups must partition the dual rows");
      seen[r] = 1;
    }
  if (!std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; }))
    throw std::invalid_argument("Regularizer: groups must cover every dual row");

  op_.makeCompressed();
  gram_ = (op_ * Eigen::SparseMatrix<double>(op_.transpose())).pruned();
  gram_.makeCompressed();
  all_singletons_ = singletons_only(groups_);
  op_norm_sq_ = estimate_op_norm_sq(op_);

  if (kind_ == "tv1d" || kind_ == "tv2d_aniso" || kind_ == "tv2d_iso") {
    nullspace_basis_ = constant_basis(signal_dim());
  } else if (kind_ == "l1") {
    nullspace_basis_ = Eigen::MatrixXd(signal_dim(), 0);
  } else {
    nullspace_basis_ = kernel_basis_svd(op_);
  }

  ddl1_ = all_singletons_ ? check_ddl1(*this).status : TriState::fails;
}

Vector Regularizer::group_norms(const Vector& w) const {
  if (w.size() != dual_dim())
    throw std::invalid_argument("group_norms: dual dimension mismatch");
  Vector out(static_cast<int>(groups_.size()));
  if (all_singletons_) {
    for (size_t g = 0; g < groups_.size(); ++g) out[static_cast<int>(g)] = std::abs(w[groups_[g][0]]);
    return out;
  }
  for (size_t g = 0; g < groups_.size(); ++g) {
    double s = 0;
    for (int r : groups_[g]) s += w[r] * w[r];
    out[static_cast<int>(g)] = std::sqrt(s);
  }
  return out;
}

Regularizer make_tv1d(int n) {
  if (n < 2) throw std::invalid_argument("make_tv1d: need n >= 2");
  Eigen::SparseMatrix<double> K(n - 1, n);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * (n - 1));
  for (int i = 0; i < n - 1; ++i) {
    trips.emplace_back(i, i, -1.0);
    trips.emplace_back(i, i + 1, 1.0);
  }
  K.setFromTriplets(trips.begin(), trips.end());
  return Regularizer(std::move(K), singleton_groups(n - 1), Shape{n, 1}, "tv1d");
}

Regularizer make_l1(int n) {
  if (n < 1) throw std::invalid_argument("make_l1: need n >= 1");
  Eigen::SparseMatrix<double> K(n, n);
  K.setIdentity();
  return Regularizer(std::move(K), singleton_groups(n), Shape{n, 1}, "l1");
}

namespace {

// Forward differences on a rows x cols grid (row-major storage). Horizontal
// differences come first, then vertical; row index helpers are shared by the
// anisotropic and isotropic factories.
Eigen::SparseMatrix<double> grid_difference_operator(int rows, int cols) {
  const int n = rows * cols;
  const int mh = rows * (cols - 1);
  const int mv = (rows - 1) * cols;
  Eigen::SparseMatrix<double> K(mh + mv, n);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * (mh + mv));
  auto idx = [cols](int r, int c) { return r * cols + c; };
  int row = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c + 1 < cols; ++c, ++row) {
      trips.emplace_back(row, idx(r, c), -1.0);
      trips.emplace_back(row, idx(r, c + 1), 1.0);
    }
  for (int r = 0; r + 1 < rows; ++r)
    for (int c = 0; c < cols; ++c, ++row) {
      trips.emplace_back(row, idx(r, c), -1.0);
      trips.emplace_back(row, idx(r + 1, c), 1.0);
    }
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

}  // namespace

Regularizer make_tv2d_aniso(int rows, int cols) {
  if (rows < 1 || cols < 1 || rows * cols < 2)
    throw std::invalid_argument("make_tv2d_aniso: grid too small");
  auto K = grid_difference_operator(rows, cols);
  const int m = static_cast<int>(K.rows());
  return Regularizer(std::move(K), singleton_groups(m), Shape{rows, cols}, "tv2d_aniso");
}

Regularizer make_tv2d_iso(int rows, int cols) {
  if (rows < 1 || cols < 1 || rows * cols < 2)
    throw std::invalid_argument("make_tv2d_iso: grid too small");
  auto K = grid_difference_operator(rows, cols);
  const int mh = rows * (cols - 1);
  // Pixel (r,c) owns the pair {horizontal diff at (r,c), vertical diff at
  // (r,c)}; pixels on the last row/column contribute what exists.
  std::vector<std::vector<int>> groups;
  auto hrow = [cols](int r, int c) { return r * (cols - 1) + c; };
  auto vrow = [mh, cols](int r, int c) { return mh + r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      std::vector<int> g;
      if (c + 1 < cols) g.push_back(hrow(r, c));
      if (r + 1 < rows) g.push_back(vrow(r, c));
      if (!g.empty()) groups.push_back(std::move(g));
    }
  return Regularizer(grid_difference_operator(rows, cols), std::move(groups),
                     Shape{rows, cols}, "tv2d_iso");
}

Regularizer make_matrix(const Eigen::MatrixXd& K) {
  if (K.rows() < 1 || K.cols() < 1)
    throw std::invalid_argument("make_matrix: empty operator");
  Eigen::SparseMatrix<double> S = K.sparseView(1.0, 0.0);
  const int m = static_cast<int>(K.rows());
  return Regularizer(std::move(S), singleton_groups(m),
                     Shape{static_cast<int>(K.cols()), 1}, "matrix");
}

double eval_j(const Regularizer& reg, const Signal& u) {
  if (!(u.shape == reg.signal_shape()))
    throw std::invalid_argument("eval_j: signal shape mismatch");
  return reg.group_norms(reg.apply(u.values)).sum();
}

std::pair<Signal, Signal> project_nullspace(const Regularizer& reg, const Signal& u) {
  if (!(u.shape == reg.signal_shape()))
    throw std::invalid_argument("project_nullspace: signal shape mismatch");
  const auto& B = reg.nullspace_basis();
  Vector p0 = B.cols() > 0 ? Vector(B * (B.transpose() * u.values))
                           : Vector(Vector::Zero(u.size()));
  Vector q0 = u.values - p0;
  return {Signal(std::move(p0), u.shape), Signal(std::move(q0), u.shape)};
}

Ddl1Report check_ddl1(const Regularizer& reg) {
  if (!reg.is_polyhedral())
    throw std::invalid_argument("check_ddl1: defined only for polyhedral (all-singleton) regularizers");
  const auto& G = reg.gram();
  Ddl1Report rep;
  double worst = std::numeric_limits<double>::infinity();
  double max_diag = 0;
  for (int l = 0; l < G.outerSize(); ++l) {
    double diag = 0, off = 0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(G, l); it; ++it) {
      // column-major: iterate column l, symmetric matrix so rows == columns
      if (it.row() == l)
        diag = it.value();
      else
        off += std::abs(it.value());
    }
    max_diag = std::max(max_diag, diag);
    const double margin = diag - off;
    if (margin < worst) {
      worst = margin;
      rep.worst_row = l;
    }
  }
  rep.worst_margin = worst;
  const double tol = 1e-12 * std::max(1.0, max_diag);
  rep.status = worst >= -tol ? TriState::holds : TriState::fails;
  rep.weakly_dominant = std::abs(worst) <= tol;
  return rep;
}

double dual_ball_bound(const Regularizer& reg) {
  // Two certified bounds on max ||K^T q|| over the product ball: sigma_max(K)
  // times sqrt(#groups), and the triangle-inequality sum of per-group block
  // norms. Return the tighter one.
  const double via_opnorm =
      std::sqrt(reg.operator_norm_sq() * static_cast<double>(reg.groups().size()));

  // (K K^T)(a,b) already holds every needed row inner product.
  const auto& G = reg.gram();
  double via_blocks = 0;
  for (const auto& g : reg.groups()) {
    if (g.size() == 1) {
      via_blocks += std::sqrt(std::max(0.0, G.coeff(g[0], g[0])));
      continue;
    }
    Eigen::MatrixXd block_gram(g.size(), g.size());
    for (size_t a = 0; a < g.size(); ++a)
      for (size_t b = 0; b < g.size(); ++b)
        block_gram(static_cast<int>(a), static_cast<int>(b)) = G.coeff(g[a], g[b]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block_gram, Eigen::EigenvaluesOnly);
    via_blocks += std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }
  return std::min(via_opnorm, via_blocks);
}

}  // namespace specdec
