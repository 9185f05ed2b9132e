#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hsup {

struct input_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Input whose geometry has collapsed: rank-deficient point sets, zero
// thinness, too few vertices.
struct degenerate_input : input_error {
  using input_error::input_error;
};

// A state the surrounding theory rules out; reaching it means a defect, not
// bad input.
struct internal_error : std::logic_error {
  using std::logic_error::logic_error;
};

namespace numkit {

using Vec = std::vector<double>;

struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  static Mat identity(std::size_t n);
};

// Symmetric matrix stored dense; set() keeps the two mirrored entries
// bitwise identical.
struct SymMatrix {
  std::size_t order = 0;
  std::vector<double> entries;

  SymMatrix() = default;
  explicit SymMatrix(std::size_t n) : order(n), entries(n * n, 0.0) {}

  double operator()(std::size_t i, std::size_t j) const { return entries[i * order + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    entries[i * order + j] = v;
    entries[j * order + i] = v;
  }

  static SymMatrix identity(std::size_t n);
};

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);
double norm_inf(const Vec& a);
Vec vadd(const Vec& a, const Vec& b);
Vec vsub(const Vec& a, const Vec& b);
Vec vscale(const Vec& a, double t);
Vec matvec(const Mat& m, const Vec& x);
Vec matvec_t(const Mat& m, const Vec& x);  // m^T x
Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& m);

// Gaussian elimination with partial pivoting. Returns false when the matrix
// is numerically singular.
bool solve_dense(Mat a, Vec b, Vec& x);

// Upper factor of a Householder QR of an m x n matrix, m >= n. Only the
// square triangular factor is returned; it satisfies a^T a = r^T r, which is
// all the callers need (rank probes, whitening transforms).
Mat qr_upper(const Mat& a);

// Cholesky factor (lower) of a positive definite matrix; false on failure.
bool cholesky_lower(const SymMatrix& m, Mat& lower);

// ---------------------------------------------------------------------------
// Linear programming: min objective . x  subject to  equality_matrix x = rhs,
// and x >= 0 when nonneg is set (free variables are split internally).
// ---------------------------------------------------------------------------

struct LinearProgram {
  Vec objective;
  Mat equality_matrix;
  Vec equality_rhs;
  bool nonneg = true;
  double tolerance = 1e-10;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Vec primal;
  Vec dual;  // one multiplier per equality row
  double value = 0.0;
};

// Two-phase dense revised simplex. Bland's rule throughout, so the pivot
// sequence is deterministic and cannot cycle. The basis is refactorized each
// iteration; problem sizes here are tiny and exactness matters more than
// speed.
LpResult solve_lp(const LinearProgram& lp);

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition (cyclic Jacobi) and a one-sided Jacobi SVD.
// ---------------------------------------------------------------------------

struct EigenResult {
  Vec eigenvalues;   // descending
  Mat eigenvectors;  // orthonormal columns, same order
};

// Cyclic Jacobi, off-diagonal threshold 1e-14 relative to the Frobenius
// norm. Intended for small orders (<= 16).
EigenResult sym_eigen(const SymMatrix& m);

struct SvdResult {
  Mat u;
  Vec sigma;  // descending
  Mat v;
};

// One-sided Jacobi SVD of a square matrix. Singular values keep high
// relative accuracy even when the matrix is badly graded, which matters for
// very thin bodies.
SvdResult svd_square(const Mat& a);

}  // namespace numkit
}  // namespace hsup
