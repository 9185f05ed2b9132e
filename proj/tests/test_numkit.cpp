#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "hypersupport/numkit.hpp"

using namespace hsup;
using numkit::Mat;
using numkit::SymMatrix;
using numkit::Vec;

namespace {

Mat random_matrix(std::mt19937_64& gen, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat m(rows, cols);
  for (double& c : m.data) c = gauss(gen);
  return m;
}

double mat_norm(const Mat& m) {
  double acc = 0.0;
  for (double c : m.data) acc += c * c;
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("dense solve recovers a known solution") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + gen() % 8;
    Mat a = random_matrix(gen, n, n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += 3.0;  // keep it comfortably regular
    Vec x_true(n);
    for (double& c : x_true) c = std::normal_distribution<double>()(gen);
    const Vec b = numkit::matvec(a, x_true);
    Vec x;
    REQUIRE(numkit::solve_dense(a, b, x));
    for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(x_true[i]).epsilon(1e-9));
  }
}

TEST_CASE("dense solve rejects a singular system") {
  Mat a(2, 2);
  a(0, 0) = 1.0;
  a(0, 1) = 2.0;
  a(1, 0) = 2.0;
  a(1, 1) = 4.0;
  Vec x;
  CHECK_FALSE(numkit::solve_dense(a, {1.0, 0.0}, x));
}

TEST_CASE("qr_upper reproduces the normal matrix") {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t cols = 1 + gen() % 6;
    const std::size_t rows = cols + gen() % 5;
    const Mat a = random_matrix(gen, rows, cols);
    const Mat r = numkit::qr_upper(a);
    REQUIRE(r.rows == cols);
    REQUIRE(r.cols == cols);
    for (std::size_t i = 0; i < cols; ++i)
      for (std::size_t j = 0; j < i; ++j) CHECK(r(i, j) == 0.0);
    // A^T A == R^T R
    const Mat at = numkit::transpose(a);
    const Mat ata = numkit::matmul(at, a);
    const Mat rt = numkit::transpose(r);
    const Mat rtr = numkit::matmul(rt, r);
    const double scale = mat_norm(ata) + 1.0;
    for (std::size_t i = 0; i < cols; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        CHECK(std::fabs(ata(i, j) - rtr(i, j)) <= 1e-11 * scale);
  }
}

TEST_CASE("cholesky factors SPD matrices and reports failure otherwise") {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + gen() % 7;
    const Mat a = random_matrix(gen, n + 2, n);
    const Mat ata = numkit::matmul(numkit::transpose(a), a);
    SymMatrix spd(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) spd.set(i, j, ata(i, j) + (i == j ? 0.5 : 0.0));
    Mat l;
    REQUIRE(numkit::cholesky_lower(spd, l));
    const Mat llt = numkit::matmul(l, numkit::transpose(l));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        CHECK(llt(i, j) == doctest::Approx(spd(i, j)).epsilon(1e-9).scale(1.0));
  }
  SymMatrix indef(2);
  indef.set(0, 0, 1.0);
  indef.set(1, 1, -1.0);
  Mat l;
  CHECK_FALSE(numkit::cholesky_lower(indef, l));
}

TEST_CASE("lp: tiny equality problem solves exactly") {
  // min x0 + x1  s.t.  x0 + x1 = 1, x >= 0: optimum value 1.
  numkit::LinearProgram lp;
  lp.objective = {1.0, 1.0};
  lp.equality_matrix = Mat(1, 2);
  lp.equality_matrix(0, 0) = 1.0;
  lp.equality_matrix(0, 1) = 1.0;
  lp.equality_rhs = {1.0};
  const auto res = numkit::solve_lp(lp);
  REQUIRE(res.status == numkit::LpStatus::optimal);
  CHECK(res.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.primal[0] + res.primal[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lp: infeasible and unbounded statuses") {
  {
    numkit::LinearProgram lp;  // x0 = 1 and x0 = 2 cannot both hold
    lp.objective = {0.0};
    lp.equality_matrix = Mat(2, 1);
    lp.equality_matrix(0, 0) = 1.0;
    lp.equality_matrix(1, 0) = 1.0;
    lp.equality_rhs = {1.0, 2.0};
    CHECK(numkit::solve_lp(lp).status == numkit::LpStatus::infeasible);
  }
  {
    numkit::LinearProgram lp;  // min x0 - x1 s.t. x0 - x1 = 0: ray (t, t) drives it... nowhere
    lp.objective = {1.0, -1.0};
    lp.equality_matrix = Mat(1, 2);
    lp.equality_matrix(0, 0) = 1.0;
    lp.equality_matrix(0, 1) = -1.0;
    lp.equality_rhs = {0.0};
    // objective is 0 on the whole feasible set
    const auto res = numkit::solve_lp(lp);
    REQUIRE(res.status == numkit::LpStatus::optimal);
    CHECK(res.value == doctest::Approx(0.0));
  }
  {
    numkit::LinearProgram lp;  // min -x0 s.t. x0 - x1 = 0: unbounded ray
    lp.objective = {-1.0, 0.0};
    lp.equality_matrix = Mat(1, 2);
    lp.equality_matrix(0, 0) = 1.0;
    lp.equality_matrix(0, 1) = -1.0;
    lp.equality_rhs = {0.0};
    CHECK(numkit::solve_lp(lp).status == numkit::LpStatus::unbounded);
  }
}

TEST_CASE("lp: free variables via nonneg = false") {
  // min x s.t. x = -5 with x free.
  numkit::LinearProgram lp;
  lp.objective = {1.0};
  lp.equality_matrix = Mat(1, 1);
  lp.equality_matrix(0, 0) = 1.0;
  lp.equality_rhs = {-5.0};
  lp.nonneg = false;
  const auto res = numkit::solve_lp(lp);
  REQUIRE(res.status == numkit::LpStatus::optimal);
  CHECK(res.value == doctest::Approx(-5.0).epsilon(1e-12));
}

TEST_CASE("lp: strong duality on random feasible instances") {
  std::mt19937_64 gen(14);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int optimal_seen = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = 2 + gen() % 19;  // up to 20 variables
    const std::size_t m = 1 + gen() % n;
    Mat a = random_matrix(gen, m, n);
    Vec x_feas(n);
    for (double& c : x_feas) c = unif(gen);
    const Vec b = numkit::matvec(a, x_feas);
    numkit::LinearProgram lp;
    lp.objective.resize(n);
    for (double& c : lp.objective) c = gauss(gen);
    lp.equality_matrix = a;
    lp.equality_rhs = b;
    const auto res = numkit::solve_lp(lp);
    REQUIRE(res.status != numkit::LpStatus::infeasible);  // x_feas certifies feasibility
    if (res.status != numkit::LpStatus::optimal) continue;
    ++optimal_seen;
    // primal feasibility
    const Vec ax = numkit::matvec(a, res.primal);
    double scale_b = 1.0;
    for (double c : b) scale_b = std::max(scale_b, std::fabs(c));
    for (std::size_t i = 0; i < m; ++i) CHECK(std::fabs(ax[i] - b[i]) <= 1e-8 * scale_b);
    for (double c : res.primal) CHECK(c >= -1e-9);
    // strong duality: c.x == b.y at the optimum
    REQUIRE(res.dual.size() == m);
    const double dual_value = numkit::dot(b, res.dual);
    CHECK(std::fabs(res.value - dual_value) <= 1e-8 * (1.0 + std::fabs(res.value)));
    // dual feasibility: A^T y <= c
    const Vec aty = numkit::matvec_t(a, res.dual);
    for (std::size_t j = 0; j < n; ++j) CHECK(aty[j] <= lp.objective[j] + 1e-8);
  }
  CHECK(optimal_seen > 40);  // most random instances are bounded
}

TEST_CASE("lp: gauge-style queries on a needle-thin box stay tight") {
  // Vertices of a box whose last coordinate is six orders of magnitude
  // thinner than the rest. Queries at a vertex are maximally degenerate and
  // queries across the thin direction give huge optimal values; both used to
  // drive the walk onto noise pivots or stop it short of optimality.
  std::mt19937_64 gen(15);
  Mat thick = random_matrix(gen, 4, 4);
  std::vector<Vec> verts;
  for (int mask = 0; mask < 32; ++mask) {
    Vec v(5, 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
      const double sign = (mask >> i) & 1 ? 1.0 : -1.0;
      for (std::size_t r = 0; r < 4; ++r) v[r] += thick(r, i) * sign;
    }
    v[4] = (mask >> 4) & 1 ? 1e-6 : -1e-6;
    verts.push_back(std::move(v));
  }
  numkit::LinearProgram lp;
  lp.objective.assign(verts.size(), 1.0);
  lp.equality_matrix = Mat(5, verts.size());
  for (std::size_t j = 0; j < verts.size(); ++j)
    for (std::size_t i = 0; i < 5; ++i) lp.equality_matrix(i, j) = verts[j][i];

  auto check_query = [&](const Vec& x) {
    lp.equality_rhs = x;
    const auto res = numkit::solve_lp(lp);
    REQUIRE(res.status == numkit::LpStatus::optimal);
    const double dual_value = numkit::dot(x, res.dual);
    CHECK(std::fabs(res.value - dual_value) <= 1e-9 * (1.0 + std::fabs(res.value)));
    for (const Vec& v : verts) CHECK(numkit::dot(res.dual, v) <= 1.0 + 1e-8);
    return res.value;
  };

  // A vertex decomposes as itself: the minimal coefficient sum is exactly 1.
  for (std::size_t k : {std::size_t{0}, std::size_t{13}, std::size_t{25}, std::size_t{31}})
    CHECK(check_query(verts[k]) == doctest::Approx(1.0).epsilon(1e-9));

  Vec steep(5, 0.0);
  steep[0] = 0.3;
  steep[4] = 0.77;  // forces a coefficient sum near 0.77 / 1e-6
  CHECK(check_query(steep) >= 1e5);
}

TEST_CASE("sym_eigen: rotated diagonal matrix has known spectrum") {
  // R diag(9, 1) R^T for a 30 degree rotation.
  const double c = std::cos(M_PI / 6.0), s = std::sin(M_PI / 6.0);
  SymMatrix m(2);
  m.set(0, 0, 9.0 * c * c + 1.0 * s * s);
  m.set(0, 1, (9.0 - 1.0) * c * s);
  m.set(1, 1, 9.0 * s * s + 1.0 * c * c);
  const auto eig = numkit::sym_eigen(m);
  REQUIRE(eig.eigenvalues.size() == 2);
  CHECK(eig.eigenvalues[0] == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(eig.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
  // leading eigenvector is +-(cos30, sin30); sign convention fixes it to +
  CHECK(eig.eigenvectors(0, 0) == doctest::Approx(c).epsilon(1e-10));
  CHECK(eig.eigenvectors(1, 0) == doctest::Approx(s).epsilon(1e-10));
}

TEST_CASE("sym_eigen: reconstruction and orthonormality on random matrices") {
  std::mt19937_64 gen(15);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + gen() % 8;
    const Mat a = random_matrix(gen, n, n);
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) m.set(i, j, 0.5 * (a(i, j) + a(j, i)));
    const auto eig = numkit::sym_eigen(m);
    double m_norm = 1e-300;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m_norm = std::max(m_norm, std::fabs(m(i, j)));
    // V diag(lambda) V^T == M
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double rec = 0.0;
        for (std::size_t l = 0; l < n; ++l)
          rec += eig.eigenvectors(i, l) * eig.eigenvalues[l] * eig.eigenvectors(j, l);
        CHECK(std::fabs(rec - m(i, j)) <= 1e-9 * m_norm);
      }
    }
    // columns orthonormal
    for (std::size_t c1 = 0; c1 < n; ++c1) {
      for (std::size_t c2 = 0; c2 <= c1; ++c2) {
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d += eig.eigenvectors(i, c1) * eig.eigenvectors(i, c2);
        CHECK(std::fabs(d - (c1 == c2 ? 1.0 : 0.0)) <= 1e-12);
      }
    }
    // descending order
    for (std::size_t l = 1; l < n; ++l) CHECK(eig.eigenvalues[l - 1] >= eig.eigenvalues[l] - 1e-12);
  }
}

TEST_CASE("svd_square: factorization, orthogonality, rank deficiency") {
  std::mt19937_64 gen(16);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + gen() % 7;
    Mat a = random_matrix(gen, n, n);
    if (trial % 5 == 0 && n >= 2) {
      // make it rank deficient: last row = first row
      for (std::size_t j = 0; j < n; ++j) a(n - 1, j) = a(0, j);
    }
    const auto svd = numkit::svd_square(a);
    const double scale = mat_norm(a) + 1e-300;
    for (std::size_t l = 1; l < n; ++l) CHECK(svd.sigma[l - 1] >= svd.sigma[l] - 1e-12 * scale);
    for (double s : svd.sigma) CHECK(s >= -1e-12 * scale);
    if (trial % 5 == 0 && n >= 2) CHECK(svd.sigma[n - 1] <= 1e-9 * scale);
    // U Sigma V^T == A
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double rec = 0.0;
        for (std::size_t l = 0; l < n; ++l) rec += svd.u(i, l) * svd.sigma[l] * svd.v(j, l);
        CHECK(std::fabs(rec - a(i, j)) <= 1e-9 * scale);
      }
    }
    for (const Mat* q : {&svd.u, &svd.v}) {
      for (std::size_t c1 = 0; c1 < n; ++c1) {
        for (std::size_t c2 = 0; c2 <= c1; ++c2) {
          double d = 0.0;
          for (std::size_t i = 0; i < n; ++i) d += (*q)(i, c1) * (*q)(i, c2);
          CHECK(std::fabs(d - (c1 == c2 ? 1.0 : 0.0)) <= 1e-10);
        }
      }
    }
  }
}

TEST_CASE("lp input validation") {
  numkit::LinearProgram lp;
  lp.objective = {1.0};
  lp.equality_matrix = Mat(1, 2);  // mismatched with the objective
  lp.equality_rhs = {1.0};
  CHECK_THROWS_AS((void)numkit::solve_lp(lp), input_error);
  lp.equality_matrix = Mat(1, 1);
  lp.objective = {std::nan("")};
  CHECK_THROWS_AS((void)numkit::solve_lp(lp), input_error);
}
