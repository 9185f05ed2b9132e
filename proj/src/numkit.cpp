#include "hypersupport/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace hsup::numkit {

namespace {

constexpr std::size_t kMaxSimplexIterations = 100000;

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

SymMatrix SymMatrix::identity(std::size_t n) {
  SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1.0);
  return m;
}

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw input_error("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::fabs(x));
  return m;
}

Vec vadd(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw input_error("vadd: size mismatch");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vec vsub(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw input_error("vsub: size mismatch");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vec vscale(const Vec& a, double t) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * t;
  return r;
}

Vec matvec(const Mat& m, const Vec& x) {
  if (m.cols != x.size()) throw input_error("matvec: size mismatch");
  Vec r(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) s += m(i, j) * x[j];
    r[i] = s;
  }
  return r;
}

Vec matvec_t(const Mat& m, const Vec& x) {
  if (m.rows != x.size()) throw input_error("matvec_t: size mismatch");
  Vec r(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) r[j] += m(i, j) * x[i];
  }
  return r;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols != b.rows) throw input_error("matmul: size mismatch");
  Mat r(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) r(i, j) += aik * b(k, j);
    }
  }
  return r;
}

Mat transpose(const Mat& m) {
  Mat r(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) r(j, i) = m(i, j);
  }
  return r;
}

bool solve_dense(Mat a, Vec b, Vec& x) {
  if (a.rows != a.cols || a.rows != b.size()) throw input_error("solve_dense: size mismatch");
  const std::size_t n = a.rows;
  double scale = 0.0;
  for (double v : a.data) scale = std::max(scale, std::fabs(v));
  const double tiny = 1e-13 * std::max(scale, 1.0);

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::fabs(a(perm[col], col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::fabs(a(perm[r], col));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best <= tiny) return false;
    std::swap(perm[col], perm[piv]);
    const std::size_t prow = perm[col];
    const double pval = a(prow, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const std::size_t row = perm[r];
      const double f = a(row, col) / pval;
      if (f == 0.0) continue;
      a(row, col) = 0.0;
      for (std::size_t c = col + 1; c < n; ++c) a(row, c) -= f * a(prow, c);
      b[row] -= f * b[prow];
    }
  }

  x.assign(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    const std::size_t row = perm[ii];
    double s = b[row];
    for (std::size_t c = ii + 1; c < n; ++c) s -= a(row, c) * x[c];
    x[ii] = s / a(row, ii);
  }
  return true;
}

Mat qr_upper(const Mat& a) {
  if (a.rows < a.cols) throw input_error("qr_upper: needs rows >= cols");
  Mat w = a;
  const std::size_t m = w.rows, n = w.cols;
  for (std::size_t j = 0; j < n; ++j) {
    double nrm = 0.0;
    for (std::size_t i = j; i < m; ++i) nrm += w(i, j) * w(i, j);
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) continue;
    // Householder vector v = x + sign(x_j) |x| e_j, stored in place below row j.
    const double alpha = (w(j, j) >= 0.0) ? nrm : -nrm;
    std::vector<double> v(m - j);
    v[0] = w(j, j) + alpha;
    for (std::size_t i = j + 1; i < m; ++i) v[i - j] = w(i, j);
    double vtv = 0.0;
    for (double t : v) vtv += t * t;
    if (vtv == 0.0) continue;
    for (std::size_t c = j; c < n; ++c) {
      double s = 0.0;
      for (std::size_t i = j; i < m; ++i) s += v[i - j] * w(i, c);
      const double f = 2.0 * s / vtv;
      for (std::size_t i = j; i < m; ++i) w(i, c) -= f * v[i - j];
    }
  }
  Mat r(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) r(i, j) = w(i, j);
  }
  return r;
}

bool cholesky_lower(const SymMatrix& m, Mat& lower) {
  const std::size_t n = m.order;
  lower = Mat(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
      if (i == j) {
        if (s <= 0.0) return false;
        lower(i, i) = std::sqrt(s);
      } else {
        lower(i, j) = s / lower(j, j);
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Simplex
// ---------------------------------------------------------------------------

namespace {

// Solves a x = b with two passes of iterative refinement. Degenerate vertex
// queries can leave the walk at a basis whose condition number eats six or
// more digits in a single LU solve; refinement recovers them as long as
// eps * cond stays below one, which holds comfortably for this geometry.
bool solve_refined(const Mat& a, const Vec& b, Vec& x) {
  if (!solve_dense(a, b, x)) return false;
  const std::size_t m = b.size();
  for (int pass = 0; pass < 2; ++pass) {
    Vec r(m);
    for (std::size_t i = 0; i < m; ++i) {
      double acc = b[i];
      for (std::size_t j = 0; j < m; ++j) acc -= a(i, j) * x[j];
      r[i] = acc;
    }
    Vec dx;
    if (!solve_dense(a, r, dx)) return false;
    for (std::size_t j = 0; j < m; ++j) x[j] += dx[j];
  }
  return true;
}

// Tableau-free revised simplex over columns 0..total_cols-1 of `cols`, with
// costs `cost`, basis `basis` (one variable per row), current rhs `xb`.
// Artificial columns (index >= art_start) may never enter; when basic AT ZERO
// they are pushed out at zero ratio so they cannot grow back. Returns false
// on unboundedness.
struct SimplexCore {
  const std::vector<Vec>& cols;  // column-major constraint matrix
  const Vec& cost;
  const Vec& rhs0;        // right-hand side the basic values are resolved from
  std::size_t art_start;  // first artificial column index (== #cols if none)
  double tol;
  double zero_tol;  // basic values at or below this count as zero

  std::vector<std::size_t>& basis;
  Vec& xb;

  bool run(Vec& multipliers) {
    const std::size_t m = xb.size();
    for (std::size_t iter = 0; iter < kMaxSimplexIterations; ++iter) {
      Mat b_mat(m, m);
      for (std::size_t c = 0; c < m; ++c) {
        const Vec& col = cols[basis[c]];
        for (std::size_t r = 0; r < m; ++r) b_mat(r, c) = col[r];
      }
      // Basic values are re-derived from the basis every iteration rather
      // than updated in place: the incremental update accumulates exactly
      // the degenerate-pivot noise the refined solve removes.
      if (!solve_refined(b_mat, rhs0, xb)) throw internal_error("simplex: singular basis");
      Vec cb(m);
      for (std::size_t c = 0; c < m; ++c) cb[c] = cost[basis[c]];
      Vec w;
      if (!solve_refined(transpose(b_mat), cb, w)) throw internal_error("simplex: singular basis");

      // Pricing and pivot selection are fused: columns are priced in Bland
      // order, but an improving column can still be unusable when every
      // blocking entry of its direction is round-off noise, in which case the
      // scan moves on. The reduced-cost threshold is relative to the pricing
      // scale; with large multipliers an absolute cutoff lets rounding noise
      // pose as improvement and the walk stalls, swapping tied columns
      // forever.
      bool pivoted = false;
      for (std::size_t j = 0; j < art_start && !pivoted; ++j) {
        bool is_basic = false;
        for (std::size_t c = 0; c < m; ++c) {
          if (basis[c] == j) {
            is_basic = true;
            break;
          }
        }
        if (is_basic) continue;
        double reduced = cost[j];
        double price = std::fabs(cost[j]);
        for (std::size_t i = 0; i < m; ++i) {
          const double term = w[i] * cols[j][i];
          reduced -= term;
          price += std::fabs(term);
        }
        if (!(reduced < -tol * (1.0 + price))) continue;

        Vec t;
        if (!solve_refined(b_mat, cols[j], t)) throw internal_error("simplex: singular basis");
        const double t_scale = norm_inf(t);

        // A basic artificial sitting at zero leaves right now at step zero;
        // a zero step keeps feasibility on either pivot sign and the
        // artificial can never grow back. Artificials at positive values are
        // ordinary basics here; evicting one early would discard the
        // residual it carries. The eviction pivot must carry real weight
        // next to the largest entry of the direction, or the swap would
        // leave the next basis numerically singular; a featherweight pivot
        // is accepted only when the ratio test below has no row at all.
        std::size_t evict = m;
        for (std::size_t i = 0; i < m; ++i) {
          if (basis[i] < art_start || std::fabs(t[i]) <= tol || xb[i] > zero_tol) continue;
          if (evict == m || std::fabs(t[i]) > std::fabs(t[evict])) evict = i;
        }
        std::size_t leave = m;
        double step = 0.0;
        if (evict != m && std::fabs(t[evict]) >= 1e-2 * t_scale) {
          leave = evict;
        } else {
          // Two-pass ratio test. Pass 1 finds the largest step every row
          // tolerates with a small feasibility slack; pass 2 pivots on the
          // largest entry within that bound. Picking by ratio alone can land
          // on a near-zero pivot when degenerate rows tie, which leaves the
          // next basis singular.
          const double feas = 1e-9 * (1.0 + norm_inf(xb));
          double theta = std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < m; ++i) {
            if (t[i] > tol) theta = std::min(theta, (std::max(xb[i], 0.0) + feas) / t[i]);
          }
          if (!std::isfinite(theta)) {
            if (evict != m) {
              leave = evict;  // last resort: weak eviction over a false unbounded
            } else if (reduced < -1e-5 * (1.0 + price)) {
              return false;  // decisively improving and unblocked: unbounded
            } else {
              continue;  // noise-level improvement with no blocking row
            }
          } else {
            double t_best = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
              if (t[i] > tol && std::max(xb[i], 0.0) / t[i] <= theta) t_best = std::max(t_best, t[i]);
            }
            // If the strongest blocking entry is negligible against the
            // direction itself, the blocking structure is round-off fiction
            // and stepping on it would blow the basic values up; the column
            // is not a usable direction.
            if (t_best < 1e-6 * t_scale) continue;
            for (std::size_t i = 0; i < m; ++i) {
              if (t[i] <= tol) continue;
              if (std::max(xb[i], 0.0) / t[i] > theta) continue;
              if (leave == m || t[i] > t[leave] ||
                  (t[i] == t[leave] && basis[i] < basis[leave]))
                leave = i;
            }
            step = std::max(xb[leave], 0.0) / t[leave];
          }
        }

        for (std::size_t i = 0; i < m; ++i) xb[i] -= step * t[i];
        xb[leave] = step;
        basis[leave] = j;
        pivoted = true;
      }
      if (!pivoted) {
        multipliers = w;
        return true;
      }
    }
    throw internal_error("simplex: iteration cap exceeded");
  }
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
  const std::size_t m = lp.equality_matrix.rows;
  const std::size_t n_orig = lp.objective.size();
  if (lp.equality_matrix.cols != n_orig || lp.equality_rhs.size() != m)
    throw input_error("solve_lp: inconsistent dimensions");
  if (!(lp.tolerance > 0.0)) throw input_error("solve_lp: tolerance must be positive");
  if (!all_finite(lp.objective) || !all_finite(lp.equality_matrix.data) ||
      !all_finite(lp.equality_rhs))
    throw input_error("solve_lp: non-finite input");

  // Free variables are split as x = x+ - x-.
  const std::size_t n = lp.nonneg ? n_orig : 2 * n_orig;
  const double tol = lp.tolerance;

  // Row equilibration, powers of two so the scaling is exact. Thin geometry
  // reaches this solver as rows orders of magnitude lighter than the rest,
  // and without rescaling those rows the basis conditioning follows the
  // aspect ratio of the body instead of the difficulty of the program.
  std::vector<double> row_scale(m, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    double mx = 0.0;
    for (std::size_t j = 0; j < n_orig; ++j)
      mx = std::max(mx, std::fabs(lp.equality_matrix(i, j)));
    if (mx > 0.0) row_scale[i] = std::exp2(-std::round(std::log2(mx)));
  }

  std::vector<double> flip(m, 1.0);
  Vec rhs = lp.equality_rhs;
  for (std::size_t i = 0; i < m; ++i) {
    rhs[i] *= row_scale[i];
    if (rhs[i] < 0.0) {
      rhs[i] = -rhs[i];
      flip[i] = -1.0;
    }
  }

  std::vector<Vec> cols(n + m, Vec(m, 0.0));
  for (std::size_t j = 0; j < n_orig; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      const double v = flip[i] * row_scale[i] * lp.equality_matrix(i, j);
      cols[j][i] = v;
      if (!lp.nonneg) cols[n_orig + j][i] = -v;
    }
  }
  for (std::size_t i = 0; i < m; ++i) cols[n + i][i] = 1.0;

  Vec phase1_cost(n + m, 0.0);
  for (std::size_t i = 0; i < m; ++i) phase1_cost[n + i] = 1.0;

  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;
  Vec xb = rhs;

  LpResult result;

  const double zero_tol = tol * (1.0 + norm_inf(rhs));

  Vec w_unused;
  SimplexCore phase1{cols, phase1_cost, rhs, n, tol, zero_tol, basis, xb};
  if (!phase1.run(w_unused)) throw internal_error("solve_lp: phase 1 unbounded");
  double infeas = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] >= n) infeas += std::max(xb[i], 0.0);
  }
  if (infeas > zero_tol) {
    result.status = LpStatus::infeasible;
    return result;
  }

  Vec phase2_cost(n + m, 0.0);
  for (std::size_t j = 0; j < n_orig; ++j) {
    phase2_cost[j] = lp.objective[j];
    if (!lp.nonneg) phase2_cost[n_orig + j] = -lp.objective[j];
  }

  Vec w;
  SimplexCore phase2{cols, phase2_cost, rhs, n, tol, zero_tol, basis, xb};
  if (!phase2.run(w)) {
    result.status = LpStatus::unbounded;
    return result;
  }

  Vec full(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) full[basis[i]] = xb[i];
  }
  result.primal.assign(n_orig, 0.0);
  for (std::size_t j = 0; j < n_orig; ++j)
    result.primal[j] = lp.nonneg ? full[j] : full[j] - full[n_orig + j];
  result.dual.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) result.dual[i] = flip[i] * row_scale[i] * w[i];
  result.value = dot(lp.objective, result.primal);
  result.status = LpStatus::optimal;
  return result;
}

// ---------------------------------------------------------------------------
// Eigen / SVD
// ---------------------------------------------------------------------------

namespace {

void sign_normalize_column(Mat& v, std::size_t j) {
  for (std::size_t i = 0; i < v.rows; ++i) {
    const double x = v(i, j);
    if (std::fabs(x) > 1e-12) {
      if (x < 0.0) {
        for (std::size_t r = 0; r < v.rows; ++r) v(r, j) = -v(r, j);
      }
      return;
    }
  }
}

}  // namespace

EigenResult sym_eigen(const SymMatrix& m) {
  const std::size_t n = m.order;
  if (!all_finite(m.entries)) throw input_error("sym_eigen: non-finite input");
  Mat a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = m(i, j);
  Mat v = Mat::identity(n);

  double fro = 0.0;
  for (double x : a.data) fro += x * x;
  fro = std::sqrt(fro);
  const double threshold = 1e-14 * std::max(fro, 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::fabs(a(p, q)));
    if (off <= threshold) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= threshold) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

  EigenResult res;
  res.eigenvalues.resize(n);
  res.eigenvectors = Mat(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    res.eigenvalues[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) res.eigenvectors(i, j) = v(i, order[j]);
    sign_normalize_column(res.eigenvectors, j);
  }
  return res;
}

SvdResult svd_square(const Mat& a) {
  if (a.rows != a.cols) throw input_error("svd_square: matrix must be square");
  if (!all_finite(a.data)) throw input_error("svd_square: non-finite input");
  const std::size_t n = a.rows;
  Mat w = a;
  Mat v = Mat::identity(n);

  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          app += w(i, p) * w(i, p);
          aqq += w(i, q) * w(i, q);
          apq += w(i, p) * w(i, q);
        }
        if (std::fabs(apq) <= 1e-15 * std::sqrt(app * aqq) || apq == 0.0) continue;
        rotated = true;
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double wip = w(i, p), wiq = w(i, q);
          w(i, p) = c * wip - s * wiq;
          w(i, q) = s * wip + c * wiq;
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
    if (!rotated) break;
  }

  SvdResult res;
  res.sigma.resize(n);
  res.u = Mat(n, n);
  res.v = Mat(n, n);
  std::vector<std::size_t> order(n);
  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w(i, j) * w(i, j);
    norms[j] = std::sqrt(s);
    order[j] = j;
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    res.sigma[j] = norms[src];
    for (std::size_t i = 0; i < n; ++i) {
      res.u(i, j) = norms[src] > 0.0 ? w(i, src) / norms[src] : 0.0;
      res.v(i, j) = v(i, src);
    }
  }

  // Near-null columns of w are pure roundoff, so their normalized directions
  // need not be orthogonal to the rest. Rebuild U by Gram-Schmidt in
  // descending sigma order, completing the basis wherever a column collapses.
  // The columns this replaces carry sigma at the cancellation floor, so the
  // factorization itself is unaffected.
  for (std::size_t j = 0; j < n; ++j) {
    Vec col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = res.u(i, j);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d += res.u(i, k) * col[i];
        for (std::size_t i = 0; i < n; ++i) col[i] -= d * res.u(i, k);
      }
    }
    double nrm = norm(col);
    if (nrm < 0.5) {
      // pick the coordinate axis least covered by the columns placed so far
      std::size_t axis = 0;
      double best_resid = -1.0;
      for (std::size_t cand = 0; cand < n; ++cand) {
        double covered = 0.0;
        for (std::size_t k = 0; k < j; ++k) covered += res.u(cand, k) * res.u(cand, k);
        if (1.0 - covered > best_resid) {
          best_resid = 1.0 - covered;
          axis = cand;
        }
      }
      col.assign(n, 0.0);
      col[axis] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < j; ++k) {
          double d = 0.0;
          for (std::size_t i = 0; i < n; ++i) d += res.u(i, k) * col[i];
          for (std::size_t i = 0; i < n; ++i) col[i] -= d * res.u(i, k);
        }
      }
      nrm = norm(col);
    }
    for (std::size_t i = 0; i < n; ++i) res.u(i, j) = col[i] / nrm;
  }
  return res;
}

}  // namespace hsup::numkit
