#include "hypersupport/centering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hsup::centering {

using numkit::Mat;
using numkit::SymMatrix;

namespace detail {

namespace {

// Solves R^T z = b for upper-triangular R (forward substitution).
Vec solve_rt(const Mat& r, const Vec& b) {
  const std::size_t n = r.rows;
  Vec z(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= r(k, i) * z[k];
    if (r(i, i) == 0.0) throw degenerate_input("mvee: rank-deficient point set");
    z[i] = s / r(i, i);
  }
  return z;
}

// Solves L z = b for lower-triangular L.
Vec solve_lower(const Mat& l, const Vec& b) {
  const std::size_t n = l.rows;
  Vec z(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * z[k];
    z[i] = s / l(i, i);
  }
  return z;
}

}  // namespace

MveeFactor mvee_factor(const std::vector<Vec>& points, double eps) {
  if (points.empty()) throw input_error("mvee: no points");
  if (!(eps > 0.0) || eps > 0.1) throw input_error("mvee: eps must be in (0, 0.1]");
  const std::size_t n = points[0].size();
  const std::size_t m = points.size();
  if (m < n + 1) throw degenerate_input("mvee: rank-deficient point set");
  for (const Vec& p : points) {
    if (p.size() != n) throw input_error("mvee: inconsistent point dimensions");
    for (double c : p) {
      if (!std::isfinite(c)) throw input_error("mvee: non-finite coordinate");
    }
  }

  // Precondition by whitening: with R the QR factor of the centered points,
  // the transformed set p_hat = R^{-T}(p - mean) has identity scatter. This
  // keeps every later factorization well conditioned even for axis ratios of
  // 1e6, where working on raw coordinates would square the conditioning.
  Vec mean(n, 0.0);
  for (const Vec& p : points) mean = numkit::vadd(mean, p);
  mean = numkit::vscale(mean, 1.0 / static_cast<double>(m));
  Mat centered(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) centered(i, j) = points[i][j] - mean[j];
  }
  const Mat r = numkit::qr_upper(centered);
  double largest = 0.0;
  for (std::size_t j = 0; j < n; ++j) largest = std::max(largest, std::fabs(r(j, j)));
  for (std::size_t j = 0; j < n; ++j) {
    if (std::fabs(r(j, j)) <= 1e-12 * std::max(largest, 1e-300))
      throw degenerate_input("mvee: rank-deficient point set");
  }

  const std::size_t d = n + 1;  // lifted dimension
  std::vector<Vec> q(m, Vec(d, 1.0));
  for (std::size_t i = 0; i < m; ++i) {
    const Vec z = solve_rt(r, numkit::vsub(points[i], mean));
    for (std::size_t j = 0; j < n; ++j) q[i][j] = z[j];
  }

  // Khachiyan with Wolfe-Atwood away steps on min -log det sum f_i q_i q_i^T.
  // Two-sided stopping: no point violates by more than eps and no support
  // weight undershoots by more than eps.
  Vec f(m, 1.0 / static_cast<double>(m));
  Vec g(m, 0.0);
  Mat lhat;
  const std::size_t max_iterations = 500000;
  std::size_t iter = 0;
  for (;; ++iter) {
    if (iter >= max_iterations) throw internal_error("mvee: iteration cap exceeded");
    SymMatrix mf(d);
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = a; b < d; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          if (f[i] > 0.0) s += f[i] * q[i][a] * q[i][b];
        }
        mf.set(a, b, s);
      }
    }
    if (!numkit::cholesky_lower(mf, lhat)) throw internal_error("mvee: scatter not positive definite");

    std::size_t plus_idx = 0, minus_idx = m;
    double plus_val = -std::numeric_limits<double>::infinity();
    double minus_val = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const Vec z = solve_lower(lhat, q[i]);
      g[i] = numkit::dot(z, z);
      if (g[i] > plus_val) {
        plus_val = g[i];
        plus_idx = i;
      }
      if (f[i] > 0.0 && g[i] < minus_val) {
        minus_val = g[i];
        minus_idx = i;
      }
    }
    const double dd = static_cast<double>(d);
    const double eps_plus = plus_val / dd - 1.0;
    const double eps_minus = minus_idx < m ? 1.0 - minus_val / dd : 0.0;
    if (eps_plus <= eps && eps_minus <= eps) break;

    if (eps_plus >= eps_minus) {
      const double kappa = plus_val;
      const double alpha = (kappa - dd) / (dd * (kappa - 1.0));
      for (std::size_t i = 0; i < m; ++i) f[i] *= (1.0 - alpha);
      f[plus_idx] += alpha;
    } else {
      const double kappa = minus_val;
      double alpha = (kappa - dd) / (dd * (kappa - 1.0));  // negative
      const double floor_alpha = -f[minus_idx] / (1.0 - f[minus_idx]);
      alpha = std::max(alpha, floor_alpha);
      for (std::size_t i = 0; i < m; ++i) f[i] *= (1.0 - alpha);
      f[minus_idx] += alpha;
      if (f[minus_idx] < 1e-18) f[minus_idx] = 0.0;
    }
  }

  // Recover the unlifted ellipsoid. With c = sum f p_hat and
  // Lambda = sum f p_hat p_hat^T - c c^T, every point satisfies
  // (p_hat - c)^T Lambda^{-1} (p_hat - c) = q^T M^{-1} q - 1 <= rho with
  // rho = n + (n+1) eps, so dividing by rho guarantees containment.
  Vec chat(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (f[i] > 0.0) {
      for (std::size_t j = 0; j < n; ++j) chat[j] += f[i] * q[i][j];
    }
  }
  SymMatrix lambda(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (f[i] > 0.0) s += f[i] * q[i][a] * q[i][b];
      }
      lambda.set(a, b, s - chat[a] * chat[b]);
    }
  }
  Mat llam;
  if (!numkit::cholesky_lower(lambda, llam)) throw internal_error("mvee: covariance not positive definite");

  const double rho = static_cast<double>(n) + static_cast<double>(d) * eps;

  MveeFactor out;
  out.rho = rho;
  // center = mean + R^T chat  (undo the whitening).
  out.center = mean;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k <= i; ++k) out.center[i] += r(k, i) * chat[k];
  }
  // G = (1/sqrt(rho)) Lhat^{-1} R^{-T}: columns are Lhat^{-1} applied to the
  // columns of R^{-T}, built by triangular solves only; Q = G^T G is never
  // assembled here.
  out.g = Mat(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    Vec e(n, 0.0);
    e[col] = 1.0;
    const Vec rt_col = solve_rt(r, e);
    const Vec g_col = solve_lower(llam, rt_col);
    for (std::size_t row = 0; row < n; ++row) out.g(row, col) = g_col[row] / std::sqrt(rho);
  }
  return out;
}

}  // namespace detail

Ellipsoid mvee(const std::vector<Vec>& points, double eps) {
  const detail::MveeFactor factor = detail::mvee_factor(points, eps);
  const std::size_t n = factor.center.size();
  Ellipsoid e;
  e.center = factor.center;
  e.shape = SymMatrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += factor.g(k, i) * factor.g(k, j);
      e.shape.set(i, j, s);
    }
  }
  return e;
}

WellCentered well_center(const VPolytope& body, double eps) {
  body::validate(body);
  const detail::MveeFactor factor = detail::mvee_factor(body.vertices, eps);
  const std::size_t n = body.dim;

  // Semi-axes of {|G(x-c)| <= 1} are 1/sigma_i along the right singular
  // vectors of G; the one-sided SVD keeps the long axes (small sigma)
  // accurate even at axis ratio 1e6.
  const numkit::SvdResult svd = numkit::svd_square(factor.g);

  JohnFrame frame;
  frame.translation = factor.center;
  frame.rotation = Mat(n, n);
  frame.semi_axes.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = n - 1 - j;  // reverse: sigma descending -> axes descending
    if (svd.sigma[src] <= 0.0) throw internal_error("well_center: singular ellipsoid factor");
    frame.semi_axes[j] = 1.0 / svd.sigma[src] / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) frame.rotation(i, j) = svd.v(i, src);
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = frame.rotation(i, j);
      if (std::fabs(x) > 1e-12) {
        if (x < 0.0) {
          for (std::size_t rr = 0; rr < n; ++rr) frame.rotation(rr, j) = -frame.rotation(rr, j);
        }
        break;
      }
    }
  }

  WellCentered out;
  out.frame = frame;
  out.frame_body.dim = n;
  out.frame_body.vertices.reserve(body.vertices.size());
  for (const Vec& v : body.vertices) out.frame_body.vertices.push_back(to_frame(frame, v));
  return out;
}

Vec to_frame(const JohnFrame& frame, const Vec& x) {
  return numkit::matvec_t(frame.rotation, numkit::vsub(x, frame.translation));
}

Vec from_frame(const JohnFrame& frame, const Vec& x) {
  return numkit::vadd(numkit::matvec(frame.rotation, x), frame.translation);
}

Hyperplane hyperplane_from_frame(const JohnFrame& frame, const Hyperplane& plane) {
  // {u.x_frame = h} pulls back to {(R u).x = h + (R u).t}; the frame origin's
  // image stays on the <= side because h >= 0, so no sign flip is applied.
  Vec world_normal = numkit::matvec(frame.rotation, plane.normal);
  const double len = numkit::norm(world_normal);
  if (len < 1e-300) throw internal_error("hyperplane_from_frame: zero normal");
  world_normal = numkit::vscale(world_normal, 1.0 / len);
  const double offset = plane.offset / len + numkit::dot(world_normal, frame.translation);
  return Hyperplane{std::move(world_normal), offset};
}

}  // namespace hsup::centering
