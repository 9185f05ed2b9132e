#include "hypersupport/body.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace hsup::body {

using numkit::LinearProgram;
using numkit::LpResult;
using numkit::LpStatus;
using numkit::Mat;

namespace {

// Gauge linear program: min sum(mu) subject to sum_i mu_i v_i = x, mu >= 0.
// Its optimum is min{t >= 0 : x in t S} and its dual w is a separating
// functional with w . v_i <= 1 for every vertex.
LpResult gauge_lp(const VPolytope& body, const Vec& x) {
  const std::size_t n = body.dim;
  const std::size_t m = body.vertices.size();
  LinearProgram lp;
  lp.objective.assign(m, 1.0);
  lp.equality_matrix = Mat(n, m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) lp.equality_matrix(i, j) = body.vertices[j][i];
  }
  lp.equality_rhs = x;
  return numkit::solve_lp(lp);
}

}  // namespace

Hyperplane make_hyperplane(Vec normal, double offset) {
  const double len = numkit::norm(normal);
  if (len < 1e-300) throw input_error("make_hyperplane: zero normal");
  for (double& c : normal) c /= len;
  offset /= len;
  if (offset < 0.0) {
    offset = -offset;
    for (double& c : normal) c = -c;
  }
  return Hyperplane{std::move(normal), offset};
}

void validate(const VPolytope& body) {
  if (body.dim == 0) throw input_error("body: dimension must be positive");
  if (body.vertices.size() < body.dim + 1)
    throw degenerate_input("body: needs at least dim+1 vertices");
  for (const Vec& v : body.vertices) {
    if (v.size() != body.dim) throw input_error("body: vertex dimension mismatch");
    for (double c : v) {
      if (!std::isfinite(c)) throw input_error("body: non-finite vertex coordinate");
    }
  }
  // Full affine dimension: the centered vertex matrix must have rank dim.
  const std::size_t m = body.vertices.size();
  Mat diffs(m - 1, body.dim);
  for (std::size_t i = 1; i < m; ++i) {
    for (std::size_t j = 0; j < body.dim; ++j)
      diffs(i - 1, j) = body.vertices[i][j] - body.vertices[0][j];
  }
  const Mat r = numkit::qr_upper(diffs);
  double largest = 0.0;
  for (std::size_t j = 0; j < body.dim; ++j) largest = std::max(largest, std::fabs(r(j, j)));
  for (std::size_t j = 0; j < body.dim; ++j) {
    if (std::fabs(r(j, j)) <= 1e-10 * std::max(largest, 1e-300))
      throw degenerate_input("body: vertices are not full-dimensional");
  }
}

void assert_origin_interior(const VPolytope& body) {
  // 0 is interior iff the vertex cone covers all of space, i.e. the gauge LP
  // is feasible in all 2n signed axis directions.
  for (std::size_t i = 0; i < body.dim; ++i) {
    for (double sgn : {1.0, -1.0}) {
      Vec e(body.dim, 0.0);
      e[i] = sgn;
      if (gauge_lp(body, e).status != LpStatus::optimal)
        throw input_error("body: origin is not interior");
    }
  }
}

VPolytope parse_body_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw input_error(std::string("body json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("dim") || !j.contains("vertices"))
    throw input_error("body json: expected {\"dim\": n, \"vertices\": [[...]]}");
  VPolytope body;
  try {
    body.dim = j.at("dim").get<std::size_t>();
    for (const auto& row : j.at("vertices")) body.vertices.push_back(row.get<Vec>());
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("body json: ") + e.what());
  }
  validate(body);
  return body;
}

VPolytope read_body_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open body file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_body_json(buf.str());
}

std::string body_to_json(const VPolytope& body) {
  nlohmann::json j;
  j["dim"] = body.dim;
  j["vertices"] = body.vertices;
  return j.dump();
}

double gauge(const VPolytope& body, const Vec& x) {
  if (x.size() != body.dim) throw input_error("gauge: dimension mismatch");
  if (numkit::norm_inf(x) == 0.0) return 0.0;
  const LpResult res = gauge_lp(body, x);
  if (res.status != LpStatus::optimal)
    throw internal_error("gauge: LP not optimal (origin interior violated?)");
  return res.value;
}

double support_value(const VPolytope& body, const Vec& u) {
  if (u.size() != body.dim) throw input_error("support_value: dimension mismatch");
  if (numkit::norm_inf(u) == 0.0) throw input_error("support_value: zero direction");
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec& v : body.vertices) best = std::max(best, numkit::dot(u, v));
  return best;
}

Vec ray_boundary(const VPolytope& body, const Vec& y) {
  if (numkit::norm_inf(y) == 0.0) throw input_error("ray_boundary: zero vector");
  const double g = gauge(body, y);
  if (g < 1e-300) throw internal_error("ray_boundary: zero gauge for nonzero point");
  return numkit::vscale(y, 1.0 / g);
}

Hyperplane supporting_hyperplane_at(const VPolytope& body, const Vec& p) {
  const LpResult res = gauge_lp(body, p);
  if (res.status != LpStatus::optimal) throw internal_error("supporting_hyperplane_at: gauge LP failed");
  // Loose on purpose: on a needle-thin body a boundary point constructed by
  // any outside arithmetic carries round-off amplified by the aspect ratio,
  // so its recomputed gauge can drift noticeably from 1. Points that far off
  // the boundary still pierce the same face along their ray, and the dual is
  // invariant under that ray scaling; the check only rejects clear misuse.
  if (std::fabs(res.value - 1.0) > 1e-3)
    throw input_error("supporting_hyperplane_at: point is not on the boundary (gauge " +
                      std::to_string(res.value) + ")");
  // The dual w satisfies w.v <= 1 on all vertices and w.p = 1; normalized it
  // is a supporting normal at p. The offset is re-derived from the support
  // function so the support identity holds to round-off.
  const Vec& w = res.dual;
  const double len = numkit::norm(w);
  if (len < 1e-300) throw internal_error("supporting_hyperplane_at: degenerate dual");
  const Vec u = numkit::vscale(w, 1.0 / len);
  return Hyperplane{u, support_value(body, u)};
}

double chord_diameter(const VPolytope& body, const Vec& u) {
  const double len = numkit::norm(u);
  if (len < 1e-300) throw input_error("chord_diameter: zero direction");
  const Vec d = numkit::vscale(u, 1.0 / len);
  const double gp = gauge(body, d);
  const double gm = gauge(body, numkit::vscale(d, -1.0));
  if (gp < 1e-300 || gm < 1e-300) throw internal_error("chord_diameter: unbounded chord");
  return 1.0 / gp + 1.0 / gm;
}

bool contains(const VPolytope& body, const Vec& x, double tol) {
  if (x.size() != body.dim) throw input_error("contains: dimension mismatch");
  const std::size_t n = body.dim;
  const std::size_t m = body.vertices.size();
  LinearProgram lp;
  lp.objective.assign(m, 0.0);
  lp.equality_matrix = Mat(n + 1, m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) lp.equality_matrix(i, j) = body.vertices[j][i];
    lp.equality_matrix(n, j) = 1.0;
  }
  lp.equality_rhs = x;
  lp.equality_rhs.push_back(1.0);
  lp.tolerance = std::max(tol, 1e-12);
  return numkit::solve_lp(lp).status == LpStatus::optimal;
}

}  // namespace hsup::body
