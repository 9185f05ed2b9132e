#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hypersupport/numkit.hpp"

namespace hsup::body {

using numkit::Vec;

// Convex body given as the hull of its vertices. All queries below require
// the origin to lie in the interior; validate()/assert_origin_interior()
// enforce that once, the query functions then assume it.
struct VPolytope {
  std::size_t dim = 0;
  std::vector<Vec> vertices;
};

// Halfspace {x : normal . x <= offset} with |normal| = 1 and offset > 0, so
// the origin side is fixed and hyperplanes compare canonically.
struct Hyperplane {
  Vec normal;
  double offset = 0.0;
};

// Normalizes and, if needed, flips sign so the offset is nonnegative.
Hyperplane make_hyperplane(Vec normal, double offset);

// Structural checks: consistent dimensions, finite coordinates, at least
// dim+1 vertices, full affine dimension. Throws degenerate_input/input_error.
void validate(const VPolytope& body);

// Throws input_error unless 0 is strictly interior.
void assert_origin_interior(const VPolytope& body);

VPolytope parse_body_json(const std::string& text);
VPolytope read_body_file(const std::string& path);
std::string body_to_json(const VPolytope& body);

// Minkowski gauge ||x||_S = min {t >= 0 : x in tS}. Exact via LP on the
// vertex hull. gauge(0) = 0.
double gauge(const VPolytope& body, const Vec& x);

// h_S(u) = max_{v vertex} u . v.
double support_value(const VPolytope& body, const Vec& u);

// Intersection of the ray {t x : t >= 0} with the boundary; requires x != 0.
Vec ray_boundary(const VPolytope& body, const Vec& x);

// A supporting hyperplane at a boundary point p (gauge(p) = 1 within 1e-7).
// The normal comes from the gauge LP's dual; the offset is re-derived as
// support_value(normal) so the support identity holds to round-off.
Hyperplane supporting_hyperplane_at(const VPolytope& body, const Vec& p);

// Length of the chord of S through 0 in direction u:
// 1/gauge(u) + 1/gauge(-u).
double chord_diameter(const VPolytope& body, const Vec& u);

// Hull membership within absolute tolerance tol (feasibility LP).
bool contains(const VPolytope& body, const Vec& x, double tol = 1e-9);

}  // namespace hsup::body
