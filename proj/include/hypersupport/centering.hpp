#pragma once

#include <cstddef>

#include "hypersupport/body.hpp"
#include "hypersupport/numkit.hpp"

namespace hsup::centering {

using body::Hyperplane;
using body::VPolytope;
using numkit::Mat;
using numkit::SymMatrix;
using numkit::Vec;

// {x : (x - center)^T shape (x - center) <= 1}
struct Ellipsoid {
  Vec center;
  SymMatrix shape;
};

// Affine map x -> rotation^T (x - translation) scaled per axis is captured
// by (translation, rotation, semi_axes): the columns of rotation are the
// ellipsoid axes, semi_axes descending.
struct JohnFrame {
  Vec translation;
  Mat rotation;
  Vec semi_axes;
};

// Minimum-volume enclosing ellipsoid of a full-dimensional point set,
// Khachiyan with Wolfe-Atwood away steps. eps is the relative optimality
// gap; the returned ellipsoid is inflated so it encloses every point.
Ellipsoid mvee(const std::vector<Vec>& points, double eps = 1e-7);

// Body expressed in its John frame: the MVEE becomes the axis-aligned
// ellipsoid with semi-axes a, centered at 0, and E/n is inside the body.
struct WellCentered {
  JohnFrame frame;
  VPolytope frame_body;  // vertices mapped into the frame
  Vec semi_axes() const { return frame.semi_axes; }
};

WellCentered well_center(const VPolytope& body, double eps = 1e-7);

// Coordinate transport between original and frame coordinates.
Vec to_frame(const JohnFrame& frame, const Vec& x);
Vec from_frame(const JohnFrame& frame, const Vec& x);

// Pushes a supporting hyperplane found in frame coordinates back to the
// original coordinates.
Hyperplane hyperplane_from_frame(const JohnFrame& frame, const Hyperplane& plane);

namespace detail {

// Factored MVEE output: the ellipsoid is {x : |g (x - center)|^2 <= 1} with
// q = g^T g. Keeping g (never assembling q) preserves the small semi-axes of
// very thin point sets to full relative accuracy.
struct MveeFactor {
  Vec center;
  Mat g;
  double rho = 0.0;  // inflation applied, = n + (n+1) eps
};

MveeFactor mvee_factor(const std::vector<Vec>& points, double eps);

}  // namespace detail
}  // namespace hsup::centering
