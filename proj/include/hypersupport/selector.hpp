#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypersupport/body.hpp"
#include "hypersupport/numkit.hpp"

namespace hsup::selector {

using body::Hyperplane;
using body::VPolytope;
using numkit::Vec;

// Depth schedules gamma_i(s) = s^(1/2^i) and delta_i(s) = (2i-1) s^(1/2^(i-1)),
// plus the constants they roll up into. They satisfy delta_1 = s and
// delta_i + 2 gamma_i <= delta_{i+1} for 0 <= s <= s0 < 1, which is what the
// recursive bound accounting consumes.
struct Schedule {
  std::size_t n = 0;
  double s = 0.0;
  double s0 = 0.0;
  double c0 = 0.0;         // (1 + s0^(1/2^n)) / (1 - s0^(1/2^n))
  double c_theorem = 0.0;  // n^(3/2) (n - 1/2) c0^(n-1)

  double gamma(std::size_t i) const;
  double delta(std::size_t i) const;
};

// Requires 0 <= s <= s0 < 1 and n >= 1.
Schedule make_schedule(std::size_t n, double s, double s0);

// Axis-aligned box {|x_i| <= half_widths[i]} at recursion level k. At level n
// the half-widths are n*a; each descent drops the last one and scales the
// rest by c0.
struct BoxK {
  std::size_t k = 0;
  Vec half_widths;
};

// Signed embedding of the current local axes into the ambient frame axes:
// local axis i is ambient axis[i] with orientation sign[i]. Descents only
// ever swap a local axis with the current last one and flip its sign, so the
// record stays exact.
struct SignedPerm {
  std::vector<std::size_t> axis;
  std::vector<int> sign;

  static SignedPerm identity(std::size_t n);
  void swap_axes(std::size_t i, std::size_t j);
  void flip(std::size_t i);
};

// Embeds a level-k local vector into ambient coordinates (dropped axes get 0).
Vec lift_vector(const SignedPerm& perm, const Vec& local, std::size_t ambient_dim);

// One live recursion level, in local (permuted) coordinates:
//   plane   {x : normal . x = offset} with C holding for its ambient lift,
//   p       the point the plane touches,
//   y       the projected query point, on the segment [0, p],
//   box     the certified bounding box of the current slice.
struct RecursionState {
  std::size_t k = 0;
  Vec p;
  Vec y;
  Hyperplane plane;
  BoxK box;
  SignedPerm perm;
};

// Residuals of the three per-level conditions, kept in the trace so a
// violation is debuggable without rerunning. All are scaled by
// max(1, h, |p|); pass means every residual is within 1e-8 and the depth
// budget holds.
struct AbcCheck {
  double a_plane = 0.0;    // |normal . p - offset|
  double a_segment = 0.0;  // distance of y from the segment [0, p]
  double a_box = 0.0;      // how far p or y pokes out of the box
  double b_value = 0.0;    // (offset - normal . y) / offset
  double b_bound = 0.0;    // delta at this depth
  double c_excess = 0.0;   // support of the body beyond the lifted plane
  bool pass = false;
};

// What one level of the algorithm decided. case_tag is "I" (favorable exit),
// "II" (descent), or "terminal_k1".
struct StepRecord {
  std::size_t k = 0;
  std::string case_tag;
  double favorable_ratio = 0.0;  // box chord over 2h, compared against gamma
  double threshold = 0.0;        // the gamma it was compared with (0 at k=1)
  Vec r;                         // closest point of the plane to 0, = h u
  Vec r_plus;                    // where segment [0, r] leaves the box
  std::size_t face_index = 0;    // exit-face axis (local, before the swap)
  Vec q_plus, q_zero, q_minus;   // the slicing line's hits on x_k = +b, 0, -b
  double alpha = 0.0;            // l_k cap Q_k^- = alpha p + beta e_k
  double beta = 0.0;
  double lambda_diag = 0.0;      // diagnostic dilation of r under the descent
  bool perturbed = false;        // degeneracy fallback fired at this step
  AbcCheck abc;                  // checked on the state this step produced
};

struct SelectionFinal {
  Hyperplane hyperplane_frame;
  double s = 0.0;
  double ratio = 0.0;       // dist(y, P) / chord_diameter(normal)
  double bound = 0.0;       // c_theorem * s^(1/2^(n-1))
  double exit_bound = 0.0;  // sharper per-exit-level cap, <= bound
  std::size_t depth = 0;    // number of Case II descents
  std::size_t exit_level = 0;
  std::string case_terminated;  // "I" or "terminal_k1"
};

struct SelectionTrace {
  std::vector<StepRecord> steps;
  SelectionFinal final;
};

std::string trace_to_json(const SelectionTrace& trace);

// A claimed-impossible condition failed at runtime; carries the partial
// trace for post-mortems.
struct invariant_violation : std::runtime_error {
  SelectionTrace trace;
  invariant_violation(const std::string& what, SelectionTrace t)
      : std::runtime_error(what), trace(std::move(t)) {}
};

// Half the box chord along the plane normal, over the plane offset:
// min_i(w_i/|u_i|) / h. The favorable case is this >= gamma.
double favorable_ratio(const Hyperplane& plane, const BoxK& box);

// Entry at level n: p = boundary hit of the ray through y, plane = tangent
// there, box = n*a. Returns done when the favorable case already holds at
// level n (or immediately for n = 1); otherwise the state to descend from.
struct InitialResult {
  std::optional<RecursionState> state;
  std::optional<Hyperplane> done;
  StepRecord record;
};

InitialResult initial_step(const VPolytope& frame_body, const Vec& a, const Vec& y,
                           const Schedule& schedule);

// One dichotomy evaluation at level k >= 2. Favorable: next is empty, the
// caller lifts the current plane. Unfavorable: builds the level k-1 state
// (exit face, signed swap, slice at the negative face, re-tilted plane
// through the projected touch point, box scaled by c0) and re-checks the
// produced state's conditions against frame_body, throwing
// invariant_violation if any fails.
struct DescendResult {
  std::optional<RecursionState> next;
  StepRecord record;
};

DescendResult descend_step(const RecursionState& state, const Schedule& schedule,
                           const VPolytope& frame_body);

// Lifts a local supporting plane to the ambient frame: embeds the normal
// through the permutation and re-derives the offset from the support
// function, which translates the plane onto the body.
Hyperplane lift_to_support(const Hyperplane& plane_k, const SignedPerm& perm,
                           const VPolytope& frame_body);

struct Selection {
  Hyperplane plane_frame;
  SelectionTrace trace;
};

// Full pipeline: schedule from s = 1 - gauge(y), initial step, descents
// until a favorable exit or level 1, lift, measured ratio, certified bounds.
Selection select_hyperplane(const VPolytope& frame_body, const Vec& a, const Vec& y, double s0);

namespace detail {

struct ExitFace {
  std::size_t index = 0;
  double stretch = 0.0;  // max_i |r_i|/w_i; > 1 whenever the plane is unfavorable
};

// Face of the box the segment [0, r] exits through (smallest index on ties).
ExitFace exit_face(const Vec& r, const Vec& half_widths);

struct Slice {
  Vec u_lower;
  double h_lower = 0.0;
};

// Intersects {u . x = h} with {x_k = -b} and drops the last coordinate.
// Empty when u is (numerically) parallel to the slice plane.
std::optional<Slice> slice_hyperplane(const Vec& u, double h, double b);

AbcCheck check_abc(const RecursionState& state, const Schedule& schedule,
                   const VPolytope& frame_body);

}  // namespace detail
}  // namespace hsup::selector
