#include "hypersupport/selector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "json.hpp"

namespace hsup::selector {

using numkit::dot;
using numkit::norm;
using numkit::vscale;
using numkit::vsub;

namespace {

constexpr double kAbcTol = 1e-8;
constexpr double kDegenerate = 1e-12;
constexpr double kPerturbAngle = 1e-10;

double pow_half(double s, std::size_t i) {
  // s^(1/2^i); exact 0 for s = 0.
  return std::pow(s, std::ldexp(1.0, -static_cast<int>(i)));
}

double state_scale(double h, const Vec& p) { return std::max({1.0, h, norm(p)}); }

// Rotates coordinates 0 and k-1 of v by the fixed perturbation angle.
void rotate_first_last(Vec& v, std::size_t k) {
  const double c = std::cos(kPerturbAngle), s = std::sin(kPerturbAngle);
  const double a = v[0], b = v[k - 1];
  v[0] = c * a - s * b;
  v[k - 1] = s * a + c * b;
}

}  // namespace

double Schedule::gamma(std::size_t i) const { return pow_half(s, i); }

double Schedule::delta(std::size_t i) const {
  return (2.0 * static_cast<double>(i) - 1.0) * pow_half(s, i - 1);
}

Schedule make_schedule(std::size_t n, double s, double s0) {
  if (n == 0) throw input_error("schedule: n must be >= 1");
  if (!(s0 > 0.0) || !(s0 < 1.0)) throw input_error("schedule: s0 must be in (0,1)");
  if (!(s >= 0.0) || s > s0) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "schedule: s must be in [0, s0]; s = %.17g, s0 = %.17g", s, s0);
    throw input_error(buf);
  }
  Schedule sch;
  sch.n = n;
  sch.s = s;
  sch.s0 = s0;
  const double root = pow_half(s0, n);
  sch.c0 = (1.0 + root) / (1.0 - root);
  sch.c_theorem = std::pow(static_cast<double>(n), 1.5) * (static_cast<double>(n) - 0.5) *
                  std::pow(sch.c0, static_cast<double>(n - 1));
  return sch;
}

SignedPerm SignedPerm::identity(std::size_t n) {
  SignedPerm p;
  p.axis.resize(n);
  p.sign.assign(n, 1);
  for (std::size_t i = 0; i < n; ++i) p.axis[i] = i;
  return p;
}

void SignedPerm::swap_axes(std::size_t i, std::size_t j) {
  std::swap(axis[i], axis[j]);
  std::swap(sign[i], sign[j]);
}

void SignedPerm::flip(std::size_t i) { sign[i] = -sign[i]; }

Vec lift_vector(const SignedPerm& perm, const Vec& local, std::size_t ambient_dim) {
  Vec out(ambient_dim, 0.0);
  for (std::size_t i = 0; i < local.size(); ++i)
    out[perm.axis[i]] = static_cast<double>(perm.sign[i]) * local[i];
  return out;
}

double favorable_ratio(const Hyperplane& plane, const BoxK& box) {
  if (!(plane.offset > 0.0)) throw input_error("favorable_ratio: offset must be positive");
  double half_chord = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < box.half_widths.size(); ++i) {
    const double ui = std::fabs(plane.normal[i]);
    if (ui > 0.0) half_chord = std::min(half_chord, box.half_widths[i] / ui);
  }
  if (!std::isfinite(half_chord)) throw internal_error("favorable_ratio: zero normal");
  return half_chord / plane.offset;
}

namespace detail {

ExitFace exit_face(const Vec& r, const Vec& half_widths) {
  ExitFace out;
  out.stretch = -1.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double q = std::fabs(r[i]) / half_widths[i];
    if (q > out.stretch) {
      out.stretch = q;
      out.index = i;
    }
  }
  return out;
}

std::optional<Slice> slice_hyperplane(const Vec& u, double h, double b) {
  const std::size_t k = u.size();
  Vec lower(u.begin(), u.end() - 1);
  const double len = norm(lower);
  if (len < kDegenerate) return std::nullopt;
  for (double& c : lower) c /= len;
  return Slice{std::move(lower), (h + u[k - 1] * b) / len};
}

AbcCheck check_abc(const RecursionState& state, const Schedule& schedule,
                   const VPolytope& frame_body) {
  AbcCheck out;
  const Vec& u = state.plane.normal;
  const double h = state.plane.offset;
  const double scale = state_scale(h, state.p);

  out.a_plane = std::fabs(dot(u, state.p) - h) / scale;

  const double pp = dot(state.p, state.p);
  double t = pp > 0.0 ? dot(state.y, state.p) / pp : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  out.a_segment = norm(vsub(state.y, vscale(state.p, t))) / scale;

  double box_excess = 0.0;
  for (std::size_t i = 0; i < state.k; ++i) {
    box_excess = std::max(box_excess, std::fabs(state.p[i]) - state.box.half_widths[i]);
    box_excess = std::max(box_excess, std::fabs(state.y[i]) - state.box.half_widths[i]);
  }
  out.a_box = std::max(box_excess, 0.0) / scale;

  out.b_value = (h - dot(u, state.y)) / h;
  out.b_bound = schedule.delta(schedule.n - state.k + 1);

  const Vec lifted = lift_vector(state.perm, u, frame_body.dim);
  out.c_excess = std::max(body::support_value(frame_body, lifted) - h, 0.0) / scale;

  // The depth condition is compared in distance units at the frame scale, not
  // as the ratio itself: the ratio divides by the plane offset, and for a
  // plane supporting a needle-thin facet that offset sits at the noise floor
  // of the normal, which would turn round-off into an apparent violation.
  const double dist_y = h - dot(u, state.y);
  const double b_slack = kAbcTol * scale;
  const bool b_ok =
      dist_y >= -b_slack && dist_y <= out.b_bound * h * (1.0 + 1e-6) + b_slack;

  out.pass = out.a_plane <= kAbcTol && out.a_segment <= kAbcTol && out.a_box <= kAbcTol &&
             b_ok && out.c_excess <= kAbcTol;
  return out;
}

}  // namespace detail

InitialResult initial_step(const VPolytope& frame_body, const Vec& a, const Vec& y,
                           const Schedule& schedule) {
  const std::size_t n = schedule.n;
  if (frame_body.dim != n || a.size() != n || y.size() != n)
    throw input_error("initial_step: dimension mismatch");
  // The window must absorb both the s0-cap clamp and thin-body gauge drift.
  const double s_here = 1.0 - body::gauge(frame_body, y);
  if (std::fabs(s_here - schedule.s) > 1e-4)
    throw input_error("initial_step: schedule s does not match 1 - gauge(y)");

  const Vec p = body::ray_boundary(frame_body, y);
  const Hyperplane plane = body::supporting_hyperplane_at(frame_body, p);

  RecursionState state;
  state.k = n;
  state.p = p;
  state.y = y;
  state.plane = plane;
  state.box.k = n;
  state.box.half_widths = vscale(a, static_cast<double>(n));
  state.perm = SignedPerm::identity(n);

  InitialResult out;
  out.record.k = n;
  out.record.r = vscale(plane.normal, plane.offset);
  out.record.abc = detail::check_abc(state, schedule, frame_body);

  // Similar triangles: y = (1-s) p forces dist(y, P_n) = s dist(0, P_n).
  // Compared in distance units at the frame scale for the same reason as the
  // depth condition: the offset of a thin-facet plane is itself noise-sized.
  if (std::fabs((plane.offset - dot(plane.normal, y)) - s_here * plane.offset) >
      kAbcTol * state_scale(plane.offset, p)) {
    SelectionTrace t;
    t.steps.push_back(out.record);
    throw invariant_violation("initial_step: similar-triangle identity failed", std::move(t));
  }

  if (n == 1) {
    out.record.case_tag = "terminal_k1";
    out.done = plane;
    return out;
  }

  out.record.favorable_ratio = favorable_ratio(plane, state.box);
  out.record.threshold = schedule.gamma(1);
  if (out.record.favorable_ratio >= out.record.threshold) {
    out.record.case_tag = "I";
    out.done = plane;
    return out;
  }

  if (!out.record.abc.pass) {
    SelectionTrace t;
    t.steps.push_back(out.record);
    throw invariant_violation("initial_step: entry conditions failed", std::move(t));
  }
  out.record.case_tag = "enter";
  out.state = std::move(state);
  return out;
}

DescendResult descend_step(const RecursionState& state, const Schedule& schedule,
                           const VPolytope& frame_body) {
  const std::size_t k = state.k;
  if (k < 2) throw input_error("descend_step: requires k >= 2");

  DescendResult out;
  out.record.k = k;
  out.record.favorable_ratio = favorable_ratio(state.plane, state.box);
  out.record.threshold = schedule.gamma(schedule.n - k + 1);
  out.record.r = vscale(state.plane.normal, state.plane.offset);

  if (out.record.favorable_ratio >= out.record.threshold) {
    out.record.case_tag = "I";
    out.record.abc = detail::check_abc(state, schedule, frame_body);
    return out;
  }
  out.record.case_tag = "II";

  auto fail = [&](const char* what) -> invariant_violation {
    SelectionTrace t;
    t.steps.push_back(out.record);
    return invariant_violation(what, std::move(t));
  };

  // The plane's closest point to the origin must lie outside the box, else
  // the chord ratio would be >= 1 > gamma.
  const detail::ExitFace face = detail::exit_face(out.record.r, state.box.half_widths);
  if (!(face.stretch > 1.0 - kDegenerate)) throw fail("descend: plane foot inside the box");
  out.record.face_index = face.index;
  out.record.r_plus = vscale(out.record.r, 1.0 / face.stretch);

  // Re-enumerate axes so the exit face is the positive k-th one.
  Vec u = state.plane.normal;
  Vec p = state.p;
  Vec y = state.y;
  Vec w = state.box.half_widths;
  SignedPerm perm = state.perm;
  const double h = state.plane.offset;
  if (face.index != k - 1) {
    std::swap(u[face.index], u[k - 1]);
    std::swap(p[face.index], p[k - 1]);
    std::swap(y[face.index], y[k - 1]);
    std::swap(w[face.index], w[k - 1]);
    perm.swap_axes(face.index, k - 1);
  }
  if (u[k - 1] < 0.0) {
    u[k - 1] = -u[k - 1];
    p[k - 1] = -p[k - 1];
    y[k - 1] = -y[k - 1];
    perm.flip(k - 1);
  }

  const double scale = state_scale(h, p);
  // Degenerate configurations (plane or touch point parallel to the slicing
  // axis) are escaped by one joint rotation of (u, p); it preserves u.p and
  // the norms, and its angle is far below every condition tolerance.
  for (int attempt = 0;; ++attempt) {
    double norm_u_lower = 0.0, norm_p_lower = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      norm_u_lower += u[i] * u[i];
      norm_p_lower += p[i] * p[i];
    }
    norm_u_lower = std::sqrt(norm_u_lower);
    norm_p_lower = std::sqrt(norm_p_lower);
    const double d_coef = dot(u, p) - u[k - 1] * p[k - 1];
    if (norm_u_lower >= kDegenerate && norm_p_lower >= kDegenerate * scale &&
        std::fabs(d_coef) >= kDegenerate * scale)
      break;
    if (attempt > 0) throw fail("descend: unresolved degeneracy");
    rotate_first_last(u, k);
    rotate_first_last(p, k);
    out.record.perturbed = true;
  }

  const double b = w[k - 1];
  const auto slice = detail::slice_hyperplane(u, h, b);
  if (!slice) throw fail("descend: slice parallel to the plane");

  // l_k = T_k cap P_k with T_k = span(p, e_k); its point at height x_k = c is
  // alpha(c) p + beta(c) e_k with alpha(c) = (h - c u_k)/(u.p - u_k p_k).
  const double d_coef = dot(u, p) - u[k - 1] * p[k - 1];
  const auto line_point = [&](double c) {
    const double alpha = (h - c * u[k - 1]) / d_coef;
    const double beta = c - alpha * p[k - 1];
    Vec z = vscale(p, alpha);
    z[k - 1] += beta;
    return std::pair<Vec, double>(std::move(z), alpha);
  };
  out.record.q_plus = line_point(b).first;
  out.record.q_zero = line_point(0.0).first;
  auto [q_minus, alpha] = line_point(-b);
  out.record.q_minus = q_minus;
  out.record.alpha = alpha;
  out.record.beta = -b - alpha * p[k - 1];

  const double r_norm2 = h * h;
  double pr_norm2 = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) pr_norm2 += (h * u[i]) * (h * u[i]);
  out.record.lambda_diag = (r_norm2 + b * h * u[k - 1]) / pr_norm2;

  RecursionState next;
  next.k = k - 1;
  next.p.assign(p.begin(), p.end() - 1);
  next.p = vscale(next.p, alpha);
  next.y.assign(y.begin(), y.end() - 1);
  next.plane = Hyperplane{slice->u_lower, slice->h_lower};
  next.box.k = k - 1;
  next.box.half_widths.assign(w.begin(), w.end() - 1);
  next.box.half_widths = vscale(next.box.half_widths, schedule.c0);
  next.perm = std::move(perm);

  out.record.abc = detail::check_abc(next, schedule, frame_body);
  if (!out.record.abc.pass) throw fail("descend: produced state violates its conditions");
  out.next = std::move(next);
  return out;
}

Hyperplane lift_to_support(const Hyperplane& plane_k, const SignedPerm& perm,
                           const VPolytope& frame_body) {
  Vec normal = lift_vector(perm, plane_k.normal, frame_body.dim);
  const double len = norm(normal);
  if (len < 1e-300) throw internal_error("lift_to_support: zero normal");
  normal = vscale(normal, 1.0 / len);
  const double offset = body::support_value(frame_body, normal);
  return Hyperplane{std::move(normal), offset};
}

Selection select_hyperplane(const VPolytope& frame_body, const Vec& a, const Vec& y, double s0) {
  const std::size_t n = frame_body.dim;
  double s = 1.0 - body::gauge(frame_body, y);
  if (s < 0.0) {
    if (s < -1e-9) throw input_error("select_hyperplane: y lies outside the body");
    s = 0.0;
  }
  // Queries placed exactly at the s0 cap can land above it after the gauge
  // recomputation; on needle-thin bodies that drift reaches ~1e-6, so the
  // window is generous while still rejecting genuinely out-of-cap queries.
  if (s > s0 && s <= s0 + 1e-5 * (1.0 + s0)) s = s0;
  const Schedule schedule = make_schedule(n, s, s0);

  Selection sel;
  SelectionTrace& trace = sel.trace;

  InitialResult init = initial_step(frame_body, a, y, schedule);

  Hyperplane exit_plane;
  SignedPerm exit_perm = SignedPerm::identity(n);
  std::size_t exit_level = n;
  std::string exit_case;

  if (init.done) {
    trace.steps.push_back(init.record);
    exit_plane = *init.done;
    exit_case = init.record.case_tag;
  } else {
    RecursionState state = std::move(*init.state);
    for (;;) {
      if (state.k == 1) {
        StepRecord rec;
        rec.k = 1;
        rec.case_tag = "terminal_k1";
        rec.r = vscale(state.plane.normal, state.plane.offset);
        rec.abc = detail::check_abc(state, schedule, frame_body);
        trace.steps.push_back(rec);
        exit_plane = state.plane;
        exit_perm = state.perm;
        exit_level = 1;
        exit_case = "terminal_k1";
        break;
      }
      DescendResult step;
      try {
        step = descend_step(state, schedule, frame_body);
      } catch (invariant_violation& violation) {
        SelectionTrace full;
        full.steps = trace.steps;
        full.steps.insert(full.steps.end(), violation.trace.steps.begin(),
                          violation.trace.steps.end());
        throw invariant_violation(violation.what(), std::move(full));
      }
      trace.steps.push_back(step.record);
      if (!step.next) {
        exit_plane = state.plane;
        exit_perm = state.perm;
        exit_level = state.k;
        exit_case = "I";
        break;
      }
      state = std::move(*step.next);
    }
  }

  const double h_exit = exit_plane.offset;
  sel.plane_frame = lift_to_support(exit_plane, exit_perm, frame_body);
  if (sel.plane_frame.offset > h_exit * (1.0 + kAbcTol) + kAbcTol) {
    throw invariant_violation("select: lifted plane cuts the body beyond the exit plane",
                              std::move(trace));
  }

  const double dist = std::max(sel.plane_frame.offset - dot(sel.plane_frame.normal, y), 0.0);
  const double chord = body::chord_diameter(frame_body, sel.plane_frame.normal);

  SelectionFinal& fin = trace.final;
  fin.hyperplane_frame = sel.plane_frame;
  fin.s = s;
  fin.ratio = dist / chord;
  fin.bound = schedule.c_theorem * pow_half(s, n - 1);
  fin.depth = n - exit_level;
  fin.exit_level = exit_level;
  fin.case_terminated = exit_case;
  if (exit_case == "terminal_k1") {
    fin.exit_bound = fin.bound;
  } else {
    const std::size_t i = n - exit_level + 1;
    fin.exit_bound = std::pow(static_cast<double>(n), 1.5) *
                     std::pow(schedule.c0, static_cast<double>(n - exit_level)) *
                     (static_cast<double>(i) - 0.5) * schedule.gamma(i);
  }
  if (fin.ratio > fin.exit_bound * (1.0 + 1e-6) + 1e-9) {
    throw invariant_violation("select: achieved ratio exceeds the certified exit bound",
                              std::move(trace));
  }
  if (fin.depth > n - 1) {
    throw invariant_violation("select: recursion depth exceeded n - 1", std::move(trace));
  }
  return sel;
}

namespace {

nlohmann::json abc_json(const AbcCheck& abc) {
  return nlohmann::json{{"a_plane", abc.a_plane},     {"a_segment", abc.a_segment},
                        {"a_box", abc.a_box},         {"b_value", abc.b_value},
                        {"b_bound", abc.b_bound},     {"c_excess", abc.c_excess},
                        {"pass", abc.pass}};
}

}  // namespace

std::string trace_to_json(const SelectionTrace& trace) {
  nlohmann::json steps = nlohmann::json::array();
  for (const StepRecord& r : trace.steps) {
    steps.push_back(nlohmann::json{{"k", r.k},
                                   {"case", r.case_tag},
                                   {"favorable_ratio", r.favorable_ratio},
                                   {"threshold", r.threshold},
                                   {"r", r.r},
                                   {"r_plus", r.r_plus},
                                   {"face_index", r.face_index},
                                   {"q_plus", r.q_plus},
                                   {"q_zero", r.q_zero},
                                   {"q_minus", r.q_minus},
                                   {"alpha", r.alpha},
                                   {"beta", r.beta},
                                   {"lambda_diag", r.lambda_diag},
                                   {"perturbed", r.perturbed},
                                   {"abc", abc_json(r.abc)}});
  }
  const SelectionFinal& f = trace.final;
  nlohmann::json doc{
      {"steps", steps},
      {"final",
       {{"normal", f.hyperplane_frame.normal},
        {"offset", f.hyperplane_frame.offset},
        {"s", f.s},
        {"ratio", f.ratio},
        {"bound", f.bound},
        {"exit_bound", f.exit_bound},
        {"depth", f.depth},
        {"exit_level", f.exit_level},
        {"case_terminated", f.case_terminated}}}};
  return doc.dump();
}

}  // namespace hsup::selector
