#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypersupport/body.hpp"
#include "hypersupport/selector.hpp"

namespace hsup::verify {

using body::Hyperplane;
using body::VPolytope;
using numkit::Vec;

struct verification_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Strategy {
  algorithm,
  naive_orthogonal,   // normal along y
  naive_ray_support,  // tangent plane at the ray's boundary hit
  naive_closest,      // Euclidean-closest supporting plane over candidates
  oracle_best,        // best ratio over the full candidate set
};

const char* strategy_name(Strategy s);

struct RatioReport {
  Strategy strategy = Strategy::algorithm;
  double s = 0.0;
  double ratio = 0.0;
  double bound = 0.0;  // c(n, s0) s^(1/2^(n-1)), same for every strategy
  std::size_t depth = 0;
  Hyperplane plane;
};

// Re-derives s, the distance, the chord, and the bound from scratch (never
// from the trace), re-checks the support conditions of the returned plane,
// and checks ratio <= bound within 1e-6 relative plus 1e-9 absolute slack.
// Throws verification_error on any failure.
RatioReport check_bound(const VPolytope& frame_body, const Vec& a, const Vec& y, double s0,
                        const selector::Selection& result);

// Best achievable ratio over a candidate normal set: tangent planes at every
// vertex-adjacent boundary sample plus `budget` seeded random directions,
// plus any caller-supplied extras (pass the algorithm's and the naive
// normals to make oracle dominance structural).
RatioReport oracle_best_ratio(const VPolytope& frame_body, const Vec& y, double s0,
                              std::size_t budget, std::uint64_t seed,
                              const std::vector<Vec>& extra_candidates = {});

// The three strategies the bound does not hold for: (i) normal along y,
// (ii) tangent at the ray hit, (iii) Euclidean-closest over the candidate
// set. Reported, never asserted.
std::array<RatioReport, 3> naive_strategies(const VPolytope& frame_body, const Vec& y, double s0,
                                            std::size_t budget, std::uint64_t seed);

enum class ThinKind { box, needle_simplex, slab_cross };

const char* thin_kind_name(ThinKind kind);
std::optional<ThinKind> thin_kind_from_name(const std::string& name);

// Degenerating families with axis ratio ~ 1 : thinness, optionally rotated
// by a seeded random orthogonal matrix. thinness in (0, 1]; n >= 2.
VPolytope thin_family(ThinKind kind, std::size_t n, double thinness,
                      std::optional<std::uint64_t> rotation_seed = std::nullopt);

namespace detail {

// Shared candidate set: tangent normals at every vertex direction's boundary
// hit plus `budget` seeded uniform unit vectors.
std::vector<Vec> candidate_normals(const VPolytope& frame_body, std::size_t budget,
                                   std::uint64_t seed);

// Ratio a given normal achieves: (support - u.y) / chord(u).
RatioReport report_for_normal(const VPolytope& frame_body, const Vec& y, double s0,
                              const Vec& normal, Strategy strategy);

}  // namespace detail
}  // namespace hsup::verify
