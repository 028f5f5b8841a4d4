#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icevp/solver.hpp"

namespace icevp::verify {

// Result of one property scan. pass <=> worst_violation <= tolerance.
// witness serializes the inputs of the worst sample; note carries
// informational extras that are never part of the pass decision.
struct PropertyReport {
  std::string name;
  long long samples = 0;
  double worst_violation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string witness;
  std::string note;
};

struct ConvergenceReport {
  std::vector<int> levels;
  std::vector<double> errors_h;  // L2 errors per level
  std::vector<double> errors_v;  // gradient-seminorm errors per level
  double observed_order_h = 0.0;
  double observed_order_v = 0.0;
};

// |yield_residual| / ((P^2/4) max(1, (delta_p/delta)^2)) over band-mixed
// random tensors and strengths. The max guards the normalization when the
// stress collapses onto -(P/2) Id and the identity's terms cancel.
PropertyReport check_yield_identity(long long n, const RheologyParams& params,
                                    std::uint64_t seed);

// max(0, -(sigma(P,z1) - sigma(P,z2)) : (z1 - z2)) / (P (|z1| + |z2|)^2)
// over band-mixed pairs plus tangential near-parallel pairs sized above the
// curvature/round-off crossover. For CutoffBoth and Plastic it also drives
// the exact-zero witness z2 = 2 z1 (power-of-two scaling reproduces sigma
// bitwise) and fails unless those come out as 0.0.
PropertyReport check_pointwise_monotonicity(long long n,
                                            const RheologyParams& params,
                                            std::uint64_t seed);

// <A(u) - A(v), u - v> >= -tol * scale over random dof pairs on the
// problem's mesh, scale = sum of the natural magnitudes of the stress, drag
// and Coriolis parts.
PropertyReport check_discrete_monotonicity(const Problem& pb, int n_pairs,
                                           std::uint64_t seed);

// Elementwise lower bound on the stress work,
//   <A(u), u> >= 1/(2 delta_hi) * int P delta_p(Du)^2 - 1/2 * int P |div u|,
// plus the pointwise growth bound |sigma| <= (P/sqrt(2))(1 + delta_p/delta).
// Requires a mode whose delta is capped by delta_hi.
PropertyReport check_coercivity(const Problem& pb, int n_fields,
                                std::uint64_t seed);

// Sign scan of drag_monotone_integrand over a theta grid on [0, pi/4] with
// n_vec random pairs per theta, normalized by (|a|+|b|)^3. Cross-validates
// the integrand against its polynomial form and runs an informational probe
// at theta = pi/4 + 0.3 (reported in note, never a gate).
PropertyReport scan_drag_monotonicity(long long n_vec, int n_theta,
                                      std::uint64_t seed);

// Max of discriminant_d over the grid S in (-1, 1), T in (0, 1) with the
// given step; passes when the maximum is negative. Exact anchor values
// d(0,1) = -44 and d(1,T) = 0 are asserted on top.
PropertyReport scan_discriminant(double grid_step);

enum class ContractionVariant { InitialData, Forcing };

// Paired runs of the problem over `steps` steps of cfg.dt.
//   InitialData: second run starts from u0 perturbed by a random field of
//     max speed perturbation_scale; checks the M-norm difference never grows
//     from one step to the next.
//   Forcing: second run adds a constant body force of magnitude
//     m * perturbation_scale; checks
//     |u1^n - u2^n|_M^2 <= sum_k dt |delta_h(t_k)/m|_M^2 stepwise.
// Tolerance is 10 * cfg.picard_tol relative to the trajectory scale.
PropertyReport check_contraction(const Problem& pb, const SolverConfig& cfg,
                                 double perturbation_scale, int steps,
                                 ContractionVariant variant,
                                 std::uint64_t seed);

// Steady solves against the closed-form field
//   u*(x,y) = A sin(pi x) sin(pi y) (1,1)
// on the unit square, with A small enough that every element stays below the
// lower cut-off, where the operator is linear with load
//   h*(x,y) = P/(2 delta_lo) pi^2 A [(1+lambda) sin sin - cos cos] (1,1).
// Guards the regime on both u* and each discrete solution; errors use
// degree-5 quadrature. amplitude = 0 picks A = delta_lo / (2 pi sqrt(1+lambda)).
ConvergenceReport manufactured_convergence(const std::vector<int>& levels,
                                           const RheologyParams& params,
                                           double strength_value,
                                           double amplitude = 0.0);

// Problem factories shared by the verify CLI and the acceptance suite.
Problem make_property_problem(int n, std::uint64_t seed);    // unit square
Problem make_contraction_problem(int n);                     // 512 km square
SolverConfig contraction_config();

std::string to_json(const PropertyReport& report);
std::string to_json(const ConvergenceReport& report);

}  // namespace icevp::verify
