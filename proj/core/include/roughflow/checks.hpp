#pragma once
#include <random>
#include <vector>

#include "roughflow/diagnostics.hpp"
#include "roughflow/geometry.hpp"

namespace roughflow {

/// Smooth decaying scalar on the physical domain: a few x1 modes times
/// decaying exponentials in x2.
ScalarJetField random_decaying_scalar(std::mt19937_64& rng);

/// Stream potential on the rescaled domain that vanishes on the rough wall;
/// its perp-gradient is divergence-free, tangent, and decaying.
ScalarJetField random_admissible_stream(std::mt19937_64& rng,
                                        const DomainParams& dom);

/// Randomized explicit-constant trace-lemma suite: the plain trace ratio,
/// the curl-only variant, and the gradient-curl corollary, `count` fields
/// each. All ratios must stay below 1 + 3 x (quadrature error estimate).
std::vector<CheckRecord> run_trace_suite(const DomainParams& dom, int count,
                                         std::uint64_t seed);

/// Randomized vortex-stretching identity suite at reference resolution,
/// with one refinement step checking the quadrature order.
std::vector<CheckRecord> run_identity_suite(const DomainParams& dom, int count,
                                            std::uint64_t seed,
                                            double tol = 1e-6);

/// Randomized slip-condition form-equivalence suite on sampled tangent
/// fields (discrete forms agree far below 10 h^2 x scale).
std::vector<CheckRecord> run_slip_equivalence_suite(const DomainParams& dom,
                                                    int count,
                                                    std::uint64_t seed,
                                                    double tol = 1e-6);

/// Closed-form and structural checks of the near-wall weight.
std::vector<CheckRecord> run_weight_suite(double nu_tilde, double m);

/// Rescaled-norm scaling: closed-form flat case plus the bounded-ratio sweep
/// for a supplied profile family (one profile per epsilon).
std::vector<CheckRecord> run_scaling_flat_check(double gamma);

}  // namespace roughflow
