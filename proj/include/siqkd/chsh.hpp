#pragma once

#include <optional>

#include "siqkd/bloch.hpp"

namespace siqkd {

inline constexpr double kClassicalBound = 2.0;
inline const double kTsirelsonBound = 2.0 * std::sqrt(2.0);

// The four directions of the temporal CHSH expression
// |C(a1,b1) + C(a1,b2) + C(a2,b1) - C(a2,b2)|.
struct MeasurementSettings {
    Observable a1, a2, b1, b2;
};

struct ChshValue {
    double value = 0.0;
    double classical_bound = kClassicalBound;
    double tsirelson_bound = kTsirelsonBound;
};

// Two-time correlator. With dynamics R between the measurements this is
// R(a).b; with none it reduces to a.b.
double correlator(const Observable& a, const Observable& b,
                  const std::optional<Rotation>& dynamics = std::nullopt);

// The same correlator evaluated as the literal double sum
// sum_{k,l} k l Tr[rho Pi_A^k] Tr[Pi_A^k Pi_B^l]. Equal to a.b for every
// initial state.
double correlator_from_state(const EnsembleState& state, const Observable& a,
                             const Observable& b);

// First-to-third correlator of three sequential measurements: (a.b)(b.c).
// A middle measurement factorizes, and in general destroys, the correlation.
double correlator_three(const Observable& a, const Observable& b, const Observable& c);

ChshValue chsh_value(const MeasurementSettings& settings,
                     const std::optional<Rotation>& dynamics = std::nullopt);

// a1 = (b1+b2)/sqrt(2), a2 = (b1-b2)/sqrt(2); requires b1 perpendicular to b2
// so both results are unit vectors. Saturates the Tsirelson bound.
MeasurementSettings optimal_settings(const Observable& b1, const Observable& b2);

// CHSH with an intercepting measurement along e between every pair:
// each term becomes (a_i.e)(e.b_j). At optimal settings the supremum over e
// is sqrt(2).
double chsh_with_intercept(const MeasurementSettings& settings, const Observable& e);

// Trace of the symmetrized pseudo-projection of three +1 projectors:
// (1/4)(1 + p.(b+c) + b.c). Non-negative for unit inputs.
double pseudo_projection_trace(BlochVector p, BlochVector b, BlochVector c);

} // namespace siqkd
