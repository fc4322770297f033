#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "siqkd/bloch.hpp"
#include "siqkd/chsh.hpp"
#include "siqkd/rng.hpp"

namespace siqkd {

struct CorrelatorEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    uint64_t shots = 0;
};

struct ChshEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::array<CorrelatorEstimate, 4> per_term{}; // (a1,b1) (a1,b2) (a2,b1) (a2,b2)
};

// One sequential run: first outcome from the state, each later outcome from
// the symmetric conditional probability against the previous measurement.
std::vector<int> sample_sequence(const EnsembleState& state,
                                 const std::vector<Observable>& observables,
                                 RngStream& rng);

// Monte-Carlo two-time correlator: average of k*l over `shots` fresh runs.
// Shots are split from `rng` by index, so the result is independent of
// evaluation order.
CorrelatorEstimate estimate_correlator(const EnsembleState& state, const Observable& a,
                                       const Observable& b, uint64_t shots,
                                       const RngStream& rng);

// Finite-shot CHSH: four terms on fresh, disjoint ensembles. With an
// intercept axis, every shot measures [a_i, e, b_j] and correlates the first
// and third outcomes.
ChshEstimate estimate_chsh(const EnsembleState& state, const MeasurementSettings& settings,
                           uint64_t shots_per_term, const RngStream& rng,
                           const std::optional<Observable>& intercept = std::nullopt);

// Mean and stderr helpers shared with the protocol's check evaluation.
CorrelatorEstimate summarize_products(const std::vector<int>& products);

} // namespace siqkd
