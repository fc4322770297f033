#pragma once

#include <cstdint>
#include <vector>

#include "siqkd/chsh.hpp"
#include "siqkd/rng.hpp"

namespace siqkd {

// One round of the 1-bit classical simulation of the temporal correlator.
// Shared randomness lambda1, lambda2; one bit of communication; the sign
// convention yields E[alpha*beta] = +a.b (the temporal correlator, not the
// singlet's -a.b).
struct TbRound {
    BlochVector lambda1, lambda2;
    int comm_bit = 0;
    int alpha = 0;
    int beta = 0;
};

BlochVector random_unit_vector(RngStream& rng);

TbRound tb_round(const Observable& a, const Observable& b, RngStream& rng);

struct TbEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    uint64_t rounds = 0;
    uint64_t comm_bits = 0; // exactly one per round
};

TbEstimate tb_correlator(const Observable& a, const Observable& b, uint64_t rounds,
                         const RngStream& rng);

struct TbChsh {
    double value = 0.0;
    double std_error = 0.0;
    uint64_t comm_bits = 0;
};

// CHSH from four classically simulated terms; reaches 2*sqrt(2) at optimal
// settings, so a violation alone does not certify non-classicality.
TbChsh tb_chsh(const MeasurementSettings& settings, uint64_t rounds, const RngStream& rng);

// m-measurement chain: consecutive pairs simulated by independent rounds,
// matching the factorization of the sequential correlator into dot-product
// pairs. Returns the product of first-to-last alphas/betas per stage.
double tb_chain_correlator(const std::vector<Observable>& observables, uint64_t rounds,
                           const RngStream& rng);

} // namespace siqkd
