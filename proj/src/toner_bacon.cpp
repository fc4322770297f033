#include "siqkd/toner_bacon.hpp"

#include <cmath>

namespace siqkd {

namespace {

// Measure-zero tie broken toward +1 for determinism.
int sgn(double v) { return v < 0.0 ? -1 : +1; }

} // namespace

BlochVector random_unit_vector(RngStream& rng) {
    double z = 2.0 * rng.next_unit() - 1.0;
    double phi = 2.0 * M_PI * rng.next_unit();
    double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {s * std::cos(phi), s * std::sin(phi), z};
}

TbRound tb_round(const Observable& a, const Observable& b, RngStream& rng) {
    TbRound r;
    r.lambda1 = random_unit_vector(rng);
    r.lambda2 = random_unit_vector(rng);
    r.alpha = sgn(dot(a.axis, r.lambda1));
    r.comm_bit = sgn(dot(a.axis, r.lambda1)) * sgn(dot(a.axis, r.lambda2));
    r.beta = sgn(dot(b.axis, r.lambda1 + static_cast<double>(r.comm_bit) * r.lambda2));
    return r;
}

TbEstimate tb_correlator(const Observable& a, const Observable& b, uint64_t rounds,
                         const RngStream& rng) {
    if (rounds == 0) throw ConfigError("tb_correlator requires rounds >= 1");
    TbEstimate est;
    est.rounds = rounds;
    est.comm_bits = rounds;
    double sum = 0.0;
    for (uint64_t i = 0; i < rounds; ++i) {
        RngStream round_rng = rng.split(i);
        TbRound r = tb_round(a, b, round_rng);
        sum += r.alpha * r.beta;
    }
    est.mean = sum / static_cast<double>(rounds);
    // products are +/-1
    double var = (1.0 - est.mean * est.mean) * rounds / std::max<double>(1.0, rounds - 1);
    est.std_error = std::sqrt(var / static_cast<double>(rounds));
    return est;
}

TbChsh tb_chsh(const MeasurementSettings& settings, uint64_t rounds, const RngStream& rng) {
    const std::array<std::pair<const Observable*, const Observable*>, 4> pairs{{
        {&settings.a1, &settings.b1},
        {&settings.a1, &settings.b2},
        {&settings.a2, &settings.b1},
        {&settings.a2, &settings.b2},
    }};
    TbChsh out;
    double sum = 0.0, var = 0.0;
    for (size_t t = 0; t < pairs.size(); ++t) {
        TbEstimate est = tb_correlator(*pairs[t].first, *pairs[t].second, rounds, rng.split(t));
        sum += (t == 3 ? -est.mean : est.mean);
        var += est.std_error * est.std_error;
        out.comm_bits += est.comm_bits;
    }
    out.value = std::abs(sum);
    out.std_error = std::sqrt(var);
    return out;
}

double tb_chain_correlator(const std::vector<Observable>& observables, uint64_t rounds,
                           const RngStream& rng) {
    if (observables.size() < 2)
        throw ConfigError("chain requires at least two observables");
    if (rounds == 0) throw ConfigError("chain requires rounds >= 1");
    double sum = 0.0;
    for (uint64_t i = 0; i < rounds; ++i) {
        RngStream round_rng = rng.split(i);
        int product = 1;
        for (size_t j = 0; j + 1 < observables.size(); ++j) {
            RngStream stage_rng = round_rng.split(j);
            TbRound r = tb_round(observables[j], observables[j + 1], stage_rng);
            product *= r.alpha * r.beta;
        }
        sum += product;
    }
    return sum / static_cast<double>(rounds);
}

} // namespace siqkd
