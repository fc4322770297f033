#include "siqkd/sampling.hpp"

#include <cmath>

namespace siqkd {

std::vector<int> sample_sequence(const EnsembleState& state,
                                 const std::vector<Observable>& observables,
                                 RngStream& rng) {
    if (observables.empty())
        throw ConfigError("sample_sequence requires at least one observable");
    std::vector<int> outcomes;
    outcomes.reserve(observables.size());
    int k = rng.next_sign(outcome_probability(state, observables[0], +1));
    outcomes.push_back(k);
    for (size_t i = 1; i < observables.size(); ++i) {
        k = rng.next_sign(conditional_probability(observables[i - 1], k, observables[i], +1));
        outcomes.push_back(k);
    }
    return outcomes;
}

CorrelatorEstimate summarize_products(const std::vector<int>& products) {
    CorrelatorEstimate est;
    est.shots = products.size();
    if (products.empty()) return est;
    double sum = 0.0;
    for (int p : products) sum += p;
    est.mean = sum / static_cast<double>(est.shots);
    if (est.shots > 1) {
        // products are +/-1, so sum of squares is just the count
        double var = (static_cast<double>(est.shots) - est.mean * est.mean * est.shots) /
                     static_cast<double>(est.shots - 1);
        if (var < 0) var = 0;
        est.std_error = std::sqrt(var / static_cast<double>(est.shots));
    }
    return est;
}

CorrelatorEstimate estimate_correlator(const EnsembleState& state, const Observable& a,
                                       const Observable& b, uint64_t shots,
                                       const RngStream& rng) {
    if (shots == 0) throw ConfigError("estimate_correlator requires shots >= 1");
    std::vector<int> products;
    products.reserve(shots);
    const std::vector<Observable> seq{a, b};
    for (uint64_t s = 0; s < shots; ++s) {
        RngStream shot_rng = rng.split(s);
        auto out = sample_sequence(state, seq, shot_rng);
        products.push_back(out.front() * out.back());
    }
    return summarize_products(products);
}

ChshEstimate estimate_chsh(const EnsembleState& state, const MeasurementSettings& settings,
                           uint64_t shots_per_term, const RngStream& rng,
                           const std::optional<Observable>& intercept) {
    if (shots_per_term == 0) throw ConfigError("estimate_chsh requires shots_per_term >= 1");
    const std::array<std::pair<const Observable*, const Observable*>, 4> pairs{{
        {&settings.a1, &settings.b1},
        {&settings.a1, &settings.b2},
        {&settings.a2, &settings.b1},
        {&settings.a2, &settings.b2},
    }};
    ChshEstimate est;
    for (size_t t = 0; t < pairs.size(); ++t) {
        RngStream term_rng = rng.split(t);
        std::vector<Observable> seq;
        seq.push_back(*pairs[t].first);
        if (intercept) seq.push_back(*intercept);
        seq.push_back(*pairs[t].second);
        std::vector<int> products;
        products.reserve(shots_per_term);
        for (uint64_t s = 0; s < shots_per_term; ++s) {
            RngStream shot_rng = term_rng.split(s);
            auto out = sample_sequence(state, seq, shot_rng);
            products.push_back(out.front() * out.back());
        }
        est.per_term[t] = summarize_products(products);
    }
    est.value = std::abs(est.per_term[0].mean + est.per_term[1].mean +
                         est.per_term[2].mean - est.per_term[3].mean);
    double var = 0.0;
    for (const auto& term : est.per_term) var += term.std_error * term.std_error;
    est.std_error = std::sqrt(var);
    return est;
}

} // namespace siqkd
