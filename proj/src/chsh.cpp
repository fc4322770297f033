#include "siqkd/chsh.hpp"

#include <cmath>

namespace siqkd {

double correlator(const Observable& a, const Observable& b,
                  const std::optional<Rotation>& dynamics) {
    BlochVector ra = dynamics ? dynamics->apply(a.axis) : a.axis;
    return dot(ra, b.axis);
}

double correlator_from_state(const EnsembleState& state, const Observable& a,
                             const Observable& b) {
    double c = 0.0;
    for (int k : {+1, -1})
        for (int l : {+1, -1})
            c += k * l * outcome_probability(state, a, k) *
                 conditional_probability(a, k, b, l);
    return c;
}

double correlator_three(const Observable& a, const Observable& b, const Observable& c) {
    return dot(a.axis, b.axis) * dot(b.axis, c.axis);
}

ChshValue chsh_value(const MeasurementSettings& s,
                     const std::optional<Rotation>& dynamics) {
    double v = correlator(s.a1, s.b1, dynamics) + correlator(s.a1, s.b2, dynamics) +
               correlator(s.a2, s.b1, dynamics) - correlator(s.a2, s.b2, dynamics);
    return ChshValue{std::abs(v)};
}

MeasurementSettings optimal_settings(const Observable& b1, const Observable& b2) {
    if (std::abs(dot(b1.axis, b2.axis)) > kUnitTol)
        throw SettingsDegenerate("b1 and b2 must be orthogonal for unit a1, a2");
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Observable a1(inv_sqrt2 * (b1.axis + b2.axis), "A1");
    Observable a2(inv_sqrt2 * (b1.axis - b2.axis), "A2");
    return MeasurementSettings{a1, a2, b1, b2};
}

double chsh_with_intercept(const MeasurementSettings& s, const Observable& e) {
    auto term = [&](const Observable& a, const Observable& b) {
        return dot(a.axis, e.axis) * dot(e.axis, b.axis);
    };
    return std::abs(term(s.a1, s.b1) + term(s.a1, s.b2) + term(s.a2, s.b1) -
                    term(s.a2, s.b2));
}

double pseudo_projection_trace(BlochVector p, BlochVector b, BlochVector c) {
    return 0.25 * (1.0 + dot(p, b + c) + dot(b, c));
}

} // namespace siqkd
