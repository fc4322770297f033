#include "siqkd/bloch.hpp"

#include <cmath>

namespace siqkd {

namespace {

void require_outcome(int k) {
    if (k != 1 && k != -1)
        throw InvalidObservable("measurement outcome must be +1 or -1");
}

} // namespace

Rotation::Rotation(const std::array<std::array<double, 3>, 3>& m) : m_(m) {
    // R R^T = I
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double s = 0;
            for (int k = 0; k < 3; ++k) s += m_[i][k] * m_[j][k];
            double expect = (i == j) ? 1.0 : 0.0;
            if (std::abs(s - expect) > kUnitTol)
                throw InvalidRotation("matrix is not orthogonal");
        }
    }
    double det = m_[0][0] * (m_[1][1] * m_[2][2] - m_[1][2] * m_[2][1]) -
                 m_[0][1] * (m_[1][0] * m_[2][2] - m_[1][2] * m_[2][0]) +
                 m_[0][2] * (m_[1][0] * m_[2][1] - m_[1][1] * m_[2][0]);
    if (std::abs(det - 1.0) > kUnitTol)
        throw InvalidRotation("determinant must be +1");
}

Rotation Rotation::about_axis(BlochVector axis, double angle) {
    double n = axis.norm();
    if (!axis.finite() || n < kUnitTol)
        throw InvalidRotation("rotation axis must be non-zero");
    BlochVector u = (1.0 / n) * axis;
    double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
    return Rotation(std::array<std::array<double, 3>, 3>{{
        {t * u.x * u.x + c, t * u.x * u.y - s * u.z, t * u.x * u.z + s * u.y},
        {t * u.x * u.y + s * u.z, t * u.y * u.y + c, t * u.y * u.z - s * u.x},
        {t * u.x * u.z - s * u.y, t * u.y * u.z + s * u.x, t * u.z * u.z + c},
    }});
}

double outcome_probability(const EnsembleState& state, const Observable& obs, int k) {
    require_outcome(k);
    return 0.5 * (1.0 + k * dot(obs.axis, state.r));
}

double conditional_probability(const Observable& prev_obs, int prev_k,
                               const Observable& next_obs, int l) {
    require_outcome(prev_k);
    require_outcome(l);
    return 0.5 * (1.0 + prev_k * l * dot(prev_obs.axis, next_obs.axis));
}

EnsembleState collapse(const Observable& obs, int k) {
    require_outcome(k);
    return EnsembleState(static_cast<double>(k) * obs.axis);
}

BlochVector apply_rotation(const Rotation& R, BlochVector v) {
    return R.apply(v);
}

} // namespace siqkd
