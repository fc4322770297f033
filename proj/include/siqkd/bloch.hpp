#pragma once

#include <array>
#include <cmath>
#include <string>

#include "siqkd/errors.hpp"

namespace siqkd {

inline constexpr double kUnitTol = 1e-9;

// Real 3-vector on/inside the Bloch sphere. Observables use unit vectors,
// ensemble states use |v| <= 1.
struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

    friend constexpr BlochVector operator+(BlochVector a, BlochVector b) {
        return {a.x + b.x, a.y + b.y, a.z + b.z};
    }
    friend constexpr BlochVector operator-(BlochVector a, BlochVector b) {
        return {a.x - b.x, a.y - b.y, a.z - b.z};
    }
    friend constexpr BlochVector operator*(double s, BlochVector v) {
        return {s * v.x, s * v.y, s * v.z};
    }
    friend constexpr bool operator==(BlochVector a, BlochVector b) {
        return a.x == b.x && a.y == b.y && a.z == b.z;
    }
};

constexpr double dot(BlochVector a, BlochVector b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline const BlochVector kXAxis{1, 0, 0};
inline const BlochVector kYAxis{0, 1, 0};
inline const BlochVector kZAxis{0, 0, 1};

// rho = (I + sigma.r)/2; |r| = 1 pure, r = 0 fully mixed.
struct EnsembleState {
    BlochVector r{};

    EnsembleState() = default;
    explicit EnsembleState(BlochVector v) : r(v) {
        if (!r.finite() || r.norm() > 1.0 + kUnitTol)
            throw InvalidState("ensemble state requires |r| <= 1");
    }
};

// Dichotomic observable sigma.a for unit a, outcomes +1/-1.
struct Observable {
    BlochVector axis{0, 0, 1};
    std::string label;

    Observable() = default;
    explicit Observable(BlochVector a, std::string lbl = {})
        : axis(a), label(std::move(lbl)) {
        if (!axis.finite() || std::abs(axis.norm() - 1.0) > kUnitTol)
            throw InvalidObservable("observable axis must be unit-norm: " + label);
    }
};

// SO(3) matrix acting on Bloch vectors (qubit dynamics between measurements).
class Rotation {
  public:
    Rotation() : m_{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}} {}
    explicit Rotation(const std::array<std::array<double, 3>, 3>& m);

    static Rotation about_axis(BlochVector axis, double angle);

    double at(int i, int j) const { return m_[i][j]; }

    BlochVector apply(BlochVector v) const {
        return {m_[0][0] * v.x + m_[0][1] * v.y + m_[0][2] * v.z,
                m_[1][0] * v.x + m_[1][1] * v.y + m_[1][2] * v.z,
                m_[2][0] * v.x + m_[2][1] * v.y + m_[2][2] * v.z};
    }

  private:
    std::array<std::array<double, 3>, 3> m_;
};

// Tr[rho Pi_A^k] = (1 + k a.r)/2.
double outcome_probability(const EnsembleState& state, const Observable& obs, int k);

// Tr[Pi_A^k Pi_B^l] = (1 + k l a.b)/2. Symmetric in the two measurements.
double conditional_probability(const Observable& prev_obs, int prev_k,
                               const Observable& next_obs, int l);

// Post-measurement ensemble: the state of the projector for outcome k.
EnsembleState collapse(const Observable& obs, int k);

BlochVector apply_rotation(const Rotation& R, BlochVector v);

} // namespace siqkd
