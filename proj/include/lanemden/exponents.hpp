#pragma once

#include <cmath>
#include <string>

#include "lanemden/errors.hpp"

namespace lanemden {

enum class Regime { Subcritical, Critical, Supercritical };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::Subcritical: return "subcritical";
        case Regime::Critical: return "critical";
        case Regime::Supercritical: return "supercritical";
    }
    return "?";
}

struct ExponentPair {
    double p = 5.0;
    double q = 5.0;

    ExponentPair() = default;
    ExponentPair(double p_, double q_) : p(p_), q(q_) {
        require(p > 0.0 && q > 0.0 && std::isfinite(p) && std::isfinite(q), "exponents must be positive and finite");
    }

    // 1/(p+1) + 1/(q+1)
    double harmonic() const { return 1.0 / (p + 1.0) + 1.0 / (q + 1.0); }

    Regime regime(int n) const {
        const double d = harmonic() - double(n - 2) / double(n);
        if (std::fabs(d) <= 1e-12) return Regime::Critical;
        return d < 0.0 ? Regime::Supercritical : Regime::Subcritical;
    }

    bool critical_or_super(int n) const { return regime(n) != Regime::Subcritical; }

    // Exponent of the volume power whose convexity is tested.
    double volume_exponent() const { return (p * q - 1.0) / (2.0 * (p + 1.0) * (q + 1.0)); }

    // Slope of the Euclidean existence curve in log-log coordinates.
    double scaling_slope() const { return (p + 1.0) / (q + 1.0); }

    bool operator==(const ExponentPair&) const = default;
};

// q solving the critical relation for given p and n.
inline double critical_partner(double p, int n) {
    const double rest = double(n - 2) / double(n) - 1.0 / (p + 1.0);
    require(rest > 0.0, "no critical partner exponent for this p");
    return 1.0 / rest - 1.0;
}

}  // namespace lanemden
