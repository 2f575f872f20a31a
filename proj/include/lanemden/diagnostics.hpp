#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lanemden/errors.hpp"
#include "lanemden/exponents.hpp"
#include "lanemden/manifold.hpp"
#include "lanemden/quadrature.hpp"
#include "lanemden/shooting.hpp"

namespace lanemden {

struct PohozaevSample {
    double r = 0.0;
    double F = 0.0;
    double P = 0.0;
    double K = 0.0;
    double P_scaled = 0.0;  // P / psi^{n-1}
    double K_scaled = 0.0;  // K / psi^{n-1}
    double P_terms = 0.0;   // first-order sensitivity of P_scaled to the state
    double log_weight = -std::numeric_limits<double>::infinity();
};

inline double energy_F(const ShotState& s, const ExponentPair& e) {
    return s.du * s.dv + std::pow(std::fabs(s.u), e.p + 1.0) / (e.p + 1.0) +
           std::pow(std::fabs(s.v), e.q + 1.0) / (e.q + 1.0);
}

// K / psi^{n-1} = (1 + a) - 2(n-1) Theta psi'/psi with a = 1/(p+1) + 1/(q+1).
inline double kernel_scaled(const ManifoldProfile& m, const ExponentPair& e, double r, double th) {
    if (r <= 0.0) return 1.0 + e.harmonic() - 2.0 * double(m.n - 1) / double(m.n);
    return 1.0 + e.harmonic() - 2.0 * double(m.n - 1) * th * m.dlog_psi(r);
}

// Same kernel from the inner integral of psi^n psi''/psi'^2.
inline double kernel_scaled_integral_form(const ManifoldProfile& m, const ExponentPair& e, double r,
                                          const QuadratureConfig& cfg = {}) {
    const double n = double(m.n);
    const double inner = convexity_integral_scaled(m, r, cfg);  // divided by psi^{n-1}
    return (e.harmonic() - (n - 2.0) / n) - 2.0 * (n - 1.0) / n * inner * m.dlog_psi(r);
}

inline PohozaevSample pohozaev_at(const ShotState& s, const ManifoldProfile& m, const ExponentPair& e) {
    PohozaevSample ps;
    ps.r = s.r;
    ps.F = energy_F(s, e);
    ps.log_weight = s.log_weight;
    // P / psi^{n-1} = Theta [u'v' + u(u^p + w_v)/(p+1) + v(v^q + w_u)/(q+1)]
    const double tu = s.u * (signed_pow(s.u, e.p) + s.wv) / (e.p + 1.0);
    const double tv = s.v * (signed_pow(s.v, e.q) + s.wu) / (e.q + 1.0);
    ps.P_scaled = s.theta * (s.du * s.dv + tu + tv);
    // sum over state components of |dP/dy_k| |y_k|
    ps.P_terms = std::fabs(ps.P_scaled) +
                 s.theta * (3.0 * std::fabs(s.du * s.dv) + std::pow(std::fabs(s.u), e.p + 1.0) +
                            std::pow(std::fabs(s.v), e.q + 1.0) + 2.0 * std::fabs(s.u * s.wv) / (e.p + 1.0) +
                            2.0 * std::fabs(s.v * s.wu) / (e.q + 1.0));
    ps.K_scaled = kernel_scaled(m, e, s.r, s.theta);
    const double w = s.r > 0.0 ? std::exp(s.log_weight) : 0.0;
    ps.P = s.r > 0.0 ? ps.P_scaled * w : 0.0;
    ps.K = s.r > 0.0 ? ps.K_scaled * w : 0.0;
    return ps;
}

struct PohozaevScan {
    std::vector<PohozaevSample> samples;
    double max_P = -std::numeric_limits<double>::infinity();
    double max_abs_P = 0.0;
    double max_increment = -std::numeric_limits<double>::infinity();  // max of P(r_{i+1}) - P(r_i)
    double energy_residual = 0.0;    // integrated F' identity, relative to term scale
    double pohozaev_residual = 0.0;  // integrated P' identity, relative to term scale
    std::size_t sign_violations = 0;
    std::size_t monotonicity_violations = 0;

    bool identities_ok(double tol) const { return energy_residual <= tol && pohozaev_residual <= tol; }
};

// Evaluates F, P, K at every node and checks the derivative identities
// F' = -2(n-1)(psi'/psi) u'v' and P' = K u'v' in integrated form over each
// step of the dense output. Sign and monotonicity counts use the absolute
// tolerance tol plus the floating-point resolution of P.
inline PohozaevScan pohozaev_scan(const Trajectory& t, const ManifoldProfile& m, const ExponentPair& e,
                                  double tol = 1e-8) {
    PohozaevScan out;
    const auto& nodes = t.samples();
    out.samples.reserve(nodes.size());
    for (const auto& s : nodes) out.samples.push_back(pohozaev_at(s, m, e));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double nm1 = double(m.n - 1);
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const auto& a = out.samples[i];
        out.max_P = std::max(out.max_P, a.P);
        out.max_abs_P = std::max(out.max_abs_P, std::fabs(a.P));
        if (a.P > tol + 8.0 * eps * std::fabs(a.P)) ++out.sign_violations;
        if (i == 0) continue;
        const auto& b0 = out.samples[i - 1];
        const auto& s0 = nodes[i - 1];
        const auto& s1 = nodes[i];
        // everything below is divided by psi^{n-1}(r_i)
        const double L1 = a.log_weight;
        const double back = std::isfinite(b0.log_weight) ? std::exp(b0.log_weight - L1) : 0.0;
        const double dP = a.P_scaled - b0.P_scaled * back;
        const double wi = std::exp(L1);
        const double inc = std::isfinite(wi) ? dP * wi : (dP > 0.0 ? std::numeric_limits<double>::infinity() : dP);
        out.max_increment = std::max(out.max_increment, inc);
        const double res_scale = a.P_terms + b0.P_terms * back;
        if (dP > tol / (std::isfinite(wi) && wi > 0.0 ? wi : 1.0) + 8.0 * eps * res_scale) ++out.monotonicity_violations;

        if (!t.has_dense() || i < 2) continue;
        double iF = 0.0, iFabs = 0.0, iP = 0.0, iPabs = 0.0;
        auto fF = [&](double r) {
            const ShotState s = t.at(r);
            return -2.0 * nm1 * m.dlog_psi(r) * s.du * s.dv;
        };
        auto fP = [&](double r) {
            const ShotState s = t.at(r);
            return kernel_scaled(m, e, r, s.theta) * std::exp(s.log_weight - L1) * s.du * s.dv;
        };
        iF = gauss_legendre(fF, s0.r, s1.r);
        iFabs = gauss_legendre([&](double r) { return std::fabs(fF(r)); }, s0.r, s1.r);
        iP = gauss_legendre(fP, s0.r, s1.r);
        iPabs = gauss_legendre([&](double r) { return std::fabs(fP(r)); }, s0.r, s1.r);
        const double dF = a.F - b0.F;
        const double fscale = std::fabs(a.F) + std::fabs(b0.F) + iFabs;
        const double pscale = res_scale + iPabs;
        if (fscale > 0.0) out.energy_residual = std::max(out.energy_residual, std::fabs(dF - iF) / fscale);
        if (pscale > 0.0) out.pohozaev_residual = std::max(out.pohozaev_residual, std::fabs(dP - iP) / pscale);
    }
    return out;
}

// Tail bound quoted in the specification: [v(H) - xi^p T(H), v(H)].
inline std::pair<LimitEnclosure, LimitEnclosure> simple_tail_enclosure(const ShotState& s, double tail_theta,
                                                                       const ExponentPair& e, double xi,
                                                                       double eta) {
    LimitEnclosure lu, lv;
    lu.upper = s.u;
    lu.lower = s.u - std::pow(eta, e.q) * tail_theta;
    lv.upper = s.v;
    lv.lower = s.v - std::pow(xi, e.p) * tail_theta;
    lu.rigorous = lv.rigorous = true;
    return {lu, lv};
}

// Limit enclosures for a shot that stayed positive to its horizon.
inline std::pair<LimitEnclosure, LimitEnclosure> limit_enclosure(const ShotOutcome& o, const GeometricSummary& g,
                                                                 const ExponentPair& e,
                                                                 std::optional<double> certification_width = {},
                                                                 double extinction = 1e-6) {
    require(o.kind == OutcomeKind::PositiveToHorizon, "limit enclosure needs a shot positive to its horizon");
    const ShotState& s = o.last;
    if (g.complete()) {
        return {decay_enclosure(s.u, s.du, s.r, o.xi, extinction), decay_enclosure(s.v, s.dv, s.r, o.eta, extinction)};
    }
    const TailSample ts = g.tail_at(s.r);
    auto [lu, lv] = tail_enclosure(s, ts, e);
    auto [su, sv] = simple_tail_enclosure(s, ts.tail_theta, e, o.xi, o.eta);
    lu.lower = std::max(lu.lower, su.lower);
    lu.upper = std::min(lu.upper, su.upper);
    lv.lower = std::max(lv.lower, sv.lower);
    lv.upper = std::min(lv.upper, sv.upper);
    lu.vanishes = lu.upper <= extinction * o.xi;
    lv.vanishes = lv.upper <= extinction * o.eta;
    if (certification_width) {
        const double w = std::max(lu.width(), lv.width());
        if (w > *certification_width)
            fail(ErrorKind::EnclosureTooWide, "enclosure width " + std::to_string(w) + " at horizon " +
                                                  std::to_string(s.r) + " exceeds " +
                                                  std::to_string(*certification_width) + "; extend the horizon");
    }
    return {lu, lv};
}

struct LimitBounds {
    double u = std::numeric_limits<double>::infinity();
    double v = std::numeric_limits<double>::infinity();
};

// Explicit upper bounds on the limits of a globally positive solution.
inline LimitBounds limit_bounds(const ExponentPair& e, double theta) {
    require(e.p * e.q > 1.0, "limit bounds need pq > 1");
    require(theta > 0.0 && std::isfinite(theta), "limit bounds need a finite theta");
    const double p = e.p, q = e.q, d = p * q - 1.0;
    auto logb = [d](double p_, double q_, double th) {
        return ((q_ + 1.0) * std::log(p_) + (q_ + 2.0) * std::log(q_ + 1.0) - std::log(p_ + 1.0) -
                (q_ + 1.0) * std::log(d) - (q_ + 1.0) * std::log(th)) / d;
    };
    return {std::exp(logb(p, q, theta)), std::exp(logb(q, p, theta))};
}

struct AbsBoundCheck {
    bool satisfied = true;
    double margin_u = 0.0;  // bound - upper; negative is the excess
    double margin_v = 0.0;
    LimitBounds bounds;
};

inline AbsBoundCheck abs_bound_check(const std::pair<LimitEnclosure, LimitEnclosure>& enc, const ExponentPair& e,
                                     double theta) {
    AbsBoundCheck c;
    c.bounds = limit_bounds(e, theta);
    c.margin_u = c.bounds.u - enc.first.upper;
    c.margin_v = c.bounds.v - enc.second.upper;
    c.satisfied = !(c.margin_u < 0.0) && !(c.margin_v < 0.0);
    return c;
}

struct LedgerPoint {
    double R = 0.0;
    double I_mixed = 0.0;
    double I_u = 0.0;
    double I_v = 0.0;
    double residual_u = 0.0;  // |I_mixed - psi^{n-1} v' u - I_u| / |I_u|
    double residual_v = 0.0;  // |I_mixed - psi^{n-1} u' v - I_v| / |I_v|
};

struct EnergyLedger {
    std::vector<LedgerPoint> points;
    double max_residual() const {
        double m = 0.0;
        for (const auto& p : points) m = std::max({m, p.residual_u, p.residual_v});
        return m;
    }
};

// Cumulative energies over the steps of the dense output, read out at the
// requested radii (an empty list reads them out at every node).
inline EnergyLedger energy_ledger(const Trajectory& t, const ManifoldProfile&, const ExponentPair& e,
                                  std::vector<double> checkpoints = {}) {
    EnergyLedger L;
    const auto& nodes = t.samples();
    if (nodes.size() < 2) return L;
    const bool all = checkpoints.empty();
    if (all)
        for (const auto& s : nodes) checkpoints.push_back(s.r);
    std::sort(checkpoints.begin(), checkpoints.end());
    for (double R : checkpoints) require(R <= t.horizon() * (1.0 + 1e-15), "ledger checkpoint beyond the trajectory");

    double Im = 0.0, Iu = 0.0, Iv = 0.0;
    auto add = [&](double a, double b) {
        if (b <= a) return;
        auto wgt = [&](const ShotState& s) { return s.r > 0.0 ? std::exp(s.log_weight) : 0.0; };
        Im += gauss_legendre([&](double r) { const ShotState s = t.at(r); return s.du * s.dv * wgt(s); }, a, b);
        Iu += gauss_legendre(
            [&](double r) { const ShotState s = t.at(r); return std::pow(std::fabs(s.u), e.p + 1.0) * wgt(s); }, a, b);
        Iv += gauss_legendre(
            [&](double r) { const ShotState s = t.at(r); return std::pow(std::fabs(s.v), e.q + 1.0) * wgt(s); }, a, b);
    };
    auto record = [&](double R) {
        const ShotState s = t.at(R);
        LedgerPoint p;
        p.R = R;
        p.I_mixed = Im;
        p.I_u = Iu;
        p.I_v = Iv;
        // psi^{n-1} u' = w_u V
        const double V = s.r > 0.0 ? s.volume() : 0.0;
        const double bv = s.wu * V * s.v, bu = s.wv * V * s.u;
        p.residual_v = Iv > 0.0 ? std::fabs(Im - bv - Iv) / Iv : std::fabs(Im - bv - Iv);
        p.residual_u = Iu > 0.0 ? std::fabs(Im - bu - Iu) / Iu : std::fabs(Im - bu - Iu);
        L.points.push_back(p);
    };
    std::size_t c = 0;
    double pos = 0.0;
    for (std::size_t i = 1; i < nodes.size() && c < checkpoints.size(); ++i) {
        const double r1 = nodes[i].r;
        while (c < checkpoints.size() && checkpoints[c] <= r1) {
            add(pos, checkpoints[c]);
            pos = checkpoints[c];
            record(pos);
            ++c;
        }
        add(pos, r1);
        pos = r1;
    }
    while (c < checkpoints.size()) record(checkpoints[c++]);
    return L;
}

struct DivergenceVerdict {
    bool increasing = true;
    bool exceeds = false;
    bool flattening = false;
    double ratio = 0.0;  // I(R_last) / reference
    double slope = 0.0;  // d log I / d log R over the last decade
    bool diverges() const { return increasing && exceeds && !flattening; }
};

// Finite-horizon proxy for an energy that grows without bound.
inline DivergenceVerdict divergence_verdict(const EnergyLedger& L, double reference, double multiple = 10.0,
                                            double flat_slope = 0.05) {
    DivergenceVerdict d;
    require(!L.points.empty(), "empty ledger");
    for (std::size_t i = 1; i < L.points.size(); ++i)
        if (L.points[i].I_mixed < L.points[i - 1].I_mixed) d.increasing = false;
    const LedgerPoint& last = L.points.back();
    d.ratio = last.I_mixed / reference;
    d.exceeds = d.ratio > multiple;
    const double R_dec = last.R / 10.0;
    for (auto it = L.points.rbegin(); it != L.points.rend(); ++it) {
        if (it->R <= R_dec && it->R > 0.0 && it->I_mixed > 0.0) {
            d.slope = std::log(last.I_mixed / it->I_mixed) / std::log(last.R / it->R);
            d.flattening = !(d.slope >= flat_slope);
            break;
        }
    }
    return d;
}

// u v / int_r^inf Theta, monitored along incomplete trajectories.
inline std::vector<std::pair<double, double>> product_statistic(const Trajectory& t, const GeometricSummary& g) {
    std::vector<std::pair<double, double>> out;
    if (g.complete()) return out;
    for (const auto& ts : g.tail) {
        if (ts.radius > t.horizon()) break;
        const ShotState s = t.at(ts.radius);
        out.emplace_back(ts.radius, s.u * s.v / ts.tail_theta);
    }
    return out;
}

}  // namespace lanemden
