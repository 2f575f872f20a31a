#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lanemden/errors.hpp"
#include "lanemden/exponents.hpp"
#include "lanemden/quadrature.hpp"

namespace lanemden {

enum class Completeness { Complete, Incomplete };
enum class CompletenessSource { Declared, NumericallyInferred };

inline const char* to_string(Completeness c) { return c == Completeness::Complete ? "complete" : "incomplete"; }
inline const char* to_string(CompletenessSource s) {
    return s == CompletenessSource::Declared ? "declared" : "numerically-inferred";
}

// Warping function of a model manifold. Implementations with growth faster
// than exponential should override the logarithmic hooks so that nothing
// downstream forms psi itself.
class Warping {
public:
    virtual ~Warping() = default;
    virtual double psi(double r) const = 0;
    virtual double dpsi(double r) const = 0;
    virtual double d2psi(double r) const = 0;

    virtual double log_psi(double r) const { return std::log(psi(r)); }
    // psi'/psi
    virtual double dlog_psi(double r) const { return dpsi(r) / psi(r); }
    // psi''/psi
    virtual double d2psi_over_psi(double r) const { return d2psi(r) / psi(r); }
    // log psi(r + d) - log psi(r), d > -r
    virtual double log_psi_shift(double r, double d) const { return log_psi(r + d) - log_psi(r); }
};

class EuclideanWarping final : public Warping {
public:
    double psi(double r) const override { return r; }
    double dpsi(double) const override { return 1.0; }
    double d2psi(double) const override { return 0.0; }
    double log_psi(double r) const override { return std::log(r); }
    double dlog_psi(double r) const override { return 1.0 / r; }
    double d2psi_over_psi(double) const override { return 0.0; }
    double log_psi_shift(double r, double d) const override { return std::log1p(d / r); }
};

// psi = sinh(k r) / k
class HyperbolicWarping final : public Warping {
public:
    explicit HyperbolicWarping(double k) : k_(k) {}
    double psi(double r) const override { return std::sinh(k_ * r) / k_; }
    double dpsi(double r) const override { return std::cosh(k_ * r); }
    double d2psi(double r) const override { return k_ * std::sinh(k_ * r); }
    double log_psi(double r) const override {
        const double x = k_ * r;
        if (x < 20.0) return std::log(std::sinh(x) / k_);
        return x - std::log(2.0 * k_) + std::log1p(-std::exp(-2.0 * x));
    }
    double dlog_psi(double r) const override { return k_ / std::tanh(k_ * r); }
    double d2psi_over_psi(double) const override { return k_ * k_; }
    double log_psi_shift(double r, double d) const override {
        const double a = k_ * (r + d), b = k_ * r;
        return k_ * d + std::log(-std::expm1(-2.0 * a)) - std::log(-std::expm1(-2.0 * b));
    }
    double curvature() const { return k_; }

private:
    double k_;
};

// psi = r exp(r^alpha)
class ExpPowerWarping final : public Warping {
public:
    explicit ExpPowerWarping(double alpha) : a_(alpha) {}
    double psi(double r) const override { return r * std::exp(std::pow(r, a_)); }
    double dpsi(double r) const override {
        const double ra = std::pow(r, a_);
        return std::exp(ra) * (1.0 + a_ * ra);
    }
    double d2psi(double r) const override {
        const double ra = std::pow(r, a_);
        return std::exp(ra) * a_ * std::pow(r, a_ - 1.0) * (1.0 + a_ + a_ * ra);
    }
    double log_psi(double r) const override { return std::log(r) + std::pow(r, a_); }
    double dlog_psi(double r) const override { return 1.0 / r + a_ * std::pow(r, a_ - 1.0); }
    double d2psi_over_psi(double r) const override {
        return a_ * std::pow(r, a_ - 2.0) * (1.0 + a_ + a_ * std::pow(r, a_));
    }
    double log_psi_shift(double r, double d) const override {
        const double l = std::log1p(d / r);
        return l + std::pow(r, a_) * std::expm1(a_ * l);
    }
    double alpha() const { return a_; }

private:
    double a_;
};

// User-supplied warping from three callables.
class FunctionWarping final : public Warping {
public:
    using Fn = std::function<double(double)>;
    FunctionWarping(Fn psi, Fn dpsi, Fn d2psi) : f_(std::move(psi)), df_(std::move(dpsi)), d2f_(std::move(d2psi)) {}
    double psi(double r) const override { return f_(r); }
    double dpsi(double r) const override { return df_(r); }
    double d2psi(double r) const override { return d2f_(r); }

private:
    Fn f_, df_, d2f_;
};

struct ManifoldProfile {
    std::string name;
    int n = 3;
    std::shared_ptr<const Warping> warp;
    std::optional<Completeness> completeness_hint;

    double psi(double r) const { return warp->psi(r); }
    double dpsi(double r) const { return warp->dpsi(r); }
    double d2psi(double r) const { return warp->d2psi(r); }
    double log_psi(double r) const { return warp->log_psi(r); }
    double dlog_psi(double r) const { return warp->dlog_psi(r); }
    double d2psi_over_psi(double r) const { return warp->d2psi_over_psi(r); }
    double log_psi_shift(double r, double d) const { return warp->log_psi_shift(r, d); }
    // log psi^{n-1}
    double log_weight(double r) const { return double(n - 1) * log_psi(r); }
};

enum class Family { Euclidean, Hyperbolic, ExpPower };

inline const char* to_string(Family f) {
    switch (f) {
        case Family::Euclidean: return "euclidean";
        case Family::Hyperbolic: return "hyperbolic";
        case Family::ExpPower: return "exp_power";
    }
    return "?";
}

inline std::optional<Family> parse_family(const std::string& s) {
    if (s == "euclidean") return Family::Euclidean;
    if (s == "hyperbolic") return Family::Hyperbolic;
    if (s == "exp_power") return Family::ExpPower;
    return std::nullopt;
}

struct ProfileSpec {
    Family family = Family::Euclidean;
    int n = 3;
    double curvature = 1.0;
    double alpha = 3.0;

    bool operator==(const ProfileSpec&) const = default;
};

inline void validate_profile(const ManifoldProfile& m) {
    require(m.warp != nullptr, "profile has no warping function");
    require(m.n >= 3, "dimension must be at least 3");
    const double r = 1e-8;
    require(std::fabs(m.psi(r) / r - 1.0) < 1e-6, "profile '" + m.name + "' violates psi(r)/r -> 1 at the pole");
    for (double s = 1e-3; s <= 50.0; s *= 1.5) {
        const double lp = m.log_psi(s);
        require(!std::isnan(lp) && lp > -std::numeric_limits<double>::infinity(),
                "profile '" + m.name + "' is not positive at r = " + std::to_string(s));
    }
}

inline ManifoldProfile builtin_profile(const ProfileSpec& spec) {
    require(spec.n >= 3, "dimension must be at least 3");
    ManifoldProfile m;
    m.n = spec.n;
    switch (spec.family) {
        case Family::Euclidean:
            m.name = "euclidean";
            m.warp = std::make_shared<EuclideanWarping>();
            m.completeness_hint = Completeness::Complete;
            break;
        case Family::Hyperbolic:
            require(spec.curvature > 0.0, "hyperbolic curvature scale must be positive");
            m.name = "hyperbolic(" + std::to_string(spec.curvature) + ")";
            m.warp = std::make_shared<HyperbolicWarping>(spec.curvature);
            m.completeness_hint = Completeness::Complete;
            break;
        case Family::ExpPower:
            require(spec.alpha > 0.0, "exp_power exponent alpha must be positive");
            m.name = "exp_power(" + std::to_string(spec.alpha) + ")";
            m.warp = std::make_shared<ExpPowerWarping>(spec.alpha);
            m.completeness_hint = spec.alpha > 2.0 ? Completeness::Incomplete : Completeness::Complete;
            break;
    }
    validate_profile(m);
    return m;
}

inline ManifoldProfile builtin_profile(Family f, int n, double param = 0.0) {
    ProfileSpec s;
    s.family = f;
    s.n = n;
    if (f == Family::Hyperbolic) s.curvature = param > 0.0 ? param : 1.0;
    if (f == Family::ExpPower) s.alpha = param;
    return builtin_profile(s);
}

inline ManifoldProfile custom_profile(std::string name, int n, FunctionWarping::Fn psi, FunctionWarping::Fn dpsi,
                                      FunctionWarping::Fn d2psi, std::optional<Completeness> hint = std::nullopt) {
    ManifoldProfile m;
    m.name = std::move(name);
    m.n = n;
    m.warp = std::make_shared<FunctionWarping>(std::move(psi), std::move(dpsi), std::move(d2psi));
    m.completeness_hint = hint;
    validate_profile(m);
    return m;
}

struct QuadratureConfig {
    double rel_tol = 1e-10;
    double series_radius = 1e-12;
};

namespace detail {

// Integral over t in [0, span] of exp(c * shift(t)) where shift is
// nonincreasing away from t = 0, using panels that double from length ell.
template <class Shift>
QuadResult decaying_panels(Shift&& shift, double c, double span, double ell, double rel_tol) {
    QuadResult acc;
    double a = 0.0, b = std::min(ell, span);
    while (a < span) {
        auto f = [&](double t) { return std::exp(c * shift(t)); };
        const QuadResult q = adaptive_integrate(f, a, b, rel_tol);
        acc.value += q.value;
        acc.error += q.error;
        
        if (b >= span) break;
        if (q.value <= 1e-18 * acc.value && c * shift(b) < -40.0) break;
        a = b;
        b = std::min(2.0 * b, span);
    }
    return acc;
}

}  // namespace detail

// Theta(r) = psi^{1-n}(r) * int_0^r psi^{n-1}
inline double theta(const ManifoldProfile& m, double r, const QuadratureConfig& cfg = {}) {
    require(r > 0.0, "theta requires r > 0");
    if (r < cfg.series_radius) return r / double(m.n);
    const double c = double(m.n - 1);
    const double ell = std::min(r, 1.0 / (c * m.dlog_psi(r)));
    auto shift = [&](double t) { return t >= r ? -std::numeric_limits<double>::infinity() : m.log_psi_shift(r, -t); };
    const QuadResult q = detail::decaying_panels(shift, c, r, ell, cfg.rel_tol);
    check_converged(q, cfg.rel_tol, "theta quadrature");
    return q.value;
}

// int_r^inf (psi(r)/psi(s))^{n-1} ds
inline double inverse_weight_tail(const ManifoldProfile& m, double r, const QuadratureConfig& cfg = {}) {
    const double c = double(m.n - 1);
    const double ell = 1.0 / (c * m.dlog_psi(r));
    double total = 0.0, a = 0.0, b = ell;
    for (int k = 0; k < 200; ++k) {
        auto f = [&](double t) { return std::exp(-c * m.log_psi_shift(r, t)); };
        const QuadResult q = adaptive_integrate(f, a, b, cfg.rel_tol);
        total += q.value;
        if (q.value <= 1e-16 * total && c * m.log_psi_shift(r, b) > 40.0) return total;
        a = b;
        b *= 2.0;
        if (b > 1e12 * std::max(1.0, r)) break;
    }
    return std::numeric_limits<double>::infinity();
}

// int_0^r psi^n psi''/psi'^2 ds divided by psi^{n-1}(r).
inline double convexity_integral_scaled(const ManifoldProfile& m, double r, const QuadratureConfig& cfg = {}) {
    const double n = double(m.n - 1);
    const double ell = std::min(r, 1.0 / (n * m.dlog_psi(r)));
    double acc = 0.0, err = 0.0, l1 = 0.0, a = 0.0, b = ell;
    while (a < r) {
        auto f = [&](double t) {
            if (t >= r) return 0.0;
            const double s = r - t;
            const double lp = m.dlog_psi(s);
            return std::exp(n * m.log_psi_shift(r, -t)) * m.d2psi_over_psi(s) / (lp * lp);
        };
        const QuadResult q = adaptive_integrate(f, a, b, cfg.rel_tol);
        acc += q.value;
        err += q.error;
        l1 += std::fabs(q.value);
        if (b >= r) break;
        if (std::fabs(q.value) <= 1e-18 * l1 && n * m.log_psi_shift(r, -b) < -40.0) break;
        a = b;
        b = std::min(2.0 * b, r);
    }
    return acc;
}

struct ThetaTotal {
    enum class Kind { Finite, Infinite, Ambiguous };
    Kind kind = Kind::Ambiguous;
    double value = std::numeric_limits<double>::infinity();
    double tail_exponent = 0.0;  // fitted local decay exponent of Theta
    double reached = 0.0;        // radius where the decision was taken
};

inline const char* to_string(ThetaTotal::Kind k) {
    switch (k) {
        case ThetaTotal::Kind::Finite: return "finite";
        case ThetaTotal::Kind::Infinite: return "infinite";
        case ThetaTotal::Kind::Ambiguous: return "ambiguous";
    }
    return "?";
}

inline double integrate_theta(const ManifoldProfile& m, double a, double b, const QuadratureConfig& cfg) {
    auto f = [&](double r) { return r <= 0.0 ? 0.0 : theta(m, r, cfg); };
    return adaptive_integrate(f, a, b, cfg.rel_tol).value;
}

// theta = int_0^inf Theta, with a power-law tail once the decay exponent of
// Theta over doubling panels has settled.
inline ThetaTotal theta_total(const ManifoldProfile& m, const QuadratureConfig& cfg = {}) {
    ThetaTotal out;
    double sum = integrate_theta(m, 0.0, 0.5, cfg) + integrate_theta(m, 0.5, 1.0, cfg);
    double R = 1.0;
    double th_R = theta(m, R, cfg);
    std::vector<double> beta;
    while (R < 1e12) {
        const double th_2R = theta(m, 2.0 * R, cfg);
        sum += integrate_theta(m, R, 2.0 * R, cfg);
        beta.push_back(-std::log2(th_2R / th_R));
        R *= 2.0;
        th_R = th_2R;
        if (beta.size() < 3 || R < 64.0) continue;
        const double b0 = beta[beta.size() - 1], b1 = beta[beta.size() - 2], b2 = beta[beta.size() - 3];
        const double lo = std::min({b0, b1, b2}), hi = std::max({b0, b1, b2});
        out.tail_exponent = b0;
        out.reached = R;
        if (lo >= 1.05 && hi - lo < 1e-3) {
            out.kind = ThetaTotal::Kind::Finite;
            out.value = sum + th_R * R / (b0 - 1.0);
            return out;
        }
        if (hi <= 0.95) {
            out.kind = ThetaTotal::Kind::Infinite;
            return out;
        }
    }
    out.kind = ThetaTotal::Kind::Ambiguous;
    out.reached = R;
    return out;
}

// Tail quantities at radius H used by the far-field limit enclosures.
struct TailSample {
    double radius = 0.0;
    double theta = 0.0;       // Theta(H)
    double tail_theta = 0.0;  // int_H^inf Theta
    double cross = 0.0;       // Theta(H) * int_H^inf (psi(H)/psi(s))^{n-1} ds
};

struct GeometricSummary {
    ManifoldProfile profile;
    QuadratureConfig quad;
    ThetaTotal total;
    Completeness completeness = Completeness::Complete;
    CompletenessSource source = CompletenessSource::Declared;
    std::vector<TailSample> tail;  // checkpoint table, incomplete profiles only

    double theta_of(double r) const { return theta(profile, r, quad); }
    bool complete() const { return completeness == Completeness::Complete; }
    double theta_value() const {
        return total.kind == ThetaTotal::Kind::Finite ? total.value : std::numeric_limits<double>::infinity();
    }

    TailSample tail_at(double H) const {
        TailSample s;
        s.radius = H;
        s.theta = theta_of(H);
        if (complete()) {
            s.tail_theta = std::numeric_limits<double>::infinity();
            s.cross = s.theta * inverse_weight_tail(profile, H, quad);
            return s;
        }
        auto it = std::lower_bound(tail.begin(), tail.end(), H,
                                   [](const TailSample& t, double r) { return t.radius < r; });
        if (it != tail.end() && it->radius == H) return *it;
        if (it == tail.end()) {
            const TailSample& last = tail.back();
            const double beta = total.tail_exponent;
            s.tail_theta = last.tail_theta * std::pow(last.radius / H, beta - 1.0);
        } else {
            s.tail_theta = integrate_theta(profile, H, it->radius, quad) + it->tail_theta;
        }
        s.cross = s.theta * inverse_weight_tail(profile, H, quad);
        return s;
    }
};

struct SummaryOptions {
    double table_start = 0.25;
    double table_ratio = 1.05;
    double table_end = 64.0;
};

inline GeometricSummary summarize(const ManifoldProfile& m, const QuadratureConfig& cfg = {},
                                  const SummaryOptions& opt = {}) {
    GeometricSummary g;
    g.profile = m;
    g.quad = cfg;
    g.total = theta_total(m, cfg);
    if (m.completeness_hint) {
        g.completeness = *m.completeness_hint;
        g.source = CompletenessSource::Declared;
    } else {
        if (g.total.kind == ThetaTotal::Kind::Ambiguous)
            fail(ErrorKind::AmbiguousCompleteness, "tail of Theta for profile '" + m.name +
                                                       "' is unresolved up to r = " + std::to_string(g.total.reached) +
                                                       "; supply a completeness hint");
        g.completeness =
            g.total.kind == ThetaTotal::Kind::Finite ? Completeness::Incomplete : Completeness::Complete;
        g.source = CompletenessSource::NumericallyInferred;
    }
    if (g.completeness == Completeness::Incomplete) {
        require(g.total.kind == ThetaTotal::Kind::Finite,
                "profile '" + m.name + "' is declared incomplete but int Theta could not be evaluated");
        std::vector<double> radii;
        for (double r = opt.table_start; r <= opt.table_end * (1.0 + 1e-12); r *= opt.table_ratio) radii.push_back(r);
        const std::size_t K = radii.size();
        g.tail.resize(K);
        // far tail beyond the table from doubling panels plus a power law
        double far = 0.0, R = radii.back();
        for (int k = 0; k < 12; ++k, R *= 2.0) far += integrate_theta(m, R, 2.0 * R, cfg);
        const double thR = theta(m, R, cfg), th_half = theta(m, R / 2.0, cfg);
        const double beta = -std::log2(thR / th_half);
        if (beta > 1.0) far += thR * R / (beta - 1.0);
        double acc = far;
        for (std::size_t k = K; k-- > 0;) {
            if (k + 1 < K) acc += integrate_theta(m, radii[k], radii[k + 1], cfg);
            TailSample& s = g.tail[k];
            s.radius = radii[k];
            s.theta = theta(m, radii[k], cfg);
            s.tail_theta = acc;
            s.cross = s.theta * inverse_weight_tail(m, radii[k], cfg);
        }
    }
    return g;
}

struct VolumeConvexity {
    bool convex = true;
    std::optional<double> witness;
    double min_margin = std::numeric_limits<double>::infinity();
    std::string method;
};

inline std::vector<double> convexity_grid(double r_max = 20.0) {
    std::vector<double> g;
    for (double r = 1e-3; r < 1.0; r *= 1.1) g.push_back(r);
    for (int k = 0; 1.0 + 0.01 * k <= r_max + 1e-12; ++k) g.push_back(1.0 + 0.01 * k);
    return g;
}

// Critical pairs: sign of the scaled integral of psi^n psi''/psi'^2.
// Supercritical pairs: sign of the second derivative of V^gamma, which is
// that of (n-1) Theta psi'/psi - (1 - gamma).
inline VolumeConvexity check_volume_convexity(const ManifoldProfile& m, const ExponentPair& e,
                                              const std::vector<double>& grid = convexity_grid(),
                                              const QuadratureConfig& cfg = {}) {
    require(e.p * e.q > 1.0, "volume convexity needs pq > 1");
    require(e.critical_or_super(m.n), "volume convexity needs the critical-supercritical regime");
    VolumeConvexity out;
    const bool critical = e.regime(m.n) == Regime::Critical;
    out.method = critical ? "integral" : "second-derivative";
    const double gamma = e.volume_exponent();
    for (double r : grid) {
        double margin;
        if (critical) {
            margin = convexity_integral_scaled(m, r, cfg) * m.dlog_psi(r);
        } else {
            margin = double(m.n - 1) * theta(m, r, cfg) * m.dlog_psi(r) - (1.0 - gamma);
        }
        out.min_margin = std::min(out.min_margin, margin);
        if (margin < -1e-9 && out.convex) {
            out.convex = false;
            out.witness = r;
        }
    }
    return out;
}

}  // namespace lanemden
