#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lanemden/diagnostics.hpp"
#include "lanemden/errors.hpp"
#include "lanemden/exponents.hpp"
#include "lanemden/manifold.hpp"
#include "lanemden/shooting.hpp"

namespace lanemden {

// Regime and convexity preconditions shared by the bisection drivers.
struct StructureCheck {
    Regime regime = Regime::Critical;
    std::optional<VolumeConvexity> convexity;
    std::string warning;

    bool enforce() const { return regime != Regime::Subcritical; }
};

inline StructureCheck check_structure(const ShootingProblem& prob) {
    StructureCheck sc;
    sc.regime = prob.exps.regime(prob.n());
    if (!sc.enforce()) {
        sc.warning = "WARNING: subcritical exponents; existence structure is not guaranteed and bracket "
                     "invariants are not enforced";
        return sc;
    }
    if (prob.exps.p * prob.exps.q <= 1.0) {
        sc.warning = "WARNING: pq <= 1; convexity certificate skipped";
        return sc;
    }
    sc.convexity = check_volume_convexity(prob.profile(), prob.exps);
    if (!sc.convexity->convex)
        fail(ErrorKind::InvalidArgument, "volume convexity certificate fails at r = " +
                                             std::to_string(sc.convexity->witness.value_or(0.0)) + " on profile " +
                                             prob.profile().name);
    return sc;
}

struct CurvePoint {
    double xi = 0.0;
    double eta = 0.0;
    double bracket_width = 0.0;
    double eta_low = 0.0;   // last eta classified B
    double eta_high = 0.0;  // last eta classified A
    int bisections = 0;
    bool warm_started = false;
    std::string warning;
    ShotOutcome witness;
};

struct BandPoint {
    double xi = 0.0;
    double eta_m = 0.0;
    double eta_M = 0.0;
    double width_m = 0.0;
    double width_M = 0.0;
    double seed = 0.0;  // first global-proxy eta found by the scan
    double feasible_low = 0.0;
    double feasible_high = 0.0;
    int shots = 0;
    bool warm_started = false;
    std::string warning;
    ShotOutcome witness_m, witness_mid, witness_M;

    double gap() const { return eta_M - eta_m; }
};

namespace detail {

inline ShotOutcome quiet_shot(const ShootingProblem& prob, double xi, double eta, const IntegratorConfig& cfg) {
    IntegratorConfig c = cfg;
    c.record = false;
    return integrate_shot(prob, xi, eta, c);
}

inline void require_completeness(const ShootingProblem& prob, bool complete) {
    if (prob.geometry.complete() == complete) return;
    if (complete)
        fail(ErrorKind::ProfileMismatch,
             "profile is stochastically incomplete; use band (the existence curve applies to complete models only)");
    fail(ErrorKind::ProfileMismatch,
         "profile is stochastically complete; use curve (the existence band applies to incomplete models only)");
}

// Two-class bisection: `low_side` holds at lo, the other class at hi.
struct Bisection {
    double lo, hi;
    int steps = 0;
    bool tie = false;
    double tie_eta = 0.0;
};

}  // namespace detail

// Existence curve point on a complete profile.
inline CurvePoint find_eta(const ShootingProblem& prob, double xi, double tol, const IntegratorConfig& cfg = {},
                           std::optional<SeedBrackets> warm = {}, const StructureCheck* pre = nullptr) {
    require(xi > 0.0 && std::isfinite(xi), "xi must be positive");
    require(tol > 0.0, "tolerance must be positive");
    detail::require_completeness(prob, true);
    const StructureCheck sc = pre ? *pre : check_structure(prob);

    CurvePoint cp;
    cp.xi = xi;
    cp.warning = sc.warning;
    SeedBrackets b;
    bool have = false;
    if (warm && warm->eta_low > 0.0 && warm->eta_low < warm->eta_high) {
        const auto lo = detail::quiet_shot(prob, xi, warm->eta_low, cfg);
        const auto hi = detail::quiet_shot(prob, xi, warm->eta_high, cfg);
        if (lo.lean == ShotClass::B && hi.lean == ShotClass::A) {
            b = *warm;
            have = true;
            cp.warm_started = true;
        }
    }
    if (!have) b = sc.enforce() ? ab_seed_brackets(prob, xi, cfg) : seed_brackets_unconfirmed(prob.geometry, prob.exps, xi);

    double lo = b.eta_low, hi = b.eta_high;
    std::optional<double> tie;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const auto o = detail::quiet_shot(prob, xi, mid, cfg);
        ++cp.bisections;
        if (o.lean == ShotClass::A) {
            hi = mid;
        } else if (o.lean == ShotClass::B) {
            lo = mid;
        } else if (o.lean == ShotClass::Global) {
            tie = mid;
            break;
        } else if (sc.enforce()) {
            fail(ErrorKind::BracketInvariantBroken,
                 "shot at eta = " + std::to_string(mid) + " could not be classified; extend the horizon");
        } else {
            break;
        }
    }
    cp.eta_low = lo;
    cp.eta_high = hi;
    cp.eta = tie ? *tie : 0.5 * (lo + hi);
    cp.bracket_width = tie ? 0.0 : hi - lo;
    cp.witness = integrate_shot(prob, xi, cp.eta, cfg);
    return cp;
}

inline CurvePoint find_eta(const ManifoldProfile& m, const ExponentPair& e, double xi, double tol,
                           const IntegratorConfig& cfg = {}) {
    return find_eta(ShootingProblem(m, e), xi, tol, cfg);
}

// Range allowed by the limit constraints of a globally positive solution:
// eta <= theta xi^p + (xi/theta)^{1/q}, and symmetrically xi bounds eta below.
inline std::pair<double, double> feasibility_interval(const ExponentPair& e, double theta, double xi) {
    require(theta > 0.0 && std::isfinite(theta), "feasibility interval needs a finite theta");
    const double hi = theta * std::pow(xi, e.p) + std::pow(xi / theta, 1.0 / e.q);
    auto g = [&](double eta) { return theta * std::pow(eta, e.q) + std::pow(eta / theta, 1.0 / e.p); };
    double a = hi, b = hi;
    while (g(a) > xi) a *= 0.5;
    while (g(b) < xi) b *= 2.0;
    for (int k = 0; k < 200 && b - a > 1e-15 * b; ++k) {
        const double m = 0.5 * (a + b);
        (g(m) < xi ? a : b) = m;
    }
    return {a, hi};
}

// Existence band on an incomplete profile.
inline BandPoint find_band(const ShootingProblem& prob, double xi, double tol, const IntegratorConfig& cfg = {},
                           std::optional<std::pair<double, double>> warm = {}, const StructureCheck* pre = nullptr) {
    require(xi > 0.0 && std::isfinite(xi), "xi must be positive");
    require(tol > 0.0, "tolerance must be positive");
    detail::require_completeness(prob, false);
    const StructureCheck sc = pre ? *pre : check_structure(prob);
    const ExponentPair& e = prob.exps;

    BandPoint bp;
    bp.xi = xi;
    bp.warning = sc.warning;
    std::tie(bp.feasible_low, bp.feasible_high) = feasibility_interval(e, prob.geometry.theta_value(), xi);

    auto shoot = [&](double eta) {
        ++bp.shots;
        return detail::quiet_shot(prob, xi, eta, cfg);
    };
    auto contrary = [&](double eta, ShotClass got, const char* where) {
        fail(ErrorKind::BracketInvariantBroken, std::string("shot at eta = ") + std::to_string(eta) + " classified " +
                                                    to_string(got) + " inside the " + where + " bracket");
    };

    // Two-class bisection between a `low_cls` point and a `high_cls` point.
    auto bisect = [&](double lo, double hi, ShotClass low_cls, ShotClass high_cls, const char* where) {
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            const auto o = shoot(mid);
            if (o.cls == low_cls)
                lo = mid;
            else if (o.cls == high_cls)
                hi = mid;
            else
                contrary(mid, o.cls, where);
        }
        return std::pair{lo, hi};
    };

    std::optional<double> b_eta, a_eta, g_eta;
    auto record = [&](double eta, ShotClass c) {
        if (c == ShotClass::B) b_eta = std::max(b_eta.value_or(eta), eta);
        if (c == ShotClass::A) a_eta = std::min(a_eta.value_or(eta), eta);
        if (c == ShotClass::Global && !g_eta) g_eta = eta;
    };

    if (warm && warm->first > 0.0 && warm->first < warm->second) {
        const double mid = 0.5 * (warm->first + warm->second);
        const auto o = shoot(mid);
        if (o.cls == ShotClass::Global) {
            g_eta = mid;
            bp.warm_started = true;
        }
    }
    if (!g_eta) {
        double lo = bp.feasible_low, hi = bp.feasible_high;
        const auto ol = shoot(lo);
        record(lo, ol.cls);
        const auto oh = shoot(hi);
        record(hi, oh.cls);
        if (!b_eta || !a_eta) {
            const SeedBrackets s = ab_seed_brackets(prob, xi, cfg);
            if (!b_eta) b_eta = s.eta_low;
            if (!a_eta) a_eta = s.eta_high;
        }
        if (!g_eta) {
            lo = *b_eta;
            hi = *a_eta;
            while (hi - lo > tol && !g_eta) {
                const double mid = 0.5 * (lo + hi);
                const auto o = shoot(mid);
                record(mid, o.cls);
                if (o.cls == ShotClass::B)
                    lo = mid;
                else if (o.cls == ShotClass::A)
                    hi = mid;
                else if (o.cls != ShotClass::Global)
                    contrary(mid, o.cls, "seed");
            }
            if (!g_eta)
                fail(ErrorKind::NoGlobalProxyFound, "no global-proxy shot in [" + std::to_string(bp.feasible_low) +
                                                        ", " + std::to_string(bp.feasible_high) + "] at xi = " +
                                                        std::to_string(xi) + "; extend the horizon");
        }
    }
    bp.seed = *g_eta;

    // brackets on either side of the seed
    double lo_b = b_eta.value_or(0.0), hi_a = a_eta.value_or(0.0);
    if (!b_eta || lo_b >= bp.seed) {
        lo_b = std::min(bp.feasible_low, bp.seed);
        for (int k = 0; k < 60; ++k) {
            const auto o = shoot(lo_b);
            if (o.cls == ShotClass::B) break;
            if (o.cls != ShotClass::Global) contrary(lo_b, o.cls, "lower");
            lo_b *= 0.5;
        }
    }
    if (!a_eta || hi_a <= bp.seed) {
        hi_a = std::max(bp.feasible_high, bp.seed);
        for (int k = 0; k < 60; ++k) {
            const auto o = shoot(hi_a);
            if (o.cls == ShotClass::A) break;
            if (o.cls != ShotClass::Global) contrary(hi_a, o.cls, "upper");
            hi_a *= 2.0;
        }
    }
    const auto [m_lo, m_hi] = bisect(lo_b, bp.seed, ShotClass::B, ShotClass::Global, "lower");
    const auto [M_lo, M_hi] = bisect(bp.seed, hi_a, ShotClass::Global, ShotClass::A, "upper");
    bp.eta_m = m_hi;
    bp.width_m = m_hi - m_lo;
    bp.eta_M = M_lo;
    bp.width_M = M_hi - M_lo;
    bp.witness_m = integrate_shot(prob, xi, bp.eta_m, cfg);
    bp.witness_mid = integrate_shot(prob, xi, 0.5 * (bp.eta_m + bp.eta_M), cfg);
    bp.witness_M = integrate_shot(prob, xi, bp.eta_M, cfg);
    return bp;
}

inline BandPoint find_band(const ManifoldProfile& m, const ExponentPair& e, double xi, double tol,
                           const IntegratorConfig& cfg = {}) {
    return find_band(ShootingProblem(m, e), xi, tol, cfg);
}

// Limit signatures of the band witnesses: at eta_m the u-limit stays away
// from zero while the v-limit is small, both positive in the interior, and
// the mirror image at eta_M. `small` is relative to max(xi, eta).
struct BandSignature {
    bool lower_ok = false;
    bool middle_ok = false;
    bool upper_ok = false;
    std::pair<LimitEnclosure, LimitEnclosure> at_m, at_mid, at_M;

    bool ok() const { return lower_ok && middle_ok && upper_ok; }
};

inline BandSignature band_signature(const BandPoint& bp, const GeometricSummary& g, const ExponentPair& e,
                                    double small) {
    BandSignature s;
    s.at_m = limit_enclosure(bp.witness_m, g, e);
    s.at_mid = limit_enclosure(bp.witness_mid, g, e);
    s.at_M = limit_enclosure(bp.witness_M, g, e);
    auto scale = [](const ShotOutcome& o) { return std::max(o.xi, o.eta); };
    const double sm = small * scale(bp.witness_m), sM = small * scale(bp.witness_M);
    s.lower_ok = s.at_m.first.lower > sm && s.at_m.second.upper <= sm;
    s.middle_ok = s.at_mid.first.lower > 0.0 && s.at_mid.second.lower > 0.0;
    s.upper_ok = s.at_M.second.lower > sM && s.at_M.first.upper <= sM;
    return s;
}

struct RegionCell {
    double xi = 0.0;
    double eta = 0.0;
    ShotClass cls = ShotClass::Undecided;
    OutcomeKind kind = OutcomeKind::PositiveToHorizon;
    double horizon = 0.0;
    double radius = 0.0;
    LimitEnclosure limit_u, limit_v;
    std::string status = "ok";

    bool global() const { return cls == ShotClass::Global; }
};

struct RefinementPoint {
    double xi = 0.0;
    double eta = 0.0;
    ShotClass below = ShotClass::Undecided;
    ShotClass above = ShotClass::Undecided;
    double width = 0.0;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

inline std::vector<double> linear_grid(Range r, std::size_t count) {
    require(count >= 2, "grid resolution must be at least 2");
    require(r.lo > 0.0 && r.hi > r.lo, "grid range must be positive and increasing");
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i) g[i] = r.lo + (r.hi - r.lo) * double(i) / double(count - 1);
    return g;
}

// Cells indexed column-major in eta: cell(ix, iy) = cells[ix * eta.size() + iy].
struct RegionMap {
    std::string profile;
    ExponentPair exps;
    IntegratorConfig config;
    std::vector<double> xi, eta;
    std::vector<RegionCell> cells;
    std::vector<RefinementPoint> refinement;

    const RegionCell& cell(std::size_t ix, std::size_t iy) const { return cells[ix * eta.size() + iy]; }
    RegionCell& cell(std::size_t ix, std::size_t iy) { return cells[ix * eta.size() + iy]; }
};

struct SweepOptions {
    std::size_t threads = 1;
    int refine_steps = 12;  // bisections per class change; 0 disables refinement
    // Returns a stored cell to reuse instead of shooting.
    std::function<std::optional<RegionCell>(std::size_t, std::size_t)> cached;
    // Called under a lock once per freshly computed cell.
    std::function<void(std::size_t, std::size_t, const RegionCell&)> on_cell;
};

inline RegionCell classify_cell(const ShootingProblem& prob, double xi, double eta, const IntegratorConfig& cfg) {
    RegionCell c;
    c.xi = xi;
    c.eta = eta;
    c.horizon = cfg.horizon_for(prob.geometry);
    try {
        const auto o = detail::quiet_shot(prob, xi, eta, cfg);
        c.cls = o.cls;
        c.kind = o.kind;
        c.radius = o.radius;
        c.limit_u = o.limit_u;
        c.limit_v = o.limit_v;
    } catch (const std::exception& ex) {
        c.cls = ShotClass::Undecided;
        c.status = ex.what();
    }
    return c;
}

inline void run_pool(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) job(i);
    };
    if (threads == 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

inline RegionMap sweep_region(const ShootingProblem& prob, Range xi_range, Range eta_range, std::size_t nx,
                              std::size_t ny, const IntegratorConfig& cfg = {}, const SweepOptions& opt = {}) {
    RegionMap map;
    map.profile = prob.profile().name;
    map.exps = prob.exps;
    map.config = cfg;
    map.xi = linear_grid(xi_range, nx);
    map.eta = linear_grid(eta_range, ny);
    map.cells.resize(nx * ny);
    std::mutex mu;
    run_pool(nx * ny, opt.threads, [&](std::size_t k) {
        const std::size_t ix = k / ny, iy = k % ny;
        if (opt.cached) {
            if (auto c = opt.cached(ix, iy)) {
                map.cells[k] = *c;
                return;
            }
        }
        RegionCell c = classify_cell(prob, map.xi[ix], map.eta[iy], cfg);
        std::lock_guard lock(mu);
        map.cells[k] = c;
        if (opt.on_cell) opt.on_cell(ix, iy, map.cells[k]);
    });

    if (opt.refine_steps <= 0) return map;
    struct Job {
        std::size_t ix, iy;
    };
    std::vector<Job> jobs;
    for (std::size_t ix = 0; ix < nx; ++ix)
        for (std::size_t iy = 0; iy + 1 < ny; ++iy) {
            const auto &a = map.cell(ix, iy), &b = map.cell(ix, iy + 1);
            if (a.cls != b.cls && a.status == "ok" && b.status == "ok") jobs.push_back({ix, iy});
        }
    map.refinement.resize(jobs.size());
    run_pool(jobs.size(), opt.threads, [&](std::size_t j) {
        const auto& a = map.cell(jobs[j].ix, jobs[j].iy);
        const auto& b = map.cell(jobs[j].ix, jobs[j].iy + 1);
        double lo = a.eta, hi = b.eta;
        for (int s = 0; s < opt.refine_steps; ++s) {
            const double mid = 0.5 * (lo + hi);
            const RegionCell c = classify_cell(prob, a.xi, mid, cfg);
            if (c.cls == a.cls)
                lo = mid;
            else if (c.cls == b.cls)
                hi = mid;
            else
                break;
        }
        map.refinement[j] = {a.xi, 0.5 * (lo + hi), a.cls, b.cls, hi - lo};
    });
    return map;
}

struct TraceResult {
    bool complete = true;
    std::vector<CurvePoint> curve;
    std::vector<BandPoint> band;
};

// Curve or band over an increasing grid of xi, warm-starting each bisection.
inline TraceResult curve_trace(const ShootingProblem& prob, const std::vector<double>& xi_grid, double tol,
                               const IntegratorConfig& cfg = {}) {
    require(!xi_grid.empty(), "xi grid must not be empty");
    for (std::size_t i = 1; i < xi_grid.size(); ++i)
        require(xi_grid[i] > xi_grid[i - 1], "xi grid must be strictly increasing");
    const StructureCheck sc = check_structure(prob);
    TraceResult tr;
    tr.complete = prob.geometry.complete();
    auto violation = [&](const char* what, std::size_t i, double a, double b) {
        fail(ErrorKind::MonotonicityViolation,
             std::string(what) + " not increasing between xi = " + std::to_string(xi_grid[i - 1]) + " (" +
                 std::to_string(a) + ") and xi = " + std::to_string(xi_grid[i]) + " (" + std::to_string(b) + ")");
    };
    for (std::size_t i = 0; i < xi_grid.size(); ++i) {
        if (tr.complete) {
            std::optional<SeedBrackets> warm;
            if (i > 0) {
                const auto& prev = tr.curve.back();
                const double w = std::max(prev.bracket_width, tol);
                warm = SeedBrackets{prev.eta - 4.0 * w, prev.eta + 4.0 * w};
            }
            tr.curve.push_back(find_eta(prob, xi_grid[i], tol, cfg, warm, &sc));
            if (i > 0 && sc.enforce() && !(tr.curve[i].eta > tr.curve[i - 1].eta))
                violation("eta", i, tr.curve[i - 1].eta, tr.curve[i].eta);
        } else {
            std::optional<std::pair<double, double>> warm;
            if (i > 0) warm = std::pair{tr.band.back().eta_m, tr.band.back().eta_M};
            tr.band.push_back(find_band(prob, xi_grid[i], tol, cfg, warm, &sc));
            if (i > 0 && sc.enforce()) {
                if (!(tr.band[i].eta_m > tr.band[i - 1].eta_m))
                    violation("eta_m", i, tr.band[i - 1].eta_m, tr.band[i].eta_m);
                if (!(tr.band[i].eta_M > tr.band[i - 1].eta_M))
                    violation("eta_M", i, tr.band[i - 1].eta_M, tr.band[i].eta_M);
            }
        }
    }
    return tr;
}

}  // namespace lanemden
