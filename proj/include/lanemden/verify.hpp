#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lanemden/diagnostics.hpp"
#include "lanemden/io.hpp"
#include "lanemden/manifold.hpp"
#include "lanemden/shooting.hpp"
#include "lanemden/solver.hpp"

namespace lanemden {

struct VerifyOptions {
    IntegratorConfig integrator;
    std::size_t threads = 1;
    std::uint64_t seed = 20240611;
    std::optional<ProfileSpec> profile;  // overrides the band suite profile
};

struct SuiteReport {
    std::string suite;
    std::vector<Verdict> verdicts;
    bool skipped = false;
    std::string reason;

    bool passed() const {
        return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed || v.skipped; });
    }
    json to_json() const {
        json j{{"suite", suite}, {"status", skipped ? "SKIPPED" : (passed() ? "PASS" : "FAIL")}};
        if (skipped) j["reason"] = reason;
        j["criteria"] = json::array();
        for (const auto& v : verdicts) j["criteria"].push_back(v.to_json());
        return j;
    }
};

namespace check {

inline Verdict at_most(std::string name, double value, double tol, std::string detail = {}) {
    Verdict v;
    v.name = std::move(name);
    v.value = value;
    v.tolerance = tol;
    v.passed = value <= tol;
    v.detail = std::move(detail);
    return v;
}

inline Verdict holds(std::string name, bool ok, double value = 0.0, double tol = 0.0, std::string detail = {}) {
    Verdict v;
    v.name = std::move(name);
    v.passed = ok;
    v.value = value;
    v.tolerance = tol;
    v.detail = std::move(detail);
    return v;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline const GeometricSummary& cached_summary(const ProfileSpec& s) {
    static std::map<std::tuple<int, int, double, double>, GeometricSummary> cache;
    const auto key = std::tuple{int(s.family), s.n, s.curvature, s.alpha};
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, summarize(builtin_profile(s))).first;
    return it->second;
}

inline ProfileSpec spec(Family f, double param = 0.0) {
    ProfileSpec s;
    s.family = f;
    if (f == Family::Hyperbolic) s.curvature = param;
    if (f == Family::ExpPower) s.alpha = param;
    return s;
}

inline double aubin_talenti(double r) { return 1.0 / std::sqrt(1.0 + r * r / 3.0); }

}  // namespace check

// Scalar critical solution on flat space against its closed form.
inline std::vector<Verdict> exact_solution_check(const IntegratorConfig& cfg = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    const ManifoldProfile m = builtin_profile(Family::Euclidean, 3);
    const ShotOutcome o = integrate_shot(m, ExponentPair(5, 5), 1.0, 1.0, cfg);
    double err = 0.0;
    for (const auto& s : o.trajectory.samples()) {
        if (s.r > 50.0) break;
        const double ref = check::aubin_talenti(s.r);
        err = std::max({err, std::fabs(s.u - ref) / ref, std::fabs(s.v - ref) / ref});
    }
    for (int k = 0; k <= 5000; ++k) {
        const double r = 0.01 * k;
        const ShotState s = o.trajectory.at(r);
        const double ref = check::aubin_talenti(r);
        err = std::max({err, std::fabs(s.u - ref) / ref, std::fabs(s.v - ref) / ref});
    }
    const double secs = check::seconds_since(t0);
    return {check::at_most("exact_solution_max_rel_err", err, 1e-8, "r in [0, 50]"),
            check::at_most("exact_solution_runtime_s", secs, 1.0)};
}

struct EqualityCaseResult {
    std::vector<Verdict> verdicts;
    ShotOutcome hyperbolic_witness;
};

// P vanishes identically on flat space and is strictly negative on the
// hyperbolic global trajectory.
inline EqualityCaseResult pohozaev_equality_check(const IntegratorConfig& cfg = {}) {
    EqualityCaseResult res;
    const ExponentPair e(5, 5);
    const ManifoldProfile E = builtin_profile(Family::Euclidean, 3);
    const ShotOutcome oe = integrate_shot(E, e, 1.0, 1.0, cfg);
    const PohozaevScan se = pohozaev_scan(oe.trajectory, E, e);
    res.verdicts.push_back(check::at_most("flat_max_abs_P", se.max_abs_P, 1e-9));

    const ShootingProblem H(check::cached_summary(check::spec(Family::Hyperbolic, 1.0)), e);
    const CurvePoint cp = find_eta(H, 1.0, 1e-9, cfg);
    const PohozaevScan sh = pohozaev_scan(cp.witness.trajectory, H.profile(), e);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& s : sh.samples)
        if (s.r >= 1.0) worst = std::max(worst, s.P);
    res.verdicts.push_back(
        check::holds("hyperbolic_max_P_beyond_1", worst < -1e-6, worst, -1e-6, "must stay below the tolerance"));
    res.hyperbolic_witness = cp.witness;
    return res;
}

struct RandomCase {
    ProfileSpec profile;
    ExponentPair exps;
    double xi = 0.0, eta = 0.0;
};

inline std::vector<ProfileSpec> random_profile_pool() {
    using check::spec;
    return {spec(Family::Euclidean), spec(Family::Hyperbolic, 1.0), spec(Family::Hyperbolic, 0.5),
            spec(Family::ExpPower, 1.0), spec(Family::ExpPower, 2.5), spec(Family::ExpPower, 3.0),
            spec(Family::ExpPower, 4.0)};
}

// Exponents in the critical-supercritical range for n = 3; a quarter of the
// draws sit exactly on the critical line.
inline ExponentPair random_exponents(std::mt19937_64& rng, int n = 3) {
    std::uniform_real_distribution<double> up(3.0, 9.0), stretch(1.0, 1.5), coin(0.0, 1.0);
    const double p = up(rng);
    const double qc = critical_partner(p, n);
    const double q = coin(rng) < 0.25 ? qc : qc * stretch(rng);
    return coin(rng) < 0.5 ? ExponentPair(p, q) : ExponentPair(q, p);
}

struct ZeroSeparation {
    std::size_t zeros = 0;
    double min_ratio = std::numeric_limits<double>::infinity();  // other component / its initial value

    void add(const ShotOutcome& o) {
        if (o.kind == OutcomeKind::PositiveToHorizon) return;
        ++zeros;
        const double init = o.kind == OutcomeKind::FirstZeroU ? o.eta : o.xi;
        min_ratio = std::min(min_ratio, o.other_value / init);
    }
    void merge(const ZeroSeparation& z) {
        zeros += z.zeros;
        min_ratio = std::min(min_ratio, z.min_ratio);
    }
};

struct RandomPohozaevResult {
    std::vector<Verdict> verdicts;
    ZeroSeparation zeros;
    std::size_t shots = 0;
};

inline RandomPohozaevResult random_pohozaev_check(std::uint64_t seed, std::size_t count = 120,
                                                  const IntegratorConfig& cfg = {}) {
    RandomPohozaevResult res;
    std::mt19937_64 rng(seed);
    const auto pool = random_profile_pool();
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::uniform_real_distribution<double> data(0.2, 5.0);
    std::size_t sign = 0, mono = 0, skipped = 0;
    double worst_P = -std::numeric_limits<double>::infinity(), worst_inc = worst_P;
    std::string first_bad;
    while (res.shots < count) {
        const ProfileSpec ps = pool[pick(rng)];
        const ExponentPair e = random_exponents(rng);
        const double xi = data(rng), eta = data(rng);
        const GeometricSummary& g = check::cached_summary(ps);
        if (!check_volume_convexity(g.profile, e).convex) {
            ++skipped;
            continue;
        }
        const ShotOutcome o = integrate_shot(ShootingProblem(g, e), xi, eta, cfg);
        ++res.shots;
        res.zeros.add(o);
        const PohozaevScan s = pohozaev_scan(o.trajectory, g.profile, e, 1e-8);
        sign += s.sign_violations;
        mono += s.monotonicity_violations;
        worst_P = std::max(worst_P, s.max_P);
        worst_inc = std::max(worst_inc, s.max_increment);
        if ((s.sign_violations || s.monotonicity_violations) && first_bad.empty())
            first_bad = describe(ps) + " p=" + detail::fmt_num(e.p) + " q=" + detail::fmt_num(e.q) +
                        " xi=" + detail::fmt_num(xi) + " eta=" + detail::fmt_num(eta);
    }
    res.verdicts.push_back(check::holds("random_shots", res.shots >= 100, double(res.shots), 100.0,
                                        std::to_string(skipped) + " draws without a convexity certificate"));
    res.verdicts.push_back(check::at_most("random_P_sign_violations", double(sign), 0.0,
                                          "max P " + detail::fmt_num(worst_P) + (first_bad.empty() ? "" : "; " + first_bad)));
    res.verdicts.push_back(check::at_most("random_P_increment_violations", double(mono), 0.0,
                                          "max increment " + detail::fmt_num(worst_inc)));
    return res;
}

struct SymmetryResult {
    std::vector<Verdict> verdicts;
    std::vector<ShotOutcome> witnesses;
};

inline SymmetryResult symmetry_check(const IntegratorConfig& cfg = {}) {
    SymmetryResult res;
    const ExponentPair e(5, 5);
    for (const ProfileSpec& ps : {check::spec(Family::Euclidean), check::spec(Family::Hyperbolic, 1.0)}) {
        const ShootingProblem prob(check::cached_summary(ps), e);
        double worst = 0.0;
        for (double xi : {0.5, 1.0, 2.0, 4.0}) {
            CurvePoint cp = find_eta(prob, xi, 1e-8, cfg);
            worst = std::max(worst, std::fabs(cp.eta - xi));
            res.witnesses.push_back(std::move(cp.witness));
        }
        res.verdicts.push_back(check::at_most(std::string(to_string(ps.family)) + "_max_abs_eta_minus_xi", worst, 1e-6));
    }
    return res;
}

inline double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline std::vector<Verdict> scaling_check(const IntegratorConfig& cfg = {}) {
    const ExponentPair e(4.0, 6.5);
    const ShootingProblem prob(check::cached_summary(check::spec(Family::Euclidean)), e);
    const std::vector<double> xs{1, 2, 4, 8};
    const TraceResult tr = curve_trace(prob, xs, 1e-9, cfg);
    std::vector<double> ys;
    for (const auto& c : tr.curve) ys.push_back(c.eta);
    const double slope = fitted_slope(xs, ys);
    const double target = e.scaling_slope();
    return {check::at_most("scaling_slope_error", std::fabs(slope - target), 1e-3,
                           "slope " + detail::fmt_num(slope) + " vs " + detail::fmt_num(target))};
}

struct ThresholdResult {
    std::vector<Verdict> verdicts;
    ZeroSeparation zeros;
};

// Explicit memberships of A and B from the comparison thresholds.
inline ThresholdResult threshold_check(const IntegratorConfig& cfg = {}) {
    ThresholdResult res;
    const ExponentPair e(5, 5);
    const ShootingProblem E(check::cached_summary(check::spec(Family::Euclidean)), e);
    IntegratorConfig c = cfg;
    c.record = false;
    const ShotOutcome a = integrate_shot(E, 1.0, 2.5, c);
    const ShotOutcome b = integrate_shot(E, 2.5, 1.0, c);
    res.zeros.add(a);
    res.zeros.add(b);
    res.verdicts.push_back(check::holds("flat_(1,2.5)_in_A", a.kind == OutcomeKind::FirstZeroU, a.radius, 0.0,
                                        to_string(a.kind)));
    res.verdicts.push_back(check::holds("flat_(2.5,1)_in_B", b.kind == OutcomeKind::FirstZeroV, b.radius, 0.0,
                                        to_string(b.kind)));

    const ShootingProblem X(check::cached_summary(check::spec(Family::ExpPower, 3.0)), e);
    const double th = X.geometry.theta_value();
    std::size_t bad_a = 0, bad_b = 0, total = 0;
    for (double s : {0.25, 0.5, 1.0, 1.5, 2.0}) {
        for (double f : {1.0 + 1e-6, 1.1, 1.5}) {
            const double t = f * std::max(th * std::pow(s, e.p), std::pow(s / th, 1.0 / e.q));
            const ShotOutcome oa = integrate_shot(X, s, 2.0 * t, c);
            res.zeros.add(oa);
            if (oa.kind != OutcomeKind::FirstZeroU) ++bad_a;
            // mirror condition on the u side
            const double sb = f * std::max(th * std::pow(s, e.q), std::pow(s / th, 1.0 / e.p));
            const ShotOutcome ob = integrate_shot(X, 2.0 * sb, s, c);
            res.zeros.add(ob);
            if (ob.kind != OutcomeKind::FirstZeroV) ++bad_b;
            total += 2;
        }
    }
    res.verdicts.push_back(check::at_most("incomplete_threshold_misses", double(bad_a + bad_b), 0.0,
                                          std::to_string(total) + " shots at theta = " + detail::fmt_num(th)));
    return res;
}

struct BandResult {
    std::vector<Verdict> verdicts;
    bool skipped = false;
    std::string reason;
    std::optional<BandPoint> band;
};

inline BandResult band_check(const ProfileSpec& ps, const IntegratorConfig& cfg = {}) {
    BandResult res;
    const ExponentPair e(5, 5);
    const GeometricSummary& g = check::cached_summary(ps);
    if (g.complete()) {
        res.skipped = true;
        res.reason = "profile " + describe(ps) + " is stochastically complete; the band is a single point";
        return res;
    }
    const ShootingProblem X(g, e);
    const double tol = 1e-9;
    const BandPoint bp = find_band(X, 1.0, tol, cfg);
    const double th = g.theta_value();
    res.verdicts.push_back(check::holds("band_gap_exceeds_10_tol", bp.gap() > 10.0 * tol, bp.gap(), 10.0 * tol));
    const BandSignature sig = band_signature(bp, g, e, cfg.extinction);
    res.verdicts.push_back(check::holds("band_signature_lower", sig.lower_ok, sig.at_m.second.upper, cfg.extinction,
                                        "v-limit upper at eta_m"));
    res.verdicts.push_back(check::holds("band_signature_middle", sig.middle_ok,
                                        std::min(sig.at_mid.first.lower, sig.at_mid.second.lower), 0.0,
                                        "both limit lowers at the midpoint"));
    res.verdicts.push_back(check::holds("band_signature_upper", sig.upper_ok, sig.at_M.first.upper, cfg.extinction,
                                        "u-limit upper at eta_M"));
    const LimitBounds lb = limit_bounds(e, th);
    res.verdicts.push_back(check::at_most("band_gap_vs_limit_bound", bp.gap(), lb.v));
    const double feas = th * std::pow(1.0, e.p) + std::pow(1.0 / th, 1.0 / e.q);
    res.verdicts.push_back(check::at_most("band_upper_vs_feasibility", bp.eta_M, feas));
    res.band = bp;
    return res;
}

// Every global-proxy shot on a complete profile has both limits vanishing.
inline std::vector<Verdict> vanishing_check(const std::vector<const ShotOutcome*>& shots,
                                            const std::vector<const RegionCell*>& cells) {
    std::size_t globals = 0, bad = 0;
    for (const auto* o : shots)
        if (o->cls == ShotClass::Global) {
            ++globals;
            if (!(o->limit_u.vanishes && o->limit_v.vanishes)) ++bad;
        }
    for (const auto* c : cells)
        if (c->cls == ShotClass::Global) {
            ++globals;
            if (!(c->limit_u.vanishes && c->limit_v.vanishes)) ++bad;
        }
    return {check::holds("complete_global_shots", globals > 0, double(globals), 1.0),
            check::at_most("complete_global_nonvanishing", double(bad), 0.0)};
}

inline std::vector<Verdict> zero_separation_check(const ZeroSeparation& z) {
    return {check::holds("first_zero_shots", z.zeros > 0, double(z.zeros), 1.0),
            check::holds("first_zero_other_component_ratio", z.min_ratio >= 1e-6, z.min_ratio, 1e-6,
                         "minimum over all first-zero shots")};
}

// Random ordered pairs of initial data; the differences of the components
// must grow on the common positivity interval.
inline std::vector<Verdict> ordering_check(std::uint64_t seed, std::size_t pairs = 50,
                                           const IntegratorConfig& cfg = {}) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    const auto pool = random_profile_pool();
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::uniform_real_distribution<double> data(0.2, 5.0);
    std::size_t violations = 0, samples = 0;
    double worst = 0.0;
    std::string first_bad;
    const double slack = 1e-10;
    for (std::size_t k = 0; k < pairs; ++k) {
        const ProfileSpec ps = pool[pick(rng)];
        const ExponentPair e = random_exponents(rng);
        double x1 = data(rng), x2 = data(rng), y1 = data(rng), y2 = data(rng);
        if (x1 < x2) std::swap(x1, x2);
        if (y2 < y1) std::swap(y1, y2);
        const ShootingProblem prob(check::cached_summary(ps), e);
        const ShotOutcome o1 = integrate_shot(prob, x1, y1, cfg);
        const ShotOutcome o2 = integrate_shot(prob, x2, y2, cfg);
        const double R = std::min(o1.radius, o2.radius);
        std::vector<double> rs;
        for (const auto& s : o1.trajectory.samples())
            if (s.r <= R) rs.push_back(s.r);
        for (const auto& s : o2.trajectory.samples())
            if (s.r <= R) rs.push_back(s.r);
        std::sort(rs.begin(), rs.end());
        rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
        double pu = 0.0, pv = 0.0;
        bool first = true;
        for (double r : rs) {
            const ShotState a = o1.trajectory.at(r), b = o2.trajectory.at(r);
            const double du = a.u - b.u, dv = b.v - a.v;
            if (!first) {
                ++samples;
                const double drop = std::max(pu - du, pv - dv);
                worst = std::max(worst, drop);
                if (drop > slack) {
                    ++violations;
                    if (first_bad.empty())
                        first_bad = describe(ps) + " r=" + detail::fmt_num(r) + " drop=" + detail::fmt_num(drop);
                }
            }
            pu = du;
            pv = dv;
            first = false;
        }
    }
    return {check::at_most("ordering_violations", double(violations), 0.0,
                           std::to_string(samples) + " samples, largest decrease " + detail::fmt_num(worst) +
                               (first_bad.empty() ? "" : "; " + first_bad))};
}

struct RigidityResult {
    std::vector<Verdict> verdicts;
    EnergyLedger flat, hyperbolic;
};

inline RigidityResult rigidity_check(const IntegratorConfig& cfg = {}, const ShotOutcome* hyperbolic_witness = nullptr) {
    RigidityResult res;
    const ExponentPair e(5, 5);
    const ManifoldProfile E = builtin_profile(Family::Euclidean, 3);
    const ShotOutcome oe = integrate_shot(E, e, 1.0, 1.0, cfg);
    res.flat = energy_ledger(oe.trajectory, E, e, {1, 10, 100, 1000});
    const double ref = 3.0 * std::sqrt(3.0) * M_PI / 16.0;

    const ShootingProblem H(check::cached_summary(check::spec(Family::Hyperbolic, 1.0)), e);
    std::optional<ShotOutcome> own;
    if (!hyperbolic_witness) {
        own = find_eta(H, 1.0, 1e-9, cfg).witness;
        hyperbolic_witness = &*own;
    }
    std::vector<double> ck;
    for (double R = 10.0; R <= 200.0 + 1e-9; R += 10.0) ck.push_back(R);
    res.hyperbolic = energy_ledger(hyperbolic_witness->trajectory, H.profile(), e, ck);

    res.verdicts.push_back(check::at_most("ledger_identity_flat", res.flat.max_residual(), 1e-8));
    res.verdicts.push_back(check::at_most("ledger_identity_hyperbolic", res.hyperbolic.max_residual(), 1e-8));
    const double Iu = res.flat.points.back().I_u;
    res.verdicts.push_back(check::at_most("flat_I_u_vs_closed_form", std::fabs(Iu - ref), 1e-6,
                                          "I_u(1000) = " + detail::fmt_num(Iu)));
    const DivergenceVerdict dv = divergence_verdict(res.hyperbolic, ref, 10.0);
    res.verdicts.push_back(check::holds("hyperbolic_I_mixed_increasing", dv.increasing));
    res.verdicts.push_back(check::holds("hyperbolic_I_mixed_exceeds_10x", dv.exceeds, dv.ratio, 10.0,
                                        "ratio to the flat reference at R = 200"));
    res.verdicts.push_back(check::holds("hyperbolic_I_mixed_not_flattening", !dv.flattening, dv.slope, 0.05,
                                        "log-log slope over R in [20, 200]"));
    const DivergenceVerdict fv = divergence_verdict(res.flat, ref, 10.0);
    res.verdicts.push_back(check::holds("flat_I_mixed_flattens", fv.flattening && !fv.exceeds, fv.slope, 0.05,
                                        "log-log slope over R in [100, 1000]"));
    return res;
}

struct TopologyResult {
    std::vector<Verdict> verdicts;
    RegionMap flat, incomplete;
};

inline std::vector<std::size_t> global_runs(const RegionMap& m, std::size_t ix, std::size_t& total) {
    std::vector<std::size_t> runs;
    std::size_t run = 0;
    total = 0;
    for (std::size_t iy = 0; iy < m.eta.size(); ++iy) {
        if (m.cell(ix, iy).global()) {
            ++run;
            ++total;
        } else if (run) {
            runs.push_back(run);
            run = 0;
        }
    }
    if (run) runs.push_back(run);
    return runs;
}

inline std::size_t ordering_inversions(const RegionMap& m) {
    std::size_t bad = 0;
    for (std::size_t ix = 0; ix < m.xi.size(); ++ix) {
        bool seen_a = false;
        for (std::size_t iy = 0; iy < m.eta.size(); ++iy) {
            const ShotClass c = m.cell(ix, iy).cls;
            if (c == ShotClass::A) seen_a = true;
            if (c == ShotClass::B && seen_a) ++bad;
        }
    }
    return bad;
}

inline TopologyResult topology_check(std::size_t resolution = 64, std::size_t threads = 1,
                                     const IntegratorConfig& cfg = {}) {
    TopologyResult res;
    const ExponentPair e(5, 5);
    SweepOptions opt;
    opt.threads = threads;
    opt.refine_steps = 0;
    const Range box{0.5, 2.0};
    res.flat = sweep_region(ShootingProblem(check::cached_summary(check::spec(Family::Euclidean)), e), box, box,
                            resolution, resolution, cfg, opt);
    res.incomplete = sweep_region(ShootingProblem(check::cached_summary(check::spec(Family::ExpPower, 3.0)), e), box,
                                  box, resolution, resolution, cfg, opt);
    std::size_t widest = 0, split = 0, empty = 0;
    for (std::size_t ix = 0; ix < res.flat.xi.size(); ++ix) {
        std::size_t total = 0;
        const auto runs = global_runs(res.flat, ix, total);
        widest = std::max(widest, total);
        if (runs.size() > 1) ++split;
        if (total == 0) ++empty;
    }
    res.verdicts.push_back(check::at_most("flat_global_cells_per_column", double(widest), 2.0,
                                          std::to_string(empty) + " columns without a global cell"));
    res.verdicts.push_back(check::at_most("flat_split_global_columns", double(split), 0.0));
    std::size_t thin = 0, narrowest = resolution;
    for (std::size_t ix = 0; ix < res.incomplete.xi.size(); ++ix) {
        std::size_t total = 0;
        const auto runs = global_runs(res.incomplete, ix, total);
        const std::size_t best = runs.empty() ? 0 : *std::max_element(runs.begin(), runs.end());
        narrowest = std::min(narrowest, best);
        if (best < 3) ++thin;
    }
    res.verdicts.push_back(check::at_most("incomplete_columns_without_strip", double(thin), 0.0,
                                          "narrowest strip " + std::to_string(narrowest) + " cells"));
    std::size_t errors = 0;
    for (const auto* m : {&res.flat, &res.incomplete})
        for (const auto& c : m->cells)
            if (c.status != "ok") ++errors;
    res.verdicts.push_back(check::at_most("sweep_cell_errors", double(errors), 0.0));
    res.verdicts.push_back(check::at_most("sweep_ordering_inversions",
                                          double(ordering_inversions(res.flat) + ordering_inversions(res.incomplete)),
                                          0.0));
    return res;
}

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"euclidean-exact", "symmetry", "scaling", "pohozaev",
                                                "band",            "bounds",   "rigidity", "ordering"};
    return names;
}

inline SuiteReport run_suite(const std::string& name, const VerifyOptions& opt = {}) {
    SuiteReport rep;
    rep.suite = name;
    auto add = [&](const std::vector<Verdict>& v) { rep.verdicts.insert(rep.verdicts.end(), v.begin(), v.end()); };
    const IntegratorConfig& cfg = opt.integrator;
    if (name == "euclidean-exact") {
        add(exact_solution_check(cfg));
    } else if (name == "symmetry") {
        add(symmetry_check(cfg).verdicts);
    } else if (name == "scaling") {
        add(scaling_check(cfg));
    } else if (name == "pohozaev") {
        add(pohozaev_equality_check(cfg).verdicts);
        const auto r = random_pohozaev_check(opt.seed, 120, cfg);
        add(r.verdicts);
        add(zero_separation_check(r.zeros));
    } else if (name == "band") {
        const BandResult b = band_check(opt.profile.value_or(check::spec(Family::ExpPower, 3.0)), cfg);
        if (b.skipped) {
            rep.skipped = true;
            rep.reason = b.reason;
        }
        add(b.verdicts);
    } else if (name == "bounds") {
        const auto t = threshold_check(cfg);
        add(t.verdicts);
        add(zero_separation_check(t.zeros));
        const ShootingProblem X(check::cached_summary(check::spec(Family::ExpPower, 3.0)), ExponentPair(5, 5));
        std::size_t bad = 0;
        for (double eta : {0.4, 0.7, 1.0, 1.2}) {
            const ShotOutcome o = integrate_shot(X, 1.0, eta, cfg);
            if (o.kind != OutcomeKind::PositiveToHorizon) continue;
            const auto enc = limit_enclosure(o, X.geometry, X.exps);
            if (!abs_bound_check(enc, X.exps, X.geometry.theta_value()).satisfied) ++bad;
        }
        add({check::at_most("limit_bound_excess", double(bad), 0.0)});
    } else if (name == "rigidity") {
        const auto s = symmetry_check(cfg);
        std::vector<const ShotOutcome*> shots;
        for (const auto& w : s.witnesses) shots.push_back(&w);
        add(vanishing_check(shots, {}));
        add(rigidity_check(cfg).verdicts);
    } else if (name == "ordering") {
        add(ordering_check(opt.seed, 50, cfg));
    } else {
        fail(ErrorKind::InvalidArgument, "unknown suite '" + name + "'");
    }
    return rep;
}

}  // namespace lanemden
