#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lanemden/dop853.hpp"
#include "lanemden/errors.hpp"
#include "lanemden/exponents.hpp"
#include "lanemden/manifold.hpp"

namespace lanemden {

struct IntegratorConfig {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    std::optional<double> horizon;  // default: 1e3 complete, 32 incomplete
    double r0_scale = 1e-6;
    std::optional<double> positivity_margin;  // default: 1e-12 max(xi, eta)
    long max_steps = 5'000'000;
    double zero_tol = 1e-10;
    double extinction = 1e-6;           // relative to the initial value
    double certification_width = 1e-2;  // relative to max(xi, eta)
    bool record = true;

    double horizon_for(const GeometricSummary& g) const {
        if (horizon) return *horizon;
        return g.complete() ? 1e3 : 32.0;
    }
    bool operator==(const IntegratorConfig&) const = default;
};

// Integration state. The mean fluxes w_u = pu / V and w_v = pv / V, with V
// the ball volume int_0^r psi^{n-1}, stay O(1) where psi^{n-1} overflows.
using State5 = Vec<5>;
enum : std::size_t { iU = 0, iV = 1, iWU = 2, iWV = 3, iTH = 4 };

inline double signed_pow(double x, double e) { return std::copysign(std::pow(std::fabs(x), e), x); }

struct ShotState {
    double r = 0.0;
    double u = 0.0, v = 0.0;
    double du = 0.0, dv = 0.0;
    double wu = 0.0, wv = 0.0;  // mean fluxes
    double theta = 0.0;
    double log_weight = -std::numeric_limits<double>::infinity();  // log psi^{n-1}(r)

    double weight() const { return std::exp(log_weight); }
    double volume() const { return theta * weight(); }
    // psi^{n-1} u'
    double pu() const { return du * weight(); }
    double pv() const { return dv * weight(); }
};

class Trajectory {
public:
    Trajectory() = default;
    Trajectory(const ManifoldProfile& m) : profile_(m) {}

    const std::vector<ShotState>& samples() const { return nodes_; }
    const std::vector<DenseSegment<5>>& segments() const { return segs_; }
    double horizon() const { return nodes_.empty() ? 0.0 : nodes_.back().r; }
    bool empty() const { return nodes_.empty(); }
    bool has_dense() const { return segs_.size() + 2 == nodes_.size() && nodes_.size() >= 2; }
    const ManifoldProfile& profile() const { return profile_; }

    ShotState make_state(double r, const State5& y) const {
        ShotState s;
        s.r = r;
        s.u = y[iU];
        s.v = y[iV];
        s.wu = y[iWU];
        s.wv = y[iWV];
        s.theta = y[iTH];
        s.du = s.wu * s.theta;
        s.dv = s.wv * s.theta;
        s.log_weight = r > 0.0 ? profile_.log_weight(r) : -std::numeric_limits<double>::infinity();
        return s;
    }

    void push_origin(const ShotState& s) { nodes_.push_back(s); }
    void push(const ShotState& s, const DenseSegment<5>* seg) {
        if (seg && nodes_.size() >= 2) segs_.push_back(*seg);
        nodes_.push_back(s);
    }
    void replace_last(const ShotState& s) { nodes_.back() = s; }
    void set_origin_series(const State5& y0, double r0) {
        y0_ = y0;
        r0_ = r0;
    }

    // Interpolated state. Nodes return exactly; r below the first
    // integration node falls back to the origin series.
    ShotState at(double r) const {
        require(!nodes_.empty(), "empty trajectory");
        require(r >= 0.0 && r <= horizon() * (1.0 + 1e-15), "radius outside the trajectory");
        auto it = std::lower_bound(nodes_.begin(), nodes_.end(), r,
                                   [](const ShotState& s, double x) { return s.r < x; });
        if (it != nodes_.end() && it->r == r) return *it;
        const std::size_t k = std::size_t(it - nodes_.begin());
        if (k <= 1 || !has_dense()) {
            if (k <= 1) {
                // between the pole and the first integration node
                const ShotState& a = nodes_[0];
                const ShotState& b = nodes_[1];
                const double t = (r - a.r) / (b.r - a.r);
                State5 y{a.u + t * t * (b.u - a.u), a.v + t * t * (b.v - a.v), a.wu + t * t * (b.wu - a.wu),
                         a.wv + t * t * (b.wv - a.wv), r / double(profile_.n)};
                return make_state(r, y);
            }
            require(false, "trajectory has no dense output");
        }
        return make_state(r, segs_[k - 2](r));
    }

private:
    ManifoldProfile profile_;
    std::vector<ShotState> nodes_;  // node 0 is the pole, node 1 the series start
    std::vector<DenseSegment<5>> segs_;  // segs_[i] spans nodes_[i+1] .. nodes_[i+2]
    State5 y0_{};
    double r0_ = 0.0;
};

struct LimitEnclosure {
    double lower = 0.0;
    double upper = 0.0;
    bool vanishes = false;
    bool rigorous = false;  // derived from the tail bound rather than decay extrapolation

    double width() const { return upper - lower; }
    double estimate() const { return 0.5 * (lower + upper); }
};

enum class OutcomeKind { FirstZeroU, FirstZeroV, PositiveToHorizon };
enum class ShotClass { A, B, Global, Undecided };

inline const char* to_string(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::FirstZeroU: return "FirstZeroU";
        case OutcomeKind::FirstZeroV: return "FirstZeroV";
        case OutcomeKind::PositiveToHorizon: return "PositiveToHorizon";
    }
    return "?";
}

inline const char* to_string(ShotClass c) {
    switch (c) {
        case ShotClass::A: return "A";
        case ShotClass::B: return "B";
        case ShotClass::Global: return "Global";
        case ShotClass::Undecided: return "Undecided";
    }
    return "?";
}

struct ShotOutcome {
    OutcomeKind kind = OutcomeKind::PositiveToHorizon;
    double xi = 0.0, eta = 0.0;
    double radius = 0.0;       // first zero R, or the horizon reached
    double other_value = 0.0;  // v(R) for FirstZeroU, u(R) for FirstZeroV
    ShotState last;
    LimitEnclosure limit_u, limit_v;
    ShotClass cls = ShotClass::Undecided;  // region class; Global means the global proxy holds
    ShotClass lean = ShotClass::Undecided;  // side used by bisection: A, B or Global on an exact tie
    bool certified = false;
    std::string basis;  // crossing, tail-enclosure, decay, decay-ratio, enclosure-estimate
    long steps = 0;
    Trajectory trajectory;

    bool in_a() const { return kind == OutcomeKind::FirstZeroU; }
    bool in_b() const { return kind == OutcomeKind::FirstZeroV; }
};

// Rigorous far-field enclosure of the limits from the state at H, valid
// while both components stay positive. Widths shrink with the tail of Theta.
inline std::pair<LimitEnclosure, LimitEnclosure> tail_enclosure(const ShotState& s, const TailSample& t,
                                                                const ExponentPair& e) {
    const double T = t.tail_theta;
    const double A = t.cross;
    const double Tr = std::max(T - A, 0.0);
    const double base_u = s.u - std::fabs(s.wu) * A;
    const double base_v = s.v - std::fabs(s.wv) * A;
    const double up = std::pow(std::max(s.u, 0.0), e.p), vq = std::pow(std::max(s.v, 0.0), e.q);
    LimitEnclosure lu, lv;
    lu.upper = base_u;
    lv.upper = base_v;
    lu.lower = base_u - vq * Tr;
    lv.lower = base_v - up * Tr;
    for (int k = 0; k < 2; ++k) {
        lu.upper = base_u - std::pow(std::max(lv.lower, 0.0), e.q) * Tr;
        lv.upper = base_v - std::pow(std::max(lu.lower, 0.0), e.p) * Tr;
    }
    lu.rigorous = lv.rigorous = true;
    return {lu, lv};
}

struct ShootingProblem {
    GeometricSummary geometry;
    ExponentPair exps;

    ShootingProblem(GeometricSummary g, ExponentPair e) : geometry(std::move(g)), exps(e) {}
    ShootingProblem(const ManifoldProfile& m, ExponentPair e) : geometry(summarize(m)), exps(e) {}

    const ManifoldProfile& profile() const { return geometry.profile; }
    int n() const { return geometry.profile.n; }
};

inline double default_r0(const ExponentPair& e, double xi, double eta, double scale = 1e-6) {
    return scale * std::pow(std::max({1.0, xi, eta}), -std::max(e.p, e.q) / 2.0);
}

// State at small r0 from the expansion about the pole.
inline ShotState origin_series(const ManifoldProfile& m, const ExponentPair& e, double xi, double eta, double r0) {
    require(xi > 0.0 && eta > 0.0, "initial values must be positive");
    require(r0 > 0.0, "series radius must be positive");
    const double n = double(m.n);
    const double fu = std::pow(eta, e.q), fv = std::pow(xi, e.p);
    const double r2 = r0 * r0;
    State5 y;
    y[iU] = xi - fu * r2 / (2.0 * n);
    y[iV] = eta - fv * r2 / (2.0 * n);
    y[iWU] = -fu + e.q * std::pow(eta, e.q - 1.0) * fv * r2 / (2.0 * (n + 2.0));
    y[iWV] = -fv + e.p * std::pow(xi, e.p - 1.0) * fu * r2 / (2.0 * (n + 2.0));
    y[iTH] = theta(m, r0);
    Trajectory t(m);
    return t.make_state(r0, y);
}

namespace detail {

struct ShotRhs {
    const Warping* w;
    double nm1, p, q;
    State5 operator()(double r, const State5& y) const {
        const double th = y[iTH];
        State5 f;
        f[iU] = y[iWU] * th;
        f[iV] = y[iWV] * th;
        f[iWU] = -(signed_pow(y[iV], q) + y[iWU]) / th;
        f[iWV] = -(signed_pow(y[iU], p) + y[iWV]) / th;
        f[iTH] = 1.0 - nm1 * w->dlog_psi(r) * th;
        return f;
    }
};

template <class G>
double bisect_root(const G& g, double a, double b, double tol) {
    double ga = g(a);
    while (b - a > tol) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const double gm = g(m);
        if ((gm > 0.0) == (ga > 0.0)) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    return b;
}

}  // namespace detail

inline LimitEnclosure decay_enclosure(double value, double deriv, double r, double initial, double extinction) {
    LimitEnclosure l;
    l.lower = 0.0;
    l.upper = value;
    const double rate = value > 0.0 ? r * std::fabs(deriv) / value : std::numeric_limits<double>::infinity();
    l.vanishes = value <= extinction * initial || rate >= 0.1;
    return l;
}

inline ShotOutcome integrate_shot(const ShootingProblem& prob, double xi, double eta, const IntegratorConfig& cfg = {}) {
    require(xi > 0.0 && eta > 0.0 && std::isfinite(xi) && std::isfinite(eta), "initial values must be positive");
    const double H = cfg.horizon_for(prob.geometry);
    require(H > 0.0, "horizon must be positive");
    const ManifoldProfile& m = prob.profile();
    const ExponentPair& e = prob.exps;
    const bool complete = prob.geometry.complete();
    const double margin = cfg.positivity_margin ? *cfg.positivity_margin : 1e-12 * std::max(xi, eta);
    const double scale = std::max(xi, eta);

    ShotOutcome out;
    out.xi = xi;
    out.eta = eta;
    Trajectory traj(m);
    {
        ShotState pole;
        pole.r = 0.0;
        pole.u = xi;
        pole.v = eta;
        pole.wu = -std::pow(eta, e.q);
        pole.wv = -std::pow(xi, e.p);
        traj.push_origin(pole);
    }
    const double r0 = std::min(default_r0(e, xi, eta, cfg.r0_scale), 0.5 * H);
    const ShotState s0 = origin_series(m, e, xi, eta, r0);
    State5 y{s0.u, s0.v, s0.wu, s0.wv, s0.theta};
    traj.push(s0, nullptr);

    detail::ShotRhs rhs{m.warp.get(), double(m.n - 1), e.p, e.q};
    Dop853<5> st(cfg.rel_tol, cfg.abs_tol);
    Dop853Trial<5> trial;
    double r = r0;
    State5 f = rhs(r, y);
    double h = st.initial_step(rhs, r, y, f, H - r);

    std::size_t next_ck = 0;
    const auto& table = prob.geometry.tail;
    while (next_ck < table.size() && table[next_ck].radius <= r) ++next_ck;

    auto finish_positive = [&](const ShotState& s, const std::string& basis) {
        out.kind = OutcomeKind::PositiveToHorizon;
        out.radius = s.r;
        out.last = s;
        out.basis = basis;
    };

    long steps = 0;
    bool rejected = false;
    bool done = false;
    while (!done) {
        if (steps >= cfg.max_steps)
            fail(ErrorKind::StepBudgetExhausted, "step budget of " + std::to_string(cfg.max_steps) +
                                                     " exhausted at r = " + std::to_string(r));
        bool last = false;
        if (r + 1.01 * h >= H) {
            h = H - r;
            last = true;
        }
        if (h <= 1e-14 * r)
            fail(ErrorKind::StepSizeUnderflow, "step size " + std::to_string(h) + " underflowed at r = " +
                                                   std::to_string(r) + " (xi=" + std::to_string(xi) +
                                                   ", eta=" + std::to_string(eta) + ")");
        st.attempt(rhs, r, y, f, h, trial);
        ++steps;
        if (!(trial.err <= 1.0)) {
            h *= std::isfinite(trial.err) ? Dop853<5>::next_factor(trial.err, false) : 0.25;
            rejected = true;
            continue;
        }
        trial.f_new = rhs(r + h, trial.y_new);
        const DenseSegment<5> seg = st.dense(rhs, trial);
        const double r_new = last ? H : r + h;

        const bool zu = trial.y_new[iU] <= margin, zv = trial.y_new[iV] <= margin;
        if (zu || zv) {
            auto root = [&](std::size_t i) {
                return detail::bisect_root([&](double x) { return seg.at(x, i) - margin; }, r, r_new, cfg.zero_tol);
            };
            const double Ru = zu ? root(iU) : std::numeric_limits<double>::infinity();
            const double Rv = zv ? root(iV) : std::numeric_limits<double>::infinity();
            if (zu && zv && std::fabs(Ru - Rv) <= cfg.zero_tol)
                fail(ErrorKind::SimultaneousZero, "both components vanish at r = " + std::to_string(Ru) +
                                                      " (xi=" + std::to_string(xi) + ", eta=" + std::to_string(eta) +
                                                      "); tighten the tolerances");
            const bool u_first = Ru < Rv;
            const double R = u_first ? Ru : Rv;
            const ShotState sR = traj.make_state(R, seg(R));
            if (cfg.record) traj.push(sR, &seg);
            out.kind = u_first ? OutcomeKind::FirstZeroU : OutcomeKind::FirstZeroV;
            out.radius = R;
            out.other_value = u_first ? sR.v : sR.u;
            out.last = sR;
            out.cls = out.lean = u_first ? ShotClass::A : ShotClass::B;
            out.certified = true;
            out.basis = "crossing";
            break;
        }

        // far-field checkpoints (incomplete profiles)
        while (!complete && next_ck < table.size() && table[next_ck].radius <= r_new) {
            const TailSample& ts = table[next_ck++];
            const ShotState sc = traj.make_state(ts.radius, seg(ts.radius));
            auto [lu, lv] = tail_enclosure(sc, ts, e);
            const double wmax = std::max(lu.width(), lv.width());
            ShotClass c = ShotClass::Undecided;
            if (lu.lower > 0.0 && lv.lower > 0.0 && wmax <= cfg.certification_width * scale)
                c = ShotClass::Global;
            else if (lv.upper < 0.0 && lu.lower > 0.0)
                c = ShotClass::B;
            else if (lu.upper < 0.0 && lv.lower > 0.0)
                c = ShotClass::A;
            if (c != ShotClass::Undecided) {
                if (cfg.record) traj.push(sc, &seg);
                lu.vanishes = lu.upper <= cfg.extinction * xi;
                lv.vanishes = lv.upper <= cfg.extinction * eta;
                out.limit_u = lu;
                out.limit_v = lv;
                out.cls = out.lean = c;
                out.certified = true;
                finish_positive(sc, "tail-enclosure");
                done = true;
                break;
            }
        }
        if (done) break;

        const ShotState sn = traj.make_state(r_new, trial.y_new);
        if (cfg.record) traj.push(sn, &seg);
        r = r_new;
        y = trial.y_new;
        f = trial.f_new;
        double fac = Dop853<5>::next_factor(trial.err, true);
        if (rejected) fac = std::min(fac, 1.0);
        rejected = false;
        h *= fac;

        const bool extinct = sn.u <= cfg.extinction * xi && sn.v <= cfg.extinction * eta;
        if (last || (complete && extinct)) {
            finish_positive(sn, complete ? "decay" : "enclosure-estimate");
            if (complete) {
                out.limit_u = decay_enclosure(sn.u, sn.du, sn.r, xi, cfg.extinction);
                out.limit_v = decay_enclosure(sn.v, sn.dv, sn.r, eta, cfg.extinction);
                const double ru = sn.u / std::fabs(sn.du), rv = sn.v / std::fabs(sn.dv);
                out.lean = ru < rv ? ShotClass::A : (rv < ru ? ShotClass::B : ShotClass::Global);
                if (out.limit_u.vanishes && out.limit_v.vanishes) {
                    out.cls = ShotClass::Global;
                    out.certified = true;
                } else {
                    out.cls = out.lean;
                    out.basis = "decay-ratio";
                }
            } else {
                const TailSample ts = prob.geometry.tail_at(sn.r);
                auto [lu, lv] = tail_enclosure(sn, ts, e);
                lu.vanishes = lu.upper <= cfg.extinction * xi;
                lv.vanishes = lv.upper <= cfg.extinction * eta;
                out.limit_u = lu;
                out.limit_v = lv;
                if (lu.lower > 0.0 && lv.lower > 0.0) {
                    out.cls = out.lean = ShotClass::Global;
                } else if (lv.estimate() < 0.0 && lv.estimate() <= lu.estimate()) {
                    out.cls = out.lean = ShotClass::B;
                } else if (lu.estimate() < 0.0) {
                    out.cls = out.lean = ShotClass::A;
                } else {
                    out.cls = out.lean = ShotClass::Global;
                }
                out.certified = false;
            }
            done = true;
        }
    }
    out.steps = steps;
    if (!cfg.record) {
        Trajectory t2(m);
        t2.push_origin(traj.samples().front());
        t2.push(out.last, nullptr);
        traj = std::move(t2);
    }
    out.trajectory = std::move(traj);
    return out;
}

inline ShotOutcome integrate_shot(const ManifoldProfile& m, const ExponentPair& e, double xi, double eta,
                                  const IntegratorConfig& cfg = {}) {
    return integrate_shot(ShootingProblem(m, e), xi, eta, cfg);
}

struct SeedBrackets {
    double eta_low = 0.0;   // in B
    double eta_high = 0.0;  // in A
};

// Explicit memberships with safety factor 2, before confirmation.
inline SeedBrackets seed_brackets_unconfirmed(const GeometricSummary& g, const ExponentPair& e, double xi) {
    require(xi > 0.0, "xi must be positive");
    SeedBrackets b;
    if (g.complete()) {
        const double k = e.scaling_slope();
        b.eta_high = 4.0 * std::pow(xi, k);
        b.eta_low = 0.5 * std::pow(0.5 * xi, k);
    } else {
        const double th = g.theta_value();
        require(std::isfinite(th), "incomplete profile needs a finite theta");
        const double fa = std::max(th * std::pow(xi, e.p), std::pow(xi / th, 1.0 / e.q));
        b.eta_high = 4.0 * fa;
        const double y = 0.5 * xi;
        const double ginv = std::min(std::pow(y / th, 1.0 / e.q), th * std::pow(y, e.p));
        b.eta_low = 0.5 * ginv;
    }
    return b;
}

inline SeedBrackets ab_seed_brackets(const ShootingProblem& prob, double xi, const IntegratorConfig& cfg = {}) {
    const SeedBrackets b = seed_brackets_unconfirmed(prob.geometry, prob.exps, xi);
    IntegratorConfig c = cfg;
    c.record = false;
    const ShotOutcome hi = integrate_shot(prob, xi, b.eta_high, c);
    if (hi.lean != ShotClass::A)
        fail(ErrorKind::BracketConfirmationFailed, "eta = " + std::to_string(b.eta_high) + " at xi = " +
                                                       std::to_string(xi) + " classified " + to_string(hi.lean) +
                                                       ", expected A");
    const ShotOutcome lo = integrate_shot(prob, xi, b.eta_low, c);
    if (lo.lean != ShotClass::B)
        fail(ErrorKind::BracketConfirmationFailed, "eta = " + std::to_string(b.eta_low) + " at xi = " +
                                                       std::to_string(xi) + " classified " + to_string(lo.lean) +
                                                       ", expected B");
    return b;
}

}  // namespace lanemden
