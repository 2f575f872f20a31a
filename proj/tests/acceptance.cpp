// Acceptance criteria, one PASS/FAIL line each.
#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "lanemden/verify.hpp"

using namespace lanemden;

namespace {

int failures = 0;

void report(const char* id, const char* title, const std::vector<Verdict>& vs, double secs) {
    bool ok = !vs.empty();
    for (const auto& v : vs) ok = ok && v.passed;
    if (!ok) ++failures;
    std::printf("%s %s  %s  (%.1fs)\n", id, ok ? "PASS" : "FAIL", title, secs);
    for (const auto& v : vs)
        std::printf("    %-4s %-40s value=%.6g tol=%.6g%s%s\n", v.passed ? "ok" : "BAD", v.name.c_str(), v.value,
                    v.tolerance, v.detail.empty() ? "" : "  ", v.detail.c_str());
    std::fflush(stdout);
}

void run(const char* id, const char* title, const std::function<std::vector<Verdict>()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Verdict> vs;
    try {
        vs = body();
    } catch (const std::exception& ex) {
        vs.push_back(check::holds("exception", false, 0.0, 0.0, ex.what()));
    }
    report(id, title, vs, check::seconds_since(t0));
}

}  // namespace

int main() {
    const IntegratorConfig cfg;
    const std::uint64_t seed = 20240611;

    run("C1", "flat exact solution", [&] { return exact_solution_check(cfg); });

    EqualityCaseResult eq;
    run("C2", "Pohozaev equality case", [&] {
        eq = pohozaev_equality_check(cfg);
        return eq.verdicts;
    });

    RandomPohozaevResult rp;
    run("C3", "Pohozaev sign and monotonicity", [&] {
        rp = random_pohozaev_check(seed, 120, cfg);
        return rp.verdicts;
    });

    SymmetryResult sym;
    run("C4", "symmetric existence curve", [&] {
        sym = symmetry_check(cfg);
        return sym.verdicts;
    });

    run("C5", "flat scaling law", [&] { return scaling_check(cfg); });

    ThresholdResult th;
    run("C6", "classification thresholds", [&] {
        th = threshold_check(cfg);
        return th.verdicts;
    });

    run("C7", "existence band structure", [&] { return band_check(check::spec(Family::ExpPower, 3.0), cfg).verdicts; });

    TopologyResult topo;
    bool topo_ok = false;
    std::string topo_error;
    const auto t_topo = std::chrono::steady_clock::now();
    try {
        topo = topology_check(64, 1, cfg);
        topo_ok = true;
    } catch (const std::exception& ex) {
        topo_error = ex.what();
    }
    const double topo_secs = check::seconds_since(t_topo);

    run("C8", "vanishing limits on complete profiles", [&] {
        std::vector<const ShotOutcome*> shots;
        for (const auto& w : sym.witnesses) shots.push_back(&w);
        if (eq.hyperbolic_witness.trajectory.samples().size() > 0) shots.push_back(&eq.hyperbolic_witness);
        std::vector<const RegionCell*> cells;
        if (topo_ok)
            for (const auto& c : topo.flat.cells) cells.push_back(&c);
        return vanishing_check(shots, cells);
    });

    run("C9", "no simultaneous zeros", [&] {
        ZeroSeparation z = rp.zeros;
        z.merge(th.zeros);
        return zero_separation_check(z);
    });

    run("C10", "ordering of trajectories", [&] { return ordering_check(seed, 50, cfg); });

    run("C11", "energy identities and rigidity signal", [&] {
        const ShotOutcome* w = eq.hyperbolic_witness.trajectory.samples().empty() ? nullptr : &eq.hyperbolic_witness;
        return rigidity_check(cfg, w).verdicts;
    });

    {
        std::vector<Verdict> vs = topo_ok ? topo.verdicts
                                          : std::vector<Verdict>{check::holds("exception", false, 0, 0, topo_error)};
        report("C12", "region map topology", vs, topo_secs);
    }

    std::printf("%d of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
