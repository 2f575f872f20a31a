// Command-line front end: classify, curve, band, sweep, verify.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lanemden/diagnostics.hpp"
#include "lanemden/io.hpp"
#include "lanemden/solver.hpp"
#include "lanemden/verify.hpp"

namespace fs = std::filesystem;
using namespace lanemden;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct ProfileFlags {
    std::string family;
    std::optional<int> n;
    std::optional<double> curvature, alpha, p, q;
};

void add_profile_flags(CLI::App* cmd, ProfileFlags& f) {
    cmd->add_option("--profile", f.family, "euclidean, hyperbolic or exp_power");
    cmd->add_option("--n", f.n, "dimension");
    cmd->add_option("--curvature", f.curvature, "hyperbolic curvature parameter");
    cmd->add_option("--alpha", f.alpha, "exp_power exponent");
    cmd->add_option("--p", f.p, "exponent p");
    cmd->add_option("--q", f.q, "exponent q");
}

struct Overrides {
    std::string config_path, out;
    std::optional<std::size_t> threads;
    std::optional<double> rel_tol, abs_tol, horizon;
    ProfileFlags profile;
    std::optional<double> xi, eta, tol;
    std::vector<double> xi_grid, xi_range, eta_range;
    std::vector<std::size_t> resolution;
    std::optional<int> refine;
    std::string suite;
};

// Config file first, then command-line values on top.
ExperimentConfig build_config(const std::string& command, const Overrides& o) {
    ExperimentConfig c;
    if (!o.config_path.empty()) c = load_config(o.config_path);
    c.command = command;
    if (!o.profile.family.empty()) {
        auto f = parse_family(o.profile.family);
        if (!f) fail(ErrorKind::Config, "field 'profile.family': unknown family '" + o.profile.family + "'");
        c.profile.family = *f;
    }
    if (o.profile.n) c.profile.n = *o.profile.n;
    if (o.profile.curvature) c.profile.curvature = *o.profile.curvature;
    if (o.profile.alpha) c.profile.alpha = *o.profile.alpha;
    if (o.profile.p) c.exps.p = *o.profile.p;
    if (o.profile.q) c.exps.q = *o.profile.q;
    if (o.xi) c.xi = *o.xi;
    if (o.eta) c.eta = *o.eta;
    if (o.tol) c.tol = *o.tol;
    if (!o.xi_grid.empty()) c.xi_grid = o.xi_grid;
    if (o.xi_range.size() == 2) c.xi_range = {o.xi_range[0], o.xi_range[1]};
    if (o.eta_range.size() == 2) c.eta_range = {o.eta_range[0], o.eta_range[1]};
    if (o.resolution.size() == 2) {
        c.nx = o.resolution[0];
        c.ny = o.resolution[1];
    }
    if (o.refine) c.refine_steps = *o.refine;
    if (!o.suite.empty()) c.suite = o.suite;
    if (!o.out.empty()) c.out = o.out;
    if (o.threads) c.threads = *o.threads;
    if (o.rel_tol) c.integrator.rel_tol = *o.rel_tol;
    if (o.abs_tol) c.integrator.abs_tol = *o.abs_tol;
    if (o.horizon) c.integrator.horizon = *o.horizon;
    validate(c);
    if (command == "classify") {
        if (!c.xi) fail(ErrorKind::Config, "field 'xi': required by classify");
        if (!c.eta) fail(ErrorKind::Config, "field 'eta': required by classify");
    }
    if ((command == "curve" || command == "band") && c.xi_grid.empty())
        fail(ErrorKind::Config, "field 'xi_grid': required by " + command);
    if (command == "verify") {
        const auto& names = suite_names();
        if (std::find(names.begin(), names.end(), c.suite) == names.end())
            fail(ErrorKind::Config, "field 'suite': unknown suite '" + c.suite + "'");
    }
    return c;
}

fs::path output_root(const ExperimentConfig& c) {
    if (!c.out.empty()) return c.out;
    if (const char* env = std::getenv("LANEMDEN_OUT"); env && *env) return env;
    return "lanemden-runs";
}

class Run {
public:
    Run(const ExperimentConfig& c) : cfg_(c) {
        rec_.config_hash = config_hash(c);
        rec_.command = c.command;
        rec_.started = utc_timestamp();
        dir_ = output_root(c) / (c.command + "-" + rec_.config_hash);
        fs::create_directories(dir_);
        write("config.json", serialize(c));
    }

    const fs::path& dir() const { return dir_; }
    RunRecord& record() { return rec_; }

    fs::path path(const std::string& name) {
        if (std::find(rec_.artifacts.begin(), rec_.artifacts.end(), name) == rec_.artifacts.end())
            rec_.artifacts.push_back(name);
        return dir_ / name;
    }

    void write(const std::string& name, const std::string& body) {
        std::ofstream out(path(name), std::ios::binary);
        out << body;
    }

    void tally(const std::vector<Verdict>& vs) {
        for (const auto& v : vs) {
            if (v.skipped)
                ++rec_.skipped;
            else if (v.passed)
                ++rec_.passed;
            else
                ++rec_.failed;
        }
    }

    void finish() {
        rec_.finished = utc_timestamp();
        path("run.json");
        std::ofstream out(dir_ / "run.json");
        out << rec_.to_json().dump(2) << "\n";
    }

private:
    ExperimentConfig cfg_;
    RunRecord rec_;
    fs::path dir_;
};

std::vector<std::pair<std::string, std::string>> base_meta(const ExperimentConfig& c) {
    return {{"profile", describe(c.profile)},
            {"p", detail::fmt_num(c.exps.p)},
            {"q", detail::fmt_num(c.exps.q)},
            {"config_hash", config_hash(c)}};
}

Verdict skipped(std::string name, std::string reason) {
    Verdict v;
    v.name = std::move(name);
    v.skipped = true;
    v.detail = std::move(reason);
    return v;
}

int cmd_classify(const ExperimentConfig& c) {
    const ManifoldProfile m = builtin_profile(c.profile);
    const ShootingProblem prob(m, c.exps);
    const ShotOutcome o = integrate_shot(prob, *c.xi, *c.eta, c.integrator);

    Run run(c);
    auto meta = base_meta(c);
    meta.emplace_back("xi", detail::fmt_num(*c.xi));
    meta.emplace_back("eta", detail::fmt_num(*c.eta));
    meta.emplace_back("outcome", to_string(o.kind));
    {
        std::ofstream csv(run.path("trajectory.csv"), std::ios::binary);
        write_trajectory_csv(csv, o, m, c.exps, meta);
    }

    std::vector<Verdict> vs;
    const PohozaevScan ps = pohozaev_scan(o.trajectory, m, c.exps, 1e-8);
    const Regime regime = c.exps.regime(m.n);
    bool structured = regime != Regime::Subcritical && c.exps.p * c.exps.q > 1.0;
    std::string why = "exponents are subcritical";
    if (structured && !check_volume_convexity(m, c.exps).convex) {
        structured = false;
        why = "no volume convexity certificate";
    }
    if (structured) {
        vs.push_back(check::at_most("pohozaev_sign_violations", double(ps.sign_violations), 0.0,
                                    "max P " + detail::fmt_num(ps.max_P)));
        vs.push_back(check::at_most("pohozaev_monotonicity_violations", double(ps.monotonicity_violations), 0.0));
    } else {
        vs.push_back(skipped("pohozaev_sign_violations", why));
        vs.push_back(skipped("pohozaev_monotonicity_violations", why));
    }
    vs.push_back(check::at_most("derivative_identity_residual", std::max(ps.energy_residual, ps.pohozaev_residual),
                                10.0 * c.integrator.rel_tol));
    std::vector<double> ck;
    for (double R = 1.0; R < o.radius; R *= 10.0) ck.push_back(R);
    ck.push_back(o.radius);
    const EnergyLedger L = energy_ledger(o.trajectory, m, c.exps, ck);
    vs.push_back(check::at_most("ledger_identity_residual", L.max_residual(), 1e-8));
    if (o.kind != OutcomeKind::PositiveToHorizon) {
        const double init = o.kind == OutcomeKind::FirstZeroU ? *c.eta : *c.xi;
        vs.push_back(check::holds("other_component_at_zero", o.other_value >= 1e-6 * init, o.other_value / init, 1e-6,
                                  "relative to its initial value"));
    } else if (prob.geometry.complete()) {
        if (o.cls == ShotClass::Global)
            vs.push_back(check::holds("global_limits_vanish", o.limit_u.vanishes && o.limit_v.vanishes));
    } else if (c.exps.p * c.exps.q > 1.0) {
        const auto enc = limit_enclosure(o, prob.geometry, c.exps);
        const auto ab = abs_bound_check(enc, c.exps, prob.geometry.theta_value());
        vs.push_back(check::holds("limit_bound", ab.satisfied, std::min(ab.margin_u, ab.margin_v), 0.0,
                                  "smallest margin below the explicit bound"));
    }
    run.tally(vs);

    json j;
    j["outcome"] = to_string(o.kind);
    j["class"] = to_string(o.cls);
    j["regime"] = to_string(regime);
    j["completeness"] = prob.geometry.complete() ? "complete" : "incomplete";
    j["shot"] = to_json(o);
    j["pohozaev_max_abs"] = ps.max_abs_P;
    j["pohozaev_max"] = ps.max_P;
    j["invariants"] = json::array();
    for (const auto& v : vs) j["invariants"].push_back(v.to_json());
    const bool ok = run.record().failed == 0;
    j["all_passed"] = ok;
    run.write("verdict.json", j.dump(2) + "\n");
    run.finish();
    std::cout << j.dump(2) << "\n";
    return ok ? 0 : kExitFail;
}

void require_family(const ShootingProblem& prob, bool complete) {
    if (prob.geometry.complete() == complete) return;
    if (complete)
        fail(ErrorKind::ProfileMismatch,
             "profile is stochastically incomplete; use band (a single existence curve needs a complete model)");
    fail(ErrorKind::ProfileMismatch,
         "profile is stochastically complete; use curve (an existence band needs an incomplete model)");
}

int cmd_trace(const ExperimentConfig& c, bool curve) {
    const ShootingProblem prob(builtin_profile(c.profile), c.exps);
    require_family(prob, curve);
    Run run(c);
    TraceResult tr;
    int status = 0;
    std::string error;
    try {
        tr = curve_trace(prob, c.xi_grid, c.tol, c.integrator);
    } catch (const Error& ex) {
        if (ex.kind() != ErrorKind::MonotonicityViolation) throw;
        error = ex.what();
        status = kExitFail;
    }
    json j;
    j["command"] = c.command;
    j["profile"] = describe(c.profile);
    j["points"] = json::array();
    auto meta = base_meta(c);
    meta.emplace_back("tol", detail::fmt_num(c.tol));
    std::ostringstream csv;
    using detail::fmt_num;
    if (curve) {
        write_csv_metadata(csv, meta, "xi,eta,bracket_width,witness_class");
        for (const auto& p : tr.curve) {
            j["points"].push_back(to_json(p));
            csv << fmt_num(p.xi) << ',' << fmt_num(p.eta) << ',' << fmt_num(p.bracket_width) << ','
                << to_string(p.witness.cls) << '\n';
        }
    } else {
        write_csv_metadata(csv, meta, "xi,eta_m,eta_M,width_m,width_M,gap");
        for (const auto& p : tr.band) {
            j["points"].push_back(to_json(p));
            csv << fmt_num(p.xi) << ',' << fmt_num(p.eta_m) << ',' << fmt_num(p.eta_M) << ',' << fmt_num(p.width_m)
                << ',' << fmt_num(p.width_M) << ',' << fmt_num(p.gap()) << '\n';
        }
    }
    Verdict mono = check::holds("monotonicity", status == 0, 0.0, 0.0, error);
    run.tally({mono});
    j["monotonicity"] = mono.to_json();
    run.write(curve ? "curve.csv" : "band.csv", csv.str());
    run.write("points.json", j.dump(2) + "\n");
    run.finish();
    std::cout << csv.str();
    if (status) std::cerr << error << "\n";
    return status;
}

int cmd_sweep(const ExperimentConfig& c) {
    const ShootingProblem prob(builtin_profile(c.profile), c.exps);
    Run run(c);
    const fs::path final_csv = run.dir() / "region.csv";
    const fs::path partial = run.dir() / "region.partial";

    std::map<std::pair<std::size_t, std::size_t>, RegionCell> stored;
    auto load_rows = [&](const fs::path& f, bool indexed) {
        std::ifstream in(f);
        std::string line;
        std::size_t k = 0;
        bool header = false;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            if (!indexed && !header) {
                header = true;
                continue;
            }
            std::size_t ix, iy;
            std::string row = line;
            if (indexed) {
                const auto a = line.find(','), b = line.find(',', a + 1);
                if (a == std::string::npos || b == std::string::npos) continue;
                ix = std::stoul(line.substr(0, a));
                iy = std::stoul(line.substr(a + 1, b - a - 1));
                row = line.substr(b + 1);
            } else {
                ix = k / c.ny;
                iy = k % c.ny;
                ++k;
            }
            if (auto cell = parse_region_row(row); cell && ix < c.nx && iy < c.ny) stored[{ix, iy}] = *cell;
        }
    };
    if (fs::exists(final_csv)) load_rows(final_csv, false);
    if (fs::exists(partial)) load_rows(partial, true);
    const std::size_t reused = stored.size();

    std::ofstream part(partial, std::ios::app);
    SweepOptions opt;
    opt.threads = c.threads;
    opt.refine_steps = c.refine_steps;
    opt.cached = [&](std::size_t ix, std::size_t iy) -> std::optional<RegionCell> {
        auto it = stored.find({ix, iy});
        if (it == stored.end()) return std::nullopt;
        return it->second;
    };
    opt.on_cell = [&](std::size_t ix, std::size_t iy, const RegionCell& cell) {
        part << ix << ',' << iy << ',' << region_row(cell) << '\n';
        part.flush();
    };
    const RegionMap map = sweep_region(prob, c.xi_range, c.eta_range, c.nx, c.ny, c.integrator, opt);
    part.close();

    auto meta = base_meta(c);
    meta.emplace_back("resolution", std::to_string(c.nx) + "x" + std::to_string(c.ny));
    std::ostringstream csv;
    write_csv_metadata(csv, meta, kRegionColumns);
    std::size_t errors = 0;
    for (std::size_t ix = 0; ix < c.nx; ++ix)
        for (std::size_t iy = 0; iy < c.ny; ++iy) {
            csv << region_row(map.cell(ix, iy)) << '\n';
            if (map.cell(ix, iy).status != "ok") ++errors;
        }
    run.write("region.csv", csv.str());
    fs::remove(partial);
    if (!map.refinement.empty()) {
        std::ostringstream ref;
        write_csv_metadata(ref, meta, "xi,eta,below,above,width");
        using detail::fmt_num;
        for (const auto& r : map.refinement)
            ref << fmt_num(r.xi) << ',' << fmt_num(r.eta) << ',' << to_string(r.below) << ',' << to_string(r.above)
                << ',' << fmt_num(r.width) << '\n';
        run.write("refinement.csv", ref.str());
    }
    run.tally({check::at_most("cell_errors", double(errors), 0.0)});
    run.finish();
    std::cout << "cells " << c.nx * c.ny << " reused " << reused << " errors " << errors << "\n"
              << "region map " << (run.dir() / "region.csv").string() << "\n";
    return 0;
}

int cmd_verify(const ExperimentConfig& c, bool profile_given) {
    VerifyOptions opt;
    opt.integrator = c.integrator;
    opt.threads = c.threads;
    if (profile_given) opt.profile = c.profile;
    const SuiteReport rep = run_suite(c.suite, opt);
    Run run(c);
    run.tally(rep.verdicts);
    const json j = rep.to_json();
    run.write("report.json", j.dump(2) + "\n");
    run.finish();
    std::cout << j.dump(2) << "\n";
    return rep.passed() ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radial shooting for Lane-Emden systems on model manifolds"};
    app.require_subcommand(1);
    app.fallthrough();
    Overrides o;
    app.add_option("--config", o.config_path, "JSON config file");
    app.add_option("--out", o.out, "output root (default $LANEMDEN_OUT or ./lanemden-runs)");
    app.add_option("--threads", o.threads, "worker threads");
    app.add_option("--rel-tol", o.rel_tol, "integrator relative tolerance");
    app.add_option("--abs-tol", o.abs_tol, "integrator absolute tolerance");
    app.add_option("--horizon", o.horizon, "integration horizon");

    auto* classify = app.add_subcommand("classify", "integrate one shot and check the invariants");
    add_profile_flags(classify, o.profile);
    classify->add_option("--xi", o.xi, "u(0)");
    classify->add_option("--eta", o.eta, "v(0)");

    auto* curve = app.add_subcommand("curve", "existence curve on a complete profile");
    auto* band = app.add_subcommand("band", "existence band on an incomplete profile");
    for (auto* cmd : {curve, band}) {
        add_profile_flags(cmd, o.profile);
        cmd->add_option("--xi-grid", o.xi_grid, "increasing xi values")->delimiter(',');
        cmd->add_option("--tol", o.tol, "bisection tolerance");
    }

    auto* sweep = app.add_subcommand("sweep", "classify a grid of initial data");
    add_profile_flags(sweep, o.profile);
    sweep->add_option("--xi-range", o.xi_range, "low high")->expected(2);
    sweep->add_option("--eta-range", o.eta_range, "low high")->expected(2);
    sweep->add_option("--resolution", o.resolution, "nx ny")->expected(2);
    sweep->add_option("--refine", o.refine, "bisections per boundary crossing");

    auto* verify = app.add_subcommand("verify", "run a property suite");
    verify->add_option("suite", o.suite, "suite name")->required();
    add_profile_flags(verify, o.profile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    std::string command;
    for (auto* s : {classify, curve, band, sweep, verify})
        if (s->parsed()) command = s->get_name();

    ExperimentConfig cfg;
    try {
        cfg = build_config(command, o);
    } catch (const std::exception& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfig;
    }
    try {
        if (command == "classify") return cmd_classify(cfg);
        if (command == "curve") return cmd_trace(cfg, true);
        if (command == "band") return cmd_trace(cfg, false);
        if (command == "sweep") return cmd_sweep(cfg);
        return cmd_verify(cfg, !o.profile.family.empty());
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitFail;
    }
}
