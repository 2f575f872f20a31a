#pragma once

#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "lanemden/diagnostics.hpp"
#include "lanemden/errors.hpp"
#include "lanemden/manifold.hpp"
#include "lanemden/shooting.hpp"
#include "lanemden/solver.hpp"

namespace lanemden {

using json = nlohmann::ordered_json;

inline constexpr const char* kCsvVersion = "lanemden-csv 1";
inline constexpr const char* kTrajectoryColumns = "r,u,v,du,dv,F,P,K,I_mixed,I_u,I_v";
inline constexpr const char* kRegionColumns =
    "xi,eta,class,outcome,horizon,radius,lu_lower,lu_upper,lv_lower,lv_upper,status";

struct ExperimentConfig {
    std::string command;
    ProfileSpec profile;
    ExponentPair exps;
    std::optional<double> xi, eta;
    std::vector<double> xi_grid;
    Range xi_range{0.5, 2.0};
    Range eta_range{0.5, 2.0};
    std::size_t nx = 16, ny = 16;
    double tol = 1e-8;
    std::string suite;
    std::string out;
    std::size_t threads = 1;
    int refine_steps = 12;
    IntegratorConfig integrator;

    bool operator==(const ExperimentConfig& o) const {
        return command == o.command && profile == o.profile && exps == o.exps && xi == o.xi && eta == o.eta &&
               xi_grid == o.xi_grid && xi_range.lo == o.xi_range.lo && xi_range.hi == o.xi_range.hi &&
               eta_range.lo == o.eta_range.lo && eta_range.hi == o.eta_range.hi && nx == o.nx && ny == o.ny &&
               tol == o.tol && suite == o.suite && out == o.out && threads == o.threads &&
               refine_steps == o.refine_steps && integrator == o.integrator;
    }
};

namespace detail {

inline json opt_num(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline std::string fmt_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

[[noreturn]] inline void field_error(const std::string& field, const std::string& msg) {
    fail(ErrorKind::Config, "field '" + field + "': " + msg);
}

inline const json* child(const json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() || it->is_null() ? nullptr : &*it;
}

inline double get_num(const json& j, const char* key, const std::string& path, double fallback) {
    const json* c = child(j, key);
    if (!c) return fallback;
    if (!c->is_number()) field_error(path + key, "expected a number");
    return c->get<double>();
}

inline std::optional<double> get_opt_num(const json& j, const char* key, const std::string& path) {
    const json* c = child(j, key);
    if (!c) return std::nullopt;
    if (!c->is_number()) field_error(path + key, "expected a number");
    return c->get<double>();
}

inline std::size_t get_count(const json& j, const char* key, const std::string& path, std::size_t fallback) {
    const json* c = child(j, key);
    if (!c) return fallback;
    if (!c->is_number_integer() || c->get<long long>() < 0) field_error(path + key, "expected a non-negative integer");
    return c->get<std::size_t>();
}

inline std::string get_str(const json& j, const char* key, const std::string& path, std::string fallback) {
    const json* c = child(j, key);
    if (!c) return fallback;
    if (!c->is_string()) field_error(path + key, "expected a string");
    return c->get<std::string>();
}

inline Range get_range(const json& j, const char* key, Range fallback) {
    const json* c = child(j, key);
    if (!c) return fallback;
    if (!c->is_array() || c->size() != 2 || !(*c)[0].is_number() || !(*c)[1].is_number())
        field_error(key, "expected [low, high]");
    return {(*c)[0].get<double>(), (*c)[1].get<double>()};
}

}  // namespace detail

inline json to_json(const IntegratorConfig& c) {
    json j;
    j["rel_tol"] = c.rel_tol;
    j["abs_tol"] = c.abs_tol;
    j["horizon"] = detail::opt_num(c.horizon);
    j["r0_scale"] = c.r0_scale;
    j["positivity_margin"] = detail::opt_num(c.positivity_margin);
    j["max_steps"] = c.max_steps;
    j["zero_tol"] = c.zero_tol;
    j["extinction"] = c.extinction;
    j["certification_width"] = c.certification_width;
    return j;
}

inline json to_json(const ExperimentConfig& c) {
    json j;
    j["command"] = c.command;
    j["profile"] = {{"family", to_string(c.profile.family)},
                    {"n", c.profile.n},
                    {"curvature", c.profile.curvature},
                    {"alpha", c.profile.alpha}};
    j["exponents"] = {{"p", c.exps.p}, {"q", c.exps.q}};
    j["xi"] = detail::opt_num(c.xi);
    j["eta"] = detail::opt_num(c.eta);
    j["xi_grid"] = c.xi_grid;
    j["xi_range"] = {c.xi_range.lo, c.xi_range.hi};
    j["eta_range"] = {c.eta_range.lo, c.eta_range.hi};
    j["resolution"] = {c.nx, c.ny};
    j["tol"] = c.tol;
    j["suite"] = c.suite;
    j["out"] = c.out;
    j["threads"] = c.threads;
    j["refine_steps"] = c.refine_steps;
    j["integrator"] = to_json(c.integrator);
    return j;
}

// Checks every numeric field against its domain.
inline void validate(const ExperimentConfig& c) {
    using detail::field_error;
    if (c.profile.n < 3) field_error("profile.n", "dimension must be at least 3");
    if (!(c.profile.curvature > 0.0)) field_error("profile.curvature", "must be positive");
    if (!(c.profile.alpha > 0.0)) field_error("profile.alpha", "must be positive");
    if (!(c.exps.p > 0.0) || !std::isfinite(c.exps.p)) field_error("exponents.p", "must be positive");
    if (!(c.exps.q > 0.0) || !std::isfinite(c.exps.q)) field_error("exponents.q", "must be positive");
    if (c.xi && !(*c.xi > 0.0)) field_error("xi", "must be positive");
    if (c.eta && !(*c.eta > 0.0)) field_error("eta", "must be positive");
    for (std::size_t i = 0; i < c.xi_grid.size(); ++i) {
        if (!(c.xi_grid[i] > 0.0)) field_error("xi_grid[" + std::to_string(i) + "]", "must be positive");
        if (i > 0 && !(c.xi_grid[i] > c.xi_grid[i - 1]))
            field_error("xi_grid[" + std::to_string(i) + "]", "grid must be strictly increasing");
    }
    if (!(c.xi_range.lo > 0.0 && c.xi_range.hi > c.xi_range.lo)) field_error("xi_range", "need 0 < low < high");
    if (!(c.eta_range.lo > 0.0 && c.eta_range.hi > c.eta_range.lo)) field_error("eta_range", "need 0 < low < high");
    if (c.nx < 2 || c.ny < 2) field_error("resolution", "need at least 2 points per axis");
    if (!(c.tol > 0.0)) field_error("tol", "must be positive");
    if (c.threads < 1) field_error("threads", "must be at least 1");
    if (c.refine_steps < 0) field_error("refine_steps", "must be non-negative");
    const auto& g = c.integrator;
    if (!(g.rel_tol > 0.0)) field_error("integrator.rel_tol", "must be positive");
    if (!(g.abs_tol > 0.0)) field_error("integrator.abs_tol", "must be positive");
    if (g.horizon && !(*g.horizon > 0.0)) field_error("integrator.horizon", "must be positive");
    if (!(g.r0_scale > 0.0)) field_error("integrator.r0_scale", "must be positive");
    if (g.positivity_margin && !(*g.positivity_margin >= 0.0))
        field_error("integrator.positivity_margin", "must be non-negative");
    if (g.max_steps < 1) field_error("integrator.max_steps", "must be positive");
    if (!(g.zero_tol > 0.0)) field_error("integrator.zero_tol", "must be positive");
    if (!(g.extinction > 0.0 && g.extinction < 1.0)) field_error("integrator.extinction", "must lie in (0, 1)");
    if (!(g.certification_width > 0.0)) field_error("integrator.certification_width", "must be positive");
}

inline ExperimentConfig config_from_json(const json& j) {
    using namespace detail;
    if (!j.is_object()) fail(ErrorKind::Config, "config root must be an object");
    ExperimentConfig c;
    c.command = get_str(j, "command", "", "");
    if (const json* p = child(j, "profile")) {
        if (!p->is_object()) field_error("profile", "expected an object");
        const std::string fam = get_str(*p, "family", "profile.", "euclidean");
        auto f = parse_family(fam);
        if (!f) field_error("profile.family", "unknown family '" + fam + "'");
        c.profile.family = *f;
        const double n = get_num(*p, "n", "profile.", 3.0);
        if (n != std::floor(n)) field_error("profile.n", "expected an integer");
        c.profile.n = int(n);
        c.profile.curvature = get_num(*p, "curvature", "profile.", 1.0);
        c.profile.alpha = get_num(*p, "alpha", "profile.", 3.0);
    }
    if (const json* e = child(j, "exponents")) {
        if (!e->is_object()) field_error("exponents", "expected an object");
        c.exps.p = get_num(*e, "p", "exponents.", 5.0);
        c.exps.q = get_num(*e, "q", "exponents.", 5.0);
    }
    c.xi = get_opt_num(j, "xi", "");
    c.eta = get_opt_num(j, "eta", "");
    if (const json* g = child(j, "xi_grid")) {
        if (!g->is_array()) field_error("xi_grid", "expected an array");
        for (std::size_t i = 0; i < g->size(); ++i) {
            if (!(*g)[i].is_number()) field_error("xi_grid[" + std::to_string(i) + "]", "expected a number");
            c.xi_grid.push_back((*g)[i].get<double>());
        }
    }
    c.xi_range = get_range(j, "xi_range", c.xi_range);
    c.eta_range = get_range(j, "eta_range", c.eta_range);
    if (const json* r = child(j, "resolution")) {
        if (!r->is_array() || r->size() != 2 || !(*r)[0].is_number_integer() || !(*r)[1].is_number_integer())
            field_error("resolution", "expected [nx, ny]");
        c.nx = (*r)[0].get<std::size_t>();
        c.ny = (*r)[1].get<std::size_t>();
    }
    c.tol = get_num(j, "tol", "", c.tol);
    c.suite = get_str(j, "suite", "", "");
    c.out = get_str(j, "out", "", "");
    c.threads = get_count(j, "threads", "", c.threads);
    c.refine_steps = int(get_count(j, "refine_steps", "", std::size_t(c.refine_steps)));
    if (const json* g = child(j, "integrator")) {
        if (!g->is_object()) field_error("integrator", "expected an object");
        auto& ic = c.integrator;
        const std::string p = "integrator.";
        ic.rel_tol = get_num(*g, "rel_tol", p, ic.rel_tol);
        ic.abs_tol = get_num(*g, "abs_tol", p, ic.abs_tol);
        ic.horizon = get_opt_num(*g, "horizon", p);
        ic.r0_scale = get_num(*g, "r0_scale", p, ic.r0_scale);
        ic.positivity_margin = get_opt_num(*g, "positivity_margin", p);
        ic.max_steps = long(get_num(*g, "max_steps", p, double(ic.max_steps)));
        ic.zero_tol = get_num(*g, "zero_tol", p, ic.zero_tol);
        ic.extinction = get_num(*g, "extinction", p, ic.extinction);
        ic.certification_width = get_num(*g, "certification_width", p, ic.certification_width);
    }
    validate(c);
    return c;
}

// Parses config text; syntax errors name the line and column.
inline ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& ex) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < ex.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        fail(ErrorKind::Config, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + ex.what());
    }
    return config_from_json(j);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Config, "cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

inline std::string serialize(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

// Hash of the fields that determine results; output location and thread
// count are excluded.
inline std::string config_hash(const ExperimentConfig& c) {
    json j = to_json(c);
    j.erase("out");
    j.erase("threads");
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(j.dump()));
    return buf;
}

inline std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunRecord {
    std::string config_hash;
    std::string command;
    std::string started;
    std::string finished;
    std::vector<std::string> artifacts;
    int passed = 0;
    int failed = 0;
    int skipped = 0;

    json to_json() const {
        return {{"config_hash", config_hash},
                {"command", command},
                {"started", started},
                {"finished", finished},
                {"artifacts", artifacts},
                {"verdicts", {{"passed", passed}, {"failed", failed}, {"skipped", skipped}}}};
    }
};

struct Verdict {
    std::string name;
    bool passed = true;
    bool skipped = false;
    double value = 0.0;
    double tolerance = 0.0;
    std::string detail;

    json to_json() const {
        json j{{"name", name}, {"status", skipped ? "SKIPPED" : (passed ? "PASS" : "FAIL")}};
        j["value"] = std::isfinite(value) ? json(value) : json(detail::fmt_num(value));
        j["tolerance"] = tolerance;
        if (!this->detail.empty()) j["detail"] = this->detail;
        return j;
    }
};

inline void write_csv_metadata(std::ostream& os, const std::vector<std::pair<std::string, std::string>>& meta,
                               const char* columns) {
    os << "# " << kCsvVersion << " columns=" << columns << "\n";
    for (const auto& [k, v] : meta) os << "# " << k << "=" << v << "\n";
    os << columns << "\n";
}

inline std::string describe(const ProfileSpec& s) {
    std::string d = std::string(to_string(s.family)) + " n=" + std::to_string(s.n);
    if (s.family == Family::Hyperbolic) d += " curvature=" + detail::fmt_num(s.curvature);
    if (s.family == Family::ExpPower) d += " alpha=" + detail::fmt_num(s.alpha);
    return d;
}

// One row per trajectory node with energies accumulated from the pole.
inline void write_trajectory_csv(std::ostream& os, const ShotOutcome& o, const ManifoldProfile& m,
                                 const ExponentPair& e, const std::vector<std::pair<std::string, std::string>>& meta) {
    write_csv_metadata(os, meta, kTrajectoryColumns);
    const auto& nodes = o.trajectory.samples();
    const EnergyLedger L = energy_ledger(o.trajectory, m, e);
    using detail::fmt_num;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const ShotState& s = nodes[i];
        const PohozaevSample ps = pohozaev_at(s, m, e);
        double Im = 0.0, Iu = 0.0, Iv = 0.0;
        if (i < L.points.size()) {
            Im = L.points[i].I_mixed;
            Iu = L.points[i].I_u;
            Iv = L.points[i].I_v;
        }
        os << fmt_num(s.r) << ',' << fmt_num(s.u) << ',' << fmt_num(s.v) << ',' << fmt_num(s.du) << ','
           << fmt_num(s.dv) << ',' << fmt_num(ps.F) << ',' << fmt_num(ps.P) << ',' << fmt_num(ps.K) << ','
           << fmt_num(Im) << ',' << fmt_num(Iu) << ',' << fmt_num(Iv) << '\n';
    }
}

inline std::string region_row(const RegionCell& c) {
    using detail::fmt_num;
    std::string status = c.status;
    for (char& ch : status)
        if (ch == ',' || ch == '\n') ch = ';';
    return fmt_num(c.xi) + ',' + fmt_num(c.eta) + ',' + to_string(c.cls) + ',' + to_string(c.kind) + ',' +
           fmt_num(c.horizon) + ',' + fmt_num(c.radius) + ',' + fmt_num(c.limit_u.lower) + ',' +
           fmt_num(c.limit_u.upper) + ',' + fmt_num(c.limit_v.lower) + ',' + fmt_num(c.limit_v.upper) + ',' + status;
}

// Inverse of region_row; nullopt on malformed rows.
inline std::optional<RegionCell> parse_region_row(const std::string& line) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() != 11) return std::nullopt;
    RegionCell c;
    try {
        c.xi = std::stod(f[0]);
        c.eta = std::stod(f[1]);
        c.horizon = std::stod(f[4]);
        c.radius = std::stod(f[5]);
        c.limit_u.lower = std::stod(f[6]);
        c.limit_u.upper = std::stod(f[7]);
        c.limit_v.lower = std::stod(f[8]);
        c.limit_v.upper = std::stod(f[9]);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    bool found = false;
    for (ShotClass k : {ShotClass::A, ShotClass::B, ShotClass::Global, ShotClass::Undecided})
        if (f[2] == to_string(k)) c.cls = k, found = true;
    if (!found) return std::nullopt;
    found = false;
    for (OutcomeKind k : {OutcomeKind::FirstZeroU, OutcomeKind::FirstZeroV, OutcomeKind::PositiveToHorizon})
        if (f[3] == to_string(k)) c.kind = k, found = true;
    if (!found) return std::nullopt;
    c.status = f[10];
    return c;
}

inline json to_json(const LimitEnclosure& l) {
    return {{"lower", l.lower}, {"upper", l.upper}, {"vanishes", l.vanishes}, {"rigorous", l.rigorous}};
}

inline json to_json(const ShotOutcome& o) {
    return {{"xi", o.xi},
            {"eta", o.eta},
            {"outcome", to_string(o.kind)},
            {"class", to_string(o.cls)},
            {"lean", to_string(o.lean)},
            {"certified", o.certified},
            {"basis", o.basis},
            {"radius", o.radius},
            {"other_value", o.other_value},
            {"steps", o.steps},
            {"limit_u", to_json(o.limit_u)},
            {"limit_v", to_json(o.limit_v)}};
}

inline json to_json(const CurvePoint& c) {
    json j{{"xi", c.xi},
           {"eta", c.eta},
           {"bracket_width", c.bracket_width},
           {"eta_low", c.eta_low},
           {"eta_high", c.eta_high},
           {"bisections", c.bisections},
           {"warm_started", c.warm_started},
           {"witness", to_json(c.witness)}};
    if (!c.warning.empty()) j["warning"] = c.warning;
    return j;
}

inline json to_json(const BandPoint& b) {
    json j{{"xi", b.xi},
           {"eta_m", b.eta_m},
           {"eta_M", b.eta_M},
           {"width_m", b.width_m},
           {"width_M", b.width_M},
           {"gap", b.gap()},
           {"seed", b.seed},
           {"feasible_low", b.feasible_low},
           {"feasible_high", b.feasible_high},
           {"shots", b.shots},
           {"warm_started", b.warm_started},
           {"witness_m", to_json(b.witness_m)},
           {"witness_mid", to_json(b.witness_mid)},
           {"witness_M", to_json(b.witness_M)}};
    if (!b.warning.empty()) j["warning"] = b.warning;
    return j;
}

}  // namespace lanemden
