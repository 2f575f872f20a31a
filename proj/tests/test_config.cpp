#include <sstream>

#include <gtest/gtest.h>

#include "lanemden/io.hpp"

using namespace lanemden;

namespace {

ExperimentConfig sample() {
    ExperimentConfig c;
    c.command = "band";
    c.profile.family = Family::ExpPower;
    c.profile.alpha = 3.0;
    c.exps = ExponentPair(6.0, 8.0);
    c.xi = 0.1;
    c.xi_grid = {0.5, 1.0 / 3.0 + 1.0, 2.0};
    c.eta_range = {0.25, 4.0};
    c.nx = 7;
    c.ny = 9;
    c.tol = 1e-9;
    c.suite = "band";
    c.out = "/tmp/runs";
    c.threads = 3;
    c.integrator.horizon = 12.5;
    c.integrator.rel_tol = 1e-11;
    return c;
}

std::string config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
        return e.what();
    }
    ADD_FAILURE() << "accepted: " << text;
    return {};
}

}  // namespace

TEST(Config, RoundTripsThroughText) {
    const ExperimentConfig c = sample();
    const ExperimentConfig back = parse_config(serialize(c));
    EXPECT_TRUE(back == c);
    EXPECT_EQ(serialize(back), serialize(c));
    EXPECT_TRUE(parse_config(serialize(ExperimentConfig{})) == ExperimentConfig{});
}

TEST(Config, SyntaxErrorsNameLineAndColumn) {
    const std::string msg = config_error("{\n  \"tol\": 1e-8,\n  \"xi\": ]\n}");
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column"), std::string::npos) << msg;
}

TEST(Config, FieldErrorsNameTheField) {
    EXPECT_NE(config_error(R"({"eta": 0})").find("'eta'"), std::string::npos);
    EXPECT_NE(config_error(R"({"eta": -1.5})").find("'eta'"), std::string::npos);
    EXPECT_NE(config_error(R"({"profile": {"family": "sphere"}})").find("profile.family"), std::string::npos);
    EXPECT_NE(config_error(R"({"profile": {"n": 3.5}})").find("profile.n"), std::string::npos);
    EXPECT_NE(config_error(R"({"resolution": [4]})").find("resolution"), std::string::npos);
    EXPECT_NE(config_error(R"({"xi_grid": [1, 0.5]})").find("xi_grid[1]"), std::string::npos);
    EXPECT_NE(config_error(R"({"integrator": {"rel_tol": -1}})").find("integrator.rel_tol"), std::string::npos);
    EXPECT_NE(config_error(R"({"tol": "small"})").find("tol"), std::string::npos);
    config_error("[1, 2]");
}

TEST(Config, HashIgnoresOutputAndThreads) {
    ExperimentConfig a = sample(), b = sample();
    b.out = "/elsewhere";
    b.threads = 16;
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
    b.tol = 2e-9;
    EXPECT_NE(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(parse_config(serialize(a))), config_hash(a));
}

TEST(Config, FnvMatchesReferenceVectors) {
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
    EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ull);
}

TEST(Csv, RegionRowRoundTrips) {
    RegionCell c;
    c.xi = 0.1;
    c.eta = 1.0 / 3.0;
    c.cls = ShotClass::Global;
    c.kind = OutcomeKind::PositiveToHorizon;
    c.horizon = 32.0;
    c.radius = 32.0;
    c.limit_u = {0.25, 0.2500001};
    c.limit_v = {1e-300, 2.5e-7};
    const auto back = parse_region_row(region_row(c));
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(back->xi, c.xi);
    EXPECT_EQ(back->eta, c.eta);
    EXPECT_EQ(back->cls, c.cls);
    EXPECT_EQ(back->kind, c.kind);
    EXPECT_EQ(back->limit_u.upper, c.limit_u.upper);
    EXPECT_EQ(back->limit_v.lower, c.limit_v.lower);
    EXPECT_EQ(back->status, "ok");
    EXPECT_FALSE(parse_region_row("1,2,A").has_value());
    EXPECT_FALSE(parse_region_row("1,2,Z,FirstZeroU,1,1,0,0,0,0,ok").has_value());
}

TEST(Csv, StatusCommasAreEscaped) {
    RegionCell c;
    c.xi = c.eta = 1.0;
    c.status = "failed, twice\nreally";
    const auto back = parse_region_row(region_row(c));
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(back->status, "failed; twice;really");
}

TEST(Csv, HeaderCarriesTheVersion) {
    std::ostringstream os;
    write_csv_metadata(os, {{"profile", "euclidean n=3"}}, kRegionColumns);
    std::istringstream in(os.str());
    std::string l1, l2, l3;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    EXPECT_EQ(l1, std::string("# lanemden-csv 1 columns=") + kRegionColumns);
    EXPECT_EQ(l2, "# profile=euclidean n=3");
    EXPECT_EQ(l3, kRegionColumns);
}

TEST(Csv, NumbersRoundTripExactly) {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23}) EXPECT_EQ(std::stod(detail::fmt_num(x)), x);
}
