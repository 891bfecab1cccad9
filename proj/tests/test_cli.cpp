#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "cli.hpp"

using ocft::cli::run;
using json = nlohmann::json;

namespace {

json parse(const ocft::cli::Outcome& o) { return json::parse(o.out); }

}  // namespace

TEST(Cli, MomentClosedForm) {
    const auto o = run({"moment", "--n", "1", "--m", "1", "--z", "2,0", "--g", "1", "--method", "closed"});
    ASSERT_EQ(o.exit_code, 0) << o.err;
    const json j = parse(o);
    EXPECT_DOUBLE_EQ(j["value"].get<double>(), 5.0);
    EXPECT_EQ(j["method"], "closed");
    EXPECT_TRUE(j.contains("elapsed_ms"));
    EXPECT_EQ(j["inputs"]["seed"], 0);
}

TEST(Cli, MomentMonteCarloCarriesError) {
    const auto o = run({"moment", "--n", "2", "--z", "0.5,0.5", "--g", "1,2", "--method", "mc",
                        "--samples", "5000", "--seed", "3"});
    ASSERT_EQ(o.exit_code, 0) << o.err;
    const json j = parse(o);
    EXPECT_GT(j["std_error"].get<double>(), 0.0);
    EXPECT_EQ(j["samples"], 5000);
}

TEST(Cli, GinibreCheck) {
    const auto o = run({"ginibre-check", "--n", "1", "--lambda", "1", "--gamma", "1", "--samples", "200000",
                        "--seed", "0"});
    ASSERT_EQ(o.exit_code, 0) << o.err;
    const json j = parse(o);
    const double mean = j["mc"]["mean"]["re"].get<double>();
    const double se = j["mc"]["std_error"].get<double>();
    EXPECT_LT(std::abs(mean - 2.0), 3.0 * se);
    EXPECT_NEAR(j["pipeline"]["re"].get<double>(), 2.0, 1e-10);
}

TEST(Cli, VerifyTrivialFermionic) {
    const auto o = run({"verify-cft", "--variant", "fermionic", "--colors", "1", "--flavors", "1", "--samples",
                        "10000"});
    EXPECT_EQ(o.exit_code, 0) << o.err;
    const json j = parse(o);
    EXPECT_TRUE(j["pass"].get<bool>());
    EXPECT_EQ(j["rows"].size(), 2u);
    for (const auto& r : j["rows"]) {
        EXPECT_TRUE(r["lhs"].contains("std_error"));
        EXPECT_TRUE(r["rhs"].contains("samples"));
    }
}

TEST(Cli, ByteIdenticalWithoutTiming) {
    const std::vector<std::string> base{"verify-cft", "--variant", "fermionic", "--colors", "2", "--flavors",
                                        "2", "--samples", "20000", "--seed", "9", "--no-timing"};
    auto w1 = base, w3 = base;
    w1.insert(w1.end(), {"--workers", "1"});
    w3.insert(w3.end(), {"--workers", "3"});
    const auto a = run(w1), b = run(w3);
    ASSERT_EQ(a.exit_code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out.find("elapsed_ms"), std::string::npos);
}

TEST(Cli, Pfaffian) {
    const auto o = run({"pfaffian", "--upper", "1", "2", "3", "4", "5", "6"});
    ASSERT_EQ(o.exit_code, 0) << o.err;
    EXPECT_NEAR(parse(o)["pfaffian"]["re"].get<double>(), 8.0, 1e-12);
    const auto r = run({"pfaffian", "--dim", "6", "--seed", "4"});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_LT(parse(r)["pf2_minus_det_rel"].get<double>(), 1e-10);
    const auto n = run({"pfaffian", "--upper", "-1,0.5"});
    ASSERT_EQ(n.exit_code, 0) << n.err;
    EXPECT_NEAR(parse(n)["pfaffian"]["im"].get<double>(), 0.5, 1e-15);
}

TEST(Cli, JacobiMethodsAgree) {
    const auto a = run({"jacobi", "--n", "2", "--a", "1", "--b", "1", "--lambda", "0.5,0.2", "--gamma", "2",
                        "--method", "pfaffian"});
    const auto b = run({"jacobi", "--n", "2", "--a", "1", "--b", "1", "--lambda", "0.5,0.2", "--gamma", "2",
                        "--method", "quadrature"});
    ASSERT_EQ(a.exit_code, 0) << a.err;
    ASSERT_EQ(b.exit_code, 0) << b.err;
    EXPECT_NEAR(parse(a)["ratio"]["re"].get<double>(), parse(b)["ratio"]["re"].get<double>(), 1e-8);
    EXPECT_NEAR(parse(a)["ratio"]["im"].get<double>(), parse(b)["ratio"]["im"].get<double>(), 1e-8);
}

TEST(Cli, CsvProjection) {
    const auto o = run({"moment", "--n", "1", "--z", "2", "--g", "1", "--format", "csv", "--no-timing"});
    ASSERT_EQ(o.exit_code, 0) << o.err;
    EXPECT_EQ(o.out.substr(0, 8), "command,");
    const auto h = run({"haar-moment", "--n", "2", "--samples", "2000", "--format", "csv"});
    ASSERT_EQ(h.exit_code, 0) << h.err;
    EXPECT_EQ(h.out.substr(0, 33), "i,j,k,l,mean,std_error,expected,z");
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({"moment", "--bogus"}).exit_code, 2);
    EXPECT_EQ(run({}).exit_code, 2);
    EXPECT_EQ(run({"nosuch"}).exit_code, 2);
    EXPECT_EQ(run({"moment", "--n", "2", "--z", "1", "--g", "1", "--method", "closed"}).exit_code, 2);
    EXPECT_EQ(run({"moment", "--n", "1", "--z", "x,y", "--g", "1"}).exit_code, 2);
    EXPECT_EQ(run({"moment", "--n", "1", "--m", "2", "--z", "1", "--g", "1", "--method", "closed"}).exit_code, 2);
    EXPECT_EQ(run({"verify-cft", "--colors", "3", "--flavors", "3", "--samples", "10000"}).exit_code, 2);
    const auto bad = run({"verify-cft", "--colors", "1", "--flavors", "1", "--samples", "100"});
    EXPECT_EQ(bad.exit_code, 2);
    EXPECT_NE(bad.err.find("error"), std::string::npos);
}

TEST(Cli, VerificationFailureExitCode) {
    const auto o = run({"haar-moment", "--n", "2", "--samples", "5000", "--threshold", "0"});
    EXPECT_EQ(o.exit_code, 3);
    EXPECT_FALSE(parse(o)["pass"].get<bool>());
}

TEST(Cli, ParseComplex) {
    double re = 0, im = 0;
    EXPECT_TRUE(ocft::cli::parse_complex("1.5,-2", re, im));
    EXPECT_EQ(re, 1.5);
    EXPECT_EQ(im, -2.0);
    EXPECT_TRUE(ocft::cli::parse_complex("3", re, im));
    EXPECT_EQ(im, 0.0);
    EXPECT_FALSE(ocft::cli::parse_complex("3,", re, im));
    EXPECT_FALSE(ocft::cli::parse_complex("a", re, im));
}
