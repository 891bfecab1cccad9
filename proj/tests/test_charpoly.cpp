#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ocft/charpoly.hpp"
#include "ocft/errors.hpp"

using namespace ocft;

namespace {

MomentQuery query(Complex z, RealVector g, std::size_t m = 1) {
    MomentQuery q;
    q.z = z;
    q.g = std::move(g);
    q.m = m;
    return q;
}

McConfig mc(std::size_t samples, std::uint64_t seed) { return {samples, {seed, 0}, default_workers(), 64}; }

}  // namespace

TEST(MomentClosed, SingleColourEnumeration) {
    // O(1) = {+1, -1}: (|z-g|^2 + |z+g|^2)/2 = |z|^2 + g^2
    EXPECT_DOUBLE_EQ(moment_m1_closed(query(2.0, {1.0})), 5.0);
    EXPECT_NEAR(moment_m1_closed(query({0.3, -1.1}, {0.7})), 0.09 + 1.21 + 0.49, 1e-14);
}

TEST(MomentClosed, TrivialPoints) {
    EXPECT_NEAR(moment_m1_closed(query({1.2, 0.5}, {0.0, 0.0, 0.0})), std::pow(1.69, 3), 1e-12);
    EXPECT_DOUBLE_EQ(moment_m1_closed(query(0.0, {1.0, 1.0})), 1.0);
}

TEST(MomentClosed, PhaseAndPermutationInvariance) {
    const Complex z{0.8, 0.4};
    const double a = moment_m1_closed(query(z, {0.3, 1.1, 2.0}));
    EXPECT_NEAR(a, moment_m1_closed(query(z * std::polar(1.0, 1.234), {0.3, 1.1, 2.0})), 1e-12);
    EXPECT_NEAR(a, moment_m1_closed(query(z, {2.0, 0.3, 1.1})), 1e-12);
}

TEST(MomentClosed, RejectsHigherMoments) {
    EXPECT_THROW(moment_m1_closed(query(1.0, {1.0}, 2)), ConfigError);
    EXPECT_THROW(moment_m1_closed(query(1.0, {})), DimensionError);
}

TEST(MomentMc, SingleColourValue) {
    const Estimate e = moment_mc(query(2.0, {1.0}), mc(100000, 1));
    EXPECT_LT(std::abs(e.mean.real() - 5.0), 3.0 * e.std_error);
}

TEST(MomentMc, ZeroCouplingIsDeterministic) {
    const Estimate e = moment_mc(query({0.6, 0.8}, {0.0, 0.0}, 2), mc(1000, 2));
    EXPECT_NEAR(e.mean.real(), 1.0, 1e-12);
    EXPECT_LT(e.std_error, 1e-12);
}

TEST(MomentMc, OrthogonalDeterminant) {
    const Estimate e = moment_mc(query(0.0, {1.0, 1.0}, 2), mc(1000, 3));
    EXPECT_NEAR(e.mean.real(), 1.0, 1e-12);
}

TEST(MomentMc, AgreesWithClosedForm) {
    const MomentQuery q = query({0.7, 0.2}, {0.4, 1.2, 0.9});
    const Estimate e = moment_mc(q, mc(200000, 4));
    EXPECT_LT(std::abs(e.mean.real() - moment_m1_closed(q)), 3.0 * e.std_error);
}

TEST(PfKernel, SkewAndPfaffianSquared) {
    ComplexMatrix z(4, 4);
    z(0, 1) = {0.3, 0.2};
    z(0, 2) = {-0.5, 1.0};
    z(0, 3) = 0.7;
    z(1, 2) = {0.1, -0.4};
    z(1, 3) = {2.0, 0.5};
    z(2, 3) = {-1.0, 0.3};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < i; ++j) z(i, j) = -z(j, i);
    const ComplexMatrix k = build_pf_kernel(z, 1.3, {0.4, -0.9}, 2);
    ASSERT_EQ(k.rows(), 8u);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(k(i, j) + k(j, i), Complex{});
    const Complex pf = pfaffian(k), det = determinant(k);
    EXPECT_LT(std::abs(pf * pf - det), 1e-10 * std::abs(det));
}

TEST(PfKernel, SingleFlavourPairClosedForm) {
    // pf = -(g^2 |a|^2 + |z|^2)
    const Complex a{0.6, -0.8}, zz{1.1, 0.4};
    ComplexMatrix zm(2, 2);
    zm(0, 1) = a;
    zm(1, 0) = -a;
    for (double g : {0.0, 0.5, 2.0}) {
        const Complex pf = pfaffian(build_pf_kernel(zm, g, zz, 1));
        EXPECT_NEAR(std::abs(pf + g * g * std::norm(a) + std::norm(zz)), 0.0, 1e-13);
    }
}

TEST(PfKernel, ShapeErrors) {
    EXPECT_THROW(build_pf_kernel(ComplexMatrix(3, 3), 1.0, 1.0, 1), ShapeError);
    EXPECT_THROW(build_pf_kernel(ComplexMatrix(2, 2, {0, 1, 1, 0}), 1.0, 1.0, 1), ShapeError);
}

TEST(PfaffianIntegral, SinglePairMatchesClosedForm) {
    for (const auto& g : {RealVector{0.8}, RealVector{0.3, 1.7}, RealVector{0.5, 1.0, 1.5, 2.0},
                          RealVector{0.1, 0.2, 0.3, 0.4, 0.5, 0.6}}) {
        const MomentQuery q = query({0.9, -0.3}, g);
        const double want = moment_m1_closed(q);
        EXPECT_NEAR(moment_pfaffian_integral(q).estimate.mean.real(), want, 1e-8 * want);
    }
}

TEST(PfaffianIntegral, ZeroCouplingCalibration) {
    const Complex z{0.6, 0.3};
    EXPECT_NEAR(moment_pfaffian_integral(query(z, {0.0, 0.0, 0.0})).estimate.mean.real(),
                std::pow(std::norm(z), 3), 1e-12);
    PfaffianIntegralOptions opt;
    opt.mc = mc(20000, 5);
    const auto r = moment_pfaffian_integral(query(z, {0.0, 0.0}, 2), opt);
    EXPECT_NEAR(r.estimate.mean.real(), std::pow(std::norm(z), 4), 1e-12);
}

TEST(PfaffianIntegral, TwoPairsAgainstExactValue) {
    // N = 2, G = I, z = 1, m = 2: SO(2) gives 16 E(1 - cos t)^4 = 70 and
    // reflections give 0, so the O(2) average is 35.
    PfaffianIntegralOptions opt;
    opt.mc = mc(300000, 6);
    const auto r = moment_pfaffian_integral(query(1.0, {1.0, 1.0}, 2), opt);
    EXPECT_LT(std::abs(r.estimate.mean.real() - 35.0), 4.0 * r.estimate.std_error);
    EXPECT_GT(r.effective_samples, 0.1 * 300000);
    const Estimate m = moment_mc(query(1.0, {1.0, 1.0}, 2), mc(300000, 7));
    EXPECT_LT(std::abs(m.mean.real() - 35.0), 4.0 * m.std_error);
}

TEST(PfaffianIntegral, Limits) {
    EXPECT_THROW(moment_pfaffian_integral(query(1.0, {1.0}, 3)), ConfigError);
    PfaffianIntegralOptions opt;
    opt.mc = mc(2000, 1);
    opt.min_ess_fraction = 0.99;
    EXPECT_THROW(moment_pfaffian_integral(query(1.0, {1.0}, 2), opt), ConfigError);
}
