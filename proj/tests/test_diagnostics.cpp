#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gmrf/diagnostics.hpp"
#include "gmrf/rng.hpp"

using namespace gmrf;

namespace {

std::vector<double> ar1(double phi, std::size_t n, std::uint64_t seed) {
    RngStream s(seed, 0);
    std::vector<double> x(n);
    double v = s.normal() / std::sqrt(1.0 - phi * phi);
    for (auto& xi : x) {
        v = phi * v + s.normal();
        xi = v;
    }
    return x;
}

}  // namespace

TEST(Acf, LagZeroAndAlternatingSequence) {
    std::vector<double> alt(200);
    for (std::size_t t = 0; t < alt.size(); ++t) alt[t] = (t % 2 == 0) ? 1.0 : -1.0;
    const auto r = acf(alt, 3);
    EXPECT_DOUBLE_EQ(r[0], 1.0);
    EXPECT_NEAR(r[1], -199.0 / 200.0, 1e-12);
    EXPECT_NEAR(r[2], 198.0 / 200.0, 1e-12);
    EXPECT_THROW(acf(alt, 200), std::invalid_argument);
}

TEST(Iat, ConstantChainIsUndefined) {
    const std::vector<double> flat(1000, 3.0);
    EXPECT_THROW(iat(flat), UndefinedVariance);
    EXPECT_THROW(ess(flat), UndefinedVariance);
}

TEST(Iat, ShortChainRejected) {
    EXPECT_THROW(iat(std::vector<double>(kIatMinLength - 1, 0.0)), std::invalid_argument);
}

TEST(Iat, IndependentDrawsNearOne) {
    const auto x = ar1(0.0, 100000, 1);
    EXPECT_NEAR(iat(x), 1.0, 0.1);
}

TEST(Iat, Ar1MatchesClosedForm) {
    for (double phi : {0.3, 0.5, 0.8}) {
        const auto x = ar1(phi, 200000, 7);
        const double truth = (1.0 + phi) / (1.0 - phi);
        EXPECT_NEAR(iat(x) / truth, 1.0, 0.1) << phi;
    }
}

TEST(Ess, FromIatAndBounds) {
    EXPECT_NEAR(ess_from_iat(5000, 2.04), 2450.98, 0.01);
    EXPECT_THROW(ess_from_iat(10, 0.0), std::invalid_argument);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto x = ar1(0.0, 500, seed);
        // Geyer's sequence can give IAT slightly below 1 for white noise, so
        // ESS is bounded by N only up to that truncation effect
        EXPECT_LE(ess(x), 1.2 * x.size());
        const auto y = ar1(0.6, 500, seed);
        EXPECT_LE(ess(y), static_cast<double>(y.size()));
    }
}

TEST(Ces, WorkedValues) {
    EXPECT_NEAR(ces(10.99, 2000, 30.42), 0.17, 0.005);
    EXPECT_NEAR(ces(49.63, 2000, 61.15), 1.52, 0.005);
    EXPECT_THROW(ces(0.0, 10, 1.0), std::invalid_argument);
    EXPECT_THROW(ces(1.0, 0, 1.0), std::invalid_argument);
}

TEST(EfficiencyReport, ConsistentFields) {
    const auto x = ar1(0.5, 20000, 3);
    const auto r = efficiency_report(x, 2.0);
    EXPECT_EQ(r.n_retained, x.size());
    EXPECT_DOUBLE_EQ(r.ess * r.iat, static_cast<double>(x.size()));
    EXPECT_DOUBLE_EQ(r.ces, r.iat * 2.0 / x.size());
}

TEST(McStandardError, MatchesAr1LongRunVariance) {
    const double phi = 0.5;
    const auto x = ar1(phi, 200000, 11);
    // long-run variance of AR(1) with unit innovations is 1 / (1 - phi)^2
    const double truth = std::sqrt(1.0 / ((1.0 - phi) * (1.0 - phi)) / x.size());
    EXPECT_NEAR(mc_standard_error(x) / truth, 1.0, 0.1);
}

TEST(GelmanRubin, IndependentChainsNearOne) {
    std::vector<std::vector<double>> chains;
    for (std::uint64_t k = 0; k < 4; ++k) chains.push_back(ar1(0.0, 5000, 100 + k));
    const double r = gelman_rubin(chains);
    EXPECT_GT(r, 0.99);
    EXPECT_LT(r, 1.05);
}

TEST(GelmanRubin, SeparatedChainsFlagged) {
    auto a = ar1(0.0, 1000, 1);
    auto b = ar1(0.0, 1000, 2);
    for (double& v : b) v += 100.0;
    const std::vector<std::vector<double>> chains{a, b};
    EXPECT_GT(gelman_rubin(chains), 1.2);
}

TEST(GelmanRubin, InputValidation) {
    const std::vector<std::vector<double>> one{ar1(0.0, 100, 1)};
    EXPECT_THROW(gelman_rubin(one), std::invalid_argument);
    const std::vector<std::vector<double>> ragged{ar1(0.0, 100, 1), ar1(0.0, 90, 2)};
    EXPECT_THROW(gelman_rubin(ragged), std::invalid_argument);
}
