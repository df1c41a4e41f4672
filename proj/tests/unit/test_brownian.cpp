// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "vstream/brownian.hpp"
#include "vstream/num.hpp"
#include "vstream/policies.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace vstream;

namespace
{
    NetworkConfig symmetric(double p, std::int64_t period, std::int64_t ell_tot, std::size_t n = 5)
    {
        NetworkConfig c;
        c.clients.assign(n, ClientConfig{period, 1, 1.0, 1.0});
        const auto ells = wld_allocate(ell_tot, std::vector<double>(n, 1.0));
        for (std::size_t i = 0; i < n; ++i)
        {
            c.clients[i].ell = ells[i];
        }
        c.ell_tot = ell_tot;
        c.p = p;
        return c;
    }

    NetworkConfig two_groups(double p)
    {
        NetworkConfig c;
        const std::vector<double> betas{0.125, 0.125, 0.25, 0.25, 0.25};
        const std::vector<std::int64_t> periods{5, 5, 15, 15, 15};
        const auto ells = wld_allocate(32, betas);
        for (std::size_t i = 0; i < 5; ++i)
        {
            c.clients.push_back(ClientConfig{periods[i], ells[i], betas[i], i < 2 ? 2.0 : 1.0});
        }
        c.ell_tot = 32;
        c.p = p;
        return c;
    }
} // namespace

TEST(NetworkParams, HeavyTrafficSymmetric)
{
    const auto bp = network_params(symmetric(0.5, 10, 40));
    EXPECT_EQ(bp.epsilon, 0.0);
    EXPECT_DOUBLE_EQ(bp.sigma2, 1.0);
    EXPECT_EQ(bp.regime, Regime::HeavyTraffic);
    for (std::size_t n = 0; n < 5; ++n)
    {
        EXPECT_DOUBLE_EQ(bp.share[n], 0.1);
        EXPECT_NEAR(bp.sigma2_n[n], 0.01, 1e-15);
        EXPECT_EQ(bp.epsilon_n[n], 0.0);
    }
}

TEST(NetworkParams, DeterministicFullLoad)
{
    const auto bp = network_params(symmetric(1.0, 1, 1, 1));
    EXPECT_EQ(bp.epsilon, 0.0);
    EXPECT_EQ(bp.sigma2, 0.0);
}

TEST(NetworkParams, UnderLoadedDrift)
{
    const auto bp = network_params(symmetric(0.52, 10, 20));
    EXPECT_NEAR(bp.epsilon, 1.0 - 0.5 / 0.52, 1e-15);
    EXPECT_NEAR(bp.epsilon, 0.038462, 1e-6);
    EXPECT_EQ(bp.regime, Regime::UnderLoaded);
}

TEST(NetworkParams, PerClientIdentities)
{
    for (double p : {0.6, 0.65, 0.9})
    {
        const auto cfg = two_groups(p);
        const auto bp = network_params(cfg);
        const double share_sum = std::accumulate(bp.share.begin(), bp.share.end(), 0.0);
        EXPECT_NEAR(share_sum, p, 1e-15);
        for (std::size_t n = 0; n < 5; ++n)
        {
            EXPECT_DOUBLE_EQ(bp.share[n], p * cfg.clients[n].beta);
            EXPECT_DOUBLE_EQ(bp.epsilon_n[n], bp.epsilon * bp.share[n]);
            EXPECT_DOUBLE_EQ(bp.sigma2_n[n], bp.share[n] * bp.share[n] * bp.sigma2);
        }
    }
}

TEST(HeavyTrafficRate, Formula)
{
    EXPECT_DOUBLE_EQ(heavy_traffic_rate(0.01, 4.0), 0.00125);
    EXPECT_DOUBLE_EQ(heavy_traffic_rate(0.01, 8.0), 0.000625);
    EXPECT_THROW((void)heavy_traffic_rate(0.01, 0.0), std::invalid_argument);
}

TEST(HeavyTrafficRate, SumMatchesDriftlessThreshold)
{
    for (double p : {0.5, 1.0 / 3.0, 5.0 / 7.0})
    {
        for (std::int64_t ell_tot : {20, 40, 80, 160})
        {
            const auto cfg = symmetric(p, p == 0.5 ? 10 : (p < 0.5 ? 15 : 7), ell_tot);
            const auto pred = predict_rates(cfg);
            const double sigma2 = 1.0 / p - 1.0;
            EXPECT_EQ(pred.regime, Regime::HeavyTraffic);
            EXPECT_NEAR(pred.total, p * p * sigma2 / (2.0 * static_cast<double>(ell_tot)), 1e-15);
            EXPECT_NEAR(pred.total, p * driftless_d_star(ell_tot, p, sigma2), 1e-15);
        }
    }
    EXPECT_NEAR(predict_rates(symmetric(0.5, 10, 40)).total, 0.125 / 40.0, 1e-15);
}

TEST(Lundberg, RootAndResidual)
{
    const auto r = lundberg_root(0.02, 0.01);
    EXPECT_DOUBLE_EQ(r.gamma, -4.0);
    EXPECT_LT(std::abs(r.residual), 1e-15);
    EXPECT_DOUBLE_EQ(lundberg_root(0.04, 0.01).gamma, 2.0 * r.gamma);
    EXPECT_THROW((void)lundberg_root(0.0, 0.01), RegimeError);
    EXPECT_THROW((void)lundberg_root(-0.1, 0.01), RegimeError);
}

TEST(UnderloadedDecay, FactorAndSlope)
{
    const auto d = underloaded_decay(0.02, 0.01, 3.0);
    EXPECT_DOUBLE_EQ(d.factor, std::exp(-12.0));
    EXPECT_DOUBLE_EQ(d.log_slope, -4.0);
    EXPECT_DOUBLE_EQ(underloaded_decay(0.02, 0.01, 0.0).factor, 1.0);
    EXPECT_NEAR(underloaded_decay(0.02, 0.01, 1e-9).factor, 1.0, 1e-8);
    EXPECT_THROW((void)underloaded_decay(0.0, 0.01, 1.0), RegimeError);
}

TEST(UnderloadedDecay, SharedExponentUnderProportionalAllocation)
{
    // ell_tot = 64 splits exactly as (8, 8, 16, 16, 16)
    auto cfg = two_groups(0.65);
    const std::vector<std::int64_t> ells{8, 8, 16, 16, 16};
    for (std::size_t n = 0; n < 5; ++n)
    {
        cfg.clients[n].ell = ells[n];
    }
    cfg.ell_tot = 64;
    const auto bp = network_params(cfg);
    const double shared = -2.0 * bp.epsilon * 64.0 / (cfg.p * bp.sigma2);
    for (std::size_t n = 0; n < 5; ++n)
    {
        const auto d = underloaded_decay(bp.epsilon_n[n], bp.sigma2_n[n], static_cast<double>(ells[n]));
        EXPECT_NEAR(std::log(d.factor), shared, 1e-9 * std::abs(shared));
    }
}

TEST(PredictRates, RegimeSpecificForms)
{
    const auto under = predict_rates(symmetric(0.52, 10, 20));
    EXPECT_EQ(under.regime, Regime::UnderLoaded);
    const auto bp = network_params(symmetric(0.52, 10, 20));
    EXPECT_NEAR(under.total, 5.0 * std::exp(-2.0 * bp.epsilon_n[0] * 4.0 / bp.sigma2_n[0]), 1e-15);
    const auto over = predict_rates(symmetric(0.4, 10, 20));
    EXPECT_EQ(over.regime, Regime::OverLoaded);
    EXPECT_TRUE(std::isnan(over.total));
}

TEST(DStar, DriftlessMatchesClosedForm)
{
    McOptions mc;
    mc.paths = 20;
    mc.horizon = 400'000;
    mc.seed = 4;
    const auto est = estimate_d_star(20, 0.5, 0.0, 1.0, mc);
    EXPECT_EQ(est.method, "monte-carlo");
    EXPECT_GT(est.std_error, 0.0);
    EXPECT_NEAR(est.value, 0.0125, 0.1 * 0.0125);
    EXPECT_DOUBLE_EQ(driftless_d_star(20, 0.5, 1.0), 0.0125);
}

TEST(DStar, GaussianStepsAgree)
{
    McOptions mc;
    mc.paths = 20;
    mc.horizon = 400'000;
    mc.law = StepLaw::Gaussian;
    const auto est = estimate_d_star(20, 0.5, 0.0, 1.0, mc);
    EXPECT_NEAR(est.value, 0.0125, 0.1 * 0.0125);
}

TEST(DStar, VanishesForLargeBudgetWhenUnderLoaded)
{
    McOptions mc;
    mc.paths = 4;
    mc.horizon = 200'000;
    const double eps = 1.0 - 0.5 / 0.52;
    const double small = estimate_d_star(5, 0.52, eps, 1.0 / 0.52 - 1.0, mc).value;
    const double large = estimate_d_star(60, 0.52, eps, 1.0 / 0.52 - 1.0, mc).value;
    EXPECT_GT(small, 0.0);
    EXPECT_LT(large, 1e-6);
}

TEST(DStar, RejectsBadInput)
{
    EXPECT_THROW((void)estimate_d_star(20, 0.5, -0.1, 1.0), RegimeError);
    EXPECT_THROW((void)estimate_d_star(0, 0.5, 0.0, 1.0), std::invalid_argument);
    McOptions mc;
    mc.paths = 0;
    EXPECT_THROW((void)estimate_d_star(20, 0.5, 0.0, 1.0, mc), std::invalid_argument);
}

TEST(DStar, ReproducibleAcrossThreadCounts)
{
    McOptions a;
    a.paths = 6;
    a.horizon = 20'000;
    a.threads = 1;
    McOptions b = a;
    b.threads = 3;
    EXPECT_EQ(estimate_d_star(10, 0.5, 0.0, 1.0, a).value, estimate_d_star(10, 0.5, 0.0, 1.0, b).value);
}

TEST(Feasibility, BoundaryAndExtremes)
{
    RateEstimate d;
    d.value = 0.0125;
    d.std_error = 1e-4;
    const std::vector<double> exact(5, 0.0125 * 0.5 / 5.0);
    const auto at = feasibility_check(20, exact, 0.5, d);
    EXPECT_TRUE(at.feasible);
    EXPECT_TRUE(at.boundary);
    EXPECT_EQ(at.std_error, 1e-4);
    EXPECT_FALSE(feasibility_check(20, std::vector<double>(5, 0.0), 0.5, d).feasible);
    EXPECT_TRUE(feasibility_check(20, std::vector<double>(5, 0.01), 0.5, d).feasible);
    EXPECT_FALSE(feasibility_check(20, std::vector<double>(5, 0.001), 0.5, d).feasible);
}

TEST(Feasibility, MaxMinTargetsSitOnTheBoundary)
{
    McOptions mc;
    mc.paths = 8;
    mc.horizon = 100'000;
    const auto d = estimate_d_star(20, 0.5, 0.0, 1.0, mc);
    const auto betas = maxmin_weights(5);
    std::vector<double> deltas;
    for (double b : betas)
    {
        deltas.push_back(d.value * 0.5 * b);
    }
    const auto v = feasibility_check(20, deltas, 0.5, d);
    EXPECT_TRUE(v.feasible);
    EXPECT_NEAR(v.demand, v.threshold, 1e-12 * v.threshold);
}

TEST(FitLine, RecoversExactLine)
{
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> y{1.5, -0.5, -2.5, -4.5};
    const auto f = fit_line(x, y);
    EXPECT_NEAR(f.slope, -2.0, 1e-12);
    EXPECT_NEAR(f.intercept, 3.5, 1e-12);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
    EXPECT_THROW((void)fit_line(std::vector<double>{1, 1}, std::vector<double>{0, 1}), std::invalid_argument);
}

TEST(StochasticOrder, DegeneratePerfectChannel)
{
    auto cfg = symmetric(1.0, 5, 10);
    const std::vector<std::int64_t> cps{100, 1000};
    const auto rep = stochastic_order_check("wld", cfg, cps, 5);
    EXPECT_TRUE(rep.holds());
    EXPECT_EQ(rep.path_violations, 0);
    for (const auto &cp : rep.checkpoints)
    {
        for (double v : cp.aggregate)
        {
            EXPECT_EQ(v, 0.0);
        }
        for (double v : cp.scaled_sum)
        {
            EXPECT_EQ(v, 0.0);
        }
    }
}

TEST(StochasticOrder, HoldsUnderWld)
{
    auto cfg = symmetric(0.5, 10, 20);
    cfg.seed = 17;
    const std::vector<std::int64_t> cps{10'000, 50'000};
    const auto rep = stochastic_order_check("wld", cfg, cps, 30);
    EXPECT_TRUE(rep.holds());
    EXPECT_EQ(rep.path_violations, 0);
    EXPECT_EQ(rep.slots_checked, 30 * 50'000);
    ASSERT_EQ(rep.checkpoints.size(), 2U);
    EXPECT_EQ(rep.checkpoints[0].aggregate.size(), 30U);
}
