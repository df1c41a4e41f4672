// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

// Brownian approximation of the aggregate buffer process: drift and variance
// parameters, the lower-regulator growth rate d*(ell_tot), the asymptotic
// interrupt-rate laws, and the statistical checks built on them.

#pragma once

#include "vstream/config.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vstream
{
    class Policy;

    class RegimeError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    struct BrownianParams
    {
        double epsilon = 0.0; ///< 1 - sum(lambda)/p
        double sigma2 = 0.0;  ///< 1/p - 1
        double load = 0.0;    ///< sum(lambda)/p
        Regime regime = Regime::HeavyTraffic;
        std::vector<double> share;     ///< p beta_n / sum(beta)
        std::vector<double> epsilon_n; ///< epsilon * share_n
        std::vector<double> sigma2_n;  ///< share_n^2 * sigma2
    };

    [[nodiscard]] BrownianParams network_params(const NetworkConfig &config);

    struct RateEstimate
    {
        double value = 0.0;
        double std_error = 0.0;
        std::string method; ///< "closed-form" or "monte-carlo"
        std::int64_t samples = 0;
    };

    enum class StepLaw
    {
        RandomWalk, ///< the exact per-slot increments of the aggregate process
        Gaussian,   ///< N(epsilon, sigma2) increments
    };

    struct McOptions
    {
        int paths = 50;
        std::int64_t horizon = 1'000'000;
        double burn_in = 0.1; ///< fraction of the horizon discarded
        std::uint64_t seed = 1;
        StepLaw law = StepLaw::RandomWalk;
        unsigned threads = 0; ///< 0 = hardware concurrency
    };

    /// Monte-Carlo estimate of d*(ell_tot): the long-run growth rate of the
    /// lower regulator when the aggregate walk (increments 1/p - (1 - epsilon)
    /// with probability p, -(1 - epsilon) otherwise) is reflected in
    /// [0, ell_tot / p]. Throws RegimeError for epsilon < 0.
    [[nodiscard]] RateEstimate estimate_d_star(std::int64_t ell_tot, double p, double epsilon, double sigma2,
                                               const McOptions &mc = {});

    /// Closed-form d* of a driftless reflected Brownian motion with the given
    /// variance and barrier ell_tot / p.
    [[nodiscard]] double driftless_d_star(std::int64_t ell_tot, double p, double sigma2);

    /// Leading-order heavy-traffic interrupt rate of one client.
    [[nodiscard]] double heavy_traffic_rate(double sigma_n2, double ell_n);

    struct LundbergRoot
    {
        double gamma = 0.0;
        double residual = 0.0; ///< exp(gamma eps + gamma^2 sigma^2 / 2) - 1
    };

    /// Non-zero root of E[exp(gamma X)] = 1 for X ~ N(epsilon_n, sigma_n2).
    [[nodiscard]] LundbergRoot lundberg_root(double epsilon_n, double sigma_n2);

    struct UnderloadedDecay
    {
        double factor = 1.0;    ///< exp(-2 eps_n ell_n / sigma_n2)
        double log_slope = 0.0; ///< d log(rate) / d ell_n
    };

    /// The ell-dependent factor of the under-loaded rate law; the
    /// multiplicative constant is not known and is never reported.
    [[nodiscard]] UnderloadedDecay underloaded_decay(double epsilon_n, double sigma_n2, double ell_n);

    struct FeasibilityVerdict
    {
        bool feasible = false;
        bool boundary = false; ///< demand equals the threshold up to rounding
        double demand = 0.0;   ///< sum(delta) / p
        double threshold = 0.0;
        double std_error = 0.0; ///< carried over from the d* estimate
    };

    [[nodiscard]] FeasibilityVerdict feasibility_check(std::int64_t ell_tot, std::span<const double> deltas, double p,
                                                       const RateEstimate &d_star);

    struct Prediction
    {
        Regime regime = Regime::HeavyTraffic;
        /// Heavy traffic: sum_n sigma_n^2 / (2 ell_n). Under-loaded: the bare
        /// factor sum_n exp(-2 eps_n ell_n / sigma_n^2), to be compared as a
        /// ratio. Over-loaded: NaN.
        double total = 0.0;
        std::vector<double> per_client;
    };

    [[nodiscard]] Prediction predict_rates(const NetworkConfig &config);

    struct LineFit
    {
        double slope = 0.0;
        double intercept = 0.0;
        double r2 = 0.0;
    };

    /// Ordinary least squares; needs at least two distinct x values.
    [[nodiscard]] LineFit fit_line(std::span<const double> x, std::span<const double> y);

    struct OrderCheckpoint
    {
        std::int64_t slot = 0;
        std::vector<double> aggregate;  ///< reflected-aggregate D(t), one per trial
        std::vector<double> scaled_sum; ///< sum_n D_n(t) / p, one per trial
        double max_cdf_excess = 0.0;    ///< max over deciles of F_sum - F_aggregate
        double tolerance = 0.0;
        bool holds = true;
    };

    struct OrderReport
    {
        std::vector<OrderCheckpoint> checkpoints;
        std::int64_t path_violations = 0; ///< slots with D(t) > sum D_n(t) / p
        std::int64_t slots_checked = 0;
        [[nodiscard]] bool holds() const noexcept;
    };

    /// Runs `trials` episodes of `config` under `policy_name` and compares
    /// the empirical distribution of the reflected aggregate D(t) with that
    /// of sum_n D_n(t) / p at every checkpoint. D(t) <=_st sum D_n(t)/p
    /// means F_aggregate(x) >= F_sum(x) everywhere; at each decile of the
    /// pooled sample the one-sided excess of F_sum over F_aggregate must stay
    /// below the two-sample Kolmogorov-Smirnov bound at level `alpha`.
    [[nodiscard]] OrderReport stochastic_order_check(const std::string &policy_name, const NetworkConfig &config,
                                                     std::span<const std::int64_t> checkpoints, int trials,
                                                     double alpha = 0.01, unsigned threads = 0);

} // namespace vstream
