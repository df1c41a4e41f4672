// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "vstream/brownian.hpp"

#include "vstream/engine.hpp"
#include "vstream/invariants.hpp"
#include "vstream/parallel.hpp"
#include "vstream/policies.hpp"
#include "vstream/reflection.hpp"
#include "vstream/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace vstream
{
    BrownianParams network_params(const NetworkConfig &config)
    {
        config.validate();
        BrownianParams bp;
        bp.load = config.load();
        bp.regime = config.regime();
        // heavy traffic is snapped to an exact zero drift so that p = 1/3
        // style configurations do not carry a 1e-17 residue
        bp.epsilon = bp.regime == Regime::HeavyTraffic ? 0.0 : 1.0 - bp.load;
        bp.sigma2 = 1.0 / config.p - 1.0;
        double beta_sum = 0.0;
        for (const auto &c : config.clients)
        {
            beta_sum += c.beta;
        }
        for (const auto &c : config.clients)
        {
            const double share = config.p * c.beta / beta_sum;
            bp.share.push_back(share);
            bp.epsilon_n.push_back(bp.epsilon * share);
            bp.sigma2_n.push_back(share * share * bp.sigma2);
        }
        return bp;
    }

    namespace
    {
        double path_rate(std::int64_t ell_tot, double p, double epsilon, double sigma2, const McOptions &mc,
                         std::uint64_t seed)
        {
            Rng rng(seed);
            TwoSidedReflector<double> reflector(static_cast<double>(ell_tot) / p);
            const auto burn = static_cast<std::int64_t>(std::floor(mc.burn_in * static_cast<double>(mc.horizon)));
            const double down = -(1.0 - epsilon);
            const double up = 1.0 / p + down;
            std::normal_distribution<double> gauss(epsilon, std::sqrt(sigma2));
            double z = 0.0;
            double at_burn = 0.0;
            for (std::int64_t t = 1; t <= mc.horizon; ++t)
            {
                if (mc.law == StepLaw::RandomWalk)
                {
                    z += bernoulli(rng, p) ? up : down;
                }
                else
                {
                    z += gauss(rng);
                }
                reflector.push(z);
                if (t == burn)
                {
                    at_burn = reflector.lower();
                }
            }
            return (reflector.lower() - at_burn) / static_cast<double>(mc.horizon - burn);
        }
    } // namespace

    RateEstimate estimate_d_star(std::int64_t ell_tot, double p, double epsilon, double sigma2, const McOptions &mc)
    {
        if (ell_tot < 1)
        {
            throw std::invalid_argument("ell_tot must be positive");
        }
        if (!(p > 0.0 && p <= 1.0))
        {
            throw std::invalid_argument("p must lie in (0, 1]");
        }
        if (epsilon < -kRegimeTolerance)
        {
            throw RegimeError("over-loaded network (epsilon < 0): the interrupt rate is set by the drift");
        }
        if (sigma2 < 0.0)
        {
            throw std::invalid_argument("variance must be non-negative");
        }
        if (mc.paths < 1 || mc.horizon < 1 || !(mc.burn_in >= 0.0 && mc.burn_in < 1.0))
        {
            throw std::invalid_argument("Monte-Carlo options need paths >= 1, horizon >= 1, burn_in in [0, 1)");
        }
        epsilon = std::max(epsilon, 0.0);

        std::vector<double> rates(static_cast<std::size_t>(mc.paths));
        parallel_for(rates.size(), mc.threads,
                     [&](std::size_t i)
                     {
                         rates[i] = path_rate(ell_tot, p, epsilon, sigma2, mc,
                                              derive_seed({mc.seed, hash_name("d-star"), static_cast<std::uint64_t>(i)}));
                     });

        RateEstimate est;
        est.method = "monte-carlo";
        est.samples = mc.paths;
        const double n = static_cast<double>(rates.size());
        est.value = std::accumulate(rates.begin(), rates.end(), 0.0) / n;
        if (rates.size() > 1)
        {
            double ss = 0.0;
            for (double r : rates)
            {
                ss += (r - est.value) * (r - est.value);
            }
            est.std_error = std::sqrt(ss / (n - 1.0) / n);
        }
        return est;
    }

    double driftless_d_star(std::int64_t ell_tot, double p, double sigma2)
    {
        if (ell_tot < 1 || !(p > 0.0))
        {
            throw std::invalid_argument("ell_tot and p must be positive");
        }
        return p * sigma2 / (2.0 * static_cast<double>(ell_tot));
    }

    double heavy_traffic_rate(double sigma_n2, double ell_n)
    {
        if (!(ell_n > 0.0) || sigma_n2 < 0.0)
        {
            throw std::invalid_argument("heavy-traffic rate needs ell_n > 0 and sigma_n2 >= 0");
        }
        return sigma_n2 / (2.0 * ell_n);
    }

    LundbergRoot lundberg_root(double epsilon_n, double sigma_n2)
    {
        if (!(epsilon_n > 0.0))
        {
            throw RegimeError("the Lundberg root exists only for a positive drift");
        }
        if (!(sigma_n2 > 0.0))
        {
            throw RegimeError("the Lundberg root needs a positive variance");
        }
        LundbergRoot r;
        r.gamma = -2.0 * epsilon_n / sigma_n2;
        r.residual = std::expm1(r.gamma * epsilon_n + 0.5 * r.gamma * r.gamma * sigma_n2);
        return r;
    }

    UnderloadedDecay underloaded_decay(double epsilon_n, double sigma_n2, double ell_n)
    {
        if (!(epsilon_n > 0.0) || !(sigma_n2 > 0.0))
        {
            throw RegimeError("the exponential law needs a positive drift and variance");
        }
        if (ell_n < 0.0)
        {
            throw std::invalid_argument("ell_n must be non-negative");
        }
        UnderloadedDecay d;
        d.log_slope = -2.0 * epsilon_n / sigma_n2;
        d.factor = std::exp(d.log_slope * ell_n);
        return d;
    }

    FeasibilityVerdict feasibility_check(std::int64_t ell_tot, std::span<const double> deltas, double p,
                                         const RateEstimate &d_star)
    {
        if (ell_tot < 1 || !(p > 0.0 && p <= 1.0))
        {
            throw std::invalid_argument("feasibility needs ell_tot >= 1 and p in (0, 1]");
        }
        FeasibilityVerdict v;
        for (double d : deltas)
        {
            if (d < 0.0 || !std::isfinite(d))
            {
                throw std::invalid_argument("interrupt-rate targets must be non-negative");
            }
            v.demand += d;
        }
        v.demand /= p;
        v.threshold = d_star.value;
        v.std_error = d_star.std_error;
        v.boundary = std::abs(v.demand - v.threshold) <= 1e-12 * std::max(1.0, std::abs(v.threshold));
        v.feasible = v.boundary || v.demand >= v.threshold;
        return v;
    }

    Prediction predict_rates(const NetworkConfig &config)
    {
        const BrownianParams bp = network_params(config);
        Prediction pr;
        pr.regime = bp.regime;
        for (std::size_t n = 0; n < config.size(); ++n)
        {
            const double ell = static_cast<double>(config.clients[n].ell);
            double r = std::numeric_limits<double>::quiet_NaN();
            if (bp.regime == Regime::HeavyTraffic)
            {
                r = heavy_traffic_rate(bp.sigma2_n[n], ell);
            }
            else if (bp.regime == Regime::UnderLoaded)
            {
                r = bp.sigma2_n[n] > 0.0 ? underloaded_decay(bp.epsilon_n[n], bp.sigma2_n[n], ell).factor : 0.0;
            }
            pr.per_client.push_back(r);
        }
        pr.total = std::accumulate(pr.per_client.begin(), pr.per_client.end(), 0.0);
        return pr;
    }

    LineFit fit_line(std::span<const double> x, std::span<const double> y)
    {
        if (x.size() != y.size() || x.size() < 2)
        {
            throw std::invalid_argument("fit_line needs two equally long samples of size >= 2");
        }
        const double n = static_cast<double>(x.size());
        const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
        const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
        double sxx = 0.0;
        double sxy = 0.0;
        double syy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            sxx += (x[i] - mx) * (x[i] - mx);
            sxy += (x[i] - mx) * (y[i] - my);
            syy += (y[i] - my) * (y[i] - my);
        }
        if (sxx == 0.0)
        {
            throw std::invalid_argument("fit_line needs at least two distinct x values");
        }
        LineFit f;
        f.slope = sxy / sxx;
        f.intercept = my - f.slope * mx;
        f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
        return f;
    }

    // --- stochastic ordering ---------------------------------------------------

    namespace
    {
        class OrderProbe final : public EpisodeObserver
        {
        public:
            OrderProbe(double p, std::int64_t ell_tot, std::span<const std::int64_t> checkpoints)
                : bound_(p, ell_tot), checkpoints_(checkpoints.begin(), checkpoints.end())
            {
            }

            void on_start(const EpisodeState &state) override { bound_.on_start(state); }

            void on_slot(const EpisodeState &state, const SlotRecord &record) override
            {
                bound_.on_slot(state, record);
                for (std::size_t k = 0; k < checkpoints_.size(); ++k)
                {
                    if (checkpoints_[k] == record.slot)
                    {
                        aggregate_[k] = bound_.aggregate_drops();
                        scaled_sum_[k] = bound_.scaled_drop_sum();
                    }
                }
            }

            AggregateBoundMonitor bound_;
            std::vector<std::int64_t> checkpoints_;
            std::vector<double> aggregate_ = std::vector<double>(checkpoints_.size(), 0.0);
            std::vector<double> scaled_sum_ = std::vector<double>(checkpoints_.size(), 0.0);
        };

        double ecdf(const std::vector<double> &sorted, double x)
        {
            const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
            return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
        }
    } // namespace

    bool OrderReport::holds() const noexcept
    {
        return path_violations == 0 &&
               std::all_of(checkpoints.begin(), checkpoints.end(), [](const OrderCheckpoint &c)
                           { return c.holds; });
    }

    OrderReport stochastic_order_check(const std::string &policy_name, const NetworkConfig &config,
                                       std::span<const std::int64_t> checkpoints, int trials, double alpha,
                                       unsigned threads)
    {
        config.validate();
        if (trials < 2)
        {
            throw std::invalid_argument("a distributional comparison needs at least two trials");
        }
        if (!(alpha > 0.0 && alpha < 1.0))
        {
            throw std::invalid_argument("significance level must lie in (0, 1)");
        }
        std::int64_t horizon = 0;
        for (std::int64_t c : checkpoints)
        {
            if (c < 1)
            {
                throw std::invalid_argument("checkpoints must be positive slots");
            }
            horizon = std::max(horizon, c);
        }
        (void)make_policy(policy_name); // reject unknown names before any episode runs

        const auto count = static_cast<std::size_t>(trials);
        std::vector<std::vector<double>> agg(count);
        std::vector<std::vector<double>> sum(count);
        std::vector<std::int64_t> violations(count, 0);
        std::vector<std::int64_t> checked(count, 0);
        parallel_for(count, threads,
                     [&](std::size_t i)
                     {
                         NetworkConfig cfg = config;
                         cfg.seed = derive_seed({config.seed, hash_name(policy_name), hash_name("order"),
                                                 static_cast<std::uint64_t>(i)});
                         auto policy = make_policy(policy_name);
                         OrderProbe probe(cfg.p, cfg.ell_tot, checkpoints);
                         RunOptions opts;
                         opts.record_trace = false;
                         opts.record_surplus = false;
                         opts.observer = &probe;
                         (void)run_episode(cfg, *policy, horizon, opts);
                         agg[i] = probe.aggregate_;
                         sum[i] = probe.scaled_sum_;
                         violations[i] = probe.bound_.result().violations;
                         checked[i] = probe.bound_.result().checked;
                     });

        OrderReport report;
        report.path_violations = std::accumulate(violations.begin(), violations.end(), std::int64_t{0});
        report.slots_checked = std::accumulate(checked.begin(), checked.end(), std::int64_t{0});
        const double n = static_cast<double>(count);
        const double tolerance = std::sqrt(std::log(1.0 / alpha) * (n + n) / (2.0 * n * n));
        for (std::size_t k = 0; k < checkpoints.size(); ++k)
        {
            OrderCheckpoint oc;
            oc.slot = checkpoints[k];
            oc.tolerance = tolerance;
            for (std::size_t i = 0; i < count; ++i)
            {
                oc.aggregate.push_back(agg[i][k]);
                oc.scaled_sum.push_back(sum[i][k]);
            }
            auto a = oc.aggregate;
            auto s = oc.scaled_sum;
            std::sort(a.begin(), a.end());
            std::sort(s.begin(), s.end());
            std::vector<double> pooled = a;
            pooled.insert(pooled.end(), s.begin(), s.end());
            std::sort(pooled.begin(), pooled.end());
            for (int d = 1; d <= 9; ++d)
            {
                const auto idx = static_cast<std::size_t>(std::floor(0.1 * d * static_cast<double>(pooled.size() - 1)));
                const double x = pooled[idx];
                oc.max_cdf_excess = std::max(oc.max_cdf_excess, ecdf(s, x) - ecdf(a, x));
            }
            oc.holds = oc.max_cdf_excess <= tolerance;
            report.checkpoints.push_back(std::move(oc));
        }
        return report;
    }

} // namespace vstream
