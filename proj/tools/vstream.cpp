// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: simulate, sweep, dstar, weights, verify, presets.

#include "vstream/brownian.hpp"
#include "vstream/harness.hpp"
#include "vstream/num.hpp"
#include "vstream/policies.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace
{
    constexpr int kExitVerifyFailed = 1;
    constexpr int kExitConfig = 2;
    constexpr int kExitIo = 3;

    struct SpecFlags
    {
        std::string config;
        std::string preset;
        std::string out = "results";
        std::optional<std::uint64_t> seed;
        std::optional<int> trials;
        std::vector<std::string> policies;
        bool fast = false;
    };

    void add_spec_flags(CLI::App *cmd, SpecFlags &f, bool with_out)
    {
        auto *cfg = cmd->add_option("--config", f.config, "experiment file (JSON)")->check(CLI::ExistingFile);
        auto *pre = cmd->add_option("--preset", f.preset, "built-in experiment, see 'presets list'");
        cfg->excludes(pre);
        if (with_out)
        {
            cmd->add_option("--out", f.out, "output directory")->capture_default_str();
        }
        cmd->add_option("--seed", f.seed, "base seed override");
        cmd->add_option("--trials", f.trials, "trial count override")->check(CLI::PositiveNumber);
        cmd->add_option("--policy", f.policies, "restrict to these policies (repeatable)");
        cmd->add_flag("--fast", f.fast, "at most 10 trials and 1e5 slots");
    }

    vstream::ExperimentSpec resolve(const SpecFlags &f)
    {
        if (f.config.empty() && f.preset.empty())
        {
            throw vstream::ConfigError("give --config FILE or --preset NAME");
        }
        auto spec = f.config.empty() ? vstream::preset(f.preset) : vstream::load_spec(f.config);
        if (f.seed)
        {
            spec.base.seed = *f.seed;
        }
        if (f.trials)
        {
            spec.base.trials = *f.trials;
        }
        if (!f.policies.empty())
        {
            std::vector<std::string> kept;
            for (const auto &p : spec.policies)
            {
                if (std::find(f.policies.begin(), f.policies.end(), p) != f.policies.end())
                {
                    kept.push_back(p);
                }
            }
            for (const auto &p : f.policies)
            {
                if (!vstream::is_policy_name(p))
                {
                    throw vstream::ConfigError("unknown policy '" + p + "'");
                }
                if (std::find(spec.policies.begin(), spec.policies.end(), p) == spec.policies.end())
                {
                    kept.push_back(p);
                }
            }
            spec.policies = kept;
        }
        if (f.fast)
        {
            vstream::apply_fast_mode(spec);
        }
        spec.validate();
        return spec;
    }

    void print_table(const vstream::ExperimentResult &result)
    {
        std::cout << "policy  point  ell_tot  p         slot      total_rate    +-se        prediction    ratio\n";
        for (const auto &r : result.aggregates)
        {
            std::printf("%-7s %5zu  %7lld  %-8.5g  %-8lld  %-12.6g  %-10.3g  %-12.6g  %.4g\n", r.policy.c_str(),
                        r.point, static_cast<long long>(r.ell_tot), r.p, static_cast<long long>(r.slot),
                        r.total_rate, r.total_rate_se, r.prediction, r.ratio);
        }
        for (const auto &w : result.warnings)
        {
            std::cerr << "warning: " << w << '\n';
        }
    }

    int run_and_write(const vstream::ExperimentSpec &spec, const std::string &out)
    {
        const auto result = vstream::run_experiment(spec);
        print_table(result);
        vstream::write_outputs(out, spec, result);
        std::cout << "wrote " << out << '/' << spec.name << ".csv and " << spec.name << ".summary.json\n";
        return 0;
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Real-time video streaming scheduler simulator"};
    app.require_subcommand(1);

    SpecFlags sim_flags;
    std::size_t sim_point = 0;
    auto *simulate = app.add_subcommand("simulate", "run one configuration (one sweep point)");
    add_spec_flags(simulate, sim_flags, true);
    simulate->add_option("--point", sim_point, "sweep point index")->capture_default_str();

    SpecFlags sweep_flags;
    auto *sweep = app.add_subcommand("sweep", "run every sweep point of a spec");
    add_spec_flags(sweep, sweep_flags, true);

    std::int64_t ds_ell = 0;
    double ds_p = 0.5;
    std::optional<double> ds_eps;
    vstream::McOptions mc;
    bool ds_gaussian = false;
    std::vector<double> ds_deltas;
    auto *dstar = app.add_subcommand("dstar", "Monte-Carlo estimate of d*(ell_tot)");
    dstar->add_option("--ell-tot", ds_ell, "total latency budget")->required()->check(CLI::PositiveNumber);
    dstar->add_option("--p", ds_p, "channel reliability")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    dstar->add_option("--epsilon", ds_eps, "network drift (default 0, heavy traffic)");
    dstar->add_option("--paths", mc.paths, "independent paths")->capture_default_str();
    dstar->add_option("--horizon", mc.horizon, "slots per path")->capture_default_str();
    dstar->add_option("--seed", mc.seed, "seed")->capture_default_str();
    dstar->add_flag("--gaussian", ds_gaussian, "Gaussian increments instead of the exact walk");
    dstar->add_option("--delta", ds_deltas, "target per-client rates; prints the feasibility verdict");

    std::string w_kind = "maxmin";
    std::size_t w_clients = 0;
    std::vector<double> w_zetas;
    double w_kappa = 2.0;
    std::optional<std::int64_t> w_ell_tot;
    auto *weights = app.add_subcommand("weights", "optimal WLD weights for a QoE penalty");
    weights->add_option("--kind", w_kind, "maxmin or monomial")
        ->check(CLI::IsMember({"maxmin", "monomial"}))
        ->capture_default_str();
    weights->add_option("--clients", w_clients, "client count (maxmin)");
    weights->add_option("--zeta", w_zetas, "importance per client (monomial)");
    weights->add_option("--kappa", w_kappa, "monomial exponent, > 1")->capture_default_str();
    weights->add_option("--ell-tot", w_ell_tot, "also print the latency allocation");

    SpecFlags ver_flags;
    int ver_trials = 2;
    auto *verify = app.add_subcommand("verify", "run the invariant suites on a spec");
    add_spec_flags(verify, ver_flags, false);
    verify->add_option("--episodes", ver_trials, "episodes per (policy, point)")->capture_default_str();

    auto *presets = app.add_subcommand("presets", "list or emit built-in specs");
    presets->require_subcommand(1);
    presets->add_subcommand("list", "names of the built-in specs");
    std::string emit_name;
    auto *emit = presets->add_subcommand("emit", "print a built-in spec as JSON");
    emit->add_option("name", emit_name)->required();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (simulate->parsed())
        {
            auto spec = resolve(sim_flags);
            if (sim_point >= spec.points())
            {
                throw vstream::ConfigError("--point " + std::to_string(sim_point) + " out of range (spec has " +
                                           std::to_string(spec.points()) + " points)");
            }
            if (!spec.sweep.axis.empty())
            {
                spec.sweep.values = {spec.sweep.values[sim_point]};
            }
            return run_and_write(spec, sim_flags.out);
        }
        if (sweep->parsed())
        {
            return run_and_write(resolve(sweep_flags), sweep_flags.out);
        }
        if (dstar->parsed())
        {
            mc.law = ds_gaussian ? vstream::StepLaw::Gaussian : vstream::StepLaw::RandomWalk;
            const double sigma2 = 1.0 / ds_p - 1.0;
            const double eps = ds_eps.value_or(0.0);
            const auto est = vstream::estimate_d_star(ds_ell, ds_p, eps, sigma2, mc);
            std::printf("d*(%lld) = %.6g +- %.2g  (%s, %lld paths)\n", static_cast<long long>(ds_ell), est.value,
                        est.std_error, est.method.c_str(), static_cast<long long>(est.samples));
            if (std::abs(eps) < 1e-12)
            {
                std::printf("driftless closed form p sigma^2 / (2 ell_tot) = %.6g\n",
                            vstream::driftless_d_star(ds_ell, ds_p, sigma2));
            }
            if (!ds_deltas.empty())
            {
                const auto v = vstream::feasibility_check(ds_ell, ds_deltas, ds_p, est);
                std::printf("demand sum(delta)/p = %.6g, threshold %.6g: %s\n", v.demand, v.threshold,
                            v.boundary ? "on the boundary" : (v.feasible ? "feasible" : "infeasible"));
            }
            return 0;
        }
        if (weights->parsed())
        {
            vstream::PenaltySpec ps;
            std::size_t n = w_clients;
            if (w_kind == "monomial")
            {
                ps.kind = vstream::PenaltyKind::Monomial;
                ps.zetas = w_zetas;
                ps.kappa = w_kappa;
                n = w_zetas.size();
            }
            if (n == 0)
            {
                throw vstream::ConfigError(w_kind == "monomial" ? "give --zeta for every client"
                                                                : "give --clients N");
            }
            const auto betas = vstream::optimal_weights(ps, n);
            std::vector<std::int64_t> ells;
            if (w_ell_tot)
            {
                ells = vstream::wld_allocate(*w_ell_tot, betas);
            }
            for (std::size_t i = 0; i < n; ++i)
            {
                std::printf("client %zu  beta %.6g", i, betas[i]);
                if (!ells.empty())
                {
                    std::printf("  ell %lld", static_cast<long long>(ells[i]));
                }
                std::printf("\n");
            }
            return 0;
        }
        if (verify->parsed())
        {
            const auto spec = resolve(ver_flags);
            const auto report = vstream::verify(spec, ver_trials);
            vstream::print_report(std::cout, report);
            return report.passed() ? 0 : kExitVerifyFailed;
        }
        if (presets->got_subcommand("list"))
        {
            for (const auto &name : vstream::preset_names())
            {
                std::cout << name << '\n';
            }
            return 0;
        }
        if (emit->parsed())
        {
            std::cout << vstream::spec_to_json(vstream::preset(emit_name)) << '\n';
            return 0;
        }
    }
    catch (const vstream::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const vstream::RegimeError &e)
    {
        std::cerr << "regime error: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const vstream::AllocationError &e)
    {
        std::cerr << "allocation error: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return 0;
}
