// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "vstream/harness.hpp"

#include "vstream/brownian.hpp"
#include "vstream/engine.hpp"
#include "vstream/parallel.hpp"
#include "vstream/policies.hpp"
#include "vstream/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace vstream
{
    using json = nlohmann::json;

    // --- spec ----------------------------------------------------------------

    std::vector<std::int64_t> ExperimentSpec::effective_checkpoints() const
    {
        std::vector<std::int64_t> cps = checkpoints.empty() ? std::vector<std::int64_t>{base.horizon} : checkpoints;
        std::sort(cps.begin(), cps.end());
        cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
        return cps;
    }

    NetworkConfig ExperimentSpec::config_at(std::size_t point) const
    {
        NetworkConfig cfg = base;
        if (!sweep.axis.empty())
        {
            const double v = sweep.values.at(point);
            if (sweep.axis == "ell_tot")
            {
                cfg.ell_tot = static_cast<std::int64_t>(std::llround(v));
            }
            else
            {
                cfg.p = v;
            }
        }
        if (penalty)
        {
            PenaltySpec ps = *penalty;
            ps.zetas.clear();
            for (const auto &c : cfg.clients)
            {
                ps.zetas.push_back(c.zeta);
            }
            const auto betas = optimal_weights(ps, cfg.size());
            for (std::size_t n = 0; n < cfg.size(); ++n)
            {
                cfg.clients[n].beta = betas[n];
            }
        }
        if (allocate_ell)
        {
            std::vector<double> betas;
            for (const auto &c : cfg.clients)
            {
                betas.push_back(c.beta);
            }
            try
            {
                const auto ells = wld_allocate(cfg.ell_tot, betas);
                for (std::size_t n = 0; n < cfg.size(); ++n)
                {
                    cfg.clients[n].ell = ells[n];
                }
            }
            catch (const AllocationError &e)
            {
                throw ConfigError(e.what());
            }
        }
        return cfg;
    }

    void ExperimentSpec::validate() const
    {
        if (policies.empty())
        {
            throw ConfigError("at least one policy is required");
        }
        for (const auto &p : policies)
        {
            if (!is_policy_name(p))
            {
                throw ConfigError("unknown policy '" + p + "' (expected wld, dbldf, edf, wrr or wrand)");
            }
        }
        if (!sweep.axis.empty())
        {
            if (sweep.axis != "ell_tot" && sweep.axis != "p")
            {
                throw ConfigError("sweep axis must be 'ell_tot' or 'p', got '" + sweep.axis + "'");
            }
            if (sweep.values.empty())
            {
                throw ConfigError("sweep needs at least one value");
            }
            for (double v : sweep.values)
            {
                if (sweep.axis == "ell_tot" && (v < 1.0 || v != std::floor(v)))
                {
                    throw ConfigError("ell_tot sweep values must be positive integers");
                }
                if (sweep.axis == "p" && !(v > 0.0 && v <= 1.0))
                {
                    throw ConfigError("p sweep values must lie in (0, 1]");
                }
            }
        }
        if (base.horizon < 1)
        {
            throw ConfigError("horizon must be at least one slot");
        }
        for (std::int64_t c : checkpoints)
        {
            if (c < 1 || c > base.horizon)
            {
                throw ConfigError("checkpoint " + std::to_string(c) + " lies outside [1, horizon=" +
                                  std::to_string(base.horizon) + "]");
            }
        }
        if (penalty && penalty->kind == PenaltyKind::Monomial && !(penalty->kappa > 1.0))
        {
            throw ConfigError("monomial penalty needs kappa > 1");
        }
        for (std::size_t k = 0; k < points(); ++k)
        {
            try
            {
                config_at(k).validate();
            }
            catch (const ConfigError &e)
            {
                if (sweep.axis.empty())
                {
                    throw;
                }
                throw ConfigError("sweep point " + std::to_string(k) + ": " + e.what());
            }
        }
    }

    namespace
    {
        [[noreturn]] void bad(const std::string &what) { throw ConfigError(what); }

        void reject_unknown(const json &obj, std::initializer_list<const char *> allowed, const std::string &where)
        {
            for (const auto &item : obj.items())
            {
                if (std::none_of(allowed.begin(), allowed.end(), [&](const char *a)
                                 { return item.key() == a; }))
                {
                    bad("unknown key '" + item.key() + "' in " + where);
                }
            }
        }

        std::int64_t get_int(const json &obj, const char *key, const std::string &where)
        {
            const auto &v = obj.at(key);
            if (v.is_number_integer())
            {
                return v.get<std::int64_t>();
            }
            if (v.is_number_float() && v.get<double>() == std::floor(v.get<double>()))
            {
                return static_cast<std::int64_t>(v.get<double>());
            }
            bad(where + ": '" + key + "' must be an integer");
        }

        double get_real(const json &obj, const char *key, const std::string &where)
        {
            const auto &v = obj.at(key);
            if (v.is_number())
            {
                return v.get<double>();
            }
            if (v.is_string())
            {
                // "a/b" keeps fractions such as 1/3 readable
                const auto s = v.get<std::string>();
                const auto slash = s.find('/');
                try
                {
                    if (slash == std::string::npos)
                    {
                        return std::stod(s);
                    }
                    return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
                }
                catch (const std::exception &)
                {
                }
            }
            bad(where + ": '" + key + "' must be a number or a fraction string");
        }
    } // namespace

    ExperimentSpec parse_spec(const std::string &text)
    {
        json j;
        try
        {
            j = json::parse(text);
        }
        catch (const json::parse_error &e)
        {
            bad(std::string("malformed config: ") + e.what());
        }
        if (!j.is_object())
        {
            bad("config must be a JSON object");
        }
        reject_unknown(j,
                       {"name", "clients", "p", "ell_tot", "horizon", "trials", "seed", "policies", "sweep",
                        "checkpoints", "penalty", "threads"},
                       "config");

        ExperimentSpec spec;
        if (j.contains("name"))
        {
            spec.name = j.at("name").get<std::string>();
        }
        if (!j.contains("clients") || !j.at("clients").is_array() || j.at("clients").empty())
        {
            bad("config needs a non-empty 'clients' array");
        }
        std::size_t with_ell = 0;
        bool with_beta = false;
        const auto &clients = j.at("clients");
        for (std::size_t n = 0; n < clients.size(); ++n)
        {
            const auto &c = clients[n];
            const std::string where = "client " + std::to_string(n + 1);
            if (!c.is_object())
            {
                bad(where + " must be an object");
            }
            reject_unknown(c, {"period", "ell", "beta", "zeta"}, where);
            if (!c.contains("period"))
            {
                bad(where + ": 'period' is required");
            }
            ClientConfig cc;
            cc.period = get_int(c, "period", where);
            if (c.contains("ell"))
            {
                cc.ell = get_int(c, "ell", where);
                ++with_ell;
            }
            if (c.contains("beta"))
            {
                cc.beta = get_real(c, "beta", where);
                with_beta = true;
            }
            if (c.contains("zeta"))
            {
                cc.zeta = get_real(c, "zeta", where);
            }
            spec.base.clients.push_back(cc);
        }
        if (with_ell != 0 && with_ell != clients.size())
        {
            bad("either every client gives 'ell' or none does (allocation from beta)");
        }
        if (with_ell != 0 && with_beta)
        {
            bad("explicit 'ell' and 'beta' are mutually exclusive; give one or the other");
        }
        spec.allocate_ell = with_ell == 0;

        try
        {
            spec.base.p = j.contains("p") ? get_real(j, "p", "config") : 1.0;
            spec.base.ell_tot = j.contains("ell_tot") ? get_int(j, "ell_tot", "config")
                                                      : total_ell(spec.base.clients);
            if (j.contains("horizon"))
            {
                spec.base.horizon = get_int(j, "horizon", "config");
            }
            else
            {
                spec.base.horizon = 300'000;
            }
            spec.base.trials = j.contains("trials") ? static_cast<int>(get_int(j, "trials", "config")) : 50;
            if (j.contains("seed"))
            {
                spec.base.seed = j.at("seed").get<std::uint64_t>();
            }
            if (j.contains("threads"))
            {
                spec.threads = j.at("threads").get<unsigned>();
            }
            if (j.contains("policies"))
            {
                spec.policies = j.at("policies").get<std::vector<std::string>>();
            }
            if (j.contains("checkpoints"))
            {
                spec.checkpoints = j.at("checkpoints").get<std::vector<std::int64_t>>();
            }
            if (j.contains("sweep"))
            {
                const auto &s = j.at("sweep");
                reject_unknown(s, {"axis", "values"}, "sweep");
                spec.sweep.axis = s.at("axis").get<std::string>();
                spec.sweep.values = s.at("values").get<std::vector<double>>();
            }
            if (j.contains("penalty"))
            {
                const auto &pj = j.at("penalty");
                reject_unknown(pj, {"kind", "kappa"}, "penalty");
                PenaltySpec ps;
                const auto kind = pj.at("kind").get<std::string>();
                if (kind == "maxmin")
                {
                    ps.kind = PenaltyKind::MaxMin;
                }
                else if (kind == "monomial")
                {
                    ps.kind = PenaltyKind::Monomial;
                    ps.kappa = pj.contains("kappa") ? get_real(pj, "kappa", "penalty") : 2.0;
                }
                else
                {
                    bad("penalty kind must be 'maxmin' or 'monomial'");
                }
                if (with_beta)
                {
                    bad("'penalty' derives beta; drop the explicit client betas");
                }
                spec.penalty = ps;
            }
        }
        catch (const json::exception &e)
        {
            bad(std::string("config field has the wrong type: ") + e.what());
        }
        spec.validate();
        return spec;
    }

    ExperimentSpec load_spec(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw ConfigError("cannot open config file " + path.string());
        }
        std::stringstream ss;
        ss << in.rdbuf();
        try
        {
            return parse_spec(ss.str());
        }
        catch (const ConfigError &e)
        {
            throw ConfigError(path.string() + ": " + e.what());
        }
    }

    std::string spec_to_json(const ExperimentSpec &spec)
    {
        json j;
        j["name"] = spec.name;
        json clients = json::array();
        for (const auto &c : spec.base.clients)
        {
            json cj;
            cj["period"] = c.period;
            if (!spec.allocate_ell)
            {
                cj["ell"] = c.ell;
            }
            else if (!spec.penalty)
            {
                cj["beta"] = c.beta;
            }
            cj["zeta"] = c.zeta;
            clients.push_back(cj);
        }
        j["clients"] = clients;
        j["p"] = spec.base.p;
        j["ell_tot"] = spec.base.ell_tot;
        j["horizon"] = spec.base.horizon;
        j["trials"] = spec.base.trials;
        j["seed"] = spec.base.seed;
        j["policies"] = spec.policies;
        if (!spec.sweep.axis.empty())
        {
            j["sweep"] = {{"axis", spec.sweep.axis}, {"values", spec.sweep.values}};
        }
        if (!spec.checkpoints.empty())
        {
            j["checkpoints"] = spec.checkpoints;
        }
        if (spec.penalty)
        {
            json pj;
            pj["kind"] = spec.penalty->kind == PenaltyKind::MaxMin ? "maxmin" : "monomial";
            if (spec.penalty->kind == PenaltyKind::Monomial)
            {
                pj["kappa"] = spec.penalty->kappa;
            }
            j["penalty"] = pj;
        }
        return j.dump(2);
    }

    // --- presets ---------------------------------------------------------------

    namespace
    {
        ExperimentSpec symmetric(const std::string &name, double p, std::int64_t period,
                                 std::vector<double> ell_tots)
        {
            ExperimentSpec s;
            s.name = name;
            s.base.p = p;
            s.base.clients.assign(5, ClientConfig{period, 1, 1.0, 1.0});
            s.base.ell_tot = static_cast<std::int64_t>(ell_tots.front());
            s.base.horizon = 300'000;
            s.base.trials = 50;
            s.base.seed = 20190101;
            s.allocate_ell = true;
            s.penalty = PenaltySpec{};
            s.sweep = {"ell_tot", std::move(ell_tots)};
            s.checkpoints = {100'000, 150'000, 300'000};
            return s;
        }

        ExperimentSpec two_groups(const std::string &name, double p)
        {
            ExperimentSpec s;
            s.name = name;
            s.base.p = p;
            s.base.clients = {
                {5, 1, 1.0, 2.0}, {5, 1, 1.0, 2.0}, {15, 1, 1.0, 1.0}, {15, 1, 1.0, 1.0}, {15, 1, 1.0, 1.0},
            };
            s.base.ell_tot = 32;
            s.base.horizon = 300'000;
            s.base.trials = 50;
            s.base.seed = 20190102;
            s.allocate_ell = true;
            s.penalty = PenaltySpec{PenaltyKind::Monomial, {}, 2.0};
            s.policies = {"wld", "dbldf", "edf", "wrr", "wrand"};
            s.checkpoints = {150'000, 300'000};
            return s;
        }
    } // namespace

    std::vector<std::string> preset_names()
    {
        return {"fig3a", "fig3b", "fig3c", "fig3de_p052", "fig3de_p03467", "fig3de_p07428", "table1", "table2",
                "smoke"};
    }

    ExperimentSpec preset(const std::string &name)
    {
        const std::vector<double> heavy{20, 40, 80, 160};
        const std::vector<double> under{10, 15, 20, 25, 30};
        if (name == "fig3a")
        {
            return symmetric(name, 0.5, 10, heavy);
        }
        if (name == "fig3b")
        {
            return symmetric(name, 1.0 / 3.0, 15, heavy);
        }
        if (name == "fig3c")
        {
            return symmetric(name, 5.0 / 7.0, 7, heavy);
        }
        if (name == "fig3de_p052")
        {
            return symmetric(name, 0.52, 10, under);
        }
        if (name == "fig3de_p03467")
        {
            return symmetric(name, 0.3467, 15, under);
        }
        if (name == "fig3de_p07428")
        {
            return symmetric(name, 0.7428, 7, under);
        }
        if (name == "table1")
        {
            return two_groups(name, 0.6);
        }
        if (name == "table2")
        {
            return two_groups(name, 0.65);
        }
        if (name == "smoke")
        {
            ExperimentSpec s;
            s.name = name;
            s.base.clients = {ClientConfig{2, 2, 1.0, 1.0}};
            s.base.p = 0.5;
            s.base.ell_tot = 2;
            s.base.horizon = 10;
            s.base.trials = 1;
            return s;
        }
        throw ConfigError("unknown preset '" + name + "'");
    }

    void apply_fast_mode(ExperimentSpec &spec)
    {
        spec.base.trials = std::min(spec.base.trials, 10);
        const std::int64_t old_h = spec.base.horizon;
        const std::int64_t new_h = std::min<std::int64_t>(old_h, 100'000);
        if (new_h == old_h)
        {
            return;
        }
        spec.base.horizon = new_h;
        for (auto &c : spec.checkpoints)
        {
            c = std::max<std::int64_t>(1, c * new_h / old_h);
        }
    }

    // --- running ----------------------------------------------------------------

    namespace
    {
        struct TrialOutput
        {
            std::vector<std::vector<ClientState>> snapshots;
        };

        MetricsRow make_row(const ExperimentSpec &spec, const NetworkConfig &cfg, const std::string &policy,
                            std::size_t point, int trial, std::int64_t slot, const std::vector<ClientState> &at,
                            const std::vector<ClientState> *previous, std::int64_t previous_slot,
                            const Prediction &pred)
        {
            MetricsRow r;
            r.experiment = spec.name;
            r.policy = policy;
            r.point = point;
            r.p = cfg.p;
            r.ell_tot = cfg.ell_tot;
            r.regime = to_string(pred.regime);
            r.trial = trial;
            r.slot = slot;
            std::int64_t total = 0;
            std::int64_t before = 0;
            std::vector<double> zetas;
            for (std::size_t n = 0; n < at.size(); ++n)
            {
                const auto &c = at[n];
                r.drops.push_back(static_cast<double>(c.drops));
                r.dummies.push_back(static_cast<double>(c.dummies));
                r.delivered.push_back(static_cast<double>(c.delivered));
                r.played.push_back(static_cast<double>(c.played));
                r.rates.push_back(static_cast<double>(c.drops) / static_cast<double>(slot));
                total += c.drops;
                if (previous != nullptr)
                {
                    before += (*previous)[n].drops;
                }
                zetas.push_back(cfg.clients[n].zeta);
            }
            r.total_rate = static_cast<double>(total) / static_cast<double>(slot);
            r.window_rate = static_cast<double>(total - before) / static_cast<double>(slot - previous_slot);
            const auto q = qoe_penalty(std::span<const double>(r.drops), zetas, static_cast<double>(slot));
            r.qoe_cumulative = q.cumulative;
            r.qoe_rate = q.rate;
            r.qoe_of_mean = q.cumulative;
            r.prediction = pred.total;
            r.ratio = r.total_rate / pred.total;
            r.window_ratio = r.window_rate / pred.total;
            return r;
        }

        void add_into(std::vector<double> &acc, const std::vector<double> &v)
        {
            if (acc.empty())
            {
                acc.assign(v.size(), 0.0);
            }
            for (std::size_t i = 0; i < v.size(); ++i)
            {
                acc[i] += v[i];
            }
        }

        void scale(std::vector<double> &v, double s)
        {
            for (double &x : v)
            {
                x *= s;
            }
        }

        double std_error(const std::vector<double> &xs, double mean)
        {
            if (xs.size() < 2)
            {
                return 0.0;
            }
            double ss = 0.0;
            for (double x : xs)
            {
                ss += (x - mean) * (x - mean);
            }
            const double n = static_cast<double>(xs.size());
            return std::sqrt(ss / (n - 1.0) / n);
        }
    } // namespace

    const MetricsRow &ExperimentResult::aggregate(const std::string &policy, std::size_t point,
                                                  std::int64_t slot) const
    {
        for (const auto &r : aggregates)
        {
            if (r.policy == policy && r.point == point && r.slot == slot)
            {
                return r;
            }
        }
        throw std::out_of_range("no aggregate row for policy " + policy + " point " + std::to_string(point) +
                                " slot " + std::to_string(slot));
    }

    ExperimentResult run_experiment(const ExperimentSpec &spec)
    {
        spec.validate();
        const auto checkpoints = spec.effective_checkpoints();
        const std::size_t points = spec.points();
        const auto trials = static_cast<std::size_t>(spec.base.trials);
        const std::size_t per_policy = points * trials;
        const std::size_t jobs = spec.policies.size() * per_policy;

        std::vector<NetworkConfig> configs;
        std::vector<Prediction> predictions;
        ExperimentResult result;
        result.name = spec.name;
        result.clients = spec.base.size();
        for (std::size_t k = 0; k < points; ++k)
        {
            configs.push_back(spec.config_at(k));
            predictions.push_back(predict_rates(configs.back()));
            if (configs.back().regime() == Regime::OverLoaded)
            {
                std::ostringstream os;
                os << "point " << k << " (p=" << configs.back().p << ", ell_tot=" << configs.back().ell_tot
                   << ") is over-loaded: load " << configs.back().load() << " > 1";
                result.warnings.push_back(os.str());
            }
        }

        std::vector<TrialOutput> outputs(jobs);
        parallel_for(jobs, spec.threads,
                     [&](std::size_t job)
                     {
                         const std::size_t pi = job / per_policy;
                         const std::size_t point = (job % per_policy) / trials;
                         const std::size_t trial = job % trials;
                         NetworkConfig cfg = configs[point];
                         cfg.seed = derive_seed({spec.base.seed, hash_name(spec.policies[pi]),
                                                 static_cast<std::uint64_t>(point), static_cast<std::uint64_t>(trial)});
                         auto policy = make_policy(spec.policies[pi]);
                         CheckpointRecorder recorder(checkpoints);
                         RunOptions opts;
                         opts.record_trace = false;
                         opts.record_surplus = false;
                         opts.observer = &recorder;
                         (void)run_episode(cfg, *policy, cfg.horizon, opts);
                         outputs[job].snapshots = recorder.snapshots();
                     });

        for (std::size_t job = 0; job < jobs; ++job)
        {
            const std::size_t pi = job / per_policy;
            const std::size_t point = (job % per_policy) / trials;
            const std::size_t trial = job % trials;
            const auto &snaps = outputs[job].snapshots;
            for (std::size_t k = 0; k < checkpoints.size(); ++k)
            {
                result.trials.push_back(make_row(spec, configs[point], spec.policies[pi], point,
                                                 static_cast<int>(trial), checkpoints[k], snaps[k],
                                                 k == 0 ? nullptr : &snaps[k - 1], k == 0 ? 0 : checkpoints[k - 1],
                                                 predictions[point]));
            }
        }

        // trial rows of one (policy, point) are contiguous: trial-major, checkpoint-minor
        const std::size_t cps = checkpoints.size();
        for (std::size_t pi = 0; pi < spec.policies.size(); ++pi)
        {
            for (std::size_t point = 0; point < points; ++point)
            {
                const std::size_t first = (pi * points + point) * trials * cps;
                for (std::size_t k = 0; k < cps; ++k)
                {
                    MetricsRow agg;
                    std::vector<double> totals;
                    std::vector<double> windows;
                    for (std::size_t trial = 0; trial < trials; ++trial)
                    {
                        const auto &r = result.trials[first + trial * cps + k];
                        if (trial == 0)
                        {
                            agg = r;
                            agg.trial = -1;
                            agg.aggregate = true;
                            agg.drops.clear();
                            agg.dummies.clear();
                            agg.delivered.clear();
                            agg.played.clear();
                            agg.rates.clear();
                            agg.total_rate = agg.window_rate = agg.qoe_cumulative = agg.qoe_rate = 0.0;
                        }
                        add_into(agg.drops, r.drops);
                        add_into(agg.dummies, r.dummies);
                        add_into(agg.delivered, r.delivered);
                        add_into(agg.played, r.played);
                        add_into(agg.rates, r.rates);
                        agg.total_rate += r.total_rate;
                        agg.window_rate += r.window_rate;
                        agg.qoe_cumulative += r.qoe_cumulative;
                        agg.qoe_rate += r.qoe_rate;
                        totals.push_back(r.total_rate);
                        windows.push_back(r.window_rate);
                    }
                    const double inv = 1.0 / static_cast<double>(trials);
                    scale(agg.drops, inv);
                    scale(agg.dummies, inv);
                    scale(agg.delivered, inv);
                    scale(agg.played, inv);
                    scale(agg.rates, inv);
                    agg.total_rate *= inv;
                    agg.window_rate *= inv;
                    agg.qoe_cumulative *= inv;
                    agg.qoe_rate *= inv;
                    agg.total_rate_se = std_error(totals, agg.total_rate);
                    agg.window_rate_se = std_error(windows, agg.window_rate);
                    std::vector<double> zetas;
                    for (const auto &c : configs[point].clients)
                    {
                        zetas.push_back(c.zeta);
                    }
                    agg.qoe_of_mean =
                        qoe_penalty(std::span<const double>(agg.drops), zetas, static_cast<double>(agg.slot)).cumulative;
                    agg.ratio = agg.total_rate / agg.prediction;
                    agg.window_ratio = agg.window_rate / agg.prediction;
                    result.aggregates.push_back(std::move(agg));
                }
            }
        }
        return result;
    }

    // --- output ----------------------------------------------------------------

    namespace
    {
        std::string num(double v)
        {
            char buf[64];
            const auto res = std::to_chars(buf, buf + sizeof buf, v);
            return std::string(buf, res.ptr);
        }

        std::string csv_field(const std::string &s)
        {
            if (s.find_first_of(",\"\n") == std::string::npos)
            {
                return s;
            }
            std::string out = "\"";
            for (char c : s)
            {
                if (c == '"')
                {
                    out += '"';
                }
                out += c;
            }
            return out + "\"";
        }

        void write_row(std::ostream &out, const MetricsRow &r)
        {
            out << csv_field(r.experiment) << ',' << csv_field(r.policy) << ',' << r.point << ',' << num(r.p) << ','
                << r.ell_tot << ',' << r.regime << ',' << (r.aggregate ? "mean" : "trial") << ',' << r.trial << ','
                << r.slot;
            for (const auto *v : {&r.drops, &r.dummies, &r.delivered, &r.played, &r.rates})
            {
                for (double x : *v)
                {
                    out << ',' << num(x);
                }
            }
            for (double x : {r.total_rate, r.total_rate_se, r.window_rate, r.window_rate_se, r.qoe_cumulative,
                             r.qoe_rate, r.qoe_of_mean, r.prediction, r.ratio, r.window_ratio})
            {
                out << ',' << num(x);
            }
            out << '\n';
        }
    } // namespace

    void write_csv(std::ostream &out, const ExperimentResult &result, bool include_trials)
    {
        out << "experiment,policy,point,p,ell_tot,regime,kind,trial,slot";
        for (const char *prefix : {"D_", "U_", "A_", "S_", "rate_"})
        {
            for (std::size_t n = 1; n <= result.clients; ++n)
            {
                out << ',' << prefix << n;
            }
        }
        out << ",total_rate,total_rate_se,window_rate,window_rate_se,qoe_cumulative,qoe_rate,qoe_of_mean,"
               "prediction,ratio,window_ratio\n";
        if (include_trials)
        {
            for (const auto &r : result.trials)
            {
                write_row(out, r);
            }
        }
        for (const auto &r : result.aggregates)
        {
            write_row(out, r);
        }
    }

    std::string summary_json(const ExperimentSpec &spec, const ExperimentResult &result)
    {
        json j;
        j["name"] = result.name;
        j["spec"] = json::parse(spec_to_json(spec));
        j["warnings"] = result.warnings;
        json rows = json::array();
        for (const auto &r : result.aggregates)
        {
            json rj;
            rj["policy"] = r.policy;
            rj["point"] = r.point;
            rj["p"] = r.p;
            rj["ell_tot"] = r.ell_tot;
            rj["regime"] = r.regime;
            rj["slot"] = r.slot;
            rj["drops"] = r.drops;
            rj["dummies"] = r.dummies;
            rj["total_rate"] = r.total_rate;
            rj["total_rate_se"] = r.total_rate_se;
            rj["window_rate"] = r.window_rate;
            rj["window_rate_se"] = r.window_rate_se;
            rj["qoe_cumulative"] = r.qoe_cumulative;
            rj["qoe_rate"] = r.qoe_rate;
            rj["qoe_of_mean"] = r.qoe_of_mean;
            rj["prediction"] = r.prediction; // NaN is written as null
            rj["ratio"] = r.ratio;
            rj["window_ratio"] = r.window_ratio;
            rows.push_back(rj);
        }
        j["aggregates"] = rows;
        return j.dump(2);
    }

    void write_outputs(const std::filesystem::path &dir, const ExperimentSpec &spec, const ExperimentResult &result)
    {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
        {
            throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
        }
        const auto csv_path = dir / (spec.name + ".csv");
        const auto json_path = dir / (spec.name + ".summary.json");
        {
            std::ofstream out(csv_path);
            if (!out)
            {
                throw std::runtime_error("cannot open " + csv_path.string() + " for writing");
            }
            write_csv(out, result);
            if (!out)
            {
                throw std::runtime_error("write to " + csv_path.string() + " failed");
            }
        }
        std::ofstream out(json_path);
        if (!out)
        {
            throw std::runtime_error("cannot open " + json_path.string() + " for writing");
        }
        out << summary_json(spec, result) << '\n';
        if (!out)
        {
            throw std::runtime_error("write to " + json_path.string() + " failed");
        }
    }

    // --- verify ----------------------------------------------------------------

    bool VerifyReport::passed() const noexcept
    {
        return std::all_of(entries.begin(), entries.end(), [](const VerifyEntry &e)
                           { return e.check.passed; });
    }

    namespace
    {
        void merge(CheckResult &into, const CheckResult &from, std::size_t trial)
        {
            if (into.name.empty())
            {
                into.name = from.name;
            }
            into.checked += from.checked;
            if (!from.passed)
            {
                if (into.passed)
                {
                    into.first_slot = from.first_slot;
                    into.detail = "trial " + std::to_string(trial) + ", " + from.detail;
                }
                into.passed = false;
                into.violations += from.violations;
            }
        }

        struct VerifyTrial
        {
            std::vector<CheckResult> checks;
            CheckResult bound;
            double w_first = 0.0;
            double w_second = 0.0;
            bool deterministic = true;
        };
    } // namespace

    VerifyReport verify(const ExperimentSpec &spec, int trials)
    {
        spec.validate();
        if (trials < 1)
        {
            throw ConfigError("verify needs at least one trial");
        }
        VerifyReport report;
        const std::size_t points = spec.points();
        const auto per = static_cast<std::size_t>(trials);
        for (const auto &policy_name : spec.policies)
        {
            for (std::size_t point = 0; point < points; ++point)
            {
                const NetworkConfig cfg = spec.config_at(point);
                const bool overloaded = cfg.regime() == Regime::OverLoaded;
                if (overloaded)
                {
                    std::ostringstream os;
                    os << policy_name << " point " << point << ": over-loaded configuration (load " << cfg.load()
                       << "), the per-path aggregate bound is still checked";
                    report.warnings.push_back(os.str());
                }
                const bool collapse = policy_name == "wld" && !overloaded;
                const bool long_enough = cfg.horizon >= kCollapseMinHorizon;
                if (collapse && !long_enough)
                {
                    report.warnings.push_back(policy_name + " point " + std::to_string(point) +
                                              ": horizon too short for the deficit stationarity check, skipped");
                }

                std::vector<VerifyTrial> out(per);
                parallel_for(per, spec.threads,
                             [&](std::size_t trial)
                             {
                                 NetworkConfig c = cfg;
                                 c.seed = derive_seed({spec.base.seed, hash_name(policy_name), hash_name("verify"),
                                                       static_cast<std::uint64_t>(point),
                                                       static_cast<std::uint64_t>(trial)});
                                 InvariantMonitor inv;
                                 AggregateBoundMonitor bound(c.p, c.ell_tot);
                                 CollapseTracker spread(c.clients, c.horizon / 2);
                                 std::vector<EpisodeObserver *> obs{&inv, &bound};
                                 if (collapse && long_enough)
                                 {
                                     obs.push_back(&spread);
                                 }
                                 ObserverList list(obs);
                                 RunOptions opts;
                                 opts.record_trace = false;
                                 opts.record_surplus = false;
                                 opts.observer = &list;
                                 auto policy = make_policy(policy_name);
                                 const auto first = run_episode(c, *policy, c.horizon, opts);
                                 out[trial].checks = inv.results();
                                 out[trial].bound = bound.result();
                                 out[trial].w_first = spread.mean_abs_w_first();
                                 out[trial].w_second = spread.mean_abs_w_second();
                                 if (trial == 0)
                                 {
                                     auto again = make_policy(policy_name);
                                     RunOptions quiet;
                                     quiet.record_trace = false;
                                     quiet.record_surplus = false;
                                     out[trial].deterministic =
                                         run_episode(c, *again, c.horizon, quiet).finals == first.finals;
                                 }
                             });

                std::vector<CheckResult> merged(out.front().checks.size());
                CheckResult bound;
                double w1 = 0.0;
                double w2 = 0.0;
                for (std::size_t t = 0; t < per; ++t)
                {
                    for (std::size_t k = 0; k < merged.size(); ++k)
                    {
                        merge(merged[k], out[t].checks[k], t);
                    }
                    merge(bound, out[t].bound, t);
                    w1 += out[t].w_first;
                    w2 += out[t].w_second;
                }
                merged.push_back(bound);

                CheckResult det;
                det.name = "determinism (trial 0 rerun with the same seed)";
                det.checked = 1;
                det.passed = out.front().deterministic;
                if (!det.passed)
                {
                    det.violations = 1;
                    det.detail = "final counters differ between two runs with identical seeds";
                }
                merged.push_back(det);

                if (collapse && long_enough)
                {
                    CheckResult ssc;
                    ssc.name = "weighted deficit spread stationary (second-half mean <= 1.1 x first-half mean)";
                    ssc.checked = static_cast<std::int64_t>(per);
                    ssc.passed = w2 <= 1.1 * w1;
                    std::ostringstream os;
                    os << "mean |W| first half " << w1 / static_cast<double>(per) << ", second half "
                       << w2 / static_cast<double>(per);
                    ssc.detail = os.str();
                    if (!ssc.passed)
                    {
                        ssc.violations = 1;
                    }
                    merged.push_back(ssc);
                }
                for (auto &m : merged)
                {
                    report.entries.push_back({policy_name, point, std::move(m)});
                }
            }
        }
        return report;
    }

    void print_report(std::ostream &out, const VerifyReport &report)
    {
        for (const auto &w : report.warnings)
        {
            out << "warning: " << w << '\n';
        }
        for (const auto &e : report.entries)
        {
            out << (e.check.passed ? "PASS " : "FAIL ") << e.policy << " point " << e.point << ": " << e.check.name
                << " (" << e.check.checked << " checks, " << e.check.violations << " violations)";
            if (!e.check.detail.empty())
            {
                out << " -- " << e.check.detail;
            }
            out << '\n';
        }
        out << (report.passed() ? "all checks passed" : "verification FAILED") << '\n';
    }

} // namespace vstream
