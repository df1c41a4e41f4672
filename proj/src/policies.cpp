// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "vstream/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace vstream
{
    namespace
    {
        std::vector<std::int64_t> rate_units(std::span<const ClientConfig> clients, std::int64_t lcm)
        {
            std::vector<std::int64_t> units;
            units.reserve(clients.size());
            for (const auto &c : clients)
            {
                units.push_back(lcm / c.period);
            }
            return units;
        }

        std::int64_t lcm_of(std::span<const ClientConfig> clients)
        {
            std::int64_t l = 1;
            for (const auto &c : clients)
            {
                l = std::lcm(l, c.period);
            }
            return l;
        }
    } // namespace

    std::vector<std::int64_t> wld_allocate(std::int64_t ell_tot, std::span<const double> betas)
    {
        const std::size_t n = betas.size();
        if (n == 0)
        {
            throw AllocationError("no clients to allocate latency to");
        }
        if (ell_tot < static_cast<std::int64_t>(n))
        {
            throw AllocationError("ell_tot=" + std::to_string(ell_tot) + " cannot give every one of " +
                                  std::to_string(n) + " clients a positive latency");
        }
        double total = 0.0;
        for (double b : betas)
        {
            if (!(b > 0.0) || !std::isfinite(b))
            {
                throw AllocationError("weights must be positive and finite");
            }
            total += b;
        }

        // Shares within 1e-9 of an integer count as that integer so that
        // weights like 1/8 survive floating-point normalisation.
        constexpr double kSnap = 1e-9;
        std::vector<std::int64_t> ell(n);
        std::vector<double> frac(n);
        std::int64_t assigned = 0;
        for (std::size_t i = 0; i < n; ++i)
        {
            const double share = static_cast<double>(ell_tot) * betas[i] / total;
            const double whole = std::floor(share + kSnap);
            ell[i] = static_cast<std::int64_t>(whole);
            frac[i] = std::max(0.0, share - whole);
            assigned += ell[i];
        }
        std::int64_t remainder = ell_tot - assigned;
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b)
                         { return frac[a] > frac[b]; });
        for (std::size_t k = 0; remainder > 0 && k < n; ++k, --remainder)
        {
            ++ell[order[k]];
        }
        for (std::size_t i = 0; i < n; ++i)
        {
            if (ell[i] < 1)
            {
                throw AllocationError("client " + std::to_string(i + 1) +
                                      " would receive zero latency; raise ell_tot or its weight");
            }
        }
        return ell;
    }

    // --- WLD ---------------------------------------------------------------

    void WldPolicy::reset(std::span<const ClientConfig> clients)
    {
        lcm_ = lcm_of(clients);
        rate_units_ = rate_units(clients, lcm_);
        betas_.clear();
        for (const auto &c : clients)
        {
            betas_.push_back(c.beta);
        }
    }

    ClientId WldPolicy::select(const PolicyContext &ctx, Rng & /*rng*/)
    {
        // deficit scaled by lcm: t lambda_n lcm - lcm (A_n + U_n), exact in integers
        ClientId best = 0;
        double best_value = -std::numeric_limits<double>::infinity();
        for (std::size_t n = 0; n < ctx.clients.size(); ++n)
        {
            const auto &c = ctx.clients[n];
            const std::int64_t scaled = ctx.t * rate_units_[n] - lcm_ * (c.delivered + c.dummies);
            const double value = static_cast<double>(scaled) / betas_[n];
            if (value > best_value)
            {
                best_value = value;
                best = n;
            }
        }
        return best;
    }

    // --- DBLDF -------------------------------------------------------------

    void DbldfPolicy::reset(std::span<const ClientConfig> clients)
    {
        lcm_ = lcm_of(clients);
        rate_units_ = rate_units(clients, lcm_);
    }

    ClientId DbldfPolicy::select(const PolicyContext &ctx, Rng & /*rng*/)
    {
        ClientId best = 0;
        std::int64_t best_debt = std::numeric_limits<std::int64_t>::min();
        for (std::size_t n = 0; n < ctx.clients.size(); ++n)
        {
            const std::int64_t debt = ctx.t * rate_units_[n] - lcm_ * ctx.clients[n].delivered;
            if (debt > best_debt)
            {
                best_debt = debt;
                best = n;
            }
        }
        return best;
    }

    // --- EDF ---------------------------------------------------------------

    void DeadlineLedger::reset(std::span<const ClientConfig> clients)
    {
        const std::size_t n = clients.size();
        queues_.assign(n, {});
        periods_.clear();
        latencies_.clear();
        next_generation_.clear();
        for (std::size_t i = 0; i < n; ++i)
        {
            const auto &c = clients[i];
            periods_.push_back(c.period);
            latencies_.push_back(c.latency_slots());
            next_generation_.push_back(c.period);
            // the ell packets present at time 0 were generated at the ends of
            // slots -(ell-1) period, ..., -period, 0
            for (std::int64_t k = c.ell - 1; k >= 0; --k)
            {
                queues_[i].push_back(-k * c.period + c.latency_slots());
            }
        }
    }

    void DeadlineLedger::apply(const SlotRecord &record)
    {
        if (record.delivered && !record.dummy)
        {
            queues_.at(record.scheduled).pop_front();
        }
        for (std::size_t n = 0; n < queues_.size(); ++n)
        {
            if (next_generation_[n] == record.slot)
            {
                queues_[n].push_back(record.slot + latencies_[n]);
                next_generation_[n] += periods_[n];
            }
        }
        for (ClientId n : record.dropped)
        {
            queues_.at(n).pop_front();
        }
    }

    void EdfPolicy::reset(std::span<const ClientConfig> clients)
    {
        ledger_.reset(clients);
        tied_.clear();
        tied_.reserve(clients.size());
    }

    ClientId EdfPolicy::select(const PolicyContext & /*ctx*/, Rng &rng)
    {
        tied_.clear();
        std::int64_t best = std::numeric_limits<std::int64_t>::max();
        for (std::size_t n = 0; n < ledger_.size(); ++n)
        {
            const auto &q = ledger_.queue(n);
            if (q.empty())
            {
                continue;
            }
            const std::int64_t head = q.front();
            if (head < best)
            {
                best = head;
                tied_.clear();
                tied_.push_back(n);
            }
            else if (head == best)
            {
                tied_.push_back(n);
            }
        }
        if (tied_.empty())
        {
            return 0;
        }
        if (tied_.size() == 1)
        {
            return tied_.front();
        }
        return tied_[uniform_index(rng, tied_.size())];
    }

    // --- WRR ---------------------------------------------------------------

    WrrFrame wrr_schedule(std::span<const ClientConfig> clients)
    {
        if (clients.empty())
        {
            throw ConfigError("weighted round robin needs at least one client");
        }
        // lambda_n / sum(lambda) = units_n / sum(units) with units_n = lcm / period_n,
        // so K = sum(units) / gcd(units) is the smallest integerising frame.
        const std::int64_t l = lcm_of(clients);
        const auto units = rate_units(clients, l);
        std::int64_t g = 0;
        std::int64_t sum = 0;
        for (std::int64_t u : units)
        {
            g = std::gcd(g, u);
            sum += u;
        }
        WrrFrame frame;
        frame.length = sum / g;
        for (std::size_t n = 0; n < units.size(); ++n)
        {
            const std::int64_t quota = units[n] / g;
            frame.quotas.push_back(quota);
            frame.order.insert(frame.order.end(), static_cast<std::size_t>(quota), n);
        }
        return frame;
    }

    ClientId WrrPolicy::select(const PolicyContext &ctx, Rng & /*rng*/)
    {
        return frame_.order[static_cast<std::size_t>(ctx.t % frame_.length)];
    }

    // --- WRand -------------------------------------------------------------

    void WrandPolicy::reset(std::span<const ClientConfig> clients)
    {
        const std::int64_t l = lcm_of(clients);
        cumulative_.clear();
        std::int64_t acc = 0;
        for (std::int64_t u : rate_units(clients, l))
        {
            acc += u;
            cumulative_.push_back(acc);
        }
    }

    ClientId WrandPolicy::select(const PolicyContext & /*ctx*/, Rng &rng)
    {
        const auto draw = static_cast<std::int64_t>(uniform_index(rng, static_cast<std::size_t>(cumulative_.back())));
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), draw);
        return static_cast<ClientId>(it - cumulative_.begin());
    }

    // --- factory -----------------------------------------------------------

    bool is_policy_name(std::string_view name) noexcept
    {
        return std::find(std::begin(kPolicyNames), std::end(kPolicyNames), name) != std::end(kPolicyNames);
    }

    std::unique_ptr<Policy> make_policy(std::string_view name)
    {
        if (name == "wld")
        {
            return std::make_unique<WldPolicy>();
        }
        if (name == "dbldf")
        {
            return std::make_unique<DbldfPolicy>();
        }
        if (name == "edf")
        {
            return std::make_unique<EdfPolicy>();
        }
        if (name == "wrr")
        {
            return std::make_unique<WrrPolicy>();
        }
        if (name == "wrand")
        {
            return std::make_unique<WrandPolicy>();
        }
        throw ConfigError("unknown policy '" + std::string(name) + "' (expected wld, dbldf, edf, wrr or wrand)");
    }

} // namespace vstream
