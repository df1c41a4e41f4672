// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "vstream/config.hpp"

#include <cmath>
#include <numeric>

namespace vstream
{
    const char *to_string(Regime r) noexcept
    {
        switch (r)
        {
        case Regime::HeavyTraffic:
            return "heavy-traffic";
        case Regime::UnderLoaded:
            return "under-loaded";
        case Regime::OverLoaded:
            return "over-loaded";
        }
        return "unknown";
    }

    std::int64_t period_lcm(const std::vector<ClientConfig> &clients)
    {
        std::int64_t l = 1;
        for (const auto &c : clients)
        {
            if (c.period < 1)
            {
                throw ConfigError("client period must be a positive integer");
            }
            l = std::lcm(l, c.period);
        }
        return l;
    }

    std::int64_t total_ell(const std::vector<ClientConfig> &clients) noexcept
    {
        std::int64_t s = 0;
        for (const auto &c : clients)
        {
            s += c.ell;
        }
        return s;
    }

    double NetworkConfig::total_rate() const
    {
        const std::int64_t l = period_lcm(clients);
        std::int64_t num = 0;
        for (const auto &c : clients)
        {
            num += l / c.period;
        }
        return static_cast<double>(num) / static_cast<double>(l);
    }

    Regime NetworkConfig::regime() const
    {
        const double eps = 1.0 - load();
        if (std::abs(eps) <= kRegimeTolerance)
        {
            return Regime::HeavyTraffic;
        }
        return eps > 0.0 ? Regime::UnderLoaded : Regime::OverLoaded;
    }

    void NetworkConfig::validate() const
    {
        if (clients.empty())
        {
            throw ConfigError("network needs at least one client");
        }
        if (!(p > 0.0 && p <= 1.0))
        {
            throw ConfigError("channel reliability p must lie in (0, 1]");
        }
        if (ell_tot < 1)
        {
            throw ConfigError("ell_tot must be a positive integer");
        }
        if (horizon < 1)
        {
            throw ConfigError("horizon must be at least one slot");
        }
        if (trials < 1)
        {
            throw ConfigError("trials must be at least 1");
        }
        for (std::size_t n = 0; n < clients.size(); ++n)
        {
            const auto &c = clients[n];
            const std::string who = "client " + std::to_string(n + 1);
            if (c.period < 1)
            {
                throw ConfigError(who + ": period must be a positive integer");
            }
            if (c.ell < 1)
            {
                throw ConfigError(who + ": ell must be a positive integer");
            }
            if (!(c.beta > 0.0) || !std::isfinite(c.beta))
            {
                throw ConfigError(who + ": beta must be positive");
            }
            if (!(c.zeta > 0.0) || !std::isfinite(c.zeta))
            {
                throw ConfigError(who + ": zeta must be positive");
            }
        }
        const std::int64_t sum = total_ell(clients);
        if (sum > ell_tot)
        {
            throw ConfigError("sum of ell_n (" + std::to_string(sum) + ") exceeds ell_tot (" +
                              std::to_string(ell_tot) + ")");
        }
    }

} // namespace vstream
