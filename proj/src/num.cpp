// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "vstream/num.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vstream
{
    std::vector<double> maxmin_weights(std::size_t clients)
    {
        if (clients == 0)
        {
            throw DomainError("max-min weights need at least one client");
        }
        return std::vector<double>(clients, 1.0 / static_cast<double>(clients));
    }

    std::vector<double> monomial_weights(std::span<const double> zetas, double kappa)
    {
        if (!(kappa > 1.0) || !std::isfinite(kappa))
        {
            throw DomainError("monomial penalty needs kappa > 1, got " + std::to_string(kappa));
        }
        if (zetas.empty())
        {
            throw DomainError("monomial weights need at least one client");
        }
        // normalise by the largest zeta first so that huge or tiny
        // importances do not overflow the power
        double top = 0.0;
        for (double z : zetas)
        {
            if (!(z > 0.0) || !std::isfinite(z))
            {
                throw DomainError("importance factors must be positive and finite");
            }
            top = std::max(top, z);
        }
        const double exponent = 1.0 / (1.0 - kappa);
        std::vector<double> beta;
        beta.reserve(zetas.size());
        double sum = 0.0;
        for (double z : zetas)
        {
            beta.push_back(std::pow(z / top, exponent));
            sum += beta.back();
        }
        for (double &b : beta)
        {
            b /= sum;
        }
        return beta;
    }

    std::vector<double> optimal_weights(const PenaltySpec &spec, std::size_t clients)
    {
        if (spec.kind == PenaltyKind::MaxMin)
        {
            return maxmin_weights(clients);
        }
        if (spec.zetas.size() != clients)
        {
            throw DomainError("need one importance factor per client");
        }
        return monomial_weights(spec.zetas, spec.kappa);
    }

    QoePenalty qoe_penalty(std::span<const double> drops, std::span<const double> zetas, double t)
    {
        if (drops.size() != zetas.size())
        {
            throw DomainError("need one importance factor per client");
        }
        if (!(t > 0.0))
        {
            throw DomainError("penalty time must be positive");
        }
        QoePenalty q;
        for (std::size_t n = 0; n < drops.size(); ++n)
        {
            q.cumulative += zetas[n] * drops[n] * drops[n];
            const double r = drops[n] / t;
            q.rate += zetas[n] * r * r;
        }
        return q;
    }

    QoePenalty qoe_penalty(std::span<const std::int64_t> drops, std::span<const double> zetas, double t)
    {
        std::vector<double> d(drops.begin(), drops.end());
        return qoe_penalty(std::span<const double>(d), zetas, t);
    }

} // namespace vstream
