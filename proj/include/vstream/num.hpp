// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

// Weight selection for WLD from a network-wide QoE objective, and the
// quadratic QoE penalty used to compare policies.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace vstream
{
    class DomainError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    enum class PenaltyKind
    {
        MaxMin,
        Monomial,
    };

    struct PenaltySpec
    {
        PenaltyKind kind = PenaltyKind::MaxMin;
        std::vector<double> zetas; ///< monomial only
        double kappa = 2.0;        ///< monomial only, > 1
    };

    /// Equal weights summing to one.
    [[nodiscard]] std::vector<double> maxmin_weights(std::size_t clients);

    /// beta_n proportional to zeta_n^(1 / (1 - kappa)), normalised to sum one.
    /// Throws DomainError for kappa <= 1 or a non-positive zeta.
    [[nodiscard]] std::vector<double> monomial_weights(std::span<const double> zetas, double kappa);

    /// Dispatches on the spec; `clients` is used by the max-min form.
    [[nodiscard]] std::vector<double> optimal_weights(const PenaltySpec &spec, std::size_t clients);

    struct QoePenalty
    {
        double cumulative = 0.0; ///< sum zeta_n D_n(t)^2
        double rate = 0.0;       ///< sum zeta_n (D_n(t) / t)^2
    };

    [[nodiscard]] QoePenalty qoe_penalty(std::span<const double> drops, std::span<const double> zetas, double t);

    [[nodiscard]] QoePenalty qoe_penalty(std::span<const std::int64_t> drops, std::span<const double> zetas, double t);

} // namespace vstream
