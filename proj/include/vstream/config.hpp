// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vstream
{
    /// Index of a client in a network, 0-based.
    using ClientId = std::size_t;

    class ConfigError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// One real-time video stream.
    ///
    /// The stream emits one packet every `period` slots (bitrate 1/period) and
    /// plays each packet `ell * period` slots after it was generated, so `ell`
    /// is the latency-bitrate product in packets.
    struct ClientConfig
    {
        std::int64_t period = 1;
        std::int64_t ell = 1;
        double beta = 1.0; ///< scheduling weight
        double zeta = 1.0; ///< importance in the QoE penalty

        [[nodiscard]] double rate() const noexcept { return 1.0 / static_cast<double>(period); }
        [[nodiscard]] std::int64_t latency_slots() const noexcept { return ell * period; }
    };

    enum class Regime
    {
        HeavyTraffic,
        UnderLoaded,
        OverLoaded,
    };

    [[nodiscard]] const char *to_string(Regime r) noexcept;

    struct NetworkConfig
    {
        std::vector<ClientConfig> clients;
        double p = 1.0; ///< per-transmission success probability
        std::int64_t ell_tot = 1;
        std::int64_t horizon = 1;
        std::uint64_t seed = 1;
        int trials = 1;

        [[nodiscard]] std::size_t size() const noexcept { return clients.size(); }

        /// Sum of packet rates, evaluated over the lcm of the periods so that
        /// symmetric configurations produce exact sums.
        [[nodiscard]] double total_rate() const;

        /// Equivalent load sum(lambda_n)/p.
        [[nodiscard]] double load() const { return total_rate() / p; }

        [[nodiscard]] Regime regime() const;

        /// Throws ConfigError when an invariant is violated.
        void validate() const;
    };

    /// Relative tolerance used to call a load exactly 1 (heavy traffic).
    inline constexpr double kRegimeTolerance = 1e-9;

    /// Least common multiple of all client periods.
    [[nodiscard]] std::int64_t period_lcm(const std::vector<ClientConfig> &clients);

    /// Sum of ell_n.
    [[nodiscard]] std::int64_t total_ell(const std::vector<ClientConfig> &clients) noexcept;

} // namespace vstream
