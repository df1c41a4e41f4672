// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "vstream/config.hpp"
#include "vstream/engine.hpp"
#include "vstream/rng.hpp"

#include <cstdint>
#include <deque>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vstream
{
    /// What the AP knows when it picks the client for slot t + 1: the slot
    /// index t of the last completed slot and every counter at its end.
    struct PolicyContext
    {
        std::int64_t t = 0;
        std::span<const ClientState> clients;
        std::span<const ClientConfig> configs;
    };

    /// One decision per slot; exactly one client is scheduled.
    class Policy
    {
    public:
        virtual ~Policy() = default;
        [[nodiscard]] virtual std::string_view name() const = 0;
        /// Called once before slot 1.
        virtual void reset(std::span<const ClientConfig> clients) = 0;
        virtual ClientId select(const PolicyContext &ctx, Rng &rng) = 0;
        virtual void observe(const SlotRecord & /*record*/) {}
    };

    class AllocationError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Splits `ell_tot` proportionally to the weights. Fractional shares are
    /// floored and the remainder handed out by largest fractional part, ties
    /// to the lowest index. Throws AllocationError if a client would get 0.
    [[nodiscard]] std::vector<std::int64_t> wld_allocate(std::int64_t ell_tot, std::span<const double> betas);

    /// Weighted largest deficit: argmax of (lambda_n t - (A_n + U_n)) / beta_n.
    class WldPolicy final : public Policy
    {
    public:
        [[nodiscard]] std::string_view name() const override { return "wld"; }
        void reset(std::span<const ClientConfig> clients) override;
        ClientId select(const PolicyContext &ctx, Rng &rng) override;

    private:
        std::int64_t lcm_ = 1;
        std::vector<std::int64_t> rate_units_; // lcm / period
        std::vector<double> betas_;
    };

    /// Delivery-based largest debt first: argmax of lambda_n t - A_n, blind to dummies.
    class DbldfPolicy final : public Policy
    {
    public:
        [[nodiscard]] std::string_view name() const override { return "dbldf"; }
        void reset(std::span<const ClientConfig> clients) override;
        ClientId select(const PolicyContext &ctx, Rng &rng) override;

    private:
        std::int64_t lcm_ = 1;
        std::vector<std::int64_t> rate_units_;
    };

    /// Deadlines of the packets waiting at the AP, per client, oldest first.
    class DeadlineLedger
    {
    public:
        void reset(std::span<const ClientConfig> clients);
        void apply(const SlotRecord &record);

        [[nodiscard]] const std::deque<std::int64_t> &queue(ClientId n) const { return queues_.at(n); }
        [[nodiscard]] std::size_t size() const noexcept { return queues_.size(); }

    private:
        std::vector<std::deque<std::int64_t>> queues_;
        std::vector<std::int64_t> periods_;
        std::vector<std::int64_t> latencies_;
        std::vector<std::int64_t> next_generation_;
    };

    /// Earliest deadline first over all packets at the AP. Ties between
    /// clients are broken uniformly at random; an empty AP falls back to
    /// client 0, which then receives a dummy.
    class EdfPolicy final : public Policy
    {
    public:
        [[nodiscard]] std::string_view name() const override { return "edf"; }
        void reset(std::span<const ClientConfig> clients) override;
        ClientId select(const PolicyContext &ctx, Rng &rng) override;
        void observe(const SlotRecord &record) override { ledger_.apply(record); }

        [[nodiscard]] const DeadlineLedger &ledger() const noexcept { return ledger_; }

    private:
        DeadlineLedger ledger_;
        std::vector<ClientId> tied_;
    };

    /// Frame plan of weighted round robin.
    struct WrrFrame
    {
        std::int64_t length = 1;             ///< K
        std::vector<std::int64_t> quotas;    ///< K lambda_n / sum lambda
        std::vector<ClientId> order;         ///< client served in each frame position
    };

    /// Smallest K making every K lambda_n / sum(lambda) an integer; clients
    /// are laid out in contiguous blocks in index order.
    [[nodiscard]] WrrFrame wrr_schedule(std::span<const ClientConfig> clients);

    class WrrPolicy final : public Policy
    {
    public:
        [[nodiscard]] std::string_view name() const override { return "wrr"; }
        void reset(std::span<const ClientConfig> clients) override { frame_ = wrr_schedule(clients); }
        ClientId select(const PolicyContext &ctx, Rng &rng) override;

        [[nodiscard]] const WrrFrame &frame() const noexcept { return frame_; }

    private:
        WrrFrame frame_;
    };

    /// Weighted random: client n with probability lambda_n / sum(lambda).
    class WrandPolicy final : public Policy
    {
    public:
        [[nodiscard]] std::string_view name() const override { return "wrand"; }
        void reset(std::span<const ClientConfig> clients) override;
        ClientId select(const PolicyContext &ctx, Rng &rng) override;

    private:
        std::vector<std::int64_t> cumulative_; // prefix sums of lcm / period
    };

    inline constexpr std::string_view kPolicyNames[] = {"wld", "dbldf", "edf", "wrr", "wrand"};

    /// Policy by name: "wld" | "dbldf" | "edf" | "wrr" | "wrand".
    [[nodiscard]] std::unique_ptr<Policy> make_policy(std::string_view name);

    [[nodiscard]] bool is_policy_name(std::string_view name) noexcept;

} // namespace vstream
