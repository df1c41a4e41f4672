// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

// Online checkers that ride along an episode as observers.

#pragma once

#include "vstream/config.hpp"
#include "vstream/engine.hpp"
#include "vstream/reflection.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vstream
{
    struct CheckResult
    {
        std::string name;
        bool passed = true;
        std::int64_t checked = 0;     ///< number of (slot, client) evaluations
        std::int64_t violations = 0;
        std::int64_t first_slot = -1; ///< slot of the first violation
        std::string detail;           ///< counterexample for the first violation
    };

    /// Every per-slot invariant of the buffer dynamics:
    ///  - conservation Q + B = ell and B = A - S, all counters non-negative
    ///  - A, U, S, D non-decreasing with unit increments, D and U never together
    ///  - complementarity B * dD = 0 and Q * dU = 0
    ///  - the dummy bookkeeping rule: dU = 1 only with Q = 0 at the slot end,
    ///    a delivery to that client, and a slot that does not directly follow
    ///    a playback instant
    ///  - (D_n, U_n, B_n, Q_n) equal the two-sided reflection of the surplus
    ///    with barrier ell_n
    ///  - the record is consistent: one valid client scheduled, dummy implies
    ///    delivered, no client both played and dropped
    class InvariantMonitor final : public EpisodeObserver
    {
    public:
        void on_start(const EpisodeState &state) override;
        void on_slot(const EpisodeState &state, const SlotRecord &record) override;

        [[nodiscard]] std::vector<CheckResult> results() const;
        [[nodiscard]] bool passed() const;

    private:
        enum Check : std::size_t
        {
            kConservation,
            kCounters,
            kMonotone,
            kComplementarity,
            kDummyRule,
            kReflection,
            kRecord,
            kCount,
        };

        void fail(Check which, std::int64_t slot, const std::string &what);

        std::vector<CheckResult> checks_;
        std::vector<ClientState> previous_;
        std::vector<TwoSidedReflector<std::int64_t>> oracles_;
        std::vector<std::int64_t> ells_;
        std::vector<std::int64_t> periods_;
    };

    /// Per-path aggregate bound: D(t) <= (1/p) sum_n D_n(t), where D is the
    /// lower regulator of Z(t) = sum_n surplus_n(t) / p reflected at 0 and
    /// ell_tot / p.
    class AggregateBoundMonitor final : public EpisodeObserver
    {
    public:
        AggregateBoundMonitor(double p, std::int64_t ell_tot);

        void on_start(const EpisodeState &state) override;
        void on_slot(const EpisodeState &state, const SlotRecord &record) override;

        [[nodiscard]] const CheckResult &result() const noexcept { return result_; }
        [[nodiscard]] double aggregate_drops() const noexcept { return reflector_.lower(); }
        [[nodiscard]] double scaled_drop_sum() const noexcept { return last_sum_; }

    private:
        double p_;
        TwoSidedReflector<double> reflector_;
        CheckResult result_;
        double last_sum_ = 0.0;
    };

    /// Tracks the weighted centred deficits Ztilde_n / beta_n with
    /// Ztilde_n = A_n + U_n - lambda_n t. `spread()` is the running max over
    /// time of max_{n,m} |Ztilde_n/beta_n - Ztilde_m/beta_m|; the W_n means
    /// are split at `half` to compare the first and second halves.
    class CollapseTracker final : public EpisodeObserver
    {
    public:
        CollapseTracker(const std::vector<ClientConfig> &clients, std::int64_t half);

        void on_slot(const EpisodeState &state, const SlotRecord &record) override;

        [[nodiscard]] double spread() const noexcept { return spread_; }
        /// Running spread recorded at the end of slot `half`.
        [[nodiscard]] double spread_at_half() const noexcept { return spread_half_; }
        [[nodiscard]] double mean_abs_w_first() const noexcept;
        [[nodiscard]] double mean_abs_w_second() const noexcept;

    private:
        std::int64_t lcm_;
        std::vector<std::int64_t> units_;
        std::vector<double> betas_;
        double beta_sum_ = 0.0;
        std::int64_t half_;
        double spread_ = 0.0;
        double spread_half_ = 0.0;
        double w_first_ = 0.0;
        double w_second_ = 0.0;
        std::int64_t n_first_ = 0;
        std::int64_t n_second_ = 0;
        std::vector<double> scratch_;
    };

    /// Snapshots every client's counters at the given slots.
    class CheckpointRecorder final : public EpisodeObserver
    {
    public:
        explicit CheckpointRecorder(std::vector<std::int64_t> checkpoints);

        void on_slot(const EpisodeState &state, const SlotRecord &record) override;

        [[nodiscard]] const std::vector<std::int64_t> &checkpoints() const noexcept { return checkpoints_; }
        /// snapshots()[k] holds the clients at checkpoints()[k].
        [[nodiscard]] const std::vector<std::vector<ClientState>> &snapshots() const noexcept { return snapshots_; }

    private:
        std::vector<std::int64_t> checkpoints_;
        std::vector<std::vector<ClientState>> snapshots_;
        std::size_t next_ = 0;
    };

    /// Fans one episode out to several observers.
    class ObserverList final : public EpisodeObserver
    {
    public:
        explicit ObserverList(std::vector<EpisodeObserver *> observers) : observers_(std::move(observers)) {}

        void on_start(const EpisodeState &state) override
        {
            for (auto *o : observers_)
            {
                o->on_start(state);
            }
        }

        void on_slot(const EpisodeState &state, const SlotRecord &record) override
        {
            for (auto *o : observers_)
            {
                o->on_slot(state, record);
            }
        }

    private:
        std::vector<EpisodeObserver *> observers_;
    };

} // namespace vstream
