// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "vstream/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace vstream
{
    namespace
    {
        std::string describe(std::size_t n, const ClientState &c)
        {
            std::ostringstream os;
            os << "client " << n + 1 << " {Q=" << c.ap_queue << " B=" << c.buffer << " A=" << c.delivered
               << " U=" << c.dummies << " S=" << c.played << " D=" << c.drops << "}";
            return os.str();
        }

        bool contains(const std::vector<ClientId> &v, ClientId n)
        {
            return std::find(v.begin(), v.end(), n) != v.end();
        }
    } // namespace

    // --- InvariantMonitor ----------------------------------------------------

    void InvariantMonitor::on_start(const EpisodeState &state)
    {
        static const char *const kNames[kCount] = {
            "conservation (Q + B = ell)",
            "counter identities (B = A - S, non-negative)",
            "monotone unit increments of A, U, S, D",
            "complementarity (B dD = 0, Q dU = 0)",
            "dummy bookkeeping rule",
            "engine equals two-sided reflection of surplus",
            "slot record consistency",
        };
        checks_.assign(kCount, {});
        for (std::size_t k = 0; k < kCount; ++k)
        {
            checks_[k].name = kNames[k];
        }
        previous_ = state.clients;
        ells_ = state.ells;
        periods_ = state.periods;
        oracles_.clear();
        for (std::int64_t ell : ells_)
        {
            oracles_.emplace_back(ell);
        }
        // time 0: surplus 0, nothing regulated yet
        for (std::size_t n = 0; n < state.size(); ++n)
        {
            const auto &c = state.clients[n];
            const auto step = oracles_[n].push(c.surplus());
            if (c.ap_queue + c.buffer != ells_[n])
            {
                fail(kConservation, 0, describe(n, c));
            }
            if (step.lower != c.drops || step.upper != c.dummies || step.regulated != c.buffer)
            {
                fail(kReflection, 0, describe(n, c));
            }
        }
    }

    void InvariantMonitor::fail(Check which, std::int64_t slot, const std::string &what)
    {
        auto &c = checks_[which];
        if (c.violations == 0)
        {
            c.first_slot = slot;
            c.detail = "slot " + std::to_string(slot) + ": " + what;
        }
        ++c.violations;
        c.passed = false;
    }

    void InvariantMonitor::on_slot(const EpisodeState &state, const SlotRecord &record)
    {
        const std::int64_t t = record.slot;
        const std::size_t count = state.size();

        if (record.scheduled >= count)
        {
            fail(kRecord, t, "scheduled client out of range");
        }
        if (record.dummy && !record.delivered)
        {
            fail(kRecord, t, "dummy flagged on a failed transmission");
        }
        ++checks_[kRecord].checked;

        for (std::size_t n = 0; n < count; ++n)
        {
            const auto &c = state.clients[n];
            const auto &prev = previous_[n];
            for (auto &chk : checks_)
            {
                ++chk.checked;
            }

            if (c.ap_queue + c.buffer != ells_[n])
            {
                fail(kConservation, t, describe(n, c) + " with ell=" + std::to_string(ells_[n]));
            }
            if (c.buffer != c.delivered - c.played || c.ap_queue < 0 || c.buffer < 0)
            {
                fail(kCounters, t, describe(n, c));
            }

            const std::int64_t dA = c.delivered - prev.delivered;
            const std::int64_t dU = c.dummies - prev.dummies;
            const std::int64_t dS = c.played - prev.played;
            const std::int64_t dD = c.drops - prev.drops;
            auto unit = [](std::int64_t d)
            { return d == 0 || d == 1; };
            if (!unit(dA) || !unit(dU) || !unit(dS) || !unit(dD) || (dU == 1 && dD == 1))
            {
                fail(kMonotone, t, describe(n, c) + " after " + describe(n, prev));
            }
            if (c.buffer * dD != 0 || c.ap_queue * dU != 0)
            {
                fail(kComplementarity, t, describe(n, c));
            }

            const bool to_n = record.scheduled == n && record.delivered;
            const bool after_playback = (t - 1) % periods_[n] == 0;
            if (dU == 1 && !(c.ap_queue == 0 && to_n && !after_playback))
            {
                fail(kDummyRule, t, "dummy counted outside its admissible slots, " + describe(n, c));
            }
            if (dU == 0 && c.ap_queue == 0 && to_n && dA == 0)
            {
                fail(kDummyRule, t, "dummy delivered into a full buffer was not counted, " + describe(n, c));
            }

            const auto step = oracles_[n].push(c.surplus());
            if (step.lower != c.drops || step.upper != c.dummies || step.regulated != c.buffer ||
                ells_[n] - step.regulated != c.ap_queue)
            {
                std::ostringstream os;
                os << describe(n, c) << " but reflection gives D=" << step.lower << " U=" << step.upper
                   << " W=" << step.regulated;
                fail(kReflection, t, os.str());
            }

            const bool in_played = contains(record.played, n);
            const bool in_dropped = contains(record.dropped, n);
            if ((in_played && in_dropped) || in_played != (dS == 1) || in_dropped != (dD == 1))
            {
                fail(kRecord, t, "played/dropped sets disagree with counters for " + describe(n, c));
            }
        }
        previous_ = state.clients;
    }

    std::vector<CheckResult> InvariantMonitor::results() const { return checks_; }

    bool InvariantMonitor::passed() const
    {
        return std::all_of(checks_.begin(), checks_.end(), [](const CheckResult &c)
                           { return c.passed; });
    }

    // --- AggregateBoundMonitor ---------------------------------------------

    AggregateBoundMonitor::AggregateBoundMonitor(double p, std::int64_t ell_tot)
        : p_(p), reflector_(static_cast<double>(ell_tot) / p)
    {
        result_.name = "aggregate bound D(t) <= sum D_n(t) / p";
    }

    void AggregateBoundMonitor::on_start(const EpisodeState & /*state*/)
    {
        reflector_.push(0.0);
    }

    void AggregateBoundMonitor::on_slot(const EpisodeState &state, const SlotRecord &record)
    {
        std::int64_t surplus = 0;
        std::int64_t drops = 0;
        for (const auto &c : state.clients)
        {
            surplus += c.surplus();
            drops += c.drops;
        }
        const auto step = reflector_.push(static_cast<double>(surplus) / p_);
        last_sum_ = static_cast<double>(drops) / p_;
        ++result_.checked;
        if (step.lower > last_sum_ + 1e-9 * (1.0 + last_sum_))
        {
            if (result_.violations == 0)
            {
                std::ostringstream os;
                os.precision(17);
                os << "slot " << record.slot << ": D=" << step.lower << " > sum D_n/p=" << last_sum_;
                result_.detail = os.str();
                result_.first_slot = record.slot;
            }
            ++result_.violations;
            result_.passed = false;
        }
    }

    // --- CollapseTracker -----------------------------------------------------

    CollapseTracker::CollapseTracker(const std::vector<ClientConfig> &clients, std::int64_t half)
        : lcm_(period_lcm(clients)), half_(half)
    {
        for (const auto &c : clients)
        {
            units_.push_back(lcm_ / c.period);
            betas_.push_back(c.beta);
            beta_sum_ += c.beta;
        }
        scratch_.resize(clients.size());
    }

    void CollapseTracker::on_slot(const EpisodeState &state, const SlotRecord &record)
    {
        const std::int64_t t = record.slot;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        double centred_sum = 0.0;
        for (std::size_t n = 0; n < scratch_.size(); ++n)
        {
            const auto &c = state.clients[n];
            const double centred =
                static_cast<double>(lcm_ * (c.delivered + c.dummies) - t * units_[n]) / static_cast<double>(lcm_);
            centred_sum += centred;
            scratch_[n] = centred / betas_[n];
            lo = std::min(lo, scratch_[n]);
            hi = std::max(hi, scratch_[n]);
        }
        spread_ = std::max(spread_, hi - lo);
        if (t == half_)
        {
            spread_half_ = spread_;
        }

        const double mean_level = centred_sum / beta_sum_;
        double abs_w = 0.0;
        for (double v : scratch_)
        {
            abs_w += std::abs(mean_level - v);
        }
        abs_w /= static_cast<double>(scratch_.size());
        if (t <= half_)
        {
            w_first_ += abs_w;
            ++n_first_;
        }
        else
        {
            w_second_ += abs_w;
            ++n_second_;
        }
    }

    double CollapseTracker::mean_abs_w_first() const noexcept
    {
        return n_first_ == 0 ? 0.0 : w_first_ / static_cast<double>(n_first_);
    }

    double CollapseTracker::mean_abs_w_second() const noexcept
    {
        return n_second_ == 0 ? 0.0 : w_second_ / static_cast<double>(n_second_);
    }

    // --- CheckpointRecorder --------------------------------------------------

    CheckpointRecorder::CheckpointRecorder(std::vector<std::int64_t> checkpoints) : checkpoints_(std::move(checkpoints))
    {
        std::sort(checkpoints_.begin(), checkpoints_.end());
        checkpoints_.erase(std::unique(checkpoints_.begin(), checkpoints_.end()), checkpoints_.end());
    }

    void CheckpointRecorder::on_slot(const EpisodeState &state, const SlotRecord &record)
    {
        while (next_ < checkpoints_.size() && checkpoints_[next_] == record.slot)
        {
            snapshots_.push_back(state.clients);
            ++next_;
        }
    }

} // namespace vstream
