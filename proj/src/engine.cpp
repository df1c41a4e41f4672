// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "vstream/engine.hpp"

#include "vstream/policies.hpp"
#include "vstream/rng.hpp"

#include <stdexcept>
#include <string>

namespace vstream
{
    EpisodeState init_episode(const NetworkConfig &config)
    {
        config.validate();
        EpisodeState s;
        const std::size_t n = config.size();
        s.clients.resize(n);
        s.periods.reserve(n);
        s.ells.reserve(n);
        s.next_playback.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            const auto &c = config.clients[i];
            s.clients[i].ap_queue = c.ell;
            s.periods.push_back(c.period);
            s.ells.push_back(c.ell);
            s.next_playback.push_back(c.period);
        }
        return s;
    }

    void step_slot(EpisodeState &state, ClientId decision, bool channel_success, SlotRecord &record)
    {
        if (decision >= state.clients.size())
        {
            throw std::out_of_range("scheduled client " + std::to_string(decision) + " does not exist");
        }
        const std::int64_t t = ++state.slot;
        record.slot = t;
        record.scheduled = decision;
        record.delivered = channel_success;
        record.dummy = false;
        record.played.clear();
        record.dropped.clear();

        auto &target = state.clients[decision];
        if (channel_success)
        {
            if (target.ap_queue > 0)
            {
                --target.ap_queue;
                ++target.buffer;
                ++target.delivered;
            }
            else
            {
                record.dummy = true;
            }
        }
        if (record.dummy && state.next_playback[decision] != t)
        {
            ++target.dummies;
        }

        for (std::size_t n = 0; n < state.clients.size(); ++n)
        {
            if (state.next_playback[n] != t)
            {
                continue;
            }
            state.next_playback[n] += state.periods[n];
            auto &c = state.clients[n];
            ++c.ap_queue; // packet generated at the end of this slot
            if (c.buffer >= 1)
            {
                --c.buffer;
                ++c.played;
                record.played.push_back(n);
            }
            else
            {
                // the packet due now never arrived: the AP discards it
                ++c.drops;
                --c.ap_queue;
                record.dropped.push_back(n);
            }
        }
    }

    SlotRecord step_slot(EpisodeState &state, ClientId decision, bool channel_success)
    {
        SlotRecord r;
        step_slot(state, decision, channel_success, r);
        return r;
    }

    EpisodeResult run_episode(const NetworkConfig &config, Policy &policy, std::int64_t horizon,
                              const RunOptions &options)
    {
        if (horizon < 1)
        {
            throw ConfigError("episode horizon must be at least one slot");
        }
        EpisodeState state = init_episode(config);
        EpisodeResult result;
        result.overloaded = config.regime() == Regime::OverLoaded;

        const std::size_t n = state.size();
        if (options.record_trace)
        {
            result.trace.reserve(static_cast<std::size_t>(horizon));
        }
        if (options.record_surplus)
        {
            result.surplus.assign(n, {});
            for (auto &s : result.surplus)
            {
                s.reserve(static_cast<std::size_t>(horizon) + 1);
                s.push_back(0);
            }
        }

        Rng rng(config.seed);
        policy.reset(config.clients);
        if (options.observer != nullptr)
        {
            options.observer->on_start(state);
        }

        SlotRecord record;
        for (std::int64_t k = 0; k < horizon; ++k)
        {
            const PolicyContext ctx{state.slot, state.clients, config.clients};
            const ClientId decision = policy.select(ctx, rng);
            const bool success = bernoulli(rng, config.p);
            step_slot(state, decision, success, record);
            policy.observe(record);
            if (options.observer != nullptr)
            {
                options.observer->on_slot(state, record);
            }
            if (options.record_trace)
            {
                result.trace.push_back(record);
            }
            if (options.record_surplus)
            {
                for (std::size_t i = 0; i < n; ++i)
                {
                    result.surplus[i].push_back(state.clients[i].surplus());
                }
            }
        }
        result.finals = state.clients;
        return result;
    }

} // namespace vstream
