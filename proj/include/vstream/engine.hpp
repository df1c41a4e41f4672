// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "vstream/config.hpp"

#include <cstdint>
#include <vector>

namespace vstream
{
    class Policy;

    /// Counters of one client at the end of a slot.
    struct ClientState
    {
        std::int64_t ap_queue = 0;  ///< undelivered packets held by the AP
        std::int64_t buffer = 0;    ///< delivered, not yet played packets
        std::int64_t delivered = 0; ///< video packets received
        std::int64_t dummies = 0;   ///< dummy deliveries that pushed the buffer past ell
        std::int64_t played = 0;    ///< packets played on time
        std::int64_t drops = 0;     ///< interruptions, equal to packets dropped by the AP

        /// Deliveries (video + dummy) minus playback instants passed.
        [[nodiscard]] std::int64_t surplus() const noexcept { return delivered + dummies - drops - played; }

        friend bool operator==(const ClientState &, const ClientState &) = default;
    };

    /// Event log of one slot.
    struct SlotRecord
    {
        std::int64_t slot = 0;
        ClientId scheduled = 0;
        bool delivered = false; ///< channel outcome of the transmission
        bool dummy = false;     ///< the transmission carried no video (AP queue was empty)
        std::vector<ClientId> played;
        std::vector<ClientId> dropped;

        friend bool operator==(const SlotRecord &, const SlotRecord &) = default;
    };

    struct EpisodeState
    {
        std::int64_t slot = 0; ///< last completed slot
        std::vector<ClientState> clients;
        std::vector<std::int64_t> periods;
        std::vector<std::int64_t> ells;
        std::vector<std::int64_t> next_playback; ///< next slot that ends with a playback instant

        [[nodiscard]] std::size_t size() const noexcept { return clients.size(); }
    };

    /// Validates `config` and returns the state at time 0: every client-side
    /// buffer empty and the AP holding ell_n packets.
    [[nodiscard]] EpisodeState init_episode(const NetworkConfig &config);

    /// Advances one slot. Inside the slot the order is fixed: the transmission
    /// to `decision` (video if its AP queue is non-empty, dummy otherwise),
    /// then packet generation, then playback or drop for every client whose
    /// playback instant ends this slot.
    ///
    /// A dummy sent in a slot that ends with the client's playback instant is
    /// recorded in `SlotRecord::dummy` but does not advance `dummies`: the
    /// playback frees a buffer slot in the same boundary, so the buffer never
    /// exceeds ell and the reflection regulator does not move.
    void step_slot(EpisodeState &state, ClientId decision, bool channel_success, SlotRecord &record);

    [[nodiscard]] SlotRecord step_slot(EpisodeState &state, ClientId decision, bool channel_success);

    /// Receives every slot of an episode; used by invariant monitors and
    /// metric collectors that should not keep whole traces in memory.
    class EpisodeObserver
    {
    public:
        virtual ~EpisodeObserver() = default;
        virtual void on_start(const EpisodeState & /*state*/) {}
        virtual void on_slot(const EpisodeState &state, const SlotRecord &record) = 0;
    };

    struct RunOptions
    {
        bool record_trace = true;
        bool record_surplus = true;
        EpisodeObserver *observer = nullptr;
    };

    struct EpisodeResult
    {
        std::vector<SlotRecord> trace;
        std::vector<ClientState> finals;
        std::vector<std::vector<std::int64_t>> surplus; ///< [client][t] for t = 0..horizon
        bool overloaded = false;
    };

    /// Runs `horizon` slots seeded with `config.seed`. Each slot queries the
    /// policy first (policy randomness is drawn before the channel), then
    /// draws the channel outcome and applies step_slot.
    [[nodiscard]] EpisodeResult run_episode(const NetworkConfig &config, Policy &policy, std::int64_t horizon,
                                            const RunOptions &options = {});

} // namespace vstream
