// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace vstream
{
    /// Number of worker threads to use when the caller passes 0.
    inline unsigned default_threads() noexcept
    {
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1U : hw;
    }

    /// Calls fn(i) for i in [0, count) on up to `threads` workers. Jobs must
    /// write only to their own slot of any shared output; the first exception
    /// thrown by a job is rethrown after all workers stop.
    template <class Fn>
    void parallel_for(std::size_t count, unsigned threads, Fn &&fn)
    {
        if (threads == 0)
        {
            threads = default_threads();
        }
        const std::size_t workers = std::min<std::size_t>(threads, count);
        if (workers <= 1)
        {
            for (std::size_t i = 0; i < count; ++i)
            {
                fn(i);
            }
            return;
        }

        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto work = [&]
        {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
            {
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                    {
                        error = std::current_exception();
                    }
                    next.store(count);
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
        {
            pool.emplace_back(work);
        }
        for (auto &t : pool)
        {
            t.join();
        }
        if (error)
        {
            std::rethrow_exception(error);
        }
    }

} // namespace vstream
