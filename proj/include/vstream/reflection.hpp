// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

// Discrete one-sided and two-sided Skorokhod reflection maps.
//
// A path x[0..T] is decomposed into a regulated part that stays inside the
// allowed region plus non-decreasing regulators that push only while the
// regulated part sits on the corresponding barrier. All maps are templated on
// the scalar so that integer client paths are reflected exactly while
// aggregate and Gaussian paths use double.

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace vstream
{
    template <class Scalar>
    struct OneSidedResult
    {
        std::vector<Scalar> regulator; ///< y, non-decreasing, y[0] = (-x[0])^+
        std::vector<Scalar> regulated; ///< z = x + y >= 0
    };

    template <class Scalar>
    struct ReflectionResult
    {
        std::vector<Scalar> lower;     ///< D, pushes up at 0
        std::vector<Scalar> upper;     ///< U, pushes down at the barrier
        std::vector<Scalar> regulated; ///< W = z - U + D, in [0, barrier]
    };

    /// y[t] = max_{s<=t} (-x[s])^+ and z = x + y.
    template <class Scalar>
    [[nodiscard]] OneSidedResult<Scalar> one_sided_reflect(std::span<const Scalar> x)
    {
        OneSidedResult<Scalar> out;
        out.regulator.resize(x.size());
        out.regulated.resize(x.size());
        Scalar running{0};
        for (std::size_t t = 0; t < x.size(); ++t)
        {
            running = std::max(running, static_cast<Scalar>(-x[t]));
            out.regulator[t] = running;
            out.regulated[t] = x[t] + running;
        }
        return out;
    }

    template <class Scalar>
    [[nodiscard]] OneSidedResult<Scalar> one_sided_reflect(const std::vector<Scalar> &x)
    {
        return one_sided_reflect(std::span<const Scalar>(x));
    }

    /// Streaming two-sided reflection with barriers 0 and `barrier`.
    ///
    /// Each push advances one index. The regulators only move by the amount
    /// needed to bring z - U + D back into [0, barrier], which is the forward
    /// form of the coupled suprema
    ///   D[t] = sup_{s<=t} (-z[s] + U[s])^+,  U[t] = sup_{s<=t} (z[s] + D[s] - barrier)^+.
    template <class Scalar>
    class TwoSidedReflector
    {
    public:
        struct Step
        {
            Scalar lower;
            Scalar upper;
            Scalar regulated;
        };

        explicit TwoSidedReflector(Scalar barrier) : barrier_(barrier)
        {
            if (!(barrier > Scalar{0}))
            {
                throw std::invalid_argument("reflection barrier must be positive");
            }
        }

        Step push(Scalar z) noexcept
        {
            Scalar w = z - upper_ + lower_;
            if (w < Scalar{0})
            {
                lower_ -= w;
                w = Scalar{0};
            }
            else if (w > barrier_)
            {
                upper_ += w - barrier_;
                w = barrier_;
            }
            return Step{lower_, upper_, w};
        }

        [[nodiscard]] Scalar lower() const noexcept { return lower_; }
        [[nodiscard]] Scalar upper() const noexcept { return upper_; }
        [[nodiscard]] Scalar barrier() const noexcept { return barrier_; }

    private:
        Scalar barrier_;
        Scalar lower_{0};
        Scalar upper_{0};
    };

    template <class Scalar>
    [[nodiscard]] ReflectionResult<Scalar> two_sided_reflect(std::span<const Scalar> z, Scalar barrier)
    {
        TwoSidedReflector<Scalar> r(barrier);
        ReflectionResult<Scalar> out;
        out.lower.reserve(z.size());
        out.upper.reserve(z.size());
        out.regulated.reserve(z.size());
        for (Scalar v : z)
        {
            const auto s = r.push(v);
            out.lower.push_back(s.lower);
            out.upper.push_back(s.upper);
            out.regulated.push_back(s.regulated);
        }
        return out;
    }

    template <class Scalar>
    [[nodiscard]] ReflectionResult<Scalar> two_sided_reflect(const std::vector<Scalar> &z, Scalar barrier)
    {
        return two_sided_reflect(std::span<const Scalar>(z), barrier);
    }

    /// True iff both regulators under the larger barrier are pointwise no
    /// larger than under the smaller one.
    template <class Scalar>
    [[nodiscard]] bool monotonicity_check(std::span<const Scalar> z, Scalar barrier1, Scalar barrier2)
    {
        if (!(barrier1 < barrier2))
        {
            throw std::invalid_argument("monotonicity_check needs barrier1 < barrier2");
        }
        const auto small = two_sided_reflect(z, barrier1);
        const auto large = two_sided_reflect(z, barrier2);
        for (std::size_t t = 0; t < z.size(); ++t)
        {
            if (large.lower[t] > small.lower[t] || large.upper[t] > small.upper[t])
            {
                return false;
            }
        }
        return true;
    }

    template <class Scalar>
    [[nodiscard]] bool monotonicity_check(const std::vector<Scalar> &z, Scalar barrier1, Scalar barrier2)
    {
        return monotonicity_check(std::span<const Scalar>(z), barrier1, barrier2);
    }

} // namespace vstream
