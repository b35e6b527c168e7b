// SPDX-License-Identifier: Apache-2.0
//
// sparse-radar: sparse-array FMCW MIMO radar imaging toolkit
// Copyright (C) 2026 The sparse-radar authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef SPARSE_RADAR_PEAKS_HPP
#define SPARSE_RADAR_PEAKS_HPP

#include "sparse_radar/common.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace sparse_radar
{
    struct PeakSet
    {
        std::vector<std::size_t> indices; // strictly increasing
        std::vector<double> heights;
        std::vector<double> prominences;

        std::size_t size() const { return indices.size(); }
        bool empty() const { return indices.empty(); }
    };

    // Local maxima excluding the end samples. A flat top reports its left-centre
    // index; a plateau touching either end is not a peak.
    inline std::vector<std::size_t> local_maxima(std::span<const double> x)
    {
        std::vector<std::size_t> out;
        const std::size_t n = x.size();
        if (n < 3)
            return out;
        std::size_t i = 1;
        while (i + 1 < n)
        {
            if (x[i - 1] < x[i])
            {
                std::size_t ahead = i + 1;
                while (ahead + 1 < n && x[ahead] == x[i])
                    ++ahead;
                if (x[ahead] < x[i])
                {
                    out.push_back((i + ahead - 1) / 2);
                    i = ahead;
                }
            }
            ++i;
        }
        return out;
    }

    // Height above the higher of the two lowest points reached when walking
    // outward until a strictly higher sample (or the signal end).
    inline double peak_prominence(std::span<const double> x, std::size_t peak)
    {
        const double h = x[peak];
        double left_min = h;
        for (std::size_t i = peak + 1; i-- > 0 && x[i] <= h;)
            left_min = std::min(left_min, x[i]);
        double right_min = h;
        for (std::size_t i = peak; i < x.size() && x[i] <= h; ++i)
            right_min = std::min(right_min, x[i]);
        return h - std::max(left_min, right_min);
    }

    inline PeakSet find_peaks(std::span<const double> x, double min_prominence = 0.0, double min_height = -INFINITY)
    {
        for (double v : x)
            if (!std::isfinite(v))
                throw DomainError("find_peaks: spectrum contains non-finite values");
        PeakSet out;
        for (std::size_t p : local_maxima(x))
        {
            if (!(x[p] >= min_height))
                continue;
            const double prom = peak_prominence(x, p);
            if (!(prom >= min_prominence))
                continue;
            out.indices.push_back(p);
            out.heights.push_back(x[p]);
            out.prominences.push_back(prom);
        }
        return out;
    }

    inline PeakSet find_peaks(const std::vector<double> &x, double min_prominence = 0.0, double min_height = -INFINITY)
    {
        return find_peaks(std::span<const double>(x), min_prominence, min_height);
    }
}

#endif
