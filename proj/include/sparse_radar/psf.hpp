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

#ifndef SPARSE_RADAR_PSF_HPP
#define SPARSE_RADAR_PSF_HPP

#include "sparse_radar/common.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sparse_radar
{
    // 3-dB width in degrees of the lobe around the global maximum of an
    // amplitude cut sampled at azimuth sines u. Crossings of max / sqrt(2) are
    // linearly interpolated in u.
    inline double beam_width_3db(const std::vector<double> &amplitude, const std::vector<double> &u)
    {
        if (amplitude.size() != u.size() || amplitude.size() < 3)
            throw ShapeError("beam_width_3db: need matching cuts of at least 3 samples");
        const std::size_t p = static_cast<std::size_t>(std::max_element(amplitude.begin(), amplitude.end()) - amplitude.begin());
        const double level = amplitude[p] / std::sqrt(2.0);
        if (!(amplitude[p] > 0.0))
            throw NumericError("beam_width_3db: cut is identically zero");
        std::size_t l = p, r = p;
        while (l > 0 && amplitude[l] >= level)
            --l;
        while (r + 1 < amplitude.size() && amplitude[r] >= level)
            ++r;
        if (amplitude[l] >= level || amplitude[r] >= level)
            throw NumericError("beam_width_3db: lobe is not contained in the cut");
        auto cross = [&](std::size_t a, std::size_t b)
        {
            const double f = (level - amplitude[a]) / (amplitude[b] - amplitude[a]);
            return u[a] + f * (u[b] - u[a]);
        };
        const double ul = cross(l, l + 1), ur = cross(r, r - 1);
        return rad2deg(std::asin(std::clamp(ur, -1.0, 1.0)) - std::asin(std::clamp(ul, -1.0, 1.0)));
    }

    // Largest value outside the main lobe (bounded by the first minima either
    // side of the global maximum) relative to the maximum, in dB (20 log10).
    // Returns -inf when nothing lies outside the main lobe.
    inline double peak_sidelobe_db(const std::vector<double> &amplitude)
    {
        if (amplitude.empty())
            throw ShapeError("peak_sidelobe_db: empty cut");
        const std::size_t p = static_cast<std::size_t>(std::max_element(amplitude.begin(), amplitude.end()) - amplitude.begin());
        std::size_t l = p, r = p;
        while (l > 0 && amplitude[l - 1] <= amplitude[l])
            --l;
        while (r + 1 < amplitude.size() && amplitude[r + 1] <= amplitude[r])
            ++r;
        double side = 0.0;
        bool any = false;
        for (std::size_t i = 0; i < amplitude.size(); ++i)
            if (i < l || i > r)
            {
                side = std::max(side, amplitude[i]);
                any = true;
            }
        if (!any || side <= 0.0)
            return -INFINITY;
        return 20.0 * std::log10(side / amplitude[p]);
    }
}

#endif
