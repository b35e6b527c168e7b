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

// Independent reference implementations used by the unit and acceptance tests.
// They are deliberately naive (direct sums, exhaustive searches).

#ifndef SPARSE_RADAR_TEST_ORACLES_HPP
#define SPARSE_RADAR_TEST_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace oracle
{
    using cplx = std::complex<double>;
    inline constexpr double pi = std::numbers::pi;

    // X[k] = sum_n x[n] exp(-2 pi j k n / N), k may be fractional.
    inline cplx dft_at(const std::vector<cplx> &x, double k)
    {
        cplx s{};
        const double n = static_cast<double>(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            s += x[i] * std::polar(1.0, -2.0 * pi * k * static_cast<double>(i) / n);
        return s;
    }

    inline std::vector<cplx> dft(const std::vector<cplx> &x)
    {
        std::vector<cplx> out(x.size());
        for (std::size_t k = 0; k < x.size(); ++k)
            out[k] = dft_at(x, static_cast<double>(k));
        return out;
    }

    struct Peak
    {
        std::size_t index;
        double prominence;
    };

    // Peaks by plateau enumeration, prominence by taking for each side the best
    // of all stopping points (every strictly higher sample, or the signal end).
    inline std::vector<Peak> peaks(const std::vector<double> &x)
    {
        std::vector<Peak> out;
        const std::size_t n = x.size();
        for (std::size_t i = 1; i + 1 < n; ++i)
        {
            std::size_t l = i, r = i;
            while (l > 0 && x[l - 1] == x[i])
                --l;
            while (r + 1 < n && x[r + 1] == x[i])
                ++r;
            if (l == 0 || r == n - 1 || !(x[l - 1] < x[i]) || !(x[r + 1] < x[i]) || i != (l + r) / 2)
                continue;
            const double h = x[i];
            auto side = [&](bool left)
            {
                double best = -INFINITY;
                const long step = left ? -1 : 1;
                for (long j = static_cast<long>(i) + step;; j += step)
                {
                    const bool edge = j < 0 || j >= static_cast<long>(n);
                    if (edge || x[static_cast<std::size_t>(j)] > h)
                    {
                        const long a = std::min<long>(static_cast<long>(i), edge ? (left ? 0 : static_cast<long>(n) - 1) : j);
                        const long b = std::max<long>(static_cast<long>(i), edge ? (left ? 0 : static_cast<long>(n) - 1) : j);
                        double m = INFINITY;
                        for (long t = a; t <= b; ++t)
                            m = std::min(m, x[static_cast<std::size_t>(t)]);
                        best = std::max(best, m);
                        if (edge)
                            break;
                    }
                }
                return best;
            };
            out.push_back({i, h - std::max(side(true), side(false))});
        }
        return out;
    }
}

#endif
