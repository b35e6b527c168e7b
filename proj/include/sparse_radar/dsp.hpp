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

#ifndef SPARSE_RADAR_DSP_HPP
#define SPARSE_RADAR_DSP_HPP

#include "sparse_radar/common.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <string>
#include <vector>

namespace sparse_radar
{
    enum class WindowKind
    {
        rect,
        hann
    };

    inline WindowKind window_from_string(const std::string &name)
    {
        if (name == "rect" || name == "rectangular" || name == "none")
            return WindowKind::rect;
        if (name == "hann" || name == "hanning")
            return WindowKind::hann;
        throw ConfigError("unknown window '" + name + "' (expected rect|hann)");
    }

    inline std::string to_string(WindowKind w) { return w == WindowKind::hann ? "hann" : "rect"; }

    // Symmetric Hann, w[n] = 0.5 - 0.5 cos(2 pi n / (N - 1)).
    inline std::vector<double> make_window(WindowKind kind, std::size_t n)
    {
        std::vector<double> w(n, 1.0);
        if (kind == WindowKind::hann && n > 1)
            for (std::size_t i = 0; i < n; ++i)
                w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n - 1));
        return w;
    }

    // Taper sampled at arbitrary (possibly non-uniform) element positions. The
    // aperture is padded by one pitch on each side so the end elements keep a
    // non-zero weight; on a ULA this equals hann(N + 2) without its end zeros.
    inline std::vector<double> positional_taper(WindowKind kind, const std::vector<double> &positions)
    {
        std::vector<double> w(positions.size(), 1.0);
        if (kind == WindowKind::rect || positions.size() < 2)
            return w;
        const auto [lo, hi] = std::minmax_element(positions.begin(), positions.end());
        double pitch = *hi - *lo;
        std::vector<double> sorted(positions);
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 1; i < sorted.size(); ++i)
            if (sorted[i] - sorted[i - 1] > 1e-12)
                pitch = std::min(pitch, sorted[i] - sorted[i - 1]);
        const double span = (*hi - *lo) + 2.0 * pitch;
        for (std::size_t i = 0; i < positions.size(); ++i)
            w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * (positions[i] - *lo + pitch) / span);
        return w;
    }

    // Thin wrapper over Eigen's FFT (kissfft backend, any length). Forward
    // transform is unscaled: X[k] = sum_n x[n] exp(-2 pi j k n / N).
    class Fft
    {
    public:
        void forward(std::vector<cplx> &out, const std::vector<cplx> &in)
        {
            if (in.size() < 2) // kissfft does not handle length 1
            {
                out = in;
                return;
            }
            engine_.fwd(out, in);
        }

    private:
        Eigen::FFT<double> engine_;
    };

    inline std::vector<cplx> fft(const std::vector<cplx> &in)
    {
        Fft f;
        std::vector<cplx> out;
        f.forward(out, in);
        return out;
    }

    // Moves the zero bin to index N/2 (numpy fftshift).
    template <typename T>
    void fftshift(std::vector<T> &v)
    {
        std::rotate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>((v.size() + 1) / 2), v.end());
    }
}

#endif
