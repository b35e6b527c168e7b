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

#ifndef SPARSE_RADAR_RD_PROCESSING_HPP
#define SPARSE_RADAR_RD_PROCESSING_HPP

#include "sparse_radar/common.hpp"
#include "sparse_radar/dsp.hpp"
#include "sparse_radar/peaks.hpp"
#include "sparse_radar/synthesis.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace sparse_radar
{
    struct WindowSpec
    {
        WindowKind range = WindowKind::hann;
        WindowKind doppler = WindowKind::hann;
    };

    inline void to_json(nlohmann::json &j, const WindowSpec &w)
    {
        j = nlohmann::json{{"range", to_string(w.range)}, {"doppler", to_string(w.doppler)}};
    }
    inline void from_json(const nlohmann::json &j, WindowSpec &w)
    {
        w.range = window_from_string(j.value("range", std::string("hann")));
        w.doppler = window_from_string(j.value("doppler", std::string("hann")));
    }

    // Per-channel spectra indexed (storage channel, Doppler bin, range bin). The
    // Doppler axis is shifted so zero velocity sits at bin N_chirp / 2.
    struct RangeDopplerCube
    {
        Tensor3<cplx> data;
        RadarParams params;
        VirtualArray array;

        std::size_t n_channels() const { return data.dim0(); }
        std::size_t n_doppler() const { return data.dim1(); }
        std::size_t n_range() const { return data.dim2(); }
    };

    // Reusable 2-D transform for one channel. Returns N_chirp x N_r.
    class RangeDopplerTransform
    {
    public:
        RangeDopplerTransform(const RadarParams &p, const WindowSpec &w)
            : n_chirp_(static_cast<std::size_t>(p.n_chirp)), n_s_(static_cast<std::size_t>(p.n_samples)),
              n_r_(static_cast<std::size_t>(p.n_range_bins())), w_range_(make_window(w.range, n_s_)),
              w_doppler_(make_window(w.doppler, n_chirp_)) {}

        template <typename Sample>
        Grid2<cplx> operator()(const Sample *channel) // channel[c * N_samples + n]
        {
            Grid2<cplx> out(n_chirp_, n_r_);
            buf_.resize(n_s_);
            for (std::size_t c = 0; c < n_chirp_; ++c)
            {
                const Sample *s = channel + c * n_s_;
                for (std::size_t n = 0; n < n_s_; ++n)
                    buf_[n] = cplx(s[n].real(), s[n].imag()) * w_range_[n];
                fft_.forward(spec_, buf_);
                std::copy_n(spec_.begin(), n_r_, out.row(c));
            }
            buf_.resize(n_chirp_);
            for (std::size_t r = 0; r < n_r_; ++r)
            {
                for (std::size_t c = 0; c < n_chirp_; ++c)
                    buf_[c] = out(c, r) * w_doppler_[c];
                fft_.forward(spec_, buf_);
                fftshift(spec_);
                for (std::size_t c = 0; c < n_chirp_; ++c)
                    out(c, r) = spec_[c];
            }
            return out;
        }

    private:
        std::size_t n_chirp_, n_s_, n_r_;
        std::vector<double> w_range_, w_doppler_;
        std::vector<cplx> buf_, spec_;
        Fft fft_;
    };

    inline RangeDopplerCube range_doppler(const RadarCube &cube, const WindowSpec &window = {})
    {
        cube.validate();
        const std::size_t n_ch = cube.n_channels(), n_chirp = cube.n_chirp();
        const std::size_t n_r = static_cast<std::size_t>(cube.params.n_range_bins());
        RangeDopplerCube rd{Tensor3<cplx>(n_ch, n_chirp, n_r), cube.params, cube.array};
        parallel_for(n_ch, [&](std::size_t m)
                     {
            RangeDopplerTransform tr(cube.params, window);
            const Grid2<cplx> g = tr(cube.data.slice(m, 0));
            std::copy(g.data().begin(), g.data().end(), rd.data.slice(m, 0)); });
        return rd;
    }

    // Mean over channels of |RD|, N_chirp x N_r.
    inline Grid2<double> mean_magnitude(const RangeDopplerCube &rd)
    {
        Grid2<double> out(rd.n_doppler(), rd.n_range());
        if (rd.n_channels() == 0)
            return out;
        for (std::size_t m = 0; m < rd.n_channels(); ++m)
        {
            const cplx *p = rd.data.slice(m, 0);
            for (std::size_t i = 0; i < out.size(); ++i)
                out.data()[i] += std::abs(p[i]);
        }
        for (double &v : out.data())
            v /= static_cast<double>(rd.n_channels());
        return out;
    }

    // Same image straight from the cube without keeping every channel's spectrum
    // (the 256-channel ground-truth cube would need several hundred MB).
    inline Grid2<double> mean_magnitude(const RadarCube &cube, const WindowSpec &window = {})
    {
        cube.validate();
        RangeDopplerTransform tr(cube.params, window);
        Grid2<double> out(cube.n_chirp(), static_cast<std::size_t>(cube.params.n_range_bins()));
        for (std::size_t m = 0; m < cube.n_channels(); ++m)
        {
            const Grid2<cplx> g = tr(cube.data.slice(m, 0));
            for (std::size_t i = 0; i < out.size(); ++i)
                out.data()[i] += std::abs(g.data()[i]);
        }
        for (double &v : out.data())
            v /= static_cast<double>(std::max<std::size_t>(1, cube.n_channels()));
        return out;
    }

    // Per range bin, Doppler bins ranked strongest first.
    struct DopplerSelection
    {
        Grid2<int> bins;          // N_r x k
        Grid2<double> magnitudes; // N_r x k

        std::size_t n_range() const { return bins.rows(); }
        std::size_t k() const { return bins.cols(); }
        int bin(std::size_t range_bin, int rank) const { return bins(range_bin, static_cast<std::size_t>(rank - 1)); }
        double magnitude(std::size_t range_bin, int rank) const { return magnitudes(range_bin, static_cast<std::size_t>(rank - 1)); }
    };

    // Rank 1 is the arg-max of the Doppler profile. Further ranks are the other
    // Doppler peaks (prominence at least min_rel_prominence of the profile max),
    // strongest first; missing ranks repeat rank 1.
    inline DopplerSelection select_doppler_bins(const Grid2<double> &mean_img, int k, double min_rel_prominence = 0.1)
    {
        if (k < 1)
            throw ConfigError("select_doppler_bins: k must be >= 1");
        const std::size_t n_d = mean_img.rows(), n_r = mean_img.cols();
        if (n_d == 0)
            throw ShapeError("select_doppler_bins: empty Doppler axis");
        const std::size_t kk = static_cast<std::size_t>(k);
        DopplerSelection sel{Grid2<int>(n_r, kk), Grid2<double>(n_r, kk)};
        std::vector<double> profile(n_d);
        for (std::size_t r = 0; r < n_r; ++r)
        {
            for (std::size_t d = 0; d < n_d; ++d)
                profile[d] = mean_img(d, r);
            const std::size_t best = static_cast<std::size_t>(std::max_element(profile.begin(), profile.end()) - profile.begin());
            std::vector<std::size_t> ranked{best};
            if (kk > 1)
            {
                const PeakSet peaks = find_peaks(profile, min_rel_prominence * profile[best]);
                std::vector<std::size_t> others;
                for (std::size_t p : peaks.indices)
                    if (p != best)
                        others.push_back(p);
                std::stable_sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b)
                                 { return profile[a] > profile[b]; });
                for (std::size_t p : others)
                    if (ranked.size() < kk)
                        ranked.push_back(p);
            }
            for (std::size_t i = 0; i < kk; ++i)
            {
                const std::size_t d = i < ranked.size() ? ranked[i] : best;
                sel.bins(r, i) = static_cast<int>(d);
                sel.magnitudes(r, i) = profile[d];
            }
        }
        return sel;
    }

    // S_IF: N_r x N_v with columns in ascending virtual position.
    struct RangeChannelMatrix
    {
        Grid2<cplx> s_if;
        std::vector<int> doppler_bin; // per row
        int doppler_rank = 1;
        std::vector<double> positions; // per column

        std::size_t n_range() const { return s_if.rows(); }
        std::size_t n_v() const { return s_if.cols(); }
        std::vector<cplx> row(std::size_t r) const { return {s_if.row(r), s_if.row(r) + s_if.cols()}; }
    };

    // rank is 1-based.
    inline RangeChannelMatrix extract_range_channel(const RangeDopplerCube &rd, const DopplerSelection &sel, int rank = 1)
    {
        if (rank < 1 || static_cast<std::size_t>(rank) > sel.k())
            throw DomainError("extract_range_channel: rank " + std::to_string(rank) + " outside [1, " + std::to_string(sel.k()) + "]");
        if (sel.n_range() != rd.n_range())
            throw ShapeError("extract_range_channel: selection and cube disagree on N_r");
        const std::size_t n_r = rd.n_range(), n_v = rd.n_channels();
        RangeChannelMatrix out{Grid2<cplx>(n_r, n_v), std::vector<int>(n_r), rank, rd.array.positions()};
        const auto &order = rd.array.sorted_order();
        for (std::size_t r = 0; r < n_r; ++r)
        {
            const int d = sel.bin(r, rank);
            if (d < 0 || static_cast<std::size_t>(d) >= rd.n_doppler())
                throw DomainError("extract_range_channel: Doppler bin out of range");
            out.doppler_bin[r] = d;
            for (std::size_t j = 0; j < n_v; ++j)
                out.s_if(r, j) = rd.data(order[j], static_cast<std::size_t>(d), r);
        }
        return out;
    }
}

#endif
