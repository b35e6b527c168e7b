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

#ifndef SPARSE_RADAR_GROUND_TRUTH_HPP
#define SPARSE_RADAR_GROUND_TRUTH_HPP

#include "sparse_radar/common.hpp"
#include "sparse_radar/dsp.hpp"
#include "sparse_radar/geometry.hpp"
#include "sparse_radar/rd_processing.hpp"
#include "sparse_radar/synthesis.hpp"

#include <json.hpp>

#include <cmath>
#include <map>
#include <optional>
#include <vector>

namespace sparse_radar
{
    // Polar pixel grid: rows are ranges, columns azimuth sines.
    struct ImageGrid
    {
        std::vector<double> ranges_m;
        AngleGrid angles;

        std::size_t n_range() const { return ranges_m.size(); }
        std::size_t n_theta() const { return angles.size(); }

        // One row per range bin, r_i = i * c / 2B.
        static ImageGrid range_bins(const RadarParams &p, AngleGrid angles)
        {
            ImageGrid g{std::vector<double>(static_cast<std::size_t>(p.n_range_bins())), std::move(angles)};
            for (std::size_t i = 0; i < g.ranges_m.size(); ++i)
                g.ranges_m[i] = static_cast<double>(i) * p.range_resolution();
            return g;
        }
    };

    struct GroundTruthImage
    {
        Grid2<double> pixels; // N_r x N_theta, non-negative
        std::vector<double> ranges_m;
        AngleGrid angles;
    };

    struct MatchedFilterOptions
    {
        WindowSpec window;                         // fast-/slow-time windows
        WindowKind aperture = WindowKind::rect;    // taper over the 256 channels
        int oversample = 8;                        // range-profile interpolation factor
        double floor = 0.0;                        // pixels below floor * max are zeroed
        int doppler_k = 1;
        int doppler_rank = 1;
        double doppler_min_rel_prominence = 0.1;
    };

    inline void to_json(nlohmann::json &j, const MatchedFilterOptions &o)
    {
        j = nlohmann::json{{"window", o.window}, {"aperture", to_string(o.aperture)}, {"oversample", o.oversample},
                           {"floor", o.floor}, {"doppler_k", o.doppler_k}, {"doppler_rank", o.doppler_rank},
                           {"doppler_min_rel_prominence", o.doppler_min_rel_prominence}};
    }
    inline void from_json(const nlohmann::json &j, MatchedFilterOptions &o)
    {
        const MatchedFilterOptions d;
        o.window = j.value("window", d.window);
        o.aperture = window_from_string(j.value("aperture", to_string(d.aperture)));
        o.oversample = j.value("oversample", d.oversample);
        o.floor = j.value("floor", d.floor);
        o.doppler_k = j.value("doppler_k", d.doppler_k);
        o.doppler_rank = j.value("doppler_rank", d.doppler_rank);
        o.doppler_min_rel_prominence = j.value("doppler_min_rel_prominence", d.doppler_min_rel_prominence);
    }

    // Backprojection of range-compressed data. For every channel the selected
    // Doppler bin is formed by a direct DFT over chirps, the fast-time signal is
    // turned into an oversampled range profile, and each pixel picks up the
    // profile at its exact two-way delay with the near-field carrier phase
    // removed. The output is in target-amplitude units.
    //
    // The Doppler bin of a pixel is the one selected for its range bin, taken
    // from `selection` when given and from the cube's own mean magnitude image
    // otherwise.
    inline GroundTruthImage matched_filter_image(const RadarParams &params, const VirtualArray &enhanced_array,
                                                 const RadarCube &cube, const ImageGrid &grid,
                                                 const MatchedFilterOptions &opt = {},
                                                 const DopplerSelection *selection = nullptr)
    {
        cube.validate();
        if (!(cube.array == enhanced_array))
            throw ShapeError("matched_filter_image: cube was not recorded with the given array");
        if (cube.params.n_samples != params.n_samples || cube.params.n_chirp != params.n_chirp)
            throw ShapeError("matched_filter_image: cube and parameters disagree on dimensions");
        if (grid.n_range() == 0 || grid.n_theta() == 0)
            throw ShapeError("matched_filter_image: empty image grid");
        if (opt.oversample < 1)
            throw ConfigError("matched_filter_image: oversample must be >= 1");
        for (double r : grid.ranges_m)
            if (!(r >= 0.0) || !std::isfinite(r))
                throw ShapeError("matched_filter_image: ranges must be finite and non-negative");

        const std::size_t n_ch = cube.n_channels(), n_chirp = cube.n_chirp(), n_s = cube.n_samples();
        const std::size_t n_rb = static_cast<std::size_t>(params.n_range_bins());
        const std::size_t n_pr = grid.n_range(), n_pt = grid.n_theta();
        const std::size_t os = static_cast<std::size_t>(opt.oversample), n_fft = os * n_s;

        std::optional<DopplerSelection> own;
        if (!selection)
        {
            own = select_doppler_bins(mean_magnitude(cube, opt.window), opt.doppler_k, opt.doppler_min_rel_prominence);
            selection = &*own;
        }
        if (selection->n_range() != n_rb)
            throw ShapeError("matched_filter_image: Doppler selection has wrong number of range bins");
        if (opt.doppler_rank < 1 || static_cast<std::size_t>(opt.doppler_rank) > selection->k())
            throw DomainError("matched_filter_image: Doppler rank outside the selection");

        // Doppler bin per image row, and the distinct bins needed.
        std::vector<int> row_bin(n_pr);
        std::map<int, std::size_t> slot;
        for (std::size_t i = 0; i < n_pr; ++i)
        {
            const auto rb = static_cast<std::size_t>(std::min<double>(std::round(grid.ranges_m[i] / params.range_resolution()), static_cast<double>(n_rb - 1)));
            row_bin[i] = selection->bin(rb, opt.doppler_rank);
            slot.emplace(row_bin[i], 0);
        }
        std::vector<int> bins;
        for (auto &[d, s] : slot)
        {
            s = bins.size();
            bins.push_back(d);
        }
        std::vector<std::size_t> row_slot(n_pr);
        for (std::size_t i = 0; i < n_pr; ++i)
            row_slot[i] = slot.at(row_bin[i]);

        // Slow-time twiddles (window folded in) for each needed bin.
        const std::vector<double> w_d = make_window(opt.window.doppler, n_chirp);
        const std::vector<double> w_r = make_window(opt.window.range, n_s);
        std::vector<std::vector<cplx>> twiddle(bins.size(), std::vector<cplx>(n_chirp));
        for (std::size_t b = 0; b < bins.size(); ++b)
        {
            const double f = static_cast<double>(bins[b]) - static_cast<double>(n_chirp / 2);
            for (std::size_t c = 0; c < n_chirp; ++c)
            {
                double cyc = f * static_cast<double>(c) / static_cast<double>(n_chirp);
                cyc -= std::floor(cyc);
                twiddle[b][c] = w_d[c] * std::polar(1.0, -2.0 * kPi * cyc);
            }
        }

        // Centre-referenced range profile: Y(kappa) = exp(2 pi j kappa c0 / N) X(kappa).
        const double c0 = 0.5 * static_cast<double>(n_s - 1);
        std::vector<cplx> centre(n_fft);
        for (std::size_t j = 0; j < n_fft; ++j)
        {
            double cyc = static_cast<double>(j) / static_cast<double>(os) * c0 / static_cast<double>(n_s);
            cyc -= std::floor(cyc);
            centre[j] = std::polar(1.0, 2.0 * kPi * cyc);
        }

        std::vector<Vec2> pix(n_pr * n_pt);
        for (std::size_t i = 0; i < n_pr; ++i)
            for (std::size_t j = 0; j < n_pt; ++j)
                pix[i * n_pt + j] = polar_point(grid.ranges_m[i], grid.angles[j]);

        std::vector<double> storage_pos(n_ch);
        for (std::size_t m = 0; m < n_ch; ++m)
            storage_pos[m] = cube.array.channels()[m].position();
        const std::vector<double> taper = positional_taper(opt.aperture, storage_pos);

        const double bw = params.bandwidth_hz;
        const double phase_rate = params.carrier_hz + bw * c0 / static_cast<double>(n_s); // cycles per second of delay
        const double kappa_scale = bw * static_cast<double>(os);

        Grid2<cplx> acc(n_pr, n_pt);
        Fft fft;
        std::vector<cplx> z(n_s), padded(n_fft), spec;
        std::vector<std::vector<cplx>> profile(bins.size(), std::vector<cplx>(n_fft));
        double taper_sum = 0.0;

        for (std::size_t m = 0; m < n_ch; ++m)
        {
            const double a = taper[m];
            taper_sum += a;
            if (a == 0.0)
                continue;
            const cplxf *ch = cube.data.slice(m, 0);
            for (std::size_t b = 0; b < bins.size(); ++b)
            {
                std::fill(z.begin(), z.end(), cplx{});
                for (std::size_t c = 0; c < n_chirp; ++c)
                {
                    const cplxf *s = ch + c * n_s;
                    const cplx t = twiddle[b][c];
                    for (std::size_t n = 0; n < n_s; ++n)
                        z[n] += t * cplx(s[n].real(), s[n].imag());
                }
                std::fill(padded.begin(), padded.end(), cplx{});
                for (std::size_t n = 0; n < n_s; ++n)
                    padded[n] = z[n] * w_r[n];
                fft.forward(spec, padded);
                for (std::size_t j = 0; j < n_fft; ++j)
                    profile[b][j] = a * spec[j] * centre[j];
            }

            const auto &chan = cube.array.channels()[m];
            const Vec2 e_tx = element_point(chan.tx_pos), e_rx = element_point(chan.rx_pos);
            parallel_for(n_pr, [&](std::size_t i)
                         {
                const std::vector<cplx> &prof = profile[row_slot[i]];
                cplx *out = acc.row(i);
                const Vec2 *p = pix.data() + i * n_pt;
                for (std::size_t j = 0; j < n_pt; ++j)
                {
                    const double tau = ((p[j] - e_tx).norm() + (p[j] - e_rx).norm()) / kSpeedOfLight;
                    const double k = tau * kappa_scale;
                    const double k0 = std::floor(k);
                    if (k0 < 0.0 || k0 + 1.0 >= static_cast<double>(n_fft))
                        continue;
                    const auto i0 = static_cast<std::size_t>(k0);
                    const double f = k - k0;
                    const cplx v = prof[i0] * (1.0 - f) + prof[i0 + 1] * f;
                    double cyc = tau * phase_rate;
                    cyc -= std::floor(cyc);
                    out[j] += v * std::polar(1.0, -2.0 * kPi * cyc);
                } });
        }

        double wsum_r = 0.0, wsum_d = 0.0;
        for (double v : w_r)
            wsum_r += v;
        for (double v : w_d)
            wsum_d += v;
        const double norm = 1.0 / (wsum_r * wsum_d * std::max(taper_sum, 1e-300));

        GroundTruthImage img{Grid2<double>(n_pr, n_pt), grid.ranges_m, grid.angles};
        double peak = 0.0;
        for (std::size_t i = 0; i < acc.size(); ++i)
        {
            const double v = std::abs(acc.data()[i]) * norm;
            if (!std::isfinite(v))
                throw NumericError("matched_filter_image: non-finite pixel");
            img.pixels.data()[i] = v;
            peak = std::max(peak, v);
        }
        if (opt.floor > 0.0)
            for (double &v : img.pixels.data())
                if (v < opt.floor * peak)
                    v = 0.0;
        return img;
    }
}

#endif
