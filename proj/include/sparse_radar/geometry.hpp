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

#ifndef SPARSE_RADAR_GEOMETRY_HPP
#define SPARSE_RADAR_GEOMETRY_HPP

#include "sparse_radar/common.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace sparse_radar
{
    // FMCW waveform and array constants. Defaults are the AVR-QDM-110 setup;
    // n_samples is not a hardware figure but the fast-time length that yields
    // 630 one-sided range bins.
    struct RadarParams
    {
        double carrier_hz = 77e9;
        double bandwidth_hz = 1e9;
        int n_chirp = 128;
        double chirp_s = 80.6e-6;
        int n_tx = 3;
        int n_rx = 16;
        double d_tx_m = 2e-3;
        double d_rx_m = 6e-3;
        int n_samples = 1260;

        double wavelength() const { return kSpeedOfLight / carrier_hz; }
        double chirp_rate() const { return bandwidth_hz / chirp_s; }     // mu [Hz/s]
        double sample_rate() const { return n_samples / chirp_s; }       // fast-time ADC rate [Hz]
        double range_resolution() const { return kSpeedOfLight / (2.0 * bandwidth_hz); }
        int n_range_bins() const { return n_samples / 2; }                // one-sided spectrum
        double max_range() const { return n_range_bins() * range_resolution(); }
        double max_velocity() const { return wavelength() / (4.0 * chirp_s); } // unambiguous |v_r|

        void validate() const
        {
            if (!(carrier_hz > 0.0) || !std::isfinite(carrier_hz))
                throw ConfigError("RadarParams: carrier frequency must be positive");
            if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz))
                throw ConfigError("RadarParams: bandwidth must be positive");
            if (!(chirp_s > 0.0) || !std::isfinite(chirp_s))
                throw ConfigError("RadarParams: chirp duration must be positive");
            if (n_chirp < 1 || n_tx < 1 || n_rx < 1 || n_samples < 2)
                throw ConfigError("RadarParams: counts must be >= 1 (n_samples >= 2)");
            if (n_samples % 2 != 0)
                throw ConfigError("RadarParams: n_samples must be even");
        }
    };

    NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RadarParams, carrier_hz, bandwidth_hz, n_chirp, chirp_s,
                                                    n_tx, n_rx, d_tx_m, d_rx_m, n_samples)

    // One MIMO channel: a (TX, RX) pair and its virtual coordinate tx + rx.
    struct VirtualChannel
    {
        int tx = 0;
        int rx = 0;
        double tx_pos = 0.0;
        double rx_pos = 0.0;
        double position() const { return tx_pos + rx_pos; }
    };

    // Linear MIMO array along one axis. Channels are stored TX-major over the kept
    // RX elements; positions() gives the virtual coordinates sorted ascending.
    class VirtualArray
    {
    public:
        VirtualArray() = default;

        const std::vector<double> &tx_positions() const { return tx_; }
        const std::vector<double> &rx_positions() const { return rx_; }
        const std::vector<int> &kept_rx() const { return kept_; }
        const std::vector<VirtualChannel> &channels() const { return channels_; }
        std::size_t size() const { return channels_.size(); } // N_v

        // Storage index of the i-th element in ascending position order.
        const std::vector<std::size_t> &sorted_order() const { return order_; }
        const std::vector<double> &positions() const { return sorted_pos_; }

        double aperture() const { return sorted_pos_.empty() ? 0.0 : sorted_pos_.back() - sorted_pos_.front(); }

        bool operator==(const VirtualArray &o) const
        {
            return tx_ == o.tx_ && rx_ == o.rx_ && kept_ == o.kept_;
        }

        // Reorders storage channels. Used to model hardware that delivers channels
        // in another order; the sorted view is unchanged.
        VirtualArray with_storage_order(std::span<const std::size_t> perm) const
        {
            if (perm.size() != channels_.size())
                throw ShapeError("with_storage_order: permutation length mismatch");
            VirtualArray out = *this;
            for (std::size_t i = 0; i < perm.size(); ++i)
                out.channels_[i] = channels_.at(perm[i]);
            out.reindex();
            return out;
        }

        friend VirtualArray build_virtual_array(std::span<const double>, std::span<const double>);
        friend VirtualArray thin_array(const VirtualArray &, std::span<const int>);

    private:
        void reindex()
        {
            order_.resize(channels_.size());
            std::iota(order_.begin(), order_.end(), std::size_t{0});
            std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b)
                             { return channels_[a].position() < channels_[b].position(); });
            sorted_pos_.resize(channels_.size());
            for (std::size_t i = 0; i < order_.size(); ++i)
                sorted_pos_[i] = channels_[order_[i]].position();
        }

        void rebuild()
        {
            channels_.clear();
            for (std::size_t t = 0; t < tx_.size(); ++t)
                for (int r : kept_)
                    channels_.push_back({static_cast<int>(t), r, tx_[t], rx_[static_cast<std::size_t>(r)]});
            reindex();
        }

        std::vector<double> tx_, rx_;
        std::vector<int> kept_;
        std::vector<VirtualChannel> channels_;
        std::vector<std::size_t> order_;
        std::vector<double> sorted_pos_;
    };

    // All pairwise sums tx_i + rx_j (MIMO convolution). Duplicate positions stay
    // distinct channels.
    inline VirtualArray build_virtual_array(std::span<const double> tx_positions, std::span<const double> rx_positions)
    {
        if (tx_positions.empty() || rx_positions.empty())
            throw GeometryError("build_virtual_array: TX and RX lists must be non-empty");
        for (double v : tx_positions)
            if (!std::isfinite(v))
                throw GeometryError("build_virtual_array: non-finite TX coordinate");
        for (double v : rx_positions)
            if (!std::isfinite(v))
                throw GeometryError("build_virtual_array: non-finite RX coordinate");
        VirtualArray a;
        a.tx_.assign(tx_positions.begin(), tx_positions.end());
        a.rx_.assign(rx_positions.begin(), rx_positions.end());
        a.kept_.resize(a.rx_.size());
        std::iota(a.kept_.begin(), a.kept_.end(), 0);
        a.rebuild();
        return a;
    }

    // Rebuilds the array from the retained RX indices (into the full physical RX list).
    inline VirtualArray thin_array(const VirtualArray &array, std::span<const int> keep_rx)
    {
        if (keep_rx.empty())
            throw GeometryError("thin_array: keep set must be non-empty");
        std::vector<int> keep(keep_rx.begin(), keep_rx.end());
        std::sort(keep.begin(), keep.end());
        keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
        for (int r : keep)
            if (r < 0 || r >= static_cast<int>(array.rx_.size()))
                throw GeometryError("thin_array: RX index " + std::to_string(r) + " out of range");
        VirtualArray out = array;
        out.kept_ = std::move(keep);
        out.rebuild();
        return out;
    }

    // 3-dB beamwidth in degrees, theta_3 = 51.05 lambda / D.
    inline double resolution_3db(double aperture_length, double lambda)
    {
        if (!(aperture_length > 0.0))
            throw DomainError("resolution_3db: aperture length must be positive");
        if (!(lambda > 0.0))
            throw DomainError("resolution_3db: wavelength must be positive");
        return 51.05 * lambda / aperture_length;
    }

    // ---- named configurations -------------------------------------------------

    inline std::vector<double> centred_line(int n, double pitch)
    {
        std::vector<double> p(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            p[static_cast<std::size_t>(i)] = (i - 0.5 * (n - 1)) * pitch;
        return p;
    }

    // Full 3 TX x 16 RX MIMO array (48 virtual elements), centred on the origin.
    inline VirtualArray full_mimo_array(const RadarParams &p = {})
    {
        const auto tx = centred_line(p.n_tx, p.d_tx_m);
        const auto rx = centred_line(p.n_rx, p.d_rx_m);
        return build_virtual_array(tx, rx);
    }

    inline const std::vector<int> &six_rx_keep_set()
    {
        static const std::vector<int> keep{0, 1, 5, 10, 14, 15};
        return keep;
    }
    inline const std::vector<int> &four_rx_keep_set()
    {
        static const std::vector<int> keep{0, 4, 11, 15};
        return keep;
    }

    // Enhanced ground-truth radar: one TX at the centre and a lambda/2 RX ULA.
    inline VirtualArray enhanced_ula(const RadarParams &p = {}, int n_rx = 256)
    {
        const double tx[] = {0.0};
        const auto rx = centred_line(n_rx, 0.5 * p.wavelength());
        return build_virtual_array(tx, rx);
    }

    // "full"/"fig4a", "six_rx"/"fig4b", "four_rx"/"fig4c", "enhanced".
    inline VirtualArray array_by_name(const std::string &name, const RadarParams &p = {})
    {
        if (name == "full" || name == "fig4a")
            return full_mimo_array(p);
        if (name == "six_rx" || name == "fig4b")
            return thin_array(full_mimo_array(p), six_rx_keep_set());
        if (name == "four_rx" || name == "fig4c")
            return thin_array(full_mimo_array(p), four_rx_keep_set());
        if (name == "enhanced")
            return enhanced_ula(p);
        throw ConfigError("unknown array name '" + name + "' (expected full|fig4a|six_rx|fig4b|four_rx|fig4c|enhanced)");
    }

    inline void to_json(nlohmann::json &j, const VirtualArray &a)
    {
        j = nlohmann::json{{"tx_positions_m", a.tx_positions()},
                           {"rx_positions_m", a.rx_positions()},
                           {"kept_rx", a.kept_rx()}};
    }

    inline void from_json(const nlohmann::json &j, VirtualArray &a)
    {
        const auto tx = j.at("tx_positions_m").get<std::vector<double>>();
        const auto rx = j.at("rx_positions_m").get<std::vector<double>>();
        a = build_virtual_array(tx, rx);
        if (j.contains("kept_rx"))
        {
            const auto keep = j.at("kept_rx").get<std::vector<int>>();
            if (keep.size() != rx.size())
                a = thin_array(a, keep);
        }
    }

    // ---- angle grid ------------------------------------------------------------

    // Beam-steering hypotheses in the sine domain u = sin(theta).
    class AngleGrid
    {
    public:
        AngleGrid() = default;
        explicit AngleGrid(std::vector<double> u) : u_(std::move(u)) { validate(); }

        static AngleGrid uniform(std::size_t n = 450, double u_min = -1.0, double u_max = 1.0)
        {
            if (n < 2)
                throw ConfigError("AngleGrid: need at least two bins");
            std::vector<double> u(n);
            for (std::size_t i = 0; i < n; ++i)
                u[i] = u_min + (u_max - u_min) * static_cast<double>(i) / static_cast<double>(n - 1);
            u.back() = u_max;
            return AngleGrid(std::move(u));
        }

        const std::vector<double> &u() const { return u_; }
        std::size_t size() const { return u_.size(); }
        double operator[](std::size_t i) const { return u_[i]; }
        double step() const { return u_.size() > 1 ? (u_.back() - u_.front()) / static_cast<double>(u_.size() - 1) : 0.0; }
        double degrees(std::size_t i) const { return rad2deg(std::asin(u_[i])); }

        // Index of the grid point closest to u.
        std::size_t nearest(double u) const
        {
            auto it = std::lower_bound(u_.begin(), u_.end(), u);
            if (it == u_.end())
                return u_.size() - 1;
            std::size_t i = static_cast<std::size_t>(it - u_.begin());
            if (i > 0 && std::abs(u_[i - 1] - u) <= std::abs(u_[i] - u))
                --i;
            return i;
        }

        bool operator==(const AngleGrid &) const = default;

    private:
        void validate() const
        {
            for (std::size_t i = 0; i < u_.size(); ++i)
            {
                if (!(std::abs(u_[i]) <= 1.0))
                    throw ConfigError("AngleGrid: |u| must be <= 1");
                if (i > 0 && !(u_[i] > u_[i - 1]))
                    throw ConfigError("AngleGrid: values must be strictly increasing");
            }
        }

        std::vector<double> u_;
    };

    inline void to_json(nlohmann::json &j, const AngleGrid &g) { j = nlohmann::json{{"u", g.u()}}; }
    inline void from_json(const nlohmann::json &j, AngleGrid &g)
    {
        if (j.contains("u"))
            g = AngleGrid(j.at("u").get<std::vector<double>>());
        else
            g = AngleGrid::uniform(j.value("n_theta", std::size_t{450}), j.value("u_min", -1.0), j.value("u_max", 1.0));
    }
}

#endif
