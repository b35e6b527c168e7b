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

#ifndef SPARSE_RADAR_SYNTHESIS_HPP
#define SPARSE_RADAR_SYNTHESIS_HPP

#include "sparse_radar/common.hpp"
#include "sparse_radar/geometry.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace sparse_radar
{
    // Scene frame: y is boresight, x is cross-range; the azimuth sine of a point
    // (x, y) is x / |(x, y)|.
    struct Vec2
    {
        double x = 0.0;
        double y = 0.0;

        Vec2 operator+(const Vec2 &o) const { return {x + o.x, y + o.y}; }
        Vec2 operator-(const Vec2 &o) const { return {x - o.x, y - o.y}; }
        Vec2 operator*(double s) const { return {x * s, y * s}; }
        double norm() const { return std::hypot(x, y); }
        bool operator==(const Vec2 &) const = default;
    };

    inline Vec2 polar_point(double range, double u) { return {range * u, range * std::sqrt(std::max(0.0, 1.0 - u * u))}; }

    // Array coordinate a sits at scene point (-a, 0). With this mounting the
    // IF phase of a target at azimuth sine u grows as +2 pi a u / lambda, which
    // is what the -j steering phase of the beamformer compensates.
    inline Vec2 element_point(double array_coordinate) { return {-array_coordinate, 0.0}; }

    struct PointTarget
    {
        Vec2 position;
        Vec2 velocity;
        cplx amplitude{1.0, 0.0};
    };

    struct Scene
    {
        std::vector<PointTarget> targets;
        Vec2 sensor_velocity;
    };

    inline void to_json(nlohmann::json &j, const Vec2 &v) { j = nlohmann::json::array({v.x, v.y}); }
    inline void from_json(const nlohmann::json &j, Vec2 &v)
    {
        v.x = j.at(0).get<double>();
        v.y = j.at(1).get<double>();
    }

    inline void to_json(nlohmann::json &j, const PointTarget &t)
    {
        j = nlohmann::json{{"position_m", t.position},
                           {"velocity_mps", t.velocity},
                           {"amplitude", {t.amplitude.real(), t.amplitude.imag()}}};
    }
    inline void from_json(const nlohmann::json &j, PointTarget &t)
    {
        t.position = j.at("position_m").get<Vec2>();
        t.velocity = j.value("velocity_mps", Vec2{});
        if (j.contains("amplitude"))
        {
            const auto &a = j.at("amplitude");
            t.amplitude = a.is_array() ? cplx(a.at(0).get<double>(), a.at(1).get<double>()) : cplx(a.get<double>(), 0.0);
        }
    }

    inline void to_json(nlohmann::json &j, const Scene &s)
    {
        j = nlohmann::json{{"targets", s.targets}, {"sensor_velocity_mps", s.sensor_velocity}};
    }
    inline void from_json(const nlohmann::json &j, Scene &s)
    {
        s.targets = j.at("targets").get<std::vector<PointTarget>>();
        s.sensor_velocity = j.value("sensor_velocity_mps", Vec2{});
    }

    // ---- element pattern ------------------------------------------------------

    struct CosinePower
    {
        double q = 2.0;
    };

    // Gain table over azimuth (radians, ascending), linearly interpolated and
    // clamped at the ends.
    struct PatternTable
    {
        std::vector<double> theta_rad;
        std::vector<double> gain;
    };

    using PatternSpec = std::variant<CosinePower, PatternTable>;

    inline double apply_element_pattern(double theta, const PatternSpec &pattern)
    {
        if (const auto *c = std::get_if<CosinePower>(&pattern))
        {
            if (c->q == 0.0)
                return 1.0;
            const double ct = std::cos(theta);
            return ct <= 0.0 ? 0.0 : std::pow(ct, c->q);
        }
        const auto &t = std::get<PatternTable>(pattern);
        if (t.theta_rad.empty() || t.theta_rad.size() != t.gain.size())
            throw ConfigError("PatternTable: angle and gain lists must be non-empty and equal length");
        if (theta <= t.theta_rad.front())
            return std::clamp(t.gain.front(), 0.0, 1.0);
        if (theta >= t.theta_rad.back())
            return std::clamp(t.gain.back(), 0.0, 1.0);
        const auto it = std::upper_bound(t.theta_rad.begin(), t.theta_rad.end(), theta);
        const std::size_t i = static_cast<std::size_t>(it - t.theta_rad.begin());
        const double f = (theta - t.theta_rad[i - 1]) / (t.theta_rad[i] - t.theta_rad[i - 1]);
        return std::clamp(t.gain[i - 1] + f * (t.gain[i] - t.gain[i - 1]), 0.0, 1.0);
    }

    inline void to_json(nlohmann::json &j, const PatternSpec &p)
    {
        if (const auto *c = std::get_if<CosinePower>(&p))
            j = nlohmann::json{{"kind", "cos_power"}, {"q", c->q}};
        else
        {
            const auto &t = std::get<PatternTable>(p);
            j = nlohmann::json{{"kind", "table"}, {"theta_rad", t.theta_rad}, {"gain", t.gain}};
        }
    }
    inline void from_json(const nlohmann::json &j, PatternSpec &p)
    {
        const std::string kind = j.value("kind", "cos_power");
        if (kind == "cos_power")
            p = CosinePower{j.value("q", 2.0)};
        else if (kind == "table")
            p = PatternTable{j.at("theta_rad").get<std::vector<double>>(), j.at("gain").get<std::vector<double>>()};
        else
            throw ConfigError("unknown pattern kind '" + kind + "'");
    }

    // ---- IF simulation --------------------------------------------------------

    // Complex white Gaussian noise; SNR is the weakest scatterer's per-sample
    // power |A_k|^2 over the noise power.
    struct NoiseSpec
    {
        bool enabled = false;
        double snr_db = 20.0;
    };
    NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(NoiseSpec, enabled, snr_db)

    // IF samples indexed (storage channel, chirp, fast-time sample).
    struct RadarCube
    {
        Tensor3<cplxf> data;
        RadarParams params;
        VirtualArray array;

        std::size_t n_channels() const { return data.dim0(); }
        std::size_t n_chirp() const { return data.dim1(); }
        std::size_t n_samples() const { return data.dim2(); }

        void validate() const
        {
            if (data.dim0() != array.size() || data.dim1() != static_cast<std::size_t>(params.n_chirp) ||
                data.dim2() != static_cast<std::size_t>(params.n_samples))
                throw ShapeError("RadarCube: data shape does not match (N_v, N_chirp, N_samples)");
        }
    };

    namespace detail
    {
        // Independent stream per (seed, chirp, purpose).
        inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t tag)
        {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                              static_cast<std::uint32_t>(tag)};
            return std::mt19937_64(seq);
        }

        inline double azimuth_from(const Vec2 &element, const Vec2 &target)
        {
            const Vec2 d = target - element;
            return std::atan2(d.x, d.y);
        }
    }

    inline double noise_power_for(const Scene &scene, const NoiseSpec &noise)
    {
        double weakest = 1.0;
        if (!scene.targets.empty())
        {
            weakest = std::norm(scene.targets.front().amplitude);
            for (const auto &t : scene.targets)
                weakest = std::min(weakest, std::norm(t.amplitude));
        }
        return weakest / std::pow(10.0, noise.snr_db / 10.0);
    }

    // s(tx, rx, t) = sum_k A_k g_k exp(2 pi j (mu t tau_k + f_c tau_k)) with exact
    // spherical two-way delays. Positions are frozen within a chirp and advance
    // by velocity * T_c between chirps.
    inline RadarCube simulate_if_cube(const RadarParams &params, const VirtualArray &array, const Scene &scene,
                                      const NoiseSpec &noise, std::uint64_t seed,
                                      const PatternSpec &pattern = CosinePower{2.0})
    {
        params.validate();
        if (array.size() == 0)
            throw GeometryError("simulate_if_cube: empty array");
        const double r_max = params.max_range();
        for (const auto &t : scene.targets)
        {
            if (!(std::abs(t.amplitude) > 0.0) || !std::isfinite(std::abs(t.amplitude)))
                throw ConfigError("simulate_if_cube: target amplitude must be finite and non-zero");
            if (!std::isfinite(t.position.x) || !std::isfinite(t.position.y) || !std::isfinite(t.velocity.x) ||
                !std::isfinite(t.velocity.y))
                throw ConfigError("simulate_if_cube: non-finite target state");
            if (t.position.norm() >= r_max)
                throw ConfigError("simulate_if_cube: target beyond the unambiguous range of " + std::to_string(r_max) + " m");
        }
        if (noise.enabled && !std::isfinite(noise.snr_db))
            throw ConfigError("simulate_if_cube: SNR must be finite");

        const std::size_t n_ch = array.size();
        const std::size_t n_chirp = static_cast<std::size_t>(params.n_chirp);
        const std::size_t n_s = static_cast<std::size_t>(params.n_samples);
        const double mu = params.chirp_rate();
        const double fc = params.carrier_hz;
        const double dt = 1.0 / params.sample_rate();
        const double sigma = noise.enabled ? std::sqrt(noise_power_for(scene, noise) / 2.0) : 0.0;

        RadarCube cube{Tensor3<cplxf>(n_ch, n_chirp, n_s), params, array};

        parallel_for(n_chirp, [&](std::size_t c)
                     {
            const double t_slow = static_cast<double>(c) * params.chirp_s;
            const Vec2 shift = scene.sensor_velocity * t_slow;
            std::vector<cplx> acc(n_s);
            std::normal_distribution<double> gauss(0.0, 1.0);
            auto rng = detail::make_stream(seed, c, 0x4e4f4953u);
            for (std::size_t m = 0; m < n_ch; ++m)
            {
                const auto &ch = array.channels()[m];
                const Vec2 e_tx = element_point(ch.tx_pos) + shift;
                const Vec2 e_rx = element_point(ch.rx_pos) + shift;
                std::fill(acc.begin(), acc.end(), cplx{});
                for (const auto &t : scene.targets)
                {
                    const Vec2 p = t.position + t.velocity * t_slow;
                    const double d_tx = (p - e_tx).norm(), d_rx = (p - e_rx).norm();
                    if (d_tx < 1e-9 || d_rx < 1e-9)
                        throw NumericError("simulate_if_cube: target at zero range (singular geometry)");
                    const double tau = (d_tx + d_rx) / kSpeedOfLight;
                    const double gain = std::sqrt(apply_element_pattern(detail::azimuth_from(e_tx, p), pattern) *
                                                  apply_element_pattern(detail::azimuth_from(e_rx, p), pattern));
                    const cplx a = t.amplitude * gain;
                    if (a == cplx{})
                        continue;
                    const double carrier_cycles = fc * tau;
                    const double beat = mu * tau; // Hz
                    for (std::size_t n = 0; n < n_s; ++n)
                    {
                        double cycles = beat * (static_cast<double>(n) * dt) + carrier_cycles;
                        cycles -= std::floor(cycles);
                        acc[n] += a * std::polar(1.0, 2.0 * kPi * cycles);
                    }
                }
                cplxf *out = cube.data.slice(m, c);
                for (std::size_t n = 0; n < n_s; ++n)
                {
                    cplx v = acc[n];
                    if (noise.enabled)
                    {
                        const double re = gauss(rng), im = gauss(rng);
                        v += cplx(sigma * re, sigma * im);
                    }
                    out[n] = cplxf(static_cast<float>(v.real()), static_cast<float>(v.imag()));
                }
            } });
        return cube;
    }

    // ---- synthetic scene generation ------------------------------------------

    struct SceneGenConfig
    {
        int count_min = 1;
        int count_max = 3;
        double range_min_m = 2.0;
        double range_max_m = 8.0;
        double angle_min_deg = -60.0;
        double angle_max_deg = 60.0;
        double close_pair_probability = 0.5; // chance a further target joins an earlier one's range
        double separation_min_deg = 0.5;
        double separation_max_deg = 2.0;
        double amplitude_min = 0.5;
        double amplitude_max = 1.0;
        double target_speed_min = 0.0; // radial, random sign
        double target_speed_max = 0.0;
        double sensor_speed_min = 0.0; // random heading
        double sensor_speed_max = 0.0;
        int clutter_count_min = 0;
        int clutter_count_max = 0;
        double clutter_amplitude_max = 0.05;

        void validate() const
        {
            auto check = [](bool ok, const char *what)
            {
                if (!ok)
                    throw ConfigError(std::string("SceneGenConfig: ") + what);
            };
            check(count_min >= 1 && count_min <= count_max, "need 1 <= count_min <= count_max");
            check(range_min_m > 0.0 && range_min_m <= range_max_m, "need 0 < range_min <= range_max");
            check(angle_min_deg <= angle_max_deg && angle_min_deg >= -90.0 && angle_max_deg <= 90.0,
                  "need -90 <= angle_min <= angle_max <= 90");
            check(close_pair_probability >= 0.0 && close_pair_probability <= 1.0, "close-pair probability outside [0, 1]");
            check(separation_min_deg >= 0.0 && separation_min_deg <= separation_max_deg, "need 0 <= separation_min <= separation_max");
            check(amplitude_min > 0.0 && amplitude_min <= amplitude_max, "need 0 < amplitude_min <= amplitude_max");
            check(target_speed_min >= 0.0 && target_speed_min <= target_speed_max, "need 0 <= target_speed_min <= target_speed_max");
            check(sensor_speed_min >= 0.0 && sensor_speed_min <= sensor_speed_max, "need 0 <= sensor_speed_min <= sensor_speed_max");
            check(clutter_count_min >= 0 && clutter_count_min <= clutter_count_max, "need 0 <= clutter_count_min <= clutter_count_max");
            check(clutter_amplitude_max > 0.0, "clutter amplitude must be positive");
        }
    };

    NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SceneGenConfig, count_min, count_max, range_min_m, range_max_m,
                                                    angle_min_deg, angle_max_deg, close_pair_probability,
                                                    separation_min_deg, separation_max_deg, amplitude_min, amplitude_max,
                                                    target_speed_min, target_speed_max, sensor_speed_min, sensor_speed_max,
                                                    clutter_count_min, clutter_count_max, clutter_amplitude_max)

    // Random point-target scene. Targets beyond the first either join an earlier
    // target's range with a drawn angular gap or are placed independently.
    // Clutter points (if any) are appended after the targets.
    inline Scene generate_point_scene(const SceneGenConfig &cfg, std::uint64_t seed)
    {
        cfg.validate();
        std::mt19937_64 rng = detail::make_stream(seed, 0, 0x5343454eu);
        auto uni = [&](double a, double b)
        { return a == b ? a : std::uniform_real_distribution<double>(a, b)(rng); };
        auto uni_int = [&](int a, int b)
        { return std::uniform_int_distribution<int>(a, b)(rng); };
        auto coin = [&](double p)
        { return uni(0.0, 1.0) < p; };

        struct Placed
        {
            double range, angle_deg;
        };
        std::vector<Placed> placed;
        Scene scene;
        const int n = uni_int(cfg.count_min, cfg.count_max);

        auto make_target = [&](double range, double angle_deg)
        {
            PointTarget t;
            t.position = polar_point(range, std::sin(deg2rad(angle_deg)));
            t.amplitude = std::polar(uni(cfg.amplitude_min, cfg.amplitude_max), uni(-kPi, kPi));
            const double speed = uni(cfg.target_speed_min, cfg.target_speed_max) * (coin(0.5) ? 1.0 : -1.0);
            t.velocity = t.position * (speed / t.position.norm());
            return t;
        };

        for (int k = 0; k < n; ++k)
        {
            bool done = false;
            if (k > 0 && coin(cfg.close_pair_probability))
            {
                const Placed anchor = placed[static_cast<std::size_t>(uni_int(0, static_cast<int>(placed.size()) - 1))];
                for (int attempt = 0; attempt < 64 && !done; ++attempt)
                {
                    const double gap = uni(cfg.separation_min_deg, cfg.separation_max_deg);
                    const double angle = anchor.angle_deg + (coin(0.5) ? gap : -gap);
                    if (angle < cfg.angle_min_deg || angle > cfg.angle_max_deg)
                        continue;
                    scene.targets.push_back(make_target(anchor.range, angle));
                    placed.push_back({anchor.range, angle});
                    done = true;
                }
            }
            if (!done)
            {
                const double range = uni(cfg.range_min_m, cfg.range_max_m);
                const double angle = uni(cfg.angle_min_deg, cfg.angle_max_deg);
                scene.targets.push_back(make_target(range, angle));
                placed.push_back({range, angle});
            }
        }

        const int n_clutter = uni_int(cfg.clutter_count_min, cfg.clutter_count_max);
        for (int k = 0; k < n_clutter; ++k)
        {
            PointTarget t;
            t.position = polar_point(uni(cfg.range_min_m, cfg.range_max_m), std::sin(deg2rad(uni(cfg.angle_min_deg, cfg.angle_max_deg))));
            t.amplitude = std::polar(uni(0.1 * cfg.clutter_amplitude_max, cfg.clutter_amplitude_max), uni(-kPi, kPi));
            scene.targets.push_back(t);
        }

        const double sensor_speed = uni(cfg.sensor_speed_min, cfg.sensor_speed_max);
        const double heading = uni(-kPi, kPi);
        scene.sensor_velocity = {sensor_speed * std::sin(heading), sensor_speed * std::cos(heading)};
        return scene;
    }
}

#endif
