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

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "sparse_radar/ground_truth.hpp"
#include "sparse_radar/peaks.hpp"
#include "sparse_radar/psf.hpp"
#include "sparse_radar/synthesis.hpp"

#include <cstdlib>
#include <random>

using namespace sparse_radar;
using Catch::Approx;

namespace
{
    RadarParams small_params(int n_chirp = 4, int n_samples = 256)
    {
        RadarParams p;
        p.n_chirp = n_chirp;
        p.n_samples = n_samples;
        return p;
    }

    Scene one_target(Vec2 pos, cplx a = 1.0, Vec2 vel = {})
    {
        Scene s;
        s.targets.push_back({pos, vel, a});
        return s;
    }
}

TEST_CASE("synthesis - element pattern")
{
    CHECK(apply_element_pattern(0.0, CosinePower{2.0}) == 1.0);
    CHECK(apply_element_pattern(0.0, PatternTable{{-1.0, 0.0, 1.0}, {0.2, 1.0, 0.2}}) == 1.0);
    CHECK(apply_element_pattern(1.2, CosinePower{0.0}) == 1.0);
    CHECK(apply_element_pattern(deg2rad(60.0), CosinePower{2.0}) == Approx(0.25));
    CHECK(apply_element_pattern(deg2rad(-60.0), CosinePower{2.0}) == Approx(0.25));
    CHECK(apply_element_pattern(deg2rad(95.0), CosinePower{2.0}) == 0.0);
    CHECK(apply_element_pattern(0.5, PatternTable{{-1.0, 0.0, 1.0}, {0.2, 1.0, 0.2}}) == Approx(0.6));
}

TEST_CASE("synthesis - beat frequency lands in the expected range bin")
{
    const RadarParams p = small_params(2, 512);
    const auto arr = build_virtual_array(std::vector<double>{0.0}, std::vector<double>{0.0});
    for (double range : {3.0, 5.7, 11.13, 30.0})
    {
        const auto cube = simulate_if_cube(p, arr, one_target({0.0, range}), {}, 1);
        std::vector<cplx> x(cube.n_samples());
        for (std::size_t n = 0; n < x.size(); ++n)
            x[n] = cplx(cube.data(0, 0, n));
        // brute-force spectrum on a fine frequency grid
        double best_k = 0.0, best = 0.0;
        for (double k = 0.0; k < p.n_range_bins(); k += 0.05)
        {
            const double v = std::abs(oracle::dft_at(x, k));
            if (v > best)
            {
                best = v;
                best_k = k;
            }
        }
        const double expected = 2.0 * range * p.bandwidth_hz / kSpeedOfLight;
        CHECK(std::abs(best_k - expected) < 1.0);
    }
}

TEST_CASE("synthesis - co-located channels see identical signals")
{
    const RadarParams p = small_params();
    const auto arr = build_virtual_array(std::vector<double>{0.0}, std::vector<double>{0.0, 0.0, 0.0});
    const auto cube = simulate_if_cube(p, arr, one_target({0.4, 6.0}), {}, 1);
    for (std::size_t c = 0; c < cube.n_chirp(); ++c)
        for (std::size_t n = 0; n < cube.n_samples(); ++n)
        {
            CHECK(cube.data(1, c, n) == cube.data(0, c, n));
            CHECK(cube.data(2, c, n) == cube.data(0, c, n));
        }
}

TEST_CASE("synthesis - Doppler phase step per chirp")
{
    const RadarParams p = small_params(8, 256);
    const auto arr = build_virtual_array(std::vector<double>{0.0}, std::vector<double>{0.0});
    for (double v : {1.0, -3.0, 6.0})
    {
        const auto cube = simulate_if_cube(p, arr, one_target({0.0, 5.0}, 1.0, {0.0, v}), {}, 1, CosinePower{0.0});
        const double expected = 2.0 * kPi * p.carrier_hz * 2.0 * v * p.chirp_s / kSpeedOfLight;
        const cplx ratio = cplx(cube.data(0, 1, 0)) / cplx(cube.data(0, 0, 0));
        const double step = std::arg(ratio);
        CHECK(std::remainder(step - expected, 2.0 * kPi) == Approx(0.0).margin(1e-4));
        CHECK(std::abs(v) < p.max_velocity());
    }
}

TEST_CASE("synthesis - linearity and complex output")
{
    const RadarParams p = small_params();
    const auto arr = array_by_name("fig4c", p);
    Scene s;
    s.targets.push_back({{1.0, 4.0}, {}, {0.7, 0.2}});
    s.targets.push_back({{-2.0, 7.0}, {}, {0.3, -0.5}});
    Scene s2 = s;
    for (auto &t : s2.targets)
        t.amplitude *= 2.0;
    const auto a = simulate_if_cube(p, arr, s, {}, 3);
    const auto b = simulate_if_cube(p, arr, s2, {}, 3);
    double max_err = 0.0, max_imag = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
    {
        max_err = std::max(max_err, static_cast<double>(std::abs(b.data.data()[i] - 2.0f * a.data.data()[i])));
        max_imag = std::max(max_imag, static_cast<double>(std::abs(a.data.data()[i].imag())));
    }
    CHECK(max_err < 1e-5);
    CHECK(max_imag > 0.1);
}

TEST_CASE("synthesis - noise calibration")
{
    const RadarParams p = small_params(32, 1024);
    const auto arr = array_by_name("fig4c", p);
    const Scene s = one_target({0.5, 5.0}, std::polar(0.8, 0.3));
    const NoiseSpec noise{true, 10.0};
    const auto clean = simulate_if_cube(p, arr, s, {}, 11);
    const auto noisy = simulate_if_cube(p, arr, s, noise, 11);
    REQUIRE(clean.data.size() >= 100000);
    double power = 0.0;
    for (std::size_t i = 0; i < clean.data.size(); ++i)
        power += std::norm(cplx(noisy.data.data()[i]) - cplx(clean.data.data()[i]));
    power /= static_cast<double>(clean.data.size());
    const double expected = 0.64 / 10.0;
    CHECK(power == Approx(expected).epsilon(0.05));
}

TEST_CASE("synthesis - determinism and thread independence")
{
    const RadarParams p = small_params(16, 256);
    const auto arr = array_by_name("fig4b", p);
    const Scene s = generate_point_scene({}, 42);
    const NoiseSpec noise{true, 0.0};
    const auto a = simulate_if_cube(p, arr, s, noise, 5);
    const auto b = simulate_if_cube(p, arr, s, noise, 5);
    CHECK(a.data == b.data);
    setenv("SPARSE_RADAR_THREADS", "3", 1);
    const auto c = simulate_if_cube(p, arr, s, noise, 5);
    unsetenv("SPARSE_RADAR_THREADS");
    CHECK(a.data == c.data);
    const auto d = simulate_if_cube(p, arr, s, noise, 6);
    CHECK_FALSE(a.data == d.data);
}

TEST_CASE("synthesis - invalid scenes")
{
    const RadarParams p = small_params();
    const auto arr = array_by_name("fig4c", p);
    CHECK_THROWS_AS(simulate_if_cube(p, arr, one_target({0.0, 5.0}, 0.0), {}, 1), ConfigError);
    CHECK_THROWS_AS(simulate_if_cube(p, arr, one_target({0.0, 1000.0}), {}, 1), ConfigError);
    const auto single = build_virtual_array(std::vector<double>{0.0}, std::vector<double>{0.0});
    CHECK_THROWS_AS(simulate_if_cube(p, single, one_target({0.0, 0.0}), {}, 1), NumericError);
    CHECK_THROWS_AS(simulate_if_cube(p, arr, one_target({0.0, 5.0}), {true, INFINITY}, 1), ConfigError);
}

TEST_CASE("synthesis - scene generation")
{
    SceneGenConfig cfg;
    cfg.count_min = cfg.count_max = 1;
    for (std::uint64_t seed = 0; seed < 50; ++seed)
        CHECK(generate_point_scene(cfg, seed).targets.size() == 1);

    cfg.count_min = cfg.count_max = 2;
    cfg.close_pair_probability = 1.0;
    cfg.angle_min_deg = -40.0;
    cfg.angle_max_deg = 40.0;
    std::vector<int> hist(10, 0);
    for (std::uint64_t seed = 0; seed < 1000; ++seed)
    {
        const Scene s = generate_point_scene(cfg, seed);
        REQUIRE(s.targets.size() == 2);
        const double r0 = s.targets[0].position.norm(), r1 = s.targets[1].position.norm();
        CHECK(r0 == Approx(r1).epsilon(1e-12));
        const double a0 = rad2deg(std::asin(s.targets[0].position.x / r0));
        const double a1 = rad2deg(std::asin(s.targets[1].position.x / r1));
        const double gap = std::abs(a1 - a0);
        REQUIRE(gap >= 0.5 - 1e-9);
        REQUIRE(gap <= 2.0 + 1e-9);
        hist[std::min<std::size_t>(9, static_cast<std::size_t>((gap - 0.5) / 0.15))]++;
    }
    // each bin within 3 sigma of its multinomial expectation
    const double sigma = std::sqrt(1000 * 0.1 * 0.9);
    for (int h : hist)
        CHECK(std::abs(h - 100.0) <= 3.0 * sigma);

    CHECK(generate_point_scene(cfg, 9).targets[0].position == generate_point_scene(cfg, 9).targets[0].position);

    SceneGenConfig bad;
    bad.range_min_m = 9.0;
    CHECK_THROWS_AS(generate_point_scene(bad, 1), ConfigError);
    bad = {};
    bad.count_min = 3;
    bad.count_max = 2;
    CHECK_THROWS_AS(generate_point_scene(bad, 1), ConfigError);
    bad = {};
    bad.separation_min_deg = 3.0;
    CHECK_THROWS_AS(generate_point_scene(bad, 1), ConfigError);
}

TEST_CASE("synthesis - scene JSON round trip")
{
    const Scene s = generate_point_scene({}, 3);
    const Scene t = nlohmann::json(s).get<Scene>();
    REQUIRE(t.targets.size() == s.targets.size());
    for (std::size_t i = 0; i < s.targets.size(); ++i)
    {
        CHECK(t.targets[i].position == s.targets[i].position);
        CHECK(t.targets[i].amplitude == s.targets[i].amplitude);
    }
}

TEST_CASE("synthesis - matched filter on a zero cube")
{
    const RadarParams p = small_params();
    const auto arr = enhanced_ula(p, 32);
    RadarCube cube{Tensor3<cplxf>(arr.size(), 4, 256), p, arr};
    const auto img = matched_filter_image(p, arr, cube, ImageGrid::range_bins(p, AngleGrid::uniform(32)));
    for (double v : img.pixels.data())
        CHECK(v == 0.0);
    CHECK_THROWS_AS(matched_filter_image(p, array_by_name("full", p), cube, ImageGrid::range_bins(p, AngleGrid::uniform(32))),
                    ShapeError);
}

TEST_CASE("synthesis - matched filter point response")
{
    const RadarParams p = small_params(4, 256);
    const auto arr = enhanced_ula(p);
    const auto cube = simulate_if_cube(p, arr, one_target({0.0, 5.7}, 0.8), {}, 1, CosinePower{0.0});
    const ImageGrid fine{{5.7}, AngleGrid::uniform(401, -0.02, 0.02)};
    const auto img = matched_filter_image(p, arr, cube, fine);
    const std::vector<double> cut(img.pixels.row(0), img.pixels.row(0) + img.pixels.cols());
    const auto peak = std::max_element(cut.begin(), cut.end()) - cut.begin();
    CHECK(peak == 200);
    // amplitude units
    CHECK(cut[200] == Approx(0.8).epsilon(0.02));
    CHECK(beam_width_3db(cut, fine.angles.u()) == Approx(0.4).epsilon(0.2));

    const auto coarse = matched_filter_image(p, arr, cube, ImageGrid::range_bins(p, AngleGrid::uniform(90, -0.3, 0.3)));
    const auto best = std::max_element(coarse.pixels.data().begin(), coarse.pixels.data().end()) - coarse.pixels.data().begin();
    CHECK(static_cast<std::size_t>(best) / coarse.pixels.cols() == 38); // 5.7 m / 0.15 m
}

TEST_CASE("synthesis - matched filter separates targets 1 degree apart")
{
    const RadarParams p = small_params(4, 256);
    const auto arr = enhanced_ula(p);
    Scene s;
    const double u1 = std::sin(deg2rad(-0.5)), u2 = std::sin(deg2rad(0.5));
    s.targets.push_back({polar_point(10.0, u1), {}, 1.0});
    s.targets.push_back({polar_point(10.0, u2), {}, 1.0});
    const auto cube = simulate_if_cube(p, arr, s, {}, 1, CosinePower{0.0});
    const auto angles = AngleGrid::uniform(61, -0.015, 0.015);
    const ImageGrid grid{{10.0}, angles};
    const auto img = matched_filter_image(p, arr, cube, grid);

    // direct imaging sum: Hann range and Doppler windows, Doppler bin 0, no interpolation
    const std::size_t n_s = cube.n_samples(), n_c = cube.n_chirp();
    const auto wr = make_window(WindowKind::hann, n_s), wd = make_window(WindowKind::hann, n_c);
    const double c0 = 0.5 * (n_s - 1.0);
    double wsr = 0, wsd = 0;
    for (double v : wr)
        wsr += v;
    for (double v : wd)
        wsd += v;
    std::vector<double> direct(angles.size());
    for (std::size_t j = 0; j < angles.size(); ++j)
    {
        const Vec2 px = polar_point(10.0, angles[j]);
        cplx acc{};
        for (std::size_t m = 0; m < arr.size(); ++m)
        {
            const auto &ch = arr.channels()[m];
            const double tau = ((px - element_point(ch.tx_pos)).norm() + (px - element_point(ch.rx_pos)).norm()) / kSpeedOfLight;
            const double kappa = p.bandwidth_hz * tau;
            cplx sm{};
            for (std::size_t c = 0; c < n_c; ++c)
                for (std::size_t n = 0; n < n_s; ++n)
                    sm += wd[c] * wr[n] * cplx(cube.data(m, c, n)) * std::polar(1.0, -2.0 * kPi * kappa * (n - c0) / n_s);
            acc += sm * std::polar(1.0, -2.0 * kPi * p.carrier_hz * tau);
        }
        direct[j] = std::abs(acc) / (wsr * wsd * arr.size());
    }
    std::vector<double> got(img.pixels.row(0), img.pixels.row(0) + angles.size());
    const double dmax = *std::max_element(direct.begin(), direct.end());
    for (std::size_t j = 0; j < angles.size(); ++j)
        CHECK(got[j] == Approx(direct[j]).margin(0.02 * dmax));

    for (const std::vector<double> *cut : {&direct, &got})
    {
        const auto pk = find_peaks(*cut, 0.0, 0.5 * *std::max_element(cut->begin(), cut->end()));
        REQUIRE(pk.size() == 2);
        const double lower = std::min(pk.heights[0], pk.heights[1]);
        double saddle = INFINITY;
        for (std::size_t j = pk.indices[0]; j <= pk.indices[1]; ++j)
            saddle = std::min(saddle, (*cut)[j]);
        CHECK(20.0 * std::log10(lower / saddle) >= 3.0);
    }
}
