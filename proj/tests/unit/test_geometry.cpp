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

#include "sparse_radar/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace sparse_radar;
using Catch::Approx;

TEST_CASE("geometry - RadarParams defaults")
{
    const RadarParams p;
    CHECK(p.carrier_hz == 77e9);
    CHECK(p.bandwidth_hz == 1e9);
    CHECK(p.n_chirp == 128);
    CHECK(p.chirp_s == 80.6e-6);
    CHECK(p.n_tx == 3);
    CHECK(p.n_rx == 16);
    CHECK(p.n_samples == 1260);
    CHECK(p.wavelength() == kSpeedOfLight / 77e9);
    CHECK(p.range_resolution() == Approx(0.15).epsilon(1e-3));
    CHECK(p.n_range_bins() == 630);
    CHECK(p.max_velocity() == Approx(12.07).margin(0.01));
    CHECK(p.chirp_rate() == Approx(1e9 / 80.6e-6));
    CHECK_NOTHROW(p.validate());

    RadarParams bad = p;
    bad.bandwidth_hz = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = p;
    bad.n_chirp = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("geometry - build_virtual_array")
{
    const double lam = RadarParams{}.wavelength();
    {
        const std::vector<double> tx{0.0}, rx{0.0, 0.5 * lam};
        const auto a = build_virtual_array(tx, rx);
        REQUIRE(a.size() == 2);
        CHECK(a.positions()[0] == 0.0);
        CHECK(a.positions()[1] == 0.5 * lam);
    }
    {
        const std::vector<double> tx{0.0, 1.0}, rx{0.0, 1.0};
        const auto a = build_virtual_array(tx, rx);
        CHECK(a.positions() == std::vector<double>{0.0, 1.0, 1.0, 2.0});
    }
    const std::vector<double> empty;
    const std::vector<double> one{0.0};
    CHECK_THROWS_AS(build_virtual_array(empty, one), GeometryError);
    CHECK_THROWS_AS(build_virtual_array(one, empty), GeometryError);
    const std::vector<double> nan{std::nan("")};
    CHECK_THROWS_AS(build_virtual_array(one, nan), GeometryError);
}

TEST_CASE("geometry - full MIMO array is a 48-element ULA")
{
    const RadarParams p;
    std::vector<double> tx{0.0, 2e-3, 4e-3}, rx;
    for (int i = 0; i < 16; ++i)
        rx.push_back(6e-3 * i);
    const auto a = build_virtual_array(tx, rx);
    REQUIRE(a.size() == 48);
    // every pairwise sum is present
    std::vector<double> sums;
    for (double t : tx)
        for (double r : rx)
            sums.push_back(t + r);
    std::sort(sums.begin(), sums.end());
    CHECK(sums == a.positions());
    for (std::size_t i = 1; i < a.size(); ++i)
        CHECK(a.positions()[i] - a.positions()[i - 1] == Approx(2e-3).epsilon(1e-12));
    // 2 mm is 0.5137 lambda at 77 GHz (the 0.58 lambda figure does not follow from these spacings)
    CHECK(2e-3 / p.wavelength() == Approx(0.5137).margin(1e-4));

    const auto centred = full_mimo_array(p);
    REQUIRE(centred.size() == 48);
    CHECK(centred.positions().front() == Approx(-centred.positions().back()));
    CHECK(centred.aperture() == Approx(47 * 2e-3));
}

TEST_CASE("geometry - thin_array")
{
    const auto full = full_mimo_array();
    std::vector<int> all(16);
    for (int i = 0; i < 16; ++i)
        all[i] = i;
    CHECK(thin_array(full, all) == full);
    CHECK(thin_array(full, all).positions() == full.positions());

    const auto b = thin_array(full, six_rx_keep_set());
    const auto c = thin_array(full, four_rx_keep_set());
    CHECK(b.size() == 18);
    CHECK(c.size() == 12);
    // first and last RX kept, so the aperture is unchanged
    CHECK(b.aperture() == Approx(full.aperture()));
    CHECK(c.aperture() == Approx(full.aperture()));
    CHECK(array_by_name("fig4c").size() == 12);
    CHECK(array_by_name("enhanced").size() == 256);

    const std::vector<int> none;
    CHECK_THROWS_AS(thin_array(full, none), GeometryError);
    const std::vector<int> outside{16};
    CHECK_THROWS_AS(thin_array(full, outside), GeometryError);
    CHECK_THROWS_AS(array_by_name("fig9"), ConfigError);
}

TEST_CASE("geometry - resolution_3db")
{
    const double lam = RadarParams{}.wavelength();
    CHECK(resolution_3db(48 * 0.58 * lam, lam) == Approx(1.83).margin(0.01));
    CHECK(resolution_3db(256 * 0.5 * lam, lam) == Approx(0.4).margin(0.01));
    CHECK(resolution_3db(51.05 * lam, lam) == Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(resolution_3db(0.0, lam), DomainError);
    CHECK_THROWS_AS(resolution_3db(-1.0, lam), DomainError);
    double prev = resolution_3db(1e-3, lam);
    for (double d = 2e-3; d < 1.0; d *= 1.5)
    {
        const double r = resolution_3db(d, lam);
        CHECK(r < prev);
        prev = r;
    }
}

TEST_CASE("geometry - storage order permutation keeps the sorted view")
{
    const auto a = array_by_name("fig4b");
    std::vector<std::size_t> perm(a.size());
    for (std::size_t i = 0; i < perm.size(); ++i)
        perm[i] = perm.size() - 1 - i;
    const auto b = a.with_storage_order(perm);
    CHECK(b.positions() == a.positions());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(b.channels()[b.sorted_order()[i]].position() == a.positions()[i]);
}

TEST_CASE("geometry - AngleGrid")
{
    const auto g = AngleGrid::uniform();
    CHECK(g.size() == 450);
    CHECK(g[0] == -1.0);
    CHECK(g[449] == 1.0);
    for (std::size_t i = 1; i < g.size(); ++i)
        CHECK(g[i] > g[i - 1]);
    CHECK(g.nearest(0.0) == 224);
    CHECK_THROWS_AS(AngleGrid(std::vector<double>{0.0, 0.0}), ConfigError);
    CHECK_THROWS_AS(AngleGrid(std::vector<double>{0.0, 1.5}), ConfigError);
}

TEST_CASE("geometry - JSON round trip")
{
    const auto a = array_by_name("fig4c");
    const nlohmann::json j = a;
    CHECK(j.at("kept_rx").get<std::vector<int>>() == four_rx_keep_set());
    CHECK(j.get<VirtualArray>() == a);
    const RadarParams p;
    const nlohmann::json jp = p;
    CHECK(jp.get<RadarParams>().n_samples == p.n_samples);
    const auto g = AngleGrid::uniform(64, -0.5, 0.5);
    CHECK(nlohmann::json(g).get<AngleGrid>() == g);
}
