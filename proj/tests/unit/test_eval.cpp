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

#include "sparse_radar/eval.hpp"

#include <random>
#include <sstream>

using namespace sparse_radar;
using Catch::Approx;

namespace
{
    // Brute force over the full est x gt pair table.
    DetectionCounts match_oracle(const std::vector<std::size_t> &est, const std::vector<std::size_t> &gt, int d_max)
    {
        std::vector<std::vector<bool>> hit(gt.size(), std::vector<bool>(est.size()));
        for (std::size_t i = 0; i < gt.size(); ++i)
            for (std::size_t j = 0; j < est.size(); ++j)
            {
                const long d = static_cast<long>(gt[i]) - static_cast<long>(est[j]);
                hit[i][j] = d * d <= static_cast<long>(d_max) * d_max;
            }
        DetectionCounts c;
        for (std::size_t i = 0; i < gt.size(); ++i)
        {
            bool any = false;
            for (std::size_t j = 0; j < est.size(); ++j)
                any = any || hit[i][j];
            (any ? c.tp : c.fn) += 1;
        }
        for (std::size_t j = 0; j < est.size(); ++j)
        {
            bool any = false;
            for (std::size_t i = 0; i < gt.size(); ++i)
                any = any || hit[i][j];
            c.fp += any ? 0 : 1;
        }
        c.tn = (est.size() + gt.size() == 0) ? 1 : 0;
        return c;
    }

    std::vector<std::size_t> random_peaks(std::mt19937_64 &rng, std::size_t n_theta)
    {
        std::uniform_int_distribution<int> count(0, 8);
        std::uniform_int_distribution<std::size_t> pos(0, n_theta - 1);
        std::vector<std::size_t> p(static_cast<std::size_t>(count(rng)));
        for (auto &v : p)
            v = pos(rng);
        std::sort(p.begin(), p.end());
        p.erase(std::unique(p.begin(), p.end()), p.end());
        return p;
    }

    Grid2<double> spikes(std::size_t rows, std::size_t cols, const std::vector<std::pair<std::size_t, std::size_t>> &at)
    {
        Grid2<double> g(rows, cols);
        for (auto [r, c] : at)
            g(r, c) = 1.0;
        return g;
    }
}

TEST_CASE("matching examples", "[eval]")
{
    CHECK(match_detections({10}, {11}, 2) == DetectionCounts{1, 0, 0, 0});
    CHECK(match_detections({10}, {10, 12}, 2) == DetectionCounts{2, 0, 0, 0});
    CHECK(match_detections({}, {}, 2) == DetectionCounts{0, 0, 0, 1});
    CHECK(match_detections({3}, {}, 2) == DetectionCounts{0, 1, 0, 0});
    CHECK(match_detections({}, {3}, 2) == DetectionCounts{0, 0, 1, 0});
    CHECK(match_detections({10, 30}, {13}, 2) == DetectionCounts{0, 2, 1, 0});
    CHECK(match_detections({10}, {10}, 0) == DetectionCounts{1, 0, 0, 0});
    CHECK_THROWS_AS(match_detections({1}, {1}, -1), ConfigError);
}

TEST_CASE("matching agrees with the pair-table oracle", "[eval]")
{
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 1000; ++trial)
    {
        const auto est = random_peaks(rng, 40), gt = random_peaks(rng, 40);
        const int d = static_cast<int>(rng() % 6);
        INFO("trial " << trial);
        CHECK(match_detections(est, gt, d) == match_oracle(est, gt, d));
        // more tolerance never loses a hit
        const DetectionCounts a = match_detections(est, gt, d), b = match_detections(est, gt, d + 1);
        CHECK(b.tp >= a.tp);
        CHECK(b.fp <= a.fp);
        CHECK(a.tp + a.fn == gt.size());
    }
}

TEST_CASE("metric ratios", "[eval]")
{
    DetectionMetrics m = metrics({8, 0, 2, 5});
    CHECK(*m.p_d == 0.8);
    CHECK(*m.p_fa == 0.0);
    CHECK(*m.precision == 1.0);

    m = metrics({1, 1, 1, 1});
    CHECK(*m.p_d == 0.5);
    CHECK(*m.p_fa == 0.5);
    CHECK(*m.precision == 0.5);

    m = metrics({0, 0, 0, 0});
    CHECK_FALSE(m.p_d.has_value());
    CHECK_FALSE(m.p_fa.has_value());
    CHECK_FALSE(m.precision.has_value());

    std::mt19937_64 rng(5);
    for (int i = 0; i < 500; ++i)
    {
        const DetectionCounts c{rng() % 20, rng() % 20, rng() % 20, rng() % 20};
        const DetectionMetrics v = metrics(c);
        if (c.tp + c.fn)
            CHECK(*v.p_d == static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn));
        if (c.fp + c.tn)
            CHECK(*v.p_fa == static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn));
        if (c.tp + c.fp)
            CHECK(*v.precision == static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp));
        for (const auto &o : {v.p_d, v.p_fa, v.precision})
            if (o)
                CHECK((*o >= 0.0 && *o <= 1.0));
    }
}

TEST_CASE("row peaks normalise rows and gate weak rows", "[eval]")
{
    Grid2<double> img(3, 9);
    const std::vector<double> strong{0, 1, 10, 1, 0, 0, 6, 0, 0}, weak{0, 0, 0, 0.5, 0, 0, 0, 0, 0};
    std::copy(strong.begin(), strong.end(), img.row(0));
    std::copy(weak.begin(), weak.end(), img.row(1));
    for (std::size_t c = 0; c < 9; ++c)
        img(2, c) = 3.0 + 0.1 * static_cast<double>(c % 2);

    const auto p = row_peaks(img, 0.1, 0.5, 0.1);
    CHECK(p[0] == std::vector<std::size_t>{2, 6});
    CHECK(p[1].empty()); // 0.5 < 0.1 * 10
    CHECK(p[2] == std::vector<std::size_t>{1, 3, 5, 7});
    CHECK(row_peaks(img, 0.1, 0.7, 0.1)[0] == std::vector<std::size_t>{2});
    CHECK(row_peaks(img, 0.1, 0.5, 0.01)[1] == std::vector<std::size_t>{3});

    Grid2<double> bad = img;
    bad(1, 4) = NAN;
    std::vector<std::size_t> failed;
    const auto q = row_peaks(bad, 0.1, 0.5, 0.0, &failed);
    CHECK(failed == std::vector<std::size_t>{1});
    CHECK(q[0] == p[0]);
    CHECK(q[1].empty());
}

TEST_CASE("dataset evaluation edge cases", "[eval]")
{
    const Grid2<double> gt1 = spikes(6, 20, {{1, 4}, {1, 12}, {3, 7}});
    const Grid2<double> gt2 = spikes(6, 20, {{0, 2}, {5, 18}});
    const std::vector<Grid2<double>> gt{gt1, gt2};
    MatchConfig cfg;
    cfg.prominence_sweep = {0.05, 0.1};
    cfg.gt_prominence = 0.1;

    const MetricsReport rep = evaluate_dataset({{"echo", gt}, {"zero", {Grid2<double>(6, 20), Grid2<double>(6, 20)}}}, gt, cfg);
    for (double prom : cfg.prominence_sweep)
        for (int d : cfg.d_max)
        {
            const DetectionCounts e = rep.find("echo", prom, d).counts;
            CHECK(e == DetectionCounts{5, 0, 0, 12 - 4});
            const DetectionMetrics m = metrics(e);
            CHECK(*m.p_d == 1.0);
            CHECK(*m.p_fa == 0.0);

            const DetectionCounts z = rep.find("zero", prom, d).counts;
            CHECK(z.tp == 0);
            CHECK(z.fp == 0);
            CHECK(z.fn == 5);
            CHECK(*metrics(z).p_d == 0.0);
        }
    CHECK(rep.rows.size() == 2 * 2 * cfg.d_max.size());

    Grid2<double> shifted = spikes(6, 20, {{1, 7}, {3, 7}});
    const MetricsReport near = evaluate_dataset({{"s", {shifted, gt2}}}, gt, cfg);
    CHECK(near.find("s", 0.1, 2).counts == DetectionCounts{3, 1, 2, 8});
    CHECK(near.find("s", 0.1, 4).counts == DetectionCounts{4, 0, 1, 8});

    Grid2<double> broken = gt1;
    broken(2, 0) = NAN;
    const MetricsReport f = evaluate_dataset({{"b", {broken, gt2}}}, gt, cfg);
    CHECK(f.failed_bins.front().second == 1);
    CHECK(f.find("b", 0.1, 2).counts.tn == 7);

    CHECK_THROWS_AS(evaluate_dataset({{"x", {gt1}}}, gt, cfg), ShapeError);
    CHECK_THROWS_AS(evaluate_dataset({{"x", {}}}, {}, cfg), ConfigError);
    MatchConfig bad = cfg;
    bad.d_max = {-1};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("Doppler fusion", "[eval]")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto rnd = [&]
    {
        Grid2<double> g(4, 7);
        for (double &v : g.data())
            v = u(rng);
        return g;
    };
    const Grid2<double> a = rnd(), b = rnd(), c = rnd();
    CHECK(fuse_doppler_images({a}) == a);
    CHECK(fuse_doppler_images({a, a}) == a);
    CHECK(fuse_doppler_images({a, b}) == fuse_doppler_images({b, a}));
    CHECK(fuse_doppler_images({a, b, c}) == fuse_doppler_images({fuse_doppler_images({a, b}), c}));
    const Grid2<double> f = fuse_doppler_images({a, b});
    Grid2<double> a_up = a;
    a_up(1, 1) += 1.0;
    const Grid2<double> g = fuse_doppler_images({a_up, b});
    for (std::size_t i = 0; i < f.size(); ++i)
    {
        CHECK(f.data()[i] >= a.data()[i]);
        CHECK(f.data()[i] >= b.data()[i]);
        CHECK(g.data()[i] >= f.data()[i]);
    }

    const Grid2<double> p = spikes(3, 3, {{0, 1}}), q = spikes(3, 3, {{2, 0}});
    CHECK(fuse_doppler_images({p, q}) == spikes(3, 3, {{0, 1}, {2, 0}}));

    CHECK_THROWS_AS(fuse_doppler_images({}), ConfigError);
    CHECK_THROWS_AS(fuse_doppler_images({a, b, c, a}), ConfigError);
    CHECK_THROWS_AS(fuse_doppler_images({a, Grid2<double>(4, 6)}), ShapeError);
}

TEST_CASE("metrics CSV", "[eval]")
{
    MetricsReport rep;
    rep.rows.push_back({"das", 0.1, 2, {8, 2, 2, 8}});
    rep.rows.push_back({"dnn", 0.5, 4, {0, 0, 0, 0}});
    std::ostringstream os;
    write_metrics_csv(os, rep);
    CHECK(os.str() == "algorithm,prominence,d_max,TP,FP,FN,TN,Pd,Pfa,precision\n"
                      "das,0.10000000000000001,2,8,2,2,8,0.80000000000000004,0.20000000000000001,0.80000000000000004\n"
                      "dnn,0.5,4,0,0,0,0,,,\n");
}
