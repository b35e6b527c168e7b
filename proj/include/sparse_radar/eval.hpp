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

#ifndef SPARSE_RADAR_EVAL_HPP
#define SPARSE_RADAR_EVAL_HPP

#include "sparse_radar/common.hpp"
#include "sparse_radar/peaks.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sparse_radar
{
    struct MatchConfig
    {
        std::vector<int> d_max{2, 4};                       // angular-bin tolerances
        double min_peak_height = 0.5;                       // on the row-normalised spectrum
        std::vector<double> prominence_sweep{0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
        double gt_prominence = 0.1;                         // ground-truth peaks, relative to the row maximum
        double row_gate = 0.1;                              // rows below this fraction of the image maximum hold no peaks

        void validate() const
        {
            if (d_max.empty() || prominence_sweep.empty())
                throw ConfigError("MatchConfig: d_max and prominence_sweep must be non-empty");
            for (int d : d_max)
                if (d < 0)
                    throw ConfigError("MatchConfig: d_max must be >= 0");
            for (double p : prominence_sweep)
                if (!(p >= 0.0 && p <= 1.0))
                    throw ConfigError("MatchConfig: prominences must lie in [0, 1]");
            if (!(min_peak_height >= 0.0 && min_peak_height <= 1.0) || !(gt_prominence >= 0.0 && gt_prominence <= 1.0) ||
                !(row_gate >= 0.0 && row_gate <= 1.0))
                throw ConfigError("MatchConfig: heights and gates must lie in [0, 1]");
        }
        bool operator==(const MatchConfig &) const = default;
    };

    inline void to_json(nlohmann::json &j, const MatchConfig &c)
    {
        j = nlohmann::json{{"d_max", c.d_max},
                           {"min_peak_height", c.min_peak_height},
                           {"prominence_sweep", c.prominence_sweep},
                           {"gt_prominence", c.gt_prominence},
                           {"row_gate", c.row_gate}};
    }

    inline void from_json(const nlohmann::json &j, MatchConfig &c)
    {
        const MatchConfig d;
        if (j.contains("d_max"))
            c.d_max = j["d_max"].is_array() ? j["d_max"].get<std::vector<int>>() : std::vector<int>{j["d_max"].get<int>()};
        else
            c.d_max = d.d_max;
        c.min_peak_height = j.value("min_peak_height", d.min_peak_height);
        c.prominence_sweep = j.value("prominence_sweep", d.prominence_sweep);
        c.gt_prominence = j.value("gt_prominence", d.gt_prominence);
        c.row_gate = j.value("row_gate", d.row_gate);
        c.validate();
    }

    struct DetectionCounts
    {
        std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

        DetectionCounts &operator+=(const DetectionCounts &o)
        {
            tp += o.tp;
            fp += o.fp;
            fn += o.fn;
            tn += o.tn;
            return *this;
        }
        bool operator==(const DetectionCounts &) const = default;
    };

    // One range bin. A ground-truth peak with any estimate within d_max is a TP
    // (one estimate may serve several); the rest are FN. Estimates near no
    // ground-truth peak are FP. An empty bin on both sides is one TN.
    inline DetectionCounts match_detections(const std::vector<std::size_t> &est, const std::vector<std::size_t> &gt, int d_max)
    {
        if (d_max < 0)
            throw ConfigError("match_detections: d_max must be >= 0");
        const auto near = [d_max](std::size_t a, std::size_t b)
        { return (a > b ? a - b : b - a) <= static_cast<std::size_t>(d_max); };
        DetectionCounts c;
        for (std::size_t g : gt)
        {
            if (std::any_of(est.begin(), est.end(), [&](std::size_t e) { return near(e, g); }))
                ++c.tp;
            else
                ++c.fn;
        }
        for (std::size_t e : est)
            if (std::none_of(gt.begin(), gt.end(), [&](std::size_t g) { return near(e, g); }))
                ++c.fp;
        c.tn = est.empty() && gt.empty() ? 1 : 0;
        return c;
    }

    struct DetectionMetrics
    {
        std::optional<double> p_d, p_fa, precision; // absent when the denominator is zero
    };

    inline DetectionMetrics metrics(const DetectionCounts &c)
    {
        const auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double>
        {
            if (den == 0)
                return std::nullopt;
            return static_cast<double>(num) / static_cast<double>(den);
        };
        return {ratio(c.tp, c.tp + c.fn), ratio(c.fp, c.tn + c.fp), ratio(c.tp, c.tp + c.fp)};
    }

    // Row peaks of an estimator image: rows whose maximum falls below
    // row_gate * image maximum are empty; other rows are min-max normalised
    // and searched with the given prominence and min_peak_height.
    inline std::vector<std::vector<std::size_t>> row_peaks(const Grid2<double> &img, double prominence, double min_height,
                                                           double row_gate, std::vector<std::size_t> *failed = nullptr)
    {
        std::vector<std::vector<std::size_t>> out(img.rows());
        double peak = 0.0;
        std::vector<bool> bad(img.rows(), false);
        for (std::size_t r = 0; r < img.rows(); ++r)
            for (std::size_t c = 0; c < img.cols(); ++c)
            {
                const double v = img(r, c);
                if (!std::isfinite(v))
                    bad[r] = true;
                else
                    peak = std::max(peak, v);
            }
        if (!(peak > 0.0))
        {
            if (failed)
                for (std::size_t r = 0; r < img.rows(); ++r)
                    if (bad[r])
                        failed->push_back(r);
            return out;
        }
        std::vector<double> row(img.cols());
        for (std::size_t r = 0; r < img.rows(); ++r)
        {
            if (bad[r])
            {
                if (failed)
                    failed->push_back(r);
                continue;
            }
            const double *p = img.row(r);
            const auto [lo, hi] = std::minmax_element(p, p + img.cols());
            if (*hi < row_gate * peak || !(*hi > *lo))
                continue;
            for (std::size_t c = 0; c < img.cols(); ++c)
                row[c] = (p[c] - *lo) / (*hi - *lo);
            out[r] = find_peaks(row, prominence, min_height).indices;
        }
        return out;
    }

    inline std::vector<std::vector<std::size_t>> ground_truth_peaks(const Grid2<double> &gt, const MatchConfig &cfg)
    {
        return row_peaks(gt, cfg.gt_prominence, cfg.min_peak_height, cfg.row_gate);
    }

    struct MetricsRow
    {
        std::string algorithm;
        double prominence = 0.0;
        int d_max = 0;
        DetectionCounts counts;
        DetectionMetrics values() const { return metrics(counts); }
    };

    struct MetricsReport
    {
        std::vector<MetricsRow> rows;
        std::vector<std::pair<std::string, std::size_t>> failed_bins; // per algorithm, bins skipped for non-finite output

        const MetricsRow &find(const std::string &algorithm, double prominence, int d_max) const
        {
            for (const MetricsRow &r : rows)
                if (r.algorithm == algorithm && r.prominence == prominence && r.d_max == d_max)
                    return r;
            throw ConfigError("MetricsReport: no row for " + algorithm);
        }
    };

    struct Estimator
    {
        std::string name;
        std::vector<Grid2<double>> images; // one per scene, aligned with the ground truth list
    };

    // Accumulates counts over all images and range bins for every estimator,
    // prominence and d_max.
    inline MetricsReport evaluate_dataset(const std::vector<Estimator> &estimators, const std::vector<Grid2<double>> &ground_truth,
                                          const MatchConfig &cfg)
    {
        cfg.validate();
        if (ground_truth.empty())
            throw ConfigError("evaluate_dataset: empty dataset");
        std::vector<std::vector<std::vector<std::size_t>>> gt_peaks;
        for (const auto &g : ground_truth)
            gt_peaks.push_back(ground_truth_peaks(g, cfg));

        MetricsReport rep;
        for (const Estimator &e : estimators)
        {
            if (e.images.size() != ground_truth.size())
                throw ShapeError("evaluate_dataset: estimator '" + e.name + "' has " + std::to_string(e.images.size()) +
                                 " images for " + std::to_string(ground_truth.size()) + " scenes");
            for (std::size_t i = 0; i < ground_truth.size(); ++i)
                if (e.images[i].rows() != ground_truth[i].rows() || e.images[i].cols() != ground_truth[i].cols())
                    throw ShapeError("evaluate_dataset: estimator '" + e.name + "' image " + std::to_string(i) +
                                     " differs in size from the ground truth");
            std::size_t failed = 0;
            for (double prom : cfg.prominence_sweep)
            {
                std::vector<DetectionCounts> acc(cfg.d_max.size());
                for (std::size_t i = 0; i < ground_truth.size(); ++i)
                {
                    std::vector<std::size_t> bad;
                    const auto est = row_peaks(e.images[i], prom, cfg.min_peak_height, cfg.row_gate, &bad);
                    if (prom == cfg.prominence_sweep.front())
                        failed += bad.size();
                    for (std::size_t r = 0; r < est.size(); ++r)
                    {
                        if (std::find(bad.begin(), bad.end(), r) != bad.end())
                            continue;
                        for (std::size_t k = 0; k < cfg.d_max.size(); ++k)
                            acc[k] += match_detections(est[r], gt_peaks[i][r], cfg.d_max[k]);
                    }
                }
                for (std::size_t k = 0; k < cfg.d_max.size(); ++k)
                    rep.rows.push_back({e.name, prom, cfg.d_max[k], acc[k]});
            }
            rep.failed_bins.push_back({e.name, failed});
        }
        return rep;
    }

    // Pixelwise maximum over the per-Doppler-rank images.
    inline Grid2<double> fuse_doppler_images(const std::vector<Grid2<double>> &images)
    {
        if (images.empty() || images.size() > 3)
            throw ConfigError("fuse_doppler_images: expected 1 to 3 images, got " + std::to_string(images.size()));
        Grid2<double> out = images.front();
        for (std::size_t i = 1; i < images.size(); ++i)
        {
            if (images[i].rows() != out.rows() || images[i].cols() != out.cols())
                throw ShapeError("fuse_doppler_images: images differ in size");
            for (std::size_t k = 0; k < out.size(); ++k)
                out.data()[k] = std::max(out.data()[k], images[i].data()[k]);
        }
        return out;
    }

    inline void write_metrics_csv(std::ostream &os, const MetricsReport &rep)
    {
        const auto field = [](const std::optional<double> &v)
        {
            if (!v)
                return std::string();
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", *v);
            return std::string(buf);
        };
        os << "algorithm,prominence,d_max,TP,FP,FN,TN,Pd,Pfa,precision\n";
        for (const MetricsRow &r : rep.rows)
        {
            const DetectionMetrics m = r.values();
            char prom[32];
            std::snprintf(prom, sizeof prom, "%.17g", r.prominence);
            os << r.algorithm << ',' << prom << ',' << r.d_max << ',' << r.counts.tp << ',' << r.counts.fp << ',' << r.counts.fn << ','
               << r.counts.tn << ',' << field(m.p_d) << ',' << field(m.p_fa) << ',' << field(m.precision) << '\n';
        }
    }
}

#endif
