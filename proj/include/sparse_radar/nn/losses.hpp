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

#ifndef SPARSE_RADAR_NN_LOSSES_HPP
#define SPARSE_RADAR_NN_LOSSES_HPP

#include "sparse_radar/common.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace sparse_radar::nn
{
    enum class LossMode
    {
        classification,
        regression
    };

    struct LossConfig
    {
        LossMode mode = LossMode::classification;
        double alpha = 0.0;  // L1 weight on the estimate (regression)
        double beta = 10.0;  // ground-truth scale (regression)
        double floor = 0.0;  // pixels below floor * image max count as empty

        void validate() const
        {
            if (!(alpha >= 0.0))
                throw ConfigError("LossConfig: alpha must be >= 0");
            if (!(beta > 0.0))
                throw ConfigError("LossConfig: beta must be > 0");
            if (!(floor >= 0.0 && floor < 1.0))
                throw ConfigError("LossConfig: floor must be in [0, 1)");
        }
        bool operator==(const LossConfig &) const = default;
    };

    inline std::string to_string(LossMode m) { return m == LossMode::classification ? "classification" : "regression"; }

    inline void to_json(nlohmann::json &j, const LossConfig &c)
    {
        j = nlohmann::json{{"mode", to_string(c.mode)}, {"alpha", c.alpha}, {"beta", c.beta}, {"floor", c.floor}};
    }
    inline void from_json(const nlohmann::json &j, LossConfig &c)
    {
        const std::string mode = j.value("mode", std::string("classification"));
        if (mode == "classification")
            c.mode = LossMode::classification;
        else if (mode == "regression")
            c.mode = LossMode::regression;
        else
            throw ConfigError("unknown loss mode '" + mode + "'");
        c.alpha = j.value("alpha", 0.0);
        c.beta = j.value("beta", 10.0);
        c.floor = j.value("floor", 0.0);
    }

    struct LossValue
    {
        double value = 0.0;
        std::vector<double> grad; // see the individual losses for what it is taken against
        std::size_t clamped = 0;  // estimates moved into [eps, 1 - eps]
    };

    inline constexpr double kBceClamp = 1e-7;

    // mean[-Y log X - (1 - Y) log(1 - X)] with X clamped to [1e-7, 1 - 1e-7].
    // The gradient is taken against the sigmoid logits, (X - Y) / N.
    template <typename S>
    LossValue loss_bce(const std::vector<S> &x, const std::vector<S> &y)
    {
        if (x.size() != y.size() || x.empty())
            throw ShapeError("loss_bce: estimate and target differ in size");
        LossValue out;
        out.grad.resize(x.size());
        const double n = static_cast<double>(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            double p = static_cast<double>(x[i]);
            if (p < kBceClamp || p > 1.0 - kBceClamp)
            {
                p = std::clamp(p, kBceClamp, 1.0 - kBceClamp);
                ++out.clamped;
            }
            const double t = static_cast<double>(y[i]);
            out.value -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
            out.grad[i] = (static_cast<double>(x[i]) - t) / n;
        }
        out.value /= n;
        return out;
    }

    // mean (X - Y)^2 + alpha mean |X|; gradient against X.
    template <typename S>
    LossValue loss_mse_l1(const std::vector<S> &x, const std::vector<S> &y, double alpha)
    {
        if (x.size() != y.size() || x.empty())
            throw ShapeError("loss_mse_l1: estimate and target differ in size");
        LossValue out;
        out.grad.resize(x.size());
        const double n = static_cast<double>(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            const double d = static_cast<double>(x[i]) - static_cast<double>(y[i]);
            const double a = static_cast<double>(x[i]);
            out.value += d * d + alpha * std::abs(a);
            out.grad[i] = (2.0 * d + alpha * ((a > 0.0) - (a < 0.0))) / n;
        }
        out.value /= n;
        return out;
    }

    template <typename S>
    LossValue evaluate_loss(const LossConfig &cfg, const std::vector<S> &x, const std::vector<S> &y)
    {
        return cfg.mode == LossMode::classification ? loss_bce(x, y) : loss_mse_l1(x, y, cfg.alpha);
    }

    // Classification: 1 where the image is strictly positive (after the floor),
    // else 0. Regression: beta * Y / max(Y) (after the floor).
    inline Grid2<double> preprocess_target(const Grid2<double> &raw, const LossConfig &cfg)
    {
        cfg.validate();
        Grid2<double> out(raw.rows(), raw.cols());
        double peak = 0.0;
        for (double v : raw.data())
        {
            if (!(v >= 0.0))
                throw DomainError("preprocess_target: ground truth must be non-negative");
            peak = std::max(peak, v);
        }
        if (peak == 0.0)
            return out;
        const double cut = cfg.floor * peak;
        for (std::size_t i = 0; i < raw.size(); ++i)
        {
            const double v = raw.data()[i] < cut ? 0.0 : raw.data()[i];
            out.data()[i] = cfg.mode == LossMode::classification ? (v > 0.0 ? 1.0 : 0.0) : cfg.beta * v / peak;
        }
        return out;
    }
}

#endif
