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

#ifndef SPARSE_RADAR_NN_GRAD_CHECK_HPP
#define SPARSE_RADAR_NN_GRAD_CHECK_HPP

#include "sparse_radar/nn/losses.hpp"
#include "sparse_radar/nn/unet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace sparse_radar::nn
{
    struct GradCheckOptions
    {
        double step = 1e-3;            // largest step tried
        int refinements = 2;           // step / 10, step / 100 when the larger one crosses a kink
        double abs_floor = 1e-8;      // denominator floor for the relative error
        std::size_t per_kind = 200;    // entries sampled per parameter kind (all if fewer)
        double logit_margin = 1e-6;    // BCE: outputs must stay inside (margin, 1 - margin)
    };

    struct KindReport
    {
        std::size_t available = 0;
        std::size_t checked = 0;
        std::size_t skipped = 0; // every step crossed a ReLU or pooling boundary
        double max_rel_error = 0.0;
    };

    struct GradCheckReport
    {
        std::map<std::string, KindReport> kinds; // conv3x3, conv1x1, attention, head, input, linear
        double max_rel_error = 0.0;
    };

    inline double relative_error(double analytic, double numeric, double floor)
    {
        return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
    }

    namespace detail
    {
        inline void record(KindReport &k, double a, double n, double floor)
        {
            ++k.checked;
            k.max_rel_error = std::max(k.max_rel_error, relative_error(a, n, floor));
        }

        inline std::vector<std::size_t> pick(std::size_t n, std::size_t want, std::mt19937_64 &rng)
        {
            std::vector<std::size_t> idx(n);
            for (std::size_t i = 0; i < n; ++i)
                idx[i] = i;
            if (n > want)
            {
                std::shuffle(idx.begin(), idx.end(), rng);
                idx.resize(want);
                std::sort(idx.begin(), idx.end());
            }
            return idx;
        }
    }

    // Analytic versus central-difference gradients of the loss for a random
    // input and target, in double precision.
    inline GradCheckReport grad_check(const NetworkConfig &config, const LossConfig &loss, std::uint64_t seed,
                                      const GradCheckOptions &opt = {})
    {
        config.validate();
        loss.validate();
        const bool bce = loss.mode == LossMode::classification;
        NetworkConfig cfg = config;
        cfg.head = bce ? Head::sigmoid : Head::none;
        UNet<double> net(cfg);
        net.init(seed);
        std::mt19937_64 rng(seed ^ 0x47524144ull);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);

        // Small random biases so that bias gradients are not trivially tied.
        for (Param<double> *p : net.parameters())
            if (p->shape.size() == 1)
                for (double &b : p->value)
                    b = 0.05 * gauss(rng);

        Tensor<double> x(cfg.input_channels, cfg.input_height, cfg.input_width);
        for (double &v : x.v)
            v = gauss(rng);
        std::vector<double> y(static_cast<std::size_t>(cfg.input_height) * cfg.input_width);
        for (double &v : y)
            v = bce ? (unif(rng) < 0.3 ? 1.0 : 0.0) : 2.0 * unif(rng);

        struct Eval
        {
            double loss;
            std::uint64_t pattern;
            std::vector<double> out;
        };
        auto eval = [&]() -> Eval
        {
            Tensor<double> out = net.forward(x);
            return {evaluate_loss(loss, out.v, y).value, net.activation_pattern(), std::move(out.v)};
        };

        const Tensor<double> out0 = net.forward(x);
        const std::uint64_t base = net.activation_pattern();
        const LossValue lv = evaluate_loss(loss, out0.v, y);
        Tensor<double> g(1, cfg.input_height, cfg.input_width);
        g.v = lv.grad;
        net.zero_grad();
        const Tensor<double> dinput = net.backward(g, bce);

        GradCheckReport rep;
        // Fourth-order central difference at the largest step whose four
        // evaluations keep the activation pattern (and, for BCE, the outputs
        // away from 0 and 1). The loss carries rounding noise of a few ulps, so
        // a large step matters for entries with small gradients.
        auto admissible = [&](const Eval &e)
        {
            if (e.pattern != base)
                return false;
            if (bce)
                for (double o : e.out)
                    if (!(o > opt.logit_margin && o < 1.0 - opt.logit_margin))
                        return false;
            return true;
        };
        auto probe = [&](double &slot, double analytic, KindReport &k)
        {
            const double keep = slot;
            double h = opt.step;
            for (int attempt = 0; attempt <= opt.refinements; ++attempt, h /= 10.0)
            {
                double l[4];
                bool ok = true;
                const double offsets[4] = {2.0, 1.0, -1.0, -2.0};
                for (int i = 0; i < 4 && ok; ++i)
                {
                    slot = keep + offsets[i] * h;
                    const Eval e = eval();
                    ok = admissible(e);
                    l[i] = e.loss;
                }
                slot = keep;
                if (ok)
                {
                    detail::record(k, analytic, (8.0 * (l[1] - l[2]) - (l[0] - l[3])) / (12.0 * h), opt.abs_floor);
                    return;
                }
            }
            ++k.skipped;
        };

        std::map<std::string, std::vector<std::pair<Param<double> *, std::size_t>>> by_kind;
        for (Param<double> *p : net.parameters())
            for (std::size_t i = 0; i < p->size(); ++i)
                by_kind[p->kind].push_back({p, i});
        for (auto &[kind, entries] : by_kind)
        {
            KindReport &k = rep.kinds[kind];
            k.available = entries.size();
            for (std::size_t e : detail::pick(entries.size(), opt.per_kind, rng))
            {
                auto [p, i] = entries[e];
                probe(p->value[i], p->grad[i], k);
            }
        }
        KindReport &ki = rep.kinds["input"];
        ki.available = x.size();
        for (std::size_t e : detail::pick(x.size(), opt.per_kind, rng))
            probe(x.v[e], dinput.v[e], ki);

        for (const auto &[kind, k] : rep.kinds)
            rep.max_rel_error = std::max(rep.max_rel_error, k.max_rel_error);
        return rep;
    }

    // Single fully connected layer under the squared-error loss. The loss is
    // quadratic in every parameter, so central differences are exact for any
    // step and a large one keeps rounding out of the comparison.
    inline GradCheckReport grad_check_linear(int in, int out, std::uint64_t seed, GradCheckOptions opt = {})
    {
        opt.step = std::max(opt.step, 1e-2);
        Linear<double> lin("linear", in, out);
        std::mt19937_64 rng(seed);
        lin.init(rng);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (double &b : lin.bias.value)
            b = 0.1 * gauss(rng);
        std::vector<double> x(static_cast<std::size_t>(in)), y(static_cast<std::size_t>(out));
        for (double &v : x)
            v = gauss(rng);
        for (double &v : y)
            v = gauss(rng);
        auto loss_of = [&] { return loss_mse_l1(lin.forward(x), y, 0.0); };
        const LossValue lv = loss_of();
        lin.weight.zero_grad();
        lin.bias.zero_grad();
        const std::vector<double> dx = lin.backward(std::vector<double>(lv.grad.begin(), lv.grad.end()));

        GradCheckReport rep;
        KindReport &k = rep.kinds["linear"];
        auto probe = [&](double &slot, double analytic)
        {
            const double keep = slot;
            slot = keep + opt.step;
            const double lp = loss_of().value;
            slot = keep - opt.step;
            const double lm = loss_of().value;
            slot = keep;
            detail::record(k, analytic, (lp - lm) / (2.0 * opt.step), opt.abs_floor);
        };
        for (Param<double> *p : lin.params())
        {
            k.available += p->size();
            for (std::size_t i = 0; i < p->size(); ++i)
                probe(p->value[i], p->grad[i]);
        }
        KindReport &ki = rep.kinds["input"];
        ki.available = x.size();
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            const double keep = x[i];
            x[i] = keep + opt.step;
            const double lp = loss_of().value;
            x[i] = keep - opt.step;
            const double lm = loss_of().value;
            x[i] = keep;
            detail::record(ki, dx[i], (lp - lm) / (2.0 * opt.step), opt.abs_floor);
        }
        for (const auto &[kind, r] : rep.kinds)
            rep.max_rel_error = std::max(rep.max_rel_error, r.max_rel_error);
        return rep;
    }
}

#endif
