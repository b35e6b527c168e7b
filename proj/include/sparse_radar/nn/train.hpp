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

#ifndef SPARSE_RADAR_NN_TRAIN_HPP
#define SPARSE_RADAR_NN_TRAIN_HPP

#include "sparse_radar/features.hpp"
#include "sparse_radar/nn/losses.hpp"
#include "sparse_radar/nn/optim.hpp"
#include "sparse_radar/nn/unet.hpp"
#include "sparse_radar/nn/weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace sparse_radar::nn
{
    struct Sample
    {
        Tensor<float> input;       // (N_feat, H, W)
        std::vector<float> target; // H * W, already preprocessed
    };

    inline Tensor<float> to_tensor(const FeatureImage &f)
    {
        Tensor<float> t(static_cast<int>(f.n_feat()), static_cast<int>(f.n_range()), static_cast<int>(f.n_theta()));
        std::copy(f.planes.data().begin(), f.planes.data().end(), t.v.begin());
        return t;
    }

    inline Sample make_sample(const FeatureImage &f, const Grid2<double> &raw_truth, const LossConfig &loss)
    {
        if (raw_truth.rows() != f.n_range() || raw_truth.cols() != f.n_theta())
            throw ShapeError("make_sample: feature image and ground truth differ in size");
        const Grid2<double> t = preprocess_target(raw_truth, loss);
        Sample s{to_tensor(f), std::vector<float>(t.size())};
        for (std::size_t i = 0; i < t.size(); ++i)
            s.target[i] = static_cast<float>(t.data()[i]);
        return s;
    }

    // Draws from `extra` so that it makes up `fraction` of the result (with
    // repetition if it is too small), appended to `base` and shuffled.
    inline std::vector<Sample> mix_datasets(const std::vector<Sample> &base, const std::vector<Sample> &extra, double fraction,
                                            std::uint64_t seed)
    {
        if (!(fraction >= 0.0 && fraction <= 1.0))
            throw ConfigError("mix_datasets: fraction must be in [0, 1]");
        std::mt19937_64 rng(seed);
        std::vector<Sample> out;
        std::size_t n_extra = 0;
        if (fraction >= 1.0)
            n_extra = extra.size();
        else if (!extra.empty())
        {
            out = base;
            n_extra = static_cast<std::size_t>(std::llround(fraction / (1.0 - fraction) * static_cast<double>(base.size())));
        }
        else
            out = base;
        std::vector<std::size_t> idx(extra.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t k = 0; k < n_extra; ++k)
        {
            if (k % extra.size() == 0)
                std::shuffle(idx.begin(), idx.end(), rng);
            out.push_back(extra[idx[k % extra.size()]]);
        }
        std::shuffle(out.begin(), out.end(), rng);
        return out;
    }

    struct TrainConfig
    {
        NetworkConfig network;
        LossConfig loss;
        OptimizerSpec optimizer;
    };

    struct TrainResult
    {
        WeightStore weights;
        std::vector<double> train_loss; // per epoch, mean over samples
        std::vector<double> val_loss;   // per epoch (empty without validation data)
        std::size_t clamped = 0;        // BCE clamp events over the run
    };

    template <typename S>
    LossValue sample_loss(UNet<S> &net, const LossConfig &loss, const Tensor<S> &input, const std::vector<S> &target)
    {
        const Tensor<S> out = net.forward(input);
        if (out.size() != target.size())
            throw ShapeError("training sample: target has " + std::to_string(target.size()) + " pixels, output " +
                             std::to_string(out.size()));
        return evaluate_loss(loss, out.v, target);
    }

    // Deterministic given seed: initialisation from the seed, sample order from
    // an independent stream per epoch, serial float arithmetic.
    inline TrainResult train(const std::vector<Sample> &train_set, const std::vector<Sample> &val_set, const TrainConfig &cfg,
                             std::uint64_t seed, const std::function<void(int, double, double)> &progress = {})
    {
        if (train_set.empty())
            throw ConfigError("train: empty training set");
        cfg.network.validate();
        cfg.loss.validate();
        cfg.optimizer.validate();
        if ((cfg.network.head == Head::sigmoid) != (cfg.loss.mode == LossMode::classification))
            throw ConfigError("train: classification needs the sigmoid head, regression the linear head");

        UNet<float> net(cfg.network);
        net.init(seed);
        Optimizer<float> opt(cfg.optimizer, net.parameters());
        TrainResult res;
        std::vector<std::size_t> order(train_set.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        const std::size_t bs = static_cast<std::size_t>(cfg.optimizer.batch_size);
        const bool logits = cfg.loss.mode == LossMode::classification;

        for (int epoch = 0; epoch < cfg.optimizer.epochs; ++epoch)
        {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(epoch),
                              0x54524149u};
            std::mt19937_64 rng(seq);
            std::shuffle(order.begin(), order.end(), rng);
            double total = 0.0;
            for (std::size_t b0 = 0; b0 < order.size(); b0 += bs)
            {
                const std::size_t b1 = std::min(order.size(), b0 + bs);
                net.zero_grad();
                for (std::size_t i = b0; i < b1; ++i)
                {
                    const Sample &s = train_set[order[i]];
                    const LossValue lv = sample_loss(net, cfg.loss, s.input, s.target);
                    if (!std::isfinite(lv.value))
                        throw NumericError("train: loss diverged at epoch " + std::to_string(epoch) + ", sample " +
                                           std::to_string(order[i]));
                    total += lv.value;
                    res.clamped += lv.clamped;
                    Tensor<float> g(1, s.input.h, s.input.w);
                    const double scale = 1.0 / static_cast<double>(b1 - b0);
                    for (std::size_t k = 0; k < g.size(); ++k)
                        g.v[k] = static_cast<float>(lv.grad[k] * scale);
                    net.backward(g, logits);
                }
                opt.step();
            }
            res.train_loss.push_back(total / static_cast<double>(order.size()));
            double vl = NAN;
            if (!val_set.empty())
            {
                vl = 0.0;
                for (const Sample &s : val_set)
                    vl += sample_loss(net, cfg.loss, s.input, s.target).value;
                vl /= static_cast<double>(val_set.size());
                res.val_loss.push_back(vl);
            }
            if (progress)
                progress(epoch, res.train_loss.back(), vl);
        }
        res.weights = WeightStore::capture(net, cfg.loss, seed);
        return res;
    }

    // Network output for one feature image as an N_r x N_theta grid.
    inline Grid2<double> predict(UNet<float> &net, const FeatureImage &f)
    {
        const Tensor<float> out = net.forward(to_tensor(f));
        Grid2<double> g(f.n_range(), f.n_theta());
        for (std::size_t i = 0; i < g.size(); ++i)
            g.data()[i] = static_cast<double>(out.v[i]);
        return g;
    }
}

#endif
