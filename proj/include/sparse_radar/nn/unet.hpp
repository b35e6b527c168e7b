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

#ifndef SPARSE_RADAR_NN_UNET_HPP
#define SPARSE_RADAR_NN_UNET_HPP

#include "sparse_radar/nn/layers.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace sparse_radar::nn
{
    enum class Head
    {
        sigmoid, // binary detection, per-pixel probability
        none     // regression
    };

    struct NetworkConfig
    {
        int depth = 3;
        int base_channels = 8;
        int input_channels = 5;
        int input_height = 64;
        int input_width = 64;
        bool use_attention = true;
        Head head = Head::sigmoid;

        void validate() const
        {
            if (depth < 1)
                throw ConfigError("NetworkConfig: depth must be >= 1");
            if (base_channels < 1 || input_channels < 1)
                throw ConfigError("NetworkConfig: channel counts must be >= 1");
            const int m = 1 << depth;
            if (input_height < m || input_width < m || input_height % m || input_width % m)
                throw ConfigError("NetworkConfig: input " + std::to_string(input_height) + "x" + std::to_string(input_width) +
                                  " is not divisible by 2^depth = " + std::to_string(m));
        }
        bool operator==(const NetworkConfig &) const = default;
    };

    inline std::string to_string(Head h) { return h == Head::sigmoid ? "sigmoid" : "none"; }
    inline Head head_from_string(const std::string &s)
    {
        if (s == "sigmoid" || s == "softmax")
            return Head::sigmoid;
        if (s == "none" || s == "linear")
            return Head::none;
        throw ConfigError("unknown output activation '" + s + "' (expected sigmoid|none)");
    }

    inline void to_json(nlohmann::json &j, const NetworkConfig &c)
    {
        j = nlohmann::json{{"depth", c.depth}, {"base_channels", c.base_channels}, {"input_channels", c.input_channels},
                           {"input_height", c.input_height}, {"input_width", c.input_width},
                           {"use_attention", c.use_attention}, {"activation_last", to_string(c.head)}};
    }
    inline void from_json(const nlohmann::json &j, NetworkConfig &c)
    {
        const NetworkConfig d;
        c.depth = j.value("depth", d.depth);
        c.base_channels = j.value("base_channels", d.base_channels);
        c.input_channels = j.value("input_channels", d.input_channels);
        c.input_height = j.value("input_height", d.input_height);
        c.input_width = j.value("input_width", d.input_width);
        c.use_attention = j.value("use_attention", d.use_attention);
        c.head = head_from_string(j.value("activation_last", to_string(d.head)));
    }

    // Attention U-Net. Encoder level l: conv-relu-conv-relu (skip), 2x2 max-pool.
    // Bottleneck: conv-relu-conv-relu. Decoder level l: nearest upsample,
    // conv-relu, attention gate on the skip, concat, conv-relu-conv-relu.
    // Final 1x1 projection to one channel and the configured head.
    template <typename S>
    class UNet
    {
    public:
        UNet() = default;
        explicit UNet(const NetworkConfig &cfg) : cfg_(cfg)
        {
            cfg.validate();
            int cin = cfg.input_channels;
            for (int l = 0; l < cfg.depth; ++l)
            {
                const int ch = channels(l);
                const std::string n = "enc" + std::to_string(l);
                enc_.push_back({Conv2d<S>(n + ".conv1", cin, ch, 3), Conv2d<S>(n + ".conv2", ch, ch, 3), {}, {}, {}, {}});
                cin = ch;
            }
            const int cb = channels(cfg.depth);
            bott_ = {Conv2d<S>("bottleneck.conv1", cin, cb, 3), Conv2d<S>("bottleneck.conv2", cb, cb, 3), {}, {}};
            int cprev = cb;
            dec_.resize(static_cast<std::size_t>(cfg.depth));
            for (int l = cfg.depth - 1; l >= 0; --l)
            {
                const int ch = channels(l);
                const std::string n = "dec" + std::to_string(l);
                Decoder &d = dec_[static_cast<std::size_t>(l)];
                d.up = Conv2d<S>(n + ".up", cprev, ch, 3);
                d.gate = AttentionGate<S>(n + ".gate", ch, ch, std::max(1, ch / 2));
                d.conv1 = Conv2d<S>(n + ".conv1", 2 * ch, ch, 3);
                d.conv2 = Conv2d<S>(n + ".conv2", ch, ch, 3);
                cprev = ch;
            }
            final_ = Conv2d<S>("final", channels(0), 1, 1, "head");
        }

        const NetworkConfig &config() const { return cfg_; }

        void init(std::uint64_t seed)
        {
            std::mt19937_64 rng(seed);
            for (auto &e : enc_)
            {
                e.conv1.init(rng);
                e.conv2.init(rng);
            }
            bott_.conv1.init(rng);
            bott_.conv2.init(rng);
            for (int l = cfg_.depth - 1; l >= 0; --l)
            {
                Decoder &d = dec_[static_cast<std::size_t>(l)];
                d.up.init(rng);
                d.gate.init(rng);
                d.conv1.init(rng);
                d.conv2.init(rng);
            }
            final_.init(rng);
        }

        std::vector<Param<S> *> parameters()
        {
            std::vector<Param<S> *> p;
            auto add = [&](auto &layer)
            {
                for (auto *q : layer.params())
                    p.push_back(q);
            };
            for (auto &e : enc_)
            {
                add(e.conv1);
                add(e.conv2);
            }
            add(bott_.conv1);
            add(bott_.conv2);
            for (int l = cfg_.depth - 1; l >= 0; --l)
            {
                Decoder &d = dec_[static_cast<std::size_t>(l)];
                add(d.up);
                if (cfg_.use_attention)
                    add(d.gate);
                add(d.conv1);
                add(d.conv2);
            }
            add(final_);
            return p;
        }

        void zero_grad()
        {
            for (auto *p : parameters())
                p->zero_grad();
        }

        // Output is (1, H, W): probabilities for the sigmoid head, raw values
        // otherwise. Any H, W divisible by 2^depth is accepted.
        Tensor<S> forward(const Tensor<S> &input)
        {
            const int m = 1 << cfg_.depth;
            if (input.c != cfg_.input_channels || input.h % m || input.w % m || input.h == 0 || input.w == 0)
                throw ShapeError("UNet: input " + std::to_string(input.c) + "x" + std::to_string(input.h) + "x" +
                                 std::to_string(input.w) + " does not match the network (" +
                                 std::to_string(cfg_.input_channels) + " channels, sides divisible by " + std::to_string(m) + ")");
            Tensor<S> x = input;
            for (auto &e : enc_)
            {
                x = e.relu1.forward(step(e.conv1, x));
                e.skip = e.relu2.forward(step(e.conv2, x));
                x = e.pool.forward(e.skip);
            }
            x = bott_.relu1.forward(step(bott_.conv1, x));
            x = bott_.relu2.forward(step(bott_.conv2, x));
            for (int l = cfg_.depth - 1; l >= 0; --l)
            {
                Decoder &d = dec_[static_cast<std::size_t>(l)];
                const Encoder &e = enc_[static_cast<std::size_t>(l)];
                const Tensor<S> g = d.relu_up.forward(step(d.up, d.upsample.forward(x)));
                Tensor<S> skip = cfg_.use_attention ? d.gate.forward(g, e.skip) : e.skip;
                if (cfg_.use_attention)
                    check_finite(skip, "dec" + std::to_string(l) + ".gate");
                x = d.relu1.forward(step(d.conv1, concat_channels(skip, g)));
                x = d.relu2.forward(step(d.conv2, x));
            }
            Tensor<S> out = step(final_, x);
            if (cfg_.head == Head::sigmoid)
                for (S &v : out.v)
                    v = sigmoid(v);
            output_ = out;
            return out;
        }

        // Back-propagates dL/d(output), or dL/d(pre-activation logits) when
        // wrt_logits is set (the sigmoid-BCE shortcut). Accumulates parameter
        // gradients and returns dL/d(input).
        Tensor<S> backward(const Tensor<S> &grad, bool wrt_logits = false)
        {
            Tensor<S> dz = grad;
            if (cfg_.head == Head::sigmoid && !wrt_logits)
                for (std::size_t i = 0; i < dz.size(); ++i)
                    dz.v[i] *= output_.v[i] * (S(1) - output_.v[i]);
            Tensor<S> dx = final_.backward(dz);
            std::vector<Tensor<S>> dskip(enc_.size());
            for (int l = 0; l < cfg_.depth; ++l)
            {
                Decoder &d = dec_[static_cast<std::size_t>(l)];
                dx = d.conv2.backward(d.relu2.backward(dx));
                dx = d.conv1.backward(d.relu1.backward(dx));
                const int ch = channels(l);
                auto [dgated, dg] = split_channels(dx, ch);
                if (cfg_.use_attention)
                {
                    auto [dg2, dsk] = d.gate.backward(dgated);
                    for (std::size_t i = 0; i < dg.size(); ++i)
                        dg.v[i] += dg2.v[i];
                    dskip[static_cast<std::size_t>(l)] = std::move(dsk);
                }
                else
                    dskip[static_cast<std::size_t>(l)] = std::move(dgated);
                dx = d.upsample.backward(d.up.backward(d.relu_up.backward(dg)));
            }
            dx = bott_.conv2.backward(bott_.relu2.backward(dx));
            dx = bott_.conv1.backward(bott_.relu1.backward(dx));
            for (int l = cfg_.depth - 1; l >= 0; --l)
            {
                Encoder &e = enc_[static_cast<std::size_t>(l)];
                Tensor<S> ds = e.pool.backward(dx);
                const Tensor<S> &extra = dskip[static_cast<std::size_t>(l)];
                for (std::size_t i = 0; i < ds.size(); ++i)
                    ds.v[i] += extra.v[i];
                dx = e.conv2.backward(e.relu2.backward(ds));
                dx = e.conv1.backward(e.relu1.backward(dx));
            }
            return dx;
        }

        // Hash of every ReLU mask and pooling choice of the last forward pass.
        // Finite differences are only meaningful while this stays fixed.
        std::uint64_t activation_pattern() const
        {
            std::uint64_t h = 1469598103934665603ull;
            auto mix = [&](std::uint64_t v)
            {
                h ^= v;
                h *= 1099511628211ull;
            };
            auto relu = [&](const Relu<S> &r)
            {
                for (auto b : r.mask())
                    mix(b);
            };
            for (const auto &e : enc_)
            {
                relu(e.relu1);
                relu(e.relu2);
                for (auto a : e.pool.argmax())
                    mix(a);
            }
            relu(bott_.relu1);
            relu(bott_.relu2);
            for (const auto &d : dec_)
            {
                relu(d.relu_up);
                relu(d.relu1);
                relu(d.relu2);
                if (cfg_.use_attention)
                    relu(d.gate.relu());
            }
            return h;
        }

        AttentionGate<S> &gate(int level) { return dec_.at(static_cast<std::size_t>(level)).gate; }

    private:
        struct Encoder
        {
            Conv2d<S> conv1, conv2;
            Relu<S> relu1, relu2;
            MaxPool2<S> pool;
            Tensor<S> skip;
        };
        struct Bottleneck
        {
            Conv2d<S> conv1, conv2;
            Relu<S> relu1, relu2;
        };
        struct Decoder
        {
            Upsample2<S> upsample;
            Conv2d<S> up;
            Relu<S> relu_up;
            AttentionGate<S> gate;
            Conv2d<S> conv1, conv2;
            Relu<S> relu1, relu2;
        };

        int channels(int level) const { return cfg_.base_channels << level; }

        static Tensor<S> step(Conv2d<S> &c, const Tensor<S> &x)
        {
            Tensor<S> y = c.forward(x);
            check_finite(y, c.name());
            return y;
        }

        NetworkConfig cfg_;
        std::vector<Encoder> enc_;
        Bottleneck bott_;
        std::vector<Decoder> dec_;
        Conv2d<S> final_;
        Tensor<S> output_;
    };
}

#endif
