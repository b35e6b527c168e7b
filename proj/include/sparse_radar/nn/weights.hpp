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

#ifndef SPARSE_RADAR_NN_WEIGHTS_HPP
#define SPARSE_RADAR_NN_WEIGHTS_HPP

#include "sparse_radar/nn/losses.hpp"
#include "sparse_radar/nn/unet.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace sparse_radar::nn
{
    struct WeightEntry
    {
        std::string name;
        std::vector<int> shape;
        std::size_t offset = 0;
        bool operator==(const WeightEntry &) const = default;
    };
    NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(WeightEntry, name, shape, offset)

    // Flat float32 parameter buffer plus the manifest needed to rebuild the
    // network that produced it.
    struct WeightStore
    {
        NetworkConfig network;
        LossConfig loss;
        std::uint64_t seed = 0;
        std::vector<WeightEntry> entries;
        std::vector<float> data;

        template <typename S>
        static WeightStore capture(const std::vector<Param<S> *> &params)
        {
            WeightStore w;
            for (const Param<S> *p : params)
            {
                w.entries.push_back({p->name, p->shape, w.data.size()});
                for (const S &v : p->value)
                {
                    if (!std::isfinite(static_cast<double>(v)))
                        throw NumericError("WeightStore: parameter '" + p->name + "' is not finite");
                    w.data.push_back(static_cast<float>(v));
                }
            }
            return w;
        }

        template <typename S>
        static WeightStore capture(UNet<S> &net, const LossConfig &loss, std::uint64_t seed)
        {
            WeightStore w = capture(net.parameters());
            w.network = net.config();
            w.loss = loss;
            w.seed = seed;
            return w;
        }

        template <typename S>
        void apply(const std::vector<Param<S> *> &params) const
        {
            if (params.size() != entries.size())
                throw ShapeError("WeightStore: " + std::to_string(entries.size()) + " stored tensors, network has " +
                                 std::to_string(params.size()));
            for (std::size_t i = 0; i < params.size(); ++i)
            {
                const WeightEntry &e = entries[i];
                Param<S> &p = *params[i];
                if (e.name != p.name || e.shape != p.shape || e.offset + p.size() > data.size())
                    throw ShapeError("WeightStore: tensor '" + e.name + "' does not match network parameter '" + p.name + "'");
                for (std::size_t k = 0; k < p.size(); ++k)
                    p.value[k] = static_cast<S>(data[e.offset + k]);
            }
        }

        template <typename S>
        UNet<S> build() const
        {
            UNet<S> net(network);
            apply(net.parameters());
            return net;
        }

        nlohmann::json manifest() const
        {
            return nlohmann::json{{"network", network}, {"loss", loss}, {"seed", seed}, {"tensors", entries}, {"n_values", data.size()}};
        }

        bool operator==(const WeightStore &) const = default;
    };
}

#endif
