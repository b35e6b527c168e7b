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

#ifndef SPARSE_RADAR_NN_TENSOR_HPP
#define SPARSE_RADAR_NN_TENSOR_HPP

#include "sparse_radar/common.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace sparse_radar::nn
{
    // Channel-major activation map (C, H, W).
    template <typename S>
    struct Tensor
    {
        int c = 0, h = 0, w = 0;
        std::vector<S> v;

        Tensor() = default;
        Tensor(int channels, int height, int width, S fill = S(0))
            : c(channels), h(height), w(width), v(static_cast<std::size_t>(channels) * height * width, fill) {}

        std::size_t size() const { return v.size(); }
        std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
        S *channel(int k) { return v.data() + static_cast<std::size_t>(k) * plane(); }
        const S *channel(int k) const { return v.data() + static_cast<std::size_t>(k) * plane(); }
        S &at(int k, int y, int x) { return v[(static_cast<std::size_t>(k) * h + y) * w + x]; }
        const S &at(int k, int y, int x) const { return v[(static_cast<std::size_t>(k) * h + y) * w + x]; }
        bool same_shape(const Tensor &o) const { return c == o.c && h == o.h && w == o.w; }
        bool operator==(const Tensor &) const = default;
    };

    template <typename S>
    using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    template <typename S>
    using MapMat = Eigen::Map<RowMat<S>>;
    template <typename S>
    using ConstMapMat = Eigen::Map<const RowMat<S>>;

    // Trainable tensor with its gradient accumulator. `kind` groups parameters
    // for gradient checking (conv3x3, conv1x1, attention, head, linear).
    template <typename S>
    struct Param
    {
        std::string name;
        std::string kind;
        std::vector<int> shape;
        std::vector<S> value;
        std::vector<S> grad;

        Param() = default;
        Param(std::string n, std::string k, std::vector<int> s) : name(std::move(n)), kind(std::move(k)), shape(std::move(s))
        {
            std::size_t count = 1;
            for (int d : shape)
                count *= static_cast<std::size_t>(d);
            value.assign(count, S(0));
            grad.assign(count, S(0));
        }
        std::size_t size() const { return value.size(); }
        void zero_grad() { std::fill(grad.begin(), grad.end(), S(0)); }
    };

    template <typename S>
    void check_finite(const Tensor<S> &t, const std::string &layer)
    {
        for (const S &x : t.v)
            if (!std::isfinite(static_cast<double>(x)))
                throw NumericError("non-finite activation after layer '" + layer + "'");
    }
}

#endif
