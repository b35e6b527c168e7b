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

#ifndef SPARSE_RADAR_NN_OPTIM_HPP
#define SPARSE_RADAR_NN_OPTIM_HPP

#include "sparse_radar/nn/tensor.hpp"

#include <json.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace sparse_radar::nn
{
    struct OptimizerSpec
    {
        std::string kind = "adam"; // adam | sgd
        double learning_rate = 1e-3;
        double momentum = 0.9;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double epsilon = 1e-8;
        int epochs = 50;
        int batch_size = 4;

        void validate() const
        {
            if (kind != "adam" && kind != "sgd")
                throw ConfigError("optimizer kind must be adam or sgd");
            if (!(learning_rate > 0.0))
                throw ConfigError("optimizer: learning rate must be positive");
            if (epochs < 1)
                throw ConfigError("optimizer: epochs must be >= 1");
            if (batch_size < 1)
                throw ConfigError("optimizer: batch size must be >= 1");
        }
    };
    NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(OptimizerSpec, kind, learning_rate, momentum, beta1, beta2, epsilon, epochs,
                                                    batch_size)

    // SGD with heavy-ball momentum, or Adam. Updates use the accumulated
    // gradients as they stand; callers average over the batch.
    template <typename S>
    class Optimizer
    {
    public:
        Optimizer(const OptimizerSpec &spec, std::vector<Param<S> *> params) : spec_(spec), params_(std::move(params))
        {
            spec.validate();
            for (auto *p : params_)
            {
                m_.emplace_back(p->size(), 0.0);
                v_.emplace_back(p->size(), 0.0);
            }
        }

        void step()
        {
            ++t_;
            const double bc1 = 1.0 - std::pow(spec_.beta1, static_cast<double>(t_));
            const double bc2 = 1.0 - std::pow(spec_.beta2, static_cast<double>(t_));
            for (std::size_t i = 0; i < params_.size(); ++i)
            {
                Param<S> &p = *params_[i];
                auto &m = m_[i];
                auto &v = v_[i];
                for (std::size_t k = 0; k < p.size(); ++k)
                {
                    const double g = static_cast<double>(p.grad[k]);
                    if (spec_.kind == "sgd")
                    {
                        m[k] = spec_.momentum * m[k] + g;
                        p.value[k] -= static_cast<S>(spec_.learning_rate * m[k]);
                    }
                    else
                    {
                        m[k] = spec_.beta1 * m[k] + (1.0 - spec_.beta1) * g;
                        v[k] = spec_.beta2 * v[k] + (1.0 - spec_.beta2) * g * g;
                        p.value[k] -= static_cast<S>(spec_.learning_rate * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + spec_.epsilon));
                    }
                }
            }
        }

    private:
        OptimizerSpec spec_;
        std::vector<Param<S> *> params_;
        std::vector<std::vector<double>> m_, v_;
        long t_ = 0;
    };
}

#endif
