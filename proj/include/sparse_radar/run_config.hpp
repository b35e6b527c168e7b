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

#ifndef SPARSE_RADAR_RUN_CONFIG_HPP
#define SPARSE_RADAR_RUN_CONFIG_HPP

#include "sparse_radar/eval.hpp"
#include "sparse_radar/nn/optim.hpp"
#include "sparse_radar/nn/train.hpp"
#include "sparse_radar/pipeline.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace sparse_radar
{
    struct PsfSpec
    {
        double range_m = 5.7;
        double u = 0.0;
        std::vector<std::string> estimators{"das", "mf"};
        bool operator==(const PsfSpec &) const = default;
    };
    NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PsfSpec, range_m, u, estimators)

    // Parameter sets for every command; a config file fills any subset.
    struct RunConfig
    {
        ScenarioConfig scenario;
        std::size_t n_scenes = 1;
        nn::NetworkConfig network;
        nn::LossConfig loss;
        nn::OptimizerSpec optimizer;
        double validation_fraction = 0.0;
        double mix_fraction = 0.0; // share of the --mix dataset in training
        MatchConfig match;
        PsfSpec psf;
        std::uint64_t seed = 1;

        void validate() const
        {
            scenario.validate();
            network.validate();
            loss.validate();
            optimizer.validate();
            match.validate();
            if (n_scenes < 1)
                throw ConfigError("n_scenes must be >= 1");
            if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
                throw ConfigError("validation_fraction must be in [0, 1)");
            if (!(mix_fraction >= 0.0 && mix_fraction <= 1.0))
                throw ConfigError("mix_fraction must be in [0, 1]");
        }
    };

    inline void to_json(nlohmann::json &j, const RunConfig &c)
    {
        j = nlohmann::json{{"scenario", c.scenario},
                           {"n_scenes", c.n_scenes},
                           {"network", c.network},
                           {"loss", c.loss},
                           {"optimizer", c.optimizer},
                           {"validation_fraction", c.validation_fraction},
                           {"mix_fraction", c.mix_fraction},
                           {"match", c.match},
                           {"psf", c.psf},
                           {"seed", c.seed}};
    }

    inline void from_json(const nlohmann::json &j, RunConfig &c)
    {
        static const std::vector<std::string> known{"scenario", "n_scenes",            "network",      "loss", "optimizer",
                                                    "match",    "validation_fraction", "mix_fraction", "psf",  "seed"};
        for (const auto &[key, _] : j.items())
            if (std::find(known.begin(), known.end(), key) == known.end())
                throw ConfigError("unknown config key '" + key + "'");
        const RunConfig d;
        try
        {
            c.scenario = j.value("scenario", d.scenario);
            c.n_scenes = j.value("n_scenes", d.n_scenes);
            c.network = j.value("network", d.network);
            c.loss = j.value("loss", d.loss);
            c.optimizer = j.value("optimizer", d.optimizer);
            c.validation_fraction = j.value("validation_fraction", d.validation_fraction);
            c.mix_fraction = j.value("mix_fraction", d.mix_fraction);
            c.match = j.value("match", d.match);
            c.psf = j.value("psf", d.psf);
            c.seed = j.value("seed", d.seed);
        }
        catch (const nlohmann::json::exception &e)
        {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }
}

#endif
