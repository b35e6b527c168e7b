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

#ifndef SPARSE_RADAR_PIPELINE_HPP
#define SPARSE_RADAR_PIPELINE_HPP

#include "sparse_radar/classical_doa.hpp"
#include "sparse_radar/features.hpp"
#include "sparse_radar/psf.hpp"
#include "sparse_radar/ground_truth.hpp"
#include "sparse_radar/rd_processing.hpp"
#include "sparse_radar/synthesis.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace sparse_radar
{
    struct AngleGridSpec
    {
        std::size_t n_theta = 450;
        double u_min = -1.0;
        double u_max = 1.0;

        AngleGrid build() const { return AngleGrid::uniform(n_theta, u_min, u_max); }
        bool operator==(const AngleGridSpec &) const = default;
    };
    NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AngleGridSpec, n_theta, u_min, u_max)

    // Everything needed to go from a scene to images.
    struct ScenarioConfig
    {
        RadarParams radar;
        std::string array = "four_rx";   // input array for features and baselines
        int enhanced_elements = 256;     // ground-truth array
        AngleGridSpec angles;
        WindowSpec window;               // range/Doppler windows
        int doppler_k = 1;
        int doppler_rank = 1;
        double doppler_min_rel_prominence = 0.1;
        double log_epsilon = 1e-6;
        WindowKind das_window = WindowKind::hann;
        std::size_t music_subarray = 0;  // 0: default length
        MatchedFilterOptions ground_truth;
        SceneGenConfig scenes;
        NoiseSpec noise;

        void validate() const
        {
            radar.validate();
            scenes.validate();
            if (doppler_k < 1 || doppler_rank < 1 || doppler_rank > doppler_k)
                throw ConfigError("scenario: need 1 <= doppler_rank <= doppler_k");
            if (enhanced_elements < 2)
                throw ConfigError("scenario: enhanced array needs at least two elements");
            if (scenes.range_max_m >= radar.max_range())
                throw ConfigError("scenario: scene ranges exceed the unambiguous range");
            (void)angles.build();
            (void)array_by_name(array, radar);
        }

        VirtualArray input_array() const { return array_by_name(array, radar); }
        VirtualArray enhanced_array() const { return enhanced_ula(radar, enhanced_elements); }
        AngleGrid grid() const { return angles.build(); }
    };

    inline void to_json(nlohmann::json &j, const ScenarioConfig &c)
    {
        j = nlohmann::json{{"radar", c.radar},
                           {"array", c.array},
                           {"enhanced_elements", c.enhanced_elements},
                           {"angles", c.angles},
                           {"window", c.window},
                           {"doppler_k", c.doppler_k},
                           {"doppler_rank", c.doppler_rank},
                           {"doppler_min_rel_prominence", c.doppler_min_rel_prominence},
                           {"log_epsilon", c.log_epsilon},
                           {"das_window", to_string(c.das_window)},
                           {"music_subarray", c.music_subarray},
                           {"ground_truth", c.ground_truth},
                           {"scenes", c.scenes},
                           {"noise", c.noise}};
    }

    inline void from_json(const nlohmann::json &j, ScenarioConfig &c)
    {
        const ScenarioConfig d;
        c.radar = j.value("radar", d.radar);
        c.array = j.value("array", d.array);
        c.enhanced_elements = j.value("enhanced_elements", d.enhanced_elements);
        c.angles = j.value("angles", d.angles);
        c.window = j.value("window", d.window);
        c.doppler_k = j.value("doppler_k", d.doppler_k);
        c.doppler_rank = j.value("doppler_rank", d.doppler_rank);
        c.doppler_min_rel_prominence = j.value("doppler_min_rel_prominence", d.doppler_min_rel_prominence);
        c.log_epsilon = j.value("log_epsilon", d.log_epsilon);
        c.das_window = window_from_string(j.value("das_window", to_string(d.das_window)));
        c.music_subarray = j.value("music_subarray", d.music_subarray);
        c.ground_truth = j.value("ground_truth", d.ground_truth);
        c.scenes = j.value("scenes", d.scenes);
        c.noise = j.value("noise", d.noise);
    }

    // Seeds for scene i of a dataset drawn with `seed`.
    inline std::uint64_t scene_seed(std::uint64_t seed, std::uint64_t index)
    {
        return detail::make_stream(seed, index, 0x53434e45u)();
    }
    inline std::uint64_t noise_seed(std::uint64_t seed, std::uint64_t index)
    {
        return detail::make_stream(seed, index, 0x4e4f5345u)();
    }

    // Range-Doppler processing and S_IF for one Doppler rank.
    struct ProcessedCube
    {
        RangeDopplerCube rd;
        DopplerSelection selection;
        RangeChannelMatrix s_if;
    };

    inline ProcessedCube process_cube(const RadarCube &cube, const ScenarioConfig &cfg, int rank = 0)
    {
        ProcessedCube p{range_doppler(cube, cfg.window), {}, {}};
        p.selection = select_doppler_bins(mean_magnitude(p.rd), cfg.doppler_k, cfg.doppler_min_rel_prominence);
        p.s_if = extract_range_channel(p.rd, p.selection, rank > 0 ? rank : cfg.doppler_rank);
        return p;
    }

    inline FeatureImage features_from(const RangeChannelMatrix &s_if, const ScenarioConfig &cfg)
    {
        const SteeringMatrix steer = steering_matrix(s_if.positions, cfg.grid(), cfg.radar.wavelength());
        return build_features(s_if, steer, cfg.log_epsilon);
    }

    // |windowed DaS| per range bin.
    inline Grid2<double> das_image(const RangeChannelMatrix &s_if, const ScenarioConfig &cfg)
    {
        const AngleGrid grid = cfg.grid();
        const SteeringMatrix s = steering_matrix(s_if.positions, grid, cfg.radar.wavelength(),
                                                 positional_taper(cfg.das_window, s_if.positions));
        Grid2<double> img(s_if.n_range(), grid.size());
        parallel_for(s_if.n_range(), [&](std::size_t r)
                     {
            const std::vector<cplx> v = das_spectrum(s_if.row(r), s);
            for (std::size_t t = 0; t < v.size(); ++t)
                img(r, t) = std::abs(v[t]); });
        return img;
    }

    // MUSIC pseudo-spectra, each row scaled by the RMS channel amplitude of its
    // range bin so that rows stay comparable across the image.
    inline Grid2<double> music_image(const RangeChannelMatrix &s_if, const ScenarioConfig &cfg)
    {
        const AngleGrid grid = cfg.grid();
        Grid2<double> img(s_if.n_range(), grid.size());
        parallel_for(s_if.n_range(), [&](std::size_t r)
                     {
            const std::vector<cplx> row = s_if.row(r);
            double power = 0.0;
            for (const cplx &v : row)
                power += std::norm(v);
            if (!(power > 0.0))
                return;
            const double scale = std::sqrt(power / static_cast<double>(row.size()));
            const MusicResult m = music_row(row, s_if.positions, grid, cfg.radar.wavelength(), cfg.music_subarray);
            for (std::size_t t = 0; t < grid.size(); ++t)
                img(r, t) = scale * m.spectrum[t]; });
        return img;
    }

    // Matched-filter image of the scene seen by the enhanced array, noise-free,
    // at the Doppler bins chosen from the input cube.
    inline GroundTruthImage ground_truth_image(const Scene &scene, const ScenarioConfig &cfg, const DopplerSelection &selection,
                                               int rank = 0)
    {
        const VirtualArray enh = cfg.enhanced_array();
        const RadarCube cube = simulate_if_cube(cfg.radar, enh, scene, NoiseSpec{}, 0);
        MatchedFilterOptions opt = cfg.ground_truth;
        opt.window = cfg.window;
        opt.doppler_k = cfg.doppler_k;
        opt.doppler_rank = rank > 0 ? rank : cfg.doppler_rank;
        opt.doppler_min_rel_prominence = cfg.doppler_min_rel_prominence;
        return matched_filter_image(cfg.radar, enh, cube, ImageGrid::range_bins(cfg.radar, cfg.grid()), opt, &selection);
    }

    // One synthetic scene carried through every stage.
    struct SceneProducts
    {
        Scene scene;
        RadarCube cube;
        ProcessedCube processed;
        FeatureImage features;
        GroundTruthImage truth;
    };

    inline SceneProducts make_scene_products(const ScenarioConfig &cfg, std::uint64_t seed, std::uint64_t index)
    {
        SceneProducts p;
        p.scene = generate_point_scene(cfg.scenes, scene_seed(seed, index));
        p.cube = simulate_if_cube(cfg.radar, cfg.input_array(), p.scene, cfg.noise, noise_seed(seed, index));
        p.processed = process_cube(p.cube, cfg);
        p.features = features_from(p.processed.s_if, cfg);
        p.truth = ground_truth_image(p.scene, cfg, p.processed.selection);
        return p;
    }
    // ---- point spread function ----------------------------------------------

    struct PsfResult
    {
        std::string estimator;
        Grid2<double> image;          // N_r x N_theta on the scenario grid
        std::size_t row = 0;          // range bin holding the maximum
        std::vector<double> u, cut;   // that row
        std::vector<double> zoom_u, zoom_cut; // main lobe resampled finely
        double width_deg = 0.0;       // from the zoomed cut
        double sidelobe_db = 0.0;     // from the full cut
    };

    namespace detail
    {
        inline std::size_t argmax_row(const Grid2<double> &img)
        {
            const auto it = std::max_element(img.data().begin(), img.data().end());
            return static_cast<std::size_t>(it - img.data().begin()) / img.cols();
        }

        // Fine grid over the main lobe of a coarse cut (between its first minima).
        inline AngleGrid lobe_grid(const std::vector<double> &cut, const AngleGrid &grid, std::size_t density)
        {
            const std::size_t p = static_cast<std::size_t>(std::max_element(cut.begin(), cut.end()) - cut.begin());
            std::size_t l = p, r = p;
            while (l > 0 && cut[l - 1] <= cut[l])
                --l;
            while (r + 1 < cut.size() && cut[r + 1] <= cut[r])
                ++r;
            l = l > 0 ? l - 1 : 0;
            r = std::min(r + 1, cut.size() - 1);
            return AngleGrid::uniform(std::max<std::size_t>(3, (r - l) * density + 1), grid[l], grid[r]);
        }
    }

    // Noise-free single unit target at (range, u) imaged by one estimator:
    // "das" and "music" on the scenario input array, "mf" (matched filter) on
    // the enhanced array.
    inline PsfResult psf_study(const ScenarioConfig &cfg, const std::string &estimator, double range_m, double u,
                               std::size_t density = 32)
    {
        cfg.validate();
        if (!(range_m > 0.0 && range_m < cfg.radar.max_range()) || !(std::abs(u) < 1.0))
            throw ConfigError("psf: target outside the field of view");
        Scene scene;
        scene.targets.push_back({polar_point(range_m, u), {}, cplx(1.0, 0.0)});
        const AngleGrid grid = cfg.grid();
        const double lambda = cfg.radar.wavelength();
        PsfResult res;
        res.estimator = estimator;
        res.u = grid.u();

        if (estimator == "das" || estimator == "music")
        {
            const RadarCube cube = simulate_if_cube(cfg.radar, cfg.input_array(), scene, NoiseSpec{}, 0);
            const ProcessedCube pc = process_cube(cube, cfg);
            res.image = estimator == "das" ? das_image(pc.s_if, cfg) : music_image(pc.s_if, cfg);
            res.row = detail::argmax_row(res.image);
            res.cut.assign(res.image.row(res.row), res.image.row(res.row) + res.image.cols());
            const AngleGrid zoom = detail::lobe_grid(res.cut, grid, density);
            const std::vector<cplx> row = pc.s_if.row(res.row);
            if (estimator == "das")
                res.zoom_cut = das_windowed(row, pc.s_if.positions, zoom, lambda, cfg.das_window);
            else
                res.zoom_cut = music_row(row, pc.s_if.positions, zoom, lambda, cfg.music_subarray).spectrum;
            res.zoom_u = zoom.u();
        }
        else if (estimator == "mf")
        {
            const VirtualArray enh = cfg.enhanced_array();
            const RadarCube cube = simulate_if_cube(cfg.radar, enh, scene, NoiseSpec{}, 0);
            MatchedFilterOptions opt = cfg.ground_truth;
            opt.window = cfg.window;
            const ImageGrid full = ImageGrid::range_bins(cfg.radar, grid);
            res.image = matched_filter_image(cfg.radar, enh, cube, full, opt).pixels;
            res.row = detail::argmax_row(res.image);
            res.cut.assign(res.image.row(res.row), res.image.row(res.row) + res.image.cols());
            const AngleGrid zoom = detail::lobe_grid(res.cut, grid, density);
            const ImageGrid line{{full.ranges_m[res.row]}, zoom};
            const GroundTruthImage z = matched_filter_image(cfg.radar, enh, cube, line, opt);
            res.zoom_cut.assign(z.pixels.row(0), z.pixels.row(0) + z.pixels.cols());
            res.zoom_u = zoom.u();
        }
        else
            throw ConfigError("psf: unknown estimator '" + estimator + "' (expected das|music|mf)");

        res.width_deg = beam_width_3db(res.zoom_cut, res.zoom_u);
        res.sidelobe_db = peak_sidelobe_db(res.cut);
        return res;
    }
}

#endif
