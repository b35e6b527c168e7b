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

#include "sparse_radar/io.hpp"
#include "sparse_radar/run_config.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace sparse_radar;
using nlohmann::json;

namespace
{
    struct Common
    {
        std::string config, out;
        std::optional<std::uint64_t> seed;
    };

    std::string entry_name(std::size_t i)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "scene_%04zu", i);
        return buf;
    }

    RunConfig load_config(const Common &c)
    {
        RunConfig cfg;
        if (!c.config.empty())
        {
            if (!fs::exists(c.config))
                throw ConfigError("config file not found: " + c.config);
            cfg = io::read_json(c.config).get<RunConfig>();
        }
        if (c.seed)
            cfg.seed = *c.seed;
        return cfg;
    }

    fs::path prepare_out(const Common &c)
    {
        const fs::path out(c.out);
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec || !fs::is_directory(out))
            throw io::IoError("cannot create output directory " + out.string());
        return out;
    }

    void finish(const fs::path &out, const RunConfig &cfg, const std::string &command, const json &entries, json extra = json::object())
    {
        io::write_json(out / "resolved_config.json", json{{"command", command}, {"config", cfg}});
        json m{{"command", command}, {"entries", entries}};
        for (auto &[k, v] : extra.items())
            m[k] = v;
        io::write_json(out / "manifest.json", m);
    }

    // Reads a directory written by another command.
    json read_manifest(const fs::path &dir, const std::string &expected = "")
    {
        const fs::path p = dir / "manifest.json";
        if (!fs::exists(p))
            throw io::IoError("no manifest.json in " + dir.string());
        json m = io::read_json(p);
        if (!expected.empty() && m.value("command", std::string()) != expected)
            throw ConfigError(dir.string() + " was written by '" + m.value("command", std::string()) + "', expected '" + expected +
                              "'");
        return m;
    }

    io::ImageMeta image_meta(const ScenarioConfig &s)
    {
        return {ImageGrid::range_bins(s.radar, s.grid()).ranges_m, s.grid().u()};
    }

    void save_image_with_pgm(const fs::path &stem, const Grid2<double> &img, const io::ImageMeta &meta)
    {
        io::save_image(stem, img, meta);
        io::write_pgm(fs::path(stem.string() + ".pgm"), img);
    }

    // The simulated scenes of a simulate directory, processed with the run's scenario.
    struct SimEntry
    {
        std::string name;
        fs::path cube, gt, scene;
    };

    std::vector<SimEntry> sim_entries(const fs::path &dir)
    {
        const json m = read_manifest(dir, "simulate");
        std::vector<SimEntry> out;
        for (const json &e : m.at("entries"))
            out.push_back({e.at("name"), dir / e.at("cube").get<std::string>(), dir / e.at("gt").get<std::string>(),
                           dir / e.at("scene").get<std::string>()});
        if (out.empty())
            throw ConfigError(dir.string() + ": empty dataset");
        return out;
    }

    // ---- commands -----------------------------------------------------------------

    int cmd_simulate(const Common &c, std::optional<std::size_t> n, const std::string &array)
    {
        RunConfig cfg = load_config(c);
        if (n)
            cfg.n_scenes = *n;
        if (!array.empty())
            cfg.scenario.array = array;
        cfg.validate();
        const fs::path out = prepare_out(c);
        json entries = json::array();
        for (std::size_t i = 0; i < cfg.n_scenes; ++i)
        {
            const std::string name = entry_name(i);
            const SceneProducts p = make_scene_products(cfg.scenario, cfg.seed, i);
            io::write_json(out / (name + ".scene.json"), p.scene);
            io::save_cube(out / (name + ".cube"), p.cube);
            save_image_with_pgm(out / (name + ".gt"), p.truth.pixels, image_meta(cfg.scenario));
            entries.push_back({{"name", name},
                               {"scene", name + ".scene.json"},
                               {"cube", name + ".cube"},
                               {"gt", name + ".gt"},
                               {"n_v", p.cube.n_channels()},
                               {"n_targets", p.scene.targets.size()}});
        }
        finish(out, cfg, "simulate", entries, {{"array", cfg.scenario.array}, {"n_v", cfg.scenario.input_array().size()}});
        std::cout << "simulate: " << cfg.n_scenes << " scenes -> " << out.string() << "\n";
        return 0;
    }

    int cmd_features(const Common &c, const std::string &input, bool export_sif)
    {
        RunConfig cfg = load_config(c);
        cfg.validate();
        const fs::path out = prepare_out(c);
        json entries = json::array();
        for (const SimEntry &e : sim_entries(input))
        {
            const ProcessedCube pc = process_cube(io::load_cube(e.cube), cfg.scenario);
            io::save_features(out / (e.name + ".features"), features_from(pc.s_if, cfg.scenario));
            json j{{"name", e.name}, {"features", e.name + ".features"}};
            if (export_sif)
            {
                io::save_range_channel(out / (e.name + ".sif"), pc.s_if, cfg.scenario.radar);
                j["sif"] = e.name + ".sif";
            }
            entries.push_back(j);
        }
        finish(out, cfg, "features", entries);
        return 0;
    }

    int cmd_gt(const Common &c, const std::string &input)
    {
        RunConfig cfg = load_config(c);
        cfg.validate();
        const fs::path out = prepare_out(c);
        json entries = json::array();
        for (const SimEntry &e : sim_entries(input))
        {
            const Scene scene = io::read_json(e.scene).get<Scene>();
            const ProcessedCube pc = process_cube(io::load_cube(e.cube), cfg.scenario);
            save_image_with_pgm(out / (e.name + ".image"), ground_truth_image(scene, cfg.scenario, pc.selection).pixels,
                                image_meta(cfg.scenario));
            entries.push_back({{"name", e.name}, {"image", e.name + ".image"}});
        }
        finish(out, cfg, "gt", entries, {{"estimator", "gt"}});
        return 0;
    }

    int cmd_baseline(const Common &c, const std::string &input, const std::string &which, std::optional<std::size_t> row)
    {
        RunConfig cfg = load_config(c);
        cfg.validate();
        const fs::path out = prepare_out(c);
        json entries = json::array();
        for (const SimEntry &e : sim_entries(input))
        {
            const ProcessedCube pc = process_cube(io::load_cube(e.cube), cfg.scenario);
            const Grid2<double> img = which == "das" ? das_image(pc.s_if, cfg.scenario) : music_image(pc.s_if, cfg.scenario);
            save_image_with_pgm(out / (e.name + ".image"), img, image_meta(cfg.scenario));
            const std::size_t r = row ? *row : detail::argmax_row(img);
            if (r >= img.rows())
                throw ConfigError("--row " + std::to_string(r) + " outside [0, " + std::to_string(img.rows()) + ")");
            io::write_spectrum_csv(out / (e.name + ".spectrum.csv"), cfg.scenario.grid().u(),
                                   std::vector<double>(img.row(r), img.row(r) + img.cols()));
            entries.push_back({{"name", e.name}, {"image", e.name + ".image"}, {"spectrum", e.name + ".spectrum.csv"}, {"row", r}});
        }
        finish(out, cfg, which, entries, {{"estimator", which}});
        return 0;
    }

    std::vector<nn::Sample> load_samples(const fs::path &dir, const RunConfig &cfg)
    {
        std::vector<nn::Sample> out;
        for (const SimEntry &e : sim_entries(dir))
        {
            const ProcessedCube pc = process_cube(io::load_cube(e.cube), cfg.scenario);
            out.push_back(nn::make_sample(features_from(pc.s_if, cfg.scenario), io::load_image(e.gt), cfg.loss));
        }
        return out;
    }

    int cmd_train(const Common &c, const std::string &input, const std::string &mix, std::optional<int> epochs,
                  std::optional<double> lr)
    {
        RunConfig cfg = load_config(c);
        if (epochs)
            cfg.optimizer.epochs = *epochs;
        if (lr)
            cfg.optimizer.learning_rate = *lr;
        cfg.validate();
        const fs::path out = prepare_out(c);
        std::vector<nn::Sample> data = load_samples(input, cfg);
        if (!mix.empty())
            data = nn::mix_datasets(data, load_samples(mix, cfg), cfg.mix_fraction, cfg.seed);
        const std::size_t n_val = static_cast<std::size_t>(cfg.validation_fraction * static_cast<double>(data.size()));
        if (n_val >= data.size())
            throw ConfigError("validation split leaves no training data");
        const std::vector<nn::Sample> val(data.end() - static_cast<std::ptrdiff_t>(n_val), data.end());
        data.resize(data.size() - n_val);

        const nn::TrainConfig tc{cfg.network, cfg.loss, cfg.optimizer};
        const nn::TrainResult r = nn::train(data, val, tc, cfg.seed,
                                            [](int epoch, double tl, double vl)
                                            {
                                                std::cout << "epoch " << epoch << " train " << tl;
                                                if (std::isfinite(vl))
                                                    std::cout << " val " << vl;
                                                std::cout << "\n";
                                            });
        io::save_weights(out / "weights", r.weights);
        io::write_loss_csv(out / "loss.csv", r.train_loss, r.val_loss);
        finish(out, cfg, "train", json::array({{{"weights", "weights"}, {"loss", "loss.csv"}}}),
               {{"n_train", data.size()}, {"n_val", val.size()}, {"clamped", r.clamped}});
        return 0;
    }

    int cmd_infer(const Common &c, const std::string &input, const std::string &weights, std::optional<int> doppler_k)
    {
        RunConfig cfg = load_config(c);
        if (doppler_k)
        {
            cfg.scenario.doppler_k = *doppler_k;
            cfg.scenario.doppler_rank = 1;
        }
        cfg.validate();
        if (weights.empty() || !fs::exists(io::meta_path(weights)) || !fs::exists(io::bin_path(weights)))
            throw io::IoError("weights not found: " + weights);
        const nn::WeightStore w = io::load_weights(weights);
        nn::UNet<float> net = w.build<float>();
        const fs::path out = prepare_out(c);
        const io::ImageMeta meta = image_meta(cfg.scenario);
        json entries = json::array();
        for (const SimEntry &e : sim_entries(input))
        {
            const RadarCube cube = io::load_cube(e.cube);
            const RangeDopplerCube rd = range_doppler(cube, cfg.scenario.window);
            const DopplerSelection sel =
                select_doppler_bins(mean_magnitude(rd), cfg.scenario.doppler_k, cfg.scenario.doppler_min_rel_prominence);
            std::vector<Grid2<double>> ranks;
            json j{{"name", e.name}, {"ranks", json::array()}};
            for (int k = 1; k <= cfg.scenario.doppler_k; ++k)
            {
                const FeatureImage f = features_from(extract_range_channel(rd, sel, k), cfg.scenario);
                if (static_cast<int>(f.n_range()) != w.network.input_height || static_cast<int>(f.n_theta()) != w.network.input_width ||
                    static_cast<int>(f.n_feat()) != w.network.input_channels)
                    throw ConfigError("weights were trained for " + std::to_string(w.network.input_height) + "x" +
                                      std::to_string(w.network.input_width) + " inputs, features are " + std::to_string(f.n_range()) +
                                      "x" + std::to_string(f.n_theta()));
                ranks.push_back(nn::predict(net, f));
                const std::string stem = e.name + ".rank" + std::to_string(k);
                save_image_with_pgm(out / stem, ranks.back(), meta);
                j["ranks"].push_back(stem);
            }
            save_image_with_pgm(out / (e.name + ".image"), fuse_doppler_images(ranks), meta);
            j["image"] = e.name + ".image";
            entries.push_back(j);
        }
        finish(out, cfg, "infer", entries, {{"estimator", "dnn"}});
        return 0;
    }

    int cmd_evaluate(const Common &c, const std::string &input, const std::vector<std::string> &estimates)
    {
        RunConfig cfg = load_config(c);
        cfg.validate();
        if (estimates.empty())
            throw ConfigError("evaluate: give at least one --estimate NAME=DIR");
        const std::vector<SimEntry> sim = sim_entries(input);
        std::vector<Grid2<double>> gt;
        for (const SimEntry &e : sim)
            gt.push_back(io::load_image(e.gt));
        std::vector<Estimator> est;
        for (const std::string &spec : estimates)
        {
            const auto eq = spec.find('=');
            if (eq == std::string::npos || eq == 0)
                throw ConfigError("--estimate expects NAME=DIR, got '" + spec + "'");
            const fs::path dir = spec.substr(eq + 1);
            const json m = read_manifest(dir);
            std::map<std::string, std::string> by_name;
            for (const json &e : m.at("entries"))
                by_name[e.at("name")] = e.at("image");
            Estimator x{spec.substr(0, eq), {}};
            for (const SimEntry &e : sim)
            {
                const auto it = by_name.find(e.name);
                if (it == by_name.end())
                    throw ConfigError(dir.string() + " has no image for " + e.name);
                x.images.push_back(io::load_image(dir / it->second));
            }
            est.push_back(std::move(x));
        }
        const fs::path out = prepare_out(c);
        const MetricsReport rep = evaluate_dataset(est, gt, cfg.match);
        std::ostringstream csv;
        write_metrics_csv(csv, rep);
        io::write_text(out / "metrics.csv", csv.str());
        json failed = json::object();
        for (const auto &[name, n] : rep.failed_bins)
            failed[name] = n;
        finish(out, cfg, "evaluate", json::array({{{"metrics", "metrics.csv"}}}), {{"failed_bins", failed}});
        std::cout << csv.str();
        return 0;
    }

    int cmd_fuse(const Common &c, const std::vector<std::string> &images)
    {
        RunConfig cfg = load_config(c);
        std::vector<Grid2<double>> imgs;
        io::ImageMeta meta;
        for (const std::string &s : images)
            imgs.push_back(io::load_image(s, &meta));
        const fs::path out = prepare_out(c);
        save_image_with_pgm(out / "fused", fuse_doppler_images(imgs), meta);
        finish(out, cfg, "fuse", json::array({{{"image", "fused"}, {"inputs", images}}}));
        return 0;
    }

    int cmd_psf(const Common &c, const std::string &scene_file, std::vector<std::string> estimators, std::optional<double> range,
                std::optional<double> u, const std::string &array)
    {
        RunConfig cfg = load_config(c);
        if (range)
            cfg.psf.range_m = *range;
        if (u)
            cfg.psf.u = *u;
        if (!array.empty())
            cfg.scenario.array = array;
        if (!estimators.empty())
            cfg.psf.estimators = estimators;
        if (!scene_file.empty())
        {
            const Scene s = io::read_json(scene_file).get<Scene>();
            if (s.targets.size() != 1)
                throw ConfigError("psf: scene must contain exactly one target, found " + std::to_string(s.targets.size()));
            const double r = s.targets.front().position.norm();
            cfg.psf.range_m = r;
            cfg.psf.u = s.targets.front().position.x / r;
        }
        cfg.validate();
        const fs::path out = prepare_out(c);
        json report = json::object(), entries = json::array();
        for (const std::string &name : cfg.psf.estimators)
        {
            const PsfResult r = psf_study(cfg.scenario, name, cfg.psf.range_m, cfg.psf.u);
            io::write_spectrum_csv(out / ("psf_" + name + ".csv"), r.u, r.cut);
            io::write_spectrum_csv(out / ("psf_" + name + ".zoom.csv"), r.zoom_u, r.zoom_cut);
            save_image_with_pgm(out / ("psf_" + name), r.image, image_meta(cfg.scenario));
            report[name] = {{"width_3db_deg", r.width_deg}, {"peak_sidelobe_db", r.sidelobe_db}, {"row", r.row}};
            entries.push_back({{"name", name}, {"image", "psf_" + name}, {"cut", "psf_" + name + ".csv"}});
            std::cout << name << ": 3-dB width " << r.width_deg << " deg, peak sidelobe " << r.sidelobe_db << " dB\n";
        }
        io::write_json(out / "psf_report.json", report);
        finish(out, cfg, "psf", entries);
        return 0;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"sparse-radar: FMCW MIMO radar simulation, imaging and DNN-based angle estimation"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App *s, bool needs_out = true)
    {
        s->add_option("--config", common.config, "JSON run configuration");
        s->add_option("--seed", common.seed, "random seed (overrides the config)");
        auto *o = s->add_option("--out", common.out, "output directory");
        if (needs_out)
            o->required();
    };

    std::optional<std::size_t> n_scenes;
    std::string array, input, weights, mix, scene_file;
    std::optional<int> epochs, doppler_k;
    std::optional<double> lr, range, u;
    std::optional<std::size_t> row;
    bool export_sif = false;
    std::vector<std::string> estimates, images, estimators;

    auto *sim = app.add_subcommand("simulate", "simulate scenes, radar cubes and ground-truth images");
    add_common(sim);
    sim->add_option("--n", n_scenes, "number of scenes");
    sim->add_option("--array", array, "input array: full|six_rx|four_rx (fig4a|fig4b|fig4c)");

    auto *psf = app.add_subcommand("psf", "point spread function of one target");
    add_common(psf);
    psf->add_option("--scene", scene_file, "single-target scene JSON");
    psf->add_option("--estimator", estimators, "das|music|mf (repeatable)");
    psf->add_option("--range", range, "target range [m]");
    psf->add_option("--u", u, "target azimuth sine");
    psf->add_option("--array", array, "input array for das/music");

    auto *feat = app.add_subcommand("features", "DNN input planes for every simulated cube");
    add_common(feat);
    feat->add_option("--input", input, "simulate output directory")->required();
    feat->add_flag("--export-sif", export_sif, "also write the range-channel matrices");

    auto *gt = app.add_subcommand("gt", "matched-filter ground truth for every simulated scene");
    add_common(gt);
    gt->add_option("--input", input, "simulate output directory")->required();

    auto *das = app.add_subcommand("das", "windowed delay-and-sum images");
    add_common(das);
    das->add_option("--input", input, "simulate output directory")->required();
    das->add_option("--row", row, "range bin exported as spectrum CSV (default: strongest)");

    auto *music = app.add_subcommand("music", "smoothed MUSIC images with AIC order selection");
    add_common(music);
    music->add_option("--input", input, "simulate output directory")->required();
    music->add_option("--row", row, "range bin exported as spectrum CSV (default: strongest)");

    auto *train = app.add_subcommand("train", "train the U-Net on a simulated dataset");
    add_common(train);
    train->add_option("--input", input, "simulate output directory")->required();
    train->add_option("--mix", mix, "second simulate directory mixed in at mix_fraction");
    train->add_option("--epochs", epochs, "training epochs");
    train->add_option("--lr", lr, "learning rate");

    auto *infer = app.add_subcommand("infer", "run trained weights on every Doppler rank and fuse");
    add_common(infer);
    infer->add_option("--input", input, "simulate output directory")->required();
    infer->add_option("--weights", weights, "weights stem (without .bin/.json)")->required();
    infer->add_option("--doppler-k", doppler_k, "number of Doppler ranks");

    auto *evaluate = app.add_subcommand("evaluate", "detection metrics against the ground truth");
    add_common(evaluate);
    evaluate->add_option("--input", input, "simulate output directory (ground truth)")->required();
    evaluate->add_option("--estimate", estimates, "NAME=DIR of an image-producing command (repeatable)");

    auto *fuse = app.add_subcommand("fuse", "pixelwise maximum of images");
    add_common(fuse);
    fuse->add_option("--image", images, "image stem (repeatable)")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try
    {
        if (sim->parsed())
            return cmd_simulate(common, n_scenes, array);
        if (psf->parsed())
            return cmd_psf(common, scene_file, estimators, range, u, array);
        if (feat->parsed())
            return cmd_features(common, input, export_sif);
        if (gt->parsed())
            return cmd_gt(common, input);
        if (das->parsed())
            return cmd_baseline(common, input, "das", row);
        if (music->parsed())
            return cmd_baseline(common, input, "music", row);
        if (train->parsed())
            return cmd_train(common, input, mix, epochs, lr);
        if (infer->parsed())
            return cmd_infer(common, input, weights, doppler_k);
        if (evaluate->parsed())
            return cmd_evaluate(common, input, estimates);
        if (fuse->parsed())
            return cmd_fuse(common, images);
    }
    catch (const ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
