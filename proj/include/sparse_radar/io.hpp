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

#ifndef SPARSE_RADAR_IO_HPP
#define SPARSE_RADAR_IO_HPP

#include "sparse_radar/features.hpp"
#include "sparse_radar/nn/weights.hpp"
#include "sparse_radar/rd_processing.hpp"
#include "sparse_radar/synthesis.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace sparse_radar::io
{
    namespace fs = std::filesystem;

    struct IoError : Error // unreadable, unwritable or malformed files
    {
        using Error::Error;
    };

    // ---- primitives ------------------------------------------------------------

    inline void write_text(const fs::path &path, const std::string &text)
    {
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw IoError("cannot write " + path.string());
        f << text;
        if (!f)
            throw IoError("write failed: " + path.string());
    }

    inline std::string read_text(const fs::path &path)
    {
        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw IoError("cannot read " + path.string());
        std::ostringstream ss;
        ss << f.rdbuf();
        return ss.str();
    }

    inline void write_json(const fs::path &path, const nlohmann::json &j) { write_text(path, j.dump(2) + "\n"); }

    inline nlohmann::json read_json(const fs::path &path)
    {
        const std::string text = read_text(path);
        try
        {
            return nlohmann::json::parse(text);
        }
        catch (const nlohmann::json::parse_error &e)
        {
            throw ConfigError(path.string() + ": " + e.what());
        }
    }

    // Little-endian float32 stream.
    inline void write_f32(const fs::path &path, const std::vector<float> &v)
    {
        std::vector<std::uint32_t> raw(v.size());
        std::memcpy(raw.data(), v.data(), v.size() * sizeof(float));
        if constexpr (std::endian::native == std::endian::big)
            for (auto &w : raw)
                w = __builtin_bswap32(w);
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw IoError("cannot write " + path.string());
        f.write(reinterpret_cast<const char *>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
        if (!f)
            throw IoError("write failed: " + path.string());
    }

    inline std::vector<float> read_f32(const fs::path &path, std::size_t expected)
    {
        std::ifstream f(path, std::ios::binary | std::ios::ate);
        if (!f)
            throw IoError("cannot read " + path.string());
        const auto bytes = static_cast<std::size_t>(f.tellg());
        if (bytes != expected * 4)
            throw IoError(path.string() + ": expected " + std::to_string(expected * 4) + " bytes, found " + std::to_string(bytes));
        f.seekg(0);
        std::vector<std::uint32_t> raw(expected);
        f.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(bytes));
        if constexpr (std::endian::native == std::endian::big)
            for (auto &w : raw)
                w = __builtin_bswap32(w);
        std::vector<float> v(expected);
        std::memcpy(v.data(), raw.data(), bytes);
        return v;
    }

    // <stem>.bin and <stem>.json
    inline fs::path bin_path(const fs::path &stem) { return fs::path(stem.string() + ".bin"); }
    inline fs::path meta_path(const fs::path &stem) { return fs::path(stem.string() + ".json"); }

    inline nlohmann::json read_sidecar(const fs::path &stem, const std::string &format)
    {
        nlohmann::json j = read_json(meta_path(stem));
        if (j.value("format", std::string()) != format)
            throw IoError(meta_path(stem).string() + ": not a " + format + " sidecar");
        return j;
    }

    // ---- radar cube ---------------------------------------------------------------

    inline void save_cube(const fs::path &stem, const RadarCube &cube)
    {
        cube.validate();
        std::vector<float> v(cube.data.size() * 2);
        for (std::size_t i = 0; i < cube.data.size(); ++i)
        {
            v[2 * i] = cube.data.data()[i].real();
            v[2 * i + 1] = cube.data.data()[i].imag();
        }
        write_f32(bin_path(stem), v);
        write_json(meta_path(stem), {{"format", "radar_cube"},
                                     {"n_v", cube.n_channels()},
                                     {"n_chirp", cube.n_chirp()},
                                     {"n_samples", cube.n_samples()},
                                     {"params", cube.params},
                                     {"array", cube.array}});
    }

    inline RadarCube load_cube(const fs::path &stem)
    {
        const nlohmann::json j = read_sidecar(stem, "radar_cube");
        RadarCube cube;
        cube.params = j.at("params").get<RadarParams>();
        cube.array = j.at("array").get<VirtualArray>();
        const std::size_t nv = j.at("n_v"), nc = j.at("n_chirp"), ns = j.at("n_samples");
        const std::vector<float> v = read_f32(bin_path(stem), nv * nc * ns * 2);
        cube.data = Tensor3<cplxf>(nv, nc, ns);
        for (std::size_t i = 0; i < cube.data.size(); ++i)
            cube.data.data()[i] = cplxf(v[2 * i], v[2 * i + 1]);
        cube.validate();
        return cube;
    }

    // S_IF in the cube layout with one chirp: (N_v, 1, N_r), columns ascending.
    inline void save_range_channel(const fs::path &stem, const RangeChannelMatrix &m, const RadarParams &params)
    {
        std::vector<float> v(m.n_v() * m.n_range() * 2);
        for (std::size_t ch = 0; ch < m.n_v(); ++ch)
            for (std::size_t r = 0; r < m.n_range(); ++r)
            {
                const cplx z = m.s_if(r, ch);
                v[2 * (ch * m.n_range() + r)] = static_cast<float>(z.real());
                v[2 * (ch * m.n_range() + r) + 1] = static_cast<float>(z.imag());
            }
        write_f32(bin_path(stem), v);
        write_json(meta_path(stem), {{"format", "radar_cube"},
                                     {"n_v", m.n_v()},
                                     {"n_chirp", 1},
                                     {"n_samples", m.n_range()},
                                     {"params", params},
                                     {"positions_m", m.positions},
                                     {"doppler_bin", m.doppler_bin},
                                     {"doppler_rank", m.doppler_rank}});
    }

    // ---- feature image -------------------------------------------------------------

    inline void save_features(const fs::path &stem, const FeatureImage &f)
    {
        write_f32(bin_path(stem), f.planes.data());
        const auto &names = feature_plane_names();
        write_json(meta_path(stem), {{"format", "feature_image"},
                                     {"n_r", f.n_range()},
                                     {"n_theta", f.n_theta()},
                                     {"n_feat", f.n_feat()},
                                     {"plane_names", std::vector<std::string>(names.begin(), names.end())},
                                     {"log_epsilon", f.log_epsilon}});
    }

    inline FeatureImage load_features(const fs::path &stem)
    {
        const nlohmann::json j = read_sidecar(stem, "feature_image");
        FeatureImage f;
        const std::size_t nf = j.at("n_feat"), nr = j.at("n_r"), nt = j.at("n_theta");
        f.log_epsilon = j.at("log_epsilon");
        f.planes = Tensor3<float>(nf, nr, nt);
        f.planes.data() = read_f32(bin_path(stem), nf * nr * nt);
        return f;
    }

    // ---- real images -----------------------------------------------------------------

    struct ImageMeta
    {
        std::vector<double> ranges_m;
        std::vector<double> u;
    };

    inline void save_image(const fs::path &stem, const Grid2<double> &img, const ImageMeta &meta = {})
    {
        std::vector<float> v(img.size());
        for (std::size_t i = 0; i < img.size(); ++i)
            v[i] = static_cast<float>(img.data()[i]);
        write_f32(bin_path(stem), v);
        nlohmann::json j{{"format", "image"}, {"rows", img.rows()}, {"cols", img.cols()}};
        if (!meta.ranges_m.empty())
            j["ranges_m"] = meta.ranges_m;
        if (!meta.u.empty())
            j["u"] = meta.u;
        write_json(meta_path(stem), j);
    }

    inline Grid2<double> load_image(const fs::path &stem, ImageMeta *meta = nullptr)
    {
        const nlohmann::json j = read_sidecar(stem, "image");
        const std::size_t rows = j.at("rows"), cols = j.at("cols");
        const std::vector<float> v = read_f32(bin_path(stem), rows * cols);
        Grid2<double> img(rows, cols);
        for (std::size_t i = 0; i < v.size(); ++i)
            img.data()[i] = static_cast<double>(v[i]);
        if (meta)
        {
            meta->ranges_m = j.value("ranges_m", std::vector<double>{});
            meta->u = j.value("u", std::vector<double>{});
        }
        return img;
    }

    // 8-bit binary graymap of 20 log10(|v| / max), clipped to [-dynamic_db, 0].
    inline void write_pgm(const fs::path &path, const Grid2<double> &img, double dynamic_db = 40.0)
    {
        double peak = 0.0;
        for (double v : img.data())
            if (std::isfinite(v))
                peak = std::max(peak, std::abs(v));
        std::string out = "P5\n" + std::to_string(img.cols()) + " " + std::to_string(img.rows()) + "\n255\n";
        const std::size_t header = out.size();
        out.resize(header + img.size());
        for (std::size_t i = 0; i < img.size(); ++i)
        {
            const double v = std::abs(img.data()[i]);
            double level = 0.0;
            if (peak > 0.0 && v > 0.0 && std::isfinite(v))
                level = std::clamp(1.0 + 20.0 * std::log10(v / peak) / dynamic_db, 0.0, 1.0);
            out[header + i] = static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * level)));
        }
        write_text(path, out);
    }

    // ---- weights -----------------------------------------------------------------------

    inline void save_weights(const fs::path &stem, const nn::WeightStore &w)
    {
        write_f32(bin_path(stem), w.data);
        nlohmann::json m = w.manifest();
        m["format"] = "weights";
        write_json(meta_path(stem), m);
    }

    inline nn::WeightStore load_weights(const fs::path &stem)
    {
        const nlohmann::json j = read_sidecar(stem, "weights");
        nn::WeightStore w;
        w.network = j.at("network").get<nn::NetworkConfig>();
        w.loss = j.at("loss").get<nn::LossConfig>();
        w.seed = j.at("seed").get<std::uint64_t>();
        w.entries = j.at("tensors").get<std::vector<nn::WeightEntry>>();
        w.data = read_f32(bin_path(stem), j.at("n_values").get<std::size_t>());
        for (float v : w.data)
            if (!std::isfinite(v))
                throw IoError(bin_path(stem).string() + ": non-finite weight");
        return w;
    }

    // ---- CSV -------------------------------------------------------------------------

    inline std::string num(double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    inline void write_spectrum_csv(const fs::path &path, const std::vector<double> &u, const std::vector<double> &value)
    {
        if (u.size() != value.size())
            throw ShapeError("spectrum CSV: u and value differ in length");
        std::string s = "u,value\n";
        for (std::size_t i = 0; i < u.size(); ++i)
            s += num(u[i]) + "," + num(value[i]) + "\n";
        write_text(path, s);
    }

    inline void write_loss_csv(const fs::path &path, const std::vector<double> &train, const std::vector<double> &val)
    {
        std::string s = "epoch,train_loss,val_loss\n";
        for (std::size_t e = 0; e < train.size(); ++e)
            s += std::to_string(e) + "," + num(train[e]) + "," + (e < val.size() ? num(val[e]) : std::string()) + "\n";
        write_text(path, s);
    }
}

#endif
