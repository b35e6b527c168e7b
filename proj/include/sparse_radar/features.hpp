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

#ifndef SPARSE_RADAR_FEATURES_HPP
#define SPARSE_RADAR_FEATURES_HPP

#include "sparse_radar/common.hpp"
#include "sparse_radar/dsp.hpp"
#include "sparse_radar/geometry.hpp"
#include "sparse_radar/rd_processing.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace sparse_radar
{
    // Wrapped to (-pi, pi].
    inline double wrapped_phase(const cplx &z)
    {
        const double a = std::arg(z);
        return a <= -kPi ? kPi : a;
    }

    struct SteeringMatrix
    {
        Eigen::MatrixXcd v; // N_v x N_theta
        std::vector<double> weights;
        std::vector<double> positions;
        AngleGrid grid;
    };

    // V[m, n] = w_m exp(-j 2 pi / lambda u_n x_m). Positions in ascending
    // virtual order, weights default to 1.
    inline SteeringMatrix steering_matrix(const std::vector<double> &positions, const AngleGrid &grid, double lambda,
                                          std::vector<double> weights = {})
    {
        if (weights.empty())
            weights.assign(positions.size(), 1.0);
        if (weights.size() != positions.size())
            throw ShapeError("steering_matrix: " + std::to_string(weights.size()) + " weights for " +
                             std::to_string(positions.size()) + " elements");
        if (!(lambda > 0.0))
            throw DomainError("steering_matrix: wavelength must be positive");
        SteeringMatrix s{Eigen::MatrixXcd(positions.size(), grid.size()), weights, positions, grid};
        for (std::size_t n = 0; n < grid.size(); ++n)
            for (std::size_t m = 0; m < positions.size(); ++m)
            {
                double cyc = grid[n] * positions[m] / lambda;
                cyc -= std::floor(cyc);
                s.v(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = weights[m] * std::polar(1.0, -2.0 * kPi * cyc);
            }
        return s;
    }

    inline SteeringMatrix steering_matrix(const VirtualArray &array, const AngleGrid &grid, double lambda,
                                          std::vector<double> weights = {})
    {
        return steering_matrix(array.positions(), grid, lambda, std::move(weights));
    }

    // i_s = S_IF(r) . V
    inline std::vector<cplx> das_spectrum(std::span<const cplx> row, const SteeringMatrix &s)
    {
        if (row.size() != static_cast<std::size_t>(s.v.rows()))
            throw ShapeError("das_spectrum: row has " + std::to_string(row.size()) + " entries, steering matrix " +
                             std::to_string(s.v.rows()));
        const Eigen::Map<const Eigen::RowVectorXcd> x(row.data(), static_cast<Eigen::Index>(row.size()));
        const Eigen::RowVectorXcd y = x * s.v;
        return {y.data(), y.data() + y.size()};
    }

    struct CovarianceMatrix
    {
        Eigen::MatrixXcd sigma;
        bool degenerate = false; // input row was all zero
    };

    // Sigma = x x^H / ||x x^H||_F
    inline CovarianceMatrix covariance(std::span<const cplx> row)
    {
        const auto n = static_cast<Eigen::Index>(row.size());
        const Eigen::Map<const Eigen::VectorXcd> x(row.data(), n);
        CovarianceMatrix c{x * x.adjoint(), false};
        const double f = c.sigma.norm();
        if (f == 0.0)
            c.degenerate = true;
        else
            c.sigma /= f;
        return c;
    }

    // Largest K with K (K + 1) / 2 <= n_theta.
    inline std::size_t triangle_fit(std::size_t n_theta)
    {
        std::size_t k = 0;
        while ((k + 1) * (k + 2) / 2 <= n_theta)
            ++k;
        return k;
    }

    // Upper triangle (diagonal included) unrolled row by row and zero padded to
    // n_theta. If the full triangle does not fit, the centred K x K block is used.
    inline std::vector<cplx> cov_feature(const Eigen::MatrixXcd &sigma, std::size_t n_theta)
    {
        auto n = static_cast<std::size_t>(sigma.rows());
        std::size_t lo = 0;
        if (n * (n + 1) / 2 > n_theta)
        {
            const std::size_t k = triangle_fit(n_theta);
            lo = (n - k) / 2;
            n = k;
        }
        std::vector<cplx> out(n_theta);
        std::size_t p = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j)
                out[p++] = sigma(static_cast<Eigen::Index>(lo + i), static_cast<Eigen::Index>(lo + j));
        return out;
    }

    inline const std::array<std::string, 5> &feature_plane_names()
    {
        static const std::array<std::string, 5> names{"abs_is", "phase_is", "re_icov", "im_icov", "phase_icov"};
        return names;
    }

    // Five planes of N_r x N_theta: log10 |i_s| relative to the plane maximum
    // (floored at log_epsilon), arg i_s, Re/Im/arg i_cov.
    struct FeatureImage
    {
        Tensor3<float> planes; // (feature, range, angle)
        double log_epsilon = 1e-6;

        std::size_t n_feat() const { return planes.dim0(); }
        std::size_t n_range() const { return planes.dim1(); }
        std::size_t n_theta() const { return planes.dim2(); }
        bool operator==(const FeatureImage &) const = default;
    };

    inline FeatureImage assemble_input(const std::vector<std::vector<cplx>> &i_s, const std::vector<std::vector<cplx>> &i_cov,
                                       double log_epsilon = 1e-6)
    {
        if (i_s.size() != i_cov.size())
            throw ShapeError("assemble_input: i_s and i_cov stacks differ in length");
        if (!(log_epsilon > 0.0))
            throw ConfigError("assemble_input: log_epsilon must be positive");
        const std::size_t n_r = i_s.size(), n_t = n_r ? i_s.front().size() : 0;
        double peak = 0.0;
        for (std::size_t r = 0; r < n_r; ++r)
        {
            if (i_s[r].size() != n_t || i_cov[r].size() != n_t)
                throw ShapeError("assemble_input: ragged rows");
            for (const cplx &v : i_s[r])
                peak = std::max(peak, std::abs(v));
        }
        FeatureImage f{Tensor3<float>(5, n_r, n_t), log_epsilon};
        const double floor = std::log10(log_epsilon);
        for (std::size_t r = 0; r < n_r; ++r)
            for (std::size_t t = 0; t < n_t; ++t)
            {
                const cplx s = i_s[r][t], c = i_cov[r][t];
                const double mag = peak > 0.0 ? std::log10(std::abs(s) / peak + log_epsilon) : floor;
                f.planes(0, r, t) = static_cast<float>(mag);
                f.planes(1, r, t) = static_cast<float>(wrapped_phase(s));
                f.planes(2, r, t) = static_cast<float>(c.real());
                f.planes(3, r, t) = static_cast<float>(c.imag());
                f.planes(4, r, t) = static_cast<float>(wrapped_phase(c));
            }
        return f;
    }

    // DaS spectrum and covariance feature for every row of S_IF.
    inline FeatureImage build_features(const RangeChannelMatrix &s_if, const SteeringMatrix &steer, double log_epsilon = 1e-6)
    {
        const std::size_t n_r = s_if.n_range(), n_t = steer.grid.size();
        std::vector<std::vector<cplx>> i_s(n_r), i_cov(n_r);
        parallel_for(n_r, [&](std::size_t r)
                     {
            const std::vector<cplx> row = s_if.row(r);
            i_s[r] = das_spectrum(row, steer);
            i_cov[r] = cov_feature(covariance(row).sigma, n_t); });
        return assemble_input(i_s, i_cov, log_epsilon);
    }

    // (Re, Im, arg) of the normalised covariance, 3 x N_v x N_v.
    inline Tensor3<double> reference_cnn_input(std::span<const cplx> x)
    {
        const CovarianceMatrix c = covariance(x);
        const std::size_t n = x.size();
        Tensor3<double> t(3, n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
            {
                const cplx v = c.sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                t(0, i, j) = v.real();
                t(1, i, j) = v.imag();
                t(2, i, j) = wrapped_phase(v);
            }
        return t;
    }
}

#endif
