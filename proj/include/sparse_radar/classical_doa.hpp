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

#ifndef SPARSE_RADAR_CLASSICAL_DOA_HPP
#define SPARSE_RADAR_CLASSICAL_DOA_HPP

#include "sparse_radar/common.hpp"
#include "sparse_radar/dsp.hpp"
#include "sparse_radar/features.hpp"
#include "sparse_radar/geometry.hpp"
#include "sparse_radar/peaks.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <span>
#include <vector>

namespace sparse_radar
{
    // |S_IF(r) . V| with a tapered steering matrix.
    inline std::vector<double> das_windowed(std::span<const cplx> row, const std::vector<double> &positions, const AngleGrid &grid,
                                            double lambda, WindowKind window = WindowKind::hann)
    {
        const SteeringMatrix s = steering_matrix(positions, grid, lambda, positional_taper(window, positions));
        const std::vector<cplx> i_s = das_spectrum(row, s);
        std::vector<double> out(i_s.size());
        for (std::size_t i = 0; i < i_s.size(); ++i)
            out[i] = std::abs(i_s[i]);
        return out;
    }

    // Eigenvalues descending, eigenvectors in matching columns.
    struct EigenDecomposition
    {
        Eigen::VectorXd values;
        Eigen::MatrixXcd vectors;
    };

    inline EigenDecomposition eigen_decompose(const Eigen::MatrixXcd &sigma)
    {
        if (sigma.rows() != sigma.cols() || sigma.rows() == 0)
            throw ShapeError("eigen_decompose: matrix must be square and non-empty");
        if (!sigma.allFinite())
            throw NumericError("eigen_decompose: non-finite entries");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sigma);
        if (solver.info() != Eigen::Success)
            throw NumericError("eigen_decompose: solver did not converge");
        const Eigen::Index n = sigma.rows();
        EigenDecomposition e{solver.eigenvalues().reverse(), Eigen::MatrixXcd(n, n)};
        for (Eigen::Index i = 0; i < n; ++i)
            e.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
        return e;
    }

    struct SmoothedCovariance
    {
        Eigen::MatrixXcd sigma;         // L x L, Hermitian PSD
        std::vector<double> positions;  // element positions of the first subarray
        std::size_t n_subarrays = 0;
        std::size_t effective_snapshots = 0; // independent looks for AIC
    };

    // Integer offsets of `positions` on the grid of the smallest spacing.
    // Throws if the positions are not on a common grid.
    inline std::vector<long> integer_grid(const std::vector<double> &positions)
    {
        if (positions.empty())
            throw GeometryError("integer_grid: empty array");
        double pitch = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < positions.size(); ++i)
        {
            const double d = positions[i] - positions[i - 1];
            if (!(d > 0.0))
                throw GeometryError("integer_grid: positions must be strictly increasing");
            pitch = std::min(pitch, d);
        }
        std::vector<long> g(positions.size(), 0);
        for (std::size_t i = 1; i < positions.size(); ++i)
        {
            const double q = (positions[i] - positions[0]) / pitch;
            g[i] = std::lround(q);
            if (std::abs(q - static_cast<double>(g[i])) > 1e-6)
                throw GeometryError("integer_grid: array is not on a uniform grid");
        }
        return g;
    }

    inline std::size_t default_subarray_length(std::size_t n_v) { return (2 * n_v + 2) / 3; }

    // Forward-backward spatial smoothing of one snapshot. On a uniform line the
    // subarrays are the N - L + 1 windows of length L (L = 0 picks ceil(2N/3)).
    // On a thinned line the subarray is the largest offset set Q with Q + s in
    // the array for all shifts s < S, S chosen to maximise min(|Q|, 2S); L is
    // ignored there.
    inline SmoothedCovariance smoothed_covariance(std::span<const cplx> row, const std::vector<double> &positions, std::size_t L = 0)
    {
        const std::size_t n = row.size();
        if (n != positions.size())
            throw ShapeError("smoothed_covariance: row and positions differ in length");
        if (n == 0)
            throw GeometryError("smoothed_covariance: empty array");
        const std::vector<long> g = integer_grid(positions);
        const bool uniform = static_cast<std::size_t>(g.back()) + 1 == n;

        std::vector<long> sub;   // offsets of the first subarray
        std::size_t shifts = 0;
        if (uniform)
        {
            if (L == 0)
                L = default_subarray_length(n);
            if (L < 1 || L > n)
                throw DomainError("smoothed_covariance: subarray length " + std::to_string(L) + " outside [1, " + std::to_string(n) + "]");
            sub.resize(L);
            std::iota(sub.begin(), sub.end(), 0L);
            shifts = n - L + 1;
        }
        else
        {
            const std::set<long> present(g.begin(), g.end());
            std::size_t best_score = 0;
            for (std::size_t s = 1; s <= n; ++s)
            {
                std::vector<long> q;
                for (long p : g)
                {
                    bool ok = true;
                    for (std::size_t t = 1; t < s && ok; ++t)
                        ok = present.count(p + static_cast<long>(t)) > 0;
                    if (ok)
                        q.push_back(p);
                }
                if (q.empty())
                    break;
                const std::size_t score = std::min(q.size(), 2 * s);
                if (score > best_score || (score == best_score && q.size() > sub.size()))
                {
                    best_score = score;
                    sub = q;
                    shifts = s;
                }
            }
        }

        std::vector<std::size_t> index_of(static_cast<std::size_t>(g.back()) + 1, n);
        for (std::size_t i = 0; i < n; ++i)
            index_of[static_cast<std::size_t>(g[i])] = i;

        const auto m = static_cast<Eigen::Index>(sub.size());
        Eigen::MatrixXcd rf = Eigen::MatrixXcd::Zero(m, m);
        Eigen::VectorXcd x(m);
        for (std::size_t s = 0; s < shifts; ++s)
        {
            for (Eigen::Index i = 0; i < m; ++i)
                x(i) = row[index_of[static_cast<std::size_t>(sub[static_cast<std::size_t>(i)] + static_cast<long>(s))]];
            rf.noalias() += x * x.adjoint();
        }
        rf /= static_cast<double>(shifts);
        // Backward term J conj(R) J needs a mirror-symmetric offset set; otherwise
        // only the forward average is used.
        bool symmetric = true;
        for (std::size_t i = 0; i < sub.size(); ++i)
            symmetric = symmetric && (sub[i] - sub.front() == sub.back() - sub[sub.size() - 1 - i]);
        SmoothedCovariance out;
        if (symmetric)
        {
            Eigen::MatrixXcd rb(m, m);
            for (Eigen::Index i = 0; i < m; ++i)
                for (Eigen::Index j = 0; j < m; ++j)
                    rb(i, j) = std::conj(rf(m - 1 - i, m - 1 - j));
            out.sigma = 0.5 * (rf + rb);
        }
        else
            out.sigma = rf;
        out.sigma = 0.5 * (out.sigma + out.sigma.adjoint()).eval();
        out.n_subarrays = shifts;
        out.effective_snapshots = (symmetric ? 2 : 1) * std::max<std::size_t>(1, (static_cast<std::size_t>(g.back()) + 1) / (static_cast<std::size_t>(sub.back() - sub.front()) + 1));
        out.positions.resize(sub.size());
        for (std::size_t i = 0; i < sub.size(); ++i)
            out.positions[i] = positions[index_of[static_cast<std::size_t>(sub[i])]];
        return out;
    }

    inline double aic_value(const std::vector<double> &lambda_desc, std::size_t k, std::size_t n_snapshots)
    {
        const std::size_t m = lambda_desc.size();
        const std::size_t tail = m - k;
        double arith = 0.0, log_geom = 0.0;
        for (std::size_t i = k; i < m; ++i)
        {
            arith += lambda_desc[i];
            log_geom += std::log(lambda_desc[i]);
        }
        arith /= static_cast<double>(tail);
        log_geom /= static_cast<double>(tail);
        const double ratio = std::max(0.0, std::log(arith) - log_geom);
        return 2.0 * static_cast<double>(n_snapshots) * static_cast<double>(tail) * ratio +
               2.0 * static_cast<double>(k) * static_cast<double>(2 * m - k);
    }

    // k = argmin_{0 <= k < M} AIC(k). Eigenvalues are clamped to 1e-15 lambda_max
    // before taking logs; an all-zero spectrum yields 0.
    inline std::size_t aic_order(const Eigen::VectorXd &eigenvalues, std::size_t n_snapshots)
    {
        const auto m = static_cast<std::size_t>(eigenvalues.size());
        if (m < 2)
            throw DomainError("aic_order: need at least two eigenvalues");
        if (n_snapshots < 1)
            throw DomainError("aic_order: need at least one snapshot");
        std::vector<double> lam(eigenvalues.data(), eigenvalues.data() + m);
        std::sort(lam.begin(), lam.end(), std::greater<>());
        if (!(lam.front() > 0.0))
            return 0;
        const double floor = 1e-15 * lam.front();
        for (double &v : lam)
            v = std::max(v, floor);
        std::size_t best = 0;
        double best_val = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < m; ++k)
        {
            const double a = aic_value(lam, k, n_snapshots);
            if (a < best_val)
            {
                best_val = a;
                best = k;
            }
        }
        return best;
    }

    inline std::size_t aic_order(const EigenDecomposition &e, std::size_t n_snapshots) { return aic_order(e.values, n_snapshots); }

    // P(u) = 1 / |E_n^H b(u)|^2 normalised to max 1. b(u) is the signal
    // manifold of the array, i.e. the conjugate of the DaS steering column, so
    // the pseudo-spectrum shares its angle axis with the DaS output.
    inline std::vector<double> music_spectrum(const Eigen::MatrixXcd &sigma, const std::vector<double> &positions, std::size_t k,
                                              const AngleGrid &grid, double lambda)
    {
        const auto m = static_cast<std::size_t>(sigma.rows());
        if (positions.size() != m)
            throw ShapeError("music_spectrum: positions and covariance size differ");
        if (k < 1 || k >= m)
            throw DomainError("music_spectrum: source count " + std::to_string(k) + " must be in [1, " + std::to_string(m - 1) + "]");
        const EigenDecomposition e = eigen_decompose(sigma);
        const Eigen::MatrixXcd en = e.vectors.rightCols(static_cast<Eigen::Index>(m - k));
        const SteeringMatrix s = steering_matrix(positions, grid, lambda);
        const Eigen::MatrixXcd proj = en.adjoint() * s.v.conjugate();
        std::vector<double> p(grid.size());
        double peak = 0.0;
        for (std::size_t n = 0; n < grid.size(); ++n)
        {
            const double d = proj.col(static_cast<Eigen::Index>(n)).squaredNorm();
            p[n] = 1.0 / std::max(d, 1e-300);
            peak = std::max(peak, p[n]);
        }
        for (double &v : p)
            v /= peak;
        return p;
    }

    struct MusicResult
    {
        std::vector<double> spectrum;
        std::size_t order = 0;
    };

    // Smoothing, AIC (unless forced_k > 0) and pseudo-spectrum for one row. An
    // order of 0 is raised to 1 so a spectrum is always produced.
    inline MusicResult music_row(std::span<const cplx> row, const std::vector<double> &positions, const AngleGrid &grid,
                                 double lambda, std::size_t L = 0, std::size_t forced_k = 0)
    {
        const SmoothedCovariance sc = smoothed_covariance(row, positions, L);
        const std::size_t m = static_cast<std::size_t>(sc.sigma.rows());
        if (m < 2)
            throw DomainError("music_row: subarray too small for MUSIC");
        std::size_t k = forced_k;
        if (k == 0)
            k = aic_order(eigen_decompose(sc.sigma), sc.effective_snapshots);
        k = std::clamp<std::size_t>(k, 1, m - 1);
        return {music_spectrum(sc.sigma, sc.positions, k, grid, lambda), k};
    }
}

#endif
