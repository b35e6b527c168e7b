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

#ifndef SPARSE_RADAR_COMMON_HPP
#define SPARSE_RADAR_COMMON_HPP

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sparse_radar
{
    using cplx = std::complex<double>;
    using cplxf = std::complex<float>;

    inline constexpr double kSpeedOfLight = 299792458.0; // [m/s]
    inline constexpr double kPi = std::numbers::pi;

    inline double deg2rad(double deg) { return deg * kPi / 180.0; }
    inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

    // Error hierarchy. ConfigError maps to CLI exit code 2, everything else to 3.
    struct Error : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };
    struct ConfigError : Error
    {
        using Error::Error;
    };
    struct GeometryError : Error // invalid or empty array geometry
    {
        using Error::Error;
    };
    struct DomainError : Error // argument outside the mathematical domain
    {
        using Error::Error;
    };
    struct ShapeError : Error // mismatched dimensions
    {
        using Error::Error;
    };
    struct NumericError : Error // singular geometry, non-finite values, divergence
    {
        using Error::Error;
    };

    // Dense row-major 2-D array.
    template <typename T>
    class Grid2
    {
    public:
        Grid2() = default;
        Grid2(std::size_t rows, std::size_t cols, T fill = T{})
            : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

        std::size_t rows() const { return rows_; }
        std::size_t cols() const { return cols_; }
        std::size_t size() const { return data_.size(); }
        bool empty() const { return data_.empty(); }

        T &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
        const T &operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

        T *row(std::size_t r) { return data_.data() + r * cols_; }
        const T *row(std::size_t r) const { return data_.data() + r * cols_; }

        std::vector<T> &data() { return data_; }
        const std::vector<T> &data() const { return data_; }

        bool operator==(const Grid2 &) const = default;

    private:
        std::size_t rows_ = 0, cols_ = 0;
        std::vector<T> data_;
    };

    // Dense row-major 3-D array, index (i, j, k) with k fastest.
    template <typename T>
    class Tensor3
    {
    public:
        Tensor3() = default;
        Tensor3(std::size_t n0, std::size_t n1, std::size_t n2, T fill = T{})
            : n0_(n0), n1_(n1), n2_(n2), data_(n0 * n1 * n2, fill) {}

        std::size_t dim0() const { return n0_; }
        std::size_t dim1() const { return n1_; }
        std::size_t dim2() const { return n2_; }
        std::size_t size() const { return data_.size(); }

        T &operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[(i * n1_ + j) * n2_ + k]; }
        const T &operator()(std::size_t i, std::size_t j, std::size_t k) const { return data_[(i * n1_ + j) * n2_ + k]; }

        T *slice(std::size_t i, std::size_t j) { return data_.data() + (i * n1_ + j) * n2_; }
        const T *slice(std::size_t i, std::size_t j) const { return data_.data() + (i * n1_ + j) * n2_; }

        std::vector<T> &data() { return data_; }
        const std::vector<T> &data() const { return data_; }

        bool operator==(const Tensor3 &) const = default;

    private:
        std::size_t n0_ = 0, n1_ = 0, n2_ = 0;
        std::vector<T> data_;
    };

    // Worker count from SPARSE_RADAR_THREADS (default 1).
    inline unsigned thread_count()
    {
        if (const char *env = std::getenv("SPARSE_RADAR_THREADS"))
        {
            const long n = std::strtol(env, nullptr, 10);
            if (n >= 1)
                return static_cast<unsigned>(std::min<long>(n, 256));
        }
        return 1;
    }

    // Runs fn(i) for i in [0, n). Work is split into contiguous blocks, so results
    // are identical for any thread count as long as fn(i) only writes its own slot.
    template <typename Fn>
    void parallel_for(std::size_t n, Fn &&fn, unsigned threads = thread_count())
    {
        threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
        if (threads <= 1)
        {
            for (std::size_t i = 0; i < n; ++i)
                fn(i);
            return;
        }
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        pool.reserve(threads);
        const std::size_t block = (n + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t)
        {
            const std::size_t lo = t * block, hi = std::min(n, lo + block);
            if (lo >= hi)
                break;
            pool.emplace_back([lo, hi, t, &fn, &errors]
                              {
                try { for (std::size_t i = lo; i < hi; ++i) fn(i); }
                catch (...) { errors[t] = std::current_exception(); } });
        }
        for (auto &th : pool)
            th.join();
        for (auto &e : errors)
            if (e)
                std::rethrow_exception(e);
    }
}

#endif
