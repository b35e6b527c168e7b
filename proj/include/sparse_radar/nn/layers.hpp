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

#ifndef SPARSE_RADAR_NN_LAYERS_HPP
#define SPARSE_RADAR_NN_LAYERS_HPP

#include "sparse_radar/nn/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace sparse_radar::nn
{
    // Square-kernel convolution, stride 1, zero "same" padding. Forward is
    // im2col followed by one GEMM.
    template <typename S>
    class Conv2d
    {
    public:
        Conv2d() = default;
        Conv2d(const std::string &name, int cin, int cout, int k, const std::string &kind = "")
            : weight(name + ".weight", kind.empty() ? (k == 1 ? "conv1x1" : "conv3x3") : kind, {cout, cin, k, k}),
              bias(name + ".bias", kind.empty() ? (k == 1 ? "conv1x1" : "conv3x3") : kind, {cout}),
              name_(name), cin_(cin), cout_(cout), k_(k) {}

        // He-normal weights, zero bias.
        void init(std::mt19937_64 &rng)
        {
            std::normal_distribution<double> g(0.0, std::sqrt(2.0 / (cin_ * k_ * k_)));
            for (S &x : weight.value)
                x = static_cast<S>(g(rng));
            std::fill(bias.value.begin(), bias.value.end(), S(0));
        }

        Tensor<S> forward(const Tensor<S> &x)
        {
            if (x.c != cin_)
                throw ShapeError("layer '" + name_ + "': expected " + std::to_string(cin_) + " input channels, got " + std::to_string(x.c));
            h_ = x.h;
            w_ = x.w;
            const Eigen::Index hw = static_cast<Eigen::Index>(x.plane());
            if (k_ == 1)
                cols_ = ConstMapMat<S>(x.v.data(), cin_, hw);
            else
                im2col(x);
            Tensor<S> y(cout_, h_, w_);
            MapMat<S> ym(y.v.data(), cout_, hw);
            const ConstMapMat<S> wm(weight.value.data(), cout_, static_cast<Eigen::Index>(cin_) * k_ * k_);
            ym.noalias() = wm * cols_;
            for (int o = 0; o < cout_; ++o)
                ym.row(o).array() += bias.value[static_cast<std::size_t>(o)];
            return y;
        }

        Tensor<S> backward(const Tensor<S> &dy)
        {
            const Eigen::Index hw = static_cast<Eigen::Index>(dy.plane());
            const ConstMapMat<S> dym(dy.v.data(), cout_, hw);
            const Eigen::Index kk = static_cast<Eigen::Index>(cin_) * k_ * k_;
            MapMat<S> dw(weight.grad.data(), cout_, kk);
            dw.noalias() += dym * cols_.transpose();
            for (int o = 0; o < cout_; ++o)
                bias.grad[static_cast<std::size_t>(o)] += dym.row(o).sum();
            const ConstMapMat<S> wm(weight.value.data(), cout_, kk);
            RowMat<S> dcols = wm.transpose() * dym;
            Tensor<S> dx(cin_, h_, w_);
            if (k_ == 1)
                std::copy(dcols.data(), dcols.data() + dcols.size(), dx.v.data());
            else
                col2im(dcols, dx);
            return dx;
        }

        std::vector<Param<S> *> params() { return {&weight, &bias}; }
        const std::string &name() const { return name_; }

        Param<S> weight, bias;

    private:
        void im2col(const Tensor<S> &x)
        {
            const int pad = k_ / 2;
            cols_.resize(static_cast<Eigen::Index>(cin_) * k_ * k_, static_cast<Eigen::Index>(x.plane()));
            for (int c = 0; c < cin_; ++c)
                for (int ky = 0; ky < k_; ++ky)
                    for (int kx = 0; kx < k_; ++kx)
                    {
                        S *row = cols_.data() + ((static_cast<std::size_t>(c) * k_ + ky) * k_ + kx) * x.plane();
                        for (int y = 0; y < h_; ++y)
                        {
                            const int sy = y + ky - pad;
                            for (int xx = 0; xx < w_; ++xx)
                            {
                                const int sx = xx + kx - pad;
                                row[static_cast<std::size_t>(y) * w_ + xx] =
                                    (sy >= 0 && sy < h_ && sx >= 0 && sx < w_) ? x.at(c, sy, sx) : S(0);
                            }
                        }
                    }
        }

        void col2im(const RowMat<S> &dcols, Tensor<S> &dx) const
        {
            const int pad = k_ / 2;
            for (int c = 0; c < cin_; ++c)
                for (int ky = 0; ky < k_; ++ky)
                    for (int kx = 0; kx < k_; ++kx)
                    {
                        const S *row = dcols.data() + ((static_cast<std::size_t>(c) * k_ + ky) * k_ + kx) * dx.plane();
                        for (int y = 0; y < h_; ++y)
                        {
                            const int sy = y + ky - pad;
                            if (sy < 0 || sy >= h_)
                                continue;
                            for (int xx = 0; xx < w_; ++xx)
                            {
                                const int sx = xx + kx - pad;
                                if (sx >= 0 && sx < w_)
                                    dx.at(c, sy, sx) += row[static_cast<std::size_t>(y) * w_ + xx];
                            }
                        }
                    }
        }

        std::string name_;
        int cin_ = 0, cout_ = 0, k_ = 1, h_ = 0, w_ = 0;
        RowMat<S> cols_;
    };

    template <typename S>
    class Relu
    {
    public:
        Tensor<S> forward(const Tensor<S> &x)
        {
            Tensor<S> y = x;
            mask_.assign(x.size(), 0);
            for (std::size_t i = 0; i < y.size(); ++i)
            {
                if (y.v[i] > S(0))
                    mask_[i] = 1;
                else
                    y.v[i] = S(0);
            }
            return y;
        }

        Tensor<S> backward(const Tensor<S> &dy) const
        {
            Tensor<S> dx = dy;
            for (std::size_t i = 0; i < dx.size(); ++i)
                if (!mask_[i])
                    dx.v[i] = S(0);
            return dx;
        }

        const std::vector<std::uint8_t> &mask() const { return mask_; }

    private:
        std::vector<std::uint8_t> mask_;
    };

    // 2 x 2 max pooling, stride 2. Ties go to the first element in row-major order.
    template <typename S>
    class MaxPool2
    {
    public:
        Tensor<S> forward(const Tensor<S> &x)
        {
            if (x.h % 2 || x.w % 2)
                throw ShapeError("MaxPool2: spatial size " + std::to_string(x.h) + "x" + std::to_string(x.w) + " is not even");
            in_c_ = x.c;
            in_h_ = x.h;
            in_w_ = x.w;
            Tensor<S> y(x.c, x.h / 2, x.w / 2);
            arg_.resize(y.size());
            std::size_t o = 0;
            for (int c = 0; c < x.c; ++c)
                for (int yy = 0; yy < y.h; ++yy)
                    for (int xx = 0; xx < y.w; ++xx, ++o)
                    {
                        std::size_t best = (static_cast<std::size_t>(c) * x.h + 2 * yy) * x.w + 2 * xx;
                        for (int dy = 0; dy < 2; ++dy)
                            for (int dx = 0; dx < 2; ++dx)
                            {
                                const std::size_t i = (static_cast<std::size_t>(c) * x.h + 2 * yy + dy) * x.w + 2 * xx + dx;
                                if (x.v[i] > x.v[best])
                                    best = i;
                            }
                        arg_[o] = static_cast<std::uint32_t>(best);
                        y.v[o] = x.v[best];
                    }
            return y;
        }

        Tensor<S> backward(const Tensor<S> &dy) const
        {
            Tensor<S> dx(in_c_, in_h_, in_w_);
            for (std::size_t o = 0; o < dy.size(); ++o)
                dx.v[arg_[o]] += dy.v[o];
            return dx;
        }

        const std::vector<std::uint32_t> &argmax() const { return arg_; }

    private:
        int in_c_ = 0, in_h_ = 0, in_w_ = 0;
        std::vector<std::uint32_t> arg_;
    };

    // Nearest-neighbour 2x upsampling.
    template <typename S>
    class Upsample2
    {
    public:
        Tensor<S> forward(const Tensor<S> &x) const
        {
            Tensor<S> y(x.c, 2 * x.h, 2 * x.w);
            for (int c = 0; c < x.c; ++c)
                for (int yy = 0; yy < y.h; ++yy)
                    for (int xx = 0; xx < y.w; ++xx)
                        y.at(c, yy, xx) = x.at(c, yy / 2, xx / 2);
            return y;
        }

        Tensor<S> backward(const Tensor<S> &dy) const
        {
            Tensor<S> dx(dy.c, dy.h / 2, dy.w / 2);
            for (int c = 0; c < dy.c; ++c)
                for (int yy = 0; yy < dy.h; ++yy)
                    for (int xx = 0; xx < dy.w; ++xx)
                        dx.at(c, yy / 2, xx / 2) += dy.at(c, yy, xx);
            return dx;
        }
    };

    template <typename S>
    S sigmoid(S z)
    {
        return z >= S(0) ? S(1) / (S(1) + std::exp(-z)) : std::exp(z) / (S(1) + std::exp(z));
    }

    // Additive attention gate: alpha = sigmoid(psi(relu(W_g g + W_x x))),
    // output x * alpha broadcast over channels. g and x share spatial size.
    template <typename S>
    class AttentionGate
    {
    public:
        AttentionGate() = default;
        AttentionGate(const std::string &name, int f_g, int f_x, int f_int)
            : wg(name + ".wg", f_g, f_int, 1, "attention"), wx(name + ".wx", f_x, f_int, 1, "attention"),
              psi(name + ".psi", f_int, 1, 1, "attention"), name_(name) {}

        void init(std::mt19937_64 &rng)
        {
            wg.init(rng);
            wx.init(rng);
            psi.init(rng);
        }

        Tensor<S> forward(const Tensor<S> &g, const Tensor<S> &x)
        {
            if (g.h != x.h || g.w != x.w)
                throw ShapeError("attention gate '" + name_ + "': gating and skip signals differ in size");
            Tensor<S> a = wg.forward(g);
            const Tensor<S> b = wx.forward(x);
            for (std::size_t i = 0; i < a.size(); ++i)
                a.v[i] += b.v[i];
            const Tensor<S> q = relu_.forward(a);
            alpha_ = psi.forward(q);
            for (S &s : alpha_.v)
                s = sigmoid(s);
            x_ = x;
            Tensor<S> out = x;
            for (int c = 0; c < x.c; ++c)
            {
                S *o = out.channel(c);
                for (std::size_t i = 0; i < x.plane(); ++i)
                    o[i] *= alpha_.v[i];
            }
            return out;
        }

        // Returns (dg, dx).
        std::pair<Tensor<S>, Tensor<S>> backward(const Tensor<S> &dout)
        {
            Tensor<S> dx(x_.c, x_.h, x_.w);
            Tensor<S> ds(1, x_.h, x_.w);
            for (int c = 0; c < x_.c; ++c)
            {
                const S *d = dout.channel(c);
                const S *xv = x_.channel(c);
                S *o = dx.channel(c);
                for (std::size_t i = 0; i < x_.plane(); ++i)
                {
                    o[i] = d[i] * alpha_.v[i];
                    ds.v[i] += d[i] * xv[i];
                }
            }
            for (std::size_t i = 0; i < ds.size(); ++i)
                ds.v[i] *= alpha_.v[i] * (S(1) - alpha_.v[i]);
            const Tensor<S> da = relu_.backward(psi.backward(ds));
            Tensor<S> dg = wg.backward(da);
            const Tensor<S> dxa = wx.backward(da);
            for (std::size_t i = 0; i < dx.size(); ++i)
                dx.v[i] += dxa.v[i];
            return {std::move(dg), std::move(dx)};
        }

        const Tensor<S> &alpha() const { return alpha_; }
        const Relu<S> &relu() const { return relu_; }
        std::vector<Param<S> *> params()
        {
            std::vector<Param<S> *> p;
            for (auto *c : {&wg, &wx, &psi})
                for (auto *q : c->params())
                    p.push_back(q);
            return p;
        }

        Conv2d<S> wg, wx, psi;

    private:
        std::string name_;
        Relu<S> relu_;
        Tensor<S> alpha_, x_;
    };

    // Fully connected layer on a flattened tensor: y = W x + b.
    template <typename S>
    class Linear
    {
    public:
        Linear() = default;
        Linear(const std::string &name, int in, int out)
            : weight(name + ".weight", "linear", {out, in}), bias(name + ".bias", "linear", {out}), in_(in), out_(out) {}

        void init(std::mt19937_64 &rng)
        {
            std::normal_distribution<double> g(0.0, std::sqrt(1.0 / in_));
            for (S &x : weight.value)
                x = static_cast<S>(g(rng));
            std::fill(bias.value.begin(), bias.value.end(), S(0));
        }

        std::vector<S> forward(const std::vector<S> &x)
        {
            if (static_cast<int>(x.size()) != in_)
                throw ShapeError("linear layer '" + weight.name + "': expected " + std::to_string(in_) + " inputs");
            x_ = x;
            std::vector<S> y(static_cast<std::size_t>(out_));
            const ConstMapMat<S> wm(weight.value.data(), out_, in_);
            Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>> xv(x.data(), in_);
            Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>> yv(y.data(), out_);
            yv.noalias() = wm * xv;
            for (int o = 0; o < out_; ++o)
                y[static_cast<std::size_t>(o)] += bias.value[static_cast<std::size_t>(o)];
            return y;
        }

        std::vector<S> backward(const std::vector<S> &dy)
        {
            const ConstMapMat<S> wm(weight.value.data(), out_, in_);
            MapMat<S> dw(weight.grad.data(), out_, in_);
            Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>> dyv(dy.data(), out_);
            Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>> xv(x_.data(), in_);
            dw.noalias() += dyv * xv.transpose();
            for (int o = 0; o < out_; ++o)
                bias.grad[static_cast<std::size_t>(o)] += dy[static_cast<std::size_t>(o)];
            std::vector<S> dx(static_cast<std::size_t>(in_));
            Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>> dxv(dx.data(), in_);
            dxv.noalias() = wm.transpose() * dyv;
            return dx;
        }

        std::vector<Param<S> *> params() { return {&weight, &bias}; }

        Param<S> weight, bias;

    private:
        int in_ = 0, out_ = 0;
        std::vector<S> x_;
    };

    template <typename S>
    Tensor<S> concat_channels(const Tensor<S> &a, const Tensor<S> &b)
    {
        if (a.h != b.h || a.w != b.w)
            throw ShapeError("concat: spatial sizes differ");
        Tensor<S> out(a.c + b.c, a.h, a.w);
        std::copy(a.v.begin(), a.v.end(), out.v.begin());
        std::copy(b.v.begin(), b.v.end(), out.v.begin() + static_cast<std::ptrdiff_t>(a.size()));
        return out;
    }

    template <typename S>
    std::pair<Tensor<S>, Tensor<S>> split_channels(const Tensor<S> &t, int first)
    {
        Tensor<S> a(first, t.h, t.w), b(t.c - first, t.h, t.w);
        std::copy(t.v.begin(), t.v.begin() + static_cast<std::ptrdiff_t>(a.size()), a.v.begin());
        std::copy(t.v.begin() + static_cast<std::ptrdiff_t>(a.size()), t.v.end(), b.v.begin());
        return {std::move(a), std::move(b)};
    }
}

#endif
