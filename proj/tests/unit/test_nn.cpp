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

#include <catch2/catch_amalgamated.hpp>

#include "sparse_radar/nn/grad_check.hpp"
#include "sparse_radar/nn/train.hpp"

#include <cmath>
#include <random>

using namespace sparse_radar;
using namespace sparse_radar::nn;
using Catch::Approx;

namespace
{
    NetworkConfig tiny(Head head, int side = 16, int depth = 2, int base = 4)
    {
        NetworkConfig c;
        c.depth = depth;
        c.base_channels = base;
        c.input_height = side;
        c.input_width = side;
        c.head = head;
        return c;
    }

    template <typename S>
    Tensor<S> random_tensor(int c, int h, int w, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, 1.0);
        Tensor<S> t(c, h, w);
        for (S &v : t.v)
            v = static_cast<S>(g(rng));
        return t;
    }

    // Direct zero-padded correlation.
    Tensor<double> conv_oracle(const Tensor<double> &x, const std::vector<double> &w, const std::vector<double> &b, int cout, int k)
    {
        Tensor<double> y(cout, x.h, x.w);
        const int r = k / 2;
        for (int o = 0; o < cout; ++o)
            for (int yy = 0; yy < x.h; ++yy)
                for (int xx = 0; xx < x.w; ++xx)
                {
                    double s = b[static_cast<std::size_t>(o)];
                    for (int c = 0; c < x.c; ++c)
                        for (int ky = 0; ky < k; ++ky)
                            for (int kx = 0; kx < k; ++kx)
                            {
                                const int sy = yy + ky - r, sx = xx + kx - r;
                                if (sy < 0 || sx < 0 || sy >= x.h || sx >= x.w)
                                    continue;
                                s += w[((static_cast<std::size_t>(o) * x.c + c) * k + ky) * k + kx] * x.at(c, sy, sx);
                            }
                    y.at(o, yy, xx) = s;
                }
        return y;
    }

    std::vector<Sample> toy_samples(int n, int side, const LossConfig &loss, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> pos(2, side - 3);
        std::vector<Sample> out;
        for (int i = 0; i < n; ++i)
        {
            Grid2<double> truth(static_cast<std::size_t>(side), static_cast<std::size_t>(side));
            FeatureImage f;
            f.planes = Tensor3<float>(5, static_cast<std::size_t>(side), static_cast<std::size_t>(side));
            std::normal_distribution<double> g(0.0, 0.1);
            for (float &v : f.planes.data())
                v = static_cast<float>(g(rng));
            for (int t = 0; t < 2; ++t)
            {
                const int y = pos(rng), x = pos(rng);
                truth(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = 1.0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                        f.planes(0, static_cast<std::size_t>(y + dy), static_cast<std::size_t>(x + dx)) += 1.0f;
            }
            out.push_back(make_sample(f, truth, loss));
        }
        return out;
    }
}

TEST_CASE("BCE loss values", "[nn][loss]")
{
    const std::vector<double> half(7, 0.5), y{0, 1, 1, 0, 1, 0, 0};
    CHECK(loss_bce(half, y).value == Approx(std::log(2.0)).epsilon(1e-12));

    const std::vector<double> x{0.9, 0.1}, t{1, 0};
    CHECK(loss_bce(x, t).value == Approx(-(std::log(0.9) + std::log(0.9)) / 2.0).epsilon(1e-12));
    CHECK(loss_bce(x, t).value == Approx(0.105).margin(5e-4));

    const std::vector<double> hard{1, 0, 0, 1};
    const LossValue lv = loss_bce(hard, hard);
    CHECK(lv.clamped == 4);
    CHECK(lv.value == Approx(-std::log1p(-kBceClamp)).epsilon(1e-6));
    CHECK(lv.value < 1e-6);

    CHECK_THROWS_AS(loss_bce(x, std::vector<double>{1.0}), ShapeError);
}

TEST_CASE("MSE plus L1 loss values", "[nn][loss]")
{
    const std::vector<double> ones(9, 1.0);
    CHECK(loss_mse_l1(ones, ones, 0.0).value == 0.0);
    CHECK(loss_mse_l1(ones, ones, 0.1).value == Approx(0.1).epsilon(1e-12));
    CHECK(loss_mse_l1(std::vector<double>{2.0}, std::vector<double>{0.0}, 0.5).value == Approx(5.0).epsilon(1e-12));

    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial)
    {
        std::vector<double> a(6), b(6);
        for (auto &v : a)
            v = g(rng);
        for (auto &v : b)
            v = g(rng);
        CHECK(loss_mse_l1(a, b, 0.0).value > 0.0);
        CHECK(loss_mse_l1(a, b, 0.3).value >= loss_mse_l1(a, b, 0.0).value);
        CHECK(loss_mse_l1(a, a, 0.0).value == 0.0);
        std::vector<double> p(6);
        for (auto &v : p)
            v = 1.0 / (1.0 + std::exp(-g(rng)));
        CHECK(loss_bce(p, std::vector<double>{0, 1, 0, 1, 1, 0}).value > 0.0);
    }
}

TEST_CASE("target preprocessing", "[nn][loss]")
{
    LossConfig cls, reg;
    reg.mode = LossMode::regression;
    reg.beta = 10.0;

    const Grid2<double> zero(3, 4);
    CHECK(preprocess_target(zero, cls) == zero);
    CHECK(preprocess_target(zero, reg) == zero);

    Grid2<double> one(2, 2);
    one(1, 0) = 0.3;
    const Grid2<double> r = preprocess_target(one, reg);
    CHECK(r(1, 0) == Approx(10.0));
    CHECK(r(0, 0) == 0.0);

    Grid2<double> three(1, 3);
    three.data() = {0.0, 0.2, 0.8};
    CHECK(preprocess_target(three, cls).data() == std::vector<double>{0.0, 1.0, 1.0});

    LossConfig floored = cls;
    floored.floor = 0.5;
    CHECK(preprocess_target(three, floored).data() == std::vector<double>{0.0, 0.0, 1.0});

    Grid2<double> neg(1, 1, -1.0);
    CHECK_THROWS_AS(preprocess_target(neg, cls), DomainError);
    LossConfig bad = reg;
    bad.beta = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = reg;
    bad.alpha = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("convolution matches direct evaluation", "[nn][layers]")
{
    for (int k : {1, 3})
    {
        Conv2d<double> conv("c", 3, 4, k);
        std::mt19937_64 rng(11 + static_cast<std::uint64_t>(k));
        conv.init(rng);
        for (double &b : conv.bias.value)
            b = 0.25;
        const Tensor<double> x = random_tensor<double>(3, 5, 7, 2);
        const Tensor<double> y = conv.forward(x);
        const Tensor<double> want = conv_oracle(x, conv.weight.value, conv.bias.value, 4, k);
        REQUIRE(y.same_shape(want));
        for (std::size_t i = 0; i < y.size(); ++i)
            CHECK(y.v[i] == Approx(want.v[i]).margin(1e-12));
    }
    Conv2d<double> conv("c", 2, 1, 3);
    CHECK_THROWS_AS(conv.forward(Tensor<double>(3, 4, 4)), ShapeError);
}

TEST_CASE("pooling and upsampling", "[nn][layers]")
{
    Tensor<double> x(1, 2, 4);
    x.v = {1, 5, 2, 2, 3, 0, 2, 1};
    MaxPool2<double> pool;
    const Tensor<double> y = pool.forward(x);
    CHECK(y.v == std::vector<double>{5, 2});
    const Tensor<double> dx = pool.backward(Tensor<double>(1, 1, 2, 1.0));
    CHECK(dx.v == std::vector<double>{0, 1, 1, 0, 0, 0, 0, 0}); // ties go to the first maximum
    CHECK_THROWS_AS(pool.forward(Tensor<double>(1, 3, 4)), ShapeError);

    Upsample2<double> up;
    const Tensor<double> u = up.forward(y);
    CHECK(u.v == std::vector<double>{5, 5, 2, 2, 5, 5, 2, 2});
    CHECK(up.backward(Tensor<double>(1, 2, 4, 1.0)).v == std::vector<double>{4, 4});
}

TEST_CASE("U-Net forward basics", "[nn][unet]")
{
    SECTION("zero weights give zero output in regression mode")
    {
        UNet<double> net(tiny(Head::none));
        const Tensor<double> out = net.forward(random_tensor<double>(5, 16, 16, 1));
        CHECK(out.c == 1);
        CHECK(out.h == 16);
        CHECK(out.w == 16);
        for (double v : out.v)
            CHECK(v == 0.0);
    }
    SECTION("sigmoid head stays inside (0, 1)")
    {
        UNet<double> net(tiny(Head::sigmoid));
        net.init(4);
        for (double v : net.forward(random_tensor<double>(5, 16, 16, 5)).v)
        {
            CHECK(v > 0.0);
            CHECK(v < 1.0);
        }
    }
    SECTION("shape errors")
    {
        UNet<double> net(tiny(Head::none));
        CHECK_THROWS_AS(net.forward(Tensor<double>(4, 16, 16)), ShapeError);
        CHECK_THROWS_AS(net.forward(Tensor<double>(5, 18, 16)), ShapeError);
        CHECK_NOTHROW(net.forward(Tensor<double>(5, 8, 24)));
        NetworkConfig bad = tiny(Head::none, 12, 3);
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad.depth = 0;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }
    SECTION("non-finite activations name the layer")
    {
        UNet<double> net(tiny(Head::none));
        net.init(1);
        Tensor<double> x = random_tensor<double>(5, 16, 16, 5);
        x.v[17] = std::numeric_limits<double>::infinity();
        try
        {
            net.forward(x);
            FAIL("expected NumericError");
        }
        catch (const NumericError &e)
        {
            CHECK(std::string(e.what()).find("enc0.conv1") != std::string::npos);
        }
    }
}

TEST_CASE("attention gate with identity projections", "[nn][unet]")
{
    const int ch = 3;
    AttentionGate<double> gate("g", ch, ch, ch);
    for (Conv2d<double> *c : {&gate.wg, &gate.wx})
        for (int o = 0; o < ch; ++o)
            c->weight.value[static_cast<std::size_t>(o * ch + o)] = 1.0;
    std::fill(gate.psi.weight.value.begin(), gate.psi.weight.value.end(), 1.0);

    const Tensor<double> x = random_tensor<double>(ch, 6, 5, 8);
    const Tensor<double> out = gate.forward(x, x);
    for (int y = 0; y < 6; ++y)
        for (int xx = 0; xx < 5; ++xx)
        {
            double s = 0.0;
            for (int c = 0; c < ch; ++c)
                s += std::max(0.0, 2.0 * x.at(c, y, xx));
            const double alpha = 1.0 / (1.0 + std::exp(-s));
            CHECK(gate.alpha().at(0, y, xx) == Approx(alpha).epsilon(1e-12));
            CHECK(gate.alpha().at(0, y, xx) >= 0.5);
            for (int c = 0; c < ch; ++c)
                CHECK(out.at(c, y, xx) == Approx(alpha * x.at(c, y, xx)).epsilon(1e-12));
        }
}

TEST_CASE("forward pass is translation consistent", "[nn][unet]")
{
    const int side = 64, depth = 2, stride = 1 << depth;
    UNet<double> net(tiny(Head::none, side, depth));
    net.init(9);
    const Tensor<double> patch = random_tensor<double>(5, 4, 4, 10);
    auto place = [&](int oy, int ox)
    {
        Tensor<double> x(5, side, side);
        for (int c = 0; c < 5; ++c)
            for (int y = 0; y < 4; ++y)
                for (int xx = 0; xx < 4; ++xx)
                    x.at(c, oy + y, ox + xx) = patch.at(c, y, xx);
        return x;
    };
    const Tensor<double> a = net.forward(place(28, 28));
    const Tensor<double> b = net.forward(place(28 + stride, 28 - stride));
    double peak = 0.0;
    for (double v : a.v)
        peak = std::max(peak, std::abs(v));
    REQUIRE(peak > 0.0);
    for (int y = 0; y < side - stride; ++y)
        for (int x = stride; x < side; ++x)
            CHECK(b.at(0, y + stride, x - stride) == Approx(a.at(0, y, x)).margin(1e-12 * peak));
}

TEST_CASE("gradient check: linear layer is exact", "[nn][grad]")
{
    const GradCheckReport r = grad_check_linear(12, 7, 1);
    CHECK(grad_check_linear(3, 40, 2).max_rel_error < 1e-8);
    CHECK(r.kinds.at("linear").checked == 12 * 7 + 7);
    CHECK(r.kinds.at("input").checked == 12);
    CHECK(r.max_rel_error < 1e-8);
}

TEST_CASE("gradient check: toy U-Net", "[nn][grad]")
{
    LossConfig loss;
    for (LossMode mode : {LossMode::regression, LossMode::classification})
        for (bool attention : {true, false})
        {
            loss.mode = mode;
            loss.alpha = mode == LossMode::regression ? 0.1 : 0.0;
            NetworkConfig cfg = tiny(mode == LossMode::classification ? Head::sigmoid : Head::none);
            cfg.use_attention = attention;
            const GradCheckReport r = grad_check(cfg, loss, 21);
            INFO("mode " << to_string(mode) << " attention " << attention);
            for (const char *kind : {"conv3x3", "head", "input"})
                REQUIRE(r.kinds.count(kind));
            CHECK(r.kinds.count("attention") == (attention ? 1u : 0u));
            for (const auto &[kind, k] : r.kinds)
            {
                INFO(kind << ": checked " << k.checked << " skipped " << k.skipped << " of " << k.available << " max "
                          << k.max_rel_error);
                CHECK(k.checked + k.skipped == std::min<std::size_t>(200, k.available));
                CHECK(k.checked * 10 >= (k.checked + k.skipped) * 9);
                CHECK(k.max_rel_error < 1e-4);
            }
        }
}

TEST_CASE("training overfits a single sample", "[nn][train]")
{
    TrainConfig tc;
    tc.network = tiny(Head::none, 16, 2, 8);
    tc.loss.mode = LossMode::regression;
    tc.optimizer.kind = "adam";
    tc.optimizer.learning_rate = 3e-3;
    tc.optimizer.epochs = 400;
    tc.optimizer.batch_size = 1;
    const std::vector<Sample> one = toy_samples(1, 16, tc.loss, 5);
    const TrainResult r = train(one, {}, tc, 3);
    REQUIRE(r.train_loss.size() == 400);
    INFO("initial " << r.train_loss.front() << " final " << r.train_loss.back());
    CHECK(r.train_loss.back() < 1e-3 * r.train_loss.front());
}

TEST_CASE("training is bit-reproducible", "[nn][train]")
{
    TrainConfig tc;
    tc.network = tiny(Head::sigmoid, 16, 2, 4);
    tc.optimizer.epochs = 3;
    tc.optimizer.batch_size = 2;
    const std::vector<Sample> data = toy_samples(5, 16, tc.loss, 8);
    for (const char *kind : {"adam", "sgd"})
    {
        tc.optimizer.kind = kind;
        const TrainResult a = train(data, data, tc, 42);
        const TrainResult b = train(data, data, tc, 42);
        CHECK(a.weights == b.weights);
        CHECK(a.train_loss == b.train_loss);
        CHECK(a.val_loss == b.val_loss);
        const TrainResult c = train(data, data, tc, 43);
        CHECK_FALSE(a.weights == c.weights);
    }
}

TEST_CASE("L1 weight makes regression output sparser", "[nn][train]")
{
    TrainConfig tc;
    tc.network = tiny(Head::none, 16, 2, 8);
    tc.loss.mode = LossMode::regression;
    tc.optimizer.learning_rate = 2e-3;
    tc.optimizer.epochs = 60;
    tc.optimizer.batch_size = 2;
    const std::vector<Sample> data = toy_samples(8, 16, tc.loss, 12);

    auto near_zero_fraction = [&](double alpha)
    {
        tc.loss.alpha = alpha;
        const TrainResult r = train(data, {}, tc, 7);
        UNet<float> net = r.weights.build<float>();
        std::size_t small = 0, total = 0;
        for (const Sample &s : data)
            for (float v : net.forward(s.input).v)
            {
                small += std::abs(v) < 1e-3 * tc.loss.beta;
                ++total;
            }
        return static_cast<double>(small) / static_cast<double>(total);
    };
    const double plain = near_zero_fraction(0.0), sparse = near_zero_fraction(0.1);
    INFO("near-zero fraction alpha=0: " << plain << ", alpha=0.1: " << sparse);
    CHECK(sparse > plain);
}

TEST_CASE("training guards", "[nn][train]")
{
    TrainConfig tc;
    tc.network = tiny(Head::sigmoid);
    CHECK_THROWS_AS(train({}, {}, tc, 1), ConfigError);
    const std::vector<Sample> data = toy_samples(1, 16, tc.loss, 1);
    tc.optimizer.batch_size = 0;
    CHECK_THROWS_AS(train(data, {}, tc, 1), ConfigError);
    tc.optimizer.batch_size = 1;
    tc.loss.mode = LossMode::regression;
    CHECK_THROWS_AS(train(data, {}, tc, 1), ConfigError);

    tc.network.head = Head::none;
    tc.optimizer.kind = "sgd";
    tc.optimizer.learning_rate = 1e6;
    tc.optimizer.epochs = 50;
    CHECK_THROWS_AS(train(toy_samples(4, 16, tc.loss, 2), {}, tc, 1), NumericError);
}

TEST_CASE("weight store round trip and mismatch", "[nn][weights]")
{
    UNet<float> net(tiny(Head::sigmoid));
    net.init(77);
    const WeightStore w = WeightStore::capture(net, LossConfig{}, 77);
    UNet<float> copy = w.build<float>();
    const Tensor<float> x = random_tensor<float>(5, 16, 16, 3);
    CHECK(copy.forward(x) == net.forward(x));
    CHECK(w.manifest()["tensors"].size() == net.parameters().size());

    UNet<float> other(tiny(Head::sigmoid, 16, 2, 8));
    CHECK_THROWS_AS(w.apply(other.parameters()), ShapeError);
}

TEST_CASE("dataset mixing", "[nn][train]")
{
    const LossConfig loss;
    const std::vector<Sample> a = toy_samples(30, 16, loss, 1), b = toy_samples(5, 16, loss, 2);
    const std::vector<Sample> m = mix_datasets(a, b, 0.25, 9);
    CHECK(m.size() == 40);
    std::size_t from_b = 0;
    for (const Sample &s : m)
        for (const Sample &t : b)
            from_b += s.input == t.input;
    CHECK(from_b == 10);
    CHECK(mix_datasets(a, b, 0.0, 9).size() == 30);
    CHECK(mix_datasets(a, b, 1.0, 9).size() == 5);
    CHECK_THROWS_AS(mix_datasets(a, b, 1.5, 9), ConfigError);
    CHECK(mix_datasets(a, b, 0.25, 9).size() == m.size());
}
