#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dnerv/gradcheck.hpp"
#include "dnerv/ops.hpp"
#include "oracles.hpp"

using namespace dnerv;

namespace {
Tensor<double> rnd(Shape s, Rng& rng, double lo = -1, double hi = 1, bool grad = false) {
    return Tensor<double>::uniform(std::move(s), rng, lo, hi, grad);
}
}  // namespace

TEST_CASE("conv2d: 1x1 identity kernel passes input through") {
    auto x = Tensor<double>::from_data({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    auto w = Tensor<double>::from_data({1, 1, 1, 1}, {1.0});
    auto b = Tensor<double>::zeros({1});
    auto y = conv2d(x, w, b, {1, 0, 1});
    CHECK(y.shape() == Shape{1, 3, 3});
    for (int i = 0; i < 9; ++i) CHECK(y.data()[i] == doctest::Approx(x.data()[i]));
}

TEST_CASE("conv2d: all-ones 2x2 kernel sums the window") {
    auto x = Tensor<double>::full({1, 2, 2}, 1.0);
    auto w = Tensor<double>::full({1, 1, 2, 2}, 1.0);
    auto y = conv2d(x, w, Tensor<double>{}, {1, 0, 1});
    CHECK(y.shape() == Shape{1, 1, 1});
    CHECK(y.item() == doctest::Approx(4.0));
}

TEST_CASE("conv2d matches the nested-loop oracle") {
    Rng rng(7);
    struct Case {
        int C, H, W, O, k, stride, pad, groups;
    };
    // 3x8x8 / 4-out / k3 s2 p1 is the published example; the rest sweep the
    // dispatch paths (pointwise, depthwise, grouped, strided).
    for (const Case& cs : {Case{3, 8, 8, 4, 3, 2, 1, 1}, Case{5, 6, 6, 7, 1, 1, 0, 1},
                           Case{6, 9, 9, 6, 7, 1, 3, 6}, Case{4, 7, 5, 6, 3, 1, 1, 2},
                           Case{3, 12, 8, 5, 2, 2, 0, 1}, Case{2, 5, 5, 4, 5, 3, 2, 2}}) {
        auto x = rnd({cs.C, cs.H, cs.W}, rng);
        auto w = rnd({cs.O, cs.C / cs.groups, cs.k, cs.k}, rng);
        auto b = rnd({cs.O}, rng);
        auto y = conv2d(x, w, b, {cs.stride, cs.pad, cs.groups});
        auto ref = oracle::conv2d_loops(x.data(), cs.C, cs.H, cs.W, w.data(), cs.O, cs.k, b.data(),
                                        cs.stride, cs.pad, cs.groups);
        REQUIRE(y.data().size() == ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i)
            CHECK(y.data()[i] == doctest::Approx(ref[i]).epsilon(1e-10));
    }
}

TEST_CASE("conv2d error cases") {
    Rng rng(3);
    auto x = rnd({4, 6, 6}, rng);
    CHECK_THROWS_AS((void)conv2d(x, rnd({4, 4, 3, 3}, rng), Tensor<double>{}, {1, 1, 3}),
                    ConfigError);  // groups don't divide channels
    CHECK_THROWS_AS((void)conv2d(x, rnd({4, 3, 3, 3}, rng), Tensor<double>{}, {1, 1, 1}),
                    DimensionError);  // weight expects 3 input channels
    CHECK_THROWS_AS((void)conv2d(x, rnd({4, 4, 9, 9}, rng), Tensor<double>{}, {1, 0, 1}),
                    DimensionError);  // kernel larger than input
}

TEST_CASE("conv2d is linear in its input") {
    Rng rng(11);
    auto w = rnd({4, 3, 3, 3}, rng);
    auto x = rnd({3, 8, 8}, rng);
    auto y = rnd({3, 8, 8}, rng);
    const double a = 1.7, b = -0.4;
    auto combo = Tensor<double>::zeros({3, 8, 8});
    for (int i = 0; i < combo.size(); ++i)
        combo.data()[i] = a * x.data()[i] + b * y.data()[i];
    const ConvSpec spec{2, 1, 1};
    const Tensor<double> none;
    auto lhs = conv2d(combo, w, none, spec);
    auto cx = conv2d(x, w, none, spec);
    auto cy = conv2d(y, w, none, spec);
    for (int i = 0; i < lhs.size(); ++i)
        CHECK(lhs.data()[i] ==
              doctest::Approx(a * cx.data()[i] + b * cy.data()[i]).epsilon(1e-10));
}

TEST_CASE("pixel_shuffle follows the definition") {
    auto x = Tensor<double>::from_data({4, 1, 1}, {0, 1, 2, 3});
    auto y = pixel_shuffle(x, 2);
    CHECK(y.shape() == Shape{1, 2, 2});
    CHECK(y.data() == std::vector<double>{0, 1, 2, 3});

    auto z = Tensor<double>::from_data({1, 2, 2}, {5, 6, 7, 8});
    auto id = pixel_shuffle(z, 1);
    CHECK(id.data() == z.data());
}

TEST_CASE("pixel_shuffle inverts exactly") {
    Rng rng(5);
    auto x = rnd({8, 3, 5}, rng);
    auto rt = pixel_unshuffle(pixel_shuffle(x, 2), 2);
    CHECK(rt.data() == x.data());
    CHECK_THROWS_AS((void)pixel_shuffle(rnd({6, 2, 2}, rng), 2), DimensionError);
}

TEST_CASE("layer_norm: constant input maps to beta") {
    auto x = Tensor<double>::full({4, 2, 2}, 3.25);
    auto g = Tensor<double>::full({4}, 1.0);
    auto b = Tensor<double>::zeros({4});
    auto y = layer_norm(x, g, b, 1e-6);
    for (double v : y.data()) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("layer_norm: already-normalized channel pair") {
    auto x = Tensor<double>::from_data({2, 1, 1}, {1.0, -1.0});
    auto g = Tensor<double>::full({2}, 1.0);
    auto b = Tensor<double>::zeros({2});
    auto y = layer_norm(x, g, b, 1e-12);
    CHECK(y.data()[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(y.data()[1] == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("layer_norm normalizes every location") {
    Rng rng(9);
    auto x = rnd({4, 2, 2}, rng);
    auto g = Tensor<double>::full({4}, 1.0);
    auto b = Tensor<double>::zeros({4});
    const double eps = 1e-10;
    auto y = layer_norm(x, g, b, eps);
    for (int p = 0; p < 4; ++p) {
        double m = 0, var = 0;
        for (int c = 0; c < 4; ++c) m += y.data()[c * 4 + p];
        m /= 4;
        for (int c = 0; c < 4; ++c) {
            const double d = y.data()[c * 4 + p] - m;
            var += d * d;
        }
        var /= 4;
        CHECK(std::abs(m) < 1e-8);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("activations at zero") {
    auto x = Tensor<double>::zeros({1});
    CHECK(sigmoid(x).item() == doctest::Approx(0.5));
    CHECK(tanh_act(x).item() == doctest::Approx(0.0));
    CHECK(gelu(x).item() == doctest::Approx(0.0));
}

TEST_CASE("sigmoid gradient at zero is 1/4 via autodiff") {
    auto x = Tensor<double>::zeros({1}, true);
    auto y = sum(sigmoid(x));
    backward(y);
    CHECK(x.grad()[0] == doctest::Approx(0.25));
}

TEST_CASE("GELU matches the quadrature oracle") {
    for (double v : {-2.0, -1.0, 1.0, 2.0}) {
        auto x = Tensor<double>::scalar(v);
        const double expected = v * oracle::normal_cdf_quadrature(v);
        CHECK(gelu(x).item() == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("per-op finite differences stay under 1e-4") {
    const auto results = run_gradcheck_suite(123);
    for (const auto& r : results) {
        INFO(r.name, ": max rel err ", r.max_rel_err);
        CHECK(r.pass);
    }
}

TEST_CASE("reductions and elementwise shapes") {
    Rng rng(2);
    auto a = rnd({2, 3, 4}, rng);
    CHECK(mean(a).size() == 1);
    auto b = rnd({2, 3, 5}, rng);
    CHECK_THROWS_AS((void)add(a, b), DimensionError);
    auto c = concat_channels<double>({a, a});
    CHECK(c.shape() == Shape{4, 3, 4});
}
