#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dnerv/gradcheck.hpp"
#include "dnerv/metrics.hpp"
#include "dnerv/ops.hpp"

using namespace dnerv;

TEST_CASE("psnr: identical frames hit the 100 dB cap") {
    Rng rng(1);
    auto x = Tensor<double>::uniform({3, 16, 16}, rng, 0, 1);
    CHECK(psnr(x, x) == 100.0);
}

TEST_CASE("psnr: uniform error of 0.1 scores 20 dB") {
    auto x = Tensor<double>::full({3, 8, 8}, 0.4);
    auto y = Tensor<double>::full({3, 8, 8}, 0.5);
    CHECK(psnr(x, y) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("psnr matches a direct-loop MSE oracle") {
    Rng rng(2);
    auto x = Tensor<double>::uniform({3, 12, 9}, rng, 0, 1);
    auto y = Tensor<double>::uniform({3, 12, 9}, rng, 0, 1);
    double mse = 0;
    for (int i = 0; i < x.size(); ++i) {
        const double d = x.data()[i] - y.data()[i];
        mse += d * d;
    }
    mse /= x.size();
    CHECK(psnr(x, y) == doctest::Approx(10.0 * std::log10(1.0 / mse)).epsilon(1e-9));
    CHECK_THROWS_AS((void)psnr(x, Tensor<double>::zeros({3, 9, 12})), DimensionError);
}

TEST_CASE("psnr decreases strictly as error grows") {
    Rng rng(3);
    auto x = Tensor<double>::uniform({3, 16, 16}, rng, 0.2, 0.8);
    double prev = 1e9;
    for (double amp : {0.01, 0.02, 0.05, 0.1, 0.2, 0.4}) {
        auto y = Tensor<double>::from_data(x.shape(), x.data());
        for (int i = 0; i < y.size(); ++i) y.data()[i] += (i % 2 ? amp : -amp);
        const double p = psnr(x, y);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("ssim of a frame with itself is exactly 1") {
    Rng rng(4);
    auto x = Tensor<double>::uniform({3, 24, 24}, rng, 0, 1);
    CHECK(ssim(x, x) == 1.0);
}

TEST_CASE("ssim on constant frames reduces to the luminance term") {
    auto x = Tensor<double>::full({3, 16, 16}, 0.5);
    auto y = Tensor<double>::full({3, 16, 16}, 0.6);
    const double c1 = 1e-4;
    const double expected = (2 * 0.5 * 0.6 + c1) / (0.25 + 0.36 + c1);
    CHECK(ssim(x, y) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("ssim is symmetric") {
    Rng rng(5);
    auto x = Tensor<double>::uniform({3, 20, 20}, rng, 0, 1);
    auto y = Tensor<double>::uniform({3, 20, 20}, rng, 0, 1);
    CHECK(std::abs(ssim(x, y) - ssim(y, x)) < 1e-12);
}

TEST_CASE("ssim never exceeds 1; equality only at identity") {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        auto x = Tensor<double>::uniform({3, 16, 16}, rng, 0, 1);
        auto y = Tensor<double>::uniform({3, 16, 16}, rng, 0, 1);
        const double s = ssim(x, y);
        CHECK(s <= 1.0 + 1e-12);
        CHECK(s < 1.0 - 1e-6);  // random pairs stay clearly below 1
    }
}

TEST_CASE("ssim rejects frames smaller than the window") {
    auto x = Tensor<double>::full({3, 8, 8}, 0.5);
    CHECK_THROWS_AS((void)ssim(x, x), ConfigError);
}

TEST_CASE("ssim gradient agrees with finite differences") {
    Rng rng(7);
    auto x = Tensor<double>::uniform({3, 16, 16}, rng, 0.05, 0.95, true);
    auto y = Tensor<double>::uniform({3, 16, 16}, rng, 0.05, 0.95);
    const double err = check_gradients([&] { return ssim_graph(x, y); }, {x}, 12, rng);
    CHECK(err < 1e-3);
}
