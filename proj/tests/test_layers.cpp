#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dnerv/layers.hpp"

using namespace dnerv;

TEST_CASE("convnext stage halves spatial dims at stride 2") {
    Rng rng(1);
    auto stage = ConvNextStage<double>::make(3, 16, 2, 0, rng);
    auto x = Tensor<double>::uniform({3, 8, 8}, rng, 0, 1);
    auto y = stage.forward(x);
    CHECK(y.shape() == Shape{16, 4, 4});
}

TEST_CASE("convnext stage rejects indivisible input naming the stage") {
    Rng rng(1);
    auto stage = ConvNextStage<double>::make(3, 16, 3, 4, rng);
    auto x = Tensor<double>::uniform({3, 8, 8}, rng, 0, 1);
    try {
        (void)stage.forward(x);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("stage 4") != std::string::npos);
    }
}

TEST_CASE("convnext block reduces to the residual path with zero weights") {
    Rng rng(2);
    auto stage = ConvNextStage<double>::make(3, 8, 2, 0, rng);
    // Zero the inner block; y + block(y) must equal the post-norm input y.
    for (auto* conv : {&stage.dw, &stage.expand, &stage.project}) {
        std::fill(conv->weight.data().begin(), conv->weight.data().end(), 0.0);
        std::fill(conv->bias.data().begin(), conv->bias.data().end(), 0.0);
    }
    auto x = Tensor<double>::uniform({3, 6, 6}, rng, 0, 1);
    auto y = stage.forward(x);
    auto post_norm = stage.norm.forward(stage.down.forward(x));
    for (int i = 0; i < y.size(); ++i)
        CHECK(y.data()[i] == doctest::Approx(post_norm.data()[i]).epsilon(1e-12));
}

TEST_CASE("nerv block output shape") {
    Rng rng(3);
    auto block = NervBlock<double>::make(4, 2, 3, 3, rng);
    auto x = Tensor<double>::uniform({4, 2, 2}, rng, -1, 1);
    auto y = block.forward(x);
    CHECK(y.shape() == Shape{2, 6, 6});
}

TEST_CASE("nerv block with zero weights emits GELU(0) = 0") {
    Rng rng(4);
    auto block = NervBlock<double>::make(4, 2, 3, 2, rng);
    std::fill(block.conv.weight.data().begin(), block.conv.weight.data().end(), 0.0);
    std::fill(block.conv.bias.data().begin(), block.conv.bias.data().end(), 0.0);
    auto x = Tensor<double>::uniform({4, 2, 2}, rng, -1, 1);
    auto y = block.forward(x);
    for (double v : y.data()) CHECK(v == 0.0);
}

TEST_CASE("stride stack and nerv stack invert each other spatially") {
    Rng rng(5);
    const std::vector<int> strides{4, 2, 2};
    auto enc = ConvNextEncoder<double>::make(3, strides, 8, 4, rng);
    auto x = Tensor<double>::uniform({3, 32, 48}, rng, 0, 1);
    auto emb = enc.forward(x);
    CHECK(emb.shape() == Shape{4, 2, 3});

    std::vector<NervBlock<double>> dec;
    int in_ch = 4;
    for (int s : strides) {
        dec.push_back(NervBlock<double>::make(in_ch, 5, 3, s, rng));
        in_ch = 5;
    }
    Tensor<double> h = emb;
    for (const auto& b : dec) h = b.forward(h);
    CHECK(h.shape() == Shape{5, 32, 48});
}

TEST_CASE("parameter visitation covers the whole stage exactly once") {
    Rng rng(6);
    auto stage = ConvNextStage<double>::make(3, 8, 2, 0, rng);
    std::vector<std::string> names;
    stage.visit("stage", [&](const std::string& n, Tensor<double>&) { names.push_back(n); });
    CHECK(names.size() == 12);  // 4 convs w+b, 2 norms g+b
    CHECK(names.front() == "stage.down.weight");
    CHECK(names.back() == "stage.project.bias");
}
