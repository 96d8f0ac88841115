#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dnerv/ops.hpp"
#include "dnerv/rng.hpp"
#include "dnerv/tensor.hpp"

namespace dnerv {

template <typename T>
using ParamVisitor = std::function<void(const std::string&, Tensor<T>&)>;

// Convolution layer owning its parameters. Weights are Kaiming-uniform
// (fan-in) draws, biases start at zero.
template <typename T>
struct Conv2d {
    Tensor<T> weight;  // [O, I/g, k, k]
    Tensor<T> bias;    // [O]; undefined when the layer is bias-free
    ConvSpec spec;

    static Conv2d make(int in_ch, int out_ch, int k, int stride, int padding, int groups, Rng& rng,
                       bool with_bias = true);
    Tensor<T> forward(const Tensor<T>& x) const { return conv2d(x, weight, bias, spec); }
    void visit(const std::string& prefix, const ParamVisitor<T>& v);
};

template <typename T>
struct LayerNorm2d {
    Tensor<T> gamma;  // ones
    Tensor<T> beta;   // zeros
    T eps = static_cast<T>(1e-6);

    static LayerNorm2d make(int channels);
    Tensor<T> forward(const Tensor<T>& x) const { return layer_norm(x, gamma, beta, eps); }
    void visit(const std::string& prefix, const ParamVisitor<T>& v);
};

// One encoder stage: strided non-overlapping downsample conv + layer norm,
// then a ConvNeXt block (7x7 depthwise, norm, 1x1 expand x4, GELU,
// 1x1 project, residual).
template <typename T>
struct ConvNextStage {
    Conv2d<T> down;
    LayerNorm2d<T> norm;
    Conv2d<T> dw;
    LayerNorm2d<T> block_norm;
    Conv2d<T> expand;
    Conv2d<T> project;
    int stride = 1;
    int index = 0;  // position in the encoder, for error messages

    static ConvNextStage make(int in_ch, int ch, int stride, int index, Rng& rng);
    Tensor<T> forward(const Tensor<T>& x) const;
    void visit(const std::string& prefix, const ParamVisitor<T>& v);
};

// Decoder unit: k x k same-padding conv to C_out*s^2 channels, pixel
// shuffle by s, GELU.
template <typename T>
struct NervBlock {
    Conv2d<T> conv;
    int upscale = 1;

    static NervBlock make(int in_ch, int out_ch, int k, int s, Rng& rng);
    Tensor<T> forward(const Tensor<T>& x) const;
    void visit(const std::string& prefix, const ParamVisitor<T>& v);
};

// ConvNeXt stage stack with a fixed internal width, then a 1x1 projection
// to the embedding channel count.
template <typename T>
struct ConvNextEncoder {
    std::vector<ConvNextStage<T>> stages;
    Conv2d<T> proj;

    static ConvNextEncoder make(int in_ch, const std::vector<int>& strides, int width, int embed_ch,
                                Rng& rng);
    Tensor<T> forward(const Tensor<T>& x) const;
    void visit(const std::string& prefix, const ParamVisitor<T>& v);
};

#define DNERV_DECLARE_LAYERS(T)              \
    extern template struct Conv2d<T>;        \
    extern template struct LayerNorm2d<T>;   \
    extern template struct ConvNextStage<T>; \
    extern template struct NervBlock<T>;     \
    extern template struct ConvNextEncoder<T>;

DNERV_DECLARE_LAYERS(float)
DNERV_DECLARE_LAYERS(double)
#undef DNERV_DECLARE_LAYERS

}  // namespace dnerv
