#pragma once

#include <vector>

#include "dnerv/tensor.hpp"

namespace dnerv {

struct ConvSpec {
    int stride = 1;
    int padding = 0;
    int groups = 1;
};

// 2D convolution on a single [C,H,W] image, weight [O, C/groups, k, k],
// optional bias [O]. Output [O, H', W'] with H' = (H + 2p - k)/stride + 1.
// Differentiable w.r.t. input, weight and bias.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias, const ConvSpec& spec);

// out[c, s*i+a, s*j+b] = in[c*s^2 + a*s + b, i, j]
template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& x, int s);

// Exact inverse of pixel_shuffle.
template <typename T>
Tensor<T> pixel_unshuffle(const Tensor<T>& x, int s);

// Normalizes across the channel dimension at every spatial location, then
// applies the per-channel affine (gamma, beta).
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps);

enum class Act { Gelu, Tanh, Sigmoid };

template <typename T>
Tensor<T> activation(Act kind, const Tensor<T>& x);
template <typename T>
Tensor<T> gelu(const Tensor<T>& x);  // exact form x * Phi(x)
template <typename T>
Tensor<T> tanh_act(const Tensor<T>& x);
template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);  // Hadamard
template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b);

// a*x + b with scalar coefficients.
template <typename T>
Tensor<T> affine(const Tensor<T>& x, T a, T b);

template <typename T>
Tensor<T> square(const Tensor<T>& x);
template <typename T>
Tensor<T> abs_val(const Tensor<T>& x);  // d|x|/dx at 0 taken as 0

template <typename T>
Tensor<T> sum(const Tensor<T>& x);
template <typename T>
Tensor<T> mean(const Tensor<T>& x);

// Stacks [C_i,H,W] tensors along the channel dimension.
template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& xs);

#define DNERV_DECLARE_OPS(T)                                                                     \
    extern template Tensor<T> conv2d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,   \
                                        const ConvSpec&);                                        \
    extern template Tensor<T> pixel_shuffle<T>(const Tensor<T>&, int);                           \
    extern template Tensor<T> pixel_unshuffle<T>(const Tensor<T>&, int);                         \
    extern template Tensor<T> layer_norm<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T); \
    extern template Tensor<T> activation<T>(Act, const Tensor<T>&);                              \
    extern template Tensor<T> gelu<T>(const Tensor<T>&);                                         \
    extern template Tensor<T> tanh_act<T>(const Tensor<T>&);                                     \
    extern template Tensor<T> sigmoid<T>(const Tensor<T>&);                                      \
    extern template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                        \
    extern template Tensor<T> sub<T>(const Tensor<T>&, const Tensor<T>&);                        \
    extern template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);                        \
    extern template Tensor<T> div<T>(const Tensor<T>&, const Tensor<T>&);                        \
    extern template Tensor<T> affine<T>(const Tensor<T>&, T, T);                                 \
    extern template Tensor<T> square<T>(const Tensor<T>&);                                       \
    extern template Tensor<T> abs_val<T>(const Tensor<T>&);                                      \
    extern template Tensor<T> sum<T>(const Tensor<T>&);                                          \
    extern template Tensor<T> mean<T>(const Tensor<T>&);                                         \
    extern template Tensor<T> concat_channels<T>(const std::vector<Tensor<T>>&);

DNERV_DECLARE_OPS(float)
DNERV_DECLARE_OPS(double)
#undef DNERV_DECLARE_OPS

}  // namespace dnerv
