#include "dnerv/layers.hpp"

#include <cmath>

namespace dnerv {

template <typename T>
Conv2d<T> Conv2d<T>::make(int in_ch, int out_ch, int k, int stride, int padding, int groups,
                          Rng& rng, bool with_bias) {
    Conv2d c;
    const int fan_in = (in_ch / groups) * k * k;
    const T bound = static_cast<T>(std::sqrt(6.0 / fan_in));
    c.weight = Tensor<T>::uniform({out_ch, in_ch / groups, k, k}, rng, -bound, bound, true);
    if (with_bias) c.bias = Tensor<T>::zeros({out_ch}, true);
    c.spec = ConvSpec{stride, padding, groups};
    return c;
}

template <typename T>
void Conv2d<T>::visit(const std::string& prefix, const ParamVisitor<T>& v) {
    v(prefix + ".weight", weight);
    if (bias.defined()) v(prefix + ".bias", bias);
}

template <typename T>
LayerNorm2d<T> LayerNorm2d<T>::make(int channels) {
    LayerNorm2d n;
    n.gamma = Tensor<T>::full({channels}, T(1), true);
    n.beta = Tensor<T>::zeros({channels}, true);
    return n;
}

template <typename T>
void LayerNorm2d<T>::visit(const std::string& prefix, const ParamVisitor<T>& v) {
    v(prefix + ".gamma", gamma);
    v(prefix + ".beta", beta);
}

template <typename T>
ConvNextStage<T> ConvNextStage<T>::make(int in_ch, int ch, int stride, int index, Rng& rng) {
    ConvNextStage s;
    s.stride = stride;
    s.index = index;
    s.down = Conv2d<T>::make(in_ch, ch, stride, stride, 0, 1, rng);
    s.norm = LayerNorm2d<T>::make(ch);
    s.dw = Conv2d<T>::make(ch, ch, 7, 1, 3, ch, rng);
    s.block_norm = LayerNorm2d<T>::make(ch);
    s.expand = Conv2d<T>::make(ch, 4 * ch, 1, 1, 0, 1, rng);
    s.project = Conv2d<T>::make(4 * ch, ch, 1, 1, 0, 1, rng);
    return s;
}

template <typename T>
Tensor<T> ConvNextStage<T>::forward(const Tensor<T>& x) const {
    if (x.shape()[1] % stride != 0 || x.shape()[2] % stride != 0)
        throw ConfigError("encoder stage " + std::to_string(index) + ": stride " +
                          std::to_string(stride) + " does not divide input " + shape_str(x.shape()));
    Tensor<T> y = norm.forward(down.forward(x));
    Tensor<T> z = project.forward(gelu(expand.forward(block_norm.forward(dw.forward(y)))));
    return add(y, z);
}

template <typename T>
void ConvNextStage<T>::visit(const std::string& prefix, const ParamVisitor<T>& v) {
    down.visit(prefix + ".down", v);
    norm.visit(prefix + ".norm", v);
    dw.visit(prefix + ".dw", v);
    block_norm.visit(prefix + ".block_norm", v);
    expand.visit(prefix + ".expand", v);
    project.visit(prefix + ".project", v);
}

template <typename T>
NervBlock<T> NervBlock<T>::make(int in_ch, int out_ch, int k, int s, Rng& rng) {
    NervBlock b;
    b.upscale = s;
    b.conv = Conv2d<T>::make(in_ch, out_ch * s * s, k, 1, k / 2, 1, rng);
    return b;
}

template <typename T>
Tensor<T> NervBlock<T>::forward(const Tensor<T>& x) const {
    return gelu(pixel_shuffle(conv.forward(x), upscale));
}

template <typename T>
void NervBlock<T>::visit(const std::string& prefix, const ParamVisitor<T>& v) {
    conv.visit(prefix + ".conv", v);
}

template <typename T>
ConvNextEncoder<T> ConvNextEncoder<T>::make(int in_ch, const std::vector<int>& strides, int width,
                                            int embed_ch, Rng& rng) {
    ConvNextEncoder e;
    int ch = in_ch;
    for (std::size_t i = 0; i < strides.size(); ++i) {
        e.stages.push_back(ConvNextStage<T>::make(ch, width, strides[i], static_cast<int>(i), rng));
        ch = width;
    }
    e.proj = Conv2d<T>::make(width, embed_ch, 1, 1, 0, 1, rng);
    return e;
}

template <typename T>
Tensor<T> ConvNextEncoder<T>::forward(const Tensor<T>& x) const {
    Tensor<T> h = x;
    for (const auto& s : stages) h = s.forward(h);
    return proj.forward(h);
}

template <typename T>
void ConvNextEncoder<T>::visit(const std::string& prefix, const ParamVisitor<T>& v) {
    for (std::size_t i = 0; i < stages.size(); ++i)
        stages[i].visit(prefix + ".stage" + std::to_string(i), v);
    proj.visit(prefix + ".proj", v);
}

#define DNERV_INSTANTIATE_LAYERS(T)   \
    template struct Conv2d<T>;        \
    template struct LayerNorm2d<T>;   \
    template struct ConvNextStage<T>; \
    template struct NervBlock<T>;     \
    template struct ConvNextEncoder<T>;

DNERV_INSTANTIATE_LAYERS(float)
DNERV_INSTANTIATE_LAYERS(double)
#undef DNERV_INSTANTIATE_LAYERS

}  // namespace dnerv
