#include "dnerv/metrics.hpp"

#include <cmath>

#include "dnerv/ops.hpp"

namespace dnerv {

template <typename T>
double psnr(const Tensor<T>& x, const Tensor<T>& y) {
    if (x.shape() != y.shape())
        throw DimensionError("psnr: shape mismatch " + shape_str(x.shape()) + " vs " + shape_str(y.shape()));
    double mse = 0;
    const T* a = x.ptr();
    const T* b = y.ptr();
    const std::size_t n = x.data().size();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        mse += d * d;
    }
    mse /= static_cast<double>(n);
    if (mse == 0) return 100.0;
    return std::min(100.0, 10.0 * std::log10(1.0 / mse));
}

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

template <typename T>
Tensor<T> gaussian_window(int channels) {
    double g1[kWindow];
    double norm = 0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - (kWindow - 1) / 2.0;
        g1[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        norm += g1[i];
    }
    std::vector<T> w(static_cast<std::size_t>(channels) * kWindow * kWindow);
    for (int c = 0; c < channels; ++c)
        for (int i = 0; i < kWindow; ++i)
            for (int j = 0; j < kWindow; ++j)
                w[(static_cast<long>(c) * kWindow + i) * kWindow + j] =
                    static_cast<T>(g1[i] * g1[j] / (norm * norm));
    return Tensor<T>::from_data({channels, 1, kWindow, kWindow}, std::move(w));
}

}  // namespace

template <typename T>
Tensor<T> ssim_graph(const Tensor<T>& x, const Tensor<T>& y) {
    if (x.shape() != y.shape())
        throw DimensionError("ssim: shape mismatch " + shape_str(x.shape()) + " vs " + shape_str(y.shape()));
    if (x.shape().size() != 3) throw DimensionError("ssim: inputs must be [C,H,W]");
    const int C = x.shape()[0];
    if (x.shape()[1] < kWindow || x.shape()[2] < kWindow)
        throw ConfigError("ssim: frame smaller than the " + std::to_string(kWindow) + "x" +
                          std::to_string(kWindow) + " window");

    static thread_local Tensor<T> window;  // per-channel-count cache
    if (!window.defined() || window.shape()[0] != C) window = gaussian_window<T>(C);

    const ConvSpec spec{1, 0, C};
    const Tensor<T> none;
    auto blur = [&](const Tensor<T>& t) { return conv2d(t, window, none, spec); };

    const T c1 = static_cast<T>(kK1 * kK1);
    const T c2 = static_cast<T>(kK2 * kK2);
    Tensor<T> mu_x = blur(x);
    Tensor<T> mu_y = blur(y);
    Tensor<T> sigma_x = sub(blur(square(x)), square(mu_x));
    Tensor<T> sigma_y = sub(blur(square(y)), square(mu_y));
    Tensor<T> sigma_xy = sub(blur(mul(x, y)), mul(mu_x, mu_y));
    Tensor<T> num = mul(affine(mul(mu_x, mu_y), T(2), c1), affine(sigma_xy, T(2), c2));
    Tensor<T> den = mul(affine(add(square(mu_x), square(mu_y)), T(1), c1),
                        affine(add(sigma_x, sigma_y), T(1), c2));
    return mean(div(num, den));
}

template <typename T>
double ssim(const Tensor<T>& x, const Tensor<T>& y) {
    NoGradGuard ng;
    return static_cast<double>(ssim_graph(x, y).item());
}

template double psnr<float>(const Tensor<float>&, const Tensor<float>&);
template double psnr<double>(const Tensor<double>&, const Tensor<double>&);
template double ssim<float>(const Tensor<float>&, const Tensor<float>&);
template double ssim<double>(const Tensor<double>&, const Tensor<double>&);
template Tensor<float> ssim_graph<float>(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> ssim_graph<double>(const Tensor<double>&, const Tensor<double>&);

}  // namespace dnerv
