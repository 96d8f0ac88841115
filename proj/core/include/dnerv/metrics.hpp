#pragma once

#include "dnerv/tensor.hpp"

namespace dnerv {

// 10*log10(1/MSE) for values in [0,1]; identical inputs report the 100 dB cap.
template <typename T>
double psnr(const Tensor<T>& x, const Tensor<T>& y);

// Mean single-scale SSIM over channels and sliding windows (11x11 Gaussian,
// sigma 1.5, K1=0.01, K2=0.03, L=1). Windows are valid-only, no padding.
template <typename T>
double ssim(const Tensor<T>& x, const Tensor<T>& y);

// Same computation as a graph node, used inside the L1+SSIM loss.
template <typename T>
Tensor<T> ssim_graph(const Tensor<T>& x, const Tensor<T>& y);

extern template double psnr<float>(const Tensor<float>&, const Tensor<float>&);
extern template double psnr<double>(const Tensor<double>&, const Tensor<double>&);
extern template double ssim<float>(const Tensor<float>&, const Tensor<float>&);
extern template double ssim<double>(const Tensor<double>&, const Tensor<double>&);
extern template Tensor<float> ssim_graph<float>(const Tensor<float>&, const Tensor<float>&);
extern template Tensor<double> ssim_graph<double>(const Tensor<double>&, const Tensor<double>&);

}  // namespace dnerv
