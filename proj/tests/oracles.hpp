#pragma once

// Test-only reference implementations. Everything here is written as plain
// straight-line code, independent of the library's compute paths, so the
// main implementations can be checked against them.

#include <cmath>
#include <cstdint>
#include <vector>

#include "dnerv/tensor.hpp"

namespace oracle {

// Direct nested-loop 2D convolution (no im2col, no GEMM).
inline std::vector<double> conv2d_loops(const std::vector<double>& x, int C, int H, int W,
                                        const std::vector<double>& w, int O, int k,
                                        const std::vector<double>& bias, int stride, int pad,
                                        int groups) {
    const int Ho = (H + 2 * pad - k) / stride + 1;
    const int Wo = (W + 2 * pad - k) / stride + 1;
    const int Cg = C / groups;
    const int Og = O / groups;
    std::vector<double> out(static_cast<std::size_t>(O) * Ho * Wo, 0.0);
    for (int o = 0; o < O; ++o) {
        const int g = o / Og;
        for (int oy = 0; oy < Ho; ++oy)
            for (int ox = 0; ox < Wo; ++ox) {
                double acc = bias.empty() ? 0.0 : bias[static_cast<std::size_t>(o)];
                for (int c = 0; c < Cg; ++c)
                    for (int ky = 0; ky < k; ++ky)
                        for (int kx = 0; kx < k; ++kx) {
                            const int iy = oy * stride - pad + ky;
                            const int ix = ox * stride - pad + kx;
                            if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                            acc += w[((static_cast<std::size_t>(o) * Cg + c) * k + ky) * k + kx] *
                                   x[(static_cast<std::size_t>(g * Cg + c) * H + iy) * W + ix];
                        }
                out[(static_cast<std::size_t>(o) * Ho + oy) * Wo + ox] = acc;
            }
    }
    return out;
}

// Standard normal CDF by composite Simpson integration of the density from
// far in the left tail up to x.
inline double normal_cdf_quadrature(double x, int intervals = 40000) {
    const double a = -12.0;
    if (x <= a) return 0.0;
    const double h = (x - a) / intervals;
    auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
    double acc = pdf(a) + pdf(x);
    for (int i = 1; i < intervals; ++i) acc += pdf(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// Straight-line gated fusion, mirroring the published update equations
// directly: s = u.v + (1-v).b with u = tanh(conv_ub(b)+conv_uz(z)),
// v = sigmoid(conv_vb(b)+conv_vz(z)). All convolutions same-padding.
struct CcuOracleInputs {
    std::vector<double> z, b;  // z already lifted to b's shape
    int C, H, W, k;
    std::vector<double> w_ub, bias_u, w_uz, w_vb, bias_v, w_vz;  // [C,C,k,k] / [C]
};

inline std::vector<double> ccu_straight_line(const CcuOracleInputs& in) {
    auto conv_same = [&](const std::vector<double>& x, const std::vector<double>& w,
                         const std::vector<double>& bias) {
        return conv2d_loops(x, in.C, in.H, in.W, w, in.C, in.k, bias, 1, in.k / 2, 1);
    };
    const auto ub = conv_same(in.b, in.w_ub, in.bias_u);
    const auto uz = conv_same(in.z, in.w_uz, {});
    const auto vb = conv_same(in.b, in.w_vb, in.bias_v);
    const auto vz = conv_same(in.z, in.w_vz, {});
    std::vector<double> s(in.b.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double u = std::tanh(ub[i] + uz[i]);
        const double v = 1.0 / (1.0 + std::exp(-(vb[i] + vz[i])));
        s[i] = u * v + (1.0 - v) * in.b[i];
    }
    return s;
}

// Quantize-dequantize reconstruction MSE, simulated directly.
inline double quant_mse_simulation(const std::vector<double>& values, int bits) {
    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double levels = static_cast<double>((1u << bits) - 1);
    const double scale = (hi - lo) / levels;
    double mse = 0;
    for (double v : values) {
        double rec = lo;
        if (scale != 0) {
            double code = std::round((v - lo) / scale);
            code = std::min(std::max(code, 0.0), levels);
            rec = lo + scale * code;
        }
        mse += (v - rec) * (v - rec);
    }
    return mse / static_cast<double>(values.size());
}

}  // namespace oracle
