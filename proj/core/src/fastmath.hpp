#pragma once

// Branch-free float transcendentals for the elementwise kernels, written so
// the surrounding loops stay auto-vectorizable (no control flow, bit_cast
// instead of memcpy, copysign instead of selects). Accuracy: expf ~2 ulp,
// the Gaussian CDF ~1.5e-7 absolute -- below the resolution of the float
// arithmetic around it. The double paths in ops.cpp stay on libm.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

namespace dnerv::detail {

// Exact clamp through comparison masks: float min/max and ternaries both
// leave branches that kill if-conversion without finite-math flags, while
// bit selects stay branch-free and bit-exact for in-range values.
inline float clamp_masked(float x, float lo, float hi) {
    const std::int32_t lom = -static_cast<std::int32_t>(x < lo);
    const std::int32_t him = -static_cast<std::int32_t>(x > hi);
    std::int32_t r = std::bit_cast<std::int32_t>(x);
    r = (r & ~lom) | (std::bit_cast<std::int32_t>(lo) & lom);
    r = (r & ~him) | (std::bit_cast<std::int32_t>(hi) & him);
    return std::bit_cast<float>(r);
}

// Cephes-style expf: range reduction by log2(e), degree-5 polynomial,
// scale reassembled through the exponent bits.
inline float fast_expf(float x) {
    x = clamp_masked(x, -87.0f, 88.0f);
    const float z = x * 1.44269504088896341f;
    // round-to-nearest via the 1.5*2^23 shift trick, |z| << 2^22
    const float n = (z + 12582912.0f) - 12582912.0f;
    float r = x - n * 0.693359375f;
    r -= n * -2.12194440e-4f;
    float p = 1.9875691500e-4f;
    p = p * r + 1.3981999507e-3f;
    p = p * r + 8.3334519073e-3f;
    p = p * r + 4.1665795894e-2f;
    p = p * r + 1.6666665459e-1f;
    p = p * r + 5.0000001201e-1f;
    p = p * r * r + r + 1.0f;
    const float scale =
        std::bit_cast<float>((static_cast<std::int32_t>(n) + 127) << 23);
    return p * scale;
}

// Standard normal CDF via the Abramowitz-Stegun 7.1.26 erf polynomial
// (1.5e-7 absolute over the real line).
inline float fast_gauss_cdf(float x) {
    const float xs = x * 0.70710678118654752f;  // x / sqrt(2)
    const float ax = std::fabs(xs);
    const float t = 1.0f / (1.0f + 0.3275911f * ax);
    float poly = 1.061405429f;
    poly = poly * t + -1.453152027f;
    poly = poly * t + 1.421413741f;
    poly = poly * t + -0.284496736f;
    poly = poly * t + 0.254829592f;
    const float erf_abs = 1.0f - poly * t * fast_expf(-ax * ax);
    return 0.5f * (1.0f + std::copysign(erf_abs, xs));
}

inline float fast_gauss_pdf(float x) {
    return 0.39894228040143268f * fast_expf(-0.5f * x * x);
}

inline float fast_sigmoid(float x) {
    const float pos = 1.0f / (1.0f + fast_expf(-std::fabs(x)));  // in [0.5, 1)
    return 0.5f + std::copysign(pos - 0.5f, x);
}

}  // namespace dnerv::detail
