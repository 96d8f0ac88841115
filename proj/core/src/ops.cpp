#include "dnerv/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <memory>
#include <type_traits>
#include <utility>

#include "dnerv/gemm.hpp"
#include "fastmath.hpp"

namespace dnerv {

namespace {

template <typename T>
using Node = detail::TensorNode<T>;

template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> data, const char* op,
                      std::vector<Tensor<T>> parents, std::function<void(Node<T>&)> bw) {
    auto out = Tensor<T>::from_data(std::move(shape), std::move(data));
    if (grad_enabled()) {
        bool any = false;
        for (const auto& p : parents) any = any || p.requires_grad();
        if (any) {
            auto n = out.node();
            n->requires_grad = true;
            n->parents.reserve(parents.size());
            for (const auto& p : parents) n->parents.push_back(p.node());
            n->backward_fn = std::move(bw);
        }
    }
    if (debug_checks_enabled()) check_finite(out, op);
    return out;
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
    if (a.shape() != b.shape())
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
}

// ---------------------------------------------------------------------------
// conv2d

struct ConvDims {
    int C, H, W;       // input
    int O, Cg, k;      // weight
    int groups, stride, pad;
    int Ho, Wo;
    long P;            // Ho*Wo
};

template <typename T>
ConvDims conv_check(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                    const ConvSpec& spec) {
    if (x.shape().size() != 3) throw DimensionError("conv2d: input must be [C,H,W], got " + shape_str(x.shape()));
    if (w.shape().size() != 4) throw DimensionError("conv2d: weight must be [O,C/g,k,k], got " + shape_str(w.shape()));
    if (w.shape()[2] != w.shape()[3]) throw DimensionError("conv2d: only square kernels supported");
    if (spec.stride < 1) throw ConfigError("conv2d: stride must be >= 1");
    if (spec.padding < 0) throw ConfigError("conv2d: padding must be >= 0");
    if (spec.groups < 1) throw ConfigError("conv2d: groups must be >= 1");

    ConvDims d;
    d.C = x.shape()[0];
    d.H = x.shape()[1];
    d.W = x.shape()[2];
    d.O = w.shape()[0];
    d.Cg = w.shape()[1];
    d.k = w.shape()[2];
    d.groups = spec.groups;
    d.stride = spec.stride;
    d.pad = spec.padding;
    if (d.C % d.groups != 0 || d.O % d.groups != 0)
        throw ConfigError("conv2d: groups=" + std::to_string(d.groups) + " must divide channels (C=" +
                          std::to_string(d.C) + ", O=" + std::to_string(d.O) + ")");
    if (d.Cg * d.groups != d.C)
        throw DimensionError("conv2d: weight expects " + std::to_string(d.Cg * d.groups) +
                             " input channels, input has " + std::to_string(d.C));
    if (bias.defined() && (bias.shape().size() != 1 || bias.shape()[0] != d.O))
        throw DimensionError("conv2d: bias must be [O]");
    if (d.H + 2 * d.pad < d.k || d.W + 2 * d.pad < d.k)
        throw DimensionError("conv2d: kernel " + std::to_string(d.k) + " larger than padded input");
    d.Ho = (d.H + 2 * d.pad - d.k) / d.stride + 1;
    d.Wo = (d.W + 2 * d.pad - d.k) / d.stride + 1;
    d.P = static_cast<long>(d.Ho) * d.Wo;
    return d;
}

// col is [Cg*k*k, P] for one group; xg points at that group's first channel.
template <typename T>
void im2col_group(const T* xg, const ConvDims& d, T* col) {
    const long HW = static_cast<long>(d.H) * d.W;
    for (int c = 0; c < d.Cg; ++c)
        for (int ky = 0; ky < d.k; ++ky)
            for (int kx = 0; kx < d.k; ++kx) {
                T* row = col + ((static_cast<long>(c) * d.k + ky) * d.k + kx) * d.P;
                const T* xc = xg + c * HW;
                for (int oy = 0; oy < d.Ho; ++oy) {
                    const int iy = oy * d.stride - d.pad + ky;
                    T* out = row + static_cast<long>(oy) * d.Wo;
                    if (iy < 0 || iy >= d.H) {
                        for (int ox = 0; ox < d.Wo; ++ox) out[ox] = T(0);
                        continue;
                    }
                    const T* in = xc + static_cast<long>(iy) * d.W;
                    if (d.stride == 1) {
                        const int shift = kx - d.pad;  // ix = ox + shift
                        int lo = std::max(0, -shift);
                        int hi = std::min(d.Wo, d.W - shift);
                        for (int ox = 0; ox < lo; ++ox) out[ox] = T(0);
                        for (int ox = lo; ox < hi; ++ox) out[ox] = in[ox + shift];
                        for (int ox = hi; ox < d.Wo; ++ox) out[ox] = T(0);
                    } else {
                        for (int ox = 0; ox < d.Wo; ++ox) {
                            const int ix = ox * d.stride - d.pad + kx;
                            out[ox] = (ix >= 0 && ix < d.W) ? in[ix] : T(0);
                        }
                    }
                }
            }
}

template <typename T>
void col2im_group_add(const T* col, const ConvDims& d, T* dxg) {
    const long HW = static_cast<long>(d.H) * d.W;
    for (int c = 0; c < d.Cg; ++c)
        for (int ky = 0; ky < d.k; ++ky)
            for (int kx = 0; kx < d.k; ++kx) {
                const T* row = col + ((static_cast<long>(c) * d.k + ky) * d.k + kx) * d.P;
                T* xc = dxg + c * HW;
                for (int oy = 0; oy < d.Ho; ++oy) {
                    const int iy = oy * d.stride - d.pad + ky;
                    if (iy < 0 || iy >= d.H) continue;
                    const T* in = row + static_cast<long>(oy) * d.Wo;
                    T* out = xc + static_cast<long>(iy) * d.W;
                    if (d.stride == 1) {
                        const int shift = kx - d.pad;
                        int lo = std::max(0, -shift);
                        int hi = std::min(d.Wo, d.W - shift);
                        for (int ox = lo; ox < hi; ++ox) out[ox + shift] += in[ox];
                    } else {
                        for (int ox = 0; ox < d.Wo; ++ox) {
                            const int ix = ox * d.stride - d.pad + kx;
                            if (ix >= 0 && ix < d.W) out[ix] += in[ox];
                        }
                    }
                }
            }
}

template <typename T>
void fill_bias_rows(T* out, const Tensor<T>& bias, int O, long P) {
    if (bias.defined()) {
        const T* b = bias.ptr();
        for (int o = 0; o < O; ++o) {
            T* row = out + o * P;
            for (long p = 0; p < P; ++p) row[p] = b[o];
        }
    } else {
        std::memset(out, 0, sizeof(T) * static_cast<std::size_t>(O) * static_cast<std::size_t>(P));
    }
}

template <typename T>
void accumulate_bias_grad(const T* dy, int O, long P, T* db) {
    for (int o = 0; o < O; ++o) {
        const T* row = dy + o * P;
        T s = T(0);
        for (long p = 0; p < P; ++p) s += row[p];
        db[o] += s;
    }
}

// The transposed-weight pass reads A column-wise; materializing W^T keeps
// the GEMM on its contiguous fast path.
template <typename T>
std::vector<T> transpose_matrix(const T* a, long rows, long cols) {
    std::vector<T> out(static_cast<std::size_t>(rows) * cols);
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c) out[c * rows + r] = a[r * cols + c];
    return out;
}

// Depthwise fast path: groups == C, one filter per channel.
template <typename T>
void depthwise_forward(const T* x, const T* w, const ConvDims& d, T* out) {
    const long HW = static_cast<long>(d.H) * d.W;
    const long PW = static_cast<long>(d.Ho) * d.Wo;
    for (int c = 0; c < d.C; ++c) {
        const T* xc = x + c * HW;
        const T* wc = w + static_cast<long>(c) * d.k * d.k;
        T* oc = out + c * PW;
        for (int oy = 0; oy < d.Ho; ++oy)
            for (int ky = 0; ky < d.k; ++ky) {
                const int iy = oy * d.stride - d.pad + ky;
                if (iy < 0 || iy >= d.H) continue;
                const T* in = xc + static_cast<long>(iy) * d.W;
                T* orow = oc + static_cast<long>(oy) * d.Wo;
                for (int kx = 0; kx < d.k; ++kx) {
                    const T wv = wc[ky * d.k + kx];
                    if (d.stride == 1) {
                        const int shift = kx - d.pad;
                        int lo = std::max(0, -shift);
                        int hi = std::min(d.Wo, d.W - shift);
                        for (int ox = lo; ox < hi; ++ox) orow[ox] += wv * in[ox + shift];
                    } else {
                        for (int ox = 0; ox < d.Wo; ++ox) {
                            const int ix = ox * d.stride - d.pad + kx;
                            if (ix >= 0 && ix < d.W) orow[ox] += wv * in[ix];
                        }
                    }
                }
            }
    }
}

template <typename T>
void depthwise_backward(const T* x, const T* w, const T* dy, const ConvDims& d, T* dx, T* dw) {
    const long HW = static_cast<long>(d.H) * d.W;
    const long PW = static_cast<long>(d.Ho) * d.Wo;
    for (int c = 0; c < d.C; ++c) {
        const T* xc = x + c * HW;
        const T* wc = w + static_cast<long>(c) * d.k * d.k;
        const T* dyc = dy + c * PW;
        for (int oy = 0; oy < d.Ho; ++oy)
            for (int ky = 0; ky < d.k; ++ky) {
                const int iy = oy * d.stride - d.pad + ky;
                if (iy < 0 || iy >= d.H) continue;
                const T* dyrow = dyc + static_cast<long>(oy) * d.Wo;
                for (int kx = 0; kx < d.k; ++kx) {
                    if (d.stride == 1) {
                        const int shift = kx - d.pad;
                        int lo = std::max(0, -shift);
                        int hi = std::min(d.Wo, d.W - shift);
                        if (dx) {
                            T* dxrow = dx + c * HW + static_cast<long>(iy) * d.W;
                            const T wv = wc[ky * d.k + kx];
                            for (int ox = lo; ox < hi; ++ox) dxrow[ox + shift] += wv * dyrow[ox];
                        }
                        if (dw) {
                            const T* in = xc + static_cast<long>(iy) * d.W;
                            T s = T(0);
                            for (int ox = lo; ox < hi; ++ox) s += in[ox + shift] * dyrow[ox];
                            dw[static_cast<long>(c) * d.k * d.k + ky * d.k + kx] += s;
                        }
                    } else {
                        for (int ox = 0; ox < d.Wo; ++ox) {
                            const int ix = ox * d.stride - d.pad + kx;
                            if (ix < 0 || ix >= d.W) continue;
                            if (dx) dx[c * HW + static_cast<long>(iy) * d.W + ix] += wc[ky * d.k + kx] * dyrow[ox];
                            if (dw) dw[static_cast<long>(c) * d.k * d.k + ky * d.k + kx] += xc[static_cast<long>(iy) * d.W + ix] * dyrow[ox];
                        }
                    }
                }
            }
    }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                 const ConvSpec& spec) {
    const ConvDims d = conv_check(x, w, bias, spec);
    std::vector<T> out(static_cast<std::size_t>(d.O) * d.P);

    const bool pointwise = d.k == 1 && d.stride == 1 && d.pad == 0 && d.groups == 1;
    const bool depthwise = d.groups == d.C && d.O == d.C && d.Cg == 1;

    if (pointwise) {
        fill_bias_rows(out.data(), bias, d.O, d.P);
        detail::gemm_acc(d.O, static_cast<int>(d.P), d.C, w.ptr(), d.C, 1, x.ptr(), d.P, out.data(), d.P);
        auto bw = [d](Node<T>& self) {
            auto& xn = *self.parents[0];
            auto& wn = *self.parents[1];
            const T* dy = self.grad.data();
            if (self.parents.size() > 2 && self.parents[2]->requires_grad)
                accumulate_bias_grad(dy, d.O, d.P, self.parents[2]->grad.data());
            if (wn.requires_grad)
                detail::gemm_nt_acc(d.O, d.C, static_cast<int>(d.P), dy, d.P, xn.data.data(), d.P,
                                    wn.grad.data(), d.C);
            if (xn.requires_grad) {
                const auto wt = transpose_matrix(wn.data.data(), d.O, d.C);
                detail::gemm_acc(d.C, static_cast<int>(d.P), d.O, wt.data(), d.O, 1, dy, d.P,
                                 xn.grad.data(), d.P);
            }
        };
        std::vector<Tensor<T>> parents{x, w};
        if (bias.defined()) parents.push_back(bias);
        return make_result<T>({d.O, d.Ho, d.Wo}, std::move(out), "conv2d", std::move(parents), bw);
    }

    if (depthwise) {
        fill_bias_rows(out.data(), bias, d.O, d.P);
        depthwise_forward(x.ptr(), w.ptr(), d, out.data());
        auto bw = [d](Node<T>& self) {
            auto& xn = *self.parents[0];
            auto& wn = *self.parents[1];
            const T* dy = self.grad.data();
            if (self.parents.size() > 2 && self.parents[2]->requires_grad)
                accumulate_bias_grad(dy, d.O, d.P, self.parents[2]->grad.data());
            depthwise_backward(xn.data.data(), wn.data.data(), dy, d,
                               xn.requires_grad ? xn.grad.data() : nullptr,
                               wn.requires_grad ? wn.grad.data() : nullptr);
        };
        std::vector<Tensor<T>> parents{x, w};
        if (bias.defined()) parents.push_back(bias);
        return make_result<T>({d.O, d.Ho, d.Wo}, std::move(out), "conv2d", std::move(parents), bw);
    }

    // General path: per-group im2col + GEMM. The col buffer is kept for the
    // backward pass.
    const long K = static_cast<long>(d.Cg) * d.k * d.k;
    const long HWg = static_cast<long>(d.Cg) * d.H * d.W;
    const int Og = d.O / d.groups;
    auto col = std::make_shared<std::vector<T>>(static_cast<std::size_t>(d.groups) * K * d.P);
    fill_bias_rows(out.data(), bias, d.O, d.P);
    for (int g = 0; g < d.groups; ++g) {
        T* colg = col->data() + g * K * d.P;
        im2col_group(x.ptr() + g * HWg, d, colg);
        detail::gemm_acc(Og, static_cast<int>(d.P), static_cast<int>(K),
                         w.ptr() + static_cast<long>(g) * Og * K, K, 1, colg, d.P,
                         out.data() + static_cast<long>(g) * Og * d.P, d.P);
    }

    auto bw = [d, K, HWg, Og, col](Node<T>& self) {
        auto& xn = *self.parents[0];
        auto& wn = *self.parents[1];
        const T* dy = self.grad.data();
        if (self.parents.size() > 2 && self.parents[2]->requires_grad)
            accumulate_bias_grad(dy, d.O, d.P, self.parents[2]->grad.data());
        std::vector<T> dcol;
        if (xn.requires_grad) dcol.assign(static_cast<std::size_t>(K) * d.P, T(0));
        for (int g = 0; g < d.groups; ++g) {
            const T* colg = col->data() + g * K * d.P;
            const T* dyg = dy + static_cast<long>(g) * Og * d.P;
            if (wn.requires_grad)
                detail::gemm_nt_acc(Og, static_cast<int>(K), static_cast<int>(d.P), dyg, d.P, colg,
                                    d.P, wn.grad.data() + static_cast<long>(g) * Og * K, K);
            if (xn.requires_grad) {
                std::memset(dcol.data(), 0, sizeof(T) * dcol.size());
                const auto wt = transpose_matrix(wn.data.data() + static_cast<long>(g) * Og * K, Og, K);
                detail::gemm_acc(static_cast<int>(K), static_cast<int>(d.P), Og, wt.data(), Og, 1,
                                 dyg, d.P, dcol.data(), d.P);
                col2im_group_add(dcol.data(), d, xn.grad.data() + g * HWg);
            }
        }
    };
    std::vector<Tensor<T>> parents{x, w};
    if (bias.defined()) parents.push_back(bias);
    return make_result<T>({d.O, d.Ho, d.Wo}, std::move(out), "conv2d", std::move(parents), bw);
}

template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& x, int s) {
    if (x.shape().size() != 3) throw DimensionError("pixel_shuffle: input must be [C,H,W]");
    if (s < 1) throw ConfigError("pixel_shuffle: factor must be >= 1");
    const int Cs = x.shape()[0], H = x.shape()[1], W = x.shape()[2];
    if (Cs % (s * s) != 0)
        throw DimensionError("pixel_shuffle: channels " + std::to_string(Cs) + " not divisible by s^2=" +
                             std::to_string(s * s));
    const int C = Cs / (s * s);
    std::vector<T> out(static_cast<std::size_t>(Cs) * H * W);
    const T* in = x.ptr();
    for (int c = 0; c < C; ++c)
        for (int a = 0; a < s; ++a)
            for (int b = 0; b < s; ++b) {
                const T* src = in + (static_cast<long>(c) * s * s + a * s + b) * H * W;
                for (int i = 0; i < H; ++i) {
                    T* dst = out.data() + ((static_cast<long>(c) * H * s + (static_cast<long>(s) * i + a)) * W * s) + b;
                    const T* srow = src + static_cast<long>(i) * W;
                    for (int j = 0; j < W; ++j) dst[static_cast<long>(j) * s] = srow[j];
                }
            }
    auto bw = [C, H, W, s](Node<T>& self) {
        auto& xn = *self.parents[0];
        if (!xn.requires_grad) return;
        const T* dy = self.grad.data();
        T* dx = xn.grad.data();
        for (int c = 0; c < C; ++c)
            for (int a = 0; a < s; ++a)
                for (int b = 0; b < s; ++b) {
                    T* dst = dx + (static_cast<long>(c) * s * s + a * s + b) * H * W;
                    for (int i = 0; i < H; ++i) {
                        const T* srow = dy + ((static_cast<long>(c) * H * s + (static_cast<long>(s) * i + a)) * W * s) + b;
                        T* drow = dst + static_cast<long>(i) * W;
                        for (int j = 0; j < W; ++j) drow[j] += srow[static_cast<long>(j) * s];
                    }
                }
    };
    return make_result<T>({C, H * s, W * s}, std::move(out), "pixel_shuffle", {x}, bw);
}

template <typename T>
Tensor<T> pixel_unshuffle(const Tensor<T>& x, int s) {
    if (x.shape().size() != 3) throw DimensionError("pixel_unshuffle: input must be [C,H,W]");
    if (s < 1) throw ConfigError("pixel_unshuffle: factor must be >= 1");
    const int C = x.shape()[0], Hs = x.shape()[1], Ws = x.shape()[2];
    if (Hs % s != 0 || Ws % s != 0)
        throw DimensionError("pixel_unshuffle: spatial dims not divisible by s");
    const int H = Hs / s, W = Ws / s;
    std::vector<T> out(static_cast<std::size_t>(C) * Hs * Ws);
    const T* in = x.ptr();
    for (int c = 0; c < C; ++c)
        for (int a = 0; a < s; ++a)
            for (int b = 0; b < s; ++b) {
                T* dst = out.data() + (static_cast<long>(c) * s * s + a * s + b) * H * W;
                for (int i = 0; i < H; ++i)
                    for (int j = 0; j < W; ++j)
                        dst[static_cast<long>(i) * W + j] =
                            in[(static_cast<long>(c) * Hs + (static_cast<long>(s) * i + a)) * Ws + static_cast<long>(s) * j + b];
            }
    auto bw = [C, H, W, s, Ws](Node<T>& self) {
        auto& xn = *self.parents[0];
        if (!xn.requires_grad) return;
        const T* dy = self.grad.data();
        T* dx = xn.grad.data();
        for (int c = 0; c < C; ++c)
            for (int a = 0; a < s; ++a)
                for (int b = 0; b < s; ++b) {
                    const T* src = dy + (static_cast<long>(c) * s * s + a * s + b) * H * W;
                    for (int i = 0; i < H; ++i)
                        for (int j = 0; j < W; ++j)
                            dx[(static_cast<long>(c) * H * s + (static_cast<long>(s) * i + a)) * Ws + static_cast<long>(s) * j + b] +=
                                src[static_cast<long>(i) * W + j];
                }
    };
    return make_result<T>({C * s * s, H, W}, std::move(out), "pixel_unshuffle", {x}, bw);
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
    if (x.shape().size() != 3) throw DimensionError("layer_norm: input must be [C,H,W]");
    if (eps <= T(0)) throw ConfigError("layer_norm: eps must be positive");
    const int C = x.shape()[0];
    const long HW = static_cast<long>(x.shape()[1]) * x.shape()[2];
    if (gamma.shape() != Shape{C} || beta.shape() != Shape{C})
        throw DimensionError("layer_norm: gamma/beta must be [C]");

    auto xhat = std::make_shared<std::vector<T>>(x.data().size());
    auto inv_std = std::make_shared<std::vector<T>>(HW);
    std::vector<T> out(x.data().size());
    const T* in = x.ptr();
    const T* g = gamma.ptr();
    const T* b = beta.ptr();
    for (long p = 0; p < HW; ++p) {
        T m = T(0);
        for (int c = 0; c < C; ++c) m += in[c * HW + p];
        m /= T(C);
        T var = T(0);
        for (int c = 0; c < C; ++c) {
            const T dv = in[c * HW + p] - m;
            var += dv * dv;
        }
        var /= T(C);
        const T inv = T(1) / std::sqrt(var + eps);
        (*inv_std)[p] = inv;
        for (int c = 0; c < C; ++c) {
            const T xh = (in[c * HW + p] - m) * inv;
            (*xhat)[c * HW + p] = xh;
            out[c * HW + p] = g[c] * xh + b[c];
        }
    }
    auto bw = [C, HW, xhat, inv_std](Node<T>& self) {
        auto& xn = *self.parents[0];
        auto& gn = *self.parents[1];
        auto& bn = *self.parents[2];
        const T* dy = self.grad.data();
        const T* g = gn.data.data();
        if (gn.requires_grad || bn.requires_grad) {
            for (int c = 0; c < C; ++c) {
                T sg = T(0), sb = T(0);
                for (long p = 0; p < HW; ++p) {
                    sg += dy[c * HW + p] * (*xhat)[c * HW + p];
                    sb += dy[c * HW + p];
                }
                if (gn.requires_grad) gn.grad[c] += sg;
                if (bn.requires_grad) bn.grad[c] += sb;
            }
        }
        if (xn.requires_grad) {
            T* dx = xn.grad.data();
            for (long p = 0; p < HW; ++p) {
                T m1 = T(0), m2 = T(0);
                for (int c = 0; c < C; ++c) {
                    const T dxh = dy[c * HW + p] * g[c];
                    m1 += dxh;
                    m2 += dxh * (*xhat)[c * HW + p];
                }
                m1 /= T(C);
                m2 /= T(C);
                const T inv = (*inv_std)[p];
                for (int c = 0; c < C; ++c) {
                    const T dxh = dy[c * HW + p] * g[c];
                    dx[c * HW + p] += inv * (dxh - m1 - (*xhat)[c * HW + p] * m2);
                }
            }
        }
    };
    return make_result<T>(x.shape(), std::move(out), "layer_norm", {x, gamma, beta}, bw);
}

namespace {

// Float lanes take the vectorizable path; double (the test/oracle precision)
// stays on libm.
template <typename T>
inline T sigmoid_scalar(T v) {
    if constexpr (std::is_same_v<T, float>) return detail::fast_sigmoid(v);
    if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
    const T e = std::exp(v);
    return e / (T(1) + e);
}

template <typename T>
inline T gauss_cdf(T v) {
    if constexpr (std::is_same_v<T, float>) return detail::fast_gauss_cdf(v);
    return T(0.5) * (T(1) + std::erf(v * T(0.7071067811865475244)));
}

template <typename T>
inline T gauss_pdf(T v) {
    if constexpr (std::is_same_v<T, float>) return detail::fast_gauss_pdf(v);
    return T(0.3989422804014326779) * std::exp(T(-0.5) * v * v);
}

}  // namespace

template <typename T>
Tensor<T> activation(Act kind, const Tensor<T>& x) {
    std::vector<T> out(x.data().size());
    const T* in = x.ptr();
    switch (kind) {
        case Act::Gelu:
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[i] * gauss_cdf(in[i]);
            break;
        case Act::Tanh:
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(in[i]);
            break;
        case Act::Sigmoid:
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid_scalar(in[i]);
            break;
    }
    auto bw = [kind](Node<T>& self) {
        auto& xn = *self.parents[0];
        if (!xn.requires_grad) return;
        const T* dy = self.grad.data();
        const T* in = xn.data.data();
        const T* y = self.data.data();
        T* dx = xn.grad.data();
        switch (kind) {
            case Act::Gelu:
                for (std::size_t i = 0; i < self.data.size(); ++i)
                    dx[i] += dy[i] * (gauss_cdf(in[i]) + in[i] * gauss_pdf(in[i]));
                break;
            case Act::Tanh:
                for (std::size_t i = 0; i < self.data.size(); ++i) dx[i] += dy[i] * (T(1) - y[i] * y[i]);
                break;
            case Act::Sigmoid:
                for (std::size_t i = 0; i < self.data.size(); ++i) dx[i] += dy[i] * y[i] * (T(1) - y[i]);
                break;
        }
    };
    return make_result<T>(x.shape(), std::move(out), "activation", {x}, bw);
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) { return activation(Act::Gelu, x); }
template <typename T>
Tensor<T> tanh_act(const Tensor<T>& x) { return activation(Act::Tanh, x); }
template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) { return activation(Act::Sigmoid, x); }

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    require_same_shape(a, b, "add");
    std::vector<T> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
    auto bw = [](Node<T>& self) {
        const T* dy = self.grad.data();
        for (int side = 0; side < 2; ++side) {
            auto& p = *self.parents[side];
            if (!p.requires_grad) continue;
            T* dst = p.grad.data();
            for (std::size_t i = 0; i < self.data.size(); ++i) dst[i] += dy[i];
        }
    };
    return make_result<T>(a.shape(), std::move(out), "add", {a, b}, bw);
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    require_same_shape(a, b, "sub");
    std::vector<T> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
    auto bw = [](Node<T>& self) {
        const T* dy = self.grad.data();
        if (self.parents[0]->requires_grad) {
            T* dst = self.parents[0]->grad.data();
            for (std::size_t i = 0; i < self.data.size(); ++i) dst[i] += dy[i];
        }
        if (self.parents[1]->requires_grad) {
            T* dst = self.parents[1]->grad.data();
            for (std::size_t i = 0; i < self.data.size(); ++i) dst[i] -= dy[i];
        }
    };
    return make_result<T>(a.shape(), std::move(out), "sub", {a, b}, bw);
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    require_same_shape(a, b, "mul");
    std::vector<T> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
    auto bw = [](Node<T>& self) {
        const T* dy = self.grad.data();
        auto& an = *self.parents[0];
        auto& bn = *self.parents[1];
        if (an.requires_grad) {
            T* dst = an.grad.data();
            for (std::size_t i = 0; i < self.data.size(); ++i) dst[i] += dy[i] * bn.data[i];
        }
        if (bn.requires_grad) {
            T* dst = bn.grad.data();
            for (std::size_t i = 0; i < self.data.size(); ++i) dst[i] += dy[i] * an.data[i];
        }
    };
    return make_result<T>(a.shape(), std::move(out), "mul", {a, b}, bw);
}

template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b) {
    require_same_shape(a, b, "div");
    std::vector<T> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] / b.data()[i];
    auto bw = [](Node<T>& self) {
        const T* dy = self.grad.data();
        auto& an = *self.parents[0];
        auto& bn = *self.parents[1];
        if (an.requires_grad) {
            T* dst = an.grad.data();
            for (std::size_t i = 0; i < self.data.size(); ++i) dst[i] += dy[i] / bn.data[i];
        }
        if (bn.requires_grad) {
            T* dst = bn.grad.data();
            for (std::size_t i = 0; i < self.data.size(); ++i)
                dst[i] -= dy[i] * self.data[i] / bn.data[i];
        }
    };
    return make_result<T>(a.shape(), std::move(out), "div", {a, b}, bw);
}

template <typename T>
Tensor<T> affine(const Tensor<T>& x, T a, T b) {
    std::vector<T> out(x.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x.data()[i] + b;
    auto bw = [a](Node<T>& self) {
        auto& xn = *self.parents[0];
        if (!xn.requires_grad) return;
        const T* dy = self.grad.data();
        T* dst = xn.grad.data();
        for (std::size_t i = 0; i < self.data.size(); ++i) dst[i] += a * dy[i];
    };
    return make_result<T>(x.shape(), std::move(out), "affine", {x}, bw);
}

template <typename T>
Tensor<T> square(const Tensor<T>& x) {
    std::vector<T> out(x.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * x.data()[i];
    auto bw = [](Node<T>& self) {
        auto& xn = *self.parents[0];
        if (!xn.requires_grad) return;
        const T* dy = self.grad.data();
        T* dst = xn.grad.data();
        for (std::size_t i = 0; i < self.data.size(); ++i) dst[i] += T(2) * xn.data[i] * dy[i];
    };
    return make_result<T>(x.shape(), std::move(out), "square", {x}, bw);
}

template <typename T>
Tensor<T> abs_val(const Tensor<T>& x) {
    std::vector<T> out(x.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(x.data()[i]);
    auto bw = [](Node<T>& self) {
        auto& xn = *self.parents[0];
        if (!xn.requires_grad) return;
        const T* dy = self.grad.data();
        T* dst = xn.grad.data();
        for (std::size_t i = 0; i < self.data.size(); ++i) {
            const T v = xn.data[i];
            dst[i] += v > T(0) ? dy[i] : (v < T(0) ? -dy[i] : T(0));
        }
    };
    return make_result<T>(x.shape(), std::move(out), "abs", {x}, bw);
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
    T s = T(0);
    for (T v : x.data()) s += v;
    auto bw = [](Node<T>& self) {
        auto& xn = *self.parents[0];
        if (!xn.requires_grad) return;
        const T g = self.grad[0];
        T* dst = xn.grad.data();
        for (std::size_t i = 0; i < xn.data.size(); ++i) dst[i] += g;
    };
    return make_result<T>({1}, {s}, "sum", {x}, bw);
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
    T s = T(0);
    for (T v : x.data()) s += v;
    const T n = static_cast<T>(x.data().size());
    auto bw = [n](Node<T>& self) {
        auto& xn = *self.parents[0];
        if (!xn.requires_grad) return;
        const T g = self.grad[0] / n;
        T* dst = xn.grad.data();
        for (std::size_t i = 0; i < xn.data.size(); ++i) dst[i] += g;
    };
    return make_result<T>({1}, {s / n}, "mean", {x}, bw);
}

template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& xs) {
    if (xs.empty()) throw UsageError("concat_channels: no inputs");
    const int H = xs[0].shape()[1], W = xs[0].shape()[2];
    int C = 0;
    for (const auto& t : xs) {
        if (t.shape().size() != 3 || t.shape()[1] != H || t.shape()[2] != W)
            throw DimensionError("concat_channels: inputs must share spatial dims");
        C += t.shape()[0];
    }
    std::vector<T> out;
    out.reserve(static_cast<std::size_t>(C) * H * W);
    for (const auto& t : xs) out.insert(out.end(), t.data().begin(), t.data().end());
    auto bw = [](Node<T>& self) {
        const T* dy = self.grad.data();
        std::size_t off = 0;
        for (auto& p : self.parents) {
            if (p->requires_grad) {
                T* dst = p->grad.data();
                for (std::size_t i = 0; i < p->data.size(); ++i) dst[i] += dy[off + i];
            }
            off += p->data.size();
        }
    };
    return make_result<T>({C, H, W}, std::move(out), "concat_channels", xs, bw);
}

#define DNERV_INSTANTIATE_OPS(T)                                                                  \
    template Tensor<T> conv2d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,           \
                                 const ConvSpec&);                                                \
    template Tensor<T> pixel_shuffle<T>(const Tensor<T>&, int);                                  \
    template Tensor<T> pixel_unshuffle<T>(const Tensor<T>&, int);                                \
    template Tensor<T> layer_norm<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);   \
    template Tensor<T> activation<T>(Act, const Tensor<T>&);                                     \
    template Tensor<T> gelu<T>(const Tensor<T>&);                                                \
    template Tensor<T> tanh_act<T>(const Tensor<T>&);                                            \
    template Tensor<T> sigmoid<T>(const Tensor<T>&);                                             \
    template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                               \
    template Tensor<T> sub<T>(const Tensor<T>&, const Tensor<T>&);                               \
    template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);                               \
    template Tensor<T> div<T>(const Tensor<T>&, const Tensor<T>&);                               \
    template Tensor<T> affine<T>(const Tensor<T>&, T, T);                                        \
    template Tensor<T> square<T>(const Tensor<T>&);                                              \
    template Tensor<T> abs_val<T>(const Tensor<T>&);                                             \
    template Tensor<T> sum<T>(const Tensor<T>&);                                                 \
    template Tensor<T> mean<T>(const Tensor<T>&);                                                \
    template Tensor<T> concat_channels<T>(const std::vector<Tensor<T>>&);

DNERV_INSTANTIATE_OPS(float)
DNERV_INSTANTIATE_OPS(double)
#undef DNERV_INSTANTIATE_OPS

}  // namespace dnerv
