#include "dnerv/optim.hpp"

#include <cmath>

namespace dnerv {

template <typename T>
Adam<T>::Adam(std::vector<Tensor<T>> params, double beta1, double beta2, double eps)
    : params_(std::move(params)) {
    state_.beta1 = beta1;
    state_.beta2 = beta2;
    state_.eps = eps;
    state_.m.reserve(params_.size());
    state_.v.reserve(params_.size());
    for (const auto& p : params_) {
        state_.m.emplace_back(p.data().size(), T(0));
        state_.v.emplace_back(p.data().size(), T(0));
    }
}

template <typename T>
void Adam<T>::step(double lr) {
    if (lr <= 0) throw UsageError("adam: lr must be positive");
    ++state_.step;
    const T b1 = static_cast<T>(state_.beta1);
    const T b2 = static_cast<T>(state_.beta2);
    const T eps = static_cast<T>(state_.eps);
    const T c1 = T(1) / static_cast<T>(1.0 - std::pow(state_.beta1, static_cast<double>(state_.step)));
    const T c2 = T(1) / static_cast<T>(1.0 - std::pow(state_.beta2, static_cast<double>(state_.step)));
    const T a = static_cast<T>(lr);
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        auto& p = params_[pi];
        const auto& g = p.grad();
        if (g.size() != p.data().size())
            throw DimensionError("adam: gradient buffer size mismatch");
        T* w = p.ptr();
        T* m = state_.m[pi].data();
        T* v = state_.v[pi].data();
        const T* gr = g.data();
        const std::size_t n = p.data().size();
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = b1 * m[i] + (T(1) - b1) * gr[i];
            v[i] = b2 * v[i] + (T(1) - b2) * gr[i] * gr[i];
            const T mhat = m[i] * c1;
            const T vhat = v[i] * c2;
            w[i] -= a * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

template <typename T>
void Adam<T>::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

double cosine_lr(std::int64_t step, std::int64_t total_steps, double base_lr) {
    if (total_steps < 1) throw UsageError("cosine_lr: total_steps must be >= 1");
    if (step < 0 || step > total_steps)
        throw UsageError("cosine_lr: step " + std::to_string(step) + " outside [0, " +
                         std::to_string(total_steps) + "]");
    return 0.5 * base_lr * (1.0 + std::cos(M_PI * static_cast<double>(step) / static_cast<double>(total_steps)));
}

template class Adam<float>;
template class Adam<double>;

}  // namespace dnerv
