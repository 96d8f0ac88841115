#pragma once

#include <cstdint>
#include <vector>

#include "dnerv/tensor.hpp"

namespace dnerv {

// Bias-corrected Adam over a fixed parameter list. Moment buffers are laid
// out per parameter in list order; the list must not change between steps.
template <typename T>
class Adam {
public:
    struct State {
        std::vector<std::vector<T>> m;  // first moments, one buffer per parameter
        std::vector<std::vector<T>> v;  // second moments
        std::int64_t step = 0;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
    };

    explicit Adam(std::vector<Tensor<T>> params, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8);

    // One update from the gradients currently held in param.grad().
    void step(double lr);

    void zero_grad();

    State& state() { return state_; }
    const std::vector<Tensor<T>>& params() const { return params_; }

private:
    std::vector<Tensor<T>> params_;
    State state_;
};

// 0.5 * base_lr * (1 + cos(pi * step / total_steps)); no warmup, reaches 0
// exactly at step == total_steps.
double cosine_lr(std::int64_t step, std::int64_t total_steps, double base_lr);

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace dnerv
