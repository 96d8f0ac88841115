#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dnerv/errors.hpp"
#include "dnerv/rng.hpp"

namespace dnerv {

using Shape = std::vector<int>;

std::int64_t numel(const Shape& s);
std::string shape_str(const Shape& s);

// Toggles NaN/Inf screening of op results. Tests switch it on; the training
// loop has its own loss check either way.
void set_debug_checks(bool on);
bool debug_checks_enabled();

// While a NoGradGuard is alive, ops do not record the tape even if inputs
// require grad. Used by evaluation so forward passes stay allocation-light
// and provably cannot touch parameters.
struct NoGradGuard {
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};
bool grad_enabled();

namespace detail {

template <typename T>
struct TensorNode {
    Shape shape;
    std::vector<T> data;
    bool requires_grad = false;
    std::vector<T> grad;  // allocated for leaves at creation, lazily for interior nodes
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void(TensorNode&)> backward_fn;  // scatters this->grad into parents

    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), T(0));
    }
};

}  // namespace detail

// Dense row-major tensor with reverse-mode autodiff. Copying a Tensor
// aliases the underlying node (shared-handle semantics, like the graph
// frameworks this mirrors). T is float or double.
template <typename T>
class Tensor {
public:
    using Node = detail::TensorNode<T>;

    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, T value, bool requires_grad = false);
    static Tensor from_data(Shape shape, std::vector<T> data, bool requires_grad = false);
    static Tensor scalar(T value, bool requires_grad = false);
    // Uniform in [lo, hi), row-major draw order.
    static Tensor uniform(Shape shape, Rng& rng, T lo, T hi, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::int64_t size() const { return static_cast<std::int64_t>(node_->data.size()); }
    bool requires_grad() const { return node_ && node_->requires_grad; }

    std::vector<T>& data() { return node_->data; }
    const std::vector<T>& data() const { return node_->data; }
    T* ptr() { return node_->data.data(); }
    const T* ptr() const { return node_->data.data(); }

    // Gradient buffer. Present from creation for requires_grad leaves, so a
    // parameter untouched by the last backward() reads as all zeros.
    std::vector<T>& grad() { return node_->grad; }
    const std::vector<T>& grad() const { return node_->grad; }
    void zero_grad() {
        if (node_ && node_->requires_grad) node_->grad.assign(node_->data.size(), T(0));
    }

    T item() const {
        if (size() != 1) throw UsageError("item() on non-scalar tensor of shape " + shape_str(shape()));
        return node_->data[0];
    }

    std::shared_ptr<Node> node() const { return node_; }

    static Tensor wrap(std::shared_ptr<Node> n) {
        Tensor t;
        t.node_ = std::move(n);
        return t;
    }

private:
    std::shared_ptr<Node> node_;
};

// Runs reverse-mode accumulation from a scalar loss. Gradients of
// requires_grad leaves accumulate across calls until zero_grad();
// interior results of this pass are freed with the graph.
template <typename T>
void backward(const Tensor<T>& loss);

// Throws NumericError if the tensor holds a NaN or Inf.
template <typename T>
void check_finite(const Tensor<T>& t, const char* what);

extern template class Tensor<float>;
extern template class Tensor<double>;
extern template void backward<float>(const Tensor<float>&);
extern template void backward<double>(const Tensor<double>&);
extern template void check_finite<float>(const Tensor<float>&, const char*);
extern template void check_finite<double>(const Tensor<double>&, const char*);

}  // namespace dnerv
