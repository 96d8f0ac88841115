#include "dnerv/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

namespace dnerv {

std::int64_t numel(const Shape& s) {
    std::int64_t n = 1;
    for (int d : s) {
        if (d <= 0) throw DimensionError("non-positive extent in shape " + shape_str(s));
        n *= d;
    }
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << 'x';
        os << s[i];
    }
    os << ']';
    return os.str();
}

namespace {
bool g_debug_checks = false;
thread_local bool g_grad_enabled = true;
}  // namespace

void set_debug_checks(bool on) { g_debug_checks = on; }
bool debug_checks_enabled() { return g_debug_checks; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }
bool grad_enabled() { return g_grad_enabled; }

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->data.assign(static_cast<std::size_t>(numel(shape)), T(0));
    n->shape = std::move(shape);
    n->requires_grad = requires_grad;
    if (requires_grad) n->grad.assign(n->data.size(), T(0));
    return wrap(std::move(n));
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (auto& v : t.data()) v = value;
    return t;
}

template <typename T>
Tensor<T> Tensor<T>::from_data(Shape shape, std::vector<T> data, bool requires_grad) {
    if (numel(shape) != static_cast<std::int64_t>(data.size()))
        throw DimensionError("data length " + std::to_string(data.size()) + " does not fill shape " +
                             shape_str(shape));
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->data = std::move(data);
    n->requires_grad = requires_grad;
    if (requires_grad) n->grad.assign(n->data.size(), T(0));
    return wrap(std::move(n));
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::uniform(Shape shape, Rng& rng, T lo, T hi, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (auto& v : t.data()) v = static_cast<T>(rng.uniform(static_cast<double>(lo), static_cast<double>(hi)));
    return t;
}

template <typename T>
void backward(const Tensor<T>& loss) {
    using Node = detail::TensorNode<T>;
    if (!loss.defined() || loss.size() != 1)
        throw UsageError("backward() requires a scalar loss tensor");

    // Iterative post-order DFS; graphs are deep enough that recursion is
    // not worth the stack risk.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(loss.node().get(), 0);
    seen.insert(loss.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* p = node->parents[next++].get();
            if (p->requires_grad && !seen.count(p)) {
                seen.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    loss.node()->ensure_grad();
    loss.node()->grad[0] += T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward_fn) {
            n->ensure_grad();
            for (auto& p : n->parents)
                if (p->requires_grad) p->ensure_grad();
            n->backward_fn(*n);
        }
    }
}

template <typename T>
void check_finite(const Tensor<T>& t, const char* what) {
    for (T v : t.data())
        if (!std::isfinite(static_cast<double>(v)))
            throw NumericError(std::string("non-finite value in ") + what);
}

template class Tensor<float>;
template class Tensor<double>;
template void backward<float>(const Tensor<float>&);
template void backward<double>(const Tensor<double>&);
template void check_finite<float>(const Tensor<float>&, const char*);
template void check_finite<double>(const Tensor<double>&, const char*);

}  // namespace dnerv
