#include "lowbridge/tensor.hpp"

#include "lowbridge/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace lowbridge {

std::int64_t shape_numel(const Shape& dims) {
    std::int64_t n = 1;
    for (std::int64_t d : dims) n *= d;
    return n;
}

std::string shape_to_string(const Shape& dims) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) os << ",";
        os << dims[i];
    }
    os << "]";
    return os.str();
}

namespace autograd {

namespace {
thread_local bool g_grad_enabled = true;
std::atomic<bool> g_debug_checks{false};

void validate_dims(const Shape& dims) {
    for (std::int64_t d : dims) {
        if (d <= 0) throw ShapeError("tensor extent must be positive, got " + shape_to_string(dims));
    }
}

void check_finite(const std::vector<float>& values) {
    for (float v : values) {
        if (!std::isfinite(v)) throw Error("non-finite value in tensor (debug check)");
    }
}
} // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

void set_debug_checks(bool enabled) { g_debug_checks.store(enabled); }
bool debug_checks() { return g_debug_checks.load(); }

Tensor make_op(Shape dims, std::vector<float> values,
               std::initializer_list<Tensor> inputs, BackwardFn backward) {
    if (shape_numel(dims) != static_cast<std::int64_t>(values.size()))
        throw ShapeError("op output size does not match dims " + shape_to_string(dims));
    if (debug_checks()) check_finite(values);

    auto node = std::make_shared<Node>();
    node->dims = std::move(dims);
    node->values = std::move(values);

    bool track = grad_enabled();
    bool any_requires = false;
    if (track) {
        for (const Tensor& t : inputs) {
            if (t.defined() && t.requires_grad()) {
                any_requires = true;
                break;
            }
        }
    }
    if (track && any_requires) {
        node->requires_grad = true;
        node->is_leaf = false;
        node->parents.reserve(inputs.size());
        for (const Tensor& t : inputs) node->parents.push_back(t.node());
        node->backward_fn = std::move(backward);
    }
    return Tensor::from_node(std::move(node));
}

namespace {

// Post-order over parents: producers before consumers. Iterative so graph
// depth is not bounded by the stack.
std::vector<Node*> topo_order(Node* root) {
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(root, 0);
    visited.insert(root);
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* parent = node->parents[next++].get();
            if (parent && parent->requires_grad && !visited.count(parent)) {
                visited.insert(parent);
                stack.emplace_back(parent, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    return order;
}

} // namespace

void run_backward(const std::shared_ptr<Node>& loss) {
    if (!loss) throw Error("backward() on undefined tensor");
    if (loss->numel() != 1)
        throw ShapeError("backward() requires a scalar loss, got " + shape_to_string(loss->dims));
    if (!loss->requires_grad) return;

    std::vector<Node*> order = topo_order(loss.get());

    // Scratch buffers for intermediates; leaf gradients go to the persistent
    // node->grad so repeated sweeps accumulate there and only there.
    std::unordered_map<Node*, std::vector<float>> scratch;
    auto buffer_of = [&](Node* n) -> std::span<float> {
        if (n->is_leaf) {
            if (n->grad.empty()) n->grad.assign(static_cast<std::size_t>(n->numel()), 0.0f);
            return std::span<float>(n->grad);
        }
        auto it = scratch.find(n);
        if (it == scratch.end())
            it = scratch.emplace(n, std::vector<float>(static_cast<std::size_t>(n->numel()), 0.0f)).first;
        return std::span<float>(it->second);
    };

    buffer_of(loss.get())[0] += 1.0f;

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        if (!node->backward_fn) continue;
        std::span<const float> gout;
        if (node->is_leaf) {
            gout = std::span<const float>(node->grad);
        } else {
            auto found = scratch.find(node);
            if (found == scratch.end()) continue; // not reached by any consumer
            gout = std::span<const float>(found->second);
        }
        std::vector<std::span<float>> parent_bufs(node->parents.size());
        for (std::size_t i = 0; i < node->parents.size(); ++i) {
            Node* parent = node->parents[i].get();
            if (parent && parent->requires_grad) parent_bufs[i] = buffer_of(parent);
        }
        node->backward_fn(gout, parent_bufs);
    }
}

} // namespace autograd

using autograd::Node;

Tensor Tensor::from_node(std::shared_ptr<Node> node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
}

Tensor Tensor::zeros(Shape dims, bool requires_grad) {
    return full(std::move(dims), 0.0f, requires_grad);
}

Tensor Tensor::full(Shape dims, float value, bool requires_grad) {
    autograd::validate_dims(dims);
    auto node = std::make_shared<Node>();
    node->values.assign(static_cast<std::size_t>(shape_numel(dims)), value);
    node->dims = std::move(dims);
    node->requires_grad = requires_grad;
    return from_node(std::move(node));
}

Tensor Tensor::from_data(Shape dims, std::vector<float> values, bool requires_grad) {
    autograd::validate_dims(dims);
    if (shape_numel(dims) != static_cast<std::int64_t>(values.size()))
        throw ShapeError("data size " + std::to_string(values.size()) +
                         " does not match dims " + shape_to_string(dims));
    auto node = std::make_shared<Node>();
    node->dims = std::move(dims);
    node->values = std::move(values);
    node->requires_grad = requires_grad;
    return from_node(std::move(node));
}

Tensor Tensor::scalar(float value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

const Shape& Tensor::dims() const {
    if (!node_) throw Error("dims() on undefined tensor");
    return node_->dims;
}

std::int64_t Tensor::numel() const {
    if (!node_) throw Error("numel() on undefined tensor");
    return node_->numel();
}

std::int64_t Tensor::dim(std::size_t i) const {
    const Shape& d = dims();
    if (i >= d.size()) throw ShapeError("dim index " + std::to_string(i) + " out of rank " + std::to_string(d.size()));
    return d[i];
}

const float* Tensor::data() const {
    if (!node_) throw Error("data() on undefined tensor");
    return node_->values.data();
}

float* Tensor::data() {
    if (!node_) throw Error("data() on undefined tensor");
    return node_->values.data();
}

std::span<const float> Tensor::values() const {
    if (!node_) throw Error("values() on undefined tensor");
    return node_->values;
}

float Tensor::item() const {
    if (numel() != 1) throw ShapeError("item() requires a scalar, got " + shape_to_string(dims()));
    return node_->values[0];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool v) {
    if (!node_) throw Error("set_requires_grad() on undefined tensor");
    if (!node_->is_leaf) throw Error("set_requires_grad() permitted on leaf tensors only");
    node_->requires_grad = v;
    return *this;
}

bool Tensor::is_leaf() const { return node_ && node_->is_leaf; }

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::span<const float> Tensor::grad() const {
    if (!has_grad()) throw Error("grad() requested but no gradient is populated");
    return node_->grad;
}

float* Tensor::grad_data() {
    if (!has_grad()) throw Error("grad_data() requested but no gradient is populated");
    return node_->grad.data();
}

void Tensor::zero_grad() {
    if (!node_) throw Error("zero_grad() on undefined tensor");
    node_->grad.assign(static_cast<std::size_t>(node_->numel()), 0.0f);
}

void Tensor::backward() const { autograd::run_backward(node_); }

Tensor Tensor::detach() const {
    if (!node_) throw Error("detach() on undefined tensor");
    return from_data(node_->dims, node_->values, false);
}

} // namespace lowbridge
