#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lowbridge {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& dims);
std::string shape_to_string(const Shape& dims);

namespace autograd {

// One executed differentiable operation (or a leaf value). Nodes link to the
// nodes that produced their inputs, forming the dynamic compute graph that
// backward() walks in reverse topological order.
struct Node {
    Shape dims;
    std::vector<float> values;
    std::vector<float> grad; // persistent, populated for requires_grad leaves
    bool requires_grad = false;
    bool is_leaf = true;
    std::vector<std::shared_ptr<Node>> parents;
    // gout: gradient w.r.t. this node's values. parent_grads[i]: accumulation
    // buffer for parents[i]; empty span when that parent does not need a
    // gradient. Must only add into the buffers.
    std::function<void(std::span<const float> gout,
                       std::span<const std::span<float>> parent_grads)>
        backward_fn;

    std::int64_t numel() const { return static_cast<std::int64_t>(values.size()); }
};

// Thread-local switch: when disabled, ops produce graph-free leaf outputs.
bool grad_enabled();

class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

// Optional runtime check that every op output is finite; off by default.
void set_debug_checks(bool enabled);
bool debug_checks();

} // namespace autograd

// Dense float32 value grid with reverse-mode autodiff. Copying a Tensor is
// cheap: copies share the underlying node.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape dims, bool requires_grad = false);
    static Tensor full(Shape dims, float value, bool requires_grad = false);
    static Tensor from_data(Shape dims, std::vector<float> values, bool requires_grad = false);
    static Tensor scalar(float value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& dims() const;
    std::int64_t numel() const;
    std::int64_t dim(std::size_t i) const;

    const float* data() const;
    float* data(); // leaf mutation only (parameters, inputs)
    std::span<const float> values() const;
    float item() const; // scalar tensors

    bool requires_grad() const;
    Tensor& set_requires_grad(bool v);
    bool is_leaf() const;

    bool has_grad() const;
    std::span<const float> grad() const;
    float* grad_data();
    void zero_grad();

    // Reverse-mode sweep from a scalar. Leaf gradients accumulate across
    // calls; intermediate buffers are scratch per sweep.
    void backward() const;

    // Deep copy of the values as a new leaf with no graph link.
    Tensor detach() const;
    Tensor clone() const { return detach(); }

    std::shared_ptr<autograd::Node> node() const { return node_; }
    static Tensor from_node(std::shared_ptr<autograd::Node> node);

private:
    std::shared_ptr<autograd::Node> node_;
};

namespace autograd {

using BackwardFn = std::function<void(std::span<const float> gout,
                                      std::span<const std::span<float>> parent_grads)>;

// Builds an op output node. Records the graph edge only when gradients are
// enabled and some input requires them; otherwise returns a free leaf.
Tensor make_op(Shape dims, std::vector<float> values,
               std::initializer_list<Tensor> inputs, BackwardFn backward);

} // namespace autograd

} // namespace lowbridge
