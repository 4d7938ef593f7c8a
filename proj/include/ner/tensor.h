#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace ner {

// Dense row-major tensor of doubles. Learned parameters carry their
// gradient in `grad`; intermediate activations live on the tape and never
// allocate one.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> values;
    bool requires_grad = false;
    std::vector<double> grad;  // empty until ensure_grad()

    Tensor() = default;

    static Tensor zeros(std::vector<int> shape);
    static Tensor scalar(double v);
    static Tensor vec(std::vector<double> v);
    static Tensor matrix(int rows, int cols, std::vector<double> v);

    int64_t size() const;
    int ndim() const { return static_cast<int>(shape.size()); }
    int rows() const { return shape.at(0); }
    int cols() const { return shape.at(1); }

    double& at(int i) { return values[static_cast<size_t>(i)]; }
    double at(int i) const { return values[static_cast<size_t>(i)]; }
    double& at(int i, int j) { return values[static_cast<size_t>(i) * cols() + j]; }
    double at(int i, int j) const { return values[static_cast<size_t>(i) * cols() + j]; }

    // Allocates (zeroed) the grad buffer if absent.
    void ensure_grad();
    void zero_grad();
};

using TensorPtr = std::shared_ptr<Tensor>;

std::string shape_str(const std::vector<int>& shape);

// Handle to a node recorded on a Tape.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Define-by-run computation record. Nodes are appended in forward order,
// which is a topological order, so backward() visits them strictly in
// reverse. One tape per training step; clear() between steps.
class Tape {
  public:
    // Registers a parameter; after backward() its gradient is accumulated
    // into t->grad when t->requires_grad is set.
    Var leaf(const TensorPtr& t);
    // Registers a value the graph treats as a constant.
    Var constant(Tensor t);

    // a{m,k} x b{k,n} -> {m,n};  a{m,k} x b{k} -> {m}
    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    Var mul(Var a, Var b);  // elementwise
    Var sigmoid(Var a);
    Var tanh(Var a);
    Var log(Var a);
    Var scale(Var a, double c);
    // Concatenation along the last axis (1-d vectors or row-aligned 2-d).
    Var concat(const std::vector<Var>& parts);
    // Softmax along the last axis; every output row sums to 1.
    Var softmax(Var a);
    // {m,n} -> {n}, per-column max over rows. Gradient is routed to the
    // lowest-index maximizing row of each column.
    Var max_over_rows(Var a);
    Var sum(Var a);  // -> {1}
    Var slice(Var a, int offset, int len);  // 1-d
    Var pick(Var a, int index);             // 1-d -> {1}
    Var row(Var m, int i);                  // 2-d -> {cols}
    Var stack_rows(const std::vector<Var>& rows);  // k vectors {n} -> {k,n}
    Var reshape(Var a, std::vector<int> shape);

    const Tensor& value(Var v) const;
    // This node's gradient buffer; populated after backward(), empty if the
    // node was unreachable from the loss.
    const std::vector<double>& node_grad(Var v) const;

    // Reverse pass from a scalar loss. Every reachable requires_grad leaf
    // ends with d(loss)/d(leaf) accumulated into its grad buffer. A second
    // call without clear() is rejected.
    void backward(Var loss);

    void clear();
    size_t size() const { return nodes_.size(); }

  private:
    struct Node {
        Tensor value;
        std::vector<double> grad;      // lazily allocated during backward
        std::function<void()> backprop;
        TensorPtr param;               // set for leaves
    };

    Var push(Tensor value);
    Node& node(Var v) { return nodes_[static_cast<size_t>(v.id)]; }
    const Node& node(Var v) const { return nodes_[static_cast<size_t>(v.id)]; }
    // Grad buffer of node id, allocated and zeroed on first use.
    std::vector<double>& grad_buf(int id);
    void check_valid(Var v, const char* op) const;

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

}  // namespace ner
