#pragma once

#include <map>
#include <string>
#include <vector>

#include "multinex/tensor.hpp"

namespace multinex::tape {

// Reverse-mode differentiation tape. All node values and gradients are
// double precision regardless of the float master weights; leaves are bound
// by value. Forward math routes through the same kernels as the plain metric
// and loss implementations, so a taped expression reproduces their results
// bit for bit.
class Tape {
public:
    using Id = int;
    static constexpr Id kNone = -1;

    // Constant leaf (no gradient tracked beyond the backward sweep).
    Id input(Tensor64 value);
    // Named leaf whose gradient is reported by param_grads().
    Id param(const std::string& name, Tensor64 value);

    // Elementwise, with broadcasting across dims that are 1.
    Id add(Id a, Id b);
    Id sub(Id a, Id b);
    Id mul(Id a, Id b);
    Id div(Id a, Id b);

    Id scale(Id a, double s);   // a * s
    Id offset(Id a, double s);  // a + s
    Id relu(Id a);
    Id sigmoid(Id a);
    Id tanh(Id a);
    // pow with a fixed exponent; bases <= 0 evaluate to 0 with zero gradient.
    Id pow(Id a, double e);

    // x: (H,W,Cin), w: (Cout,Cin,1), optional b: (1,1,Cout).
    Id conv1x1(Id x, Id w, Id b = kNone);
    // Depthwise, odd kernel, zero padding to the same spatial size; w: (k,k,C).
    Id dwconv(Id x, Id w);
    // Per-pixel normalization over channels (eps 1e-5); scale/shift: (1,1,C).
    Id layer_norm(Id x, Id scale, Id shift);
    // Global average pooling to (1,1,C).
    Id gap(Id x);
    // Fixed 11x11 Gaussian, valid positions.
    Id gaussian11_valid(Id x);
    Id avgpool2(Id x);
    Id reduce_mean(Id x);       // -> (1,1,1)
    Id luma_rec709(Id x);       // (H,W,3) -> (H,W,1)

    const Tensor64& value(Id id) const;
    double scalar(Id id) const;  // value of a (1,1,1) node

    // Reverse sweep from a scalar root; errors on non-scalar roots.
    void backward(Id root);

    // Gradient of a node after backward; zeros if the node was not reached.
    Tensor64 grad(Id id) const;
    // Gradients of all named leaves, keyed by name.
    std::map<std::string, Tensor64> param_grads() const;

    size_t size() const { return nodes_.size(); }

private:
    enum class Op {
        Input, Param, Add, Sub, Mul, Div, Scale, Offset, Relu, Sigmoid, Tanh,
        Pow, Conv1x1, DwConv, LayerNorm, Gap, Gauss, AvgPool2, ReduceMean, Luma
    };

    struct Node {
        Op op;
        Id a = kNone, b = kNone, c = kNone;
        double k = 0.0;
        Tensor64 val;
        std::string name;
    };

    Id push(Node n);
    const Node& node(Id id) const;
    void accumulate(Id target, const Tensor64& g);

    std::vector<Node> nodes_;
    std::vector<Tensor64> grads_;
};

} // namespace multinex::tape
