#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spclosure/boundary.hpp"
#include "spclosure/params.hpp"
#include "spclosure/tensor.hpp"

namespace spclosure {

/// Reverse-mode autodiff over the coarse-grained primitives the closure
/// models are built from: padding, convolutions, learned/fixed stencils and
/// their exact transposes, elementwise arithmetic, and the loss reductions.
///
/// Define-by-run: building an op evaluates it immediately. Parameters are not
/// nodes; conv/stencil ops reference offsets into the bound ParameterSet and
/// backward() accumulates directly into a flat gradient. Replaying a tape
/// reproduces forward values bit-identically; backward passes are
/// deterministic.
class Tape {
public:
    enum class Op : uint8_t {
        Leaf,
        Add,
        Sub,
        Scale,
        Mul,
        Square,
        Relu,
        Pad,
        SliceLen,
        SliceCh,
        StackCh,
        ConcatLen,
        Conv1d,
        Stencil,
        StencilT,
        FixedStencil,
        Convection,
        ScaleVec,
        SumSq,
    };

    explicit Tape(const ParameterSet* params = nullptr) : params_(params) {}

    int leaf(Tensor v);
    int leaf(std::vector<double> v) { return leaf(Tensor(std::move(v))); }

    int add(int a, int b);
    int sub(int a, int b);
    int scale(int a, double c);
    int mul(int a, int b);
    int square(int a);
    int relu(int a);

    /// Extend a 1-channel vector by `depth` ghosts per side.
    int pad(int a, int depth, const PadSpec& spec);
    int slice_len(int a, int offset, int len);
    int slice_ch(int a, int channel);
    int stack_ch(const std::vector<int>& parts);
    int concat_len(int a, int b);

    /// Valid multichannel convolution of an already padded stack; weights
    /// (co x ci x k) at woff, biases (co) at boff (boff < 0: none).
    int conv1d(int x, long woff, long boff, int co, int k);

    /// Learned stencil of radius B applied to an interior vector; pads
    /// internally with `spec`. Weights are mean-subtracted when constrained.
    int stencil(int x, long woff, int B, bool constrained, const PadSpec& spec);

    /// Exact transpose of `stencil` (scatter + ghost fold).
    int stencil_t(int y, long woff, int B, bool constrained, const PadSpec& spec);

    /// Fixed-weight stencil over offsets [lo, ...] of a padded input.
    int fixed_stencil(int xp, std::vector<double> w, int lo, double scale, int n_out);

    /// Skew-symmetric Burgers convection of a depth-1 padded input.
    int convection(int xp, double c);

    /// Elementwise multiply by a constant vector (e.g. inverse mass diagonal).
    int scale_vec(int a, std::vector<double> diag);

    /// ||x||_2^2 reduced to a scalar node.
    int sumsq(int a);

    const Tensor& val(int id) const { return nodes_[id].val; }
    size_t n_nodes() const { return nodes_.size(); }
    const ParameterSet* params() const { return params_; }

    /// Reverse sweep from a scalar root; accumulates d(root)/d(theta) into
    /// grad (resized to the parameter count, zero-filled first).
    void backward(int root, std::vector<double>& grad) const;

    /// Recompute all forward values in recording order (bit-identical).
    void replay();

private:
    struct Node {
        Op op;
        int a = -1, b = -1;
        std::vector<int> many;
        Tensor val;
        double c0 = 0.0;
        int i0 = 0, i1 = 0, i2 = 0;
        long woff = -1, boff = -1;
        bool flag = false;
        PadSpec pads{};
        std::vector<double> aux;    // fixed weights / diag / constrained weights
        std::vector<double> cache;  // padded input for Stencil
    };

    int push(Node n);
    void forward(Node& n) const;
    void check_finite(const Node& n) const;
    static const char* op_name(Op op);

    const ParameterSet* params_;
    std::vector<Node> nodes_;
};

}  // namespace spclosure
