#include "spclosure/tape.hpp"

#include <cmath>

#include "spclosure/kernels.hpp"

namespace spclosure {

size_t ParameterSet::add(const std::string& name, std::vector<int> dims) {
    require(!has(name), "ParameterSet: duplicate slice '" + name + "'");
    size_t count = 1;
    for (int d : dims) {
        require(d > 0, "ParameterSet: non-positive dimension in '" + name + "'");
        count *= static_cast<size_t>(d);
    }
    Slice s{name, values_.size(), count, std::move(dims)};
    values_.resize(values_.size() + count, 0.0);
    slices_.push_back(std::move(s));
    return slices_.back().offset;
}

const ParameterSet::Slice& ParameterSet::slice(const std::string& name) const {
    for (const auto& s : slices_)
        if (s.name == name) return s;
    throw std::runtime_error("ParameterSet: unknown slice '" + name + "'");
}

bool ParameterSet::has(const std::string& name) const {
    for (const auto& s : slices_)
        if (s.name == name) return true;
    return false;
}

const char* Tape::op_name(Op op) {
    switch (op) {
        case Op::Leaf: return "leaf";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Scale: return "scale";
        case Op::Mul: return "mul";
        case Op::Square: return "square";
        case Op::Relu: return "relu";
        case Op::Pad: return "pad";
        case Op::SliceLen: return "slice_len";
        case Op::SliceCh: return "slice_ch";
        case Op::StackCh: return "stack_ch";
        case Op::ConcatLen: return "concat_len";
        case Op::Conv1d: return "conv1d";
        case Op::Stencil: return "stencil";
        case Op::StencilT: return "stencil_t";
        case Op::FixedStencil: return "fixed_stencil";
        case Op::Convection: return "convection";
        case Op::ScaleVec: return "scale_vec";
        case Op::SumSq: return "sumsq";
    }
    return "?";
}

void Tape::check_finite(const Node& n) const {
    if (!n.val.finite())
        throw std::runtime_error(std::string("tape: non-finite value produced by primitive '") +
                                 op_name(n.op) + "'");
}

int Tape::push(Node n) {
    forward(n);
    check_finite(n);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

int Tape::leaf(Tensor v) {
    Node n;
    n.op = Op::Leaf;
    n.val = std::move(v);
    check_finite(n);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

int Tape::add(int a, int b) {
    Node n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    return push(std::move(n));
}

int Tape::sub(int a, int b) {
    Node n;
    n.op = Op::Sub;
    n.a = a;
    n.b = b;
    return push(std::move(n));
}

int Tape::scale(int a, double c) {
    Node n;
    n.op = Op::Scale;
    n.a = a;
    n.c0 = c;
    return push(std::move(n));
}

int Tape::mul(int a, int b) {
    Node n;
    n.op = Op::Mul;
    n.a = a;
    n.b = b;
    return push(std::move(n));
}

int Tape::square(int a) {
    Node n;
    n.op = Op::Square;
    n.a = a;
    return push(std::move(n));
}

int Tape::relu(int a) {
    Node n;
    n.op = Op::Relu;
    n.a = a;
    return push(std::move(n));
}

int Tape::pad(int a, int depth, const PadSpec& spec) {
    Node n;
    n.op = Op::Pad;
    n.a = a;
    n.i0 = depth;
    n.pads = spec;
    return push(std::move(n));
}

int Tape::slice_len(int a, int offset, int len) {
    Node n;
    n.op = Op::SliceLen;
    n.a = a;
    n.i0 = offset;
    n.i1 = len;
    return push(std::move(n));
}

int Tape::slice_ch(int a, int channel) {
    Node n;
    n.op = Op::SliceCh;
    n.a = a;
    n.i0 = channel;
    return push(std::move(n));
}

int Tape::stack_ch(const std::vector<int>& parts) {
    Node n;
    n.op = Op::StackCh;
    n.many = parts;
    return push(std::move(n));
}

int Tape::concat_len(int a, int b) {
    Node n;
    n.op = Op::ConcatLen;
    n.a = a;
    n.b = b;
    return push(std::move(n));
}

int Tape::conv1d(int x, long woff, long boff, int co, int k) {
    Node n;
    n.op = Op::Conv1d;
    n.a = x;
    n.woff = woff;
    n.boff = boff;
    n.i0 = co;
    n.i1 = k;
    return push(std::move(n));
}

int Tape::stencil(int x, long woff, int B, bool constrained, const PadSpec& spec) {
    Node n;
    n.op = Op::Stencil;
    n.a = x;
    n.woff = woff;
    n.i0 = B;
    n.flag = constrained;
    n.pads = spec;
    return push(std::move(n));
}

int Tape::stencil_t(int y, long woff, int B, bool constrained, const PadSpec& spec) {
    Node n;
    n.op = Op::StencilT;
    n.a = y;
    n.woff = woff;
    n.i0 = B;
    n.flag = constrained;
    n.pads = spec;
    return push(std::move(n));
}

int Tape::fixed_stencil(int xp, std::vector<double> w, int lo, double scale, int n_out) {
    Node n;
    n.op = Op::FixedStencil;
    n.a = xp;
    n.aux = std::move(w);
    n.i0 = lo;
    n.i1 = n_out;
    n.c0 = scale;
    return push(std::move(n));
}

int Tape::convection(int xp, double c) {
    Node n;
    n.op = Op::Convection;
    n.a = xp;
    n.c0 = c;
    return push(std::move(n));
}

int Tape::scale_vec(int a, std::vector<double> diag) {
    Node n;
    n.op = Op::ScaleVec;
    n.a = a;
    n.aux = std::move(diag);
    return push(std::move(n));
}

int Tape::sumsq(int a) {
    Node n;
    n.op = Op::SumSq;
    n.a = a;
    return push(std::move(n));
}

namespace {

std::vector<double> raw_weights(const ParameterSet* params, long woff, int count) {
    require(params != nullptr, "tape: no ParameterSet bound");
    require(woff >= 0 && woff + count <= static_cast<long>(params->size()),
            "tape: parameter slice out of range");
    return std::vector<double>(params->data() + woff, params->data() + woff + count);
}

// Linear part of a padding rule: the affine inflow offset drops out of every
// derivative, so adjoints propagate with alpha = 0.
PadSpec linear_part(PadSpec spec) {
    spec.alpha = 0.0;
    return spec;
}

}  // namespace

void Tape::forward(Node& n) const {
    auto A = [&](int id) -> const Tensor& { return nodes_[id].val; };
    switch (n.op) {
        case Op::Leaf:
            break;
        case Op::Add: {
            const Tensor &x = A(n.a), &y = A(n.b);
            require(x.ch == y.ch && x.n == y.n, "tape add: shape mismatch");
            n.val = x;
            for (int i = 0; i < n.val.size(); ++i) n.val.v[i] += y.v[i];
            break;
        }
        case Op::Sub: {
            const Tensor &x = A(n.a), &y = A(n.b);
            require(x.ch == y.ch && x.n == y.n, "tape sub: shape mismatch");
            n.val = x;
            for (int i = 0; i < n.val.size(); ++i) n.val.v[i] -= y.v[i];
            break;
        }
        case Op::Scale: {
            n.val = A(n.a);
            for (double& v : n.val.v) v *= n.c0;
            break;
        }
        case Op::Mul: {
            const Tensor &x = A(n.a), &y = A(n.b);
            require(x.ch == y.ch && x.n == y.n, "tape mul: shape mismatch");
            n.val = x;
            for (int i = 0; i < n.val.size(); ++i) n.val.v[i] *= y.v[i];
            break;
        }
        case Op::Square: {
            n.val = A(n.a);
            for (double& v : n.val.v) v *= v;
            break;
        }
        case Op::Relu: {
            n.val = A(n.a);
            for (double& v : n.val.v) v = v > 0.0 ? v : 0.0;
            break;
        }
        case Op::Pad: {
            const Tensor& x = A(n.a);
            require(x.ch == 1, "tape pad: expected single channel");
            n.val = Tensor(pad_vector(x.v, n.i0, n.pads));
            break;
        }
        case Op::SliceLen: {
            const Tensor& x = A(n.a);
            require(x.ch == 1 && n.i0 >= 0 && n.i0 + n.i1 <= x.n, "tape slice_len: out of range");
            n.val = Tensor(std::vector<double>(x.v.begin() + n.i0, x.v.begin() + n.i0 + n.i1));
            break;
        }
        case Op::SliceCh: {
            const Tensor& x = A(n.a);
            require(n.i0 >= 0 && n.i0 < x.ch, "tape slice_ch: channel out of range");
            n.val = Tensor(std::vector<double>(x.row(n.i0), x.row(n.i0) + x.n));
            break;
        }
        case Op::StackCh: {
            require(!n.many.empty(), "tape stack_ch: empty part list");
            const int len = A(n.many[0]).n;
            n.val = Tensor(static_cast<int>(n.many.size()), len);
            for (size_t c = 0; c < n.many.size(); ++c) {
                const Tensor& x = A(n.many[c]);
                require(x.ch == 1 && x.n == len, "tape stack_ch: part shape mismatch");
                std::copy(x.v.begin(), x.v.end(), n.val.row(static_cast<int>(c)));
            }
            break;
        }
        case Op::ConcatLen: {
            const Tensor &x = A(n.a), &y = A(n.b);
            require(x.ch == 1 && y.ch == 1, "tape concat_len: expected single channel");
            n.val = Tensor(1, x.n + y.n);
            std::copy(x.v.begin(), x.v.end(), n.val.v.begin());
            std::copy(y.v.begin(), y.v.end(), n.val.v.begin() + x.n);
            break;
        }
        case Op::Conv1d: {
            const Tensor& x = A(n.a);
            const int co = n.i0, k = n.i1, ci = x.ch;
            const int lo = x.n - k + 1;
            require(lo >= 1, "tape conv1d: input shorter than kernel");
            auto w = raw_weights(params_, n.woff, co * ci * k);
            std::vector<double> b;
            if (n.boff >= 0) b = raw_weights(params_, n.boff, co);
            n.val = Tensor(co, lo);
            conv1d_valid(x.v.data(), ci, x.n, w.data(), n.boff >= 0 ? b.data() : nullptr, co, k,
                         n.val.v.data());
            break;
        }
        case Op::Stencil: {
            const Tensor& x = A(n.a);
            require(x.ch == 1, "tape stencil: expected single channel");
            const int B = n.i0;
            auto w = raw_weights(params_, n.woff, 2 * B + 1);
            n.aux = constrain_weights(w, n.flag);
            n.cache = pad_vector(x.v, B, n.pads);
            n.val = Tensor(stencil_valid(n.cache, n.aux));
            break;
        }
        case Op::StencilT: {
            const Tensor& y = A(n.a);
            require(y.ch == 1, "tape stencil_t: expected single channel");
            const int B = n.i0, len = y.n, k = 2 * B + 1;
            auto w = raw_weights(params_, n.woff, k);
            n.aux = constrain_weights(w, n.flag);
            if (n.pads.mode == PadMode::Periodic) {
                // Circulant transpose = correlation with the flipped kernel;
                // a direct gather keeps the rhs bit-exactly shift-equivariant.
                auto yp = pad_vector(y.v, B, n.pads);
                std::vector<double> out(len);
                for (int a = 0; a < len; ++a) {
                    double s = 0.0;
                    for (int j = 0; j < k; ++j) s += n.aux[k - 1 - j] * yp[a + j];
                    out[a] = s;
                }
                n.val = Tensor(std::move(out));
            } else {
                // Scatter into padded space, then fold ghost coefficients back.
                std::vector<double> z(len + 2 * B, 0.0);
                for (int i = 0; i < len; ++i) {
                    const double yi = y.v[i];
                    for (int j = 0; j < k; ++j) z[i + j] += n.aux[j] * yi;
                }
                std::vector<double> out(len, 0.0);
                fold_pad_adjoint(z, B, n.pads, out);
                n.val = Tensor(std::move(out));
            }
            break;
        }
        case Op::FixedStencil: {
            const Tensor& x = A(n.a);
            require(x.ch == 1, "tape fixed_stencil: expected single channel");
            n.val = Tensor(fixed_stencil_valid(x.v, n.i1, n.aux, n.i0, n.c0));
            break;
        }
        case Op::Convection: {
            const Tensor& x = A(n.a);
            require(x.ch == 1, "tape convection: expected single channel");
            n.val = Tensor(convection_valid(x.v, n.c0));
            break;
        }
        case Op::ScaleVec: {
            const Tensor& x = A(n.a);
            require(x.ch == 1 && x.n == static_cast<int>(n.aux.size()),
                    "tape scale_vec: length mismatch");
            n.val = x;
            for (int i = 0; i < x.n; ++i) n.val.v[i] *= n.aux[i];
            break;
        }
        case Op::SumSq: {
            const Tensor& x = A(n.a);
            double s = 0.0;
            for (double v : x.v) s += v * v;
            n.val = Tensor(1, 1);
            n.val.v[0] = s;
            break;
        }
    }
}

void Tape::replay() {
    for (auto& n : nodes_) {
        if (n.op == Op::Leaf) continue;
        forward(n);
    }
}

void Tape::backward(int root, std::vector<double>& grad) const {
    require(root >= 0 && root < static_cast<int>(nodes_.size()), "tape backward: bad root");
    require(nodes_[root].val.size() == 1, "tape backward: root must be scalar");
    const size_t np = params_ ? params_->size() : 0;
    grad.assign(np, 0.0);

    std::vector<Tensor> adj(nodes_.size());
    auto bump = [&](int id, const Tensor& shape) -> Tensor& {
        if (adj[id].n == 0 && shape.size() > 0) adj[id] = Tensor(shape.ch, shape.n, 0.0);
        return adj[id];
    };
    adj[root] = Tensor(1, 1);
    adj[root].v[0] = 1.0;

    for (int id = root; id >= 0; --id) {
        const Node& n = nodes_[id];
        if (adj[id].n == 0) continue;  // not reachable from root
        const Tensor& g = adj[id];
        switch (n.op) {
            case Op::Leaf:
                break;
            case Op::Add: {
                Tensor& ga = bump(n.a, g);
                Tensor& gb = bump(n.b, g);
                for (int i = 0; i < g.size(); ++i) {
                    ga.v[i] += g.v[i];
                    gb.v[i] += g.v[i];
                }
                break;
            }
            case Op::Sub: {
                Tensor& ga = bump(n.a, g);
                Tensor& gb = bump(n.b, g);
                for (int i = 0; i < g.size(); ++i) {
                    ga.v[i] += g.v[i];
                    gb.v[i] -= g.v[i];
                }
                break;
            }
            case Op::Scale: {
                Tensor& ga = bump(n.a, g);
                for (int i = 0; i < g.size(); ++i) ga.v[i] += n.c0 * g.v[i];
                break;
            }
            case Op::Mul: {
                const Tensor &x = nodes_[n.a].val, &y = nodes_[n.b].val;
                Tensor& ga = bump(n.a, g);
                Tensor& gb = bump(n.b, g);
                for (int i = 0; i < g.size(); ++i) {
                    ga.v[i] += y.v[i] * g.v[i];
                    gb.v[i] += x.v[i] * g.v[i];
                }
                break;
            }
            case Op::Square: {
                const Tensor& x = nodes_[n.a].val;
                Tensor& ga = bump(n.a, g);
                for (int i = 0; i < g.size(); ++i) ga.v[i] += 2.0 * x.v[i] * g.v[i];
                break;
            }
            case Op::Relu: {
                const Tensor& x = nodes_[n.a].val;
                Tensor& ga = bump(n.a, g);
                for (int i = 0; i < g.size(); ++i)
                    if (x.v[i] > 0.0) ga.v[i] += g.v[i];
                break;
            }
            case Op::Pad: {
                Tensor& ga = bump(n.a, nodes_[n.a].val);
                fold_pad_adjoint(g.v, n.i0, n.pads, ga.v);
                break;
            }
            case Op::SliceLen: {
                Tensor& ga = bump(n.a, nodes_[n.a].val);
                for (int i = 0; i < n.i1; ++i) ga.v[n.i0 + i] += g.v[i];
                break;
            }
            case Op::SliceCh: {
                const Tensor& x = nodes_[n.a].val;
                Tensor& ga = bump(n.a, x);
                double* row = ga.row(n.i0);
                for (int i = 0; i < x.n; ++i) row[i] += g.v[i];
                break;
            }
            case Op::StackCh: {
                for (size_t c = 0; c < n.many.size(); ++c) {
                    Tensor& gp = bump(n.many[c], nodes_[n.many[c]].val);
                    const double* grow = g.row(static_cast<int>(c));
                    for (int i = 0; i < gp.n; ++i) gp.v[i] += grow[i];
                }
                break;
            }
            case Op::ConcatLen: {
                const Tensor &x = nodes_[n.a].val, &y = nodes_[n.b].val;
                Tensor& ga = bump(n.a, x);
                Tensor& gb = bump(n.b, y);
                for (int i = 0; i < x.n; ++i) ga.v[i] += g.v[i];
                for (int i = 0; i < y.n; ++i) gb.v[i] += g.v[x.n + i];
                break;
            }
            case Op::Conv1d: {
                const Tensor& x = nodes_[n.a].val;
                const int co = n.i0, k = n.i1, ci = x.ch;
                auto w = raw_weights(params_, n.woff, co * ci * k);
                Tensor& ga = bump(n.a, x);
                conv1d_valid_adjoint(x.v.data(), ci, x.n, w.data(), co, k, g.v.data(),
                                     ga.v.data(), np ? grad.data() + n.woff : nullptr,
                                     (np && n.boff >= 0) ? grad.data() + n.boff : nullptr);
                break;
            }
            case Op::Stencil: {
                const int B = n.i0, k = 2 * B + 1;
                const Tensor& x = nodes_[n.a].val;
                Tensor& ga = bump(n.a, x);
                // d/d(xp): scatter g through the stencil, then fold ghosts.
                std::vector<double> gxp(n.cache.size(), 0.0);
                for (int i = 0; i < g.n; ++i) {
                    const double gi = g.v[i];
                    for (int j = 0; j < k; ++j) gxp[i + j] += n.aux[j] * gi;
                }
                fold_pad_adjoint(gxp, B, n.pads, ga.v);
                if (np) {
                    std::vector<double> gw(k, 0.0);
                    for (int i = 0; i < g.n; ++i) {
                        const double gi = g.v[i];
                        for (int j = 0; j < k; ++j) gw[j] += gi * n.cache[i + j];
                    }
                    if (n.flag) {
                        double mean = sum(gw) / k;
                        for (double& v : gw) v -= mean;
                    }
                    for (int j = 0; j < k; ++j) grad[n.woff + j] += gw[j];
                }
                break;
            }
            case Op::StencilT: {
                const int B = n.i0, k = 2 * B + 1;
                const Tensor& y = nodes_[n.a].val;
                Tensor& ga = bump(n.a, y);
                // d/dy = forward stencil applied to the adjoint.
                std::vector<double> gp = pad_vector(g.v, B, linear_part(n.pads));
                for (int i = 0; i < y.n; ++i) {
                    double s = 0.0;
                    for (int j = 0; j < k; ++j) s += n.aux[j] * gp[i + j];
                    ga.v[i] += s;
                }
                if (np) {
                    std::vector<double> gw(k, 0.0);
                    for (int i = 0; i < y.n; ++i) {
                        const double yi = y.v[i];
                        for (int j = 0; j < k; ++j) gw[j] += yi * gp[i + j];
                    }
                    if (n.flag) {
                        double mean = sum(gw) / k;
                        for (double& v : gw) v -= mean;
                    }
                    for (int j = 0; j < k; ++j) grad[n.woff + j] += gw[j];
                }
                break;
            }
            case Op::FixedStencil: {
                Tensor& ga = bump(n.a, nodes_[n.a].val);
                fixed_stencil_valid_adjoint(n.i1, n.aux, n.i0, n.c0, g.v, ga.v);
                break;
            }
            case Op::Convection: {
                const Tensor& x = nodes_[n.a].val;
                Tensor& ga = bump(n.a, x);
                convection_valid_adjoint(x.v, n.c0, g.v, ga.v);
                break;
            }
            case Op::ScaleVec: {
                Tensor& ga = bump(n.a, nodes_[n.a].val);
                for (int i = 0; i < g.size(); ++i) ga.v[i] += n.aux[i] * g.v[i];
                break;
            }
            case Op::SumSq: {
                const Tensor& x = nodes_[n.a].val;
                Tensor& ga = bump(n.a, x);
                const double gs = 2.0 * g.v[0];
                for (int i = 0; i < x.size(); ++i) ga.v[i] += gs * x.v[i];
                break;
            }
        }
    }
}

}  // namespace spclosure
