#pragma once

#include <string>
#include <vector>

#include "spclosure/random.hpp"
#include "spclosure/tape.hpp"
#include "spclosure/tensor.hpp"

namespace spclosure {

/// 1D CNN architecture: stride-1 same-length convolutions with odd kernels,
/// ReLU between hidden layers and a linear final layer.
struct ConvArch {
    std::vector<int> channels;  // e.g. {3, 20, 20, 4}
    std::vector<int> kernels;   // one per layer

    int n_layers() const { return static_cast<int>(kernels.size()); }
    /// Total receptive-field radius: sum of per-layer (kernel-1)/2.
    int receptive_radius() const;
    void validate() const;

    std::string to_string() const;           // "3,20,20,4;5,5,5"
    static ConvArch parse(const std::string& s);
};

/// Offsets of one CNN's weights/biases inside a ParameterSet.
struct ConvNetParams {
    std::vector<long> w_off, b_off;
};

/// Reserve slices "<prefix>.convL.w" / ".b" for every layer.
ConvNetParams declare_convnet(ParameterSet& params, const ConvArch& arch,
                              const std::string& prefix);

/// Glorot normal initialization: W ~ N(0, 2/(fan_in+fan_out)) with
/// fan = channels*kernel, biases zero. Deterministic given the Rng state.
void init_glorot(ParameterSet& params, const ConvNetParams& net, const ConvArch& arch, Rng& rng);

/// Taped forward over an already padded channel stack (pad each input channel
/// by receptive_radius() + any extra, then valid convolutions shrink back).
int convnet_forward_taped(Tape& tape, const ConvArch& arch, const ConvNetParams& net,
                          int padded_stack);

/// Standalone network owning its parameters; the closure models embed the
/// same pieces in their own ParameterSet instead.
struct ConvNet {
    ConvArch arch;
    ParameterSet params;
    ConvNetParams offsets;
};

ConvNet make_convnet(const ConvArch& arch, uint64_t rng_seed);

/// Plain forward: pads every input channel with its PadSpec, then runs the
/// valid convolution stack. Output is (channels.back() x input length).
Tensor convnet_forward(const ConvNet& net, const Tensor& input,
                       const std::vector<PadSpec>& channel_pads);

}  // namespace spclosure
