#include "spclosure/convnet.hpp"

#include <cmath>
#include <sstream>

namespace spclosure {

int ConvArch::receptive_radius() const {
    int r = 0;
    for (int k : kernels) r += (k - 1) / 2;
    return r;
}

void ConvArch::validate() const {
    require(channels.size() >= 2, "ConvArch: need at least input and output channels");
    require(kernels.size() == channels.size() - 1, "ConvArch: kernels/channels mismatch");
    for (int c : channels) require(c >= 1, "ConvArch: zero-channel layer");
    for (int k : kernels) {
        require(k >= 1, "ConvArch: bad kernel width");
        require(k % 2 == 1, "ConvArch: kernel widths must be odd");
    }
}

std::string ConvArch::to_string() const {
    std::ostringstream os;
    for (size_t i = 0; i < channels.size(); ++i) os << (i ? "," : "") << channels[i];
    os << ";";
    for (size_t i = 0; i < kernels.size(); ++i) os << (i ? "," : "") << kernels[i];
    return os.str();
}

ConvArch ConvArch::parse(const std::string& s) {
    auto semi = s.find(';');
    require(semi != std::string::npos, "ConvArch::parse: missing ';'");
    auto parse_list = [](const std::string& part) {
        std::vector<int> out;
        std::istringstream is(part);
        std::string tok;
        while (std::getline(is, tok, ',')) out.push_back(std::stoi(tok));
        return out;
    };
    ConvArch arch{parse_list(s.substr(0, semi)), parse_list(s.substr(semi + 1))};
    arch.validate();
    return arch;
}

ConvNetParams declare_convnet(ParameterSet& params, const ConvArch& arch,
                              const std::string& prefix) {
    arch.validate();
    ConvNetParams net;
    for (int l = 0; l < arch.n_layers(); ++l) {
        const int ci = arch.channels[l], co = arch.channels[l + 1], k = arch.kernels[l];
        net.w_off.push_back(static_cast<long>(
            params.add(prefix + ".conv" + std::to_string(l) + ".w", {co, ci, k})));
        net.b_off.push_back(
            static_cast<long>(params.add(prefix + ".conv" + std::to_string(l) + ".b", {co})));
    }
    return net;
}

void init_glorot(ParameterSet& params, const ConvNetParams& net, const ConvArch& arch, Rng& rng) {
    for (int l = 0; l < arch.n_layers(); ++l) {
        const int ci = arch.channels[l], co = arch.channels[l + 1], k = arch.kernels[l];
        const double fan_in = static_cast<double>(ci) * k;
        const double fan_out = static_cast<double>(co) * k;
        const double stddev = std::sqrt(2.0 / (fan_in + fan_out));
        double* w = params.data() + net.w_off[l];
        for (int i = 0; i < co * ci * k; ++i) w[i] = rng.normal(0.0, stddev);
        double* b = params.data() + net.b_off[l];
        for (int i = 0; i < co; ++i) b[i] = 0.0;
    }
}

int convnet_forward_taped(Tape& tape, const ConvArch& arch, const ConvNetParams& net,
                          int padded_stack) {
    int h = padded_stack;
    for (int l = 0; l < arch.n_layers(); ++l) {
        h = tape.conv1d(h, net.w_off[l], net.b_off[l], arch.channels[l + 1], arch.kernels[l]);
        if (l + 1 < arch.n_layers()) h = tape.relu(h);
    }
    return h;
}

ConvNet make_convnet(const ConvArch& arch, uint64_t rng_seed) {
    arch.validate();
    ConvNet net;
    net.arch = arch;
    net.offsets = declare_convnet(net.params, arch, "cnn");
    Rng rng(rng_seed);
    init_glorot(net.params, net.offsets, arch, rng);
    return net;
}

Tensor convnet_forward(const ConvNet& net, const Tensor& input,
                       const std::vector<PadSpec>& channel_pads) {
    require(input.ch == net.arch.channels.front(), "convnet_forward: channel count mismatch");
    require(channel_pads.size() == static_cast<size_t>(input.ch),
            "convnet_forward: need one PadSpec per channel");
    Tape tape(&net.params);
    const int r = net.arch.receptive_radius();
    std::vector<int> parts;
    for (int c = 0; c < input.ch; ++c) {
        int leaf = tape.leaf(std::vector<double>(input.row(c), input.row(c) + input.n));
        parts.push_back(tape.pad(leaf, r, channel_pads[c]));
    }
    int out = convnet_forward_taped(tape, net.arch, net.offsets, tape.stack_ch(parts));
    return tape.val(out);
}

}  // namespace spclosure
