#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace spclosure {

/// All trainable scalars as one flat vector, with a layout descriptor mapping
/// named tensors (conv kernels, biases, B-matrix stencils) to slices. The
/// flat vector is the optimizer's view; named slices are the model's view.
class ParameterSet {
public:
    struct Slice {
        std::string name;
        size_t offset = 0;
        size_t count = 0;
        std::vector<int> dims;
    };

    /// Reserve a named slice (zero-initialized), returns its offset.
    size_t add(const std::string& name, std::vector<int> dims);

    size_t size() const { return values_.size(); }
    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    const Slice& slice(const std::string& name) const;
    bool has(const std::string& name) const;
    const std::vector<Slice>& slices() const { return slices_; }

private:
    std::vector<double> values_;
    std::vector<Slice> slices_;
};

}  // namespace spclosure
